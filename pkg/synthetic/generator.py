"""
Economias sintéticas com tecnologias e produtividades conhecidas
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from cascade.incidence import CascadingOrder, IncidenceMatrix, cascading_order
from cces.aggregator import CcesTechnology, cces_unit_cost, foc_shares
from cces.estimator import SectorData, nest_factors
from config import SolverConfig
from equilibrium.economy import Economy, EconomyKind
from equilibrium.solver import network_shares, solve_equilibrium
from iotable.linked_table import LinkedIOTable, ShareMatrix, make_table

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SyntheticEconomy:
    table: LinkedIOTable
    techs: Tuple[CcesTechnology, ...]
    tau: np.ndarray
    order: CascadingOrder
    economy: Economy

    @property
    def J(self) -> int:
        return self.table.J


def reference_network(J: int, rng: np.random.Generator, density: float = 0.5,
                      colsum: Tuple[float, float] = (0.3, 0.7),
                      capital_split: Tuple[float, float] = (0.2, 0.4)) -> ShareMatrix:
    """Rede A esparsa e não negativa com colunas somando em colsum; valor adicionado em a_K e a_L"""
    mask = rng.random((J, J)) < density
    np.fill_diagonal(mask, False)
    raw = rng.random((J, J)) * mask
    totals = raw.sum(axis=0)
    target = rng.uniform(*colsum, size=J)
    A = np.where(totals > 0, raw / np.where(totals > 0, totals, 1.0) * target, 0.0)
    a0 = 1.0 - A.sum(axis=0)
    a_K = a0 * rng.uniform(*capital_split, size=J)
    a_L = a0 - a_K
    return ShareMatrix(S=np.vstack([A, a_K, a_L]),
                       sectors=tuple(f's{j:03d}' for j in range(J)))


def technology_from_shares(shares: np.ndarray, factors: np.ndarray, gamma: np.ndarray,
                           sector: Optional[str] = None) -> CcesTechnology:
    """α tais que as CPOs a preços unitários reproduzem shares (todos os π̂ valem 1)"""
    remaining = 1.0
    alpha = np.empty(len(factors) - 1)
    for n in range(len(factors) - 1, 0, -1):
        alpha[n - 1] = shares[factors[n]] / remaining
        remaining -= shares[factors[n]]
    return CcesTechnology(np.asarray(factors, dtype=int), alpha, np.asarray(gamma, dtype=float),
                          len(shares), sector)


def random_technology(n_goods: int, rng: np.random.Generator,
                      gamma_range: Tuple[float, float] = (-1.0, 0.9),
                      sector: Optional[str] = None) -> CcesTechnology:
    """Tecnologia com todos os fatores ativos, ordem L, K, bens 0..n_goods-1"""
    n = n_goods + 2
    factors = np.concatenate([[n - 1, n - 2], np.arange(n_goods)])
    alpha = rng.uniform(0.1, 0.9, size=n - 1)
    gamma = rng.uniform(*gamma_range, size=n - 1)
    return CcesTechnology(factors, alpha, gamma, n, sector)


def random_sector_data(tech: CcesTechnology, rng: np.random.Generator,
                       spread: float = 0.3, tau=(1.0, 1.0)) -> SectorData:
    """Dois períodos gerados exatamente pela tecnologia: participações pelas CPOs, q = C/τ"""
    prices = np.exp(rng.normal(0.0, spread, size=(2, tech.n_factors)))
    shares = foc_shares(tech, prices)
    q = np.array([cces_unit_cost(prices[t], tech, tau[t])[0] for t in (0, 1)])
    return SectorData(shares=shares, prices=prices, q=q, sector=tech.sector)


def generate_economy(J: int, seed: int = 0, density: float = 0.5,
                     colsum: Tuple[float, float] = (0.3, 0.7),
                     gamma_range: Tuple[float, float] = (-1.0, 0.9),
                     tau_spread: float = 0.05, price_spread: float = 0.1,
                     cfg: Optional[SolverConfig] = None) -> SyntheticEconomy:
    """
    Economia CCES restauradora de J setores com dados dos dois períodos

    Período 1 é a referência (τ = p = r = w = 1); o período 0 vem do
    equilíbrio com τ₀, r₀, w₀ sorteados. Demanda final dividida em h, g e m;
    produção Y = (I − A)⁻¹F em valores monetários.
    """
    if J < 1:
        raise ValueError("J deve ser >= 1")
    rng = np.random.default_rng(seed)
    reference = reference_network(J, rng, density, colsum)

    inc = IncidenceMatrix.from_matrix(reference.A, primary=True, final=True,
                                      sectors=reference.sectors)
    order = cascading_order(inc)

    techs: List[CcesTechnology] = []
    for j in range(J):
        column = reference.S[:, j]
        factors = nest_factors(order, column[None, :])
        gamma = rng.uniform(*gamma_range, size=len(factors) - 1)
        techs.append(technology_from_shares(column, factors, gamma, reference.sectors[j]))
    economy = Economy(kind=EconomyKind.CCES, reference=reference, techs=tuple(techs))

    tau0 = np.exp(rng.normal(0.0, tau_spread, size=J))
    r0, w0 = np.exp(rng.normal(0.0, price_spread, size=2))
    state = solve_equilibrium(economy, tau0, r0, w0, cfg).ensure_converged()
    shares = (state.S.S, network_shares(economy, np.ones(J)).S)

    F1 = rng.uniform(50.0, 150.0, size=J)
    F = np.vstack([F1 * rng.uniform(0.9, 1.1, size=J), F1])
    h_frac = rng.uniform(0.5, 0.6, size=(2, J))
    g_frac = rng.uniform(0.3, 0.4, size=(2, J))
    h, g = F * h_frac, F * g_frac
    m = F - h - g

    Y = np.vstack([np.linalg.solve(np.eye(J) - shares[t][:J], F[t]) for t in (0, 1)])
    x = np.stack([shares[t][:J] * Y[t][None, :] for t in (0, 1)])
    rK = np.vstack([shares[t][J] * Y[t] for t in (0, 1)])
    wL = np.vstack([shares[t][J + 1] * Y[t] for t in (0, 1)])

    table = make_table(reference.sectors, x=x, y=Y, rK=rK, wL=wL, h=h, g=g, m=m,
                       p=np.vstack([state.p, np.ones(J)]), r=[r0, 1.0], w=[w0, 1.0])
    logger.info("Economia sintética: J=%d, semente %d, %d iterações no período 0",
                J, seed, state.iterations)
    return SyntheticEconomy(table=table, techs=tuple(techs), tau=np.vstack([tau0, np.ones(J)]),
                            order=order, economy=economy)


def random_economy(J: int, seed: int = 0, density: float = 0.5,
                   colsum: Tuple[float, float] = (0.3, 0.7), kind: str = 'cd') -> Economy:
    """Economia sem tecnologias CCES (Cobb-Douglas, Leontief ou simples) sobre rede aleatória"""
    rng = np.random.default_rng(seed)
    return Economy(kind=EconomyKind.parse(kind), reference=reference_network(J, rng, density, colsum))
