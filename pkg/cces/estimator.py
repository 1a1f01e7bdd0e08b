"""
Estimação dos parâmetros CCES: fórmula fechada de dois pontos e NLP multiponto
"""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, logit

from cascade.incidence import CascadingOrder
from cces.aggregator import CcesTechnology, log_ces
from config import GAMMA_EPS, SHARE_FLOOR, THREADS
from errors import DegenerateNest, EstimationError, ShareFloorWarning
from iotable.linked_table import LinkedIOTable, cost_shares

logger = logging.getLogger(__name__)

DIFF_TOL = 1e-12

OrderLike = Union[CascadingOrder, Sequence[int], np.ndarray, None]


@dataclass(frozen=True, eq=False)
class SectorData:
    """
    Participações, preços dos fatores e preço do produto de um setor em T períodos

    shares e prices têm forma (T, I+2) com colunas (bens..., K, L); q tem forma (T,).
    """
    shares: np.ndarray
    prices: np.ndarray
    q: np.ndarray
    sector: Optional[str] = None

    def __post_init__(self):
        if self.shares.shape != self.prices.shape or self.shares.shape[0] != len(self.q):
            raise ValueError("shares, prices e q com formas incompatíveis")
        if self.shares.shape[0] < 2:
            raise EstimationError("São necessários ao menos dois períodos")

    @property
    def T(self) -> int:
        return self.shares.shape[0]

    @property
    def n_factors(self) -> int:
        return self.shares.shape[1]

    @classmethod
    def from_table(cls, table: LinkedIOTable, j: int) -> 'SectorData':
        shares = np.vstack([cost_shares(table, t).S[:, j] for t in (0, 1)])
        prices = np.vstack([table.prices(t) for t in (0, 1)])
        return cls(shares=shares, prices=prices, q=table.p[:, j].copy(),
                   sector=table.sectors[j])


# Nome do caso de dois períodos; SectorData aceita T >= 2
TwoPeriodSectorData = SectorData


def _goods_order(order: OrderLike, n_goods: int) -> np.ndarray:
    if order is None:
        return np.arange(n_goods)
    perm = order.perm if isinstance(order, CascadingOrder) else np.asarray(order, dtype=int)
    if sorted(perm.tolist()) != list(range(n_goods)):
        raise ValueError("Ordem em cascata incompatível com o número de bens")
    return perm


def nest_factors(order: OrderLike, shares: np.ndarray) -> np.ndarray:
    """Trabalho, capital e bens na ordem em cascata, restritos aos fatores com participação positiva"""
    n = shares.shape[-1]
    I = n - 2
    candidates = np.concatenate([[I + 1, I], _goods_order(order, I)])
    positive = (np.atleast_2d(shares) > 0).any(axis=0)
    factors = candidates[positive[candidates]]
    if not len(factors):
        raise EstimationError("Setor sem nenhum fator com participação positiva")
    return factors.astype(int)


def prepared_shares(data: SectorData, factors: np.ndarray,
                    share_floor: float = SHARE_FLOOR) -> np.ndarray:
    """Participações dos fatores ativos, com piso nos zeros de um único período"""
    S = data.shares[:, factors].astype(float)
    if (S < 0).any():
        raise EstimationError(f"Participações negativas no setor {data.sector}")
    zeros = S <= 0
    if zeros.any():
        cols = np.nonzero(zeros.any(axis=0))[0]
        warnings.warn(
            f"Setor {data.sector}: participação nula em parte dos períodos para os fatores "
            f"{factors[cols].tolist()}; usando piso {share_floor:g}",
            ShareFloorWarning, stacklevel=3)
        S = np.where(zeros, share_floor, S)
    return S


def _nest_observations(S: np.ndarray, P: np.ndarray, n: int, log_inner_pi: np.ndarray):
    inner = S[:, :n].sum(axis=1)
    y = np.log(S[:, n] / inner)
    x = np.log(P[:, n]) - log_inner_pi
    return y, x


def estimate_two_point(data: SectorData, order: OrderLike = None,
                       gamma_eps: float = GAMMA_EPS, share_floor: float = SHARE_FLOOR,
                       tol: float = DIFF_TOL) -> CcesTechnology:
    """
    Parâmetros restauradores de dois pontos, do ninho mais interno para fora

    Para cada ninho, y_t = ln(s_f/S_interno) e x_t = ln(p_f/π̂_interno):
    γ = Δy/Δx e logit α = (x₁y₀ − x₀y₁)/Δx. Com Δx e Δy nulos o ninho é
    indeterminado e recebe γ = 0, α = participação em t=1.

    Raises:
        DegenerateNest: Δx nulo com Δy não nulo
    """
    if data.T != 2:
        raise EstimationError(f"Estimação de dois pontos requer T=2 (recebido T={data.T})")
    factors = nest_factors(order, data.shares)
    S = prepared_shares(data, factors, share_floor)
    P = data.prices[:, factors]
    if (P <= 0).any():
        raise EstimationError(f"Preços não positivos no setor {data.sector}")

    log_pi = np.log(P[:, 0])
    alphas, gammas = [], []
    for n in range(1, len(factors)):
        y, x = _nest_observations(S, P, n, log_pi)
        dy, dx = y[1] - y[0], x[1] - x[0]
        if abs(dx) <= tol:
            if abs(dy) > tol:
                raise DegenerateNest(n, int(factors[n]), data.sector, dy)
            gamma = 0.0
            alpha = float(expit(y[1]))
        else:
            gamma = dy / dx
            alpha = float(expit((x[1] * y[0] - x[0] * y[1]) / dx))
        alphas.append(alpha)
        gammas.append(gamma)
        log_pi = log_ces(np.log(P[:, n]), log_pi, alpha, gamma, gamma_eps)

    logger.debug("Setor %s: %d ninhos estimados", data.sector, len(alphas))
    return CcesTechnology(factors, np.array(alphas), np.array(gammas),
                          data.n_factors, data.sector)


def estimate_nestwise(data: SectorData, order: OrderLike = None,
                      gamma_eps: float = GAMMA_EPS, share_floor: float = SHARE_FLOOR,
                      tol: float = DIFF_TOL) -> CcesTechnology:
    """Mínimos quadrados ninho a ninho ao longo da recursão de π̂ (ajustes independentes)"""
    factors = nest_factors(order, data.shares)
    S = prepared_shares(data, factors, share_floor)
    P = data.prices[:, factors]
    log_pi = np.log(P[:, 0])
    alphas, gammas = [], []
    for n in range(1, len(factors)):
        y, x = _nest_observations(S, P, n, log_pi)
        if np.ptp(x) <= tol:
            gamma = 0.0
            alpha = float(expit(y[-1] if np.ptp(y) <= tol else y.mean()))
        else:
            X = np.column_stack([np.ones_like(x), x])
            coef = np.linalg.lstsq(X, y, rcond=None)[0]
            alpha, gamma = float(expit(coef[0])), float(coef[1])
        alphas.append(alpha)
        gammas.append(gamma)
        log_pi = log_ces(np.log(P[:, n]), log_pi, alpha, gamma, gamma_eps)
    return CcesTechnology(factors, np.array(alphas), np.array(gammas),
                          data.n_factors, data.sector)


def nested_residuals(logit_alpha: np.ndarray, gamma: np.ndarray, S: np.ndarray,
                     P: np.ndarray, gamma_eps: float = GAMMA_EPS) -> np.ndarray:
    """Resíduos ε_nt das regressões de cada ninho, com π̂ atualizado pelos próprios parâmetros"""
    log_pi = np.log(P[:, 0])
    eps = np.empty((len(gamma), P.shape[0]))
    for n in range(1, P.shape[1]):
        y, x = _nest_observations(S, P, n, log_pi)
        eps[n - 1] = y - logit_alpha[n - 1] - gamma[n - 1] * x
        log_pi = log_ces(np.log(P[:, n]), log_pi, expit(logit_alpha[n - 1]),
                         gamma[n - 1], gamma_eps)
    return eps


@dataclass
class MultipointFit:
    tech: CcesTechnology
    ssr: float
    converged: bool
    iterations: int
    message: str
    init_ssr: float


def estimate_multipoint(data: SectorData, order: OrderLike = None,
                        init: Optional[CcesTechnology] = None,
                        maxiter: int = 500, gtol: float = 1e-10,
                        gamma_eps: float = GAMMA_EPS,
                        share_floor: float = SHARE_FLOOR) -> MultipointFit:
    """
    Minimiza Σ_n Σ_t ε_nt² conjuntamente sobre (α, γ) de todos os ninhos

    Parâmetros em (logit α, γ); BFGS com gradiente numérico. Parte do ajuste
    ninho a ninho e devolve o melhor dos dois, de modo que o SSR conjunto nunca
    supera o dos ajustes independentes.
    """
    factors = nest_factors(order, data.shares)
    if init is None:
        init = estimate_nestwise(data, order, gamma_eps, share_floor)
    elif not np.array_equal(init.factors, factors):
        raise ValueError("Tecnologia inicial com ninhos diferentes dos dados")
    S = prepared_shares(data, factors, share_floor)
    P = data.prices[:, factors]
    k = init.nests
    if k == 0:
        return MultipointFit(init, 0.0, True, 0, "sem ninhos", 0.0)

    def ssr(theta: np.ndarray) -> float:
        eps = nested_residuals(theta[:k], theta[k:], S, P, gamma_eps)
        return float(np.sum(eps ** 2))

    x0 = np.concatenate([logit(np.clip(init.alpha, 1e-15, 1 - 1e-15)), init.gamma])
    ssr0 = ssr(x0)
    with np.errstate(over='ignore', invalid='ignore'):
        result = minimize(ssr, x0, method='BFGS', options={'maxiter': maxiter, 'gtol': gtol})

    if np.isfinite(result.fun) and result.fun < ssr0:
        theta, best = result.x, float(result.fun)
    else:
        theta, best = x0, ssr0
    converged = bool(result.success) or best < 1e-20
    if not converged:
        logger.warning("Setor %s: NLP não convergiu (%s)", data.sector, result.message)
    tech = init.with_params(expit(theta[:k]), theta[k:])
    return MultipointFit(tech, best, converged, int(result.nit), str(result.message), ssr0)


def estimate_sectors(table: LinkedIOTable, order: OrderLike = None,
                     gamma_eps: float = GAMMA_EPS, share_floor: float = SHARE_FLOOR,
                     max_workers: int = THREADS) -> List[CcesTechnology]:
    """Estimação de dois pontos de todos os setores, em paralelo"""
    results: Dict[int, CcesTechnology] = {}
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        futures = {
            executor.submit(estimate_two_point, SectorData.from_table(table, j), order,
                            gamma_eps, share_floor): j
            for j in range(table.J)
        }
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    logger.info("%d setores estimados", table.J)
    return [results[j] for j in range(table.J)]
