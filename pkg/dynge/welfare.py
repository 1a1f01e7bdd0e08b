"""
Equilíbrio geral dinâmico: calibração do capital, equilíbrio alternativo, SROP e sinergia
"""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from config import BETA, DELTA, THREADS, SolverConfig
from equilibrium.economy import Economy
from equilibrium.solver import equilibrium_prices, network_shares
from errors import CalibrationError, EquilibriumError, NonConvergence, UndefinedElasticityWarning
from household.demand import HouseholdModel, expenditure_shares, price_index
from iotable.linked_table import LinkedIOTable

logger = logging.getLogger(__name__)

H_TOL = 1e-10
H_MAX_ITER = 1000

SectorRef = Union[int, str]


@dataclass(frozen=True, eq=False)
class BaseAggregates:
    """Agregados dos dois períodos; vetores setoriais monetários do período de referência"""
    H0: float
    H1: float
    G0: float
    G1: float
    M0: float
    M1: float
    K0: float
    K1: float
    L0: float
    L1: float
    r1: float
    w1: float
    h1: np.ndarray
    g1: np.ndarray
    m1: np.ndarray
    y1: np.ndarray
    p1: np.ndarray
    sectors: tuple = ()

    @property
    def kappa(self) -> np.ndarray:
        """Composição do investimento κ_i = p_i g_i / G₁"""
        return self.g1 / self.G1

    @classmethod
    def from_table(cls, table: LinkedIOTable) -> 'BaseAggregates':
        K = table.rK.sum(axis=1) / table.r
        L = table.wL.sum(axis=1) / table.w
        return cls(
            H0=float(table.h[0].sum()), H1=float(table.h[1].sum()),
            G0=float(table.g[0].sum()), G1=float(table.g[1].sum()),
            M0=float(table.m[0].sum()), M1=float(table.m[1].sum()),
            K0=float(K[0]), K1=float(K[1]), L0=float(L[0]), L1=float(L[1]),
            r1=float(table.r[1]), w1=float(table.w[1]),
            h1=table.h[1].copy(), g1=table.g[1].copy(), m1=table.m[1].copy(),
            y1=table.y[1].copy(), p1=table.p[1].copy(), sectors=table.sectors,
        )


@dataclass
class CapitalCalibration:
    z0rho: float
    z1rho: float
    K0: float
    K1: float
    K2: float
    delta: float
    beta: float
    eta_K: float
    psi_ratio: float

    @property
    def eta_defined(self) -> bool:
        return bool(np.isfinite(self.eta_K))

    @property
    def investment0(self) -> float:
        return self.K1 - (1 - self.delta) * self.K0

    @property
    def investment1(self) -> float:
        return self.K2 - (1 - self.delta) * self.K1


def calibrate_capital(base: Union[BaseAggregates, LinkedIOTable], psi_ratio: float,
                      delta: float = DELTA, beta: float = BETA) -> CapitalCalibration:
    """
    z₀ρ pelo orçamento de t=0, z₁ρ pela equação de Euler entre os dois períodos,
    K₂ pelo orçamento de t=1 e η_K pela elasticidade em arco

    Args:
        psi_ratio: ψ(p₁)/ψ(p₀)

    Raises:
        CalibrationError: K₁ <= (1−δ)K₀, G não positivo ou z₁ρ <= 0
    """
    if isinstance(base, LinkedIOTable):
        base = BaseAggregates.from_table(base)
    if not 0 < delta < 1 or not 0 < beta < 1:
        raise CalibrationError(f"delta e beta devem estar em (0, 1): delta={delta}, beta={beta}")
    if base.G0 <= 0 or base.G1 <= 0:
        raise CalibrationError(f"Formação de capital não positiva: G0={base.G0}, G1={base.G1}")
    inv0 = base.K1 - (1 - delta) * base.K0
    if inv0 <= 0:
        raise CalibrationError(f"K1={base.K1:.6g} <= (1-delta)K0={(1 - delta) * base.K0:.6g}")

    z0rho = base.G0 / inv0
    z1rho = (psi_ratio * z0rho / beta - base.r1) / (1 - delta)
    if z1rho <= 0:
        raise CalibrationError(
            f"Calibração inviável: z1rho={z1rho:.6g} (psi_ratio={psi_ratio:.6g}, "
            f"z0rho={z0rho:.6g}, r1={base.r1:.6g}, delta={delta:.6g}, beta={beta:.6g})")
    K2 = base.G1 / z1rho + (1 - delta) * base.K1
    inv1 = K2 - (1 - delta) * base.K1

    if abs(z1rho - z0rho) <= 1e-12 * abs(z0rho):
        eta = float('nan')
        logger.info("η_K indefinido: z1rho = z0rho")
    else:
        eta = (inv1 - inv0) / (z1rho - z0rho) * z0rho / inv0
    return CapitalCalibration(z0rho=z0rho, z1rho=z1rho, K0=base.K0, K1=base.K1, K2=K2,
                              delta=delta, beta=beta, eta_K=eta, psi_ratio=psi_ratio)


@dataclass
class AltState:
    tau_check: np.ndarray
    p_check: np.ndarray
    z1rho_check: float
    K2_check: float
    G_check: float
    H_check: float
    L_check: float
    benefit: float
    cost: float
    budget_residual: float
    iterations: int

    @property
    def net_benefit(self) -> float:
        return self.benefit - self.cost


def alternative_equilibrium(econ: Economy, hh: HouseholdModel, calib: CapitalCalibration,
                            base: BaseAggregates, tau_check, cfg: Optional[SolverConfig] = None,
                            tol: float = H_TOL, max_iter: int = H_MAX_ITER) -> AltState:
    """
    Equilíbrio sob produtividade alternativa τ̌ no período de referência

    r, w e M ficam fixos; κ congelado; Ȟ iterado pelo orçamento até variação
    relativa < tol.

    Raises:
        NonConvergence: preços ou o laço de Ȟ não convergem
        EquilibriumError: [I − Ǎ] singular
    """
    tau_check = np.asarray(tau_check, dtype=float)
    if (tau_check <= 0).any():
        raise ValueError("tau_check deve ser positivo")
    delta, r1, w1 = calib.delta, base.r1, base.w1

    p_check = equilibrium_prices(econ, tau_check, r1, w1, cfg)
    psi_ratio = price_index(p_check, hh) / price_index(base.p1, hh)

    z_check = (psi_ratio * (calib.z1rho * (1 - delta) + r1) - r1) / (1 - delta)
    eta = calib.eta_K
    if not calib.eta_defined:
        eta = 0.0
        if z_check != calib.z1rho:
            warnings.warn("η_K indefinido; investimento mantido no valor de referência",
                          UndefinedElasticityWarning, stacklevel=2)
    inv_check = calib.investment1 + eta * (z_check - calib.z1rho) * calib.investment0 / calib.z0rho
    K2_check = inv_check + (1 - delta) * calib.K1
    G_check = z_check * inv_check

    shares = network_shares(econ, p_check, r1, w1, tau_check)
    try:
        labor = np.linalg.solve((np.eye(econ.J) - shares.A).T, shares.a_L)
    except np.linalg.LinAlgError as e:
        raise EquilibriumError(f"Inversa de Leontief singular: {e}")

    b_check = expenditure_shares(p_check, hh)
    fixed_demand = base.kappa * G_check + base.m1
    income = r1 * calib.K1 - G_check - base.M1

    H = base.H1
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        H_new = income + labor @ (b_check * H + fixed_demand)
        change = abs(H_new - H) / max(abs(H), 1e-300)
        H = H_new
        if change < tol:
            converged = True
            break
    if not converged:
        raise NonConvergence("Laço do consumo Ȟ não convergiu", iterations, change)

    wage_bill = float(labor @ (b_check * H + fixed_demand))
    L_check = wage_bill / w1
    residual = H + G_check + base.M1 - r1 * calib.K1 - wage_bill
    benefit = H / psi_ratio - base.H1
    cost = wage_bill - w1 * base.L1
    return AltState(tau_check=tau_check, p_check=p_check, z1rho_check=z_check,
                    K2_check=K2_check, G_check=G_check, H_check=H, L_check=L_check,
                    benefit=benefit, cost=cost, budget_residual=residual,
                    iterations=iterations)


def _sector_index(base: BaseAggregates, j: SectorRef) -> int:
    if isinstance(j, (int, np.integer)):
        if not 0 <= j < len(base.y1):
            raise ValueError(f"Setor fora do intervalo: {j}")
        return int(j)
    try:
        return list(base.sectors).index(str(j))
    except ValueError:
        raise ValueError(f"Setor desconhecido: {j}")


def standard_trigger(base: BaseAggregates, j: SectorRef, theta: float) -> np.ndarray:
    """τ̌_j = 1 + θ/(p_j y_j); j = 'all' aplica em todos os setores"""
    if theta < 0:
        raise ValueError("theta não pode ser negativo")
    if (base.y1 <= 0).any():
        raise ValueError("Produção setorial deve ser positiva")
    tau = np.ones(len(base.y1))
    if isinstance(j, str) and j.lower() == 'all':
        return 1.0 + theta / base.y1
    k = _sector_index(base, j)
    tau[k] = 1.0 + theta / base.y1[k]
    return tau


def srop(econ: Economy, hh: HouseholdModel, calib: CapitalCalibration, base: BaseAggregates,
         j: SectorRef = 'all', theta: float = 1.0, cfg: Optional[SolverConfig] = None) -> float:
    """Retorno social da produtividade: (Benefício − Custo)/θ"""
    if theta < 0:
        raise ValueError("theta não pode ser negativo")
    if theta == 0:
        return 0.0
    state = alternative_equilibrium(econ, hh, calib, base, standard_trigger(base, j, theta), cfg)
    return state.net_benefit / theta


@dataclass
class SropSweep:
    frame: pd.DataFrame
    total: float
    all_sectors: float

    @property
    def underestimation(self) -> float:
        """Quanto a soma das imposições independentes fica abaixo da simultânea (relativo)"""
        return 1.0 - self.total / self.all_sectors if self.all_sectors else float('nan')


def srop_by_sector(econ: Economy, hh: HouseholdModel, calib: CapitalCalibration,
                   base: BaseAggregates, theta: float = 1.0, cfg: Optional[SolverConfig] = None,
                   max_workers: int = THREADS) -> SropSweep:
    """SROP(j) para cada setor, sua soma e SROP(todos)"""
    J = len(base.y1)
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        values = list(executor.map(lambda k: srop(econ, hh, calib, base, k, theta, cfg), range(J)))
    sectors = list(base.sectors) if base.sectors else [str(k) for k in range(J)]
    frame = pd.DataFrame({'sector_id': sectors, 'srop': values})
    all_value = srop(econ, hh, calib, base, 'all', theta, cfg)
    logger.info("SROP(todos) = %.6g; soma dos SROP(j) = %.6g", all_value, sum(values))
    return SropSweep(frame=frame, total=float(sum(values)), all_sectors=all_value)


def standard_triggers(base: BaseAggregates, theta: float = 1.0) -> np.ndarray:
    """Matriz J×J cuja linha j é τ̌(j)"""
    return np.vstack([standard_trigger(base, k, theta) for k in range(len(base.y1))])


def synergy(econ: Economy, triggers, r: float = 1.0, w: float = 1.0,
            cfg: Optional[SolverConfig] = None, max_workers: int = THREADS) -> np.ndarray:
    """
    −ln ℰ(exp Σ_j ln τ̌(j)) + Σ_j ln ℰ(τ̌(j)), por bem

    Entradas positivas: a imposição simultânea reduz mais os preços do que a
    soma das imposições independentes.
    """
    triggers = np.atleast_2d(np.asarray(triggers, dtype=float))
    if triggers.shape[1] != econ.J:
        raise ValueError(f"Gatilhos devem ter {econ.J} colunas")
    if (triggers <= 0).any():
        raise ValueError("Gatilhos devem ser positivos")

    def log_prices(k: int, tau: np.ndarray) -> np.ndarray:
        try:
            return np.log(equilibrium_prices(econ, tau, r, w, cfg))
        except (NonConvergence, EquilibriumError):
            logger.error("Gatilho %d sem equilíbrio", k)
            raise

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        independent = list(executor.map(log_prices, range(len(triggers)), triggers))
    joint = log_prices(-1, np.exp(np.log(triggers).sum(axis=0)))
    return -joint + np.sum(independent, axis=0)


def synergy_frame(values: np.ndarray, sectors: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame({'sector_id': list(sectors), 'synergy': values})
