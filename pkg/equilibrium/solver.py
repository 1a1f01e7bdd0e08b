"""
Ponto fixo de preços p = C(p, r, w)⟨τ⟩⁻¹, formas fechadas e redes de equilíbrio
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from config import SolverConfig
from equilibrium.economy import Economy, EconomyKind
from errors import EquilibriumError, NonConvergence
from iotable.linked_table import LinkedIOTable, ShareMatrix, cost_shares

logger = logging.getLogger(__name__)


@dataclass
class EquilibriumState:
    p: np.ndarray
    residual: float
    iterations: int
    converged: bool = True
    damping: float = 1.0
    halvings: int = 0
    S: Optional[ShareMatrix] = None

    def ensure_converged(self) -> 'EquilibriumState':
        if not self.converged:
            raise NonConvergence("Equilíbrio de preços não convergiu", self.iterations,
                                 self.residual, self.p)
        return self


def _check_inputs(econ: Economy, tau, r: float, w: float) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (econ.J,):
        raise ValueError(f"tau deve ter {econ.J} elementos")
    if (tau <= 0).any() or not np.isfinite(tau).all():
        raise ValueError("tau deve ser positivo")
    if r <= 0 or w <= 0:
        raise ValueError("r e w devem ser positivos")
    return tau


def solve_equilibrium(econ: Economy, tau, r: float = 1.0, w: float = 1.0,
                      cfg: Optional[SolverConfig] = None,
                      with_shares: bool = True) -> EquilibriumState:
    """
    Iteração de realimentação amortecida p ← (1−ω)p + ω·C(p,r,w)/τ a partir de p = 1

    Converge quando sup|ln(C/τ) − ln p| < tol. Sem progresso por três iterações
    seguidas, ω é reduzido à metade (no máximo max_halvings vezes). Se o limite
    de iterações se esgota, devolve o melhor iterado com converged=False.
    """
    cfg = cfg or SolverConfig()
    tau = _check_inputs(econ, tau, r, w)
    log_tau = np.log(tau)

    if econ.kind == EconomyKind.SIMPLE:
        p = np.exp(econ.log_unit_costs(np.ones(econ.J), r, w) - log_tau)
        state = EquilibriumState(p=p, residual=0.0, iterations=1)
    else:
        p = np.ones(econ.J)
        omega = cfg.damping
        halvings = 0
        best_p, best_res = p, np.inf
        previous = np.inf
        stalled = 0
        converged = False
        iterations = 0
        for iterations in range(1, cfg.max_iter + 1):
            log_target = econ.log_unit_costs(p, r, w) - log_tau
            residual = float(np.max(np.abs(log_target - np.log(p))))
            if not np.isfinite(residual):
                break
            if residual < best_res:
                best_p, best_res = p, residual
            if residual < cfg.tol:
                converged = True
                break
            stalled = stalled + 1 if residual >= previous else 0
            if stalled >= 3 and halvings < cfg.max_halvings:
                omega /= 2
                halvings += 1
                stalled = 0
                logger.warning("Oscilação detectada; amortecimento reduzido para %.4g", omega)
            previous = residual
            p = (1.0 - omega) * p + omega * np.exp(log_target)

        if converged:
            state = EquilibriumState(p=p, residual=residual, iterations=iterations,
                                     damping=omega, halvings=halvings)
        else:
            logger.warning("Equilíbrio não convergiu após %d iterações (resíduo %.3e)",
                           iterations, best_res)
            state = EquilibriumState(p=best_p, residual=best_res, iterations=iterations,
                                     converged=False, damping=omega, halvings=halvings)

    if with_shares and state.converged:
        state.S = network_shares(econ, state, r, w, tau)
    return state


def closed_form_prices(econ: Economy, tau, r: float = 1.0, w: float = 1.0) -> np.ndarray:
    """
    Soluções fechadas em convenção de vetor-linha

    Cobb-Douglas: ln p = (a_K ln r + a_L ln w − ln τ)[I−A]⁻¹.
    Leontief: p = (a_K r + a_L w)[⟨τ⟩−A]⁻¹, exigindo raio espectral de A⟨τ⟩⁻¹ < 1.
    """
    tau = _check_inputs(econ, tau, r, w)
    ref = econ.reference
    A = ref.A
    J = econ.J
    try:
        if econ.kind == EconomyKind.COBB_DOUGLAS:
            rhs = ref.a_K * np.log(r) + ref.a_L * np.log(w) - np.log(tau)
            return np.exp(np.linalg.solve((np.eye(J) - A).T, rhs))
        if econ.kind == EconomyKind.LEONTIEF:
            radius = float(np.max(np.abs(np.linalg.eigvals(A / tau[None, :]))))
            if radius >= 1.0:
                raise EquilibriumError(f"Condição de Neumann violada: raio espectral {radius:.6f} >= 1")
            p = np.linalg.solve((np.diag(tau) - A).T, ref.a_K * r + ref.a_L * w)
            if (p <= 0).any():
                raise EquilibriumError("Solução de Leontief com preços não positivos")
            return p
    except np.linalg.LinAlgError as e:
        raise EquilibriumError(f"Sistema singular: {e}")
    if econ.kind == EconomyKind.SIMPLE:
        return np.exp(econ.log_unit_costs(np.ones(J), r, w) - np.log(tau))
    raise ValueError("Economia CCES não tem solução fechada; use solve_equilibrium")


def equilibrium_prices(econ: Economy, tau, r: float = 1.0, w: float = 1.0,
                       cfg: Optional[SolverConfig] = None) -> np.ndarray:
    """Preços de equilíbrio pelo caminho adequado ao tipo da economia"""
    if econ.kind == EconomyKind.CCES:
        return solve_equilibrium(econ, tau, r, w, cfg, with_shares=False).ensure_converged().p
    return closed_form_prices(econ, tau, r, w)


def network_shares(econ: Economy, state: Union[EquilibriumState, np.ndarray],
                   r: float = 1.0, w: float = 1.0, tau=None) -> ShareMatrix:
    """Rede de produção no equilíbrio: S = ⟨p,r,w⟩∇C⟨τ⟩⁻¹⟨p⟩⁻¹"""
    p = state.p if isinstance(state, EquilibriumState) else np.asarray(state, dtype=float)
    ref = econ.reference
    J = econ.J
    tau = np.ones(J) if tau is None else np.asarray(tau, dtype=float)

    if econ.kind == EconomyKind.CCES:
        log_P = np.log(np.concatenate([p, [r, w]]))
        S = econ.nest_table.shares(log_P, econ.gamma_eps)
    elif econ.kind == EconomyKind.COBB_DOUGLAS:
        S = ref.S.copy()
    elif econ.kind == EconomyKind.LEONTIEF:
        scale = tau * p
        S = np.vstack([ref.A * p[:, None] / scale[None, :],
                       ref.a_K * r / scale, ref.a_L * w / scale])
    else:
        a0 = np.where(ref.a0 > 0, ref.a0, 1.0)
        S = np.vstack([np.zeros((J, J)), ref.a_K / a0, ref.a_L / a0])
    return ShareMatrix(S=S, sectors=ref.sectors)


def restoring_productivity(econ: Economy, table: LinkedIOTable) -> np.ndarray:
    """τ̂_t = C(p_t, r_t, w_t)/q_t para t = 0, 1 (forma (2, J))"""
    return np.vstack([
        np.exp(econ.log_unit_costs(table.p[t], table.r[t], table.w[t])) / table.p[t]
        for t in (0, 1)
    ])


@dataclass
class PeriodGap:
    period: int
    price_gap: float
    share_gap: float
    converged: bool
    iterations: int
    residual: float


@dataclass
class RestorationReport:
    periods: List[PeriodGap] = field(default_factory=list)

    @property
    def max_price_gap(self) -> float:
        return max(g.price_gap for g in self.periods)

    @property
    def max_share_gap(self) -> float:
        return max(g.share_gap for g in self.periods)

    def ok(self, tol: float = 1e-8) -> bool:
        return all(g.converged for g in self.periods) and \
            self.max_price_gap < tol and self.max_share_gap < tol

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(g) for g in self.periods])


def verify_restoring(econ: Economy, table: LinkedIOTable, tauhat=None,
                     cfg: Optional[SolverConfig] = None) -> RestorationReport:
    """Resolve os dois equilíbrios (τ̂_t, r_t, w_t) e compara preços e redes observados"""
    tauhat = restoring_productivity(econ, table) if tauhat is None else np.asarray(tauhat, float)
    report = RestorationReport()
    for t in (0, 1):
        state = solve_equilibrium(econ, tauhat[t], table.r[t], table.w[t], cfg)
        observed = cost_shares(table, t).S
        if state.converged:
            price_gap = float(np.max(np.abs(state.p - table.p[t])))
            share_gap = float(np.max(np.abs(state.S.S - observed)))
        else:
            price_gap = share_gap = float('inf')
        report.periods.append(PeriodGap(t, price_gap, share_gap, state.converged,
                                        state.iterations, state.residual))
    logger.info("Restauração: gap de preços %.3e, gap de redes %.3e",
                report.max_price_gap, report.max_share_gap)
    return report
