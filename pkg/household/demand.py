"""
Domicílio representativo CES multifatorial: índice de preços ψ e participações de gasto
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from config import GAMMA_EPS


@dataclass(frozen=True, eq=False)
class HouseholdModel:
    """
    Attributes:
        mu: Parâmetros de participação μ_i (somam 1)
        lam: Expoente λ; elasticidade de substituição 1 − λ
    """
    mu: np.ndarray
    lam: float
    gamma_eps: float = GAMMA_EPS

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 1 or (mu < 0).any():
            raise ValueError("mu deve ser um vetor não negativo")
        if not np.isclose(mu.sum(), 1.0, atol=1e-9):
            raise ValueError(f"mu deve somar 1 (soma = {mu.sum():.12g})")
        object.__setattr__(self, 'mu', mu)

    @property
    def I(self) -> int:
        return len(self.mu)

    @classmethod
    def from_shares(cls, b1, lam: float, gamma_eps: float = GAMMA_EPS) -> 'HouseholdModel':
        """μ̂ = participações do período de referência"""
        b1 = np.asarray(b1, dtype=float)
        return cls(mu=b1 / b1.sum(), lam=float(lam), gamma_eps=gamma_eps)

    def _log_prices(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.I:
            raise ValueError(f"Esperados {self.I} preços")
        if (p[..., self.mu > 0] <= 0).any():
            raise ValueError("Preços devem ser positivos")
        with np.errstate(divide='ignore'):
            return np.log(np.where(self.mu > 0, p, 1.0))

    def log_price_index(self, p) -> np.ndarray:
        log_p = self._log_prices(p)
        if abs(self.lam) < self.gamma_eps:
            return log_p @ self.mu
        return logsumexp(self.lam * log_p, axis=-1, b=self.mu) / self.lam


def price_index(p, model: HouseholdModel):
    """ψ(p) = (Σ μ_i p_i^λ)^{1/λ}; média geométrica ponderada quando λ → 0"""
    value = np.exp(model.log_price_index(p))
    return float(value) if np.ndim(value) == 0 else value


def expenditure_shares(p, model: HouseholdModel) -> np.ndarray:
    """Identidade de Roy: b_i = μ_i (p_i/ψ)^λ"""
    log_p = model._log_prices(p)
    if abs(model.lam) < model.gamma_eps:
        return np.broadcast_to(model.mu, log_p.shape).copy()
    log_psi = model.log_price_index(p)
    b = model.mu * np.exp(model.lam * (log_p - np.expand_dims(log_psi, -1)))
    # normalização remove o erro de arredondamento acumulado
    return b / b.sum(axis=-1, keepdims=True)
