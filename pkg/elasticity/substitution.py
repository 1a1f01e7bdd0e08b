"""
Elasticidades de substituição de Allen-Uzawa e de Morishima de uma tecnologia CCES
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from cces.aggregator import CcesTechnology, cces_unit_cost, factor_labels, foc_shares
from config import GAMMA_EPS

STEP = 1e-4


def _gradient(tech: CcesTechnology, prices: np.ndarray, gamma_eps: float) -> np.ndarray:
    """Lema de Shephard: C_k = C·s_k/p_k"""
    cost, _ = cces_unit_cost(prices, tech, gamma_eps=gamma_eps)
    shares = foc_shares(tech, prices, gamma_eps)
    grad = np.zeros_like(prices)
    active = tech.active
    grad[active] = cost * shares[active] / prices[active]
    return grad


def _cross_partial(tech: CcesTechnology, prices: np.ndarray, i: int, j: int,
                   step: float, gamma_eps: float) -> float:
    """∂²C/∂p_i∂p_j por diferença central do gradiente analítico, com um passo de Richardson"""
    def central(h: float) -> float:
        up, down = prices.copy(), prices.copy()
        up[j] += h
        down[j] -= h
        return (_gradient(tech, up, gamma_eps)[i] - _gradient(tech, down, gamma_eps)[i]) / (2 * h)

    h = step * prices[j]
    return (4.0 * central(h / 2) - central(h)) / 3.0


def _checked_prices(tech: CcesTechnology, prices) -> np.ndarray:
    prices = np.asarray(prices, dtype=float)
    if prices.shape != (tech.n_factors,):
        raise ValueError(f"Esperados {tech.n_factors} preços")
    if (prices[tech.factors] <= 0).any():
        raise ValueError("Preços devem ser positivos")
    return prices


def aues(tech: CcesTechnology, prices, i: int, j: int, step: float = STEP,
         gamma_eps: float = GAMMA_EPS) -> float:
    """η_ij = C·C_ij/(C_i·C_j); NaN se algum dos fatores é inativo"""
    prices = _checked_prices(tech, prices)
    if not (tech.active[i] and tech.active[j]):
        return float('nan')
    cost, _ = cces_unit_cost(prices, tech, gamma_eps=gamma_eps)
    grad = _gradient(tech, prices, gamma_eps)
    cross = _cross_partial(tech, prices, i, j, step, gamma_eps)
    return float(cost * cross / (grad[i] * grad[j]))


def mes(tech: CcesTechnology, prices, i: int, j: int, step: float = STEP,
        gamma_eps: float = GAMMA_EPS) -> float:
    """η^M_ij = s_j(η_ij − η_jj), com s_j pelas CPOs"""
    prices = _checked_prices(tech, prices)
    if not (tech.active[i] and tech.active[j]):
        return float('nan')
    s_j = foc_shares(tech, prices, gamma_eps)[j]
    return float(s_j * (aues(tech, prices, i, j, step, gamma_eps)
                        - aues(tech, prices, j, j, step, gamma_eps)))


@dataclass
class ElasticityTables:
    aues: np.ndarray
    mes: np.ndarray
    prices: np.ndarray
    labels: List[str]

    def to_frames(self):
        return (pd.DataFrame(self.aues, index=self.labels, columns=self.labels),
                pd.DataFrame(self.mes, index=self.labels, columns=self.labels))

    def long_frame(self, which: str = 'aues') -> pd.DataFrame:
        """Formato longo (factor_i, factor_j, value) para gravação em CSV"""
        matrix = self.aues if which == 'aues' else self.mes
        n = len(self.labels)
        return pd.DataFrame({
            'factor_i': [self.labels[a] for a in range(n) for _ in range(n)],
            'factor_j': [self.labels[b] for _ in range(n) for b in range(n)],
            'value': matrix.ravel(),
        })


def elasticity_tables(tech: CcesTechnology, prices, sectors: Optional[Sequence[str]] = None,
                      step: float = STEP, gamma_eps: float = GAMMA_EPS,
                      max_workers: int = 1) -> ElasticityTables:
    """Tabelas completas de AUES (com a própria na diagonal) e MES; fatores inativos em NaN"""
    prices = _checked_prices(tech, prices)
    n = tech.n_factors
    cost, _ = cces_unit_cost(prices, tech, gamma_eps=gamma_eps)
    grad = _gradient(tech, prices, gamma_eps)
    shares = foc_shares(tech, prices, gamma_eps)
    active = np.nonzero(tech.active)[0]

    pairs = [(i, j) for i in active for j in active if i <= j]
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        partials = list(executor.map(
            lambda ij: _cross_partial(tech, prices, ij[0], ij[1], step, gamma_eps), pairs))

    table = np.full((n, n), np.nan)
    for (i, j), cross in zip(pairs, partials):
        table[i, j] = table[j, i] = cost * cross / (grad[i] * grad[j])

    morishima = np.full((n, n), np.nan)
    for i in active:
        for j in active:
            morishima[i, j] = shares[j] * (table[i, j] - table[j, j])

    labels = factor_labels(sectors) if sectors is not None else \
        [str(k) for k in range(n - 2)] + ['K', 'L']
    return ElasticityTables(aues=table, mes=morishima, prices=prices, labels=labels)
