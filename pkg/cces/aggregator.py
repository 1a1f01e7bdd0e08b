"""
Funções de custo unitário CES em cascata (lado dual)

Fatores seguem as linhas da ShareMatrix: bens 0..I-1, capital I, trabalho I+1.
Cada tecnologia guarda a ordem dos ninhos começando pela semente (trabalho, se
ativo), seguida do capital e dos bens na ordem em cascata.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import GAMMA_EPS
from errors import TableValidationError


@dataclass(frozen=True, eq=False)
class CcesTechnology:
    """
    Parâmetros de um setor

    Attributes:
        factors: Índices dos fatores em ordem de ninho; factors[0] é a semente
        alpha: Parâmetro de participação de cada ninho, em (0, 1)
        gamma: Expoente de cada ninho; elasticidade de substituição 1 - gamma
        n_factors: Número total de fatores (I + 2)
    """
    factors: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    n_factors: int
    sector: Optional[str] = None

    def __post_init__(self):
        if len(self.alpha) != len(self.factors) - 1 or len(self.gamma) != len(self.alpha):
            raise ValueError("alpha e gamma devem ter um valor por ninho")
        if len(self.factors) == 0:
            raise ValueError("Tecnologia sem fatores ativos")

    @property
    def seed(self) -> int:
        return int(self.factors[0])

    @property
    def nests(self) -> int:
        return len(self.alpha)

    @property
    def active(self) -> np.ndarray:
        mask = np.zeros(self.n_factors, dtype=bool)
        mask[self.factors] = True
        return mask

    def nest_of(self, factor: int) -> int:
        """Ninho onde o fator entra (0 para a semente, que entra no ninho 1 com o capital)"""
        hits = np.nonzero(self.factors == factor)[0]
        if not len(hits):
            raise KeyError(f"Fator {factor} inativo")
        return int(hits[0])

    def with_params(self, alpha: np.ndarray, gamma: np.ndarray) -> 'CcesTechnology':
        return CcesTechnology(self.factors, np.asarray(alpha, float), np.asarray(gamma, float),
                              self.n_factors, self.sector)


@dataclass(frozen=True, eq=False)
class CompoundPrices:
    """Preços compostos π̂_n; pi[0] é o preço da semente"""
    pi: np.ndarray

    @property
    def final(self) -> float:
        return float(self.pi[-1])


def log_ces(log_p, log_pi, alpha, gamma, gamma_eps: float = GAMMA_EPS):
    """Logaritmo de (α p^γ + (1−α) π^γ)^{1/γ}, com o limite Cobb-Douglas para |γ| < gamma_eps"""
    log_p = np.asarray(log_p, dtype=float)
    log_pi = np.asarray(log_pi, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    small = np.abs(gamma) < gamma_eps
    g = np.where(small, 1.0, gamma)
    # expm1/log1p preservam precisão quando γ·log p é pequeno
    inner = alpha * np.expm1(g * log_p) + (1.0 - alpha) * np.expm1(g * log_pi)
    ces = np.log1p(inner) / g
    cobb_douglas = alpha * log_p + (1.0 - alpha) * log_pi
    return np.where(small, cobb_douglas, ces)


def ces_unit_cost(p, pi, alpha, gamma, gamma_eps: float = GAMMA_EPS):
    """
    Custo unitário CES de dois fatores

    Args:
        p: Preço do fator externo
        pi: Preço composto interno
        alpha: Parâmetro de participação em (0, 1)
        gamma: Expoente (elasticidade 1 - gamma)
    """
    p_arr = np.asarray(p, dtype=float)
    pi_arr = np.asarray(pi, dtype=float)
    if np.any(p_arr <= 0) or np.any(pi_arr <= 0):
        raise ValueError("Preços devem ser positivos")
    value = np.exp(log_ces(np.log(p_arr), np.log(pi_arr), alpha, gamma, gamma_eps))
    return float(value) if np.ndim(value) == 0 else value


def log_compound_path(prices: np.ndarray, tech: CcesTechnology,
                      gamma_eps: float = GAMMA_EPS) -> np.ndarray:
    """Log dos preços compostos ao longo dos ninhos; aceita preços (..., n_factors)"""
    log_p = np.log(np.asarray(prices, dtype=float)[..., tech.factors])
    path = np.empty_like(log_p)
    path[..., 0] = log_p[..., 0]
    for n in range(1, len(tech.factors)):
        path[..., n] = log_ces(log_p[..., n], path[..., n - 1],
                               tech.alpha[n - 1], tech.gamma[n - 1], gamma_eps)
    return path


def cces_unit_cost(prices, tech: CcesTechnology, tau: float = 1.0,
                   gamma_eps: float = GAMMA_EPS) -> Tuple[float, CompoundPrices]:
    """
    Custo unitário CCES q = τ⁻¹ π̂_N

    Returns:
        (q, CompoundPrices) com todos os π̂_n intermediários
    """
    prices = np.asarray(prices, dtype=float)
    if prices.shape[-1] != tech.n_factors:
        raise ValueError(f"Esperados {tech.n_factors} preços, recebidos {prices.shape[-1]}")
    if np.any(prices[..., tech.factors] <= 0):
        raise ValueError("Preços devem ser positivos")
    if np.any(np.asarray(tau) <= 0):
        raise ValueError("Produtividade tau deve ser positiva")
    pi = np.exp(log_compound_path(prices, tech, gamma_eps))
    q = pi[..., -1] / tau
    return (float(q) if np.ndim(q) == 0 else q), CompoundPrices(pi=pi)


def foc_shares(tech: CcesTechnology, prices, gamma_eps: float = GAMMA_EPS) -> np.ndarray:
    """
    Participações de custo pelas CPOs recursivas

    O ninho n dá ao fator externo α_n (p_f/π_n)^γ_n da participação acumulada;
    o restante passa ao composto interno. Fatores inativos recebem 0.
    """
    prices = np.asarray(prices, dtype=float)
    if np.any(prices[..., tech.factors] <= 0):
        raise ValueError("Preços devem ser positivos")
    path = log_compound_path(prices, tech, gamma_eps)
    log_p = np.log(prices[..., tech.factors])
    shares = np.zeros(prices.shape)
    weight = np.ones(prices.shape[:-1])
    for n in range(len(tech.factors) - 1, 0, -1):
        a, g = tech.alpha[n - 1], tech.gamma[n - 1]
        g = 0.0 if abs(g) < gamma_eps else g
        theta = a * np.exp(g * (log_p[..., n] - path[..., n]))
        shares[..., tech.factors[n]] = weight * theta
        weight = weight * (1.0 - theta)
    shares[..., tech.seed] = weight
    return shares


def factor_labels(sectors: Sequence[str]) -> List[str]:
    return [str(s) for s in sectors] + ['K', 'L']


TECH_COLUMNS = ('sector_id', 'nest_index', 'factor_id', 'alpha', 'gamma', 'active')


def technologies_to_frame(techs: Sequence[CcesTechnology], sectors: Sequence[str]) -> pd.DataFrame:
    """Formato tech.csv: sector_id,nest_index,factor_id,alpha,gamma,active"""
    labels = factor_labels(sectors)
    rows = []
    for j, tech in enumerate(techs):
        sector = tech.sector if tech.sector is not None else str(sectors[j])
        for n, f in enumerate(tech.factors):
            rows.append({
                'sector_id': sector, 'nest_index': n, 'factor_id': labels[f],
                'alpha': tech.alpha[n - 1] if n else np.nan,
                'gamma': tech.gamma[n - 1] if n else np.nan,
                'active': True,
            })
        for f in np.nonzero(~tech.active)[0]:
            rows.append({'sector_id': sector, 'nest_index': -1, 'factor_id': labels[f],
                         'alpha': np.nan, 'gamma': np.nan, 'active': False})
    return pd.DataFrame(rows)


def technologies_from_frame(df: pd.DataFrame, sectors: Sequence[str]) -> List[CcesTechnology]:
    labels = factor_labels(sectors)
    index = {label: k for k, label in enumerate(labels)}
    missing = sorted(set(TECH_COLUMNS) - set(df.columns))
    if missing:
        raise TableValidationError(f"Arquivo de tecnologias sem as colunas {missing}")
    active = df[df['active'].astype(str).str.lower().isin(['true', '1'])]
    techs = []
    for sector in sectors:
        rows = active[active['sector_id'].astype(str) == str(sector)].sort_values('nest_index')
        if rows.empty:
            raise ValueError(f"Setor {sector} sem tecnologia no arquivo")
        unknown = sorted(set(rows['factor_id'].astype(str)) - set(index))
        if unknown:
            raise TableValidationError(f"Setor {sector}: fatores desconhecidos {unknown}")
        factors = np.array([index[str(f)] for f in rows['factor_id']], dtype=int)
        alpha = rows['alpha'].to_numpy(float)[1:]
        gamma = rows['gamma'].to_numpy(float)[1:]
        techs.append(CcesTechnology(factors, alpha, gamma, len(labels), str(sector)))
    return techs
