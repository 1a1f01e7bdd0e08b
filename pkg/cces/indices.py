"""
Índices Sato-Vartia em cascata e Törnqvist; crescimento da PTF
"""

import numpy as np
import pandas as pd

from cces.estimator import OrderLike, SectorData, nest_factors, prepared_shares
from config import SHARE_FLOOR
from errors import EstimationError
from iotable.linked_table import LinkedIOTable


def log_mean(a, b):
    """Média logarítmica L(a,b) = (a−b)/(ln a − ln b), com L(a,a) = a"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    delta = (a - b) / (a + b)
    safe = np.where(delta == 0, 1.0, delta)
    # L = m·δ/atanh(δ) com δ = (a−b)/(a+b): estável quando a ≈ b
    value = np.where(delta == 0, mid, mid * safe / np.arctanh(safe))
    return float(value) if np.ndim(value) == 0 else value


def sato_vartia_index(data: SectorData, order: OrderLike = None,
                      share_floor: float = SHARE_FLOOR) -> np.ndarray:
    """
    Índice Sato-Vartia em cascata

    Returns:
        Δln π̂_n para n = 0..N; o primeiro é a variação do preço da semente e o
        último o índice do setor
    """
    if data.T != 2:
        raise EstimationError("O índice Sato-Vartia compara exatamente dois períodos")
    factors = nest_factors(order, data.shares)
    S = prepared_shares(data, factors, share_floor)
    P = data.prices[:, factors]
    if (P <= 0).any():
        raise EstimationError(f"Preços não positivos no setor {data.sector}")
    dlog_p = np.log(P[1]) - np.log(P[0])

    index = np.empty(len(factors))
    index[0] = dlog_p[0]
    inner = S[:, 0].copy()
    for n in range(1, len(factors)):
        s = S[:, n]
        phi = s / (s + inner)
        phi_c = inner / (s + inner)
        w_f = log_mean(phi[1], phi[0])
        w_c = log_mean(phi_c[1], phi_c[0])
        index[n] = (w_f * dlog_p[n] + w_c * index[n - 1]) / (w_f + w_c)
        inner = inner + s
    return index


def _dlog_q(data: SectorData) -> float:
    if (data.q <= 0).any():
        raise EstimationError(f"Preço do produto não positivo no setor {data.sector}")
    return float(np.log(data.q[1]) - np.log(data.q[0]))


def tfpg_cces(data: SectorData, order: OrderLike = None,
              share_floor: float = SHARE_FLOOR) -> float:
    """PTF (CCES): índice Sato-Vartia em cascata menos Δln q"""
    return float(sato_vartia_index(data, order, share_floor)[-1]) - _dlog_q(data)


def tfpg_translog(data: SectorData) -> float:
    """PTF (Törnqvist): Σ s̄ Δln p sobre todos os fatores menos Δln q"""
    if data.T != 2:
        raise EstimationError("O índice Törnqvist compara exatamente dois períodos")
    mean_shares = data.shares.mean(axis=0)
    used = mean_shares > 0
    if (data.prices[:, used] <= 0).any():
        raise EstimationError(f"Preços não positivos no setor {data.sector}")
    dlog_p = np.log(data.prices[1, used]) - np.log(data.prices[0, used])
    return float(mean_shares[used] @ dlog_p) - _dlog_q(data)


def tfpg_table(table: LinkedIOTable, order: OrderLike = None, method: str = 'cces',
               share_floor: float = SHARE_FLOOR) -> pd.DataFrame:
    """PTF de todos os setores da tabela (method = 'cces' ou 'translog')"""
    if method not in ('cces', 'translog'):
        raise ValueError(f"Método desconhecido: {method}")
    rows = []
    for j, sector in enumerate(table.sectors):
        data = SectorData.from_table(table, j)
        value = tfpg_cces(data, order, share_floor) if method == 'cces' else tfpg_translog(data)
        rows.append({'sector_id': sector, 'method': method, 'tfpg': value})
    return pd.DataFrame(rows)
