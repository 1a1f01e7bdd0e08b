"""
Ordem em cascata dos setores a partir da matriz de incidência insumo-produto
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from errors import TableValidationError
from iotable.linked_table import LinkedIOTable

logger = logging.getLogger(__name__)

Flags = Union[bool, np.ndarray]


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """
    Φ binária J×J com φ_ij = 1 sse x_ij > 0

    A diagonal (autoconsumo) é sempre excluída. `primary` marca setores com valor
    adicionado positivo (soma 1 ao grau de entrada) e `final` setores com demanda
    final positiva (soma 1 ao grau de saída).
    """
    phi: np.ndarray
    primary: np.ndarray
    final: np.ndarray
    sectors: Tuple[str, ...] = ()

    @classmethod
    def from_matrix(cls, x: np.ndarray, primary: Flags = True, final: Flags = True,
                    sectors: Tuple[str, ...] = ()) -> 'IncidenceMatrix':
        x = np.asarray(x)
        J = x.shape[0]
        phi = (x > 0).astype(np.int8)
        np.fill_diagonal(phi, 0)
        primary = np.broadcast_to(np.asarray(primary, dtype=bool), (J,)).copy()
        final = np.broadcast_to(np.asarray(final, dtype=bool), (J,)).copy()
        sectors = tuple(sectors) or tuple(str(j) for j in range(J))
        return cls(phi=phi, primary=primary, final=final, sectors=sectors)

    @classmethod
    def from_table(cls, table: LinkedIOTable, t: int = 1) -> 'IncidenceMatrix':
        return cls.from_matrix(table.x[t], primary=table.E[t] > 0,
                               final=table.f[t] > 0, sectors=table.sectors)

    @property
    def N(self) -> int:
        return self.phi.shape[0]

    @property
    def indegree(self) -> np.ndarray:
        return self.phi.sum(axis=0) + self.primary

    @property
    def outdegree(self) -> np.ndarray:
        return self.phi.sum(axis=1) + self.final


@dataclass(frozen=True, eq=False)
class CascadingOrder:
    """perm: índices de setores de montante para jusante; ratios e ranking por setor original"""
    perm: np.ndarray
    ratios: np.ndarray
    ranking: np.ndarray
    violations: int = 0
    sectors: Tuple[str, ...] = ()

    @property
    def position(self) -> np.ndarray:
        """Posição de cada setor na ordem em cascata"""
        pos = np.empty_like(self.perm)
        pos[self.perm] = np.arange(len(self.perm))
        return pos

    def to_frame(self) -> pd.DataFrame:
        sectors = self.sectors or tuple(str(j) for j in range(len(self.perm)))
        return pd.DataFrame({
            'rank': np.arange(1, len(self.perm) + 1),
            'sector_id': [sectors[j] for j in self.perm],
            'ratio': self.ratios[self.perm],
            'ranking_index': self.ranking[self.perm],
        })

    @classmethod
    def from_frame(cls, df: pd.DataFrame, sectors: Tuple[str, ...]) -> 'CascadingOrder':
        missing = sorted({'rank', 'sector_id', 'ratio', 'ranking_index'} - set(df.columns))
        if missing:
            raise TableValidationError(f"Arquivo de ordem sem as colunas {missing}")
        index = {s: k for k, s in enumerate(sectors)}
        ordered = df.sort_values('rank')
        ids = [str(s) for s in ordered['sector_id']]
        if sorted(ids) != sorted(sectors):
            raise ValueError("Arquivo de ordem não cobre exatamente os setores da tabela")
        perm = np.array([index[s] for s in ids], dtype=int)
        ratios = np.empty(len(perm))
        ranking = np.empty(len(perm))
        ratios[perm] = ordered['ratio'].to_numpy(float)
        ranking[perm] = ordered['ranking_index'].to_numpy(float)
        return cls(perm=perm, ratios=ratios, ranking=ranking, sectors=tuple(sectors))


def degree_ratios(inc: IncidenceMatrix) -> np.ndarray:
    """Razão grau de entrada / grau de saída; saída 0 → +∞ (vale também para 0/0), entrada 0 → 0"""
    indeg = inc.indegree.astype(float)
    outdeg = inc.outdegree.astype(float)
    ratios = np.empty(inc.N)
    sink = outdeg == 0
    ratios[sink] = np.inf
    ratios[~sink] = indeg[~sink] / outdeg[~sink]
    return ratios


def incidence_and_degrees(table: LinkedIOTable, t: int = 1) -> Tuple[IncidenceMatrix, np.ndarray]:
    inc = IncidenceMatrix.from_table(table, t)
    return inc, degree_ratios(inc)


def triangularity_violations(inc: IncidenceMatrix, perm: np.ndarray) -> int:
    """Fluxos de um setor a jusante para um a montante depois da permutação"""
    permuted = inc.phi[np.ix_(perm, perm)]
    return int(np.tril(permuted, k=-1).sum())


def cascading_order(inc: IncidenceMatrix) -> CascadingOrder:
    """
    Ordena setores pela razão de graus (menor = mais a montante)

    Empates seguem a ordem de classificação original.
    """
    ratios = degree_ratios(inc)
    perm = np.argsort(ratios, kind='stable')
    N = inc.N
    ranking = np.empty(N)
    ranking[perm] = (N - np.arange(1, N + 1) + 1) / N
    violations = triangularity_violations(inc, perm)
    if violations:
        logger.info("Ordem em cascata com %d fluxos circulares", violations)
    return CascadingOrder(perm=perm, ratios=ratios, ranking=ranking,
                          violations=violations, sectors=inc.sectors)


@dataclass
class CcdfCurve:
    """Curvas log-log (log razão, log ranking) perfeita e, opcionalmente, empírica"""
    perfect: np.ndarray
    empirical: Optional[np.ndarray] = None
    excluded: int = 0

    def to_frame(self) -> pd.DataFrame:
        frames = [pd.DataFrame({'curve': 'perfect', 'log_ratio': self.perfect[:, 0],
                                'log_ranking': self.perfect[:, 1]})]
        if self.empirical is not None:
            frames.append(pd.DataFrame({'curve': 'empirical', 'log_ratio': self.empirical[:, 0],
                                        'log_ranking': self.empirical[:, 1]}))
        return pd.concat(frames, ignore_index=True)


def ccdf_curve(N: int, inc: Optional[IncidenceMatrix] = None) -> CcdfCurve:
    """
    Curva CCDF da razão de graus

    A curva perfeita usa razão k/(N−k+1) e ranking (N−k+1)/N para k=1..N. A
    empírica usa as razões ordenadas; razões 0 ou infinitas não têm logaritmo e
    ficam de fora (contadas em `excluded`).
    """
    if N < 2:
        raise ValueError("N deve ser >= 2")
    k = np.arange(1, N + 1, dtype=float)
    perfect = np.column_stack([np.log(k / (N - k + 1)), np.log((N - k + 1) / N)])

    empirical = None
    excluded = 0
    if inc is not None:
        ratios = np.sort(degree_ratios(inc))
        n = len(ratios)
        ranks = (n - np.arange(1, n + 1) + 1) / n
        keep = np.isfinite(ratios) & (ratios > 0)
        excluded = int((~keep).sum())
        empirical = np.column_stack([np.log(ratios[keep]), np.log(ranks[keep])])
    return CcdfCurve(perfect=perfect, empirical=empirical, excluded=excluded)
