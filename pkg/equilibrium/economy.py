"""
Economias: tecnologias setoriais, rede de referência e tipo (CCES, Cobb-Douglas, Leontief, simples)
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence, Tuple

import numpy as np

from cces.aggregator import CcesTechnology, log_ces
from config import GAMMA_EPS
from iotable.linked_table import LinkedIOTable, ShareMatrix, cost_shares


class EconomyKind(str, Enum):
    CCES = 'cces'
    COBB_DOUGLAS = 'cd'
    LEONTIEF = 'leontief'
    SIMPLE = 'simple'

    @classmethod
    def parse(cls, name: str) -> 'EconomyKind':
        aliases = {'cobb-douglas': 'cd', 'cobb_douglas': 'cd', 'cobbdouglas': 'cd',
                   'restoring': 'cces', 'lt': 'leontief'}
        key = str(name).strip().lower()
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ValueError(f"Tipo de economia desconhecido: {name}")


@dataclass(frozen=True, eq=False)
class _NestTable:
    """Parâmetros de todos os setores alinhados em arrays J×M (M = maior número de ninhos)"""
    seed: np.ndarray
    factor: np.ndarray
    alpha: np.ndarray
    gamma: np.ndarray
    mask: np.ndarray

    @classmethod
    def build(cls, techs: Sequence[CcesTechnology]) -> '_NestTable':
        J = len(techs)
        M = max((t.nests for t in techs), default=0)
        seed = np.array([t.seed for t in techs], dtype=int)
        factor = np.repeat(seed[:, None], M, axis=1)
        alpha = np.full((J, M), 0.5)
        gamma = np.ones((J, M))
        mask = np.zeros((J, M), dtype=bool)
        for j, tech in enumerate(techs):
            k = tech.nests
            factor[j, :k] = tech.factors[1:]
            alpha[j, :k] = tech.alpha
            gamma[j, :k] = tech.gamma
            mask[j, :k] = True
        return cls(seed=seed, factor=factor, alpha=alpha, gamma=gamma, mask=mask)

    def log_path(self, log_P: np.ndarray, gamma_eps: float) -> np.ndarray:
        """Log dos compostos de cada setor após cada posição de ninho: (J, M+1)"""
        J, M = self.factor.shape
        path = np.empty((J, M + 1))
        path[:, 0] = log_P[self.seed]
        for m in range(M):
            new = log_ces(log_P[self.factor[:, m]], path[:, m],
                          self.alpha[:, m], self.gamma[:, m], gamma_eps)
            path[:, m + 1] = np.where(self.mask[:, m], new, path[:, m])
        return path

    def log_costs(self, log_P: np.ndarray, gamma_eps: float) -> np.ndarray:
        J, M = self.factor.shape
        current = log_P[self.seed]
        for m in range(M):
            new = log_ces(log_P[self.factor[:, m]], current,
                          self.alpha[:, m], self.gamma[:, m], gamma_eps)
            current = np.where(self.mask[:, m], new, current)
        return current

    def shares(self, log_P: np.ndarray, gamma_eps: float) -> np.ndarray:
        """CPOs de todos os setores: matriz (n_fatores, J)"""
        J, M = self.factor.shape
        path = self.log_path(log_P, gamma_eps)
        S = np.zeros((len(log_P), J))
        cols = np.arange(J)
        weight = np.ones(J)
        for m in range(M - 1, -1, -1):
            g = np.where(np.abs(self.gamma[:, m]) < gamma_eps, 0.0, self.gamma[:, m])
            theta = self.alpha[:, m] * np.exp(g * (log_P[self.factor[:, m]] - path[:, m + 1]))
            theta = np.where(self.mask[:, m], theta, 0.0)
            np.add.at(S, (self.factor[:, m], cols), weight * theta)
            weight = weight * (1.0 - theta)
        np.add.at(S, (self.seed, cols), weight)
        return S


@dataclass(frozen=True, eq=False)
class Economy:
    """
    Economia de J setores

    Attributes:
        kind: Tipo da economia
        reference: Rede de referência A (t=1) com as linhas a_K e a_L
        techs: Tecnologias CCES (apenas para kind=CCES)
    """
    kind: EconomyKind
    reference: ShareMatrix
    techs: Tuple[CcesTechnology, ...] = ()
    gamma_eps: float = GAMMA_EPS

    def __post_init__(self):
        if self.kind == EconomyKind.CCES and len(self.techs) != self.J:
            raise ValueError("Economia CCES requer uma tecnologia por setor")

    @property
    def J(self) -> int:
        return self.reference.S.shape[1]

    @property
    def sectors(self) -> Tuple[str, ...]:
        return self.reference.sectors or tuple(str(j) for j in range(self.J))

    @classmethod
    def from_table(cls, table: LinkedIOTable, kind='cces',
                   techs: Optional[Sequence[CcesTechnology]] = None,
                   gamma_eps: float = GAMMA_EPS) -> 'Economy':
        kind = EconomyKind.parse(kind) if not isinstance(kind, EconomyKind) else kind
        return cls(kind=kind, reference=cost_shares(table, 1),
                   techs=tuple(techs or ()), gamma_eps=gamma_eps)

    def with_kind(self, kind) -> 'Economy':
        kind = EconomyKind.parse(kind) if not isinstance(kind, EconomyKind) else kind
        return Economy(kind=kind, reference=self.reference, techs=self.techs,
                       gamma_eps=self.gamma_eps)

    @cached_property
    def nest_table(self) -> _NestTable:
        return _NestTable.build(self.techs)

    def log_unit_costs(self, p: np.ndarray, r: float = 1.0, w: float = 1.0) -> np.ndarray:
        """ln C_j(p, r, w) para todos os setores"""
        p = np.asarray(p, dtype=float)
        ref = self.reference
        if self.kind == EconomyKind.CCES:
            log_P = np.log(np.concatenate([p, [r, w]]))
            return self.nest_table.log_costs(log_P, self.gamma_eps)
        if self.kind == EconomyKind.COBB_DOUGLAS:
            return ref.A.T @ np.log(p) + ref.a_K * np.log(r) + ref.a_L * np.log(w)
        if self.kind == EconomyKind.LEONTIEF:
            return np.log(ref.A.T @ p + ref.a_K * r + ref.a_L * w)
        a0 = ref.a0
        safe = np.where(a0 > 0, a0, 1.0)
        return np.where(a0 > 0, (ref.a_K * np.log(r) + ref.a_L * np.log(w)) / safe, 0.0)
