"""
Tabelas insumo-produto ligadas de dois períodos: carga, validação e participações de custo
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import BALANCE_TOL
from errors import TableValidationError

logger = logging.getLogger(__name__)

MATRIX_KINDS = ('x',)
SECTOR_KINDS = ('rK', 'wL', 'h', 'g', 'm', 'y', 'p')
SCALAR_KINDS = ('r', 'w')
ALL_KINDS = MATRIX_KINDS + SECTOR_KINDS + SCALAR_KINDS

PathLike = Union[str, Path]


@dataclass(frozen=True)
class TableSchema:
    """Nomes das colunas do CSV em formato longo"""
    row_id: str = 'row_id'
    col_id: str = 'col_id'
    value: str = 'value'
    kind: str = 'kind'
    period: str = 'period'
    periods: Tuple[str, str] = ('0', '1')


@dataclass(frozen=True, eq=False)
class LinkedIOTable:
    """
    Tabela ligada com períodos t=0,1, todos os fluxos em unidades monetárias

    Arrays têm o período no primeiro eixo: x (2, J, J), vetores (2, J), r e w (2,).
    """
    sectors: Tuple[str, ...]
    x: np.ndarray
    y: np.ndarray
    rK: np.ndarray
    wL: np.ndarray
    h: np.ndarray
    g: np.ndarray
    m: np.ndarray
    p: np.ndarray
    r: np.ndarray
    w: np.ndarray
    raw_prices: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def J(self) -> int:
        return len(self.sectors)

    @property
    def E(self) -> np.ndarray:
        return self.rK + self.wL

    @property
    def f(self) -> np.ndarray:
        return self.h + self.g + self.m

    def index_of(self, sector: str) -> int:
        try:
            return self.sectors.index(str(sector))
        except ValueError:
            raise TableValidationError(f"Setor desconhecido: {sector}")

    def prices(self, t: int) -> np.ndarray:
        """Vetor de preços dos fatores (p..., r, w) no período t"""
        return np.concatenate([self.p[t], [self.r[t], self.w[t]]])

    def normalized(self) -> 'LinkedIOTable':
        """Preços divididos pelos valores de t=1; fluxos monetários inalterados"""
        raw = self.raw_prices or {'p': self.p.copy(), 'r': self.r.copy(), 'w': self.w.copy()}
        return LinkedIOTable(
            sectors=self.sectors, x=self.x, y=self.y, rK=self.rK, wL=self.wL,
            h=self.h, g=self.g, m=self.m,
            p=self.p / self.p[1], r=self.r / self.r[1], w=self.w / self.w[1],
            raw_prices=raw,
        )


@dataclass(frozen=True, eq=False)
class ShareMatrix:
    """Participações de custo (I+2)×J: bens, capital (linha I) e trabalho (linha I+1)"""
    S: np.ndarray
    sectors: Tuple[str, ...] = ()

    @property
    def I(self) -> int:
        return self.S.shape[0] - 2

    @property
    def A(self) -> np.ndarray:
        return self.S[:-2]

    @property
    def a_K(self) -> np.ndarray:
        return self.S[-2]

    @property
    def a_L(self) -> np.ndarray:
        return self.S[-1]

    @property
    def a0(self) -> np.ndarray:
        return self.S[-2] + self.S[-1]

    def factor_labels(self) -> List[str]:
        goods = list(self.sectors) if self.sectors else [str(i) for i in range(self.I)]
        return goods + ['K', 'L']

    def to_frame(self) -> pd.DataFrame:
        columns = list(self.sectors) if self.sectors else [str(j) for j in range(self.S.shape[1])]
        return pd.DataFrame(self.S, index=self.factor_labels(), columns=columns)


@dataclass
class BalanceReport:
    """Resíduos relativos de coluna (monetário) e de linha (físico) por período"""
    column_residuals: np.ndarray
    row_residuals: np.ndarray
    tol: float
    sectors: Tuple[str, ...]

    @property
    def violations(self) -> List[Tuple[int, str, str, float]]:
        found = []
        for name, res in (('column', self.column_residuals), ('row', self.row_residuals)):
            for t, j in zip(*np.nonzero(np.abs(res) > self.tol)):
                found.append((int(t), name, self.sectors[j], float(res[t, j])))
        return found

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for name, res in (('column', self.column_residuals), ('row', self.row_residuals)):
            for t in range(res.shape[0]):
                for j, sector in enumerate(self.sectors):
                    rows.append({
                        'period': t, 'balance': name, 'sector_id': sector,
                        'residual': res[t, j], 'flagged': bool(abs(res[t, j]) > self.tol),
                    })
        return pd.DataFrame(rows)


def _read_frames(path: Union[PathLike, Sequence[PathLike]], schema: TableSchema) -> pd.DataFrame:
    paths = [path] if isinstance(path, (str, Path)) else list(path)
    frames = []
    for k, p in enumerate(paths):
        if not Path(p).exists():
            raise TableValidationError(f"Arquivo não encontrado: {p}")
        df = pd.read_csv(p, comment='#', dtype=str, keep_default_na=False)
        if len(paths) > 1 and schema.period not in df.columns:
            # Um arquivo por período, na ordem (t=0, t=1)
            df[schema.period] = schema.periods[k] if k < 2 else str(k)
        frames.append(df)
    df = pd.concat(frames, ignore_index=True)

    required = [schema.row_id, schema.col_id, schema.value, schema.kind, schema.period]
    missing = [c for c in required if c not in df.columns]
    if missing:
        raise TableValidationError(f"Colunas ausentes: {', '.join(missing)}")
    return df


def load_table(path: Union[PathLike, Sequence[PathLike]],
               schema: Optional[TableSchema] = None) -> LinkedIOTable:
    """
    Carrega uma tabela ligada em formato longo e normaliza preços em t=1

    Args:
        path: CSV longo com coluna de período, ou dois CSVs (t=0, t=1)
        schema: Nomes de colunas; padrão row_id,col_id,value,kind,period

    Returns:
        LinkedIOTable com p[1] = r[1] = w[1] = 1
    """
    schema = schema or TableSchema()
    df = _read_frames(path, schema)

    periods = sorted(df[schema.period].str.strip().unique())
    if len(periods) != 2:
        raise TableValidationError(f"Esperados 2 períodos, encontrados {len(periods)}: {periods}")
    if set(periods) == set(schema.periods):
        periods = list(schema.periods)

    df = df.assign(**{
        schema.kind: df[schema.kind].str.strip(),
        schema.row_id: df[schema.row_id].str.strip(),
        schema.col_id: df[schema.col_id].str.strip(),
        schema.period: df[schema.period].str.strip(),
    })
    unknown = set(df[schema.kind]) - set(ALL_KINDS)
    if unknown:
        raise TableValidationError(f"Tipos desconhecidos na coluna kind: {sorted(unknown)}")
    try:
        values = df[schema.value].str.strip().astype(float)
    except (ValueError, TypeError) as e:
        raise TableValidationError(f"Valor não numérico: {e}")
    df = df.assign(**{schema.value: values})

    # Ordem de classificação = ordem de aparição dos setores nas linhas de produção
    y_rows = df[df[schema.kind] == 'y']
    sectors = tuple(dict.fromkeys(y_rows[schema.row_id]))
    if not sectors:
        raise TableValidationError("Nenhuma linha kind=y (produção setorial)")
    index = {s: k for k, s in enumerate(sectors)}
    J = len(sectors)

    arrays = {k: np.zeros((2, J)) for k in SECTOR_KINDS}
    arrays['x'] = np.zeros((2, J, J))
    scalars = {k: np.full(2, np.nan) for k in SCALAR_KINDS}

    for t, label in enumerate(periods):
        part = df[df[schema.period] == label]
        for kind, rows in part.groupby(schema.kind):
            if kind in SCALAR_KINDS:
                scalars[kind][t] = rows[schema.value].iloc[-1]
                continue
            ids = rows[schema.row_id].map(index)
            if ids.isna().any():
                bad = rows.loc[ids.isna(), schema.row_id].unique()
                raise TableValidationError(f"Setores sem produção declarada: {list(bad)}")
            if kind == 'x':
                cols = rows[schema.col_id].map(index)
                if cols.isna().any():
                    bad = rows.loc[cols.isna(), schema.col_id].unique()
                    raise TableValidationError(f"Setores sem produção declarada: {list(bad)}")
                np.add.at(arrays['x'][t], (ids.to_numpy(int), cols.to_numpy(int)),
                          rows[schema.value].to_numpy(float))
            else:
                np.add.at(arrays[kind][t], ids.to_numpy(int), rows[schema.value].to_numpy(float))

    for kind in SCALAR_KINDS:
        if np.isnan(scalars[kind]).any():
            raise TableValidationError(f"Preço do fator {kind} ausente em algum período")
    present_p = df[df[schema.kind] == 'p']
    for label in periods:
        if present_p[present_p[schema.period] == label][schema.row_id].nunique() != J:
            raise TableValidationError(f"Preços p incompletos no período {label}")

    table = LinkedIOTable(sectors=sectors, r=scalars['r'], w=scalars['w'], **arrays)
    _check_structure(table)
    logger.info("Tabela carregada: %d setores de %s", J, path)
    return table.normalized()


def _check_structure(table: LinkedIOTable):
    bad_y = [(t, table.sectors[j]) for t, j in zip(*np.nonzero(table.y <= 0))]
    if bad_y:
        raise TableValidationError(f"Produção não positiva (non-positive output): {bad_y}")
    if (table.x < 0).any():
        raise TableValidationError("Transações intermediárias negativas")
    if (table.rK < 0).any() or (table.wL < 0).any():
        raise TableValidationError("Valor adicionado negativo")
    if (table.p <= 0).any() or (table.r <= 0).any() or (table.w <= 0).any():
        raise TableValidationError("Preços devem ser positivos")


def make_table(sectors: Sequence[str], x, y, rK, wL, h, g, m, p, r, w) -> LinkedIOTable:
    """Constrói e normaliza uma tabela a partir de arrays com o período no primeiro eixo"""
    as2 = lambda a: np.asarray(a, dtype=float).copy()
    table = LinkedIOTable(
        sectors=tuple(str(s) for s in sectors),
        x=as2(x), y=as2(y), rK=as2(rK), wL=as2(wL), h=as2(h), g=as2(g), m=as2(m),
        p=as2(p), r=as2(r), w=as2(w),
    )
    J = table.J
    shapes = {'x': (2, J, J), 'y': (2, J), 'rK': (2, J), 'wL': (2, J), 'h': (2, J),
              'g': (2, J), 'm': (2, J), 'p': (2, J), 'r': (2,), 'w': (2,)}
    for name, shape in shapes.items():
        if getattr(table, name).shape != shape:
            raise TableValidationError(f"{name} com forma {getattr(table, name).shape}, esperado {shape}")
    _check_structure(table)
    return table.normalized()


def table_to_frame(table: LinkedIOTable, periods: Tuple[str, str] = ('0', '1')) -> pd.DataFrame:
    rows = []
    for t, label in enumerate(periods):
        for i, si in enumerate(table.sectors):
            for j, sj in enumerate(table.sectors):
                if table.x[t, i, j] != 0:
                    rows.append((si, sj, table.x[t, i, j], 'x', label))
        for kind in SECTOR_KINDS:
            values = getattr(table, kind)[t]
            for j, sj in enumerate(table.sectors):
                rows.append((sj, '', values[j], kind, label))
        rows.append(('', '', table.r[t], 'r', label))
        rows.append(('', '', table.w[t], 'w', label))
    return pd.DataFrame(rows, columns=['row_id', 'col_id', 'value', 'kind', 'period'])


def save_table(table: LinkedIOTable, path: PathLike, header: Optional[str] = None):
    """Grava a tabela em formato longo; floats com 17 dígitos significativos"""
    df = table_to_frame(table)
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        if header:
            fh.write(header.rstrip('\n') + '\n')
        df.to_csv(fh, index=False, float_format='%.16e')


def validate_balances(table: LinkedIOTable, tol: float = BALANCE_TOL) -> BalanceReport:
    """
    Resíduos relativos das identidades contábeis

    Coluna: E_j + Σ_i x_ij − y_j; linha: f_i + Σ_j x_ij − y_i; ambos divididos por y.
    """
    column = (table.E + table.x.sum(axis=1) - table.y) / table.y
    row = (table.f + table.x.sum(axis=2) - table.y) / table.y
    report = BalanceReport(column_residuals=column, row_residuals=row,
                           tol=tol, sectors=table.sectors)
    if report.violations:
        logger.warning("%d violações de balanço acima de %.1e", len(report.violations), tol)
    return report


def cost_shares(table: LinkedIOTable, t: int) -> ShareMatrix:
    """
    Participações de custo s_ij = p_i x_ij / (p_j y_j) do período t

    Trabalho entra como resíduo, de modo que cada coluna soma 1.
    """
    if t not in (0, 1):
        raise TableValidationError(f"Período inválido: {t}")
    y = table.y[t]
    goods = table.x[t] / y[None, :]
    s_K = table.rK[t] / y
    s_L = 1.0 - goods.sum(axis=0) - s_K
    if (s_L < -1e-9).any():
        bad = [table.sectors[j] for j in np.nonzero(s_L < -1e-9)[0]]
        raise TableValidationError(f"Participação do trabalho negativa nos setores {bad}")
    s_L = np.clip(s_L, 0.0, None)
    S = np.vstack([goods, s_K, s_L])
    return ShareMatrix(S=S, sectors=table.sectors)
