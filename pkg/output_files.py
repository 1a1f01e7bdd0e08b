"""
Arquivos de saída com cabeçalho de proveniência (versão, hash da configuração, semente)
"""

import json
import math
from pathlib import Path
from typing import Any, List, Sequence, Union

import numpy as np
import pandas as pd

from config import VERSION, RunConfig

FLOAT_FORMAT = '%.16e'

PathLike = Union[str, Path]


def header_line(cfg: RunConfig) -> str:
    return f"# cascade-ge {VERSION} config={cfg.config_hash()} seed={cfg.seed}"


def split_paths(value: str, expected: int) -> List[str]:
    """'a.csv,b.csv' → ['a.csv', 'b.csv']; exige exatamente `expected` caminhos"""
    paths = [p.strip() for p in str(value).split(',') if p.strip()]
    if len(paths) != expected:
        raise ValueError(f"Esperados {expected} caminhos separados por vírgula em {value!r}")
    return paths


def write_csv(df: pd.DataFrame, path: PathLike, cfg: RunConfig):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        fh.write(header_line(cfg) + '\n')
        df.to_csv(fh, index=False, float_format=FLOAT_FORMAT)


def read_csv(path: PathLike, **kwargs) -> pd.DataFrame:
    """Lê um CSV gravado por write_csv (ou qualquer CSV), ignorando linhas de comentário"""
    if not Path(path).exists():
        raise FileNotFoundError(f"Arquivo não encontrado: {path}")
    kwargs.setdefault('float_precision', 'round_trip')
    return pd.read_csv(path, comment='#', **kwargs)


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_json(payload: dict, path: PathLike, cfg: RunConfig):
    """JSON não admite comentários: o cabeçalho vai no campo 'header'"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    document = {'header': header_line(cfg)[2:], **_plain(payload)}
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(document, fh, indent=2, ensure_ascii=False)
        fh.write('\n')


def read_json(path: PathLike) -> dict:
    with open(path, encoding='utf-8') as fh:
        return json.load(fh)


def vector_frame(sectors: Sequence[str], **columns) -> pd.DataFrame:
    return pd.DataFrame({'sector_id': list(sectors), **{k: np.asarray(v) for k, v in columns.items()}})
