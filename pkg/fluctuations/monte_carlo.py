"""
Monte Carlo de choques setoriais de produtividade e flutuações agregadas
"""

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy import stats

from config import THREADS, SolverConfig
from equilibrium.economy import Economy, EconomyKind
from equilibrium.solver import closed_form_prices, solve_equilibrium
from errors import CascadeError, EstimationError

logger = logging.getLogger(__name__)

HORIZONS = {'h': 1.0 / 8760.0, 'd': 1.0 / 365.0, 'w': 7.0 / 365.0, 'y': 1.0}


def parse_horizon(ell: Union[str, float]) -> float:
    """Horizonte em anos: '1h', '2d', '1w', '1y' ou número de anos"""
    if isinstance(ell, (int, float)):
        value = float(ell)
    else:
        text = str(ell).strip().lower()
        match = re.fullmatch(r'([0-9]*\.?[0-9]+(?:e[-+]?[0-9]+)?)\s*([hdwy]?)', text)
        if not match:
            raise ValueError(f"Horizonte inválido: {ell!r}")
        value = float(match.group(1)) * HORIZONS.get(match.group(2) or 'y')
    if value <= 0:
        raise ValueError("Horizonte deve ser positivo")
    return value


@dataclass(frozen=True, eq=False)
class ShockMatrix:
    """Sorteios iid de ln τ ~ N(0, σ²ℓ), forma (D, J)"""
    ln_tau: np.ndarray
    sigma: float
    ell: float
    seed: int

    @property
    def D(self) -> int:
        return self.ln_tau.shape[0]

    @property
    def J(self) -> int:
        return self.ln_tau.shape[1]

    def scaled(self, factor: float) -> 'ShockMatrix':
        return ShockMatrix(self.ln_tau * factor, self.sigma * abs(factor), self.ell, self.seed)


@dataclass(frozen=True, eq=False)
class FluctuationSeries:
    """
    Flutuações agregadas −(Σ ln p)/J por sorteio

    draws guarda o índice de cada valor na matriz de choques; sorteios cujo
    equilíbrio falhou ficam fora e são contados em failed.
    """
    values: np.ndarray
    kind: str
    draws: Optional[np.ndarray] = None
    failed: int = 0

    def __post_init__(self):
        if self.draws is None:
            object.__setattr__(self, 'draws', np.arange(len(self.values)))

    @property
    def D(self) -> int:
        return len(self.values)

    def minus(self, other: 'FluctuationSeries') -> 'FluctuationSeries':
        """Diferença por sorteio (self − other), alinhada pelo índice do sorteio"""
        common, ia, ib = np.intersect1d(self.draws, other.draws, return_indices=True)
        return FluctuationSeries(self.values[ia] - other.values[ib],
                                 f"{self.kind}-{other.kind}", common,
                                 self.failed + other.failed)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'draw': self.draws, 'kind': self.kind, 'value': self.values})


def draw_shocks(J: int, D: int, sigma: float, ell: Union[str, float] = 1.0,
                seed: int = 0) -> ShockMatrix:
    """Linha d vem do subfluxo default_rng([seed, d]), reprodutível sorteio a sorteio"""
    if J < 1 or D < 1:
        raise ValueError("J e D devem ser >= 1")
    years = parse_horizon(ell)
    if sigma < 0:
        raise ValueError("sigma não pode ser negativo")
    scale = sigma * np.sqrt(years)
    ln_tau = np.empty((D, J))
    for d in range(D):
        ln_tau[d] = np.random.default_rng([seed, d]).normal(0.0, 1.0, J) * scale
    return ShockMatrix(ln_tau=ln_tau, sigma=sigma, ell=years, seed=seed)


def _cces_draw(econ: Economy, ln_tau: np.ndarray, cfg: SolverConfig) -> Optional[float]:
    try:
        state = solve_equilibrium(econ, np.exp(ln_tau), cfg=cfg, with_shares=False)
    except CascadeError:
        return None
    if not state.converged:
        return None
    return float(-np.log(state.p).mean())


def simulate_aggregate(econ: Economy, shocks: ShockMatrix, cfg: Optional[SolverConfig] = None,
                       max_workers: int = THREADS) -> FluctuationSeries:
    """Flutuação agregada de cada sorteio, com r = w = 1"""
    if shocks.J != econ.J:
        raise ValueError(f"Choques com {shocks.J} setores para economia com {econ.J}")
    cfg = cfg or SolverConfig()
    ln_tau = shocks.ln_tau
    kind = econ.kind.value

    if econ.kind == EconomyKind.SIMPLE:
        return FluctuationSeries(ln_tau.mean(axis=1), kind)

    if econ.kind == EconomyKind.COBB_DOUGLAS:
        M = np.eye(econ.J) - econ.reference.A
        log_p = -np.linalg.solve(M.T, ln_tau.T).T
        return FluctuationSeries(-log_p.mean(axis=1), kind)

    if econ.kind == EconomyKind.LEONTIEF:
        results = []
        for row in ln_tau:
            try:
                results.append(float(-np.log(closed_form_prices(econ, np.exp(row))).mean()))
            except CascadeError:
                results.append(None)
    else:
        with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
            results = list(executor.map(lambda row: _cces_draw(econ, row, cfg), ln_tau))

    ok = np.array([v is not None for v in results], dtype=bool)
    failed = int((~ok).sum())
    if failed:
        logger.warning("%s: %d de %d sorteios sem equilíbrio excluídos", kind, failed, len(results))
    values = np.array([v for v in results if v is not None], dtype=float)
    return FluctuationSeries(values, kind, np.nonzero(ok)[0], failed)


def simulate_kinds(econ: Economy, shocks: ShockMatrix, kinds: Iterable[Union[str, EconomyKind]],
                   cfg: Optional[SolverConfig] = None,
                   max_workers: int = THREADS) -> Dict[str, FluctuationSeries]:
    """Mesma matriz de choques aplicada a cada tipo de economia"""
    series = {}
    for kind in kinds:
        variant = econ.with_kind(kind)
        logger.info("Simulando %s (%d sorteios)", variant.kind.value, shocks.D)
        series[variant.kind.value] = simulate_aggregate(variant, shocks, cfg, max_workers)
    return series


@dataclass
class Summary:
    label: str
    n: int
    failed: int
    mean: float
    sd: float
    skewness: float
    excess_kurtosis: float
    qq: pd.DataFrame
    qq_r2: float

    def moments(self) -> Dict[str, float]:
        return {'series': self.label, 'n': self.n, 'failed': self.failed, 'mean': self.mean,
                'sd': self.sd, 'skewness': self.skewness,
                'excess_kurtosis': self.excess_kurtosis, 'qq_r2': self.qq_r2}


def summarize(series: FluctuationSeries,
              reference: Optional[FluctuationSeries] = None) -> Summary:
    """
    Momentos populacionais e pares QQ contra a normal padrão em (i−0.5)/D

    Com reference, resume a diferença por sorteio series − reference.
    """
    target = series.minus(reference) if reference is not None else series
    x = np.asarray(target.values, dtype=float)
    D = len(x)
    if D < 4:
        raise EstimationError(f"São necessários ao menos 4 sorteios (recebidos {D})")

    sd = float(np.std(x))
    if sd > 0:
        skewness = float(stats.skew(x, bias=True))
        kurt = float(stats.kurtosis(x, fisher=True, bias=True))
    else:
        skewness = kurt = 0.0

    theoretical = stats.norm.ppf((np.arange(1, D + 1) - 0.5) / D)
    sample = np.sort(x)
    qq = pd.DataFrame({'theoretical': theoretical, 'sample': sample})
    r2 = float(stats.linregress(theoretical, sample).rvalue ** 2) if sd > 0 else float('nan')

    return Summary(label=target.kind, n=D, failed=target.failed, mean=float(x.mean()), sd=sd,
                   skewness=skewness, excess_kurtosis=kurt, qq=qq, qq_r2=r2)


def moments_table(summaries: Sequence[Summary]) -> pd.DataFrame:
    return pd.DataFrame([s.moments() for s in summaries])
