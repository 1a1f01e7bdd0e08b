"""
Estimação de λ por 2SLS ponderado em primeiras diferenças, com diagnósticos
"""

import logging
import warnings
from dataclasses import asdict, dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import statsmodels.api as sm
from linearmodels.iv import IV2SLS

from errors import DiagnosticWarning, DroppedItemWarning, EstimationError

logger = logging.getLogger(__name__)

MIN_ITEMS = 3


@dataclass
class Diagnostic:
    stat: float
    pval: float
    df: Tuple[int, ...]


@dataclass
class LambdaEstimate:
    lambda_hat: float
    lambda_se: float
    intercept: float
    intercept_se: float
    n_items: int
    dropped: int
    diagnostics: Dict[str, Diagnostic] = field(default_factory=dict)
    ols_lambda: float = float('nan')
    ols_lambda_se: float = float('nan')

    def to_dict(self) -> dict:
        out = asdict(self)
        out['diagnostics'] = {k: {'stat': d.stat, 'pval': d.pval, 'df': list(d.df)}
                              for k, d in self.diagnostics.items()}
        return out


@dataclass(frozen=True, eq=False)
class RegressionData:
    dlnb: np.ndarray
    dlnp: np.ndarray
    instruments: np.ndarray
    weights: np.ndarray
    items: np.ndarray
    dropped: int


def first_difference_data(b0, b1, p0, p1, instruments,
                          items: Optional[Sequence[str]] = None) -> RegressionData:
    """
    Monta Δln b, Δln p, instrumentos e pesos 1/ν² com ν² = 1/b₁² + 1/b₀²

    instruments 1-D (Δln τ̂ por item) vira as colunas [z, e^z]; 2-D é usado como está.
    """
    b0, b1, p0, p1 = (np.asarray(a, dtype=float) for a in (b0, b1, p0, p1))
    z = np.asarray(instruments, dtype=float)
    n = len(b0)
    if not (len(b1) == len(p0) == len(p1) == len(z) == n):
        raise EstimationError("Vetores de participações, preços e instrumentos com tamanhos diferentes")
    items = np.asarray(items if items is not None else [str(i) for i in range(n)])
    if (p0 <= 0).any() or (p1 <= 0).any():
        raise EstimationError("Preços devem ser estritamente positivos")

    keep = (b0 > 0) & (b1 > 0)
    dropped = int((~keep).sum())
    if dropped:
        warnings.warn(f"{dropped} itens sem consumo em algum período removidos da regressão",
                      DroppedItemWarning, stacklevel=3)
    if keep.sum() < MIN_ITEMS:
        raise EstimationError(f"São necessários ao menos {MIN_ITEMS} itens (restaram {keep.sum()})")

    b0, b1, p0, p1, z, items = b0[keep], b1[keep], p0[keep], p1[keep], z[keep], items[keep]
    Z = np.column_stack([z, np.exp(z)]) if z.ndim == 1 else z
    dlnp = np.log(p1) - np.log(p0)
    if np.ptp(dlnp) <= 1e-14:
        raise EstimationError("Δln p sem variação entre itens: regressor colinear com a constante")
    if (np.ptp(Z, axis=0) <= 1e-14).any():
        raise EstimationError("Instrumento sem variação entre itens")
    nu2 = 1.0 / b1 ** 2 + 1.0 / b0 ** 2
    return RegressionData(dlnb=np.log(b1) - np.log(b0), dlnp=dlnp, instruments=Z,
                          weights=1.0 / nu2, items=items, dropped=dropped)


def _wald(test) -> Diagnostic:
    denom = getattr(test, 'df_denom', None)
    df = (test.df,) if denom is None else (test.df, denom)
    return Diagnostic(float(test.stat), float(test.pval), tuple(int(d) for d in df))


def _diagnostic(name: str, compute) -> Diagnostic:
    try:
        return compute()
    except Exception as e:
        warnings.warn(f"Diagnóstico {name} indisponível: {e}", DiagnosticWarning, stacklevel=2)
        return Diagnostic(float('nan'), float('nan'), ())


def weighted_ols(data: RegressionData) -> Tuple[np.ndarray, np.ndarray]:
    """MQO ponderado da mesma regressão (referência); devolve (coeficientes, erros-padrão)"""
    X = sm.add_constant(data.dlnp, has_constant='add')
    fit = sm.WLS(data.dlnb, X, weights=data.weights).fit()
    return np.asarray(fit.params), np.asarray(fit.bse)


def estimate_lambda(b0, b1, p0, p1, instruments,
                    items: Optional[Sequence[str]] = None) -> LambdaEstimate:
    """
    Δln b_i = c + λ Δln p_i + Δε_i por 2SLS ponderado

    O intercepto absorve −λ Δln ψ. Diagnósticos: F do primeiro estágio,
    Sargan, Basmann, Durbin e Wu-Hausman; os que não puderem ser calculados
    ficam NaN com DiagnosticWarning.
    """
    data = first_difference_data(b0, b1, p0, p1, instruments, items)
    n = len(data.dlnb)
    dependent = pd.Series(data.dlnb, name='dlnb')
    exog = pd.DataFrame({'const': np.ones(n)})
    endog = pd.DataFrame({'dlnp': data.dlnp})
    instr = pd.DataFrame(data.instruments,
                         columns=[f'z{k}' for k in range(data.instruments.shape[1])])

    try:
        res = IV2SLS(dependent, exog, endog, instr, weights=pd.Series(data.weights)).fit(
            cov_type='unadjusted')
    except (ValueError, np.linalg.LinAlgError) as e:
        raise EstimationError(f"Primeiro estágio com posto deficiente: {e}")

    def first_stage_f() -> Diagnostic:
        diag = res.first_stage.diagnostics.loc['dlnp']
        k = instr.shape[1]
        return Diagnostic(float(diag['f.stat']), float(diag['f.pval']),
                          (k, n - k - exog.shape[1]))

    diagnostics = {
        'first_stage_f': _diagnostic('F do primeiro estágio', first_stage_f),
        'sargan': _diagnostic('Sargan', lambda: _wald(res.sargan)),
        'basmann': _diagnostic('Basmann', lambda: _wald(res.basmann)),
        'durbin': _diagnostic('Durbin', lambda: _wald(res.durbin())),
        'wu_hausman': _diagnostic('Wu-Hausman', lambda: _wald(res.wu_hausman())),
    }

    ols_params, ols_se = weighted_ols(data)
    estimate = LambdaEstimate(
        lambda_hat=float(res.params['dlnp']), lambda_se=float(res.std_errors['dlnp']),
        intercept=float(res.params['const']), intercept_se=float(res.std_errors['const']),
        n_items=n, dropped=data.dropped, diagnostics=diagnostics,
        ols_lambda=float(ols_params[1]), ols_lambda_se=float(ols_se[1]),
    )
    logger.info("λ̂ = %.5f (EP %.5f), %d itens", estimate.lambda_hat, estimate.lambda_se, n)
    return estimate
