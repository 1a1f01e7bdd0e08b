"""
Exceções e avisos do cascade-ge
"""

from typing import Optional

import numpy as np


class CascadeError(Exception):
    """Erro base de todas as operações do cascade-ge"""


class TableValidationError(CascadeError, ValueError):
    """Tabela insumo-produto mal formada ou inconsistente"""


class ConfigError(CascadeError, ValueError):
    """Configuração inválida"""


class EstimationError(CascadeError, ValueError):
    """Dados insuficientes ou degenerados para uma estimação"""


class CalibrationError(CascadeError, ValueError):
    """Calibração de capital inviável"""


class EquilibriumError(CascadeError):
    """Sistema de preços singular ou sem solução positiva"""


class DegenerateNest(EstimationError):
    """Nenhum CES racionaliza as duas observações de um ninho"""

    def __init__(self, nest: int, factor: int, sector: Optional[str] = None,
                 numerator: float = float('nan')):
        self.nest = nest
        self.factor = factor
        self.sector = sector
        self.numerator = numerator
        where = f"setor {sector}, " if sector is not None else ""
        super().__init__(
            f"Ninho degenerado ({where}ninho {nest}, fator {factor}): "
            f"preços relativos constantes mas participações variam (Δ={numerator:.3e})"
        )


class NonConvergence(CascadeError):
    """Iteração de ponto fixo esgotou o limite de iterações"""

    def __init__(self, message: str, iterations: int = 0,
                 residual: float = float('nan'),
                 best: Optional[np.ndarray] = None):
        self.iterations = iterations
        self.residual = residual
        self.best = best
        super().__init__(f"{message} (iterações={iterations}, resíduo={residual:.3e})")


class ShareFloorWarning(UserWarning):
    """Participação nula em apenas um período foi substituída pelo piso"""


class DroppedItemWarning(UserWarning):
    """Itens removidos da regressão do domicílio"""


class DiagnosticWarning(UserWarning):
    """Estatística de diagnóstico não pôde ser calculada"""


class UndefinedElasticityWarning(UserWarning):
    """Elasticidade-preço do investimento indefinida, tratada como zero"""
