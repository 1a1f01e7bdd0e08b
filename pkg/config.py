import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, Optional

from dotenv import dotenv_values, load_dotenv

from errors import ConfigError

# Carrega variáveis de ambiente do arquivo .env
load_dotenv()

ENV_PREFIX = 'CASCADE_GE_'
VERSION = '0.1.0'

# Configurações do solver de equilíbrio
TOL = float(os.getenv('CASCADE_GE_TOL', '1e-12'))
MAX_ITER = int(os.getenv('CASCADE_GE_MAX_ITER', '10000'))
DAMPING = float(os.getenv('CASCADE_GE_DAMPING', '1.0'))
MAX_HALVINGS = int(os.getenv('CASCADE_GE_MAX_HALVINGS', '6'))

# Configurações de estimação
GAMMA_EPS = float(os.getenv('CASCADE_GE_GAMMA_EPS', '1e-8'))
SHARE_FLOOR = float(os.getenv('CASCADE_GE_SHARE_FLOOR', '1e-9'))
BALANCE_TOL = float(os.getenv('CASCADE_GE_BALANCE_TOL', '1e-6'))

# Experimentos (volatilidade por ano, horizonte, sorteios)
SIGMA = float(os.getenv('CASCADE_GE_SIGMA', '0.10'))
ELL = os.getenv('CASCADE_GE_ELL', '1h')
DRAWS = int(os.getenv('CASCADE_GE_DRAWS', '300'))
SEED = int(os.getenv('CASCADE_GE_SEED', '42'))
THETA = float(os.getenv('CASCADE_GE_THETA', '1.0'))
DELTA = float(os.getenv('CASCADE_GE_DELTA', str(1 - (1 - 0.125) ** 5)))
BETA = float(os.getenv('CASCADE_GE_BETA', str(1.03 ** -5)))
LAMBDA = float(os.getenv('CASCADE_GE_LAMBDA', '1.0'))

THREADS = int(os.getenv('CASCADE_GE_THREADS', str(os.cpu_count() or 1)))


@dataclass(frozen=True)
class SolverConfig:
    """Parâmetros do ponto fixo de preços"""
    tol: float = TOL
    max_iter: int = MAX_ITER
    damping: float = DAMPING
    max_halvings: int = MAX_HALVINGS


@dataclass
class RunConfig:
    """Configuração completa de uma execução da CLI"""
    subcommand: str = ''
    tol: float = TOL
    max_iter: int = MAX_ITER
    damping: float = DAMPING
    max_halvings: int = MAX_HALVINGS
    gamma_eps: float = GAMMA_EPS
    share_floor: float = SHARE_FLOOR
    balance_tol: float = BALANCE_TOL
    sigma: float = SIGMA
    ell: str = ELL
    draws: int = DRAWS
    seed: int = SEED
    theta: float = THETA
    delta: float = DELTA
    beta: float = BETA
    lam: float = LAMBDA
    threads: int = THREADS
    paths: Dict[str, str] = field(default_factory=dict)

    def validate(self) -> 'RunConfig':
        problems = []
        for name in ('tol', 'gamma_eps', 'share_floor', 'balance_tol'):
            if not getattr(self, name) > 0:
                problems.append(f"{name} deve ser positivo")
        if self.max_iter < 1:
            problems.append("max_iter deve ser >= 1")
        if not 0 < self.damping <= 1:
            problems.append("damping deve estar em (0, 1]")
        if not 0 < self.delta < 1:
            problems.append("delta deve estar em (0, 1)")
        if not 0 < self.beta < 1:
            problems.append("beta deve estar em (0, 1)")
        if self.theta < 0:
            problems.append("theta não pode ser negativo")
        if self.sigma < 0:
            problems.append("sigma não pode ser negativo")
        if self.draws < 1:
            problems.append("draws deve ser >= 1")
        if self.threads < 1:
            problems.append("threads deve ser >= 1")
        if problems:
            raise ConfigError("Configuração inválida: " + "; ".join(problems))
        return self

    def solver(self) -> SolverConfig:
        return SolverConfig(tol=self.tol, max_iter=self.max_iter,
                            damping=self.damping, max_halvings=self.max_halvings)

    def config_hash(self) -> str:
        settings = asdict(self)
        settings.pop('paths')
        settings.pop('subcommand')
        canonical = json.dumps(settings, sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]


def _coerce(name: str, raw: Any) -> Any:
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if kind in (int, 'int'):
        return int(float(raw))
    if kind in (float, 'float'):
        return float(raw)
    return str(raw)


def _normalize_keys(values: Dict[str, Optional[str]]) -> Dict[str, Any]:
    known = {f.name for f in fields(RunConfig)} - {'paths', 'subcommand'}
    aliases = {'lambda': 'lam'}
    settings = {}
    for key, raw in values.items():
        if raw is None:
            continue
        name = key.lower()
        if name.startswith(ENV_PREFIX.lower()):
            name = name[len(ENV_PREFIX):]
        name = aliases.get(name, name)
        if name in known:
            try:
                settings[name] = _coerce(name, raw)
            except ValueError:
                raise ConfigError(f"Valor inválido para {key}: {raw!r}")
    return settings


def load_run_config(path: Optional[str] = None,
                    overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Monta a configuração: padrões < arquivo key=value < ambiente < CLI

    Args:
        path: Arquivo de configuração plano (opcional)
        overrides: Valores vindos das opções da CLI (None é ignorado)
    """
    cfg = RunConfig()
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"Arquivo de configuração não encontrado: {path}")
        cfg = replace(cfg, **_normalize_keys(dotenv_values(path)))

    env = {k: v for k, v in os.environ.items() if k.startswith(ENV_PREFIX)}
    cfg = replace(cfg, **_normalize_keys(env))

    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()
