# Módulo de flutuações agregadas por Monte Carlo
from fluctuations.monte_carlo import (FluctuationSeries, ShockMatrix, Summary, draw_shocks,
                                      moments_table, parse_horizon, simulate_aggregate,
                                      simulate_kinds, summarize)

__all__ = ['FluctuationSeries', 'ShockMatrix', 'Summary', 'draw_shocks', 'moments_table',
           'parse_horizon', 'simulate_aggregate', 'simulate_kinds', 'summarize']
