# Módulo de equilíbrio geral dinâmico e bem-estar
from dynge.welfare import (AltState, BaseAggregates, CapitalCalibration, SropSweep,
                           alternative_equilibrium, calibrate_capital, srop, srop_by_sector,
                           standard_trigger, standard_triggers, synergy, synergy_frame)

__all__ = ['AltState', 'BaseAggregates', 'CapitalCalibration', 'SropSweep',
           'alternative_equilibrium', 'calibrate_capital', 'srop', 'srop_by_sector',
           'standard_trigger', 'standard_triggers', 'synergy', 'synergy_frame']
