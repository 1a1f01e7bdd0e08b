# Módulo CCES: custo unitário, estimação e índices de preço
from cces.aggregator import (CcesTechnology, CompoundPrices, cces_unit_cost, ces_unit_cost,
                             foc_shares, technologies_from_frame, technologies_to_frame)
from cces.estimator import (MultipointFit, SectorData, TwoPeriodSectorData, estimate_multipoint,
                            estimate_nestwise, estimate_sectors, estimate_two_point, nest_factors)
from cces.indices import log_mean, sato_vartia_index, tfpg_cces, tfpg_table, tfpg_translog

__all__ = ['CcesTechnology', 'CompoundPrices', 'cces_unit_cost', 'ces_unit_cost', 'foc_shares',
           'technologies_from_frame', 'technologies_to_frame', 'MultipointFit', 'SectorData',
           'TwoPeriodSectorData', 'estimate_multipoint', 'estimate_nestwise', 'estimate_sectors',
           'estimate_two_point', 'nest_factors', 'log_mean', 'sato_vartia_index', 'tfpg_cces',
           'tfpg_table', 'tfpg_translog']
