# Módulo de equilíbrio geral de preços
from equilibrium.economy import Economy, EconomyKind
from equilibrium.solver import (EquilibriumState, PeriodGap, RestorationReport, closed_form_prices,
                                equilibrium_prices, network_shares, restoring_productivity,
                                solve_equilibrium, verify_restoring)

__all__ = ['Economy', 'EconomyKind', 'EquilibriumState', 'PeriodGap', 'RestorationReport',
           'closed_form_prices', 'equilibrium_prices', 'network_shares', 'restoring_productivity',
           'solve_equilibrium', 'verify_restoring']
