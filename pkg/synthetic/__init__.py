# Gerador de economias sintéticas
from synthetic.generator import (SyntheticEconomy, generate_economy, random_economy,
                                 random_sector_data, random_technology, reference_network,
                                 technology_from_shares)

__all__ = ['SyntheticEconomy', 'generate_economy', 'random_economy', 'random_sector_data',
           'random_technology', 'reference_network', 'technology_from_shares']
