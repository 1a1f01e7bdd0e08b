# Módulo de elasticidades de substituição
from elasticity.substitution import ElasticityTables, aues, elasticity_tables, mes

__all__ = ['ElasticityTables', 'aues', 'elasticity_tables', 'mes']
