# Módulo de tabelas insumo-produto ligadas
from iotable.linked_table import (BalanceReport, LinkedIOTable, ShareMatrix, TableSchema,
                                  cost_shares, load_table, make_table, save_table,
                                  table_to_frame, validate_balances)

__all__ = ['BalanceReport', 'LinkedIOTable', 'ShareMatrix', 'TableSchema', 'cost_shares',
           'load_table', 'make_table', 'save_table', 'table_to_frame', 'validate_balances']
