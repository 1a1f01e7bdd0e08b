import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from conftest import two_sector_table
from errors import TableValidationError
from iotable.linked_table import (cost_shares, load_table, make_table, save_table,
                                  table_to_frame, validate_balances)
from synthetic.generator import generate_economy


def _write(frame, path):
    frame.to_csv(path, index=False, float_format='%.16e')
    return path


def test_save_then_load_is_identity(tmp_path, synth8):
    path = tmp_path / 'table.csv'
    save_table(synth8.table, path, header='# teste')
    loaded = load_table(path)
    assert loaded.sectors == synth8.table.sectors
    for name in ('x', 'y', 'rK', 'wL', 'h', 'g', 'm', 'p', 'r', 'w'):
        assert np.array_equal(getattr(loaded, name), getattr(synth8.table, name)), name


def test_load_three_sectors(tmp_path, synth3):
    path = tmp_path / 't.csv'
    save_table(synth3.table, path)
    loaded = load_table(path)
    assert loaded.J == 3
    assert cost_shares(loaded, 1).I == 3


def test_load_normalizes_prices_at_reference(tmp_path, small_table):
    frame = table_to_frame(small_table)
    is_p = frame['kind'] == 'p'
    frame.loc[is_p & (frame['period'] == '1'), 'value'] = 2.0
    frame.loc[is_p & (frame['period'] == '0'), 'value'] = 3.0
    frame.loc[(frame['kind'] == 'r') & (frame['period'] == '1'), 'value'] = 4.0
    loaded = load_table(_write(frame, tmp_path / 'raw.csv'))

    assert np.array_equal(loaded.p[1], np.ones(2))
    assert np.allclose(loaded.p[0], 1.5)
    assert loaded.r[1] == 1.0 and loaded.r[0] == pytest.approx(0.25)
    assert np.array_equal(loaded.raw_prices['p'][1], [2.0, 2.0])
    for t in (0, 1):
        assert np.array_equal(cost_shares(loaded, t).S, cost_shares(small_table, t).S)


def test_load_one_file_per_period(tmp_path, synth3):
    frame = table_to_frame(synth3.table)
    paths = []
    for label in ('0', '1'):
        part = frame[frame['period'] == label].drop(columns='period')
        paths.append(_write(part, tmp_path / f'period{label}.csv'))
    loaded = load_table(paths)
    assert np.array_equal(loaded.x, synth3.table.x)
    assert np.array_equal(loaded.y, synth3.table.y)


def test_nonpositive_output_rejected(tmp_path, small_table):
    frame = table_to_frame(small_table)
    frame.loc[(frame['kind'] == 'y') & (frame['row_id'] == 'b') & (frame['period'] == '1'),
              'value'] = 0.0
    with pytest.raises(TableValidationError, match='non-positive output'):
        load_table(_write(frame, tmp_path / 'bad.csv'))


def test_missing_columns_rejected(tmp_path, small_table):
    frame = table_to_frame(small_table).drop(columns='kind')
    with pytest.raises(TableValidationError, match='Colunas ausentes'):
        load_table(_write(frame, tmp_path / 'bad.csv'))


def test_period_count_must_be_two(tmp_path, small_table):
    frame = table_to_frame(small_table)
    extra = frame[frame['period'] == '1'].assign(period='2')
    with pytest.raises(TableValidationError, match='2 períodos'):
        load_table(_write(pd.concat([frame, extra], ignore_index=True), tmp_path / 'bad.csv'))


def test_unknown_kind_rejected(tmp_path, small_table):
    frame = table_to_frame(small_table)
    frame.loc[0, 'kind'] = 'z'
    with pytest.raises(TableValidationError, match='desconhecidos'):
        load_table(_write(frame, tmp_path / 'bad.csv'))


def test_missing_file(tmp_path):
    with pytest.raises(TableValidationError, match='não encontrado'):
        load_table(tmp_path / 'nada.csv')


def test_negative_intermediate_rejected():
    with pytest.raises(TableValidationError, match='negativas'):
        two_sector_table(x0=[[0.0, -1.0], [10.0, 0.0]])


def test_balanced_fixture_has_zero_residuals(small_table):
    report = validate_balances(small_table, 1e-12)
    assert report.ok
    assert np.abs(report.column_residuals).max() < 1e-12
    assert np.abs(report.row_residuals).max() < 1e-12


def test_perturbed_value_added_is_flagged(small_table):
    rK = small_table.rK.copy()
    wL = small_table.wL.copy()
    rK[1, 0] *= 1.01
    wL[1, 0] *= 1.01
    t = small_table
    perturbed = make_table(t.sectors, t.x, t.y, rK, wL, t.h, t.g, t.m, t.p, t.r, t.w)
    report = validate_balances(perturbed, 1e-6)
    assert not report.ok
    assert report.column_residuals[1, 0] == pytest.approx(0.01 * 90.0 / 100.0)
    assert [(v[0], v[1], v[2]) for v in report.violations] == [(1, 'column', 'a')]

    frame = report.to_frame()
    assert frame['flagged'].sum() == 1
    assert validate_balances(perturbed, np.inf).ok


def test_two_sector_shares_by_hand(small_table):
    S = cost_shares(small_table, 1)
    expected = np.array([[0.0, 0.25], [0.1, 0.0], [0.3, 0.25], [0.6, 0.5]])
    assert np.allclose(S.S, expected, atol=1e-15)
    assert np.allclose(S.a0, [0.9, 0.75])
    assert S.factor_labels() == ['a', 'b', 'K', 'L']


def test_value_added_only_sector():
    x = np.zeros((2, 2, 2))
    x[:, 1, 0] = 10.0
    y = np.full((2, 2), 100.0)
    rK = np.array([[45.0, 50.0], [45.0, 50.0]])
    wL = y - x.sum(axis=1) - rK
    f = y - x.sum(axis=2)
    table = make_table(('a', 'b'), x, y, rK, wL, f, np.zeros((2, 2)), np.zeros((2, 2)),
                       np.ones((2, 2)), [1.0, 1.0], [1.0, 1.0])
    assert np.allclose(cost_shares(table, 1).S[:, 1], [0.0, 0.0, 0.5, 0.5])


def test_invalid_period(small_table):
    with pytest.raises(TableValidationError):
        cost_shares(small_table, 2)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), J=st.integers(1, 6))
def test_share_columns_sum_to_one(seed, J):
    table = generate_economy(J, seed=seed).table
    for t in (0, 1):
        S = cost_shares(table, t).S
        assert np.abs(S.sum(axis=0) - 1.0).max() < 1e-12
        assert (S >= 0).all() and (S <= 1).all()
