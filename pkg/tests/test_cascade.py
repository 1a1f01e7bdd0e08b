import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cascade.incidence import (CascadingOrder, IncidenceMatrix, cascading_order, ccdf_curve,
                               degree_ratios, incidence_and_degrees, triangularity_violations)


def triangular(N: int) -> np.ndarray:
    """x_ij > 0 para i < j: cada setor abastece todos os seguintes"""
    return np.triu(np.ones((N, N)), k=1)


@pytest.mark.parametrize('N', [4, 50, 385])
def test_triangular_ratios_and_identity_order(N):
    inc = IncidenceMatrix.from_matrix(triangular(N))
    order = cascading_order(inc)
    k = np.arange(1, N + 1)
    assert np.array_equal(order.ratios, k / (N - k + 1))
    assert np.array_equal(order.perm, np.arange(N))
    assert order.violations == 0
    assert np.allclose(order.ranking, (N - k + 1) / N)


def test_triangular_second_process_ratio():
    ratios = degree_ratios(IncidenceMatrix.from_matrix(triangular(4)))
    assert ratios[1] == pytest.approx(2 / 3)


def test_reversed_triangular_gives_reversal():
    inc = IncidenceMatrix.from_matrix(triangular(6).T)
    assert np.array_equal(cascading_order(inc).perm, np.arange(6)[::-1])


def test_diagonal_only_is_degenerate():
    inc = IncidenceMatrix.from_matrix(np.eye(4), primary=False, final=False)
    assert inc.phi.sum() == 0
    order = cascading_order(inc)
    assert np.isinf(order.ratios).all()
    assert np.array_equal(order.perm, np.arange(4))


def test_zero_indegree_is_most_upstream():
    x = np.zeros((3, 3))
    x[0, 1] = x[1, 2] = 1.0
    inc = IncidenceMatrix.from_matrix(x, primary=False, final=False)
    ratios = degree_ratios(inc)
    assert ratios[0] == 0.0
    assert np.isinf(ratios[2])


def test_ratios_match_direct_count():
    rng = np.random.default_rng(6)
    x = rng.random((6, 6)) * (rng.random((6, 6)) < 0.4)
    primary = rng.random(6) < 0.5
    final = rng.random(6) < 0.5
    inc = IncidenceMatrix.from_matrix(x, primary, final)
    ratios = degree_ratios(inc)
    for k in range(6):
        indeg = sum(1 for i in range(6) if i != k and x[i, k] > 0) + primary[k]
        outdeg = sum(1 for n in range(6) if n != k and x[k, n] > 0) + final[k]
        expected = np.inf if outdeg == 0 else indeg / outdeg
        assert ratios[k] == expected


def test_incidence_from_table(small_table):
    inc, ratios = incidence_and_degrees(small_table)
    # a → b e b → a, ambos com valor adicionado e demanda final
    assert inc.phi.tolist() == [[0, 1], [1, 0]]
    assert np.array_equal(ratios, [1.0, 1.0])


def test_cycle_is_counted():
    x = np.zeros((3, 3))
    x[0, 1] = x[1, 2] = x[2, 0] = 1.0
    inc = IncidenceMatrix.from_matrix(x)
    order = cascading_order(inc)
    assert sorted(order.perm.tolist()) == [0, 1, 2]
    permuted = inc.phi[np.ix_(order.perm, order.perm)]
    assert order.violations == int(np.tril(permuted, -1).sum())
    assert order.violations >= 1
    assert triangularity_violations(inc, order.perm) == order.violations


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40).flatmap(lambda n: st.permutations(list(range(n)))))
def test_shuffled_triangular_is_recovered(shuffle):
    sigma = np.array(shuffle)
    x = triangular(len(sigma))[np.ix_(sigma, sigma)]
    order = cascading_order(IncidenceMatrix.from_matrix(x))
    assert np.array_equal(sigma[order.perm], np.arange(len(sigma)))


def test_order_frame_round_trip():
    inc = IncidenceMatrix.from_matrix(triangular(5).T, sectors=('a', 'b', 'c', 'd', 'e'))
    order = cascading_order(inc)
    frame = order.to_frame()
    assert list(frame.columns) == ['rank', 'sector_id', 'ratio', 'ranking_index']
    assert frame['sector_id'].tolist() == ['e', 'd', 'c', 'b', 'a']
    again = CascadingOrder.from_frame(frame.sample(frac=1.0, random_state=1), inc.sectors)
    assert np.array_equal(again.perm, order.perm)
    assert np.array_equal(again.ratios, order.ratios)


def test_order_frame_must_cover_sectors():
    order = cascading_order(IncidenceMatrix.from_matrix(triangular(3)))
    with pytest.raises(ValueError):
        CascadingOrder.from_frame(order.to_frame().iloc[:2], ('0', '1', '2'))


def test_ccdf_endpoint():
    curve = ccdf_curve(4)
    assert curve.perfect[3] == pytest.approx([np.log(4.0), np.log(0.25)])


def test_ccdf_two_points():
    curve = ccdf_curve(2)
    assert np.allclose(curve.perfect, [[np.log(0.5), 0.0], [np.log(2.0), np.log(0.5)]])


def test_ccdf_tail_slope():
    curve = ccdf_curve(1000).perfect
    slope = (curve[-1, 1] - curve[-2, 1]) / (curve[-1, 0] - curve[-2, 0])
    assert slope == pytest.approx(-1.0, rel=0.02)


def test_ccdf_empirical_excludes_unloggable_ratios():
    x = np.zeros((3, 3))
    x[0, 1] = x[1, 2] = 1.0
    inc = IncidenceMatrix.from_matrix(x, primary=False, final=False)
    curve = ccdf_curve(3, inc)
    assert curve.excluded == 2
    assert curve.empirical.shape == (1, 2)
    frame = curve.to_frame()
    assert set(frame['curve']) == {'perfect', 'empirical'}


def test_ccdf_requires_two_sectors():
    with pytest.raises(ValueError):
        ccdf_curve(1)
