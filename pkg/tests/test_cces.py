import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cces.aggregator import (CcesTechnology, cces_unit_cost, ces_unit_cost, foc_shares,
                             technologies_from_frame, technologies_to_frame)
from cces.estimator import (SectorData, estimate_multipoint, estimate_nestwise,
                            estimate_sectors, estimate_two_point, nest_factors,
                            nested_residuals, prepared_shares)
from cces.indices import log_mean, sato_vartia_index, tfpg_cces, tfpg_table, tfpg_translog
from errors import DegenerateNest, ShareFloorWarning
from synthetic.generator import random_sector_data, random_technology, technology_from_shares

seeds = st.integers(0, 2**32 - 1)


def _tech_and_prices(seed, max_goods=4):
    rng = np.random.default_rng(seed)
    tech = random_technology(int(rng.integers(0, max_goods + 1)), rng)
    prices = np.exp(rng.normal(0.0, 0.3, size=tech.n_factors))
    return tech, prices


def test_ces_unit_cost_examples():
    assert ces_unit_cost(1.0, 1.0, 0.3, -0.7) == pytest.approx(1.0, abs=1e-15)
    assert ces_unit_cost(2.0, 1.0, 0.5, 1.0) == pytest.approx(1.5, rel=1e-14)
    assert ces_unit_cost(4.0, 1.0, 0.5, 1e-14) == pytest.approx(2.0, rel=1e-14)


def test_ces_unit_cost_rejects_nonpositive_prices():
    with pytest.raises(ValueError):
        ces_unit_cost(-1.0, 1.0, 0.5, 0.5)


@pytest.mark.parametrize('alpha', [0.2, 0.5, 0.8])
def test_ces_continuous_at_cobb_douglas_switch(alpha):
    limit = ces_unit_cost(1.2, 1.1, alpha, 0.0)
    for gamma in (1e-8, -1e-8):
        assert abs(ces_unit_cost(1.2, 1.1, alpha, gamma) - limit) < 1e-10


def test_three_factor_cost_by_hand():
    # fatores: bem 0, K (1), L (2); ninho 1 junta K a L, ninho 2 junta o bem
    tech = CcesTechnology(np.array([2, 1, 0]), np.array([0.4, 0.3]), np.array([0.5, -0.5]), 3)
    prices = np.array([2.0, 1.5, 0.8])
    pi1 = (0.4 * 1.5 ** 0.5 + 0.6 * 0.8 ** 0.5) ** 2
    pi2 = (0.3 * 2.0 ** -0.5 + 0.7 * pi1 ** -0.5) ** -2
    q, compound = cces_unit_cost(prices, tech, tau=1.25)
    assert compound.pi == pytest.approx([0.8, pi1, pi2], rel=1e-13)
    assert q == pytest.approx(pi2 / 1.25, rel=1e-13)
    assert compound.final == pytest.approx(pi2, rel=1e-13)


def test_unit_prices_give_unit_cost():
    tech, _ = _tech_and_prices(1)
    q, compound = cces_unit_cost(np.ones(tech.n_factors), tech)
    assert q == 1.0
    assert np.array_equal(compound.pi, np.ones(len(tech.factors)))


@settings(max_examples=50, deadline=None)
@given(seed=seeds)
def test_homogeneity_of_degree_one(seed):
    tech, prices = _tech_and_prices(seed)
    base, _ = cces_unit_cost(prices, tech)
    for kappa in (0.5, 2.0, 10.0):
        scaled, _ = cces_unit_cost(kappa * prices, tech)
        assert scaled == pytest.approx(kappa * base, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(seed=seeds)
def test_foc_shares_match_finite_differences(seed):
    tech, prices = _tech_and_prices(seed)
    cost, _ = cces_unit_cost(prices, tech)
    numeric = np.zeros(tech.n_factors)
    for k in tech.factors:
        h = 1e-6 * prices[k]
        up, down = prices.copy(), prices.copy()
        up[k] += h
        down[k] -= h
        grad = (cces_unit_cost(up, tech)[0] - cces_unit_cost(down, tech)[0]) / (2 * h)
        numeric[k] = grad * prices[k] / cost
    shares = foc_shares(tech, prices)
    assert np.abs(shares - numeric).max() < 1e-6
    assert shares.sum() == pytest.approx(1.0, abs=1e-12)


def test_foc_shares_at_unit_prices_follow_share_parameters():
    tech = CcesTechnology(np.array([3, 2, 0, 1]), np.array([0.5, 0.2, 0.4]),
                          np.array([0.3, -0.2, 0.6]), 4)
    shares = foc_shares(tech, np.ones(4))
    assert shares[1] == pytest.approx(0.4)
    assert shares[0] == pytest.approx(0.2 * 0.6)
    assert shares[2] == pytest.approx(0.5 * 0.8 * 0.6)
    assert shares[3] == pytest.approx(0.5 * 0.8 * 0.6)


def test_single_nest_shares_at_unit_prices():
    tech = CcesTechnology(np.array([1, 0]), np.array([0.35]), np.array([0.7]), 2)
    assert foc_shares(tech, np.ones(2)) == pytest.approx([0.35, 0.65])


def test_technology_from_shares_restores_reference_column():
    shares = np.array([0.1, 0.0, 0.25, 0.3, 0.35])
    factors = nest_factors([0, 1, 2], shares[None, :])
    assert factors.tolist() == [4, 3, 0, 2]
    tech = technology_from_shares(shares, factors, np.array([0.2, -0.4, 0.5]))
    assert np.abs(foc_shares(tech, np.ones(5)) - shares).max() < 1e-15
    assert not tech.active[1]


def test_two_point_recovers_two_factor_technology():
    rng = np.random.default_rng(0)
    true = CcesTechnology(np.array([1, 0]), np.array([0.6]), np.array([0.5]), 2)
    data = random_sector_data(true, rng)
    tech = estimate_two_point(data)
    assert tech.factors.tolist() == [1, 0]
    assert tech.alpha[0] == pytest.approx(0.6, abs=1e-10)
    assert tech.gamma[0] == pytest.approx(0.5, abs=1e-10)


def test_two_point_underdetermined_nest_defaults_to_cobb_douglas():
    shares = np.array([[0.3, 0.7], [0.3, 0.7]])
    prices = np.array([[1.2, 0.9], [1.2, 0.9]])
    tech = estimate_two_point(SectorData(shares, prices, np.ones(2)))
    assert tech.gamma[0] == 0.0
    assert tech.alpha[0] == pytest.approx(0.3)


def test_two_point_degenerate_nest_is_reported():
    shares = np.array([[0.3, 0.7], [0.4, 0.6]])
    prices = np.array([[1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(DegenerateNest) as info:
        estimate_two_point(SectorData(shares, prices, np.ones(2), sector='s1'))
    assert info.value.nest == 1
    assert info.value.factor == 0
    assert 's1' in str(info.value)


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_two_point_restores_both_periods(seed):
    rng = np.random.default_rng(seed)
    tech = random_technology(int(rng.integers(0, 8)), rng)
    data = random_sector_data(tech, rng)
    estimated = estimate_two_point(data)
    for t in (0, 1):
        assert np.abs(foc_shares(estimated, data.prices[t]) - data.shares[t]).max() < 1e-8


def test_zero_shares_deactivate_or_floor():
    shares = np.array([[0.0, 0.2, 0.3, 0.5], [0.0, 0.0, 0.4, 0.6]])
    prices = np.array([[1.0, 1.1, 0.9, 1.2], [1.0, 1.0, 1.0, 1.0]])
    data = SectorData(shares, prices, np.ones(2))
    factors = nest_factors(None, shares)
    assert factors.tolist() == [3, 2, 1]
    with pytest.warns(ShareFloorWarning):
        S = prepared_shares(data, factors, 1e-9)
    assert S[1, 2] == 1e-9
    with pytest.warns(ShareFloorWarning):
        tech = estimate_two_point(data)
    assert not tech.active[0]


def test_sector_estimates_restore_table(synth8):
    techs = estimate_sectors(synth8.table, synth8.order, max_workers=2)
    for j, tech in enumerate(techs):
        data = SectorData.from_table(synth8.table, j)
        for t in (0, 1):
            assert np.abs(foc_shares(tech, data.prices[t]) - data.shares[t]).max() < 1e-8
        assert tech.sector == synth8.table.sectors[j]


def test_multipoint_two_periods_matches_two_point():
    rng = np.random.default_rng(11)
    tech = random_technology(3, rng)
    data = random_sector_data(tech, rng)
    fit = estimate_multipoint(data)
    closed = estimate_two_point(data)
    assert fit.ssr < 1e-20
    assert fit.tech.alpha == pytest.approx(closed.alpha, abs=1e-8)
    assert fit.tech.gamma == pytest.approx(closed.gamma, abs=1e-8)


def _multi_period_data(tech, rng, T, noise=0.0):
    prices = np.exp(rng.normal(0.0, 0.3, size=(T, tech.n_factors)))
    shares = foc_shares(tech, prices)
    if noise:
        shares = shares * np.exp(rng.normal(0.0, noise, size=shares.shape))
        shares = shares / shares.sum(axis=1, keepdims=True)
    q = np.array([cces_unit_cost(prices[t], tech)[0] for t in range(T)])
    return SectorData(shares, prices, q)


def test_multipoint_recovers_noiseless_technology():
    rng = np.random.default_rng(5)
    tech = random_technology(2, rng)
    fit = estimate_multipoint(_multi_period_data(tech, rng, 3))
    assert fit.ssr < 1e-12
    assert fit.tech.alpha == pytest.approx(tech.alpha, abs=1e-6)
    assert fit.tech.gamma == pytest.approx(tech.gamma, abs=1e-6)


def test_joint_fit_improves_on_nestwise_with_noise():
    rng = np.random.default_rng(9)
    tech = random_technology(2, rng)
    data = _multi_period_data(tech, rng, 3, noise=0.05)
    nestwise = estimate_nestwise(data)
    S = prepared_shares(data, nestwise.factors)
    P = data.prices[:, nestwise.factors]
    logit_alpha = np.log(nestwise.alpha / (1 - nestwise.alpha))
    ssr_nestwise = float(np.sum(nested_residuals(logit_alpha, nestwise.gamma, S, P) ** 2))
    fit = estimate_multipoint(data)
    assert fit.init_ssr == pytest.approx(ssr_nestwise, rel=1e-9)
    assert fit.ssr <= ssr_nestwise + 1e-15
    assert fit.ssr < fit.init_ssr


def test_log_mean():
    assert log_mean(2.0, 2.0) == 2.0
    assert log_mean(np.e, 1.0) == pytest.approx(np.e - 1.0)
    assert log_mean(0.3, 0.3 + 1e-13) == pytest.approx(0.3, rel=1e-12)


def test_sato_vartia_logarithmic_mean_limit():
    data = SectorData(np.array([[0.5, 0.5], [0.5, 0.5]]),
                      np.array([[1.0, 1.0], [2.0, 1.0]]), np.ones(2))
    assert sato_vartia_index(data)[-1] == pytest.approx(0.5 * np.log(2.0), rel=1e-14)


def test_sato_vartia_flat_prices():
    rng = np.random.default_rng(2)
    tech = random_technology(3, rng)
    data = random_sector_data(tech, rng)
    flat = SectorData(data.shares, np.vstack([data.prices[0], data.prices[0]]), data.q)
    assert np.abs(sato_vartia_index(flat)).max() < 1e-15


@settings(max_examples=1000, deadline=None)
@given(seed=seeds)
def test_sato_vartia_is_exact_for_estimated_aggregator(seed):
    rng = np.random.default_rng(seed)
    tech = random_technology(int(rng.integers(0, 11)), rng)
    data = random_sector_data(tech, rng)
    estimated = estimate_two_point(data)
    cost0, _ = cces_unit_cost(data.prices[0], estimated)
    cost1, _ = cces_unit_cost(data.prices[1], estimated)
    assert sato_vartia_index(data)[-1] == pytest.approx(np.log(cost1 / cost0), abs=1e-10)


def test_tfpg_when_output_price_halves():
    data = SectorData(np.array([[0.4, 0.6], [0.4, 0.6]]), np.ones((2, 2)), np.array([1.0, 0.5]))
    assert tfpg_cces(data) == pytest.approx(np.log(2.0))
    assert tfpg_translog(data) == pytest.approx(np.log(2.0))


def test_tfpg_zero_when_output_tracks_index():
    rng = np.random.default_rng(4)
    tech = random_technology(2, rng)
    data = random_sector_data(tech, rng)
    assert tfpg_cces(data) == pytest.approx(0.0, abs=1e-10)


def test_translog_single_price_change():
    data = SectorData(np.array([[0.3, 0.7], [0.3, 0.7]]),
                      np.array([[1.0, 1.0], [np.exp(0.1), 1.0]]), np.array([1.0, 1.02]))
    assert tfpg_translog(data) == pytest.approx(0.3 * 0.1 - np.log(1.02), rel=1e-12)


@pytest.mark.parametrize('seed', range(5))
def test_tfpg_recovers_imposed_productivity_growth(seed):
    rng = np.random.default_rng(seed)
    tech = random_technology(4, rng)
    data = random_sector_data(tech, rng, tau=(1.0, 1.05))
    assert tfpg_cces(data) == pytest.approx(np.log(1.05), abs=1e-10)


@pytest.mark.parametrize('seed', range(5))
def test_translog_close_to_cces_for_small_changes(seed):
    rng = np.random.default_rng(seed)
    tech = random_technology(4, rng)
    data = random_sector_data(tech, rng, spread=0.015, tau=(1.0, 1.01))
    assert abs(tfpg_translog(data) - tfpg_cces(data)) < 1e-3


def test_tfpg_table_methods(synth8):
    frame = tfpg_table(synth8.table, synth8.order, 'cces')
    assert list(frame.columns) == ['sector_id', 'method', 'tfpg']
    expected = np.log(synth8.tau[1] / synth8.tau[0])
    assert frame['tfpg'].to_numpy() == pytest.approx(expected, abs=1e-9)
    assert (tfpg_table(synth8.table, synth8.order, 'translog')['method'] == 'translog').all()
    with pytest.raises(ValueError):
        tfpg_table(synth8.table, synth8.order, 'fisher')


def test_technology_frame_round_trip(synth8):
    sectors = synth8.table.sectors
    frame = technologies_to_frame(synth8.techs, sectors)
    assert list(frame.columns) == ['sector_id', 'nest_index', 'factor_id', 'alpha', 'gamma',
                                   'active']
    restored = technologies_from_frame(frame, sectors)
    for original, again in zip(synth8.techs, restored):
        assert np.array_equal(original.factors, again.factors)
        assert np.array_equal(original.alpha, again.alpha)
        assert np.array_equal(original.gamma, again.gamma)
