import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from errors import DroppedItemWarning, EstimationError
from household.demand import HouseholdModel, expenditure_shares, price_index
from household.lambda_iv import estimate_lambda, first_difference_data

HALF = np.array([0.5, 0.5])


def test_price_index_at_unit_prices():
    model = HouseholdModel(np.array([0.2, 0.3, 0.5]), lam=0.7)
    assert price_index(np.ones(3), model) == pytest.approx(1.0, abs=1e-15)


def test_price_index_by_hand():
    assert price_index([2.0, 4.0], HouseholdModel(HALF, lam=1.0)) == pytest.approx(3.0)
    assert price_index([4.0, 1.0], HouseholdModel(HALF, lam=0.0)) == pytest.approx(2.0)
    assert price_index([1.0, 4.0], HouseholdModel(HALF, lam=-1.0)) == pytest.approx(1.6)


@pytest.mark.parametrize('lam', [-2.0, 0.0, 0.5, 1.5])
def test_price_index_homogeneous(lam):
    model = HouseholdModel(np.array([0.1, 0.6, 0.3]), lam)
    p = np.array([0.8, 1.3, 2.0])
    assert price_index(3.0 * p, model) == pytest.approx(3.0 * price_index(p, model), rel=1e-13)


def test_price_index_increasing():
    model = HouseholdModel(np.array([0.1, 0.6, 0.3]), 0.4)
    p = np.array([0.8, 1.3, 2.0])
    for i in range(3):
        bumped = p.copy()
        bumped[i] *= 1.01
        assert price_index(bumped, model) > price_index(p, model)


def test_price_index_rows():
    model = HouseholdModel(HALF, lam=1.0)
    values = price_index(np.array([[2.0, 4.0], [1.0, 1.0]]), model)
    assert values == pytest.approx([3.0, 1.0])


def test_invalid_model():
    with pytest.raises(ValueError):
        HouseholdModel(np.array([0.5, 0.6]), 1.0)
    with pytest.raises(ValueError):
        HouseholdModel(np.array([1.2, -0.2]), 1.0)
    with pytest.raises(ValueError):
        price_index([1.0, -1.0], HouseholdModel(HALF, 1.0))


def test_from_shares_normalizes():
    model = HouseholdModel.from_shares([2.0, 6.0], lam=0.5)
    assert model.mu.tolist() == [0.25, 0.75]


def test_shares_at_unit_prices_are_mu():
    mu = np.array([0.2, 0.3, 0.5])
    assert expenditure_shares(np.ones(3), HouseholdModel(mu, 1.7)) == pytest.approx(mu)
    assert np.array_equal(expenditure_shares([3.0, 0.1, 9.0], HouseholdModel(mu, 0.0)), mu)


def test_shares_follow_roys_identity():
    model = HouseholdModel(np.array([0.1, 0.6, 0.3]), -0.8)
    p = np.array([0.8, 1.3, 2.0])
    step = 1e-6
    numeric = []
    for i in range(3):
        up, down = p.copy(), p.copy()
        up[i] *= np.exp(step)
        down[i] *= np.exp(-step)
        numeric.append((model.log_price_index(up) - model.log_price_index(down)) / (2 * step))
    assert expenditure_shares(p, model) == pytest.approx(numeric, abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(-3.0, 3.0))
def test_shares_sum_to_one(seed, lam):
    rng = np.random.default_rng(seed)
    mu = rng.dirichlet(np.ones(5))
    p = np.exp(rng.normal(0.0, 1.0, 5))
    b = expenditure_shares(p, HouseholdModel(mu, lam))
    assert b.sum() == pytest.approx(1.0, abs=1e-12)
    assert (b >= 0).all()


def exact_data(lam, I=300, seed=0):
    """Dados gerados exatamente por Δln b = c + λ Δln p com Δln p dirigido pelo instrumento"""
    rng = np.random.default_rng(seed)
    z = rng.normal(0.0, 0.3, I)
    dlnp = -z + rng.normal(0.0, 0.05, I)
    b1 = rng.dirichlet(np.ones(I))
    b0 = b1 * np.exp(-(0.02 + lam * dlnp))
    return b0, b1, np.exp(-dlnp), np.ones(I), z


@pytest.mark.parametrize('lam', [0.5, 1.1, 2.0])
def test_lambda_recovered_without_noise(lam):
    estimate = estimate_lambda(*exact_data(lam))
    assert estimate.lambda_hat == pytest.approx(lam, abs=1e-6)
    assert estimate.intercept == pytest.approx(0.02, abs=1e-6)
    assert estimate.n_items == 300
    assert estimate.dropped == 0


def noisy_data(I=200, seed=1):
    rng = np.random.default_rng(seed)
    b0, b1, p0, p1, z = exact_data(0.8, I, seed)
    return b0 * np.exp(rng.normal(0.0, 0.05, I)), b1, p0, p1, z


def test_exactly_identified_matches_weighted_ols():
    b0, b1, p0, p1, _ = noisy_data()
    dlnp = np.log(p1) - np.log(p0)
    estimate = estimate_lambda(b0, b1, p0, p1, dlnp[:, None])
    assert estimate.lambda_hat == pytest.approx(estimate.ols_lambda, abs=1e-10)


def test_diagnostics_are_reported():
    estimate = estimate_lambda(*noisy_data())
    diag = estimate.diagnostics
    assert set(diag) == {'first_stage_f', 'sargan', 'basmann', 'durbin', 'wu_hausman'}
    for item in diag.values():
        assert np.isfinite(item.stat) and 0.0 <= item.pval <= 1.0
    assert diag['first_stage_f'].df == (2, 197)
    assert diag['first_stage_f'].stat > 10
    payload = estimate.to_dict()
    assert payload['diagnostics']['first_stage_f']['df'] == [2, 197]
    assert estimate.lambda_hat == pytest.approx(0.8, abs=0.1)


def test_zero_share_items_are_dropped():
    b0, b1, p0, p1, z = noisy_data()
    b0[5] = 0.0
    with pytest.warns(DroppedItemWarning):
        estimate = estimate_lambda(b0, b1, p0, p1, z)
    assert estimate.dropped == 1
    assert estimate.n_items == 199


def test_regression_data_weights():
    data = first_difference_data([0.5, 0.25, 0.25], [0.25, 0.25, 0.5], [1.0, 1.0, 1.0],
                                 [2.0, 1.0, 0.5], [0.1, 0.2, 0.3], items=['a', 'b', 'c'])
    assert data.weights == pytest.approx([1 / 20, 1 / 32, 1 / 20])
    assert data.dlnb == pytest.approx([np.log(0.5), 0.0, np.log(2.0)])
    assert data.instruments.shape == (3, 2)
    assert data.items.tolist() == ['a', 'b', 'c']


def test_constant_price_changes_rejected():
    b0, b1, _, _, z = noisy_data(I=10)
    with pytest.raises(EstimationError):
        estimate_lambda(b0, b1, np.ones(10), np.full(10, 1.1), z)


def test_too_few_items_rejected():
    with pytest.raises(EstimationError):
        estimate_lambda([0.5, 0.5], [0.4, 0.6], [1.0, 1.0], [1.1, 0.9], [0.1, -0.1])
    with pytest.warns(DroppedItemWarning), pytest.raises(EstimationError):
        estimate_lambda([0.5, 0.5, 0.0], [0.4, 0.3, 0.3], [1.0, 1.0, 1.0],
                        [1.1, 0.9, 1.0], [0.1, -0.1, 0.0])


def test_mismatched_lengths_rejected():
    with pytest.raises(EstimationError):
        estimate_lambda([0.5, 0.5, 0.1], [0.4, 0.6], [1.0, 1.0], [1.1, 0.9], [0.1, -0.1])
