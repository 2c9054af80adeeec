import numpy as np
import pytest

from dbforecast.core import (
    DimensionMismatch,
    LengthMismatch,
    LossKind,
    NonFiniteData,
    RegressionDataset,
    SeriesTooShort,
    TimeSeries,
    WeightVector,
    embed_lags,
    weighted_empirical_loss,
)


def test_series_rejects_nan_and_empty():
    with pytest.raises(NonFiniteData):
        TimeSeries(values=np.array([1.0, np.nan]))
    with pytest.raises(NonFiniteData):
        TimeSeries(values=np.array([np.inf]))
    with pytest.raises(SeriesTooShort):
        TimeSeries(values=np.array([]))
    with pytest.raises(DimensionMismatch):
        TimeSeries(values=np.zeros((2, 2)))


def test_series_is_immutable():
    ts = TimeSeries(values=np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        ts.values[0] = 5.0


def test_embed_lags_small_example():
    ts = TimeSeries(values=np.array([1.0, 2.0, 3.0, 4.0, 5.0]))
    ds = embed_lags(ts, 3)
    assert ds.features.tolist() == [[1.0, 2.0, 3.0], [2.0, 3.0, 4.0]]
    assert ds.targets.tolist() == [4.0, 5.0]
    assert ds.lag == 3


def test_embed_lags_too_short():
    with pytest.raises(SeriesTooShort):
        embed_lags(TimeSeries(values=np.array([7.0])), 1)
    with pytest.raises(ValueError):
        embed_lags(TimeSeries(values=np.array([7.0, 8.0])), 0)


def test_embed_lags_index_arithmetic():
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(3000)
    ds = embed_lags(TimeSeries(values=vals), 3)
    assert len(ds) == 2997
    # row 0 covers y_1..y_3 (1-based) and targets y_4
    assert np.array_equal(ds.features[0], vals[0:3])
    assert ds.targets[0] == vals[3]
    t = 1234
    assert np.array_equal(ds.features[t], vals[t : t + 3])
    assert ds.targets[t] == vals[t + 3]


def test_embed_roundtrip_reconstructs_series():
    rng = np.random.default_rng(1)
    vals = rng.standard_normal(50)
    ds = embed_lags(TimeSeries(values=vals), 4)
    rebuilt = np.concatenate([vals[:4], ds.targets])
    assert np.array_equal(rebuilt, vals)


def test_weight_vector_simplex_validation():
    WeightVector(weights=np.array([0.5, 0.5]), simplex=True)
    with pytest.raises(ValueError):
        WeightVector(weights=np.array([0.6, 0.6]), simplex=True)
    with pytest.raises(ValueError):
        WeightVector(weights=np.array([-0.1, 1.1]), simplex=True)
    # non-simplex vectors may be anything finite
    WeightVector(weights=np.array([-3.0, 10.0]))


def test_loss_kind_validation():
    with pytest.raises(ValueError):
        LossKind(kind="absolute")
    with pytest.raises(ValueError):
        LossKind(bound=-1.0)
    loss = LossKind(bound=2.5)
    assert loss.evaluate(np.array([1.0]), np.array([3.0]))[0] == 4.0


def _toy_dataset(n=5, m=2, seed=0):
    rng = np.random.default_rng(seed)
    return RegressionDataset(
        features=rng.standard_normal((n, m)), targets=rng.standard_normal(n), lag=m
    )


def test_weighted_loss_zero_residuals():
    ds = _toy_dataset()
    q = WeightVector(weights=np.full(5, 0.2), simplex=True)
    assert weighted_empirical_loss(ds, ds.targets, q) == 0.0


def test_weighted_loss_single_term():
    ds = _toy_dataset()
    preds = ds.targets.copy()
    preds[2] += 0.5
    q = WeightVector(weights=np.eye(5)[2], simplex=True)
    assert weighted_empirical_loss(ds, preds, q) == pytest.approx(0.25, abs=1e-15)


def test_weighted_loss_uniform_is_mean_square():
    rng = np.random.default_rng(3)
    ds = _toy_dataset(seed=3)
    preds = ds.targets + rng.standard_normal(5)
    q = WeightVector(weights=np.full(5, 0.2), simplex=True)
    expected = float(np.mean((preds - ds.targets) ** 2))
    assert weighted_empirical_loss(ds, preds, q) == pytest.approx(expected, rel=1e-12)


def test_weighted_loss_length_checks():
    ds = _toy_dataset()
    q = WeightVector(weights=np.full(5, 0.2))
    with pytest.raises(LengthMismatch):
        weighted_empirical_loss(ds, np.zeros(4), q)
    with pytest.raises(LengthMismatch):
        weighted_empirical_loss(ds, np.zeros(5), WeightVector(weights=np.zeros(4)))


def test_weighted_loss_linear_in_q():
    rng = np.random.default_rng(4)
    ds = _toy_dataset(n=8, seed=4)
    preds = rng.standard_normal(8)
    for _ in range(20):
        q1 = rng.random(8)
        q2 = rng.random(8)
        a, b = rng.random(2)
        left = weighted_empirical_loss(ds, preds, WeightVector(weights=a * q1 + b * q2))
        right = a * weighted_empirical_loss(
            ds, preds, WeightVector(weights=q1)
        ) + b * weighted_empirical_loss(ds, preds, WeightVector(weights=q2))
        assert left == pytest.approx(right, rel=1e-12, abs=1e-12)
