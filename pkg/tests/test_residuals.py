import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.core.errors import DimensionMismatchError, InvalidInputError, MissingReconstructionError
from src.core.manifold import ManifoldModel, sample_real
from src.core.reconstruction import BiasKind, PerturbationModel, ReconstructionTrace, reconstruct_analytic, reconstruct_chain
from src.core.residuals import (
    Branch,
    feature_layout,
    first_order,
    residual_set,
    second_order,
    summarize,
    summarize_many,
    third_order,
)


def linear_quantile(values, q):
    ordered = np.sort(values)
    pos = (ordered.size - 1) * q
    lo = int(np.floor(pos))
    hi = min(lo + 1, ordered.size - 1)
    return ordered[lo] + (pos - lo) * (ordered[hi] - ordered[lo])


def test_first_order_is_absolute_difference():
    assert_allclose(first_order(np.array([1.0, -2.0]), np.array([0.5, 1.0])), [0.5, 3.0])


def test_first_order_shapes_must_match():
    with pytest.raises(DimensionMismatchError):
        first_order(np.zeros(3), np.zeros(4))


def test_worked_example_real_point():
    trace = ReconstructionTrace(np.array([0.0, 0.3]), np.array([0.8, 0.0]), np.array([1.6, 0.0]))
    assert_allclose(first_order(trace.x, trace.x1), [0.8, 0.3])
    assert_allclose(second_order(trace), [0.0, 0.3], atol=1e-15)


def test_worked_example_fake_point():
    trace = ReconstructionTrace(np.array([0.5, 0.0]), np.array([1.3, 0.0]), np.array([2.1, 0.0]))
    assert_allclose(second_order(trace), [0.0, 0.0], atol=1e-15)


def test_second_order_bounded_by_first_order(rng):
    model = ManifoldModel.random(16, 8, rng)
    pert = PerturbationModel(kind=BiasKind.SINUSOIDAL, fresh_noise_scale=0.05)

    def op(x, r):
        return reconstruct_analytic(model, pert, x, r)

    for _ in range(200):
        x = sample_real(model, rng.uniform(0, 2), rng, randomize_direction=True).point
        trace = reconstruct_chain(op, x, rng, order=3)
        assert np.all(second_order(trace) <= first_order(trace.x, trace.x1) + 1e-15)
        assert np.all(third_order(trace) >= 0)


def test_third_order_needs_third_point():
    trace = ReconstructionTrace(np.zeros(2), np.zeros(2), np.zeros(2))
    with pytest.raises(MissingReconstructionError):
        third_order(trace)
    residuals = residual_set(trace)
    assert residuals.delta3 is None
    with pytest.raises(MissingReconstructionError):
        residuals.branch(Branch.DELTA3)


def test_residual_set_on_batched_trace():
    x = np.array([[0.0, 0.3], [0.5, 0.0]])
    x1 = np.array([[0.8, 0.0], [1.3, 0.0]])
    x2 = np.array([[1.6, 0.0], [2.1, 0.0]])
    residuals = residual_set(ReconstructionTrace(x, x1, x2, seed_id=4))
    assert residuals.trace_id == 4
    assert residuals.delta1.shape == (2, 2)
    assert_allclose(residuals.branch(Branch.DELTA2), [[0.0, 0.3], [0.0, 0.0]], atol=1e-15)


def test_layouts():
    assert feature_layout(Branch.DELTA1) == ("bias", "mean", "std", "l1_dev", "max", "q50", "q90", "q99")
    assert feature_layout(Branch.DELTA2)[-1] == "signed_mean"
    assert len(feature_layout(Branch.DELTA3)) == 8


def test_all_zero_residual_features():
    phi = summarize(np.zeros(16), Branch.DELTA1)
    assert len(phi) == 8
    assert_allclose(phi.values, [1.0] + [0.0] * 7)


def test_worked_example_features():
    phi = summarize(np.array([0.0, 0.3]), Branch.DELTA2)
    assert phi.layout == feature_layout(Branch.DELTA2)
    assert_allclose(phi.values, [1.0, 0.15, 0.15, 0.15, 0.3, 0.15, 0.27, 0.297, 0.15])


def test_statistics_use_magnitudes_and_signed_mean_keeps_sign():
    phi = summarize(np.array([-0.4, 0.2]), Branch.DELTA2)
    values = dict(zip(phi.layout, phi.values))
    assert values["mean"] == pytest.approx(0.3)
    assert values["max"] == pytest.approx(0.4)
    assert values["signed_mean"] == pytest.approx(-0.1)


def test_dispersion_slots_are_not_the_mean():
    flat = dict(zip(feature_layout(Branch.DELTA1), summarize(np.ones(4), Branch.DELTA1).values))
    assert flat["mean"] == 1.0 and flat["l1_dev"] == 0.0 and flat["std"] == 0.0
    spike = dict(zip(feature_layout(Branch.DELTA1), summarize(np.array([0.0, 0.0, 0.0, 4.0]), Branch.DELTA1).values))
    assert spike["mean"] == pytest.approx(1.0)
    assert spike["l1_dev"] == pytest.approx(1.5)


def test_quantiles_match_order_statistics(rng):
    residuals = rng.standard_normal((25, 37))
    features = summarize_many(residuals, Branch.DELTA1)
    layout = feature_layout(Branch.DELTA1)
    for row, phi in zip(residuals, features):
        for q in (0.5, 0.9, 0.99):
            slot = layout.index(f"q{round(q * 100)}")
            assert phi[slot] == pytest.approx(linear_quantile(np.abs(row), q), abs=1e-12)


def test_batched_features_match_single_rows(rng):
    residuals = rng.standard_normal((5, 16))
    batch = summarize_many(residuals, Branch.DELTA2)
    for row, phi in zip(residuals, batch):
        assert_allclose(summarize(row, Branch.DELTA2).values, phi)


def test_empty_residual_rejected():
    with pytest.raises(InvalidInputError):
        summarize(np.array([]), Branch.DELTA1)
    with pytest.raises(InvalidInputError):
        summarize_many(np.array([[np.nan, 1.0]]), Branch.DELTA1)
