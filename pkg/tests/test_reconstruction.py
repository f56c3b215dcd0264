import time

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.core.errors import DimensionMismatchError, InvalidInputError, MissingReconstructionError
from src.core.manifold import ManifoldModel, distance_to_manifold, project, sample_fake, sample_real
from src.core.reconstruction import (
    BiasKind,
    PerturbationModel,
    ReconstructionTrace,
    extend,
    reconstruct_analytic,
    reconstruct_chain,
    reconstruct_twice,
)
from src.core.residuals import second_order, third_order


def analytic(model, pert):
    def op(x, rng):
        return reconstruct_analytic(model, pert, x, rng)
    return op


def test_pure_projection_is_identity_on_manifold(axis16, rng):
    x = sample_fake(axis16, rng).point
    assert_array_equal(reconstruct_analytic(axis16, PerturbationModel(beta=0.0), x), x)


def test_worked_example_real_point(line2d, shift08):
    assert_allclose(reconstruct_analytic(line2d, shift08, np.array([0.0, 0.3])), [0.8, 0.0])


def test_bias_reapplies_on_each_call(line2d, shift08):
    trace = reconstruct_twice(analytic(line2d, shift08), np.array([0.5, 0.0]), np.random.default_rng(0))
    assert_allclose(trace.x1, [1.3, 0.0])
    assert_allclose(trace.x2, [2.1, 0.0])


def test_fixed_point_without_bias(axis16, rng):
    x = sample_fake(axis16, rng).point
    trace = reconstruct_twice(analytic(axis16, PerturbationModel(beta=0.0)), x, rng)
    assert_array_equal(trace.x1, x)
    assert_array_equal(trace.x2, x)


@pytest.mark.parametrize("kind", [BiasKind.CONSTANT, BiasKind.SINUSOIDAL])
def test_bias_stays_in_tangent_space(rng, kind):
    model = ManifoldModel.random(16, 8, rng)
    pert = PerturbationModel(kind=kind, beta=1.3)
    for _ in range(20):
        p = project(model, 2.0 * rng.standard_normal(16))
        f = pert.bias(model, p)
        assert np.linalg.norm(f - model.chart_basis @ (model.chart_basis.T @ f)) < 1e-12


def test_output_lies_on_manifold_without_leak(rng):
    model = ManifoldModel.random(16, 8, rng)
    pert = PerturbationModel(kind=BiasKind.SINUSOIDAL, fresh_noise_scale=0.1)
    for _ in range(20):
        out = reconstruct_analytic(model, pert, 2.0 * rng.standard_normal(16), rng)
        assert distance_to_manifold(model, out) < 1e-12


def test_normal_leak_leaves_manifold(axis16, rng):
    pert = PerturbationModel(normal_leak=0.2)
    out = reconstruct_analytic(axis16, pert, sample_fake(axis16, rng).point, rng)
    assert distance_to_manifold(axis16, out) > 0


def test_equal_projections_reconstruct_identically(axis16, rng):
    pert = PerturbationModel(kind=BiasKind.SINUSOIDAL)
    base = sample_fake(axis16, rng).point
    a = base + 0.4 * axis16.normal_basis[:, 2]
    b = base - 1.7 * axis16.normal_basis[:, 5]
    assert_array_equal(reconstruct_analytic(axis16, pert, a), reconstruct_analytic(axis16, pert, b))


def test_fresh_noise_energy(axis16):
    tau = 0.3
    pert = PerturbationModel(beta=0.5, fresh_noise_scale=tau)
    rng = np.random.default_rng(42)
    x = sample_real(axis16, 0.4, rng).point
    p = project(axis16, x)
    target = p + pert.bias(axis16, p)
    energies = np.array([np.sum((reconstruct_analytic(axis16, pert, x, rng) - target) ** 2) for _ in range(10_000)])
    expected = axis16.chart_dim * tau**2
    assert abs(energies.mean() - expected) < 3 * energies.std() / np.sqrt(energies.size)


def test_offmanifold_noise_gain_scales_tangent_noise(axis16):
    pert = PerturbationModel(beta=0.0, fresh_noise_scale=0.1, offmanifold_noise_gain=2.0)
    assert pert.noise_scale(0.0) == pytest.approx(0.1)
    assert pert.noise_scale(1.5) == pytest.approx(0.4)
    rng = np.random.default_rng(5)
    x = sample_real(axis16, 1.5, rng).point
    spread = np.std([reconstruct_analytic(axis16, pert, x, rng)[0] for _ in range(4000)])
    assert spread == pytest.approx(0.4, rel=0.1)


def test_stochastic_perturbation_needs_rng(axis16):
    with pytest.raises(InvalidInputError):
        reconstruct_analytic(axis16, PerturbationModel(fresh_noise_scale=0.1), np.zeros(16))


def test_dimension_mismatch(axis16):
    with pytest.raises(DimensionMismatchError):
        reconstruct_analytic(axis16, PerturbationModel(), np.zeros(5))


def test_invalid_perturbation_parameters():
    with pytest.raises(InvalidInputError):
        PerturbationModel(fresh_noise_scale=-1.0)
    with pytest.raises(InvalidInputError):
        PerturbationModel(amplitude_swing=1.0)


def test_trace_is_reproducible(axis16):
    op = analytic(axis16, PerturbationModel(kind=BiasKind.SINUSOIDAL, fresh_noise_scale=0.05))
    x = sample_real(axis16, 0.2, np.random.default_rng(1)).point
    a = reconstruct_twice(op, x, np.random.default_rng(77))
    b = reconstruct_twice(op, x, np.random.default_rng(77))
    for u, v in ((a.x1, b.x1), (a.x2, b.x2)):
        assert_array_equal(u, v)


def test_fresh_noise_independent_between_calls(axis16):
    op = analytic(axis16, PerturbationModel(beta=0.0, fresh_noise_scale=0.1))
    trace = reconstruct_twice(op, np.zeros(16), np.random.default_rng(3))
    assert not np.allclose(trace.x1, trace.x2)


def test_third_reconstruction(line2d, shift08):
    op = analytic(line2d, shift08)
    trace = reconstruct_chain(op, np.array([0.5, 0.0]), np.random.default_rng(0), order=3)
    assert trace.order == 3
    assert_allclose(trace.x3, [2.9, 0.0])
    assert_allclose(third_order(trace), [0.0, 0.0], atol=1e-15)


def test_extend_adds_third_point(line2d, shift08):
    op = analytic(line2d, shift08)
    trace = reconstruct_twice(op, np.array([0.5, 0.0]), np.random.default_rng(0))
    with pytest.raises(MissingReconstructionError):
        third_order(trace)
    longer = extend(trace, op, np.random.default_rng(0))
    assert longer.order == 3
    assert extend(longer, op, np.random.default_rng(0)) is longer


def test_trace_dimensions_must_agree():
    with pytest.raises(DimensionMismatchError):
        ReconstructionTrace(np.zeros(3), np.zeros(3), np.zeros(4))


def test_chain_order_bounds(line2d, shift08):
    with pytest.raises(InvalidInputError):
        reconstruct_chain(analytic(line2d, shift08), np.zeros(2), np.random.default_rng(0), order=4)


def test_generated_samples_cancel_exactly(axis16):
    """1 000 fakes, constant tangent bias, no fresh noise: Δ² vanishes."""
    start = time.perf_counter()
    op = analytic(axis16, PerturbationModel(beta=1.0))
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(1000):
        trace = reconstruct_twice(op, sample_fake(axis16, rng, seed_id=i).point, rng)
        worst = max(worst, float(np.max(np.abs(second_order(trace)))))
    assert worst <= 1e-15
    assert time.perf_counter() - start < 1.0


def test_weak_signal_recovered_coordinatewise():
    """Where the bias dominates the signal on a coordinate, |Δ²_i| equals the off-manifold offset there."""
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    # A tilted chart so bias and offset share coordinates.
    model = ManifoldModel.random(16, 8, rng)
    pert = PerturbationModel(beta=1.0)
    op = analytic(model, pert)
    checked = 0
    for _ in range(1000):
        x = sample_real(model, rng.uniform(0.01, 0.2), rng, randomize_direction=True).point
        trace = reconstruct_twice(op, x, rng)
        p = project(model, x)
        offset = x - p
        dominated = np.abs(trace.x1 - p) > np.abs(offset)
        assert_allclose(np.abs(second_order(trace))[dominated], np.abs(offset)[dominated], rtol=0, atol=1e-12)
        checked += int(dominated.sum())
    assert checked >= 8000
    assert time.perf_counter() - start < 1.0
