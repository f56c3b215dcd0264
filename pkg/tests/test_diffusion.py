from functools import partial

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.core.errors import DimensionMismatchError, InvalidInputError, ScheduleError
from src.core.harness.dataset import mixture_means
from src.core.manifold import ManifoldKind, ManifoldModel, distance_to_manifold, sample_fake
from src.core.reconstruction.diffusion import (
    DiffusionSchedule,
    Direction,
    GmmScoreModel,
    ddim_invert,
    ddim_sample,
    ddim_step,
    exact_eps,
    reconstruct_ddim,
    reverse_multiplier,
)


@pytest.fixture
def tight_mixture():
    return ManifoldModel.axis(
        16, 8,
        kind=ManifoldKind.GAUSSIAN_MIXTURE_SUPPORT,
        mixture_means=mixture_means(8, 4, 3.0),
        mixture_sigma=0.05,
    )


def round_trip_error(gmm, sched, x):
    return np.linalg.norm(reconstruct_ddim(gmm, sched, x) - x) / np.linalg.norm(x)


def test_linear_schedule_shape():
    sched = DiffusionSchedule.linear(20)
    assert sched.steps == 20
    assert sched.alpha_bar(0) == 1.0
    assert sched.alpha_bar(1) == pytest.approx(1 - 1e-4)
    assert np.all(np.diff(sched.alpha_bars) < 0)
    assert np.all((sched.alphas > 0) & (sched.alphas < 1))


def test_schedule_validation():
    with pytest.raises(ScheduleError):
        DiffusionSchedule(np.array([0.9, 0.5]))
    with pytest.raises(ScheduleError):
        DiffusionSchedule(np.array([1.0, 0.5, 0.6]))
    with pytest.raises(ScheduleError):
        DiffusionSchedule(np.array([1.0, 0.5, 0.5]))
    with pytest.raises(ScheduleError):
        DiffusionSchedule(np.array([1.0, 0.5]), eta=0.5)
    with pytest.raises(ScheduleError):
        DiffusionSchedule.linear(1001)


def test_timestep_range():
    sched = DiffusionSchedule.linear(5)
    gmm = GmmScoreModel.standard_normal(3)
    for t in (0, 6):
        with pytest.raises(ScheduleError):
            exact_eps(gmm, sched, np.ones(3), t)


def test_standard_normal_eps_is_scaled_input(rng):
    sched = DiffusionSchedule.linear(20)
    gmm = GmmScoreModel.standard_normal(5)
    for t in (1, 7, 20):
        x = rng.standard_normal(5)
        assert_allclose(exact_eps(gmm, sched, x, t), np.sqrt(1 - sched.alpha_bar(t)) * x, atol=1e-14)


def test_symmetric_pair_has_zero_eps_at_origin():
    mu = np.array([1.5, -0.5, 2.0])
    gmm = GmmScoreModel(np.array([0.5, 0.5]), np.stack([mu, -mu]), 0.3)
    sched = DiffusionSchedule.linear(10)
    for t in range(1, 11):
        assert_allclose(exact_eps(gmm, sched, np.zeros(3), t), 0.0, atol=1e-15)


def test_eps_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        exact_eps(GmmScoreModel.standard_normal(3), DiffusionSchedule.linear(4), np.zeros(2), 1)


def test_mixture_validation():
    with pytest.raises(InvalidInputError):
        GmmScoreModel(np.array([0.7, 0.7]), np.zeros((2, 3)))
    with pytest.raises(InvalidInputError):
        GmmScoreModel(np.ones(1), np.zeros((1, 3)), sigma0=0.0)


def test_reverse_step_matches_scalar_map(rng):
    sched = DiffusionSchedule.linear(20)
    gmm = GmmScoreModel.standard_normal(4)
    eps = partial(exact_eps, gmm, sched)
    for t in range(1, 21):
        x = rng.standard_normal(4)
        assert_allclose(ddim_step(sched, eps, x, t), reverse_multiplier(sched, t) * x, rtol=1e-12)


def test_full_reverse_pass_matches_multiplier_product(rng):
    sched = DiffusionSchedule.linear(20)
    gmm = GmmScoreModel.standard_normal(6)
    latent = rng.standard_normal(6)
    product = np.prod([reverse_multiplier(sched, t) for t in range(1, 21)])
    assert np.max(np.abs(ddim_sample(sched, partial(exact_eps, gmm, sched), latent) - product * latent)) < 1e-10


def test_degenerate_step_is_identity(rng):
    sched = DiffusionSchedule(np.array([1.0, 0.5, 0.5]), strict=False)
    gmm = GmmScoreModel.standard_normal(3)
    x = rng.standard_normal(3)
    assert reverse_multiplier(sched, 2) == pytest.approx(1.0)
    assert_allclose(ddim_step(sched, partial(exact_eps, gmm, sched), x, 2), x, rtol=1e-12)


def test_single_step_inversion_error_shrinks_with_step_size(rng):
    gmm = GmmScoreModel.standard_normal(4)
    x = rng.standard_normal(4)
    errors = []
    for ab in (0.5, 0.8, 0.89):
        sched = DiffusionSchedule(np.array([1.0, 0.9, ab]))
        eps = partial(exact_eps, gmm, sched)
        back = ddim_step(sched, eps, ddim_step(sched, eps, x, 2, Direction.INVERT), 2, Direction.REVERSE)
        errors.append(np.linalg.norm(back - x) / np.linalg.norm(x))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-3


def test_reconstruction_is_bitwise_deterministic(tight_mixture, rng):
    gmm = GmmScoreModel.from_manifold(tight_mixture)
    sched = DiffusionSchedule.linear(20)
    x = sample_fake(tight_mixture, rng).point
    assert_array_equal(reconstruct_ddim(gmm, sched, x), reconstruct_ddim(gmm, sched, x))


def test_round_trip_at_mixture_mean(tight_mixture):
    gmm = GmmScoreModel.from_manifold(tight_mixture)
    sched = DiffusionSchedule.linear(20)
    for mean in gmm.means:
        assert round_trip_error(gmm, sched, mean) < 0.05


def test_round_trip_improves_with_more_steps(tight_mixture):
    gmm = GmmScoreModel.from_manifold(tight_mixture)
    rng = np.random.default_rng(11)
    points = list(gmm.means) + [sample_fake(tight_mixture, rng).point for _ in range(8)]
    mean_error = {
        steps: np.mean([round_trip_error(gmm, DiffusionSchedule.linear(steps), x) for x in points])
        for steps in (10, 20, 50, 200)
    }
    assert mean_error[20] < 0.05
    errors = [mean_error[steps] for steps in (10, 20, 50, 200)]
    assert all(b <= a for a, b in zip(errors, errors[1:]))
    assert mean_error[200] < mean_error[10]


def test_off_manifold_points_move_closer(tight_mixture):
    gmm = GmmScoreModel.from_manifold(tight_mixture)
    sched = DiffusionSchedule.linear(20)
    rng = np.random.default_rng(5)
    for _ in range(1000):
        base = sample_fake(tight_mixture, rng).point
        coeffs = rng.standard_normal(8)
        x = base + tight_mixture.normal_basis @ (2.0 * coeffs / np.linalg.norm(coeffs))
        assert distance_to_manifold(tight_mixture, reconstruct_ddim(gmm, sched, x)) < distance_to_manifold(tight_mixture, x)


def test_invert_then_sample_uses_all_steps():
    sched = DiffusionSchedule.linear(4)
    gmm = GmmScoreModel.standard_normal(2)
    eps = partial(exact_eps, gmm, sched)
    latent = ddim_invert(sched, eps, np.ones(2))
    assert not np.allclose(latent, np.ones(2))
    assert_allclose(ddim_sample(sched, eps, latent), reconstruct_ddim(gmm, sched, np.ones(2)))


def test_from_manifold_needs_mixture(axis16):
    with pytest.raises(InvalidInputError):
        GmmScoreModel.from_manifold(axis16)
