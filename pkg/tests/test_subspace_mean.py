"""Running mean on the manifold plus the iterative reference mean."""

import numpy as np
import pytest

from driftalign import (
    DimensionMismatch,
    NoConvergence,
    evaluate,
    exp_tangent,
    geodesic,
    geodesic_distance,
    init_mean,
    karcher_mean,
    log_tangent,
    principal_angles,
    random_subspace,
    update_mean,
)
from driftalign.subspaces import complement
from driftalign.verify import _sine_angles


def perturbed(base, scale, rng):
    from driftalign import orthonormalize

    return orthonormalize(base.basis + scale * rng.standard_normal(base.basis.shape))


class TestRunningMean:
    def test_init_is_the_subspace_itself(self):
        rng = np.random.default_rng(0)
        s = random_subspace(10, 3, rng)
        state = init_mean(s)
        assert state.count == 1
        assert np.array_equal(state.mean.basis, s.basis)

    def test_fixed_point_under_repeated_self_updates(self):
        rng = np.random.default_rng(1)
        s = random_subspace(12, 4, rng)
        state = init_mean(s)
        for _ in range(50):
            state = update_mean(state, s)
        assert state.count == 51
        assert _sine_angles(state.mean, s).max() < 1e-8

    def test_two_subspace_mean_is_the_midpoint(self):
        rng = np.random.default_rng(2)
        a = random_subspace(11, 3, rng)
        b = random_subspace(11, 3, rng)
        state = update_mean(init_mean(a), b)
        midpoint = evaluate(geodesic(a, b), 0.5)
        # sine-based measurement: arccos of a near-one cosine flattens at ~2e-8
        assert _sine_angles(state.mean, midpoint).max() < 1e-8

    def test_step_size_follows_one_over_count(self):
        # third update moves exactly a quarter of the way: 1/(3+1)
        rng = np.random.default_rng(3)
        center = random_subspace(10, 2, rng)
        state = init_mean(center)
        state = update_mean(state, center)
        state = update_mean(state, center)
        target = perturbed(center, 0.2, rng)
        moved = update_mean(state, target)
        full = geodesic_distance(state.mean, target)
        step = geodesic_distance(state.mean, moved.mean)
        assert abs(step - full / 4.0) < 1e-8

    def test_dimension_mismatch_rejected(self):
        rng = np.random.default_rng(4)
        state = init_mean(random_subspace(10, 3, rng))
        with pytest.raises(DimensionMismatch):
            update_mean(state, random_subspace(12, 3, rng))


class TestTangentMaps:
    def test_log_exp_roundtrip(self):
        rng = np.random.default_rng(5)
        base = random_subspace(12, 3, rng)
        target = perturbed(base, 0.15, rng)
        tangent = log_tangent(base, complement(base), target)
        recovered = exp_tangent(base, tangent)
        assert _sine_angles(recovered, target).max() < 1e-8

    def test_zero_tangent_maps_to_base(self):
        rng = np.random.default_rng(6)
        base = random_subspace(9, 2, rng)
        recovered = exp_tangent(base, np.zeros((9, 2)))
        assert principal_angles(recovered, base).max() < 1e-7

    def test_tangent_norm_equals_geodesic_distance(self):
        rng = np.random.default_rng(7)
        base = random_subspace(14, 4, rng)
        target = perturbed(base, 0.1, rng)
        tangent = log_tangent(base, complement(base), target)
        assert abs(np.linalg.norm(tangent) - geodesic_distance(base, target)) < 1e-8


class TestKarcherMean:
    def test_two_point_mean_matches_midpoint(self):
        rng = np.random.default_rng(8)
        a = random_subspace(10, 3, rng)
        b = perturbed(a, 0.3, rng)
        mean = karcher_mean([a, b])
        midpoint = evaluate(geodesic(a, b), 0.5)
        assert principal_angles(mean, midpoint).max() < 1e-6

    def test_mean_of_identical_subspaces_is_immediate(self):
        rng = np.random.default_rng(9)
        s = random_subspace(8, 2, rng)
        mean = karcher_mean([s, s, s])
        assert principal_angles(mean, s).max() < 1e-7

    def test_impossible_tolerance_raises(self):
        rng = np.random.default_rng(10)
        a = random_subspace(10, 3, rng)
        pts = [perturbed(a, 0.2, rng) for _ in range(4)]
        with pytest.raises(NoConvergence):
            karcher_mean(pts, tol=0.0, max_iter=3)

    def test_running_mean_tracks_karcher_inside_a_tight_ball(self):
        # the running rule is order-dependent, so only closeness is asserted
        rng = np.random.default_rng(11)
        center = random_subspace(12, 3, rng)
        pts = [perturbed(center, 0.05, rng) for _ in range(8)]
        state = init_mean(pts[0])
        for p in pts[1:]:
            state = update_mean(state, p)
        reference = karcher_mean(pts)
        diameter = max(
            geodesic_distance(p, q) for i, p in enumerate(pts) for q in pts[i + 1:]
        )
        deviation = geodesic_distance(state.mean, reference)
        assert np.isfinite(deviation)
        assert deviation < diameter
