"""Closed-form transform kernel against its quadrature oracle."""

import math

import numpy as np
import pytest

from driftalign import (
    DimensionMismatch,
    Subspace,
    TransformKernel,
    apply_transform,
    complement,
    flow_kernel,
    orthonormalize,
    quadrature_kernel,
    random_subspace,
)


def kernel_pair(d, k, seed):
    rng = np.random.default_rng(seed)
    source = random_subspace(d, k, rng)
    target = random_subspace(d, k, rng)
    return source, complement(source), target


class TestCanonicalValues:
    def test_right_angle_pair_in_the_plane(self):
        # source spans e1, target spans e2: diagonal is 1/2, off-diagonal 1/pi
        source = Subspace(basis=np.array([[1.0], [0.0], [0.0]]))
        target = Subspace(basis=np.array([[0.0], [1.0], [0.0]]))
        g = flow_kernel(source, complement(source), target).g
        assert abs(g[0, 0] - 0.5) < 1e-12
        assert abs(g[1, 1] - 0.5) < 1e-12
        assert abs(abs(g[0, 1]) - 1.0 / math.pi) < 1e-12
        assert abs(g[2, 2]) < 1e-12

    def test_right_angle_matches_quadrature_including_sign(self):
        source = Subspace(basis=np.array([[1.0], [0.0], [0.0]]))
        target = Subspace(basis=np.array([[0.0], [1.0], [0.0]]))
        source_comp = complement(source)
        closed = flow_kernel(source, source_comp, target).g
        numeric = quadrature_kernel(source, source_comp, target, nodes=10_000).g
        assert np.abs(closed - numeric).max() < 1e-10

    def test_zero_angle_gives_the_projector(self):
        rng = np.random.default_rng(0)
        s = random_subspace(10, 3, rng)
        g = flow_kernel(s, complement(s), s).g
        assert np.abs(g - s.projector()).max() < 1e-9


class TestOracleAgreement:
    @pytest.mark.parametrize("d,k,seed", [(8, 2, 1), (10, 3, 2), (12, 1, 3), (16, 5, 4)])
    def test_matches_simpson_quadrature(self, d, k, seed):
        source, source_comp, target = kernel_pair(d, k, seed)
        closed = flow_kernel(source, source_comp, target).g
        numeric = quadrature_kernel(source, source_comp, target, nodes=10_000).g
        assert np.abs(closed - numeric).max() < 1e-8

    def test_quadrature_self_converges(self):
        source, source_comp, target = kernel_pair(10, 3, 5)
        coarse = quadrature_kernel(source, source_comp, target, nodes=100).g
        fine = quadrature_kernel(source, source_comp, target, nodes=10_000).g
        assert np.abs(coarse - fine).max() < 1e-8

    def test_node_count_must_be_even_and_positive(self):
        source, source_comp, target = kernel_pair(8, 2, 6)
        for nodes in (0, -2, 7):
            with pytest.raises(ValueError):
                quadrature_kernel(source, source_comp, target, nodes=nodes)

    def test_wrong_cross_sign_breaks_agreement(self):
        # the same check the fault-injection path relies on
        source, source_comp, target = kernel_pair(10, 3, 7)
        wrong = flow_kernel(source, source_comp, target, cross_sign=1.0).g
        numeric = quadrature_kernel(source, source_comp, target, nodes=10_000).g
        assert np.abs(wrong - numeric).max() > 1e-8


class TestKernelProperties:
    def test_symmetric_with_unit_interval_spectrum(self):
        for seed in range(5):
            source, source_comp, target = kernel_pair(12, 4, seed)
            g = flow_kernel(source, source_comp, target).g
            assert np.abs(g - g.T).max() < 1e-12
            eigs = np.linalg.eigvalsh(g)
            assert eigs.min() > -1e-9
            assert eigs.max() < 1.0 + 1e-9

    def test_invariant_under_target_basis_rotation(self):
        rng = np.random.default_rng(8)
        source, source_comp, target = kernel_pair(11, 3, 9)
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        rotated = Subspace(basis=target.basis @ q)
        g1 = flow_kernel(source, source_comp, target).g
        g2 = flow_kernel(source, source_comp, rotated).g
        assert np.abs(g1 - g2).max() < 1e-9

    def test_type_rejects_asymmetric_matrix(self):
        m = np.eye(4)
        m[0, 1] = 0.5
        with pytest.raises(ValueError):
            TransformKernel(g=m, source_sub_dim=1)

    def test_kernel_matrix_is_read_only(self):
        source, source_comp, target = kernel_pair(8, 2, 10)
        kernel = flow_kernel(source, source_comp, target)
        with pytest.raises(ValueError):
            kernel.g[0, 0] = 2.0


class TestApplyTransform:
    def test_rows_map_through_the_matrix(self):
        source, source_comp, target = kernel_pair(9, 2, 11)
        kernel = flow_kernel(source, source_comp, target)
        rng = np.random.default_rng(12)
        x = rng.standard_normal((6, 9))
        np.testing.assert_allclose(apply_transform(x, kernel), x @ kernel.g, atol=0)

    def test_column_count_mismatch_rejected(self):
        source, source_comp, target = kernel_pair(9, 2, 13)
        kernel = flow_kernel(source, source_comp, target)
        with pytest.raises(DimensionMismatch):
            apply_transform(np.ones((4, 8)), kernel)

    def test_projection_behavior_at_zero_angle(self):
        rng = np.random.default_rng(14)
        s = random_subspace(10, 3, rng)
        kernel = flow_kernel(s, complement(s), s)
        x = rng.standard_normal((5, 10))
        np.testing.assert_allclose(apply_transform(x, kernel), x @ s.projector(), atol=1e-9)
