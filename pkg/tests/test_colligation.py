import numpy as np
import pytest

from posreal.cayley import DiskKernelEvaluator, disk_to_halfplane, inv_double_cayley
from posreal.colligation import (
    AglerColligation,
    agler_identity_residual,
    build_colligation,
    spectrum_condition,
    transfer_eval,
)
from posreal.core import ValidationError
from posreal.kernels import factor_kernel_samples
from posreal.pencil import eval_schur
from posreal.sampling import disk_grid, random_pencil


@pytest.fixture
def flip():
    """U = [[0, 1], [1, 0]] with one state dimension: transfer w -> w."""
    return AglerColligation((1,), 1, np.array([[0.0, 1.0], [1.0, 0.0]]), selfadjoint=True)


class TestTransfer:
    def test_flip_is_coordinate(self, flip):
        for w in (0.2, -0.7, 0.3 + 0.4j):
            assert np.allclose(transfer_eval(flip, [w]), w)

    def test_center_gives_d_block(self, flip):
        assert np.allclose(transfer_eval(flip, [0.0]), [[0.0]])

    def test_sign_colligation_constant(self):
        c = AglerColligation((1,), 1, np.diag([1.0, -1.0]), selfadjoint=True)
        for w in (0.0, 0.5, -0.3 + 0.2j):
            assert np.allclose(transfer_eval(c, [w]), [[-1.0]])

    def test_contractive(self, flip, rng):
        ws = disk_grid(1, 10, seed=1)
        vals = transfer_eval(flip, ws)
        assert np.all(np.abs(vals) <= 1 + 1e-12)

    def test_validation(self, flip):
        flip.validate()
        bad = AglerColligation((1,), 1, np.array([[0.0, 1.1], [1.0, 0.0]]), selfadjoint=True)
        with pytest.raises(ValidationError):
            bad.validate()


class TestIdentities:
    def test_flip_exact(self, flip):
        ws = disk_grid(1, 8, seed=2)
        rp, rm = agler_identity_residual(flip, ws)
        assert max(rp, rm) < 1e-12

    def test_synthesized_exact(self, parallel):
        dk = DiskKernelEvaluator(parallel)
        ws = disk_grid(2, 10, seed=3)
        syn = build_colligation(ws, dk.theta_table(ws), dk.view.eval_double_cayley(ws))
        rp, rm = agler_identity_residual(syn.colligation, ws[:5])
        assert max(rp, rm) < 1e-9

    def test_detects_broken_unitarity(self, flip):
        u = flip.U.copy()
        u[0, 1] += 1e-2
        broken = AglerColligation((1,), 1, u, selfadjoint=True)
        ws = disk_grid(1, 8, seed=4)
        rp, rm = agler_identity_residual(broken, ws)
        assert max(rp, rm) >= 1e-3


class TestSpectrumCondition:
    def test_zero_d(self, flip):
        ok, margin = spectrum_condition(flip)
        assert ok and margin == pytest.approx(1.0)

    def test_parallel_constant_term(self):
        c = AglerColligation((), 1, np.array([[-1 / 3]]), selfadjoint=True)
        ok, margin = spectrum_condition(c)
        assert ok and margin == pytest.approx(4 / 3)

    def test_one_in_spectrum(self):
        c = AglerColligation((), 1, np.array([[1.0]]), selfadjoint=True)
        ok, margin = spectrum_condition(c)
        assert not ok and margin == pytest.approx(0.0)


class TestSynthesis:
    def test_flip_from_samples(self):
        grid = np.array([[0.0], [0.5], [-0.5]], dtype=complex)
        thetas = [np.ones((3, 1, 1), dtype=complex)]
        svals = grid[:, 0][:, None, None].copy()
        syn = build_colligation(grid, thetas, svals)
        c = syn.colligation
        assert c.unitarity_residual() < 1e-10
        assert c.selfadjointness_residual() < 1e-10
        probe = np.array([[0.3 + 0.2j], [-0.8j]])
        assert np.max(np.abs(transfer_eval(c, probe) - probe[:, 0][:, None, None])) < 1e-10

    def test_constant_selfadjoint_contraction_at_center(self):
        # a strictly contractive constant is compatible with the two
        # transfer identities only at w = 0, so the defect-factor data
        # synthesizes a selfadjoint dilation interpolating D0 there
        d0 = np.diag([0.5, -0.25])
        grid = np.array([[0.0]], dtype=complex)
        defect = factor_kernel_samples(np.eye(2) - d0 @ d0, 2)[0]
        thetas = [defect[None]]
        svals = d0[None].astype(complex)
        syn = build_colligation(grid, thetas, svals)
        syn.colligation.validate()
        assert np.max(np.abs(transfer_eval(syn.colligation, grid) - d0)) < 1e-10

    def test_constant_symmetry_everywhere(self):
        # D0 with D0^2 = I has zero defect and a genuinely constant transfer
        d0 = np.diag([1.0, -1.0])
        grid = np.array([[0.0], [0.4], [-0.4]], dtype=complex)
        thetas = [np.zeros((3, 0, 2), dtype=complex)]
        svals = np.broadcast_to(d0, (3, 2, 2)).astype(complex)
        syn = build_colligation(grid, thetas, svals)
        probe = np.array([[0.6j], [-0.2 + 0.3j]])
        assert np.max(np.abs(transfer_eval(syn.colligation, probe) - d0)) < 1e-12

    def test_parallel_roundtrip_with_holdout(self, parallel):
        dk = DiskKernelEvaluator(parallel)
        base = disk_grid(2, 6, seed=5)
        syn = build_colligation(base, dk.theta_table(base), dk.view.eval_double_cayley(base))
        c = syn.colligation
        assert c.unitarity_residual() < 1e-10 and c.selfadjointness_residual() < 1e-10
        holdout = disk_grid(2, 5, seed=55, include_zero=False)
        expected = dk.view.eval_double_cayley(holdout)
        assert np.max(np.abs(transfer_eval(c, holdout) - expected)) < 1e-8

    def test_rejects_inconsistent_samples(self):
        grid = np.array([[0.0], [0.5], [-0.5]], dtype=complex)
        thetas = [np.ones((3, 1, 1), dtype=complex)]
        svals = np.array([[[0.0]], [[0.9]], [[-0.1]]], dtype=complex)  # not the coordinate
        with pytest.raises(ValidationError):
            build_colligation(grid, thetas, svals)

    def test_transfer_conjugate_symmetry(self, parallel, rng):
        dk = DiskKernelEvaluator(parallel)
        ws = disk_grid(2, 8, seed=6)
        syn = build_colligation(ws, dk.theta_table(ws), dk.view.eval_double_cayley(ws))
        probe = disk_grid(2, 6, seed=66)
        for w in probe:
            a = transfer_eval(syn.colligation, w.conj())
            b = transfer_eval(syn.colligation, w).conj().T
            assert np.linalg.norm(a - b) < 1e-9

    def test_inverse_cayley_composition(self, rng):
        f = random_pencil(rng, 2, 2, 3, rank_deficient=True)
        dk = DiskKernelEvaluator(f)
        ws = disk_grid(2, 12, seed=7)
        syn = build_colligation(ws, dk.theta_table(ws), dk.view.eval_double_cayley(ws))
        rec = inv_double_cayley(lambda pts: transfer_eval(syn.colligation, pts), ws)
        target = eval_schur(f, disk_to_halfplane(ws))
        err = np.linalg.norm(rec - target, axis=(1, 2))
        assert np.max(err / (1 + np.linalg.norm(target, axis=(1, 2)))) < 1e-9
