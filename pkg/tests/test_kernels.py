import numpy as np
import pytest

from posreal.core import ValidationError
from posreal.kernels import (
    KernelEvaluator,
    KernelSampleSet,
    check_psd_kernel,
    factor_kernel_samples,
    factor_orthogonality_residual,
    kernel_identity_residual,
    pencil_from_kernel_samples,
    phi,
    plus_minus_residuals,
    psi,
    sample_kernels,
)
from posreal.pencil import diagonal_realization, eval_schur
from posreal.sampling import halfplane_grid, random_pencil


class TestPsi:
    def test_parallel(self, parallel):
        # c(z) = z1, d(z) = z1 + z2
        assert np.allclose(psi(parallel, [1, 1]), [[1.0], [-0.5]])

    def test_p0_identity(self):
        f = diagonal_realization([np.eye(2), np.eye(2)])
        assert np.allclose(psi(f, [1, 1]), np.eye(2))

    def test_boundary_point_with_invertible_d(self, parallel):
        # (1, 0) leaves the open polyhalfplane but d = 1 stays invertible
        assert np.allclose(psi(parallel, [1, 0]), [[1.0], [-1.0]])


class TestPhi:
    def test_parallel_first_kernel(self, parallel):
        assert np.allclose(phi(parallel, 0, [1, 1], [1, 1]), [[0.25]])

    def test_parallel_second_kernel(self, parallel):
        assert np.allclose(phi(parallel, 1, [1, 1], [1, 1]), [[0.25]])

    def test_p0_kernels_constant(self, rng):
        e1 = np.array([[2.0, 1.0], [1.0, 1.0]])
        f = diagonal_realization([e1, np.eye(2)])
        za = np.array([1 + 0.5j, 2.0])
        zb = np.array([0.3, 1 - 0.2j])
        assert np.allclose(phi(f, 0, za, zb), e1)
        assert np.allclose(phi(f, 0, zb, za), e1)


class TestIdentityResiduals:
    def test_valid_pencil_small(self, parallel):
        grid = np.array([[1, 1], [2, 1], [1 + 1j, 1]], dtype=complex)
        assert kernel_identity_residual(parallel, grid) < 1e-12

    def test_random_pencils(self, rng):
        for _ in range(5):
            f = random_pencil(rng, 3, 2, 4, rank_deficient=True)
            grid = halfplane_grid(3, 8, seed=int(rng.integers(1 << 30)))
            assert kernel_identity_residual(f, grid) < 1e-9

    def test_corrupted_kernel_detected(self, parallel):
        # recompute the identity by hand with one kernel value perturbed
        grid = np.array([[1, 1], [2, 1], [1 + 1j, 1]], dtype=complex)
        ev = KernelEvaluator(parallel)
        worst = 0.0
        for bi, z in enumerate(grid):
            fz = eval_schur(parallel, z)
            for ci, zeta in enumerate(grid):
                phis = [ev.phi(k, z, zeta) for k in range(2)]
                if bi == 0 and ci == 1:
                    phis[0] = phis[0] + 0.1
                lhs = sum(z[k] * phis[k] for k in range(2))
                worst = max(worst, np.linalg.norm(lhs - fz) / (1 + np.linalg.norm(fz)))
        assert worst >= 0.05

    def test_plus_minus_valid(self, parallel, rng):
        grid = halfplane_grid(2, 8, seed=3)
        rp, rm = plus_minus_residuals(parallel, grid)
        assert rp < 1e-12 and rm < 1e-12

    def test_plus_identity_specializes_to_real_part(self, parallel):
        z = np.array([1.3 + 0.4j, 0.8 - 0.1j])
        ev = KernelEvaluator(parallel)
        fz = eval_schur(parallel, z)
        lhs = sum(2 * z[k].real * ev.phi(k, z, z) for k in range(2))
        assert np.allclose(lhs, fz + fz.conj().T)

    def test_plus_minus_corruption_detected(self, parallel):
        grid = np.array([[1, 1], [2, 1]], dtype=complex)
        ev = KernelEvaluator(parallel)
        worst_plus = 0.0
        for z in grid:
            for zeta in grid:
                phis = [ev.phi(k, z, zeta) + (0.1 if k == 0 else 0) for k in range(2)]
                fz, fzeta = eval_schur(parallel, z), eval_schur(parallel, zeta)
                lhs = sum((z[k] + np.conj(zeta[k])) * phis[k] for k in range(2))
                worst_plus = max(worst_plus, np.linalg.norm(lhs - fz - fzeta.conj().T))
        assert worst_plus > 1e-2


class TestPsdKernelCheck:
    def test_pencil_kernels_pass(self, parallel, rng):
        grid = halfplane_grid(2, 4, seed=9)
        ev = KernelEvaluator(parallel)
        samples = [[ev.phi(0, zm, zn) for zn in grid] for zm in grid]
        assert check_psd_kernel(samples)

    def test_rank_one_scalar_kernel(self):
        pts = [1.0, 2.0, 0.5 + 0.5j]
        g = lambda z: 1.0 / (1.0 + z)
        samples = [[np.array([[np.conj(g(zn)) * g(zm)]]) for zn in pts] for zm in pts]
        assert check_psd_kernel(samples)

    def test_non_hermitian_gram_rejected(self):
        # Phi(z, zeta) = z - conj(zeta) sampled on {1, 2}
        pts = [1.0, 2.0]
        samples = [[np.array([[zm - np.conj(zn)]]) for zn in pts] for zm in pts]
        assert not check_psd_kernel(samples)


class TestFactorKernelSamples:
    def test_single_point(self):
        out = factor_kernel_samples(np.array([[4.0]]), 1)
        assert np.allclose(out[0], [[2.0]])

    def test_parallel_gram_rebuild(self, parallel):
        grid = np.array([[1, 1], [2, 1]], dtype=complex)
        ev = KernelEvaluator(parallel)
        gram = np.block([[ev.phi(0, grid[mu], grid[nu]) for mu in range(2)] for nu in range(2)])
        factors = factor_kernel_samples(gram, 1)
        assert factors[0].shape[0] == 1  # rank one
        rebuilt = np.block([[factors[nu].conj().T @ factors[mu] for mu in range(2)]
                            for nu in range(2)])
        assert np.linalg.norm(rebuilt - gram) < 1e-12

    def test_zero_kernel(self):
        factors = factor_kernel_samples(np.zeros((3, 3)), 1)
        assert all(f.shape == (0, 1) for f in factors)

    def test_indefinite_rejected(self):
        with pytest.raises(ValidationError):
            factor_kernel_samples(np.array([[1, 2], [2, 1.0]]), 1)


class TestReconstruction:
    def test_parallel_roundtrip(self, parallel, rng):
        grid = halfplane_grid(2, 6, seed=4)
        ks = sample_kernels(parallel, grid)
        rebuilt = pencil_from_kernel_samples(ks)
        holdout = halfplane_grid(2, 10, seed=77)
        err = np.abs(rebuilt(holdout) - parallel(holdout))
        assert np.max(err) < 1e-8

    def test_p0_exact(self):
        f = diagonal_realization([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
        grid = halfplane_grid(2, 5, seed=5)
        rebuilt = pencil_from_kernel_samples(sample_kernels(f, grid))
        assert rebuilt.dim_h == 0
        z = np.array([2.0, 3.0])
        assert np.allclose(rebuilt(z), f(z))

    def test_single_variable_content(self):
        # f(z) = z1 with N = 2: second kernel identically zero
        grid = np.array([[1, 1], [2, 1 + 1j], [0.5, 3], [1 + 2j, 1 - 1j]], dtype=complex)
        factors = (np.ones((4, 1, 1), dtype=complex), np.zeros((4, 0, 1), dtype=complex))
        fs = grid[:, 0][:, None, None] * np.ones((4, 1, 1))
        ks = KernelSampleSet(grid, factors, fs)
        rebuilt = pencil_from_kernel_samples(ks)
        z = np.array([0.4 + 0.1j, 5.0 - 2j])
        assert np.allclose(rebuilt(z), [[z[0]]])

    def test_rejects_violated_identity(self, parallel):
        grid = halfplane_grid(2, 6, seed=4)
        ks = sample_kernels(parallel, grid)
        bad = KernelSampleSet(ks.grid, ks.factors, ks.f_samples + 0.3)
        with pytest.raises(ValidationError):
            pencil_from_kernel_samples(bad)

    def test_requires_base_point(self, parallel):
        grid = halfplane_grid(2, 6, seed=4, include_base=False) + 0.3
        ks = sample_kernels(parallel, grid)
        with pytest.raises(ValidationError):
            pencil_from_kernel_samples(ks)

    def test_factor_orthogonality(self, parallel, rng):
        # the reconstructed factor differences are orthogonal to phi(e)
        grid = halfplane_grid(2, 8, seed=8)
        rebuilt = pencil_from_kernel_samples(sample_kernels(parallel, grid))
        ks2 = sample_kernels(rebuilt, grid)
        assert factor_orthogonality_residual(ks2) < 1e-9

    def test_reconstructed_kernels_match_inputs_at_grid(self, rng):
        # the embedding preserves kernel values at the nodes, which is the
        # finite content of the vanishing of the lower block row
        f = random_pencil(rng, 2, 2, 3, rank_deficient=True)
        grid = halfplane_grid(2, f.dim_h + 3, seed=13)
        ks = sample_kernels(f, grid)
        rebuilt = pencil_from_kernel_samples(ks)
        ev = KernelEvaluator(rebuilt)
        for bi, z in enumerate(grid):
            for ci, zeta in enumerate(grid):
                for k in range(2):
                    orig = ks.factors[k][ci].conj().T @ ks.factors[k][bi]
                    assert np.linalg.norm(ev.phi(k, z, zeta) - orig) < 1e-9

    def test_random_roundtrips_with_holdout(self, rng):
        for _ in range(5):
            n = int(rng.integers(1, 4))
            p = int(rng.integers(0, 6))
            f = random_pencil(rng, 2, n, p, rank_deficient=True)
            grid = halfplane_grid(2, p + 3, seed=int(rng.integers(1 << 30)))
            rebuilt = pencil_from_kernel_samples(sample_kernels(f, grid))
            holdout = halfplane_grid(2, 10, seed=int(rng.integers(1 << 30))) * (1 + 0.1j)
            err = np.linalg.norm(rebuilt(holdout) - f(holdout), axis=(1, 2))
            assert np.max(err / (1 + np.linalg.norm(f(holdout), axis=(1, 2)))) < 1e-8


class TestKernelHomogeneity:
    def test_degree_zero(self, parallel, rng):
        ev = KernelEvaluator(parallel)
        for _ in range(10):
            z = np.array([1 + 0.3j, 0.7]) * (1 + rng.random())
            zeta = np.array([2.0, 1 - 0.2j])
            lam = (0.5 + rng.random()) * np.exp(2j * np.pi * rng.random())
            for k in range(2):
                a = ev.phi(k, lam * z, lam * zeta)
                b = ev.phi(k, z, zeta)
                assert np.linalg.norm(a - b) < 1e-9 * (1 + np.linalg.norm(b))
