"""Cayley-type maps between the polyhalfplane and the polydisk.

Four related maps live here: the per-coordinate variable Cayley map
between the open right half-plane and the unit disk, the value map
F -> (F - I)(F + I)^{-1} on operator values, their composition (the
double Cayley transform of a realized function), and the induced
transforms of the kernel factors.  The operator Cayley map on matrix
tuples is exposed at matrix level; tuple wrappers live in the calculus
module.
"""

from __future__ import annotations

import numpy as np

from .core import (
    DEFAULT_POLICY,
    TolerancePolicy,
    ValidationError,
    as_matrix,
)
from .kernels import KernelEvaluator
from .pencil import RealizedFunction, _as_points, _refuse_ill_conditioned

__all__ = [
    "BOUNDARY_GUARD",
    "disk_to_halfplane",
    "halfplane_to_disk",
    "cayley_matrix",
    "inv_cayley_matrix",
    "DiskFunctionView",
    "inv_double_cayley",
    "DiskKernelEvaluator",
]

# Points closer than this to the unit circle (or the imaginary axis on the
# halfplane side) are rejected; the maps blow up there and residual checks
# would stop being meaningful.
BOUNDARY_GUARD = 1e-8


def disk_to_halfplane(w) -> np.ndarray:
    """z_k = (1 + w_k) / (1 - w_k) coordinatewise, from D^N to the polyhalfplane."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) >= 1.0 - BOUNDARY_GUARD):
        raise ValidationError("disk point too close to the unit circle")
    return (1.0 + w) / (1.0 - w)


def halfplane_to_disk(z) -> np.ndarray:
    """w_k = (z_k - 1) / (z_k + 1) coordinatewise, inverse of ``disk_to_halfplane``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.real <= BOUNDARY_GUARD):
        raise ValidationError("halfplane point too close to the imaginary axis")
    return (z - 1.0) / (z + 1.0)


def cayley_matrix(t) -> np.ndarray:
    """(I + T)(I - T)^{-1} for a single matrix."""
    t = as_matrix(t, square=True)
    eye = np.eye(t.shape[0], dtype=complex)
    return np.linalg.solve((eye - t).T, (eye + t).T).T


def inv_cayley_matrix(r) -> np.ndarray:
    """(R - I)(R + I)^{-1}, inverse of ``cayley_matrix``."""
    r = as_matrix(r, square=True)
    eye = np.eye(r.shape[0], dtype=complex)
    return np.linalg.solve((r + eye).T, (r - eye).T).T


def _value_cayley(f_vals: np.ndarray, pol: TolerancePolicy) -> np.ndarray:
    """(F - I)(F + I)^{-1} batched over stacked values."""
    eye = np.eye(f_vals.shape[-1], dtype=complex)
    plus = f_vals + eye
    _refuse_ill_conditioned(plus, pol, "F(w) + I")
    return np.linalg.solve(plus.transpose(0, 2, 1), (f_vals - eye).transpose(0, 2, 1)).transpose(0, 2, 1)


class DiskFunctionView:
    """Polydisk view F(w) = f(z(w)) of a halfplane evaluator, plus its value Cayley.

    ``source`` is either a RealizedFunction or any callable mapping a
    batch of halfplane points (B, N) to values (B, n, n).
    """

    def __init__(self, source, num_vars: int | None = None,
                 pol: TolerancePolicy = DEFAULT_POLICY):
        if isinstance(source, RealizedFunction):
            self.num_vars = source.num_vars
            self._eval = lambda pts: source(pts, pol)
        else:
            if num_vars is None:
                raise ValidationError("num_vars is required for callable sources")
            self.num_vars = num_vars
            self._eval = source
        self.pol = pol

    def eval_F(self, w) -> np.ndarray:
        """Herglotz-side value F(w); batched over disk points."""
        pts = _as_points(w, self.num_vars)
        z = disk_to_halfplane(pts)
        out = np.asarray(self._eval(z), dtype=complex)
        if out.ndim == 2:
            out = out[None]
        return out[0] if np.asarray(w).ndim == 1 else out

    def eval_double_cayley(self, w) -> np.ndarray:
        """Schur-side value (F(w) - I)(F(w) + I)^{-1}; contractive on the class."""
        pts = _as_points(w, self.num_vars)
        fv = self.eval_F(pts)
        out = _value_cayley(fv, self.pol)
        return out[0] if np.asarray(w).ndim == 1 else out

    def __call__(self, w) -> np.ndarray:
        return self.eval_double_cayley(w)


def inv_double_cayley(schur_eval, w, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Recover F(w) = (I + S(w))(I - S(w))^{-1} from a Schur-side evaluator.

    ``schur_eval`` maps a batch of disk points to stacked values.
    Refuses when 1 sits in the spectrum of S(w) (I - S singular).
    """
    pts = np.asarray(w, dtype=complex)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    sv = np.asarray(schur_eval(pts), dtype=complex)
    if sv.ndim == 2:
        sv = sv[None]
    eye = np.eye(sv.shape[-1], dtype=complex)
    minus = eye - sv
    _refuse_ill_conditioned(minus, pol, "I - S(w)")
    out = np.linalg.solve(minus.transpose(0, 2, 1), (eye + sv).transpose(0, 2, 1)).transpose(0, 2, 1)
    return out[0] if single else out


class DiskKernelEvaluator:
    """Disk-side kernel transforms of a pencil's kernel factors.

    xi_k(w)    = sqrt(2)/(1 - w_k) * phi_k(z(w))
    Xi_k(w,o)  = xi_k(o)* xi_k(w)            (Herglotz-side kernels)
    theta_k(w) = sqrt(2) * xi_k(w) (F(w) + I)^{-1}
    Theta_k    = theta_k(o)* theta_k(w)      (Schur-side kernels)

    Everything is an evaluator view over the pencil; no power-series
    coefficients are stored on this path.
    """

    def __init__(self, f: RealizedFunction, pol: TolerancePolicy = DEFAULT_POLICY):
        self.f = f
        self.pol = pol
        self.kernels = KernelEvaluator(f, pol)
        self.view = DiskFunctionView(f, pol=pol)

    @property
    def num_vars(self) -> int:
        return self.f.num_vars

    def xi(self, k: int, w) -> np.ndarray:
        pts = _as_points(w, self.num_vars)
        z = disk_to_halfplane(pts)
        fac = self.kernels.phi_factor(k, z)
        out = (np.sqrt(2.0) / (1.0 - pts[:, k]))[:, None, None] * fac
        return out[0] if np.asarray(w).ndim == 1 else out

    def xi_kernel(self, k: int, w, omega) -> np.ndarray:
        xw = np.atleast_3d(self.xi(k, w))
        xo = np.atleast_3d(self.xi(k, omega))
        return np.squeeze(xo.conj().swapaxes(-1, -2) @ xw)

    def theta(self, k: int, w) -> np.ndarray:
        pts = _as_points(w, self.num_vars)
        xw = self.xi(k, pts)
        fv = self.view.eval_F(pts)
        eye = np.eye(fv.shape[-1], dtype=complex)
        plus = fv + eye
        _refuse_ill_conditioned(plus, self.pol, "F(w) + I")
        sol = np.linalg.solve(plus.transpose(0, 2, 1), xw.transpose(0, 2, 1)).transpose(0, 2, 1)
        out = np.sqrt(2.0) * sol
        return out[0] if np.asarray(w).ndim == 1 else out

    def theta_table(self, grid) -> list[np.ndarray]:
        pts = _as_points(grid, self.num_vars)
        return [self.theta(k, pts) for k in range(self.num_vars)]

    def theta_kernel(self, k: int, w, omega) -> np.ndarray:
        tw = np.atleast_3d(self.theta(k, w))
        to = np.atleast_3d(self.theta(k, omega))
        return np.squeeze(to.conj().swapaxes(-1, -2) @ tw)

    def herglotz_identity_residuals(self, grid) -> tuple[float, float]:
        """Residuals of the disk-side sum/difference identities for F.

        plus:  F(w) + F(o)* = sum_k (1 - conj(o_k) w_k) Xi_k(w, o)
        minus: F(w) - F(o)* = sum_k (w_k - conj(o_k)) Xi_k(w, o)
        """
        pts = _as_points(grid, self.num_vars)
        tables = [self.xi(k, pts) for k in range(self.num_vars)]
        fv = self.view.eval_F(pts)
        return _two_point_residuals(pts, tables, fv, np.eye(0))

    def schur_identity_residuals(self, grid) -> tuple[float, float]:
        """Residuals of the disk-side identities for the double Cayley transform.

        plus:  I - S(o)* S(w) = sum_k (1 - conj(o_k) w_k) Theta_k(w, o)
        minus: S(w) - S(o)*   = sum_k (w_k - conj(o_k)) Theta_k(w, o)
        """
        pts = _as_points(grid, self.num_vars)
        tables = self.theta_table(pts)
        sv = self.view.eval_double_cayley(pts)
        return _two_point_residuals(pts, tables, sv, np.eye(sv.shape[-1], dtype=complex))


def _two_point_residuals(pts, tables, vals, eye) -> tuple[float, float]:
    """Shared residual computation for the Herglotz and Schur identity pairs.

    With an empty ``eye`` the plus-target is F(w) + F(o)*; otherwise it
    is I - S(o)* S(w).  The minus-target is always vals(w) - vals(o)*.
    """
    kern = np.stack([np.einsum("cmi,bmj->bcij", tab.conj(), tab) for tab in tables])
    vstar = vals.conj().transpose(0, 2, 1)
    den = 1.0 + np.linalg.norm(vals, axis=(1, 2))

    wplus = 1.0 - pts.conj()[None, :, :] * pts[:, None, :]
    lhs_plus = np.einsum("bck,kbcij->bcij", wplus, kern)
    if eye.size:
        tgt_plus = eye - np.einsum("cij,bjl->bcil", vstar, vals)
    else:
        tgt_plus = vals[:, None] + vstar[None, :]
    res_plus = np.linalg.norm(lhs_plus - tgt_plus, axis=(2, 3)) / den[:, None]

    wminus = pts[:, None, :] - pts.conj()[None, :, :]
    lhs_minus = np.einsum("bck,kbcij->bcij", wminus, kern)
    tgt_minus = vals[:, None] - vstar[None, :]
    res_minus = np.linalg.norm(lhs_minus - tgt_minus, axis=(2, 3)) / den[:, None]
    return float(np.max(res_plus)), float(np.max(res_minus))
