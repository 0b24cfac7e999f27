"""Selfadjoint unitary colligations and their transfer functions.

A colligation here is a unitary block operator U = [[A, B], [C, D]] on
X (+) U with a state splitting X = X_1 (+) ... (+) X_N; its transfer
function is S(w) = D + C P(w) (I - A P(w))^{-1} B with
P(w) = sum_k w_k P_k.  Transfer functions of *selfadjoint* unitary
colligations with 1 outside the spectrum of S(0) are exactly the double
Cayley transforms of realized functions; synthesis from grid data uses
the finite lurking-isometry model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import (
    DEFAULT_POLICY,
    NumericalRefusalError,
    ShapeError,
    TolerancePolicy,
    ValidationError,
    as_matrix,
    hermitian_part,
    eigh_or_refuse,
    operator_norm,
)
from .pencil import _as_points, _refuse_ill_conditioned

__all__ = [
    "AglerColligation",
    "transfer_eval",
    "agler_identity_residual",
    "spectrum_condition",
    "ColligationSynthesis",
    "build_colligation",
]


@dataclass(frozen=True)
class AglerColligation:
    """Unitary block operator with a state splitting.

    dims:        per-variable state dimensions (d_1, ..., d_N)
    n:           input/output dimension
    U:           (sum(dims) + n) square unitary matrix
    selfadjoint: whether U = U* is asserted (and then validated)
    """

    dims: tuple
    n: int
    U: np.ndarray
    selfadjoint: bool = False

    def __post_init__(self):
        u = as_matrix(self.U, square=True)
        dims = tuple(int(d) for d in self.dims)
        if any(d < 0 for d in dims):
            raise ShapeError("state dimensions must be nonnegative")
        if u.shape[0] != sum(dims) + self.n:
            raise ShapeError("U dimension must equal state dim + io dim")
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "dims", dims)

    def validate(self, pol: TolerancePolicy = DEFAULT_POLICY) -> None:
        if self.unitarity_residual() > pol.residual_tol:
            raise ValidationError("colligation operator is not unitary")
        if self.selfadjoint and self.selfadjointness_residual() > pol.residual_tol:
            raise ValidationError("colligation operator is not selfadjoint")

    @property
    def num_vars(self) -> int:
        return len(self.dims)

    @property
    def dim_state(self) -> int:
        return sum(self.dims)

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        x = self.dim_state
        return self.U[:x, :x], self.U[:x, x:], self.U[x:, :x], self.U[x:, x:]

    def state_weights(self, w: np.ndarray) -> np.ndarray:
        """Diagonal of P(w) as a vector over the state space; batched."""
        return np.repeat(w, self.dims, axis=-1)

    def unitarity_residual(self) -> float:
        return operator_norm(self.U.conj().T @ self.U - np.eye(self.U.shape[0]))

    def selfadjointness_residual(self) -> float:
        return operator_norm(self.U - self.U.conj().T)

    def __call__(self, w, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
        return transfer_eval(self, w, pol)


def transfer_eval(c: AglerColligation, w, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """S(w) = D + C P(w) (I - A P(w))^{-1} B; batched over disk points.

    Strictly inside the polydisk I - A P(w) is invertible for unitary U;
    a singular system therefore signals corrupted data and is refused.
    """
    pts = _as_points(w, c.num_vars)
    a, b, cc, d = c.blocks()
    x = c.dim_state
    if x == 0:
        out = np.broadcast_to(d, (len(pts),) + d.shape).copy()
        return out[0] if np.asarray(w).ndim == 1 else out
    pw = c.state_weights(pts)  # (B, x)
    sys = np.broadcast_to(np.eye(x, dtype=complex), (len(pts), x, x)) - a[None] * pw[:, None, :]
    _refuse_ill_conditioned(sys, pol, "I - A P(w)")
    rhs = np.broadcast_to(b, (len(pts),) + b.shape)
    sol = np.linalg.solve(sys, rhs)  # (B, x, n)
    out = d[None] + cc[None] @ (pw[:, :, None] * sol)
    return out[0] if np.asarray(w).ndim == 1 else out


def _state_kernels(c: AglerColligation, pts: np.ndarray, pol: TolerancePolicy) -> np.ndarray:
    """G_k(w, o) = B* (I - P(conj o) A)^{-1} P_k (I - A P(w))^{-1} B as (N, B, C, n, n)."""
    a, b, _, _ = c.blocks()
    x = c.dim_state
    if x == 0:
        return np.zeros((c.num_vars, len(pts), len(pts), c.n, c.n), dtype=complex)
    pw = c.state_weights(pts)
    eye = np.broadcast_to(np.eye(x, dtype=complex), (len(pts), x, x))
    right = np.linalg.solve(eye - a[None] * pw[:, None, :], np.broadcast_to(b, (len(pts),) + b.shape))
    # B* (I - P(conj o) A)^{-1} = [(I - A* P(o))^{-1} B]*, since the adjoint of
    # the diagonal P(conj o) is P(o).
    left_sys = eye - a.conj().T[None] * pw[:, None, :]
    left = np.linalg.solve(left_sys, np.broadcast_to(b, (len(pts),) + b.shape))
    offsets = np.concatenate([[0], np.cumsum(c.dims)])
    out = []
    for k in range(c.num_vars):
        sel = slice(offsets[k], offsets[k + 1])
        out.append(np.einsum("cxi,bxj->bcij", left[:, sel, :].conj(), right[:, sel, :]))
    return np.stack(out)


def agler_identity_residual(c: AglerColligation, grid,
                            pol: TolerancePolicy = DEFAULT_POLICY) -> tuple[float, float]:
    """Residuals of the two transfer-function identities over grid x grid.

    plus:  I - S(o)* S(w) = sum_k (1 - conj(o_k) w_k) G_k(w, o)
    minus: S(w) - S(o)*   = sum_k (w_k - conj(o_k)) G_k(w, o)

    Both hold exactly for selfadjoint unitary U; the residual grows with
    any unitarity or selfadjointness defect.
    """
    if not c.selfadjoint:
        raise ValidationError("identity residuals are defined for selfadjoint colligations")
    pts = _as_points(grid, c.num_vars)
    kern = _state_kernels(c, pts, pol)
    sv = transfer_eval(c, pts, pol)
    svstar = sv.conj().transpose(0, 2, 1)
    eye = np.eye(c.n, dtype=complex)

    wplus = 1.0 - pts.conj()[None, :, :] * pts[:, None, :]
    lhs_plus = np.einsum("bck,kbcij->bcij", wplus, kern)
    tgt_plus = eye - np.einsum("cij,bjl->bcil", svstar, sv)
    res_plus = float(np.max(np.linalg.norm(lhs_plus - tgt_plus, axis=(2, 3))))

    wminus = pts[:, None, :] - pts.conj()[None, :, :]
    lhs_minus = np.einsum("bck,kbcij->bcij", wminus, kern)
    tgt_minus = sv[:, None] - svstar[None, :]
    res_minus = float(np.max(np.linalg.norm(lhs_minus - tgt_minus, axis=(2, 3))))
    return res_plus, res_minus


def spectrum_condition(c: AglerColligation, pol: TolerancePolicy = DEFAULT_POLICY) -> tuple[bool, float]:
    """Distance from 1 to the spectrum of S(0) = D, and whether it clears the margin.

    For selfadjoint contractive D this is 1 - max eigenvalue.
    """
    d = c.blocks()[3]
    if c.selfadjoint:
        eigs = eigh_or_refuse(hermitian_part(d))[0].astype(complex)
    else:
        eigs = np.linalg.eigvals(d)
    dist = float(np.min(np.abs(1.0 - eigs))) if eigs.size else 1.0
    return dist >= pol.margin, dist


@dataclass(frozen=True)
class ColligationSynthesis:
    """Synthesized colligation plus the residuals achieved on the input data."""

    colligation: AglerColligation
    interpolation_residual: float
    gram_residual: float
    rank: int


def build_colligation(grid, theta_tables, schur_samples,
                      pol: TolerancePolicy = DEFAULT_POLICY) -> ColligationSynthesis:
    """Synthesize a selfadjoint unitary colligation interpolating grid data.

    Inputs are a polydisk grid (g, N), per-variable factor tables
    theta_tables[k] of shape (g, m_k, n) with
    Theta_k(w, o) = theta_k(o)* theta_k(w), and the Schur-side values
    schur_samples (g, n, n).

    The two families of vectors in (+)_k C^{m_k} (+) C^n

        d(w, u) = (col_k(w_k theta_k(w) u); u)
        r(w, u) = (col_k(theta_k(w) u);     S(w) u)

    have equal Grams and a Hermitian cross-Gram exactly when the sampled
    data satisfies both transfer identities; the swap d <-> r is then a
    well-defined isometric involution of their joint span.  It extends
    by the identity on the orthogonal complement to the selfadjoint
    unitary U; by construction U d(w, u) = r(w, u) makes the transfer
    interpolate S at every grid node.

    When the data satisfies the identities only approximately (Gram
    residual above residual_tol but below 1e-6) the swap is replaced by
    the closest involutive unitary and the achieved residuals are
    reported in the result rather than hidden.  Larger residuals are
    rejected.
    """
    pts = _as_points(grid, len(theta_tables))
    g, num_vars = pts.shape
    svals = np.asarray(schur_samples, dtype=complex)
    if svals.shape[0] != g:
        raise ShapeError("one Schur-side sample per grid point required")
    n = svals.shape[1]
    tables = [np.asarray(t, dtype=complex) for t in theta_tables]
    dims = tuple(t.shape[1] for t in tables)
    m = sum(dims)

    # Generator matrices, n columns per grid point.
    h = np.concatenate(tables, axis=1) if m else np.zeros((g, 0, n), dtype=complex)
    weights = np.repeat(pts, dims, axis=1)  # (g, m)
    d_vecs = np.concatenate([weights[:, :, None] * h, np.broadcast_to(np.eye(n, dtype=complex), (g, n, n))], axis=1)
    r_vecs = np.concatenate([h, svals], axis=1)
    dmat = np.hstack(list(d_vecs) + list(r_vecs))  # (m+n, 2 g n)
    rmat = np.hstack(list(r_vecs) + list(d_vecs))

    gram_d = dmat.conj().T @ dmat
    gram_r = rmat.conj().T @ rmat
    cross = dmat.conj().T @ rmat
    scale = 1.0 + operator_norm(gram_d)
    gram_res = max(operator_norm(gram_d - gram_r), operator_norm(cross - cross.conj().T)) / scale
    if gram_res > 1e-6:
        raise ValidationError(
            f"samples violate the transfer identities (Gram residual {gram_res:.3e})")

    q, r, _ = scipy.linalg.qr(dmat, mode="economic", pivoting=True)
    pivots = np.abs(np.diag(r)) if r.size else np.zeros(0)
    rank = 0
    if pivots.size and pivots[0] > 0:
        rank = int(np.sum(pivots > pol.psd_slack * pivots[0]))
    if rank == 0 and m + n > 0 and g > 0:
        raise NumericalRefusalError("rank collapse: generator span is empty")
    q = q[:, :rank]

    x = q.conj().T @ dmat
    y = q.conj().T @ rmat
    # Least-squares swap on the span, then projection to the nearest
    # selfadjoint unitary: the unitary factor of the Hermitian part is
    # the eigenvalue sign function.
    w0 = scipy.linalg.lstsq(x.conj().T, y.conj().T, lapack_driver="gelsd")[0].conj().T
    herm = hermitian_part(w0)
    evals, evecs = eigh_or_refuse(herm)
    if np.any(np.abs(evals) < 0.5):
        raise NumericalRefusalError("swap isometry is not close to an involution")
    w0 = (evecs * np.sign(evals)) @ evecs.conj().T

    u_full = np.eye(m + n, dtype=complex) + q @ (w0 - np.eye(rank, dtype=complex)) @ q.conj().T
    coll = AglerColligation(dims, n, u_full, selfadjoint=True)
    coll.validate(pol)

    tv = transfer_eval(coll, pts, pol)
    interp = float(np.max(np.linalg.norm(tv - svals, axis=(1, 2)) /
                          (1.0 + np.linalg.norm(svals, axis=(1, 2)))))
    if gram_res <= pol.residual_tol and interp > pol.residual_tol:
        raise NumericalRefusalError(
            f"synthesized colligation fails to interpolate (residual {interp:.3e})")
    return ColligationSynthesis(coll, interp, gram_res, rank)
