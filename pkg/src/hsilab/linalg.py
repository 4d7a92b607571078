"""Array helpers and a self-contained thin SVD.

Arrays throughout the package are plain numpy ndarrays; float64 is used on
every gradient-checked path, float32 is accepted for inference. The one
nontrivial primitive here is :func:`svd_thin`, a one-sided (Hestenes) Jacobi
SVD written without LAPACK so that factors are bit-reproducible for identical
input on a fixed platform and carry a fixed sign convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

__all__ = [
    "SvdConvergenceError",
    "SvdFactors",
    "reshape",
    "require_finite",
    "svd_thin",
]

# Pair-relative Jacobi rotation threshold per working precision.
_JACOBI_TOL = {
    np.dtype(np.float64): 1e-12,
    np.dtype(np.float32): 1e-7,
}

#: Hard cap on Jacobi sweeps before giving up.
MAX_SWEEPS = 100


class SvdConvergenceError(NumericalError):
    """Raised when Jacobi sweeps hit the iteration cap."""


def require_finite(arr, name="array"):
    """Raise ValueError if ``arr`` contains NaN or +-inf."""
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")


def reshape(tensor, shape):
    """Row-major reshape; a total-extent mismatch raises ValueError.

    Thin alias for ``np.reshape`` kept so the data-layout contract (C order,
    error on mismatched element count) has a single documented home.
    """
    return np.reshape(np.asarray(tensor), shape)


@dataclass
class SvdFactors:
    """Thin SVD triple.

    u : (m, r) with orthonormal columns
    sigma : (r,) nonnegative, descending
    v : (n, r) with orthonormal columns,  r = min(m, n)
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    def reconstruct(self):
        return (self.u * self.sigma) @ self.v.T


def _rotation_rounds(n):
    """Round-robin schedule: n-1 rounds of disjoint column pairs (circle method)."""
    slots = list(range(n)) if n % 2 == 0 else list(range(n)) + [-1]
    rounds = []
    for _ in range(len(slots) - 1):
        pairs = []
        for i in range(len(slots) // 2):
            p, q = slots[i], slots[len(slots) - 1 - i]
            if p >= 0 and q >= 0:
                pairs.append((min(p, q), max(p, q)))
        rounds.append(np.asarray(pairs, dtype=np.intp))
        # rotate all slots but the first
        slots = [slots[0]] + [slots[-1]] + slots[1:-1]
    return rounds


def _jacobi_orthogonalize(a, v, tol, max_sweeps, shape_note):
    """Orthogonalize the columns of ``a`` in place, accumulating rotations in ``v``.

    Rotations for a pair (p, q) are skipped once |a_p . a_q| <= tol * |a_p| * |a_q|;
    a sweep with no rotations at all means convergence.
    """
    n = a.shape[1]
    if n < 2:
        return
    rounds = _rotation_rounds(n)
    tol2 = tol * tol
    for _ in range(max_sweeps):
        rotated = 0
        for pairs in rounds:
            p, q = pairs[:, 0], pairs[:, 1]
            ap, aq = a[:, p], a[:, q]
            alpha = np.einsum("ij,ij->j", ap, ap)
            beta = np.einsum("ij,ij->j", aq, aq)
            gamma = np.einsum("ij,ij->j", ap, aq)
            act = gamma * gamma > tol2 * alpha * beta
            if not act.any():
                continue
            rotated += int(act.sum())
            pi, qi = p[act], q[act]
            ap, aq = ap[:, act], aq[:, act]
            g = gamma[act]
            zeta = (beta[act] - alpha[act]) / (2.0 * g)
            sgn = np.where(zeta >= 0.0, 1.0, -1.0)
            t = sgn / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            a[:, pi] = c * ap - s * aq
            a[:, qi] = s * ap + c * aq
            vp, vq = v[:, pi], v[:, qi]
            v[:, pi] = c * vp - s * vq
            v[:, qi] = s * vp + c * vq
        if rotated == 0:
            return
    raise SvdConvergenceError(
        f"one-sided Jacobi SVD did not converge for a {shape_note} matrix "
        f"within {max_sweeps} sweeps"
    )


def _complete_zero_columns(u, zero_cols):
    # Deterministic Gram-Schmidt completion: first standard basis vector whose
    # residual against the existing columns keeps norm > 0.5.
    m = u.shape[0]
    for j in zero_cols:
        for k in range(m):
            e = np.zeros(m, dtype=u.dtype)
            e[k] = 1.0
            r = e - u @ (u.T @ e)
            nrm = np.sqrt(r @ r)
            if nrm > 0.5:
                u[:, j] = r / nrm
                break
        else:  # pragma: no cover - unreachable for r <= min(m, n)
            raise NumericalError("basis completion failed")


def _fix_signs(u, v):
    # First nonzero entry of each U column nonnegative; flip U and V together.
    for j in range(u.shape[1]):
        col = u[:, j]
        nz = np.nonzero(col)[0]
        if nz.size and col[nz[0]] < 0:
            u[:, j] = -col
            v[:, j] = -v[:, j]


def svd_thin(mat, max_sweeps=MAX_SWEEPS):
    """Thin SVD ``mat = u @ diag(sigma) @ v.T`` via one-sided Jacobi.

    Works on the Gram-reduced side (the transpose is factored when m < n so
    rotations always act on min(m, n) columns). Deterministic: a fixed
    round-robin rotation order, a stable descending sort of the singular
    values, and a fixed sign convention (first nonzero entry of each column
    of ``u`` nonnegative).

    Raises
    ------
    ValueError
        for non-2D or non-finite input.
    SvdConvergenceError
        if the sweep cap is hit; the message names the matrix dimensions.
    """
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] == 0 or mat.shape[1] == 0:
        raise ValueError(f"svd_thin expects a nonempty 2-D matrix, got shape {mat.shape}")
    if mat.dtype not in (np.float32, np.float64):
        mat = mat.astype(np.float64)
    require_finite(mat, "svd_thin input")

    m, n = mat.shape
    transposed = m < n
    a = (mat.T if transposed else mat).astype(mat.dtype, copy=True)
    rows, r = a.shape  # rows >= r
    v = np.eye(r, dtype=a.dtype)
    tol = _JACOBI_TOL[a.dtype]
    _jacobi_orthogonalize(a, v, tol, max_sweeps, f"{m}x{n}")

    norms = np.sqrt(np.einsum("ij,ij->j", a, a))
    order = np.argsort(-norms, kind="stable")
    sigma = norms[order]
    u = a[:, order]
    v = v[:, order]
    nonzero = sigma > 0.0
    u[:, nonzero] = u[:, nonzero] / sigma[nonzero]
    u[:, ~nonzero] = 0.0
    if (~nonzero).any():
        _complete_zero_columns(u, np.nonzero(~nonzero)[0])

    if transposed:
        u, v = v, u
    _fix_signs(u, v)
    return SvdFactors(u=u, sigma=sigma, v=v)
