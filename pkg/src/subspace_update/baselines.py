"""Reference update methods used to cross-check the geodesic update.

``brand_update`` and ``kaufman_update`` both go through the (p+1)-column
factorization ``X + a b^T = (U, q) K`` and decompose the small matrix K
(by SVD and by Givens QR respectively), then form ``(U, q) @ K_factor``
at O(np^2) cost.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import (
    DEFLATION_TOL,
    REGULARITY_TOL,
    Factorization,
    WKind,
    _as_update,
    _check_dims,
    _is_zero,
    deflation_threshold,
    is_deflating,
)
from .exceptions import InRangeError, RankDeficientError, ZeroUpdateError
from .linalg import EPS, orthogonal_residual, small_svd, solve


def _augmented(f, up, tol):
    """Return ``(q, K)`` with ``X + a b^T = (U, q) K``."""
    q_tilde, q_norm, coeffs = orthogonal_residual(f.u, up.a, return_coeffs=True)
    a_norm = np.hypot(q_norm, np.linalg.norm(coeffs))
    if not q_norm > deflation_threshold(a_norm, tol):
        raise InRangeError("a lies in ran(U)")
    K = np.vstack([f.w + np.outer(coeffs, up.b), q_norm * up.b[None, :]])
    return q_tilde / q_norm, K


def _brand_factors(f, up, tol=DEFLATION_TOL):
    up = _as_update(up)
    _check_dims(f, up)
    if _is_zero(up.b):
        raise ZeroUpdateError("b is zero")
    q, K = _augmented(f, up, tol)
    svd = small_svd(K)
    u_new = np.column_stack([f.u, q]) @ svd.u_factor
    w_new = svd.singular_values[:, None] * svd.v_factor.T
    return u_new, w_new


def brand_update(f, up, tol=DEFLATION_TOL):
    """Orthonormal basis of ``ran(X + a b^T)`` via the SVD of K."""
    return _brand_factors(f, up, tol)[0]


def _givens(x, y):
    """Return ``(c, s, r)`` with ``[c s; -s c] @ [x; y] = [r; 0]``."""
    r = np.hypot(x, y)
    if r == 0.0:
        return 1.0, 0.0, 0.0
    return x / r, y / r, r


def _givens_qr(K):
    """QR of a tall matrix by Givens rotations, skipping entries already zero.

    Columns are swept left to right; within a column the subdiagonal is
    cleared bottom-up by rotating adjacent rows. Returns ``(Q, R, count)``
    with ``K = Q @ R``, ``Q`` square orthogonal and ``count`` the number
    of rotations applied.
    """
    R = np.array(K, dtype=np.float64)
    m, k = R.shape
    Qt = np.eye(m)
    count = 0
    for j in range(min(k, m - 1)):
        for i in range(m - 1, j, -1):
            if R[i, j] == 0.0:
                continue
            c, s, r = _givens(R[i - 1, j], R[i, j])
            rows = R[[i - 1, i], j:]
            R[i - 1, j:] = c * rows[0] + s * rows[1]
            R[i, j:] = -s * rows[0] + c * rows[1]
            R[i - 1, j], R[i, j] = r, 0.0
            qrows = Qt[[i - 1, i]]
            Qt[i - 1] = c * qrows[0] + s * qrows[1]
            Qt[i] = -s * qrows[0] + c * qrows[1]
            count += 1
    return Qt.T, R, count


def kaufman_update(f, up, tol=DEFLATION_TOL):
    """QR-style update: Givens-reduce K and return ``(U_new, R_new)``.

    ``U_new R_new = U W + a b^T`` with ``R_new`` upper triangular.
    """
    up = _as_update(up)
    _check_dims(f, up)
    q, K = _augmented(f, up, tol)
    Q, R, _ = _givens_qr(K)
    p = f.shape[1]
    u_new = np.column_stack([f.u, q]) @ Q[:, :p]
    return u_new, R[:p]


def elementary_update(U, up, tol=DEFLATION_TOL):
    """Orthonormal basis of ``ran(U + a b^T)`` by a coordinate change.

    Rotating coordinates so that ``b`` becomes a multiple of ``e_1`` moves
    the whole update into one column, which is then re-orthogonalized
    against the others. The rotation is never formed::

        U_new = U + v (b / ||b||)^T
        v = ((1 + a^T U b) / (||q~|| ||g||) - 1) U b / ||b|| + (||b|| / ||g||) q
    """
    U = np.asarray(U, dtype=np.float64)
    up = _as_update(up)
    a, b = up
    if a.shape != (U.shape[0],) or b.shape != (U.shape[1],):
        raise ValueError("update shapes do not fit U")
    b_norm = np.linalg.norm(b)
    if b_norm == 0:
        raise ZeroUpdateError("b is zero")
    q_tilde, q_norm, coeffs = orthogonal_residual(U, a, return_coeffs=True)
    if not q_norm > deflation_threshold(np.hypot(q_norm, np.linalg.norm(coeffs)), tol):
        raise InRangeError("a lies in ran(U)")
    q = q_tilde / q_norm
    w = b / b_norm
    lead = 1.0 + coeffs @ b
    g_norm = np.sqrt((lead / q_norm) ** 2 + b_norm**2)
    v = (lead / (q_norm * g_norm) - 1.0) * (U @ w) + (b_norm / g_norm) * q
    return U + np.outer(v, w)


def full_refactor(X):
    """Householder QR of ``X`` from scratch, normalized to ``diag(R) >= 0``.

    Raises
    ------
    RankDeficientError
        If some ``|R_kk| < max(n, p) * eps * max|X|``, or if the smallest
        singular value of ``R`` is below ``max(n, p) * eps * ||R||_2``.
        Unpivoted QR does not reveal rank, so the pivot test alone misses
        matrices that are singular only to rounding level.
    """
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    if p > n:
        raise ValueError("need p <= n")
    Q, R = np.linalg.qr(X)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q = Q * signs
    R = signs[:, None] * R
    thresh = max(n, p) * EPS * np.max(np.abs(X)) if X.size else 0.0
    diag = np.abs(np.diag(R))
    if not np.all(diag > thresh):
        k = int(np.argmin(diag))
        raise RankDeficientError(f"|R[{k},{k}]| = {diag[k]:.3e} below {thresh:.3e}")
    sv = np.linalg.svd(R, compute_uv=False)
    if not sv[-1] > max(n, p) * EPS * sv[0]:
        raise RankDeficientError(f"smallest singular value {sv[-1]:.3e} of R is negligible")
    return Factorization(Q, np.triu(R), WKind.UPPER_TRIANGULAR, check=False)


class Classification(str, Enum):
    OUT_OF_RANGE = "OutOfRange"
    IN_RANGE_REGULAR = "InRangeRegular"
    IN_RANGE_DEFLATING = "InRangeDeflating"


@dataclass(frozen=True)
class UpdateClassification:
    """Wedderburn-type classification; ``coeffs`` solves ``X x = a`` when in range."""

    kind: Classification
    coeffs: Optional[np.ndarray] = None


def wedderburn_classify(f, up, tol=REGULARITY_TOL):
    """Decide whether ``X + a b^T`` keeps, moves or deflates ``ran(X)``.

    The rank can only drop when ``a = X x``; it then drops exactly when
    ``1 + b^T x = 0``.
    """
    up = _as_update(up)
    _check_dims(f, up)
    q_tilde, q_norm, coeffs = orthogonal_residual(f.u, up.a, return_coeffs=True)
    a_norm = np.linalg.norm(up.a)
    if q_norm > tol * a_norm:
        return UpdateClassification(Classification.OUT_OF_RANGE)
    x = solve(f.w, coeffs)
    if is_deflating(x, up.b, tol):
        return UpdateClassification(Classification.IN_RANGE_DEFLATING, x)
    return UpdateClassification(Classification.IN_RANGE_REGULAR, x)
