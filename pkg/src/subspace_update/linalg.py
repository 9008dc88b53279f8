"""Dense kernels: rank-one accumulation, Gram-Schmidt residuals, transposed
solves and a one-sided Jacobi SVD for small matrices.

The kernels are written against the plain numpy operator surface
(``@``, ``np.outer``, elementwise arithmetic) so the same code runs on
float64 arrays and on object arrays of instrumented scalars
(see :mod:`subspace_update.bench`).
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import NoConvergenceError, SingularMatrixError

EPS = np.finfo(np.float64).eps

#: DGKS threshold: a second Gram-Schmidt pass runs when the residual keeps
#: less than this fraction of the input norm.
REORTH_ETA = 1.0 / np.sqrt(2.0)

#: Largest min(rows, cols) accepted by :func:`small_svd`.
SMALL_SVD_LIMIT = 64


def as_work_array(x):
    """Return ``x`` as float64, leaving object arrays untouched."""
    arr = np.asarray(x)
    if arr.dtype == object:
        return arr
    return arr.astype(np.float64, copy=False)


def rank_one_accumulate(A, x, y, scale=1.0):
    """Return ``A + scale * x y^T`` (the BLAS-2 ``ger`` operation)."""
    A = as_work_array(A)
    x = as_work_array(x)
    y = as_work_array(y)
    if A.ndim != 2 or x.shape != (A.shape[0],) or y.shape != (A.shape[1],):
        raise ValueError(
            f"shape mismatch: A {A.shape}, x {x.shape}, y {y.shape}"
        )
    if scale != 1.0:
        y = scale * y
    out = np.outer(x, y)
    out += A
    return out


def orthogonal_residual(U, a, return_coeffs=False):
    """Project ``a`` onto the orthogonal complement of ``ran(U)``.

    One classical Gram-Schmidt pass is followed by a second pass when the
    residual lost more than ``1 - 1/sqrt(2)`` of the norm of ``a`` (the
    Kahan/Parlett "twice is enough" test). The test compares
    ``||q||^2`` against ``||q||^2 + ||U^T a||^2`` so it costs O(p).

    Returns
    -------
    q_tilde : ndarray (n,)
    norm : float
        ``||q_tilde||``; zero signals ``a in ran(U)``.
    coeffs : ndarray (p,), only if ``return_coeffs``
        ``U^T a`` including the correction from the second pass.
    """
    U = as_work_array(U)
    a = as_work_array(a)
    if a.shape != (U.shape[0],):
        raise ValueError(f"shape mismatch: U {U.shape}, a {a.shape}")
    coeffs = U.T @ a
    q = a - U @ coeffs
    norm2 = q @ q
    if norm2 < REORTH_ETA**2 * (norm2 + coeffs @ coeffs):
        extra = U.T @ q
        q = q - U @ extra
        coeffs = coeffs + extra
        norm2 = q @ q
    norm = np.sqrt(norm2)
    if return_coeffs:
        return q, norm, coeffs
    return q, norm


def solve_transposed(W, b, upper=False):
    """Return ``x`` with ``W^T x = -b``.

    Gaussian elimination with partial pivoting on ``W^T``; when ``upper`` is
    set, ``W^T`` is lower triangular and plain forward substitution is used.

    Raises
    ------
    SingularMatrixError
        If a pivot is smaller than ``p * eps * max|W|``.
    """
    W = as_work_array(W)
    b = as_work_array(b)
    p = W.shape[0]
    if W.ndim != 2 or W.shape != (p, p) or b.shape != (p,):
        raise ValueError(f"shape mismatch: W {W.shape}, b {b.shape}")
    scale = float(np.max(np.abs(W))) if W.size else 0.0
    thresh = p * EPS * scale
    M = W.T.copy()
    rhs = -b
    if upper:
        x = np.empty_like(rhs)
        for k in range(p):
            if not abs(M[k, k]) > thresh:
                raise SingularMatrixError(f"pivot {k} below {thresh:.3e}")
            acc = rhs[k] - M[k, :k] @ x[:k] if k else rhs[k]
            x[k] = acc / M[k, k]
        return x

    rhs = rhs.copy()
    for k in range(p):
        piv = k + int(np.argmax(np.abs(M[k:, k])))
        if not abs(M[piv, k]) > thresh:
            raise SingularMatrixError(f"pivot {k} below {thresh:.3e}")
        if piv != k:
            M[[k, piv]] = M[[piv, k]]
            rhs[[k, piv]] = rhs[[piv, k]]
        if k + 1 < p:
            factors = M[k + 1:, k] / M[k, k]
            M[k + 1:, k:] -= np.outer(factors, M[k, k:])
            rhs[k + 1:] -= factors * rhs[k]
    x = np.empty_like(rhs)
    for k in range(p - 1, -1, -1):
        acc = rhs[k] - M[k, k + 1:] @ x[k + 1:] if k + 1 < p else rhs[k]
        x[k] = acc / M[k, k]
    return x


def solve(W, c):
    """Return ``x`` with ``W x = c``."""
    W = as_work_array(W)
    return solve_transposed(W.T, -as_work_array(c))


def orthonormality_error(U):
    """Frobenius norm of ``U^T U - I``."""
    U = np.asarray(U, dtype=np.float64)
    return float(np.linalg.norm(U.T @ U - np.eye(U.shape[1])))


@dataclass(frozen=True)
class SvdResult:
    """``A = u_factor @ diag(singular_values) @ v_factor.T``."""

    u_factor: np.ndarray
    singular_values: np.ndarray
    v_factor: np.ndarray


def _round_robin(k):
    """Yield index arrays (left, right) pairing all columns once per sweep."""
    players = list(range(k)) + ([-1] if k % 2 else [])
    m = len(players)
    for _ in range(m - 1):
        left, right = [], []
        for i in range(m // 2):
            i0, i1 = players[i], players[m - 1 - i]
            if i0 >= 0 and i1 >= 0:
                left.append(min(i0, i1))
                right.append(max(i0, i1))
        yield np.array(left, dtype=int), np.array(right, dtype=int)
        players = [players[0]] + [players[-1]] + players[1:-1]


def _complete_columns(Q, missing):
    """Replace columns listed in ``missing`` by an orthonormal completion."""
    m = Q.shape[0]
    keep = [j for j in range(Q.shape[1]) if j not in set(missing)]
    basis = Q[:, keep]
    for j in missing:
        for e in range(m):
            v = np.zeros(m)
            v[e] = 1.0
            for _ in range(2):
                v -= basis @ (basis.T @ v)
            nv = np.linalg.norm(v)
            if nv > 0.5:
                Q[:, j] = v / nv
                basis = np.column_stack([basis, Q[:, j]])
                break
    return Q


def _jacobi(G, max_sweeps):
    """One-sided (Hestenes) Jacobi on the columns of square-or-tall ``G``."""
    k = G.shape[1]
    V = np.eye(k)
    tol = k * EPS
    pairs = list(_round_robin(k))
    for _ in range(max_sweeps):
        rotated = False
        for left, right in pairs:
            if left.size == 0:
                continue
            gi, gj = G[:, left], G[:, right]
            alpha = np.einsum("ij,ij->j", gi, gi)
            beta = np.einsum("ij,ij->j", gj, gj)
            gamma = np.einsum("ij,ij->j", gi, gj)
            active = np.abs(gamma) > tol * np.sqrt(alpha * beta)
            if not active.any():
                continue
            rotated = True
            left, right = left[active], right[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            gi, gj = G[:, left], G[:, right]
            G[:, left] = c * gi - s * gj
            G[:, right] = s * gi + c * gj
            vi, vj = V[:, left], V[:, right]
            V[:, left] = c * vi - s * vj
            V[:, right] = s * vi + c * vj
        if not rotated:
            return G, V
    raise NoConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")


def small_svd(A, max_sweeps=30):
    """Thin SVD of a matrix with ``min(A.shape) <= 64``.

    Tall inputs are first reduced with a Householder QR, then the square
    triangular factor is diagonalized by one-sided Jacobi rotations. Singular
    values are returned in nonincreasing order; ``u_factor`` has orthonormal
    columns even when some singular values vanish.
    """
    A = np.array(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("small_svd expects a matrix")
    m, k = A.shape
    if min(m, k) > SMALL_SVD_LIMIT:
        raise ValueError(f"small_svd is limited to min(rows, cols) <= {SMALL_SVD_LIMIT}")
    if not np.all(np.isfinite(A)):
        raise ValueError("non-finite entries")
    if m < k:
        res = small_svd(A.T, max_sweeps)
        return SvdResult(res.v_factor, res.singular_values, res.u_factor)

    if m > k:
        Q, R = np.linalg.qr(A)
    else:
        Q, R = None, A
    G, V = _jacobi(R.copy(), max_sweeps)
    sigma = np.sqrt(np.einsum("ij,ij->j", G, G))
    order = np.argsort(-sigma, kind="stable")
    sigma, G, V = sigma[order], G[:, order], V[:, order]
    Ur = np.zeros_like(G)
    nz = sigma > 0
    Ur[:, nz] = G[:, nz] / sigma[nz]
    missing = list(np.flatnonzero(~nz))
    if missing:
        Ur = _complete_columns(Ur, missing)
    U = Ur if Q is None else Q @ Ur
    return SvdResult(U, sigma, V)
