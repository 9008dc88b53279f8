"""Closed-form rank-one update of an orthogonal factorization ``X = U W``.

For ``X_new = X + a b^T`` with ``a`` outside ``ran(U)`` the new orthonormal
factor is reached by a single geodesic step on the Grassmann manifold,
which amounts to one rank-one update of ``U``::

    U_new = U + (alpha * U w + beta * q) w^T
    W_new = W + (U^T a + gamma * w) b^T

Both updates cost O(np) for ``n >> p``. The Riemannian distance between
``ran(U)`` and ``ran(U_new)`` falls out of the same scalars.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional

import numpy as np

from .exceptions import (
    DeflatingUpdateError,
    InRangeError,
    ZeroUpdateError,
)
from .linalg import (
    as_work_array,
    orthogonal_residual,
    orthonormality_error,
    rank_one_accumulate,
    solve,
    solve_transposed,
)

#: Relative threshold on ``||(I - U U^T) a||`` below which ``a`` is in range.
DEFLATION_TOL = 1e-12

#: Relative threshold on ``|1 + b^T x|`` separating regular and deflating
#: in-range updates.
REGULARITY_TOL = 1e-10

ORTHONORMAL_TOL = 1e-10


class WKind(str, Enum):
    """Provenance of the W factor."""

    GENERAL = "general"
    UPPER_TRIANGULAR = "upper_triangular"  # QR: W = R
    DIAGONAL_TIMES_ORTHOGONAL = "diagonal_times_orthogonal"  # SVD: W = S V^T


class UpdateKind(str, Enum):
    GENERIC = "Generic"
    IN_RANGE_REGULAR = "InRangeRegular"
    DEFLATING = "Deflating"
    NO_OP = "NoOp"


class RankOneUpdate(NamedTuple):
    """The perturbation ``a b^T`` with ``a`` of length n and ``b`` of length p."""

    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class Factorization:
    """``X = u @ w`` with column-orthonormal ``u`` (n, p) and regular ``w`` (p, p).

    Orthonormality of ``u`` is checked on construction (``||u^T u - I||_F``
    at most 1e-10). Regularity of ``w`` is only checked when a solve needs it.
    """

    u: np.ndarray
    w: np.ndarray
    w_kind: WKind = WKind.GENERAL
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        u = as_work_array(self.u)
        w = as_work_array(self.w)
        if u.ndim != 2 or w.ndim != 2:
            raise ValueError("u and w must be matrices")
        n, p = u.shape
        if w.shape != (p, p):
            raise ValueError(f"w must be {p}x{p}, got {w.shape}")
        if p > n:
            raise ValueError(f"need p <= n, got p={p}, n={n}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "w_kind", WKind(self.w_kind))
        if self.check:
            err = orthonormality_error(u)
            if not err <= ORTHONORMAL_TOL:
                raise ValueError(f"u is not column-orthonormal: ||U^T U - I||_F = {err:.3e}")

    @property
    def shape(self):
        return self.u.shape

    @classmethod
    def from_qr(cls, X):
        """Factor ``X`` with a Householder QR (``W = R``, nonnegative diagonal)."""
        from .baselines import full_refactor

        return full_refactor(X)

    @classmethod
    def from_svd(cls, X):
        """Factor ``X`` with a thin SVD (``W = diag(s) V^T``)."""
        X = np.asarray(X, dtype=np.float64)
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
        return cls(U, s[:, None] * Vt, WKind.DIAGONAL_TIMES_ORTHOGONAL)

    def reconstruct(self):
        return self.u @ self.w


@dataclass(frozen=True)
class UpdateQuantities:
    """Scalars and vectors defining the geodesic update.

    ``proj_coeffs`` is ``U^T a``; it is kept so the W update needs no
    further O(np) work.
    """

    q_tilde: np.ndarray
    q_tilde_norm: float
    q: np.ndarray
    w_tilde: np.ndarray
    w_tilde_norm: float
    w_unit: np.ndarray
    omega: float
    g_norm: float
    alpha: float
    beta: float
    gamma: float
    t_star: float
    proj_coeffs: np.ndarray


@dataclass(frozen=True)
class UpdateOutcome:
    kind: UpdateKind
    factorization: Factorization
    distance: float
    quantities: Optional[UpdateQuantities] = None


def _as_update(up):
    a, b = up
    return RankOneUpdate(as_work_array(a), as_work_array(b))


def _check_dims(f, up):
    n, p = f.shape
    if up.a.shape != (n,) or up.b.shape != (p,):
        raise ValueError(
            f"update shapes a {up.a.shape}, b {up.b.shape} do not fit a {n}x{p} factorization"
        )


def _is_zero(v):
    return not any(x != 0 for x in v)


def deflation_threshold(a_norm, tol=DEFLATION_TOL):
    """Absolute threshold ``tol * max(1, ||a||)`` on the residual norm."""
    return tol * max(1.0, float(a_norm))


def is_deflating(x, b, tol=REGULARITY_TOL):
    """True if ``I_p + x b^T`` is (numerically) singular.

    ``det(I + x b^T) = 1 + b^T x``; the test is relative to
    ``max(1, ||b|| ||x||)`` since that bounds the rounding in ``b^T x``.
    """
    x = np.asarray(x, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    det = 1.0 + float(b @ x)
    scale = max(1.0, float(np.linalg.norm(b) * np.linalg.norm(x)))
    return abs(det) <= tol * scale


def _quantities(f, a, b, q_tilde, q_norm, coeffs):
    w_tilde = solve_transposed(f.w, b, upper=f.w_kind is WKind.UPPER_TRIANGULAR)
    w_norm = np.sqrt(w_tilde @ w_tilde)
    if not w_norm > 0:
        raise ZeroUpdateError("W^{-T} b vanished")
    q = q_tilde / q_norm
    omega = (1.0 - coeffs @ w_tilde) / q_norm
    g_norm = np.sqrt(w_norm * w_norm + omega * omega)
    w_unit = w_tilde / w_norm
    cos_t = abs(omega) / g_norm
    alpha = cos_t - 1.0
    # sign(0) := +1
    beta = -w_norm / g_norm if omega >= 0 else w_norm / g_norm
    qa = q @ a
    gamma = beta * qa - alpha * q_norm * omega / w_norm
    t_star = np.arcsin(beta)
    return UpdateQuantities(
        q_tilde=q_tilde,
        q_tilde_norm=q_norm,
        q=q,
        w_tilde=w_tilde,
        w_tilde_norm=w_norm,
        w_unit=w_unit,
        omega=omega,
        g_norm=g_norm,
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        t_star=t_star,
        proj_coeffs=coeffs,
    )


def compute_quantities(f, up, tol=DEFLATION_TOL):
    """Compute the geodesic-update quantities for ``f`` and ``up``.

    Raises
    ------
    ZeroUpdateError
        ``b == 0``.
    InRangeError
        ``||(I - U U^T) a|| <= tol * max(1, ||a||)``.
    SingularMatrixError
        From the transposed solve with ``W``.
    """
    up = _as_update(up)
    _check_dims(f, up)
    if _is_zero(up.b):
        raise ZeroUpdateError("b is zero")
    q_tilde, q_norm, coeffs = orthogonal_residual(f.u, up.a, return_coeffs=True)
    a_norm = np.sqrt(float(q_norm) ** 2 + float(coeffs @ coeffs))
    if not q_norm > deflation_threshold(a_norm, tol):
        raise InRangeError(f"||(I - UU^T) a|| = {float(q_norm):.3e} is below tolerance")
    return _quantities(f, up.a, up.b, q_tilde, q_norm, coeffs)


def update_u(U, qty):
    """Return ``U + (alpha U w + beta q) w^T``."""
    U = as_work_array(U)
    x = U @ (qty.alpha * qty.w_unit) + qty.beta * qty.q
    return rank_one_accumulate(U, x, qty.w_unit)


def update_w(W, qty, up):
    """Return ``W + (U^T a + gamma w) b^T`` using the cached ``U^T a``."""
    b = as_work_array(up[1])
    return rank_one_accumulate(W, qty.proj_coeffs + qty.gamma * qty.w_unit, b)


def subspace_distance_from_quantities(qty):
    """Riemannian distance ``arccos(|omega| / ||g||)`` in radians."""
    ratio = abs(qty.omega) / qty.g_norm
    return float(np.arccos(min(1.0, float(ratio))))


def grood_update(f, up, tol=DEFLATION_TOL):
    """Update ``f`` for ``X + a b^T`` and classify the update.

    * ``b == 0``: ``NoOp``, ``f`` returned unchanged.
    * ``a`` in ``ran(U)`` and ``I + x b^T`` regular (``a = X x``):
      ``InRangeRegular``, ``U`` kept and ``W_new = W + (U^T a) b^T``.
    * ``a`` in ``ran(U)`` and ``I + x b^T`` singular: raises
      :class:`DeflatingUpdateError`.
    * otherwise ``Generic``: the geodesic update.

    ``tol`` is the relative in-range threshold on ``||(I - U U^T) a||``.
    """
    up = _as_update(up)
    _check_dims(f, up)
    if _is_zero(up.b):
        return UpdateOutcome(UpdateKind.NO_OP, f, 0.0)
    q_tilde, q_norm, coeffs = orthogonal_residual(f.u, up.a, return_coeffs=True)
    a_norm = np.sqrt(float(q_norm) ** 2 + float(coeffs @ coeffs))
    if not q_norm > deflation_threshold(a_norm, tol):
        x = solve(f.w, coeffs)
        if is_deflating(x, up.b):
            raise DeflatingUpdateError("update reduces the rank of X")
        w_new = rank_one_accumulate(f.w, coeffs, up.b)
        return UpdateOutcome(
            UpdateKind.IN_RANGE_REGULAR,
            Factorization(f.u, w_new, WKind.GENERAL, check=False),
            0.0,
        )
    qty = _quantities(f, up.a, up.b, q_tilde, q_norm, coeffs)
    u_new = update_u(f.u, qty)
    w_new = update_w(f.w, qty, up)
    return UpdateOutcome(
        UpdateKind.GENERIC,
        Factorization(u_new, w_new, WKind.GENERAL, check=False),
        subspace_distance_from_quantities(qty),
        qty,
    )


def projector_update(f, up, tol=DEFLATION_TOL):
    """Orthogonal projector onto ``ran(X + a b^T)`` as an n x n matrix.

    Built from ``(U, q)`` and the null vector ``g = (w_tilde, omega)`` of
    ``K^T``; meant for verification at modest n.
    """
    qty = compute_quantities(f, up, tol)
    U = np.asarray(f.u, dtype=np.float64)
    q = np.asarray(qty.q, dtype=np.float64)
    v = U @ np.asarray(qty.w_tilde, dtype=np.float64) + float(qty.omega) * q
    return U @ U.T + np.outer(q, q) - np.outer(v, v) / float(qty.g_norm) ** 2
