"""Grassmann-manifold utilities: geodesics, principal angles, distances.

Points of Gr(n, p) are represented by column-orthonormal n x p matrices;
tangent vectors at ``[U]`` are n x p matrices ``D`` with ``U^T D = 0``.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import small_svd

TANGENT_TOL = 1e-10


def _f64(x):
    return np.asarray(x, dtype=np.float64)


@dataclass(frozen=True)
class TangentVector:
    delta: np.ndarray
    base: np.ndarray

    def __post_init__(self):
        delta, base = _f64(self.delta), _f64(self.base)
        if delta.shape != base.shape:
            raise ValueError(f"delta {delta.shape} and base {base.shape} differ in shape")
        leak = np.linalg.norm(base.T @ delta)
        if leak > TANGENT_TOL * max(np.linalg.norm(delta), np.finfo(float).tiny):
            raise ValueError(f"delta is not horizontal at base: ||U^T D|| = {leak:.3e}")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "base", base)


@dataclass(frozen=True)
class RankOneTangent:
    """The tangent vector ``s * q w^T`` at ``base``."""

    q: np.ndarray
    w: np.ndarray
    s: float
    base: np.ndarray

    def __post_init__(self):
        q, w, base = _f64(self.q), _f64(self.w), _f64(self.base)
        if base.shape != (q.size, w.size):
            raise ValueError("base shape does not match q and w")
        if abs(np.linalg.norm(q) - 1.0) > 1e-12 or abs(np.linalg.norm(w) - 1.0) > 1e-12:
            raise ValueError("q and w must be unit vectors")
        if np.linalg.norm(base.T @ q) > TANGENT_TOL:
            raise ValueError("q must be orthogonal to ran(base)")
        if self.s < 0:
            raise ValueError("s must be nonnegative")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "base", base)

    def as_matrix(self):
        return self.s * np.outer(self.q, self.w)


def geodesic_general(base, delta, t):
    """Evaluate ``[U Psi cos(tS) Psi^T + Phi sin(tS) Psi^T]`` for ``Delta = Phi S Psi^T``."""
    if not isinstance(delta, TangentVector):
        delta = TangentVector(delta, base)
    U = _f64(base)
    if U.shape != delta.delta.shape:
        raise ValueError("base and delta differ in shape")
    svd = small_svd(delta.delta)
    phi, s, psi = svd.u_factor, svd.singular_values, svd.v_factor
    return (U @ psi) * np.cos(t * s) @ psi.T + (phi * np.sin(t * s)) @ psi.T


def geodesic_rank1(tv, t):
    """Evaluate ``U + ((cos(ts) - 1) U w + sin(ts) q) w^T`` in O(np)."""
    ts = t * tv.s
    x = (np.cos(ts) - 1.0) * (tv.base @ tv.w) + np.sin(ts) * tv.q
    return tv.base + np.outer(x, tv.w)


def principal_angles(U, V):
    """Principal angles between ``ran(U)`` and ``ran(V)``, ascending, in radians.

    Cosines come from the singular values of ``U^T V`` and sines from those of
    ``V - U (U^T V)``. Angles whose sine is below ``1/sqrt(2)`` are taken from
    the sines, the rest from the cosines, which keeps small angles accurate
    to rounding level instead of ``sqrt(eps)``.
    """
    U, V = _f64(U), _f64(V)
    if U.shape != V.shape:
        raise ValueError(f"shape mismatch: {U.shape} vs {V.shape}")
    C = U.T @ V
    cosines = np.clip(small_svd(C).singular_values, 0.0, 1.0)
    sines = np.clip(small_svd(V - U @ C).singular_values[::-1], 0.0, 1.0)
    from_cos = np.arccos(cosines)
    from_sin = np.arcsin(sines)
    thetas = np.where(sines < np.sqrt(0.5), from_sin, from_cos)
    return np.sort(thetas)


def subspace_distance(U, V):
    """Riemannian distance ``||theta||_2`` between ``ran(U)`` and ``ran(V)``."""
    return float(np.linalg.norm(principal_angles(U, V)))


def tangent_from_update(qty, base):
    """The unit-speed direction ``q w^T`` of a geodesic update."""
    return RankOneTangent(qty.q, qty.w_unit, 1.0, base)
