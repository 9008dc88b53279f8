"""Apply a sequence of rank-one updates to one factorization."""

import time
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np

from .baselines import _brand_factors, full_refactor, kaufman_update
from .core import (
    DEFLATION_TOL,
    Factorization,
    UpdateKind,
    UpdateOutcome,
    WKind,
    _as_update,
    _check_dims,
    _is_zero,
    deflation_threshold,
    grood_update,
)
from .exceptions import RankDeficientError, UpdateError
from .grassmann import subspace_distance
from .linalg import orthogonal_residual, orthonormality_error

#: Largest n * p for which the tracker keeps the accumulated X around.
RETAIN_LIMIT = 10**6


class Method(str, Enum):
    GEODESIC = "geodesic"
    BRAND = "brand"
    KAUFMAN = "kaufman"
    REFACTOR = "refactor"


@dataclass(frozen=True)
class TrackerConfig:
    reorth_every: int = 0
    deflation_tol: float = DEFLATION_TOL
    method: Method = Method.GEODESIC
    record_distances: bool = True

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.reorth_every < 0:
            raise ValueError("reorth_every must be nonnegative")
        if not self.deflation_tol > 0:
            raise ValueError("deflation_tol must be positive")


@dataclass(frozen=True)
class StepReport:
    step_index: int
    kind: UpdateKind
    distance: Optional[float]
    ortho_drift: float
    recon_residual: Optional[float]
    wall_time_ns: int


def absorb_reorthogonalization(f):
    """Re-orthonormalize ``f.u`` by Householder QR and fold ``R`` into ``W``.

    ``U = Q R`` gives ``U W = Q (R W)``, so the product is preserved while
    the orthonormality drift of ``U`` is reset to rounding level.
    """
    U = np.asarray(f.u, dtype=np.float64)
    Q, R = np.linalg.qr(U)
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    Q = Q * signs
    R = signs[:, None] * R
    if np.min(np.abs(np.diag(R))) < 0.5:
        raise RankDeficientError("U has drifted too far from orthonormality to repair")
    return Factorization(Q, R @ f.w, WKind.GENERAL, check=False)


def _baseline_step(f, up, method, tol):
    """One update with a non-geodesic method, classified like ``grood_update``."""
    up = _as_update(up)
    _check_dims(f, up)
    if _is_zero(up.b):
        return UpdateOutcome(UpdateKind.NO_OP, f, 0.0)
    _, q_norm, coeffs = orthogonal_residual(f.u, up.a, return_coeffs=True)
    if not q_norm > deflation_threshold(np.hypot(q_norm, np.linalg.norm(coeffs)), tol):
        # in-range updates keep the subspace; all methods share that branch
        return grood_update(f, up, tol)
    if method is Method.BRAND:
        u_new, w_new = _brand_factors(f, up, tol)
        g = Factorization(u_new, w_new, WKind.DIAGONAL_TIMES_ORTHOGONAL, check=False)
    elif method is Method.KAUFMAN:
        u_new, r_new = kaufman_update(f, up, tol)
        g = Factorization(u_new, r_new, WKind.UPPER_TRIANGULAR, check=False)
    else:
        g = full_refactor(f.reconstruct() + np.outer(up.a, up.b))
    return UpdateOutcome(UpdateKind.GENERIC, g, np.nan)


def apply_update(f, up, method=Method.GEODESIC, tol=DEFLATION_TOL):
    """Single update with the chosen method; returns an :class:`UpdateOutcome`.

    Only the geodesic method reports the distance; others leave it NaN.
    """
    method = Method(method)
    if method is Method.GEODESIC:
        return grood_update(f, up, tol)
    return _baseline_step(f, up, method, tol)


def track(f0, updates, cfg=None):
    """Apply ``updates`` in order; return the final factorization and reports.

    When ``n * p <= RETAIN_LIMIT`` the exact accumulated X is carried along
    and the relative residual ``||U W - X||_F / ||X||_F`` is reported.
    Domain errors propagate with ``step_index`` set on the exception.
    """
    cfg = cfg or TrackerConfig()
    n, p = f0.shape
    retain = n * p <= RETAIN_LIMIT
    X = f0.reconstruct() if retain else None
    f = f0
    reports: List[StepReport] = []
    for i, up in enumerate(updates):
        up = _as_update(up)
        try:
            start = time.perf_counter_ns()
            out = apply_update(f, up, cfg.method, cfg.deflation_tol)
            elapsed = time.perf_counter_ns() - start
        except UpdateError as exc:
            exc.step_index = i
            raise
        g = out.factorization
        distance = None
        if cfg.record_distances:
            if out.kind is not UpdateKind.GENERIC:
                distance = 0.0
            elif cfg.method is Method.GEODESIC:
                distance = out.distance
            else:
                distance = subspace_distance(f.u, g.u)
        if cfg.reorth_every and (i + 1) % cfg.reorth_every == 0:
            try:
                g = absorb_reorthogonalization(g)
            except UpdateError as exc:
                exc.step_index = i
                raise
        residual = None
        if retain:
            X += np.outer(up.a, up.b)
            x_norm = np.linalg.norm(X)
            diff = np.linalg.norm(g.reconstruct() - X)
            residual = float(diff / x_norm) if x_norm > 0 else float(diff)
        reports.append(
            StepReport(
                step_index=i,
                kind=out.kind,
                distance=distance,
                ortho_drift=orthonormality_error(g.u),
                recon_residual=residual,
                wall_time_ns=elapsed,
            )
        )
        f = g
    return f, reports
