"""scikit-learn compatible wrapper around the factorization tracker."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .baselines import full_refactor
from .core import DEFLATION_TOL, Factorization, RankOneUpdate
from .streaming import Method, TrackerConfig, track


class SubspaceUpdater(TransformerMixin, BaseEstimator):
    """Track ``ran(X)`` of an ``n x p`` matrix under rank-one modifications.

    ``fit`` factors ``X = U W`` (QR or SVD); ``partial_fit`` applies
    ``X <- X + a_i b_i^T`` for each row pair of ``A`` and ``B``. The tracked
    subspace lives in ``R^n``, so ``transform`` expects rows of length ``n``
    and returns their coordinates ``Y @ U`` in the current basis.

    Parameters
    ----------
    init : {"qr", "svd"}
        Factorization used by ``fit``.
    method : {"geodesic", "brand", "kaufman", "refactor"}
        Update rule used by ``partial_fit``.
    reorth_every : int
        Re-orthonormalize ``U`` every this many updates (0 disables).
    deflation_tol : float
        Relative threshold below which ``a`` counts as lying in ``ran(U)``.

    Attributes
    ----------
    components_ : ndarray of shape (n, p)
        Orthonormal basis ``U`` of the tracked subspace.
    coef_ : ndarray of shape (p, p)
        ``W`` with ``X = components_ @ coef_``.
    distances_ : list of float
        Riemannian step length of every update applied so far.
    n_updates_ : int
    """

    def __init__(self, init="qr", method="geodesic", reorth_every=0, deflation_tol=DEFLATION_TOL):
        self.init = init
        self.method = method
        self.reorth_every = reorth_every
        self.deflation_tol = deflation_tol

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        if X.shape[1] >= X.shape[0]:
            raise ValueError(f"need more rows than columns, got {X.shape}")
        if self.init == "qr":
            f = full_refactor(X)
        elif self.init == "svd":
            f = Factorization.from_svd(X)
        else:
            raise ValueError(f"unknown init {self.init!r}")
        Method(self.method)
        self._set_factorization(f)
        self.distances_ = []
        self.n_updates_ = 0
        return self

    def _set_factorization(self, f):
        self.factorization_ = f
        self.components_ = f.u
        self.coef_ = f.w

    def partial_fit(self, A, B):
        """Apply the updates ``a_i b_i^T`` for the rows of ``A`` (k, n) and ``B`` (k, p)."""
        check_is_fitted(self, "factorization_")
        n, p = self.factorization_.shape
        A = check_array(A, ensure_2d=False)
        B = check_array(B, ensure_2d=False)
        A = A.reshape(-1, n) if A.ndim == 1 else A
        B = B.reshape(-1, p) if B.ndim == 1 else B
        if A.shape[1] != n or B.shape[1] != p or A.shape[0] != B.shape[0]:
            raise ValueError(f"expected A (k, {n}) and B (k, {p}), got {A.shape} and {B.shape}")
        cfg = TrackerConfig(
            reorth_every=self.reorth_every,
            deflation_tol=self.deflation_tol,
            method=self.method,
        )
        f, reports = track(self.factorization_, [RankOneUpdate(a, b) for a, b in zip(A, B)], cfg)
        self._set_factorization(f)
        self.distances_.extend(r.distance for r in reports)
        self.n_updates_ += len(reports)
        return self

    def transform(self, Y):
        check_is_fitted(self, "factorization_")
        Y = check_array(Y)
        return Y @ self.components_

    def inverse_transform(self, Z):
        check_is_fitted(self, "factorization_")
        Z = check_array(Z)
        return Z @ self.components_.T

    def reconstruct(self):
        """Current ``X = U W``."""
        check_is_fitted(self, "factorization_")
        return self.factorization_.reconstruct()

    def projector(self):
        check_is_fitted(self, "factorization_")
        U = self.components_
        return U @ U.T
