"""Geodesic rank-one updates of orthogonal factorizations ``X = U W``."""

from .baselines import (
    Classification,
    UpdateClassification,
    brand_update,
    elementary_update,
    full_refactor,
    kaufman_update,
    wedderburn_classify,
)
from .core import (
    Factorization,
    RankOneUpdate,
    UpdateKind,
    UpdateOutcome,
    UpdateQuantities,
    WKind,
    compute_quantities,
    grood_update,
    projector_update,
    subspace_distance_from_quantities,
    update_u,
    update_w,
)
from .estimator import SubspaceUpdater
from .exceptions import (
    DeflatingUpdateError,
    DimensionMismatchError,
    InRangeError,
    NoConvergenceError,
    ParseError,
    RankDeficientError,
    SingularMatrixError,
    UpdateError,
    ZeroUpdateError,
)
from .grassmann import (
    RankOneTangent,
    TangentVector,
    geodesic_general,
    geodesic_rank1,
    principal_angles,
    subspace_distance,
    tangent_from_update,
)
from .streaming import Method, StepReport, TrackerConfig, absorb_reorthogonalization, track

__version__ = "0.1.0"
