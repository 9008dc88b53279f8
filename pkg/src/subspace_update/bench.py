"""Timing and operation counting for the update methods.

Operation counts come from running the unmodified update code on numpy
object arrays of :class:`CountingScalar`, which tallies every arithmetic
operation into the active :class:`FlopCounter`. Outside a counter the
scalars compute without counting.

Convention: the reported ``flops`` treats a multiplication together with
its accumulating addition as a single operation (multiply-add), plus every
division, square root and inverse trigonometric call.
"""

import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .core import Factorization, RankOneUpdate
from .streaming import Method, apply_update

_ACTIVE = []


@dataclass(frozen=True)
class OpCount:
    mults: int = 0
    adds: int = 0
    divs_sqrts: int = 0

    @property
    def flops(self):
        return self.mults + max(self.adds - self.mults, 0) + self.divs_sqrts

    def __sub__(self, other):
        return OpCount(
            self.mults - other.mults, self.adds - other.adds, self.divs_sqrts - other.divs_sqrts
        )


class FlopCounter:
    """Context manager collecting counts from :class:`CountingScalar` arithmetic.

    Not thread-safe.
    """

    def __init__(self):
        self.mults = self.adds = self.divs_sqrts = 0

    def __enter__(self):
        _ACTIVE.append(self)
        return self

    def __exit__(self, *exc):
        _ACTIVE.remove(self)
        return False

    @property
    def count(self):
        return OpCount(self.mults, self.adds, self.divs_sqrts)


def _tick(kind):
    if _ACTIVE:
        c = _ACTIVE[-1]
        setattr(c, kind, getattr(c, kind) + 1)


def _val(x):
    return x.v if isinstance(x, CountingScalar) else x


class CountingScalar:
    """A float that reports each arithmetic operation to the active counter."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = float(v)

    def __repr__(self):
        return f"CountingScalar({self.v!r})"

    def __float__(self):
        return self.v

    def __add__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = _val(o)
        _tick("adds")
        return CountingScalar(self.v + o)

    def __radd__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = _val(o)
        _tick("adds")
        return CountingScalar(o + self.v)

    def __sub__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = _val(o)
        _tick("adds")
        return CountingScalar(self.v - o)

    def __rsub__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = _val(o)
        _tick("adds")
        return CountingScalar(o - self.v)

    def __mul__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = _val(o)
        _tick("mults")
        return CountingScalar(self.v * o)

    def __rmul__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = _val(o)
        _tick("mults")
        return CountingScalar(o * self.v)

    def __truediv__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = _val(o)
        _tick("divs_sqrts")
        return CountingScalar(self.v / o)

    def __rtruediv__(self, o):
        if isinstance(o, np.ndarray):
            return NotImplemented
        o = _val(o)
        _tick("divs_sqrts")
        return CountingScalar(o / self.v)

    def __neg__(self):
        return CountingScalar(-self.v)

    def __pos__(self):
        return self

    def __abs__(self):
        return CountingScalar(abs(self.v))

    def __eq__(self, o):
        return self.v == _val(o)

    def __ne__(self, o):
        return self.v != _val(o)

    def __lt__(self, o):
        return self.v < _val(o)

    def __le__(self, o):
        return self.v <= _val(o)

    def __gt__(self, o):
        return self.v > _val(o)

    def __ge__(self, o):
        return self.v >= _val(o)

    __hash__ = None

    # numpy dispatches ufuncs on object arrays to these methods
    def sqrt(self):
        _tick("divs_sqrts")
        return CountingScalar(math.sqrt(self.v))

    def arccos(self):
        _tick("divs_sqrts")
        return CountingScalar(math.acos(self.v))

    def arcsin(self):
        _tick("divs_sqrts")
        return CountingScalar(math.asin(self.v))


def to_counting(x):
    arr = np.asarray(x, dtype=np.float64)
    out = np.empty(arr.shape, dtype=object)
    flat = out.reshape(-1)
    for i, v in enumerate(arr.reshape(-1)):
        flat[i] = CountingScalar(v)
    return out


def from_counting(x):
    return np.asarray(x).astype(np.float64)


def random_instance(n, p, rng, kind="qr"):
    """A random factorization and an out-of-range update with well-conditioned W."""
    X = rng.standard_normal((n, p))
    f = Factorization.from_qr(X) if kind == "qr" else Factorization.from_svd(X)
    up = RankOneUpdate(rng.standard_normal(n), rng.standard_normal(p))
    return f, up


def count_update_flops(n, p, seed=0):
    """Count the operations of one geodesic update on a random n x p instance."""
    if not n > p >= 1:
        raise ValueError("need n > p >= 1")
    rng = np.random.default_rng(seed)
    f, up = random_instance(n, p, rng)
    fc = Factorization(to_counting(f.u), to_counting(f.w), f.w_kind, check=False)
    upc = RankOneUpdate(to_counting(up.a), to_counting(up.b))
    with FlopCounter() as counter:
        apply_update(fc, upc, Method.GEODESIC)
    return counter.count


def n_proportional_flops(n, p, seed=0):
    """The part of the update's flop count that scales with n.

    Counts are affine in n at fixed p (only the loops over n depend on it),
    so the slope is measured from runs at ``n`` and ``n // 2`` and scaled to ``n``.
    """
    half = n // 2
    if not half > p:
        raise ValueError("need n // 2 > p")
    full = count_update_flops(n, p, seed).flops
    part = count_update_flops(half, p, seed).flops
    return (full - part) * n / (n - half)


@dataclass(frozen=True)
class BenchRow:
    n: int
    p: int
    method: str
    median_ns: float
    mean_ns: float


def time_update(n, p, reps, method=Method.GEODESIC, seed=0):
    """Median and mean wall time of ``reps`` single updates on random instances."""
    if reps < 1:
        raise ValueError("reps must be positive")
    method = Method(method)
    rng = np.random.default_rng(seed)
    f, _ = random_instance(n, p, rng)
    times = []
    for _ in range(reps):
        up = RankOneUpdate(rng.standard_normal(n), rng.standard_normal(p))
        start = time.perf_counter_ns()
        apply_update(f, up, method)
        times.append(time.perf_counter_ns() - start)
    return BenchRow(n, p, method.value, float(statistics.median(times)), float(statistics.fmean(times)))
