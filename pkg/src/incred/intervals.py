"""Closed intervals, axis-aligned boxes, and annuli.

Every set value in this package is an axis-aligned product of closed
intervals, possibly empty or degenerate: inclusion values, declared
gradient boxes, and reduced direction sets are all boxes. Emptiness is a
canonical distinguished state (never encoded as inverted endpoints), and
degeneracy is exact equality of endpoints, because the systems of
interest are defined with exactly representable constants.

Axis indices reported by :func:`direction_axes` (and consumed elsewhere)
are 1-based, matching the variable names ``x1..xn``; a box of dimension
``n + 1`` uses index ``n + 1`` for its trailing time axis.

Extension point: general convex polytopes, zonotopes and ellipsoids are
deliberately out of scope; the box structure is what makes the reduction
and the bilinear optimizations exact. A richer set representation would
slot in behind the same operations.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Sequence

from .errors import DimensionMismatchError, EmptySetError

__all__ = [
    "Interval",
    "EMPTY_INTERVAL",
    "IntervalBox",
    "Annulus",
    "minkowski_sum",
    "scale",
    "contains",
    "direction_axes",
    "box_hausdorff",
]


class Interval:
    """A closed real interval ``[lo, hi]`` with ``lo <= hi``.

    The empty interval is the module-level singleton
    :data:`EMPTY_INTERVAL` (also reachable as ``Interval.EMPTY``); it has
    no endpoints and accessing them raises :class:`EmptySetError`.
    """

    __slots__ = ("_lo", "_hi")

    EMPTY: "Interval"  # assigned after _EmptyInterval is defined

    def __init__(self, lo: float, hi: float):
        lo = float(lo)
        hi = float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"inverted interval endpoints [{lo}, {hi}]")
        self._lo = lo
        self._hi = hi

    @classmethod
    def point(cls, v: float) -> Interval:
        """Degenerate interval ``[v, v]``."""
        return cls(v, v)

    @property
    def lo(self) -> float:
        return self._lo

    @property
    def hi(self) -> float:
        return self._hi

    @property
    def is_empty(self) -> bool:
        return False

    @property
    def is_degenerate(self) -> bool:
        """True iff ``lo == hi`` (exact comparison)."""
        return self._lo == self._hi

    @property
    def width(self) -> float:
        return self._hi - self._lo

    @property
    def center(self) -> float:
        return (self._lo + self._hi) / 2.0

    def contains(self, v: float) -> bool:
        return self._lo <= v <= self._hi

    def encloses(self, other: Interval) -> bool:
        """True iff ``other`` is a subset of this interval."""
        if other.is_empty:
            return True
        return self._lo <= other.lo and other.hi <= self._hi

    def add(self, other: Interval) -> Interval:
        """Minkowski sum of two intervals."""
        if other.is_empty:
            return EMPTY_INTERVAL
        return Interval(self._lo + other.lo, self._hi + other.hi)

    __add__ = add

    def scale(self, c: float) -> Interval:
        a = c * self._lo
        b = c * self._hi
        return Interval(min(a, b), max(a, b))

    def intersect(self, other: Interval) -> Interval:
        if other.is_empty:
            return EMPTY_INTERVAL
        lo = max(self._lo, other.lo)
        hi = min(self._hi, other.hi)
        if lo > hi:
            return EMPTY_INTERVAL
        return Interval(lo, hi)

    def inflate(self, margin: float) -> Interval:
        return Interval(self._lo - margin, self._hi + margin)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty
        return self._lo == other.lo and self._hi == other.hi

    def __hash__(self) -> int:
        return hash((self._lo, self._hi))

    def __repr__(self) -> str:
        return f"[{self._lo}, {self._hi}]"


class _EmptyInterval(Interval):
    """Canonical empty interval; see :class:`Interval`."""

    __slots__ = ()

    def __init__(self):  # no endpoints to store
        pass

    @property
    def lo(self) -> float:
        raise EmptySetError("the empty interval has no endpoints")

    @property
    def hi(self) -> float:
        raise EmptySetError("the empty interval has no endpoints")

    @property
    def is_empty(self) -> bool:
        return True

    @property
    def is_degenerate(self) -> bool:
        return False

    @property
    def width(self) -> float:
        raise EmptySetError("the empty interval has no width")

    @property
    def center(self) -> float:
        raise EmptySetError("the empty interval has no center")

    def contains(self, v: float) -> bool:
        return False

    def encloses(self, other: Interval) -> bool:
        return other.is_empty

    def add(self, other: Interval) -> Interval:
        return EMPTY_INTERVAL

    __add__ = add

    def scale(self, c: float) -> Interval:
        return EMPTY_INTERVAL

    def intersect(self, other: Interval) -> Interval:
        return EMPTY_INTERVAL

    def inflate(self, margin: float) -> Interval:
        return EMPTY_INTERVAL

    def __hash__(self) -> int:
        return hash("empty-interval")

    def __repr__(self) -> str:
        return "Interval.EMPTY"


EMPTY_INTERVAL = _EmptyInterval()
Interval.EMPTY = EMPTY_INTERVAL


class IntervalBox:
    """Axis-aligned product of closed intervals in ``R^k``.

    A box is empty iff any axis is empty; the canonical empty box of a
    given dimension has every axis empty (:meth:`empty`). Boxes are
    immutable and shareable across threads.
    """

    __slots__ = ("_axes",)

    def __init__(self, axes: Iterable[Interval]):
        axes = tuple(axes)
        if not axes:
            raise ValueError("a box needs at least one axis")
        if any(a.is_empty for a in axes):
            axes = (EMPTY_INTERVAL,) * len(axes)
        self._axes = axes

    @classmethod
    def empty(cls, dims: int) -> IntervalBox:
        return cls((EMPTY_INTERVAL,) * dims)

    @classmethod
    def point(cls, coords: Sequence[float]) -> IntervalBox:
        return cls(Interval.point(c) for c in coords)

    @classmethod
    def from_bounds(cls, lo: Sequence[float], hi: Sequence[float]) -> IntervalBox:
        if len(lo) != len(hi):
            raise DimensionMismatchError("lo and hi lengths differ")
        return cls(Interval(a, b) for a, b in zip(lo, hi))

    @property
    def dims(self) -> int:
        return len(self._axes)

    @property
    def axes(self) -> tuple[Interval, ...]:
        return self._axes

    @property
    def is_empty(self) -> bool:
        return self._axes[0].is_empty

    def axis(self, i: int) -> Interval:
        """Axis by 1-based index."""
        return self._axes[i - 1]

    def __getitem__(self, i: int) -> Interval:
        return self._axes[i]

    def __iter__(self) -> Iterator[Interval]:
        return iter(self._axes)

    @property
    def center(self) -> tuple[float, ...]:
        if self.is_empty:
            raise EmptySetError("the empty box has no center")
        return tuple(a.center for a in self._axes)

    def lo_corner(self) -> tuple[float, ...]:
        return tuple(a.lo for a in self._axes)

    def hi_corner(self) -> tuple[float, ...]:
        return tuple(a.hi for a in self._axes)

    def vertices(self) -> Iterator[tuple[float, ...]]:
        """All corner points (2^k of them, fewer when axes are degenerate)."""
        if self.is_empty:
            return
        def rec(i: int, prefix: tuple[float, ...]) -> Iterator[tuple[float, ...]]:
            if i == len(self._axes):
                yield prefix
                return
            ax = self._axes[i]
            yield from rec(i + 1, prefix + (ax.lo,))
            if not ax.is_degenerate:
                yield from rec(i + 1, prefix + (ax.hi,))
        yield from rec(0, ())

    def encloses(self, other: IntervalBox) -> bool:
        if other.is_empty:
            return True
        if self.is_empty:
            return False
        self._check_dims(other)
        return all(a.encloses(b) for a, b in zip(self._axes, other.axes))

    def intersect(self, other: IntervalBox) -> IntervalBox:
        self._check_dims(other)
        if self.is_empty or other.is_empty:
            return IntervalBox.empty(self.dims)
        return IntervalBox(a.intersect(b) for a, b in zip(self._axes, other.axes))

    def inflate(self, margin: float) -> IntervalBox:
        if self.is_empty:
            return self
        return IntervalBox(a.inflate(margin) for a in self._axes)

    def distance_to(self, p: Sequence[float]) -> float:
        """Euclidean distance from a point to the box; inf when empty."""
        if self.is_empty:
            return math.inf
        if len(p) != self.dims:
            raise DimensionMismatchError(
                f"point has {len(p)} coordinates, box has {self.dims} axes")
        acc = 0.0
        for v, ax in zip(p, self._axes):
            gap = max(ax.lo - v, v - ax.hi, 0.0)
            acc += gap * gap
        return math.sqrt(acc)

    def max_vertex_norm(self) -> float:
        """Largest Euclidean norm over the box (attained at a vertex)."""
        if self.is_empty:
            return 0.0
        acc = 0.0
        for ax in self._axes:
            acc += max(ax.lo * ax.lo, ax.hi * ax.hi)
        return math.sqrt(acc)

    def _check_dims(self, other: IntervalBox) -> None:
        if self.dims != other.dims:
            raise DimensionMismatchError(
                f"box dimensions differ: {self.dims} vs {other.dims}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntervalBox):
            return NotImplemented
        if self.dims != other.dims:
            return False
        if self.is_empty or other.is_empty:
            return self.is_empty and other.is_empty
        return self._axes == other.axes

    def __hash__(self) -> int:
        return hash(self._axes)

    def __repr__(self) -> str:
        if self.is_empty:
            return f"IntervalBox.empty({self.dims})"
        return "x".join(repr(a) for a in self._axes)


def minkowski_sum(a: IntervalBox, b: IntervalBox) -> IntervalBox:
    """Componentwise interval sum; empty if either operand is empty."""
    a._check_dims(b)
    if a.is_empty or b.is_empty:
        return IntervalBox.empty(a.dims)
    return IntervalBox(x.add(y) for x, y in zip(a.axes, b.axes))


def scale(c: float, b: IntervalBox) -> IntervalBox:
    """Scalar multiple of a box (axiswise, endpoints reordered)."""
    if b.is_empty:
        return b
    return IntervalBox(a.scale(c) for a in b.axes)


def contains(b: IntervalBox, p: Sequence[float]) -> bool:
    """Membership test, decided axis by axis; the empty box contains nothing."""
    if b.is_empty:
        return False
    if len(p) != b.dims:
        raise DimensionMismatchError(
            f"point has {len(p)} coordinates, box has {b.dims} axes")
    return all(ax.contains(v) for ax, v in zip(b.axes, p))


def direction_axes(b: IntervalBox) -> frozenset[int]:
    """1-based indices of the nondegenerate axes of a non-empty box.

    These are the coordinate directions spanning the affine hull of the
    box; a linear functional is constant on the box iff it annihilates
    every one of them.
    """
    if b.is_empty:
        raise EmptySetError("direction_axes is undefined for the empty box")
    return frozenset(i + 1 for i, ax in enumerate(b.axes) if not ax.is_degenerate)


def box_hausdorff(a: IntervalBox, b: IntervalBox) -> float:
    """Hausdorff distance between boxes in the max norm on endpoints.

    Returns inf when exactly one side is empty, 0.0 when both are.
    """
    a._check_dims(b)
    if a.is_empty or b.is_empty:
        return 0.0 if (a.is_empty and b.is_empty) else math.inf
    worst = 0.0
    for x, y in zip(a.axes, b.axes):
        worst = max(worst, abs(x.lo - y.lo), abs(x.hi - y.hi))
    return worst


class Annulus:
    """Closed Euclidean annulus ``inner <= |x| <= outer`` around the origin.

    Membership compares squared norms so that points constructed from the
    radii themselves (e.g. ``(inner, 0)``) test as members exactly.
    """

    __slots__ = ("inner", "outer")

    def __init__(self, inner: float, outer: float):
        inner = float(inner)
        outer = float(outer)
        if inner < 0:
            raise ValueError("inner radius must be nonnegative")
        if outer <= inner:
            raise ValueError("outer radius must exceed inner radius")
        self.inner = inner
        self.outer = outer

    def contains(self, p: Sequence[float]) -> bool:
        sq = 0.0
        for v in p:
            sq += v * v
        return self.inner * self.inner <= sq <= self.outer * self.outer

    def __repr__(self) -> str:
        return f"Annulus({self.inner}, {self.outer})"
