"""Axis-aligned n-rectangles and their bottom-corner sub-rectangle lattice.

A box ``P`` with bottom corner ``lo`` and top corner ``hi`` has, for every
nonempty subset ``{i1 < ... < ik}`` of axes, a k-dimensional face that keeps
the subset's axes free and pins every other coordinate at ``lo``.  Summing
mixed-derivative integrals over all ``2^n - 1`` of these faces reproduces
``u(hi) - u(lo)`` for smooth ``u``; this module supplies the enumeration and
the normalization of arbitrary point pairs into the ``lo < hi`` configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import DomainError

MAX_DIMENSION = 20  # the 2^n enumeration is intrinsic; keep resource use predictable


def binomial(m: int, j: int) -> int:
    """Binomial coefficient C(m, j); exact integer arithmetic."""
    return math.comb(m, j)


@dataclass(frozen=True)
class IndexSubset:
    """A nonempty set of axis indices (1-based) inside an ambient dimension.

    Canonical form is the sorted tuple, so two subsets are equal iff they
    contain the same indices.
    """

    indices: tuple[int, ...]
    ambient_dim: int

    def __post_init__(self):
        idx = tuple(sorted(self.indices))
        if not idx:
            raise DomainError("index subset must be nonempty")
        if len(set(idx)) != len(idx):
            raise DomainError(f"duplicate indices in subset {self.indices}")
        if idx[0] < 1 or idx[-1] > self.ambient_dim:
            raise DomainError(
                f"indices {idx} out of range for ambient dimension {self.ambient_dim}"
            )
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i: int) -> bool:
        return i in self.indices

    @property
    def mask(self) -> int:
        """Bitmask with bit ``i-1`` set for each member index ``i``."""
        m = 0
        for i in self.indices:
            m |= 1 << (i - 1)
        return m

    def complement(self) -> tuple[int, ...]:
        return tuple(i for i in range(1, self.ambient_dim + 1) if i not in self.indices)


def enumerate_subsets(n: int) -> list[IndexSubset]:
    """All 2^n - 1 nonempty axis subsets, cardinality-major, lexicographic
    within each cardinality.  The order fixes the summation order used by
    every breakdown downstream, so it must stay deterministic.
    """
    if not isinstance(n, int) or n < 1 or n > MAX_DIMENSION:
        raise DomainError(f"dimension must be an integer in 1..{MAX_DIMENSION}, got {n!r}")
    out = []
    for k in range(1, n + 1):
        for combo in combinations(range(1, n + 1), k):
            out.append(IndexSubset(combo, n))
    return out


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned box with strictly increasing coordinates on every axis."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi):
            raise DomainError(f"corner lengths differ: {len(lo)} vs {len(hi)}")
        if len(lo) < 1:
            raise DomainError("rectangle needs at least one axis")
        for i, (a, b) in enumerate(zip(lo, hi), start=1):
            if not (a < b):
                raise DomainError(f"axis {i}: need lo < hi, got [{a}, {b}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def edges(self) -> tuple[float, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def volume(self) -> float:
        return math.prod(self.edges)

    @classmethod
    def unit(cls, n: int) -> "Rectangle":
        return cls((0.0,) * n, (1.0,) * n)

    @classmethod
    def cube(cls, n: int, lo: float, hi: float) -> "Rectangle":
        return cls((lo,) * n, (hi,) * n)

    @classmethod
    def from_flat(cls, bounds: Sequence[float]) -> "Rectangle":
        """Build from a flat lo1,hi1,lo2,hi2,... sequence."""
        if len(bounds) % 2 != 0 or not bounds:
            raise DomainError("flat bounds must have an even, positive length")
        return cls(tuple(bounds[0::2]), tuple(bounds[1::2]))


@dataclass(frozen=True)
class SubRectangle:
    """The face of ``parent`` that is free on ``active`` axes and pinned at
    the parent's bottom corner everywhere else.  Equals the parent when all
    axes are active."""

    parent: Rectangle
    active: IndexSubset
    base: tuple[float, ...]

    @property
    def k(self) -> int:
        return len(self.active)

    def free_ranges(self) -> list[tuple[float, float]]:
        return [(self.parent.lo[i - 1], self.parent.hi[i - 1]) for i in self.active]


def sub_rectangle(parent: Rectangle, active: IndexSubset) -> SubRectangle:
    """Bottom-corner face of ``parent`` with the given free axes.

    The subset is already canonical (sorted), so permuting the caller's
    index order cannot change the result.
    """
    if active.ambient_dim != parent.dim:
        raise DomainError(
            f"subset ambient dimension {active.ambient_dim} != rectangle dimension {parent.dim}"
        )
    return SubRectangle(parent=parent, active=active, base=parent.lo)


@dataclass(frozen=True)
class AxisTransform:
    """Per-axis reflection y_i -> -y_i.  Applying it twice is the identity."""

    flips: tuple[bool, ...]

    def apply(self, point: Sequence[float]) -> tuple[float, ...]:
        if len(point) != len(self.flips):
            raise DomainError("point length does not match transform")
        return tuple(-v if f else v for v, f in zip(point, self.flips))

    @property
    def identity(self) -> bool:
        return not any(self.flips)


@dataclass(frozen=True)
class NormalizedPair:
    """Result of normalizing an arbitrary point pair.

    ``rectangle`` lives in the reflected coordinates and only spans the
    axes in ``kept_axes`` (original 1-based labels, increasing).  Axes on
    which the two points agree (to within the degeneracy tolerance) are in
    ``dropped_axes``; integrals over faces that use a dropped axis collapse
    to zero, which realizes the delta -> 0 limit exactly.  ``rectangle`` is
    ``None`` when every axis dropped.
    """

    rectangle: Rectangle | None
    transform: AxisTransform
    dropped_axes: tuple[int, ...]
    kept_axes: tuple[int, ...]

    @property
    def empty(self) -> bool:
        return self.rectangle is None


def normalize_pair(
    x: Sequence[float], xp: Sequence[float], delta: float = 0.0
) -> NormalizedPair:
    """Reflect axes with x_i > x'_i and drop axes with |x_i - x'_i| <= delta.

    Returns the increasing-coordinate rectangle over the surviving axes, the
    reflection record, and the dropped axes.  ``delta`` is a degeneracy
    tolerance (0 means exact equality only); degenerate axes are dropped
    rather than perturbed, which keeps the face sum exact.
    """
    if len(x) != len(xp):
        raise DomainError(f"point lengths differ: {len(x)} vs {len(xp)}")
    if delta < 0:
        raise DomainError("delta must be nonnegative")
    flips = []
    kept: list[int] = []
    dropped: list[int] = []
    lo: list[float] = []
    hi: list[float] = []
    for i, (a, b) in enumerate(zip(x, xp), start=1):
        if abs(b - a) <= delta:
            dropped.append(i)
            flips.append(False)
            continue
        kept.append(i)
        if a < b:
            flips.append(False)
            lo.append(float(a))
            hi.append(float(b))
        else:
            flips.append(True)
            lo.append(-float(a))
            hi.append(-float(b))
    rect = Rectangle(tuple(lo), tuple(hi)) if kept else None
    return NormalizedPair(
        rectangle=rect,
        transform=AxisTransform(tuple(flips)),
        dropped_axes=tuple(dropped),
        kept_axes=tuple(kept),
    )


def subsets_by_cardinality(subsets: Iterable[IndexSubset]) -> dict[int, list[IndexSubset]]:
    groups: dict[int, list[IndexSubset]] = {}
    for s in subsets:
        groups.setdefault(len(s), []).append(s)
    return groups
