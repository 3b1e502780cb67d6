"""Exact calculus of measure-preserving piecewise-affine maps on ]0,1[.

All breakpoint arithmetic is done with ``fractions.Fraction``; floats entering
from spectral data are converted exactly (every double is rational), so
pushforwards, compositions, inversions and preimage measures are computed by
interval algebra with no sampling and no rounding.  Functions are understood
almost everywhere: single points are null, and "equal a.e." means equal off
finitely many breakpoints.

Pieces are left-open right-closed, matching the ]a,b] calculus used by the
step CDFs in :mod:`qcs.spectral`.
"""

from __future__ import annotations

import bisect
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    BadSpec,
    DistributionMismatch,
    DomainMismatch,
    NotInjective,
    OutOfDomain,
    ValueNotInSupport,
)
from .spectral import StepCDF

RationalLike = Union[Fraction, int, float, str]

ZERO = Fraction(0)
ONE = Fraction(1)
DENSITY_TOL = Fraction(1, 10**12)
MATCH_TOL = Fraction(1, 10**12)

Interval = tuple[Fraction, Fraction]


def to_fraction(x: RationalLike) -> Fraction:
    """Exact rational from int, Fraction, float (exact binary value) or 'p/q' string."""
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


# ---------------------------------------------------------------------------
# Half-open interval sets ]a,b]

def normalize_intervals(items: Iterable[Interval]) -> list[Interval]:
    """Sort, drop empties, and merge touching/overlapping ]a,b] intervals."""
    cleaned = sorted((lo, hi) for lo, hi in items if hi > lo)
    merged: list[Interval] = []
    for lo, hi in cleaned:
        if merged and lo <= merged[-1][1]:
            prev_lo, prev_hi = merged[-1]
            merged[-1] = (prev_lo, max(prev_hi, hi))
        else:
            merged.append((lo, hi))
    return merged


def intervals_measure(items: Iterable[Interval]) -> Fraction:
    return sum((hi - lo for lo, hi in normalize_intervals(items)), ZERO)


def intervals_intersect(a: Iterable[Interval], b: Iterable[Interval]) -> list[Interval]:
    a, b = normalize_intervals(a), normalize_intervals(b)
    out, i, j = [], 0, 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if hi > lo:
            out.append((lo, hi))
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return out


def intervals_complement(items: Iterable[Interval], lo: Fraction = ZERO, hi: Fraction = ONE) -> list[Interval]:
    out, cursor = [], lo
    for a, b in normalize_intervals(items):
        a, b = max(a, lo), min(b, hi)
        if a > cursor:
            out.append((cursor, a))
        cursor = max(cursor, b)
    if cursor < hi:
        out.append((cursor, hi))
    return out


def intervals_union(a: Iterable[Interval], b: Iterable[Interval]) -> list[Interval]:
    return normalize_intervals(list(a) + list(b))


def intervals_symmdiff(a: Iterable[Interval], b: Iterable[Interval]) -> list[Interval]:
    a, b = normalize_intervals(a), normalize_intervals(b)
    only_a = intervals_intersect(a, intervals_complement(b))
    only_b = intervals_intersect(b, intervals_complement(a))
    return intervals_union(only_a, only_b)


# ---------------------------------------------------------------------------
# Piecewise-affine maps

@dataclass(frozen=True)
class AffinePiece:
    """z -> slope*z + intercept on the source interval ]lo, hi]."""

    lo: Fraction
    hi: Fraction
    slope: Fraction
    intercept: Fraction

    def __call__(self, z: Fraction) -> Fraction:
        return self.slope * z + self.intercept

    def image_bounds(self) -> tuple[Fraction, Fraction]:
        a, b = self(self.lo), self(self.hi)
        return (a, b) if a <= b else (b, a)


@dataclass(frozen=True, eq=False)
class PiecewiseAffineMap:
    """Borel map ]0,1[ -> [0,1] made of finitely many affine pieces.

    Sources tile ]0,1] contiguously; the value at a breakpoint follows the
    ]lo,hi] convention but is never relied on (breakpoints are null).
    """

    pieces: tuple[AffinePiece, ...]

    def __post_init__(self):
        pieces = tuple(self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if not pieces:
            raise BadSpec("map needs at least one piece")
        if pieces[0].lo != ZERO or pieces[-1].hi != ONE:
            raise BadSpec("pieces must cover ]0,1]")
        for p, q in zip(pieces, pieces[1:]):
            if p.hi != q.lo:
                raise BadSpec("pieces must tile ]0,1] without gaps or overlaps")
        for p in pieces:
            if p.hi <= p.lo:
                raise BadSpec("piece source interval is empty")
            if p.slope == 0:
                raise BadSpec("piece slope must be nonzero")
            lo_im, hi_im = p.image_bounds()
            if lo_im < ZERO or hi_im > ONE:
                raise BadSpec("piece image escapes [0,1]")

    @cached_property
    def _ends(self) -> list[Fraction]:
        return [p.hi for p in self.pieces]

    @cached_property
    def breakpoints(self) -> tuple[Fraction, ...]:
        return (ZERO,) + tuple(self._ends)

    def piece_at(self, z: Fraction) -> AffinePiece:
        if not (ZERO < z <= ONE):
            raise OutOfDomain(f"label {z} outside ]0,1]")
        return self.pieces[bisect.bisect_left(self._ends, z)]

    def __call__(self, z: RationalLike) -> Fraction:
        z = to_fraction(z)
        if not (ZERO < z < ONE):
            raise OutOfDomain(f"label {z} outside ]0,1[")
        return self.piece_at(z)(z)

    def is_breakpoint(self, z: RationalLike) -> bool:
        z = to_fraction(z)
        return z in self.breakpoints

    @cached_property
    def float_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(piece right ends, slopes, intercepts) as float arrays, for sampling."""
        ends = np.array([float(p.hi) for p in self.pieces])
        slopes = np.array([float(p.slope) for p in self.pieces])
        intercepts = np.array([float(p.intercept) for p in self.pieces])
        return ends, slopes, intercepts

    def evaluate_floats(self, z: np.ndarray) -> np.ndarray:
        """Fast float evaluation; callers must keep z away from breakpoints."""
        ends, slopes, intercepts = self.float_arrays
        idx = np.searchsorted(ends, z, side="left")
        idx = np.clip(idx, 0, len(self.pieces) - 1)
        return slopes[idx] * z + intercepts[idx]

    @cached_property
    def measure_preserving(self) -> bool:
        return verify_measure_preserving(self)


def map_equal_ae(m1: PiecewiseAffineMap, m2: PiecewiseAffineMap) -> bool:
    """Exact a.e. equality: same affine coefficients on every refined cell."""
    grid = sorted(set(m1.breakpoints) | set(m2.breakpoints))
    for lo, hi in zip(grid, grid[1:]):
        mid = (lo + hi) / 2
        p, q = m1.piece_at(mid), m2.piece_at(mid)
        if p.slope != q.slope or p.intercept != q.intercept:
            return False
    return True


# ---------------------------------------------------------------------------
# Densities

@dataclass(frozen=True, eq=False)
class PiecewiseConstantDensity:
    """Atomless density on ]0,1] with constant value on each cell."""

    cells: tuple[tuple[Fraction, Fraction, Fraction], ...]

    def __post_init__(self):
        cells = tuple((to_fraction(a), to_fraction(b), to_fraction(d)) for a, b, d in self.cells)
        object.__setattr__(self, "cells", cells)
        if not cells or cells[0][0] != ZERO or cells[-1][1] != ONE:
            raise BadSpec("density cells must cover ]0,1]")
        for a, b, d in cells:
            if b <= a or d < 0:
                raise BadSpec("density cells must be nonempty with nonnegative values")
        for (_, b, _), (a2, _, _) in zip(cells, cells[1:]):
            if b != a2:
                raise BadSpec("density cells must tile ]0,1]")

    @classmethod
    def uniform(cls) -> "PiecewiseConstantDensity":
        return cls(((ZERO, ONE, ONE),))

    @property
    def mass(self) -> Fraction:
        return sum(((b - a) * d for a, b, d in self.cells), ZERO)

    def value_at(self, z: Fraction) -> Fraction:
        for a, b, d in self.cells:
            if a < z <= b:
                return d
        raise OutOfDomain(f"{z} outside ]0,1]")


def pushforward_density(m: PiecewiseAffineMap, d: PiecewiseConstantDensity) -> PiecewiseConstantDensity:
    """Exact image density: on each image cell, sum of source density / |slope|.

    Uses a sweep over contribution endpoints, so it stays near-linear in the
    number of pieces.  Mass is preserved exactly.
    """
    deltas: dict[Fraction, Fraction] = defaultdict(lambda: ZERO)
    for piece in m.pieces:
        scale = abs(piece.slope)
        for a, b, dens in d.cells:
            lo = max(piece.lo, a)
            hi = min(piece.hi, b)
            if hi <= lo or dens == 0:
                continue
            im_lo, im_hi = sorted((piece(lo), piece(hi)))
            deltas[im_lo] += dens / scale
            deltas[im_hi] -= dens / scale
    deltas[ZERO] += ZERO
    deltas[ONE] += ZERO
    points = sorted(deltas)
    if points[0] < ZERO or points[-1] > ONE:
        raise DomainMismatch("image density escapes [0,1]")
    cells: list[tuple[Fraction, Fraction, Fraction]] = []
    level = ZERO
    for pt, nxt in zip(points, points[1:]):
        level += deltas[pt]
        if nxt > pt:
            if cells and cells[-1][2] == level:
                a, _, dd = cells[-1]
                cells[-1] = (a, nxt, dd)
            else:
                cells.append((pt, nxt, level))
    return PiecewiseConstantDensity(tuple(cells))


def verify_measure_preserving(m: PiecewiseAffineMap, tol: Fraction = DENSITY_TOL) -> bool:
    """True iff pushing the uniform density through m gives density 1 everywhere."""
    image = pushforward_density(m, PiecewiseConstantDensity.uniform())
    return all(abs(dens - ONE) <= tol for _, _, dens in image.cells)


# ---------------------------------------------------------------------------
# Map composition and inversion

def compose(outer: PiecewiseAffineMap, inner: PiecewiseAffineMap) -> PiecewiseAffineMap:
    """Exact composition outer(inner(z)); agrees pointwise off breakpoints."""
    pieces: list[AffinePiece] = []
    outer_bps = list(outer.breakpoints)
    for p in inner.pieces:
        im_lo, im_hi = p.image_bounds()
        cuts = {p.lo, p.hi}
        for c in outer_bps[bisect.bisect_right(outer_bps, im_lo) : bisect.bisect_left(outer_bps, im_hi)]:
            z = (c - p.intercept) / p.slope
            if p.lo < z < p.hi:
                cuts.add(z)
        grid = sorted(cuts)
        for lo, hi in zip(grid, grid[1:]):
            mid = (lo + hi) / 2
            w = p(mid)
            if not (ZERO < w <= ONE):
                raise DomainMismatch("inner image escapes the outer domain")
            q = outer.piece_at(w)
            pieces.append(AffinePiece(lo, hi, q.slope * p.slope, q.slope * p.intercept + q.intercept))
    return PiecewiseAffineMap(tuple(pieces))


def invert(m: PiecewiseAffineMap) -> PiecewiseAffineMap:
    """Inverse of an a.e. bijection; raises NotInjective when images overlap
    or fail to cover ]0,1[ up to finitely many points."""
    images = []
    for p in m.pieces:
        lo_im, hi_im = p.image_bounds()
        images.append((lo_im, hi_im, p))
    images.sort(key=lambda t: (t[0], t[1]))
    cursor = ZERO
    inv_pieces = []
    for lo_im, hi_im, p in images:
        if lo_im != cursor:
            kind = "overlap" if lo_im < cursor else "gap"
            raise NotInjective(f"piece images have a {kind} near {float(cursor):.6g}")
        inv_pieces.append(AffinePiece(lo_im, hi_im, 1 / p.slope, -p.intercept / p.slope))
        cursor = hi_im
    if cursor != ONE:
        raise NotInjective("piece images do not cover ]0,1]")
    return PiecewiseAffineMap(tuple(inv_pieces))


# ---------------------------------------------------------------------------
# Preimages

def preimage_intervals(m: PiecewiseAffineMap, lo: Fraction, hi: Fraction) -> list[Interval]:
    """Exact preimage of the level set ]lo, hi] as a normalized interval list."""
    lo, hi = to_fraction(lo), to_fraction(hi)
    if hi <= lo:
        return []
    out = []
    for p in m.pieces:
        if p.slope > 0:
            a = (lo - p.intercept) / p.slope
            b = (hi - p.intercept) / p.slope
        else:
            a = (hi - p.intercept) / p.slope
            b = (lo - p.intercept) / p.slope
        a, b = max(a, p.lo), min(b, p.hi)
        if b > a:
            out.append((a, b))
    return normalize_intervals(out)


def preimage_measure(m: PiecewiseAffineMap, lo: Fraction, hi: Fraction) -> Fraction:
    return intervals_measure(preimage_intervals(m, lo, hi))


# ---------------------------------------------------------------------------
# Piecewise-constant functions on ]0,1]

@dataclass(frozen=True, eq=False)
class PiecewiseConstantFn:
    """Real function constant on each cell ]b_{i-1}, b_i] of a partition of ]0,1]."""

    breakpoints: tuple[Fraction, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bps = tuple(to_fraction(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        if len(bps) != len(vals) + 1 or not vals:
            raise BadSpec("need n+1 breakpoints for n cells")
        if bps[0] != ZERO or bps[-1] != ONE:
            raise BadSpec("cells must cover ]0,1]")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise BadSpec("breakpoints must be strictly ascending")

    def __call__(self, z: RationalLike) -> float:
        z = to_fraction(z)
        if not (ZERO < z <= ONE):
            raise OutOfDomain(f"{z} outside ]0,1]")
        return self.values[bisect.bisect_left(self.breakpoints, z) - 1]

    def cells(self) -> Iterable[tuple[Fraction, Fraction, float]]:
        for lo, hi, v in zip(self.breakpoints, self.breakpoints[1:], self.values):
            yield lo, hi, v

    def map_values(self, fn) -> "PiecewiseConstantFn":
        return PiecewiseConstantFn(self.breakpoints, tuple(fn(v) for v in self.values))

    def masses_by_value(self) -> dict[float, Fraction]:
        """Exact pushforward of Lebesgue measure: total cell length per value."""
        out: dict[float, Fraction] = defaultdict(lambda: ZERO)
        for lo, hi, v in self.cells():
            out[v] += hi - lo
        return dict(out)

    def equal_ae(self, other: "PiecewiseConstantFn", tol: float = 0.0) -> bool:
        """Equality off breakpoints; exact by default, tolerance opt-in."""
        grid = sorted(set(self.breakpoints) | set(other.breakpoints))
        i = j = 0
        for lo, hi in zip(grid, grid[1:]):
            while self.breakpoints[i + 1] < hi:
                i += 1
            while other.breakpoints[j + 1] < hi:
                j += 1
            a, b = self.values[i], other.values[j]
            if tol == 0.0:
                if a != b:
                    return False
            elif abs(a - b) > tol:
                return False
        return True

    def compose_with_map(self, m: PiecewiseAffineMap) -> "PiecewiseConstantFn":
        """Exact f(m(z)) as a piecewise-constant function of z."""
        pieces = []
        interior = list(self.breakpoints[1:-1])
        for p in m.pieces:
            im_lo, im_hi = p.image_bounds()
            cuts = {p.lo, p.hi}
            # only cell boundaries strictly inside the piece image cut it
            for c in interior[bisect.bisect_right(interior, im_lo) : bisect.bisect_left(interior, im_hi)]:
                z = (c - p.intercept) / p.slope
                if p.lo < z < p.hi:
                    cuts.add(z)
            grid = sorted(cuts)
            for lo, hi in zip(grid, grid[1:]):
                mid = (lo + hi) / 2
                pieces.append((lo, hi, self(p(mid))))
        pieces.sort(key=lambda t: t[0])
        bps = [pieces[0][0]] + [hi for _, hi, _ in pieces]
        return PiecewiseConstantFn(tuple(bps), tuple(v for _, _, v in pieces))


def quantile_pcf(cdf: StepCDF) -> PiecewiseConstantFn:
    """The quantile function of a step CDF as an exact piecewise-constant function."""
    return PiecewiseConstantFn((ZERO,) + cdf.exact_levels, cdf.support)


def level_function(cdf: StepCDF, m: PiecewiseAffineMap) -> PiecewiseConstantFn:
    """The deterministic outcome z -> quantile(cdf, m(z)) as an exact function."""
    return quantile_pcf(cdf).compose_with_map(m)


# ---------------------------------------------------------------------------
# Map specifications

_KINDS = ("identity", "rotation", "interval_exchange", "expanding", "composition")


@dataclass(frozen=True)
class MapSpec:
    """Serializable description of a representable map on ]0,1[.

    Kinds: identity; rotation(c) by a rational offset; interval_exchange with
    rational block lengths and a permutation (perm[i] is the image slot of
    source block i); expanding(k), z -> k z mod 1; composition, maps applied
    in listed order (first entry acts first).
    """

    kind: str
    c: Fraction | None = None
    lengths: tuple[Fraction, ...] | None = None
    perm: tuple[int, ...] | None = None
    k: int | None = None
    maps: tuple["MapSpec", ...] | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise BadSpec(f"unknown map kind {self.kind!r}")
        if self.kind == "rotation":
            c = to_fraction(self.c)
            object.__setattr__(self, "c", c)
            if not (ZERO <= c < ONE):
                raise BadSpec("rotation offset must satisfy 0 <= c < 1")
        elif self.kind == "interval_exchange":
            lengths = tuple(to_fraction(x) for x in self.lengths or ())
            perm = tuple(int(i) for i in self.perm or ())
            object.__setattr__(self, "lengths", lengths)
            object.__setattr__(self, "perm", perm)
            if not lengths or any(x <= 0 for x in lengths):
                raise BadSpec("block lengths must be positive")
            if sum(lengths) != ONE:
                raise BadSpec("block lengths must sum to 1")
            if sorted(perm) != list(range(len(lengths))):
                raise BadSpec("perm must be a permutation of the blocks")
        elif self.kind == "expanding":
            if self.k is None or int(self.k) < 2:
                raise BadSpec("expanding factor must be an integer >= 2")
            object.__setattr__(self, "k", int(self.k))
        elif self.kind == "composition":
            maps = tuple(self.maps or ())
            object.__setattr__(self, "maps", maps)
            if not maps:
                raise BadSpec("composition needs at least one map")

    @classmethod
    def identity(cls) -> "MapSpec":
        return cls("identity")

    @classmethod
    def rotation(cls, c: RationalLike) -> "MapSpec":
        return cls("rotation", c=to_fraction(c))

    @classmethod
    def interval_exchange(cls, lengths: Sequence[RationalLike], perm: Sequence[int]) -> "MapSpec":
        return cls("interval_exchange", lengths=tuple(to_fraction(x) for x in lengths), perm=tuple(perm))

    @classmethod
    def expanding(cls, k: int) -> "MapSpec":
        return cls("expanding", k=k)

    @classmethod
    def composition(cls, *specs: "MapSpec") -> "MapSpec":
        return cls("composition", maps=tuple(specs))

    @classmethod
    def from_json(cls, obj) -> "MapSpec":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise BadSpec("map spec must be an object with a 'kind'")
        kind = obj["kind"]
        if kind == "identity":
            return cls.identity()
        if kind == "rotation":
            return cls.rotation(obj["c"])
        if kind == "interval_exchange":
            return cls.interval_exchange(obj["lengths"], obj["perm"])
        if kind == "expanding":
            return cls.expanding(obj["k"])
        if kind == "composition":
            return cls.composition(*(cls.from_json(m) for m in obj["maps"]))
        raise BadSpec(f"unknown map kind {kind!r}")

    def to_json(self):
        if self.kind == "identity":
            return {"kind": "identity"}
        if self.kind == "rotation":
            return {"kind": "rotation", "c": str(self.c)}
        if self.kind == "interval_exchange":
            return {
                "kind": "interval_exchange",
                "lengths": [str(x) for x in self.lengths],
                "perm": list(self.perm),
            }
        if self.kind == "expanding":
            return {"kind": "expanding", "k": self.k}
        return {"kind": "composition", "maps": [m.to_json() for m in self.maps]}


def build_map(spec: MapSpec) -> PiecewiseAffineMap:
    """Materialize a MapSpec as an exact piecewise-affine map."""
    if spec.kind == "identity":
        return PiecewiseAffineMap((AffinePiece(ZERO, ONE, ONE, ZERO),))
    if spec.kind == "rotation":
        c = spec.c
        if c == ZERO:
            return build_map(MapSpec.identity())
        return PiecewiseAffineMap(
            (
                AffinePiece(ZERO, ONE - c, ONE, c),
                AffinePiece(ONE - c, ONE, ONE, c - ONE),
            )
        )
    if spec.kind == "interval_exchange":
        lengths, perm = spec.lengths, spec.perm
        starts = [sum(lengths[:i], ZERO) for i in range(len(lengths))]
        pieces = []
        for i, length in enumerate(lengths):
            target = sum((lengths[j] for j in range(len(lengths)) if perm[j] < perm[i]), ZERO)
            pieces.append(AffinePiece(starts[i], starts[i] + length, ONE, target - starts[i]))
        return PiecewiseAffineMap(tuple(pieces))
    if spec.kind == "expanding":
        k = spec.k
        pieces = [
            AffinePiece(Fraction(i, k), Fraction(i + 1, k), Fraction(k), Fraction(-i))
            for i in range(k)
        ]
        return PiecewiseAffineMap(tuple(pieces))
    built = build_map(spec.maps[0])
    for sub in spec.maps[1:]:
        built = compose(build_map(sub), built)
    return built


# ---------------------------------------------------------------------------
# Constructive factorization against a step CDF

def factor_against_cdf(fn: PiecewiseConstantFn, cdf: StepCDF) -> PiecewiseAffineMap:
    """Factor fn through the quantile of cdf: find a measure-preserving map a
    with quantile(cdf, a(z)) = fn(z) off finitely many breakpoints.

    Each source cell where fn takes the k-th support value is sent, order
    preserving, onto a chunk of the k-th level interval; the slope is the
    ratio of the level-interval length to the total source length, so the
    result is exactly measure preserving whenever the pushforward of fn
    matches the CDF atom weights exactly.
    """
    support = cdf.support
    atom_of: dict[float, int] = {}
    for v in set(fn.values):
        idx = bisect.bisect_left(support, v)
        best = None
        for j in (idx - 1, idx):
            if 0 <= j < len(support) and abs(v - support[j]) <= 1e-12:
                best = j
        if best is None:
            raise ValueNotInSupport(f"value {v!r} is not a support point of the CDF")
        atom_of[v] = best

    totals: dict[int, Fraction] = defaultdict(lambda: ZERO)
    sources: dict[int, list[Interval]] = defaultdict(list)
    for lo, hi, v in fn.cells():
        k = atom_of[v]
        totals[k] += hi - lo
        sources[k].append((lo, hi))

    for k in range(len(support)):
        lo_lvl, hi_lvl = cdf.level_interval(k)
        weight = hi_lvl - lo_lvl
        total = totals.get(k, ZERO)
        if total == ZERO or abs(total - weight) > MATCH_TOL:
            raise DistributionMismatch(
                f"atom {support[k]!r}: source mass {float(total):.17g} vs weight {float(weight):.17g}"
            )

    pieces = []
    for k in range(len(support)):
        lo_lvl, hi_lvl = cdf.level_interval(k)
        slope = (hi_lvl - lo_lvl) / totals[k]
        pos = lo_lvl
        for lo, hi in sources[k]:
            pieces.append(AffinePiece(lo, hi, slope, pos - slope * lo))
            pos += slope * (hi - lo)
    pieces.sort(key=lambda p: p.lo)
    return PiecewiseAffineMap(tuple(pieces))
