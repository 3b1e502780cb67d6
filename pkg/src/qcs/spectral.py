"""Finite-dimensional Hermitian observables and their spectral statistics.

The statistical content of an observable A in a pure state is carried by a
right-continuous step CDF r -> weight of the spectrum at or below r, together
with its left-continuous quantile function on ]0,1[.  Everything downstream
(barriers, deterministic value assignments, exact distribution checks)
consumes these two objects, so the constructors here are strict about
invariants.

Conventions used throughout the package:

* intervals on the line and on ]0,1[ are left-open right-closed, ]a,b];
* the quantile takes the atom at a level boundary, min{r : F(r) >= s};
* eigenvalues closer than ``EIGENVALUE_MERGE_TOL`` are one spectral atom;
* CDF atoms with weight below ``WEIGHT_DROP_TOL`` are dropped so that levels
  stay strictly increasing.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainGap, NonHermitian, NotNormalized, OutOfDomain

HERMITIAN_TOL = 1e-12
EIGENVALUE_MERGE_TOL = 1e-12
WEIGHT_DROP_TOL = 1e-14
PROJECTOR_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A finite-dimensional observable, stored as its full complex matrix.

    The eigensystem is computed lazily and cached; the cache fill is
    idempotent, so concurrent readers are safe.
    """

    entries: np.ndarray
    tag: str | None = None

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise NonHermitian(f"expected a square matrix, got shape {m.shape}")
        dev = float(np.abs(m - m.conj().T).max())
        if dev > HERMITIAN_TOL:
            raise NonHermitian(f"matrix deviates from its adjoint by {dev:.3e}")
        object.__setattr__(self, "entries", _readonly(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def eigensystem(self) -> "EigenSystem":
        return eigensystem(self)

    def expectation(self, psi: "PureState") -> float:
        if psi.dim != self.dim:
            raise DimensionMismatch(f"operator dim {self.dim} vs state dim {psi.dim}")
        return float(np.vdot(psi.amplitudes, self.entries @ psi.amplitudes).real)


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Spectral atoms (eigenvalue, orthogonal projector) in ascending order."""

    atoms: tuple[tuple[float, np.ndarray], ...]

    def __post_init__(self):
        if not self.atoms:
            raise NonHermitian("empty eigensystem")
        frozen = tuple((float(lam), _readonly(p)) for lam, p in self.atoms)
        object.__setattr__(self, "atoms", frozen)
        lams = [lam for lam, _ in frozen]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise NonHermitian("eigenvalues must be strictly ascending")
        dim = frozen[0][1].shape[0]
        total = sum(p for _, p in frozen)
        if np.abs(total - np.eye(dim)).max() > PROJECTOR_TOL:
            raise NonHermitian("projectors do not resolve the identity")
        # Pairwise orthogonality is O(k^2 d^3); checked here only at desk scale.
        if dim <= 12:
            for i, (_, pi) in enumerate(frozen):
                for j, (_, pj) in enumerate(frozen):
                    target = pi if i == j else 0.0
                    if np.abs(pi @ pj - target).max() > PROJECTOR_TOL:
                        raise NonHermitian("projectors are not orthogonal idempotents")

    @property
    def dim(self) -> int:
        return self.atoms[0][1].shape[0]

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        return tuple(lam for lam, _ in self.atoms)

    def weights(self, psi: "PureState") -> list[float]:
        """Spectral weights <P_k> of a unit state, clipped to be nonnegative."""
        if psi.dim != self.dim:
            raise DimensionMismatch(f"eigensystem dim {self.dim} vs state dim {psi.dim}")
        v = psi.amplitudes
        return [max(0.0, float(np.vdot(v, p @ v).real)) for _, p in self.atoms]

    def eigenvector(self, k: int) -> np.ndarray:
        """A unit vector in the k-th eigenspace (deterministic choice)."""
        p = self.atoms[k][1]
        col = int(np.argmax(np.linalg.norm(p, axis=0)))
        v = p[:, col]
        return v / np.linalg.norm(v)


@dataclass(frozen=True, eq=False)
class PureState:
    """A unit vector; two states are the same ray iff |<psi,phi>| = 1."""

    amplitudes: np.ndarray
    tag: str | None = None

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if v.size == 0:
            raise NotNormalized("empty state vector")
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > 1e-12:
            raise NotNormalized(f"state norm {nrm!r} is not 1 within 1e-12")
        object.__setattr__(self, "amplitudes", _readonly(v))

    @classmethod
    def normalized(cls, vec: Sequence[complex], tag: str | None = None) -> "PureState":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise NotNormalized("cannot normalize the zero vector")
        return cls(v / nrm, tag=tag)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projectively_equal(self, other: "PureState", tol: float = 1e-10) -> bool:
        if self.dim != other.dim:
            return False
        return abs(abs(np.vdot(self.amplitudes, other.amplitudes)) - 1.0) <= tol


@dataclass(frozen=True, eq=False)
class StepCDF:
    """Right-continuous step CDF with strictly increasing levels ending at 1.

    ``support[k]`` carries the atom weight ``levels[k] - levels[k-1]``; the
    level interval of atom k is ]levels[k-1], levels[k]] with levels[-1] := 0.
    """

    support: tuple[float, ...]
    levels: tuple[float, ...]

    def __post_init__(self):
        support = tuple(float(r) for r in self.support)
        levels = tuple(float(c) for c in self.levels)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "levels", levels)
        if len(support) != len(levels) or not support:
            raise OutOfDomain("support and levels must be nonempty and aligned")
        if any(b <= a for a, b in zip(support, support[1:])):
            raise OutOfDomain("support points must be strictly ascending")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise OutOfDomain("levels must be strictly ascending")
        if not (0.0 < levels[0] and levels[-1] == 1.0):
            raise OutOfDomain("levels must lie in ]0,1] and end exactly at 1")

    @classmethod
    def from_weights(cls, pairs: Iterable[tuple[float, float]]) -> "StepCDF":
        """Build from (value, weight) pairs; drops near-zero weights, renormalizes."""
        items = sorted((float(v), float(w)) for v, w in pairs)
        support, weights = [], []
        for v, w in items:
            if support and v == support[-1]:
                weights[-1] += w
            else:
                support.append(v)
                weights.append(w)
        kept = [(v, w) for v, w in zip(support, weights) if w >= WEIGHT_DROP_TOL]
        if not kept:
            raise OutOfDomain("all weights vanish")
        total = math.fsum(w for _, w in kept)
        cum, levels = 0.0, []
        for _, w in kept:
            cum += w
            levels.append(cum / total)
        levels[-1] = 1.0
        return cls(tuple(v for v, _ in kept), tuple(levels))

    @cached_property
    def exact_levels(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(c) for c in self.levels)

    @property
    def weights(self) -> tuple[float, ...]:
        prev = (0.0,) + self.levels[:-1]
        return tuple(c - p for c, p in zip(self.levels, prev))

    def atom_index(self, s) -> int:
        """Index of the atom whose level interval contains s (the >= rule)."""
        if isinstance(s, Fraction):
            if not (0 < s < 1):
                raise OutOfDomain(f"quantile level {s} outside ]0,1[")
            return bisect.bisect_left(self.exact_levels, s)
        s = float(s)
        if not (0.0 < s < 1.0):
            raise OutOfDomain(f"quantile level {s!r} outside ]0,1[")
        return bisect.bisect_left(self.levels, s)

    def quantile(self, s) -> float:
        """min{r : F(r) >= s} for s in ]0,1[; accepts float or Fraction."""
        return self.support[self.atom_index(s)]

    def evaluate(self, r: float) -> float:
        """F(r), right-continuous."""
        idx = bisect.bisect_right(self.support, float(r))
        return self.levels[idx - 1] if idx > 0 else 0.0

    def level_interval(self, k: int) -> tuple[Fraction, Fraction]:
        lo = self.exact_levels[k - 1] if k > 0 else Fraction(0)
        return lo, self.exact_levels[k]


@dataclass(frozen=True, eq=False)
class QuantileFn:
    """Left-continuous quasi-inverse of a StepCDF, as a callable view."""

    cdf: StepCDF

    def __call__(self, s) -> float:
        return self.cdf.quantile(s)


@dataclass(frozen=True, eq=False)
class PiecewiseFn:
    """Piecewise-polynomial function on left-open right-closed pieces.

    ``breakpoints`` has one more entry than ``coefficients``; the outer
    entries may be -inf/+inf.  Coefficients are in ascending powers.
    """

    breakpoints: tuple[float, ...]
    coefficients: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        bps = tuple(float(b) for b in self.breakpoints)
        coeffs = tuple(tuple(float(c) for c in cs) for cs in self.coefficients)
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "coefficients", coeffs)
        if len(bps) != len(coeffs) + 1 or not coeffs:
            raise DomainGap("need n+1 breakpoints for n pieces")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise DomainGap("breakpoints must be strictly ascending")

    @classmethod
    def from_poly(cls, coeffs: Sequence[float], lo: float = -math.inf, hi: float = math.inf) -> "PiecewiseFn":
        return cls((lo, hi), (tuple(coeffs),))

    @classmethod
    def identity(cls) -> "PiecewiseFn":
        return cls.from_poly((0.0, 1.0))

    @classmethod
    def constant(cls, c: float) -> "PiecewiseFn":
        return cls.from_poly((float(c),))

    @classmethod
    def affine(cls, a: float, b: float) -> "PiecewiseFn":
        return cls.from_poly((float(b), float(a)))

    @classmethod
    def square(cls) -> "PiecewiseFn":
        return cls.from_poly((0.0, 0.0, 1.0))

    @classmethod
    def absolute(cls) -> "PiecewiseFn":
        return cls((-math.inf, 0.0, math.inf), ((0.0, -1.0), (0.0, 1.0)))

    def __call__(self, x: float) -> float:
        x = float(x)
        if not (self.breakpoints[0] < x <= self.breakpoints[-1]):
            raise DomainGap(f"{x!r} outside the covered interval")
        idx = bisect.bisect_left(self.breakpoints, x) - 1
        acc = 0.0
        for c in reversed(self.coefficients[idx]):
            acc = acc * x + c
        return acc

    def derivative(self) -> "PiecewiseFn":
        pieces = []
        for cs in self.coefficients:
            d = tuple(k * c for k, c in enumerate(cs))[1:] or (0.0,)
            pieces.append(d)
        return PiecewiseFn(self.breakpoints, tuple(pieces))

    def is_strictly_increasing_on(self, lo: float, hi: float) -> bool:
        """Exact-ish monotonicity check: derivative positive off isolated zeros,
        and continuity across interior breakpoints of [lo, hi]."""
        if not (self.breakpoints[0] < lo <= hi <= self.breakpoints[-1]):
            return False
        deriv = self.derivative()
        for i, cs in enumerate(deriv.coefficients):
            a = max(lo, self.breakpoints[i])
            b = min(hi, self.breakpoints[i + 1])
            if b <= a:
                continue
            cuts = {a, b}
            if len(cs) > 1:
                roots = np.roots(list(reversed(cs)))
                cuts |= {float(r.real) for r in roots if abs(r.imag) < 1e-12 and a < r.real < b}
            grid = sorted(cuts)
            for u, v in zip(grid, grid[1:]):
                if v <= u:
                    continue
                mid = 0.5 * (u + v)
                val = 0.0
                for c in reversed(cs):
                    val = val * mid + c
                if val <= 0.0:
                    return False
        for bp in self.breakpoints[1:-1]:
            if lo < bp < hi:
                left_idx = self.breakpoints.index(bp) - 1
                left = 0.0
                for c in reversed(self.coefficients[left_idx]):
                    left = left * bp + c
                right = 0.0
                for c in reversed(self.coefficients[left_idx + 1]):
                    right = right * bp + c
                if abs(left - right) > 1e-12:
                    return False
        return True


def eigensystem(a: HermitianOperator) -> EigenSystem:
    """Diagonalize, merging eigenvalues within ``EIGENVALUE_MERGE_TOL``."""
    w, v = np.linalg.eigh(a.entries)
    atoms = []
    i = 0
    while i < a.dim:
        j = i
        while j + 1 < a.dim and w[j + 1] - w[j] <= EIGENVALUE_MERGE_TOL:
            j += 1
        block = v[:, i : j + 1]
        atoms.append((float(np.mean(w[i : j + 1])), block @ block.conj().T))
        i = j + 1
    system = EigenSystem(tuple(atoms))
    recon = sum(lam * p for lam, p in system.atoms)
    if np.abs(recon - a.entries).max() > PROJECTOR_TOL:
        raise NonHermitian("spectral reconstruction failed")
    return system


def _with_eigensystem(entries: np.ndarray, system: EigenSystem, tag: str | None = None) -> HermitianOperator:
    op = HermitianOperator(entries, tag=tag)
    op.__dict__["eigensystem"] = system
    return op


def spectral_cdf(a: HermitianOperator, psi: PureState) -> StepCDF:
    """Step CDF of the observable's distribution in the given state.

    Levels are cumulative spectral weights; atoms with weight below
    ``WEIGHT_DROP_TOL`` are dropped and the last level is pinned to 1.
    """
    if a.dim != psi.dim:
        raise DimensionMismatch(f"operator dim {a.dim} vs state dim {psi.dim}")
    es = a.eigensystem
    ws = es.weights(psi)
    kept = [(lam, w) for (lam, _), w in zip(es.atoms, ws) if w >= WEIGHT_DROP_TOL]
    if not kept:
        raise OutOfDomain("state has no weight on any spectral atom")
    total = math.fsum(w for _, w in kept)
    cum, levels = 0.0, []
    for _, w in kept:
        cum += w
        levels.append(cum / total)
    levels[-1] = 1.0
    return StepCDF(tuple(lam for lam, _ in kept), tuple(levels))


def quantile(cdf: StepCDF, s) -> float:
    """min{r : F(r) >= s} for s in ]0,1[."""
    return cdf.quantile(s)


def borel_apply(fn: PiecewiseFn, a: HermitianOperator) -> HermitianOperator:
    """Functional calculus: apply fn to the spectrum, merging equal images.

    The returned operator carries the image eigensystem, so downstream CDFs
    use bitwise the same image values as direct evaluation of fn.
    """
    es = a.eigensystem
    images = [(fn(lam), p) for lam, p in es.atoms]
    images.sort(key=lambda t: t[0])
    merged: list[tuple[float, np.ndarray]] = []
    for val, p in images:
        if merged and val - merged[-1][0] <= EIGENVALUE_MERGE_TOL:
            prev_val, prev_p = merged[-1]
            merged[-1] = (prev_val, prev_p + p)
        else:
            merged.append((val, np.array(p)))
    entries = sum(val * p for val, p in merged)
    return _with_eigensystem(entries, EigenSystem(tuple(merged)))


def moment(a: HermitianOperator, psi: PureState, k: int) -> float:
    """k-th spectral moment, sum over atoms of eigenvalue^k times weight."""
    if a.dim != psi.dim:
        raise DimensionMismatch(f"operator dim {a.dim} vs state dim {psi.dim}")
    if k < 0:
        raise OutOfDomain("moment order must be nonnegative")
    es = a.eigensystem
    ws = es.weights(psi)
    return math.fsum((lam**k) * w for (lam, _), w in zip(es.atoms, ws))
