"""Complete states and deterministic value assignments.

A complete state is a triple (pure state, barrier, label): the barrier is a
measure-preserving map of ]0,1[ and the label a point of ]0,1[.  On such a
triple every observable takes the single value

    quantile(F, barrier(label))

where F is the observable's spectral step CDF in the state.  The operations
here verify, exactly and by sampling, that these assignments reproduce the
spectral weights, and they exhibit the squaring obstruction that forces the
barrier to depend on the observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    LabelOnBreakpoint,
    NotABarrier,
    NotAResolution,
    NotMonotone,
    OutOfDomain,
)
from .measure_maps import (
    MapSpec,
    PiecewiseAffineMap,
    PiecewiseConstantFn,
    build_map,
    factor_against_cdf,
    intervals_measure,
    intervals_symmdiff,
    level_function,
    preimage_intervals,
    preimage_measure,
    to_fraction,
)
from .sampling import keyed_uniform, uniform_labels
from .spectral import (
    HermitianOperator,
    PiecewiseFn,
    PureState,
    StepCDF,
    borel_apply,
    spectral_cdf,
)

BREAKPOINT_EPS = 1e-15
LEVEL_GUARD_EPS = 1e-12
PROJECTOR_TOL = 1e-10

Interval = tuple[Fraction, Fraction]


@dataclass(frozen=True, eq=False)
class CompleteState:
    """(pure state, measure-preserving barrier, label in ]0,1[)."""

    state: PureState
    barrier: PiecewiseAffineMap
    z: Fraction

    def __post_init__(self):
        z = to_fraction(self.z)
        object.__setattr__(self, "z", z)
        if not (0 < z < 1):
            raise OutOfDomain(f"label {z} outside ]0,1[")
        if not self.barrier.measure_preserving:
            raise NotABarrier("barrier does not push Lebesgue measure to itself")
        if self.barrier.is_breakpoint(z):
            raise LabelOnBreakpoint(f"label {z} is a breakpoint of the barrier")


@dataclass(frozen=True, eq=False)
class BarrierComplex:
    """A barrier for every (observable, state) pair: a default map plus
    overrides keyed by (operator tag, state tag)."""

    default: MapSpec
    overrides: Mapping[tuple[str | None, str | None], MapSpec] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "overrides", dict(self.overrides))
        object.__setattr__(self, "_built", {})
        for spec in [self.default, *self.overrides.values()]:
            if not self._build(spec).measure_preserving:
                raise NotABarrier(f"map spec {spec} is not measure preserving")

    @classmethod
    def identity(cls) -> "BarrierComplex":
        return cls(MapSpec.identity())

    @classmethod
    def constant(cls, spec: MapSpec) -> "BarrierComplex":
        return cls(spec)

    def _build(self, spec: MapSpec) -> PiecewiseAffineMap:
        cache = self.__dict__["_built"]
        if spec not in cache:
            cache[spec] = build_map(spec)
        return cache[spec]

    def spec_for(self, a: HermitianOperator, psi: PureState) -> MapSpec:
        return self.overrides.get((a.tag, psi.tag), self.default)

    def barrier_for(self, a: HermitianOperator, psi: PureState) -> PiecewiseAffineMap:
        return self._build(self.spec_for(a, psi))


@dataclass(frozen=True, eq=False)
class ObservableFunction:
    """A label-space function whose per-state distribution is the spectral
    distribution of ``operator``; evaluation goes through the barrier complex."""

    operator: HermitianOperator
    barrier_complex: BarrierComplex

    def barrier(self, psi: PureState) -> PiecewiseAffineMap:
        return self.barrier_complex.barrier_for(self.operator, psi)

    def cdf(self, psi: PureState) -> StepCDF:
        return spectral_cdf(self.operator, psi)

    def level_fn(self, psi: PureState) -> PiecewiseConstantFn:
        return level_function(self.cdf(psi), self.barrier(psi))

    def evaluate(self, psi: PureState, z) -> float:
        return value(self.operator, CompleteState(psi, self.barrier(psi), to_fraction(z)))

    def expectation(self, psi: PureState) -> float:
        """Label-side mean, computed by exact interval algebra."""
        return label_mean(self.level_fn(psi))


def label_mean(fn: PiecewiseConstantFn, power: int = 1) -> float:
    """Integral of fn**power over ]0,1[ with exact cell masses."""
    return math.fsum((v**power) * float(hi - lo) for lo, hi, v in fn.cells())


def value(a: HermitianOperator, c: CompleteState) -> float:
    """The deterministic outcome assigned to observable ``a`` on a complete state."""
    if a.dim != c.state.dim:
        raise DimensionMismatch(f"operator dim {a.dim} vs state dim {c.state.dim}")
    if c.barrier.is_breakpoint(c.z):
        raise LabelOnBreakpoint(f"label {c.z} is a breakpoint")
    return spectral_cdf(a, c.state).quantile(c.barrier(c.z))


def value_distribution(
    a: HermitianOperator, psi: PureState, barrier: PiecewiseAffineMap
) -> list[tuple[float, Fraction]]:
    """Exact outcome distribution: Lebesgue measure of the barrier preimage of
    each level interval.  Probabilities are exact rationals; the claim under
    test elsewhere is that they equal the spectral weights."""
    if not barrier.measure_preserving:
        raise NotABarrier("value distributions require a measure-preserving barrier")
    cdf = spectral_cdf(a, psi)
    out = []
    for k, r in enumerate(cdf.support):
        lo, hi = cdf.level_interval(k)
        out.append((r, preimage_measure(barrier, lo, hi)))
    return out


def value_region(
    a: HermitianOperator,
    psi: PureState,
    barrier: PiecewiseAffineMap,
    lo: float,
    hi: float,
) -> list[Interval]:
    """Exact label region where the assigned value falls in ]lo, hi]."""
    cdf = spectral_cdf(a, psi)
    return preimage_intervals(barrier, Fraction(cdf.evaluate(lo)), Fraction(cdf.evaluate(hi)))


def sample_values(
    a: HermitianOperator,
    psi: PureState,
    barrier: PiecewiseAffineMap,
    seed: int,
    n: int,
    start: int = 0,
) -> np.ndarray:
    """Deterministic emulation of repeated measurement.

    Labels are uniform on ]0,1[ from the (seed, position) counter stream;
    a label within 1e-15 of a barrier breakpoint is replaced from a stream
    keyed by its position, so output is independent of chunking.  Values are
    computed on the float fast path and re-derived exactly whenever the
    barrier image lands within 1e-12 of a level boundary.
    """
    if n < 1:
        raise OutOfDomain("need at least one sample")
    cdf = spectral_cdf(a, psi)
    z = uniform_labels(seed, start, n)
    bps = np.array([float(b) for b in barrier.breakpoints])
    bad = np.abs(z[:, None] - bps[None, :]).min(axis=1) < BREAKPOINT_EPS
    for i in np.nonzero(bad)[0]:
        for candidate in keyed_uniform(seed, start + int(i)):
            if np.abs(candidate - bps).min() >= BREAKPOINT_EPS:
                z[i] = candidate
                break
        else:
            raise LabelOnBreakpoint("could not draw a label away from breakpoints")
    s = barrier.evaluate_floats(z)
    levels = np.array(cdf.levels)
    idx = np.searchsorted(levels, s, side="left")
    idx = np.clip(idx, 0, len(levels) - 1)
    support = np.array(cdf.support)
    out = support[idx]
    near = np.abs(s[:, None] - levels[None, :]).min(axis=1) < LEVEL_GUARD_EPS
    for i in np.nonzero(near)[0]:
        out[i] = cdf.quantile(barrier(Fraction(z[i])))
    return out


def sigma_simple_regions(
    projectors: Sequence[np.ndarray],
    values: Sequence[float],
    psi: PureState,
    barrier: PiecewiseAffineMap,
    include_tail: bool = False,
) -> list[tuple[Interval, ...]]:
    """Label regions on which a simple operator sum(values[k] * P_k) takes each value.

    Region k is the barrier preimage of ]s_{k-1}, s_k], with s_k the running
    sum of the projector weights.  With ``include_tail`` the projectors may
    resolve the identity only up to a residual projector; the leftover label
    interval is returned as one extra region (the zero-value tail in the
    motivating family of simple operators).
    """
    if len(projectors) != len(values) or not projectors:
        raise NotAResolution("need matching nonempty projectors and values")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise NotAResolution("values must be strictly increasing")
    mats = [np.asarray(p, dtype=complex) for p in projectors]
    dim = psi.dim
    for p in mats:
        if p.shape != (dim, dim):
            raise DimensionMismatch("projector shape does not match the state")
        if np.abs(p - p.conj().T).max() > PROJECTOR_TOL or np.abs(p @ p - p).max() > PROJECTOR_TOL:
            raise NotAResolution("entries must be orthogonal projectors")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if np.abs(mats[i] @ mats[j]).max() > PROJECTOR_TOL:
                raise NotAResolution("projectors must be pairwise orthogonal")
    total = sum(mats)
    deficit = np.eye(dim) - total
    if np.abs(deficit).max() > PROJECTOR_TOL:
        if not include_tail:
            raise NotAResolution("projectors do not resolve the identity")
        if np.abs(deficit @ deficit - deficit).max() > PROJECTOR_TOL:
            raise NotAResolution("residual is not a projector")

    weights = [max(0.0, float(np.vdot(psi.amplitudes, p @ psi.amplitudes).real)) for p in mats]
    bounds = [Fraction(0)]
    for w in weights:
        bounds.append(bounds[-1] + Fraction(w))
    if abs(bounds[-1] - 1) > Fraction(1, 10**12):
        if not include_tail:
            raise NotAResolution("weights do not sum to 1")
    else:
        bounds[-1] = Fraction(1)
    regions = [
        tuple(preimage_intervals(barrier, lo, hi)) for lo, hi in zip(bounds, bounds[1:])
    ]
    if include_tail and bounds[-1] < 1:
        regions.append(tuple(preimage_intervals(barrier, bounds[-1], Fraction(1))))
    return regions


def expectation_via_labels(
    fn: PiecewiseFn,
    a: HermitianOperator,
    psi: PureState,
    barrier: PiecewiseAffineMap,
) -> float:
    """Exact label-side integral of fn composed with the assigned values."""
    if not barrier.measure_preserving:
        raise NotABarrier("label expectations require a measure-preserving barrier")
    cdf = spectral_cdf(a, psi)
    terms = []
    for k, r in enumerate(cdf.support):
        lo, hi = cdf.level_interval(k)
        terms.append(fn(r) * float(preimage_measure(barrier, lo, hi)))
    return math.fsum(terms)


def monotone_compose_check(
    fn: PiecewiseFn,
    a: HermitianOperator,
    psi: PureState,
    barrier: PiecewiseAffineMap,
) -> bool:
    """For strictly increasing fn, the assigned values of fn(A) coincide with
    fn of the assigned values of A, with the same barrier (exact comparison)."""
    cdf = spectral_cdf(a, psi)
    lo, hi = cdf.support[0], cdf.support[-1]
    if not fn.is_strictly_increasing_on(lo, hi):
        raise NotMonotone("function is not strictly increasing on the spectrum")
    lhs = level_function(cdf, barrier).map_values(fn)
    rhs = level_function(spectral_cdf(borel_apply(fn, a), psi), barrier)
    return lhs.equal_ae(rhs)


# ---------------------------------------------------------------------------
# The squaring witness

@dataclass(frozen=True, eq=False)
class SquaringModel:
    """Three orthogonal projectors with exactly representable weights.

    The state has amplitudes (1/4, 1/4, 1/2, 3/4, 1/4), so the projector
    weights are the binary-exact (1/8, 1/4, 5/8) and the whole operator
    pipeline (diagonalization, spectral weights, cumulative levels) stays
    bit-exact.
    """

    operator: HermitianOperator
    state: PureState
    plus: np.ndarray
    zero: np.ndarray
    minus: np.ndarray


def squaring_witness_model() -> SquaringModel:
    e = np.zeros((5, 5), dtype=complex)
    e[0, 0] = e[1, 1] = 1.0
    f = np.zeros((5, 5), dtype=complex)
    f[2, 2] = 1.0
    g = np.zeros((5, 5), dtype=complex)
    g[3, 3] = g[4, 4] = 1.0
    a = HermitianOperator(e - g, tag="squaring-witness")
    psi = PureState(np.array([0.25, 0.25, 0.5, 0.75, 0.25], dtype=complex), tag="squaring-state")
    return SquaringModel(a, psi, e, f, g)


@dataclass(frozen=True, eq=False)
class NoGoWitness:
    """Outcome of the squaring obstruction for one pair of barriers."""

    operator: HermitianOperator
    square: PiecewiseFn
    disagreement: Fraction


def no_go_witness(
    barrier: PiecewiseAffineMap,
    weights: tuple[Fraction, Fraction, Fraction] = (Fraction(1, 8), Fraction(1, 4), Fraction(5, 8)),
    squared_barrier: PiecewiseAffineMap | None = None,
) -> NoGoWitness:
    """Measure of the label set where squaring the assigned value of A = E - G
    disagrees with the assigned value of A^2 = E + G.

    ``weights`` are the exact projector weights (plus, zero, minus).  With one
    barrier on both sides the disagreement is the preimage measure of a fixed
    symmetric difference of level sets, hence invariant under any measure
    preserving barrier; ``squared_barrier`` lets callers test a repaired pair.
    """
    if not barrier.measure_preserving:
        raise NotABarrier("witness requires a measure-preserving barrier")
    w_plus, w_zero, w_minus = (to_fraction(w) for w in weights)
    if min(w_plus, w_zero, w_minus) <= 0 or w_plus + w_zero + w_minus != 1:
        raise OutOfDomain("weights must be positive and sum to 1")
    second = squared_barrier if squared_barrier is not None else barrier
    if not second.measure_preserving:
        raise NotABarrier("squared-side barrier must be measure preserving")
    # Levels of F_A (atoms -1, 0, +1): minus, minus+zero, 1.
    square_one = [
        (Fraction(0), w_minus),
        (w_minus + w_zero, Fraction(1)),
    ]
    # Levels of F_{A^2} (atoms 0, 1): zero, 1.
    squared_one = [(w_zero, Fraction(1))]
    lhs = []
    for lo, hi in square_one:
        lhs.extend(preimage_intervals(barrier, lo, hi))
    rhs = []
    for lo, hi in squared_one:
        rhs.extend(preimage_intervals(second, lo, hi))
    disagreement = intervals_measure(intervals_symmdiff(lhs, rhs))
    witness_a = HermitianOperator(np.diag([1.0, 0.0, -1.0]).astype(complex))
    return NoGoWitness(witness_a, PiecewiseFn.square(), disagreement)


def repair_barrier(
    a: HermitianOperator,
    fn: PiecewiseFn,
    barrier: PiecewiseAffineMap,
    psi: PureState,
) -> PiecewiseAffineMap:
    """A barrier for fn(A) whose assigned values equal fn of A's assigned values.

    Constructed by factoring fn composed with A's value function against the
    CDF of fn(A); always succeeds because the composed function has exactly
    that distribution."""
    cdf = spectral_cdf(a, psi)
    composed = level_function(cdf, barrier).map_values(fn)
    target = spectral_cdf(borel_apply(fn, a), psi)
    return factor_against_cdf(composed, target)


def recover_barrier(
    a: HermitianOperator, psi: PureState, fn: PiecewiseConstantFn
) -> PiecewiseAffineMap:
    """Factor a claimed value function through the spectral quantile."""
    return factor_against_cdf(fn, spectral_cdf(a, psi))


# ---------------------------------------------------------------------------
# Spectrum and identifiability checks

def spectrum_image_check(
    a: HermitianOperator,
    barrier: PiecewiseAffineMap,
    probes: Sequence[PureState],
) -> bool:
    """Attained values over the probes coincide with the operator's spectrum."""
    es = a.eigensystem
    spectrum = set(es.eigenvalues)
    attained: set[float] = set()
    for psi in probes:
        attained.update(spectral_cdf(a, psi).support)
    every_value_is_eigenvalue = all(
        any(abs(v - lam) <= 1e-12 for lam in spectrum) for v in attained
    )
    every_eigenvalue_attained = all(
        any(abs(v - lam) <= 1e-12 for v in attained) for lam in spectrum
    )
    return every_value_is_eigenvalue and every_eigenvalue_attained


def _cdfs_close(f: StepCDF, g: StepCDF, tol: float) -> bool:
    if len(f.support) != len(g.support):
        return False
    return all(abs(a - b) <= tol for a, b in zip(f.support, g.support)) and all(
        abs(a - b) <= tol for a, b in zip(f.levels, g.levels)
    )


def identifiability_check(
    a1: HermitianOperator,
    a2: HermitianOperator,
    barrier: PiecewiseAffineMap,
    probes: Sequence[PureState],
    tol: float = 1e-10,
) -> bool:
    """Whether 'equal value functions on all probes implies equal operators' held.

    With a shared barrier, a.e. equality of the value functions is equivalent
    to equality of the spectral CDFs, so the hypothesis is tested there.
    """
    agree = all(
        _cdfs_close(spectral_cdf(a1, p), spectral_cdf(a2, p), tol) for p in probes
    )
    if not agree:
        return True
    return float(np.abs(a1.entries - a2.entries).max()) <= tol


def default_probe_states(dim: int) -> list[PureState]:
    """A basis, real pairwise superpositions, and imaginary ones: enough to
    separate any two distinct observables through their distributions."""
    probes = []
    eye = np.eye(dim, dtype=complex)
    for i in range(dim):
        probes.append(PureState(eye[i]))
    for i in range(dim):
        for j in range(i + 1, dim):
            probes.append(PureState.normalized(eye[i] + eye[j]))
            probes.append(PureState.normalized(eye[i] + 1j * eye[j]))
    return probes


def eigenvector_probes(a: HermitianOperator) -> list[PureState]:
    """One eigenvector per spectral atom, plus a uniform superposition."""
    es = a.eigensystem
    probes = [PureState(es.eigenvector(k)) for k in range(len(es.atoms))]
    probes.append(PureState.normalized(np.ones(a.dim, dtype=complex)))
    return probes
