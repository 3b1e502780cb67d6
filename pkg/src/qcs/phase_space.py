"""Discretized phase space for a particle with spin on a periodic grid.

The label space is one (q, p) grid of rectangular cells per spin sector.
The state-dependent measure puts, on each sector with nonzero norm, the
product of the position density and the momentum density (unitary DFT),
normalized by the sector mass.  Functions of position, of momentum, and the
sector label itself then have label distributions that match the matrix-side
spectral distributions, which is exactly what the checks verify.

The measure is genuinely atomless: cells are rectangles carrying constant
density, never point masses.  A canonical equivalence onto ]0,1[ (cells in
sector, then position, then momentum order, each occupying an interval of
length equal to its mass) lets every barrier tool operate on these labels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import BadSpec, DomainGap, NotNormalized
from .measure_maps import (
    ONE,
    ZERO,
    PiecewiseAffineMap,
    PiecewiseConstantFn,
    factor_against_cdf,
)
from .spectral import PiecewiseFn, StepCDF

MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PhaseSpaceState:
    """Per-sector complex amplitudes on an N-point grid with spacing dq.

    ``spin`` is a half-integer; sectors run from -spin to spin in unit steps.
    The momentum grid is the DFT frequency grid scaled by 2*pi, with spacing
    dp = 2*pi / (N * dq); the DFT is unitary so sector masses agree in both
    representations.
    """

    spin: Fraction
    amplitudes: np.ndarray
    dq: float

    def __post_init__(self):
        spin = Fraction(self.spin)
        if spin < 0 or (2 * spin).denominator != 1:
            raise BadSpec("spin must be a nonnegative half-integer")
        object.__setattr__(self, "spin", spin)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 2:
            raise BadSpec("amplitudes must be a (sectors, grid) array")
        n_sectors = int(2 * spin) + 1
        if amps.shape[0] != n_sectors or amps.shape[1] < 2:
            raise BadSpec(
                f"expected {n_sectors} sectors and at least 2 grid points, got {amps.shape}"
            )
        if not float(self.dq) > 0:
            raise BadSpec("grid spacing must be positive")
        object.__setattr__(self, "dq", float(self.dq))
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        total = math.fsum(float(x) for x in (np.abs(amps) ** 2).ravel()) * self.dq
        if abs(total - 1.0) > MASS_TOL:
            raise NotNormalized(f"total mass {total!r} is not 1 within {MASS_TOL}")

    @classmethod
    def normalized(cls, spin, raw: Sequence[Sequence[complex]], dq: float) -> "PhaseSpaceState":
        amps = np.asarray(raw, dtype=complex)
        if amps.ndim == 1:
            amps = amps[None, :]
        total = math.sqrt(math.fsum(float(x) for x in (np.abs(amps) ** 2).ravel()) * float(dq))
        if total == 0:
            raise NotNormalized("cannot normalize the zero state")
        return cls(Fraction(spin), amps / total, float(dq))

    @property
    def n_sectors(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n_points(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def dp(self) -> float:
        return 2 * math.pi / (self.n_points * self.dq)

    @cached_property
    def sector_labels(self) -> tuple[Fraction, ...]:
        return tuple(-self.spin + k for k in range(self.n_sectors))

    @cached_property
    def q_grid(self) -> np.ndarray:
        return np.arange(self.n_points) * self.dq

    @cached_property
    def p_grid_unsorted(self) -> np.ndarray:
        return 2 * math.pi * np.fft.fftfreq(self.n_points, d=self.dq)

    @cached_property
    def p_order(self) -> np.ndarray:
        return np.argsort(self.p_grid_unsorted)

    @cached_property
    def p_grid(self) -> np.ndarray:
        return self.p_grid_unsorted[self.p_order]

    @cached_property
    def momentum_amplitudes(self) -> np.ndarray:
        """Momentum wavefunctions in sorted-momentum order; Parseval holds:
        sum |psi_hat|^2 dp = sum |psi|^2 dq per sector."""
        hat = np.fft.fft(self.amplitudes, axis=1, norm="ortho") * math.sqrt(self.dq / self.dp)
        return hat[:, self.p_order]

    def sector_masses(self) -> np.ndarray:
        return np.array(
            [
                math.fsum(float(x) for x in np.abs(self.amplitudes[s]) ** 2) * self.dq
                for s in range(self.n_sectors)
            ]
        )


@dataclass(frozen=True, eq=False)
class PhaseSpaceMeasure:
    """Cell masses per kept (nonzero) sector, momentum axis in sorted order."""

    sector_labels: tuple[Fraction, ...]
    masses: np.ndarray
    q_grid: np.ndarray
    p_grid: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.ndim != 3 or m.shape[0] != len(self.sector_labels):
            raise BadSpec("masses must be (sectors, q, p)")
        if m.min() < 0:
            raise BadSpec("cell masses must be nonnegative")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "masses", m)
        total = math.fsum(float(x) for x in m.ravel())
        if abs(total - 1.0) > MASS_TOL:
            raise NotNormalized(f"total mass {total!r} is not 1 within {MASS_TOL}")

    def q_marginal(self) -> np.ndarray:
        return self.masses.sum(axis=(0, 2))

    def p_marginal(self) -> np.ndarray:
        return self.masses.sum(axis=(0, 1))

    def joint_qp(self) -> np.ndarray:
        return self.masses.sum(axis=0)


def build_measure(state: PhaseSpaceState) -> PhaseSpaceMeasure:
    """Product-per-sector measure; sectors with zero mass are omitted."""
    kept_labels = []
    blocks = []
    hat = state.momentum_amplitudes
    for s in range(state.n_sectors):
        qdens = (np.abs(state.amplitudes[s]) ** 2) * state.dq
        pdens = (np.abs(hat[s]) ** 2) * state.dp
        mass = math.fsum(float(x) for x in qdens)
        if mass == 0.0:
            continue
        kept_labels.append(state.sector_labels[s])
        blocks.append(np.outer(qdens, pdens) / mass)
    if not blocks:
        raise NotNormalized("state has no sector with positive mass")
    return PhaseSpaceMeasure(
        tuple(kept_labels), np.stack(blocks), state.q_grid, state.p_grid
    )


@dataclass(frozen=True, eq=False)
class CellObservable:
    """A label function constant on cells, with its exact pushforward CDF."""

    cell_values: np.ndarray
    cdf: StepCDF


def _pushforward_cdf(values: np.ndarray, masses: np.ndarray) -> StepCDF:
    agg: dict[float, list[float]] = {}
    for v, m in zip(values.ravel(), masses.ravel()):
        if m > 0.0:
            agg.setdefault(float(v), []).append(float(m))
    pairs = [(v, math.fsum(ms)) for v, ms in agg.items()]
    return StepCDF.from_weights(pairs)


def position_observable(g: PiecewiseFn, state: PhaseSpaceState) -> CellObservable:
    """g of the position coordinate as a label function with exact distribution."""
    measure = build_measure(state)
    try:
        vals_q = np.array([g(q) for q in measure.q_grid])
    except DomainGap as exc:
        raise DomainGap(f"position function undefined on the grid: {exc}") from exc
    cell_values = np.broadcast_to(
        vals_q[None, :, None], measure.masses.shape
    ).copy()
    return CellObservable(cell_values, _pushforward_cdf(cell_values, measure.masses))


def momentum_observable(f: PiecewiseFn, state: PhaseSpaceState) -> CellObservable:
    """f of the momentum coordinate; distinct barriers from the position ones
    are generally needed to realize both, see shared_barrier_joint_gap."""
    measure = build_measure(state)
    try:
        vals_p = np.array([f(p) for p in measure.p_grid])
    except DomainGap as exc:
        raise DomainGap(f"momentum function undefined on the grid: {exc}") from exc
    cell_values = np.broadcast_to(
        vals_p[None, None, :], measure.masses.shape
    ).copy()
    return CellObservable(cell_values, _pushforward_cdf(cell_values, measure.masses))


def spin_observable(state: PhaseSpaceState) -> CellObservable:
    """The sector label as a label function; CDF steps are sector masses."""
    measure = build_measure(state)
    svals = np.array([float(s) for s in measure.sector_labels])
    cell_values = np.broadcast_to(
        svals[:, None, None], measure.masses.shape
    ).copy()
    return CellObservable(cell_values, _pushforward_cdf(cell_values, measure.masses))


@dataclass(frozen=True, eq=False)
class CellEquivalence:
    """Canonical measure equivalence of the cell space onto ]0,1[.

    Cells are ordered by (sector, position, momentum); each cell of positive
    mass occupies an interval of exactly its mass, so the pushforward of the
    cell measure is Lebesgue by construction.
    """

    kept: np.ndarray
    bounds: tuple[Fraction, ...]

    @property
    def n_cells(self) -> int:
        return len(self.kept)

    def pcf(self, cell_values: np.ndarray) -> PiecewiseConstantFn:
        """Transport a cell function to a piecewise-constant function on ]0,1]."""
        flat = np.asarray(cell_values, dtype=float).ravel()[self.kept]
        return PiecewiseConstantFn(self.bounds, tuple(float(v) for v in flat))


def to_unit_interval(measure: PhaseSpaceMeasure) -> CellEquivalence:
    flat = measure.masses.ravel()
    kept = np.nonzero(flat > 0.0)[0]
    bounds = [ZERO]
    acc = ZERO
    for idx in kept:
        acc += Fraction(float(flat[idx]))
        bounds.append(acc)
    if abs(bounds[-1] - 1) > Fraction(1, 10**12):
        raise NotNormalized("cell masses do not sum to 1")
    bounds[-1] = ONE
    return CellEquivalence(kept, tuple(bounds))


def realize_barrier(
    obs: CellObservable, equiv: CellEquivalence
) -> tuple[PiecewiseAffineMap, PiecewiseConstantFn]:
    """Barrier on ]0,1[ whose assigned values reproduce the cell observable.

    Returns (barrier, transported function); the barrier is the factorization
    of the transported function against the observable's own CDF.
    """
    fn = equiv.pcf(obs.cell_values)
    return factor_against_cdf(fn, obs.cdf), fn


def shared_barrier_joint_gap(state: PhaseSpaceState) -> float:
    """How far the actual (position, momentum) joint law is from the unique
    joint law a single shared barrier could produce.

    A single barrier realizing both coordinate functions would force the pair
    onto the monotone coupling of the two marginal CDFs (both values are then
    quantiles of one uniform level).  Returns the max absolute difference of
    the two joint mass tables; a strictly positive gap certifies that
    position and momentum need different barriers.
    """
    measure = build_measure(state)
    joint = measure.joint_qp()
    q_cdf = _pushforward_cdf(
        np.broadcast_to(measure.q_grid[:, None], joint.shape).copy(), joint
    )
    p_cdf = _pushforward_cdf(
        np.broadcast_to(measure.p_grid[None, :], joint.shape).copy(), joint
    )
    q_index = {v: k for k, v in enumerate(q_cdf.support)}
    p_index = {v: k for k, v in enumerate(p_cdf.support)}
    actual = np.zeros((len(q_cdf.support), len(p_cdf.support)))
    for i, qv in enumerate(measure.q_grid):
        for j, pv in enumerate(measure.p_grid):
            m = float(joint[i, j])
            if m > 0.0:
                actual[q_index[float(qv)], p_index[float(pv)]] += m
    comonotone = np.zeros_like(actual)
    for i in range(len(q_cdf.support)):
        qlo, qhi = q_cdf.level_interval(i)
        for j in range(len(p_cdf.support)):
            plo, phi = p_cdf.level_interval(j)
            overlap = min(qhi, phi) - max(qlo, plo)
            if overlap > 0:
                comonotone[i, j] = float(overlap)
    return float(np.abs(actual - comonotone).max())
