"""Quadratic forms, observable-function algebra, and lifted unitary dynamics.

Unitary evolution lifts to the space of complete states through a complex of
measure equivalences: the state moves by the unitary, the label and barrier
move through the equivalences so that the barrier level of the label is
untouched.  All map algebra is exact; time evolution uses spectral
exponentials, so no integrator error enters the theorem checks.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    NonHermitian,
    OutOfDomain,
    UndefinedEquivalence,
)
from .measure_maps import (
    MapSpec,
    PiecewiseAffineMap,
    build_map,
    compose,
    invert,
)
from .sampling import uniform_labels
from .spectral import HermitianOperator, PureState, spectral_cdf
from .states import (
    BarrierComplex,
    CompleteState,
    ObservableFunction,
    label_mean,
    value,
)

UNITARY_TOL = 1e-10


def pauli_x() -> HermitianOperator:
    return HermitianOperator(np.array([[0, 1], [1, 0]], dtype=complex))


def pauli_y() -> HermitianOperator:
    return HermitianOperator(np.array([[0, -1j], [1j, 0]], dtype=complex))


def pauli_z() -> HermitianOperator:
    return HermitianOperator(np.array([[1, 0], [0, -1]], dtype=complex))


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {m.shape}")
        dev = float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())
        if dev > UNITARY_TOL:
            raise NonHermitian(f"matrix deviates from unitarity by {dev:.3e}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def hadamard(cls) -> "UnitaryOperator":
        return cls(np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2))

    def apply(self, psi: PureState, tag: str | None = None) -> PureState:
        if self.dim != psi.dim:
            raise DimensionMismatch(f"unitary dim {self.dim} vs state dim {psi.dim}")
        return PureState.normalized(self.entries @ psi.amplitudes, tag=tag)

    def conjugate(self, a: HermitianOperator) -> HermitianOperator:
        """U^-1 A U, symmetrized to stay exactly Hermitian."""
        m = self.entries.conj().T @ a.entries @ self.entries
        return HermitianOperator((m + m.conj().T) / 2)


@dataclass(frozen=True, eq=False)
class EquivalenceComplex:
    """A bijective measure-preserving map of ]0,1[ for every state, given by
    a default spec plus overrides keyed by state tag."""

    default: MapSpec | None
    overrides: Mapping[str | None, MapSpec] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "overrides", dict(self.overrides))
        object.__setattr__(self, "_built", {})
        specs = list(self.overrides.values())
        if self.default is not None:
            specs.append(self.default)
        for spec in specs:
            self._pair(spec)

    @classmethod
    def identity(cls) -> "EquivalenceComplex":
        return cls(MapSpec.identity())

    def _pair(self, spec: MapSpec) -> tuple[PiecewiseAffineMap, PiecewiseAffineMap]:
        cache = self.__dict__["_built"]
        if spec not in cache:
            fwd = build_map(spec)
            if not fwd.measure_preserving:
                raise UndefinedEquivalence(f"map spec {spec} is not measure preserving")
            cache[spec] = (fwd, invert(fwd))
        return cache[spec]

    def spec_for(self, psi: PureState) -> MapSpec:
        spec = self.overrides.get(psi.tag, self.default)
        if spec is None:
            raise UndefinedEquivalence(f"no equivalence for state tag {psi.tag!r}")
        return spec

    def forward(self, psi: PureState) -> PiecewiseAffineMap:
        return self._pair(self.spec_for(psi))[0]

    def inverse(self, psi: PureState) -> PiecewiseAffineMap:
        return self._pair(self.spec_for(psi))[1]


def lifted_components(
    u: UnitaryOperator,
    sigma: EquivalenceComplex,
    psi: PureState,
    barrier: PiecewiseAffineMap,
) -> tuple[PureState, PiecewiseAffineMap, PiecewiseAffineMap]:
    """(new state, new barrier, label transport) of the lifted automorphism.

    The new barrier is barrier o sigma_psi^-1 o sigma_newpsi and the label
    moves by sigma_newpsi^-1 o sigma_psi, so barrier(z) is preserved exactly.
    """
    new_psi = u.apply(psi)
    sig_fwd = sigma.forward(psi)
    sig_inv = sigma.inverse(psi)
    new_fwd = sigma.forward(new_psi)
    new_inv = sigma.inverse(new_psi)
    transport = compose(new_inv, sig_fwd)
    new_barrier = compose(barrier, compose(sig_inv, new_fwd))
    return new_psi, new_barrier, transport


def lift_unitary(
    u: UnitaryOperator, sigma: EquivalenceComplex, c: CompleteState
) -> CompleteState:
    """Deterministic image of a complete state under the lifted unitary."""
    new_psi, new_barrier, transport = lifted_components(u, sigma, c.state, c.barrier)
    new_z = transport(c.z)
    return CompleteState(new_psi, new_barrier, new_z)


@dataclass(frozen=True, eq=False)
class LiftedAutomorphism:
    """The automorphism of complete states induced by (unitary, equivalences)."""

    unitary: UnitaryOperator
    sigma: EquivalenceComplex

    def __call__(self, c: CompleteState) -> CompleteState:
        return lift_unitary(self.unitary, self.sigma, c)

    def inverse(self) -> "LiftedAutomorphism":
        return LiftedAutomorphism(UnitaryOperator(self.unitary.entries.conj().T), self.sigma)


# ---------------------------------------------------------------------------
# Quadratic forms and gradients

def quadratic_form(f: ObservableFunction, phi: Sequence[complex]) -> float:
    """norm^2 times the label mean on the normalized state; extends
    continuously to 0 where it equals the matrix form exactly."""
    vec = np.asarray(phi, dtype=complex).reshape(-1)
    if vec.shape[0] != f.operator.dim:
        raise DimensionMismatch(f"vector dim {vec.shape[0]} vs operator dim {f.operator.dim}")
    nrm2 = float(np.vdot(vec, vec).real)
    if nrm2 == 0.0:
        return 0.0
    psi = PureState(vec / math.sqrt(nrm2))
    return nrm2 * f.expectation(psi)


def gradient_check(f: ObservableFunction, psi: PureState, h: float = 1e-5) -> float:
    """Central-difference gradient of the quadratic form in the 2*dim real
    coordinates against twice the operator acting on the state; returns the
    max-norm error relative to the target's max norm."""
    if not (1e-7 <= h <= 1e-3):
        raise OutOfDomain("step must lie in [1e-7, 1e-3]")
    base = psi.amplitudes.astype(complex)
    dim = base.shape[0]
    grad = np.zeros(dim, dtype=complex)
    for k in range(dim):
        for which in (1.0, 1.0j):
            bump = np.zeros(dim, dtype=complex)
            bump[k] = which * h
            plus = quadratic_form(f, base + bump)
            minus = quadratic_form(f, base - bump)
            diff = (plus - minus) / (2 * h)
            grad[k] += diff * which
    target = 2.0 * (f.operator.entries @ base)
    scale = max(float(np.abs(target).max()), 1e-300)
    return float(np.abs(grad - target).max()) / scale


# ---------------------------------------------------------------------------
# Algebra on observable functions

@dataclass(frozen=True, eq=False)
class ComplexObservable:
    """Complexified product function: real and imaginary observable parts."""

    real_part: ObservableFunction
    imag_part: ObservableFunction

    @property
    def operator(self) -> np.ndarray:
        return self.real_part.operator.entries + 1j * self.imag_part.operator.entries

    def expectation(self, psi: PureState) -> complex:
        return complex(self.real_part.expectation(psi), self.imag_part.expectation(psi))

    def quadratic_form(self, phi: Sequence[complex]) -> complex:
        return complex(quadratic_form(self.real_part, phi), quadratic_form(self.imag_part, phi))


def algebra_product(kind: str, f: ObservableFunction, g: ObservableFunction):
    """Lie, Jordan, or star product of observable functions, via the
    corresponding operator product under f's barrier complex.

    lie(A,B) = -(i/2)(AB - BA); jordan(A,B) = (AB + BA)/2; star = jordan
    plus i times lie, which is the plain operator product and is returned as
    a complex-valued observable.
    """
    a, b = f.operator.entries, g.operator.entries
    if a.shape != b.shape:
        raise DimensionMismatch("operators must share a dimension")
    if kind == "lie":
        m = -0.5j * (a @ b - b @ a)
        return ObservableFunction(HermitianOperator((m + m.conj().T) / 2), f.barrier_complex)
    if kind == "jordan":
        m = 0.5 * (a @ b + b @ a)
        return ObservableFunction(HermitianOperator((m + m.conj().T) / 2), f.barrier_complex)
    if kind == "star":
        return ComplexObservable(
            algebra_product("jordan", f, g), algebra_product("lie", f, g)
        )
    raise OutOfDomain(f"unknown product kind {kind!r}")


def dispersion(f: ObservableFunction, psi: PureState) -> float:
    """Label-side standard deviation of the assigned values."""
    fn = f.level_fn(psi)
    m1 = label_mean(fn)
    m2 = label_mean(fn, power=2)
    return math.sqrt(max(0.0, m2 - m1 * m1))


def heisenberg_check(
    f: ObservableFunction, g: ObservableFunction, psi: PureState
) -> tuple[float, float, bool]:
    """(product of dispersions, |mean of the lie product|, inequality holds)."""
    lhs = dispersion(f, psi) * dispersion(g, psi)
    rhs = abs(algebra_product("lie", f, g).expectation(psi))
    return lhs, rhs, lhs >= rhs - 1e-12


# ---------------------------------------------------------------------------
# Evolution

def evolve(h: HermitianOperator, t: float, psi0: PureState) -> PureState:
    """Spectral propagation: sum over atoms of exp(-i lambda t) P psi."""
    if h.dim != psi0.dim:
        raise DimensionMismatch(f"generator dim {h.dim} vs state dim {psi0.dim}")
    out = np.zeros(h.dim, dtype=complex)
    for lam, p in h.eigensystem.atoms:
        out += cmath.exp(-1j * lam * t) * (p @ psi0.amplitudes)
    return PureState.normalized(out)


def intertwine_check(
    a: HermitianOperator,
    u: UnitaryOperator,
    sigma: EquivalenceComplex,
    psi: PureState,
    barrier: PiecewiseAffineMap,
    n: int = 1000,
    seed: int = 0,
    tol: float = 1e-10,
) -> bool:
    """Evaluate (U^-1 A U) on (psi, barrier, z) and A on the lifted complete
    state at sampled labels; both sides must agree within tol.

    Labels are drawn away from all breakpoints involved and away from level
    boundaries of either CDF, honoring the a.e. nature of the identity.
    """
    conj = u.conjugate(a)
    new_psi, new_barrier, transport = lifted_components(u, sigma, psi, barrier)
    cdf_lhs = spectral_cdf(conj, psi)
    cdf_rhs = spectral_cdf(a, new_psi)
    guard_levels = np.array(sorted(set(cdf_lhs.levels[:-1]) | set(cdf_rhs.levels[:-1])))
    bps = sorted(
        {float(x) for x in barrier.breakpoints}
        | {float(x) for x in transport.breakpoints}
        | {float(x) for x in new_barrier.breakpoints}
    )
    bps_arr = np.array(bps)
    accepted = 0
    position = 0
    while accepted < n:
        batch = uniform_labels(seed, position, 4 * n)
        position += 4 * n
        for zf in batch:
            if np.abs(zf - bps_arr).min() < 1e-12:
                continue
            s_float = float(barrier.evaluate_floats(np.array([zf]))[0])
            if guard_levels.size and np.abs(s_float - guard_levels).min() < 1e-9:
                continue
            z = Fraction(float(zf))
            lhs = value(conj, CompleteState(psi, barrier, z))
            z2 = transport(z)
            if new_barrier.is_breakpoint(z2):
                continue
            if new_barrier(z2) != barrier(z):
                return False
            rhs = value(a, CompleteState(new_psi, new_barrier, z2))
            if abs(lhs - rhs) > tol:
                return False
            accepted += 1
            if accepted >= n:
                break
        if position > 64 * n:
            raise OutOfDomain("could not draw enough labels away from breakpoints")
    return True


def schrodinger_equivalence_check(
    f: ObservableFunction,
    h_fn: ObservableFunction,
    h: HermitianOperator,
    psi0: PureState,
    t0: float,
    dt: float = 1e-4,
) -> tuple[float, float, float]:
    """(time derivative of the label mean, twice the lie-product mean, gap).

    The left side is a central difference of the label-side expectation along
    the spectral evolution; the right side is evaluated at t0.
    """
    if not (1e-7 <= dt <= 1e-3):
        raise OutOfDomain("dt must lie in [1e-7, 1e-3]")
    if float(np.abs(h_fn.operator.entries - h.entries).max()) > 1e-10:
        raise DimensionMismatch("h_fn must be the observable function of the generator")
    plus = f.expectation(evolve(h, t0 + dt, psi0))
    minus = f.expectation(evolve(h, t0 - dt, psi0))
    lhs = (plus - minus) / (2 * dt)
    rhs = 2.0 * algebra_product("lie", f, h_fn).expectation(evolve(h, t0, psi0))
    return lhs, rhs, abs(lhs - rhs)


def evolution_expectation_check(
    a: HermitianOperator,
    h: HermitianOperator,
    psi0: PureState,
    barriers: BarrierComplex,
    times: Sequence[float],
) -> float:
    """Max gap over times between the matrix expectation on the evolved state
    and the label mean taken with the initial barrier complex on the evolved
    state's CDF (the shared label measure is Lebesgue)."""
    f = ObservableFunction(a, barriers)
    worst = 0.0
    for t in times:
        psi_t = evolve(h, float(t), psi0)
        op_side = a.expectation(psi_t)
        label_side = f.expectation(psi_t)
        worst = max(worst, abs(op_side - label_side))
    return worst
