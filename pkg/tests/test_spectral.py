"""Spectral atoms, step CDFs, quantiles, and functional calculus."""

from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcs.errors import DimensionMismatch, DomainGap, NonHermitian, NotNormalized, OutOfDomain
from qcs.spectral import (
    HermitianOperator,
    PiecewiseFn,
    PureState,
    QuantileFn,
    StepCDF,
    borel_apply,
    eigensystem,
    moment,
    quantile,
    spectral_cdf,
)
from qcs.states import squaring_witness_model
from qcs.random_objects import random_hermitian, random_pure_state


def test_identity_has_one_atom():
    es = eigensystem(HermitianOperator(np.eye(2, dtype=complex)))
    assert len(es.atoms) == 1
    lam, p = es.atoms[0]
    assert lam == 1.0
    assert np.array_equal(p, np.eye(2))


def test_diagonal_eigensystem_is_exact():
    es = eigensystem(HermitianOperator(np.diag([1.0, -1.0]).astype(complex)))
    assert es.eigenvalues == (-1.0, 1.0)
    assert np.array_equal(es.atoms[0][1], np.diag([0.0, 1.0]))
    assert np.array_equal(es.atoms[1][1], np.diag([1.0, 0.0]))


def test_sigma_x_projectors_reconstruct():
    sx = HermitianOperator(np.array([[0, 1], [1, 0]], dtype=complex))
    es = sx.eigensystem
    assert len(es.atoms) == 2
    for lam, p in es.atoms:
        assert abs(abs(lam) - 1.0) < 1e-12
        assert np.abs(p @ p - p).max() < 1e-12
        expected = (np.eye(2) + lam * sx.entries) / 2
        assert np.abs(p - expected).max() < 1e-12
    recon = sum(lam * p for lam, p in es.atoms)
    assert np.abs(recon - sx.entries).max() < 1e-12


def test_non_hermitian_rejected():
    with pytest.raises(NonHermitian):
        HermitianOperator(np.array([[0, 1], [0, 0]], dtype=complex))


def test_spectral_cdf_of_witness_model_is_bit_exact():
    model = squaring_witness_model()
    cdf = spectral_cdf(model.operator, model.state)
    assert cdf.support == (-1.0, 0.0, 1.0)
    assert cdf.levels == (0.625, 0.875, 1.0)


def test_spectral_cdf_identity_single_step():
    psi = PureState.normalized(np.array([1.0, 2.0, -1.0j]))
    cdf = spectral_cdf(HermitianOperator(np.eye(3, dtype=complex)), psi)
    assert cdf.support == (1.0,)
    assert cdf.levels == (1.0,)


def test_spectral_cdf_matches_bruteforce_subset_weights(rng):
    """Oracle: <E_B> computed as a direct quadratic form for every subset B
    of atoms must match sums of CDF weights."""
    a = random_hermitian(rng, 4)
    psi = random_pure_state(rng, 4)
    cdf = spectral_cdf(a, psi)
    es = a.eigensystem
    vec = psi.amplitudes
    for size in range(1, len(es.atoms) + 1):
        for subset in combinations(range(len(es.atoms)), size):
            e_b = sum(es.atoms[k][1] for k in subset)
            direct = float(np.vdot(vec, e_b @ vec).real)
            via_cdf = sum(
                w
                for r, w in zip(cdf.support, cdf.weights)
                for k in subset
                if abs(r - es.atoms[k][0]) < 1e-12
            )
            assert abs(direct - via_cdf) < 1e-10
    cum = 0.0
    for lam, _ in es.atoms:
        cum = cdf.evaluate(lam)
        direct = float(
            np.vdot(vec, sum(p for mu, p in es.atoms if mu <= lam) @ vec).real
        )
        assert abs(cum - direct) < 1e-10


def test_spectral_cdf_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        spectral_cdf(
            HermitianOperator(np.eye(2, dtype=complex)),
            PureState(np.array([1.0, 0.0, 0.0], dtype=complex)),
        )


def test_quantile_on_witness_levels():
    model = squaring_witness_model()
    cdf = spectral_cdf(model.operator, model.state)
    assert quantile(cdf, 0.5) == -1.0
    assert quantile(cdf, 0.7) == 0.0
    # the >= convention takes the atom at an exact level
    assert quantile(cdf, Fraction(7, 8)) == 0.0
    assert quantile(cdf, 0.875) == 0.0
    assert QuantileFn(cdf)(0.9) == 1.0


def test_quantile_rejects_out_of_domain():
    cdf = StepCDF((0.0,), (1.0,))
    for bad in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(OutOfDomain):
            quantile(cdf, bad)


def test_borel_square_on_witness_gives_two_atoms():
    model = squaring_witness_model()
    a2 = borel_apply(PiecewiseFn.square(), model.operator)
    es = a2.eigensystem
    assert [lam for lam, _ in es.atoms] == [0.0, 1.0]
    # A^2 projects onto the union of the two outer blocks
    assert np.abs(es.atoms[1][1] - (model.plus + model.minus)).max() < 1e-12


def test_borel_identity_keeps_operator():
    a = HermitianOperator(np.diag([0.5, -2.0, 3.0]).astype(complex))
    out = borel_apply(PiecewiseFn.identity(), a)
    assert np.abs(out.entries - a.entries).max() < 1e-12


def test_borel_affine_matches_direct_eigensystem():
    sz = HermitianOperator(np.diag([1.0, -1.0]).astype(complex))
    out = borel_apply(PiecewiseFn.affine(2.0, 1.0), sz)
    direct = eigensystem(HermitianOperator(2 * sz.entries + np.eye(2)))
    assert out.eigensystem.eigenvalues == direct.eigenvalues == (-1.0, 3.0)
    for (_, p), (_, q) in zip(out.eigensystem.atoms, direct.atoms):
        assert np.abs(p - q).max() < 1e-12


def test_borel_domain_gap():
    a = HermitianOperator(np.diag([0.0, 5.0]).astype(complex))
    clipped = PiecewiseFn.from_poly((0.0, 1.0), lo=-1.0, hi=1.0)
    with pytest.raises(DomainGap):
        borel_apply(clipped, a)


def test_moments_of_witness_model():
    model = squaring_witness_model()
    assert moment(model.operator, model.state, 1) == -0.5
    assert moment(model.operator, model.state, 0) == 1.0
    assert moment(model.operator, model.state, 2) == 0.75


def test_moment_matches_matrix_power(rng):
    a = random_hermitian(rng, 5)
    psi = random_pure_state(rng, 5)
    for k in range(4):
        matrix = np.linalg.matrix_power(a.entries, k)
        direct = float(np.vdot(psi.amplitudes, matrix @ psi.amplitudes).real)
        assert abs(moment(a, psi, k) - direct) < 1e-10


def test_pure_state_invariants():
    with pytest.raises(NotNormalized):
        PureState(np.array([1.0, 1.0], dtype=complex))
    a = PureState.normalized(np.array([1.0, 1.0], dtype=complex))
    b = PureState.normalized(np.array([1.0j, 1.0j], dtype=complex))
    assert a.projectively_equal(b)
    assert not a.projectively_equal(PureState(np.array([1.0, 0.0], dtype=complex)))


def test_piecewise_fn_monotone_gate():
    assert PiecewiseFn.affine(2.0, 1.0).is_strictly_increasing_on(-5, 5)
    assert not PiecewiseFn.square().is_strictly_increasing_on(-1, 1)
    assert PiecewiseFn.square().is_strictly_increasing_on(0.5, 2.0)
    cubic = PiecewiseFn.from_poly((0.0, 0.0, 0.0, 1.0))
    assert cubic.is_strictly_increasing_on(-1, 1)
    assert not PiecewiseFn.absolute().is_strictly_increasing_on(-1, 1)


@st.composite
def step_cdfs(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    support = sorted(draw(st.lists(st.integers(-50, 50), min_size=n, max_size=n, unique=True)))
    weights = draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    total = sum(weights)
    levels, cum = [], 0
    for w in weights:
        cum += w
        levels.append(cum / total)
    levels[-1] = 1.0
    return StepCDF(tuple(float(r) for r in support), tuple(levels))


@settings(max_examples=200, deadline=None)
@given(cdf=step_cdfs(), t=st.fractions(min_value=0, max_value=1).filter(lambda f: 0 < f <= 1))
def test_galois_pair_property(cdf, t):
    for k in range(len(cdf.support)):
        lo, hi = cdf.level_interval(k)
        s = lo + (hi - lo) * Fraction(t)
        if not (0 < s < 1):
            continue
        r = cdf.quantile(s)
        assert r == cdf.support[k]
        assert Fraction(cdf.evaluate(r)) >= s
        if cdf.levels[k] < 1.0:
            assert cdf.quantile(cdf.evaluate(cdf.support[k])) <= cdf.support[k]
