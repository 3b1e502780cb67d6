"""Exact map algebra: pushforwards, composition, inversion, factorization."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcs.errors import (
    BadSpec,
    DistributionMismatch,
    NotInjective,
    OutOfDomain,
    ValueNotInSupport,
)
from qcs.measure_maps import (
    AffinePiece,
    MapSpec,
    PiecewiseAffineMap,
    PiecewiseConstantDensity,
    PiecewiseConstantFn,
    build_map,
    compose,
    factor_against_cdf,
    intervals_complement,
    intervals_measure,
    intervals_symmdiff,
    invert,
    level_function,
    map_equal_ae,
    preimage_intervals,
    pushforward_density,
    quantile_pcf,
    verify_measure_preserving,
)
from qcs.spectral import StepCDF

F = Fraction
IDENTITY = build_map(MapSpec.identity())


def halving_map():
    """u -> u/2, total but not measure preserving."""
    return PiecewiseAffineMap((AffinePiece(F(0), F(1), F(1, 2), F(0)),))


def test_rotation_pieces():
    rot = build_map(MapSpec.rotation(F(3, 8)))
    assert len(rot.pieces) == 2
    assert rot(F(1, 2)) == F(7, 8)
    assert rot(F(3, 4)) == F(1, 8)
    assert rot.measure_preserving


def test_identity_map():
    assert len(IDENTITY.pieces) == 1
    assert IDENTITY(F(1, 3)) == F(1, 3)
    assert IDENTITY.measure_preserving


def test_expanding_two_pushforward_is_uniform():
    m = build_map(MapSpec.expanding(2))
    assert len(m.pieces) == 2
    image = pushforward_density(m, PiecewiseConstantDensity.uniform())
    assert all(d == 1 for _, _, d in image.cells)
    assert image.mass == 1


def test_interval_exchange_swap_is_rotation():
    iet = build_map(MapSpec.interval_exchange([F(1, 2), F(1, 2)], [1, 0]))
    assert map_equal_ae(iet, build_map(MapSpec.rotation(F(1, 2))))


def test_bad_specs_rejected():
    with pytest.raises(BadSpec):
        MapSpec.rotation(F(3, 2))
    with pytest.raises(BadSpec):
        MapSpec.expanding(1)
    with pytest.raises(BadSpec):
        MapSpec.interval_exchange([F(1, 2), F(1, 4)], [1, 0])
    with pytest.raises(BadSpec):
        MapSpec.interval_exchange([F(1, 2), F(1, 2)], [0, 0])
    with pytest.raises(BadSpec):
        MapSpec("composition", maps=())


def test_rotation_preserves_uniform():
    rot = build_map(MapSpec.rotation(F(2, 7)))
    image = pushforward_density(rot, PiecewiseConstantDensity.uniform())
    assert all(d == 1 for _, _, d in image.cells)


def test_expanding_three_preserves_uniform():
    m = build_map(MapSpec.expanding(3))
    image = pushforward_density(m, PiecewiseConstantDensity.uniform())
    assert all(d == 1 for _, _, d in image.cells)


def test_halving_map_density():
    image = pushforward_density(halving_map(), PiecewiseConstantDensity.uniform())
    lookup = {(a, b): d for a, b, d in image.cells}
    assert lookup == {(F(0), F(1, 2)): F(2), (F(1, 2), F(1)): F(0)}
    assert not verify_measure_preserving(halving_map())


def test_chordal_parabola_is_not_preserving():
    # two-chord approximation of u -> u^2
    chords = PiecewiseAffineMap(
        (
            AffinePiece(F(0), F(1, 2), F(1, 2), F(0)),
            AffinePiece(F(1, 2), F(1), F(3, 2), F(-1, 2)),
        )
    )
    assert not verify_measure_preserving(chords)


def test_compose_rotations_cancel():
    r1 = build_map(MapSpec.rotation(F(3, 8)))
    r2 = build_map(MapSpec.rotation(F(5, 8)))
    assert map_equal_ae(compose(r1, r2), IDENTITY)
    assert map_equal_ae(compose(r2, r1), IDENTITY)


def test_compose_with_identity():
    m = build_map(MapSpec.expanding(3))
    assert map_equal_ae(compose(m, IDENTITY), m)
    assert map_equal_ae(compose(IDENTITY, m), m)


def test_compose_preserves_measure():
    m = compose(build_map(MapSpec.expanding(2)), build_map(MapSpec.rotation(F(1, 2))))
    assert m.measure_preserving


def test_composition_spec_applies_in_order():
    spec = MapSpec.composition(MapSpec.rotation(F(1, 4)), MapSpec.rotation(F(1, 2)))
    assert map_equal_ae(build_map(spec), build_map(MapSpec.rotation(F(3, 4))))


def test_invert_rotation():
    for c in (F(1, 3), F(7, 11)):
        m = build_map(MapSpec.rotation(c))
        minv = invert(m)
        assert map_equal_ae(minv, build_map(MapSpec.rotation(1 - c)))
        assert map_equal_ae(compose(minv, m), IDENTITY)


def test_invert_identity():
    assert map_equal_ae(invert(IDENTITY), IDENTITY)


def test_invert_expanding_not_injective():
    with pytest.raises(NotInjective):
        invert(build_map(MapSpec.expanding(2)))


def test_invert_non_surjective_rejected():
    with pytest.raises(NotInjective):
        invert(halving_map())


def test_preimage_intervals_of_rotation():
    rot = build_map(MapSpec.rotation(F(3, 8)))
    # preimage of ]5/8, 1] under u+3/8 mod 1
    parts = preimage_intervals(rot, F(5, 8), F(1))
    assert intervals_measure(parts) == F(3, 8)
    assert parts == [(F(1, 4), F(5, 8))]


def test_interval_set_algebra():
    a = [(F(0), F(5, 8)), (F(7, 8), F(1))]
    b = [(F(1, 4), F(1))]
    sym = intervals_symmdiff(a, b)
    assert intervals_measure(sym) == F(1, 2)
    assert sym == [(F(0), F(1, 4)), (F(5, 8), F(7, 8))]
    assert intervals_complement(b) == [(F(0), F(1, 4))]


def test_map_domain_guard():
    with pytest.raises(OutOfDomain):
        IDENTITY(F(0))
    with pytest.raises(OutOfDomain):
        IDENTITY(1)


def test_pcf_basics():
    fn = PiecewiseConstantFn((F(0), F(1, 2), F(1)), (2.0, -1.0))
    assert fn(F(1, 4)) == 2.0
    assert fn(F(1, 2)) == 2.0
    assert fn(F(3, 4)) == -1.0
    masses = fn.masses_by_value()
    assert masses[2.0] == F(1, 2) and masses[-1.0] == F(1, 2)


def test_factor_of_quantile_is_identity():
    cdf = StepCDF((-1.0, 0.0, 1.0), (0.625, 0.875, 1.0))
    alpha = factor_against_cdf(quantile_pcf(cdf), cdf)
    assert map_equal_ae(alpha, IDENTITY)


def test_factor_roundtrip_through_rotation():
    cdf = StepCDF((-1.0, 0.0, 1.0), (0.625, 0.875, 1.0))
    rot = build_map(MapSpec.rotation(F(1, 4)))
    fn = level_function(cdf, rot)
    alpha = factor_against_cdf(fn, cdf)
    assert verify_measure_preserving(alpha)
    assert level_function(cdf, alpha).equal_ae(fn)
    # the recovered map need not equal the rotation pointwise, only the
    # induced values must match
    image = pushforward_density(alpha, PiecewiseConstantDensity.uniform())
    assert all(d == 1 for _, _, d in image.cells)


def test_factor_constant_against_two_atoms_mismatch():
    cdf = StepCDF((0.0, 1.0), (0.5, 1.0))
    constant = PiecewiseConstantFn((F(0), F(1)), (0.0,))
    with pytest.raises(DistributionMismatch):
        factor_against_cdf(constant, cdf)


def test_factor_value_not_in_support():
    cdf = StepCDF((0.0, 1.0), (0.5, 1.0))
    stranger = PiecewiseConstantFn((F(0), F(1, 2), F(1)), (0.0, 7.0))
    with pytest.raises(ValueNotInSupport):
        factor_against_cdf(stranger, cdf)


def test_factor_lands_inside_level_intervals():
    cdf = StepCDF((-2.0, 3.0), (0.3, 1.0))
    rot = build_map(MapSpec.rotation(F(1, 3)))
    fn = level_function(cdf, rot)
    alpha = factor_against_cdf(fn, cdf)
    for lo, hi, v in fn.cells():
        mid = (lo + hi) / 2
        k = cdf.support.index(v)
        lvl_lo, lvl_hi = cdf.level_interval(k)
        assert lvl_lo <= alpha(mid) <= lvl_hi


def reflection_map():
    """u -> 1 - u: the simplest measure-preserving map with negative slope."""
    return PiecewiseAffineMap((AffinePiece(F(0), F(1), F(-1), F(1)),))


def test_reflection_is_measure_preserving():
    m = reflection_map()
    assert verify_measure_preserving(m)
    image = pushforward_density(m, PiecewiseConstantDensity.uniform())
    assert all(d == 1 for _, _, d in image.cells)


def test_reflection_preimages_and_inverse():
    m = reflection_map()
    assert preimage_intervals(m, F(1, 4), F(1, 2)) == [(F(1, 2), F(3, 4))]
    assert map_equal_ae(invert(m), m)
    assert map_equal_ae(compose(m, m), IDENTITY)


def test_reflection_composes_with_rotation():
    m = compose(reflection_map(), build_map(MapSpec.rotation(F(1, 3))))
    assert m.measure_preserving
    z = F(1, 5)
    assert m(z) == 1 - ((z + F(1, 3)))


def test_reflection_as_barrier_gives_exact_distribution():
    from qcs.states import squaring_witness_model, value_distribution

    model = squaring_witness_model()
    dist = value_distribution(model.operator, model.state, reflection_map())
    assert [p for _, p in dist] == [F(5, 8), F(1, 4), F(1, 8)]


def test_level_function_through_reflection():
    cdf = StepCDF((-1.0, 0.0, 1.0), (0.625, 0.875, 1.0))
    fn = level_function(cdf, reflection_map())
    # reflected labels: low labels now map to high levels
    assert fn(F(1, 16)) == 1.0
    assert fn(F(1, 4)) == 0.0
    assert fn(F(1, 2)) == -1.0
    alpha = factor_against_cdf(fn, cdf)
    assert verify_measure_preserving(alpha)
    assert level_function(cdf, alpha).equal_ae(fn)


# ---------------------------------------------------------------------------
# Property tests

rationals = st.fractions(min_value=0, max_value=1, max_denominator=32)


@st.composite
def simple_specs(draw):
    kind = draw(st.sampled_from(["rotation", "expanding", "interval_exchange"]))
    if kind == "rotation":
        return MapSpec.rotation(draw(rationals.filter(lambda f: f < 1)))
    if kind == "expanding":
        return MapSpec.expanding(draw(st.integers(2, 4)))
    n = draw(st.integers(2, 4))
    weights = draw(st.lists(st.integers(1, 6), min_size=n, max_size=n))
    total = sum(weights)
    lengths = [Fraction(w, total) for w in weights]
    perm = draw(st.permutations(range(n)))
    return MapSpec.interval_exchange(lengths, perm)


@settings(max_examples=80, deadline=None)
@given(spec=simple_specs())
def test_built_maps_preserve_measure(spec):
    m = build_map(spec)
    image = pushforward_density(m, PiecewiseConstantDensity.uniform())
    assert image.mass == 1
    assert all(d == 1 for _, _, d in image.cells)


@settings(max_examples=60, deadline=None)
@given(s1=simple_specs(), s2=simple_specs())
def test_composition_group_closure(s1, s2):
    m = compose(build_map(s1), build_map(s2))
    assert m.measure_preserving


@settings(max_examples=60, deadline=None)
@given(spec=simple_specs().filter(lambda s: s.kind != "expanding"))
def test_inversion_group_closure(spec):
    m = build_map(spec)
    minv = invert(m)
    assert minv.measure_preserving
    assert map_equal_ae(compose(minv, m), IDENTITY)
    assert map_equal_ae(compose(m, minv), IDENTITY)


@settings(max_examples=40, deadline=None)
@given(spec=simple_specs(), z=rationals.filter(lambda f: 0 < f < 1))
def test_pointwise_composition_agrees(spec, z):
    m1 = build_map(spec)
    m2 = build_map(MapSpec.rotation(F(2, 5)))
    composed = compose(m1, m2)
    if composed.is_breakpoint(z) or m2.is_breakpoint(z):
        return
    assert composed(z) == m1(m2(z))
