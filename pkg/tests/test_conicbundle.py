import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import make_bundle, pt
from conicert.conicbundle import (
    ConicBundle,
    candidate_points,
    condition_star,
    condition_star_star,
    fibre_split_direct,
    minimal_splitting_field,
    nonsplit_locus,
    normalize_at,
    pullback_bundle,
    residue_at,
    residue_tame_oracle,
)
from conicert.coversynth import Cover, compose_covers, double_cover
from conicert.exceptions import FieldMismatchError, InputError
from conicert.gf import field_spec
from conicert.p1curve import ClosedPoint, RationalMap, fibre, poly, poly_ints, rational_points


class TestConicBundle:
    def test_zero_coefficient_rejected(self, F3):
        with pytest.raises(InputError):
            make_bundle(F3, [0, 1], [], [2])

    def test_field_mismatch(self, F3, F5):
        with pytest.raises(FieldMismatchError):
            ConicBundle.create(F3, poly(F3, [1]), poly(F5, [1]), poly(F3, [2]))

    def test_to_dict(self, t_bundle):
        assert t_bundle.to_dict() == {"field": {"p": 3, "n": 1}, "a": [0, 1], "b": [2], "c": [2]}


class TestNormalization:
    def test_already_normalized(self, F3):
        form = normalize_at(make_bundle(F3, [0, 1], [1], [2]), pt(F3, 0))
        assert form.a_val == 1
        assert poly_ints(form.b_unit) == (1,)

    def test_even_powers_are_stripped(self, F3):
        form = normalize_at(make_bundle(F3, [0, 0, 0, 1], [1], [2]), pt(F3, 0))
        assert form.a_val == 1
        assert form.valuations == (3, 0, 0)
        assert poly_ints(form.b_unit) == (1,)

    def test_two_odd_slots(self, F3):
        # x^2 + t y^2 + t z^2: the fibre -y^2 - z^2 at t = 0 is non-split over F_3
        bundle = make_bundle(F3, [1], [0, 1], [0, 1])
        form = normalize_at(bundle, pt(F3, 0))
        assert form.a_val == 1
        assert poly_ints(form.b_unit) == (2,)
        assert not residue_at(bundle, pt(F3, 0)).trivial
        assert not fibre_split_direct(bundle, pt(F3, 0))


class TestResidues:
    def test_trivial_residue(self, F3):
        assert residue_at(make_bundle(F3, [0, 1], [1], [2]), pt(F3, 0)).trivial

    def test_nontrivial_at_zero(self, t_bundle, F3):
        residue = residue_at(t_bundle, pt(F3, 0))
        assert not residue.trivial
        assert poly_ints(residue.representative) == (2,)

    def test_nontrivial_at_infinity(self, t_bundle):
        assert not residue_at(t_bundle, ClosedPoint.infinity()).trivial

    def test_tame_oracle_examples(self, t_bundle, F3):
        assert not residue_tame_oracle(t_bundle, pt(F3, 0)).trivial
        assert residue_tame_oracle(t_bundle, pt(F3, 1)).trivial
        constant = make_bundle(F3, [1], [1], [2])
        for point in rational_points(F3):
            assert residue_tame_oracle(constant, point).trivial

    def test_residue_dict(self, t_bundle, F3):
        assert residue_at(t_bundle, pt(F3, 0)).to_dict(F3) == {
            "point": [0, 1], "degree": 1, "residue_representative": [2], "trivial": False,
        }


class TestLocus:
    def test_t_bundle(self, t_bundle, F3):
        locus = nonsplit_locus(t_bundle)
        assert list(locus.points) == [pt(F3, 0), ClosedPoint.infinity()]
        assert locus.delta == 2
        assert locus.degrees == [1, 1]

    def test_constant_bundle_is_split(self, F3):
        locus = nonsplit_locus(make_bundle(F3, [1], [1], [2]))
        assert len(locus) == 0
        assert locus.delta == 0

    def test_degree_two_point(self, F3):
        # (t^2 + 1, -1, -1): -1 is a square in F_9, so only infinity could be non-split
        locus = nonsplit_locus(make_bundle(F3, [1, 0, 1], [2], [2]))
        assert len(locus) == 0

    def test_degree_two_point_with_nonsquare_residue(self, F3):
        # t + 1 is a nonsquare modulo t^2 + 1
        bundle = make_bundle(F3, [1, 0, 1], [1, 1], [2])
        point = ClosedPoint.from_poly(poly(F3, [1, 0, 1]))
        assert not residue_at(bundle, point).trivial
        assert point in nonsplit_locus(bundle).points

    def test_candidates_include_infinity(self, t_bundle):
        assert ClosedPoint.infinity() in candidate_points(t_bundle)

    def test_direct_splitness(self, F3):
        assert fibre_split_direct(make_bundle(F3, [0, 1], [1], [2]), pt(F3, 0))
        assert not fibre_split_direct(make_bundle(F3, [0, 1], [2], [2]), pt(F3, 0))
        assert fibre_split_direct(make_bundle(F3, [1], [1], [2]), pt(F3, 0))

    def test_minimal_splitting_field(self, t_bundle, F3, F9):
        field = minimal_splitting_field(t_bundle, pt(F3, 0))
        assert field.degree == 2
        assert poly_ints(field.witness) == (2,)
        assert minimal_splitting_field(make_bundle(F3, [1], [1], [2]), pt(F3, 0)).degree == 1
        over_f9 = make_bundle(F9, [0, 1], [2], [2])
        assert minimal_splitting_field(over_f9, pt(F9, 0)).degree == 1


class TestConditions:
    @pytest.mark.parametrize("degrees, star, star_star", [
        ([], True, True),
        ([1, 1], True, True),
        ([1, 1, 2], True, True),
        ([1, 3], True, True),
        ([1, 2, 3], True, False),
        ([2, 2], False, False),
        ([3, 5], False, False),
        ([4], False, False),
    ])
    def test_conditions(self, degrees, star, star_star):
        assert condition_star(degrees) is star
        assert condition_star_star(degrees) is star_star

    def test_accepts_locus(self, t_bundle):
        locus = nonsplit_locus(t_bundle)
        assert condition_star(locus) and condition_star_star(locus)


class TestPullback:
    def test_square_kills_t_bundle(self, t_bundle, F3):
        pulled = pullback_bundle(t_bundle, RationalMap.polynomial(F3, [0, 0, 1]))
        assert poly_ints(pulled.a) == (1,)
        assert len(nonsplit_locus(pulled)) == 0

    def test_identity_keeps_locus(self, t_bundle, F3):
        pulled = pullback_bundle(t_bundle, RationalMap.identity(F3))
        assert nonsplit_locus(pulled).points == nonsplit_locus(t_bundle).points

    def test_constant_bundle_stays_split(self, F3):
        phi = RationalMap.create(F3, poly(F3, [1, 0, 1]), poly(F3, [0, 1]))
        assert len(nonsplit_locus(pullback_bundle(make_bundle(F3, [1], [1], [2]), phi))) == 0

    def test_field_mismatch(self, t_bundle, F5):
        with pytest.raises(FieldMismatchError):
            pullback_bundle(t_bundle, RationalMap.identity(F5))


_FIELDS = [(3,), (5,), (7,), (3, 2, (1, 0, 1))]


def _coefficients(q):
    return st.lists(st.integers(0, q - 1), min_size=1, max_size=5).filter(any)


def _bundles():
    def for_field(params):
        q = field_spec(*params).q
        return st.tuples(st.just(params), _coefficients(q), _coefficients(q), _coefficients(q))
    return st.sampled_from(_FIELDS).flatmap(for_field)


@settings(max_examples=500, deadline=None)
@given(_bundles())
def test_residue_agrees_with_tame_symbol(data):
    params, a, b, c = data
    spec = field_spec(*params)
    bundle = make_bundle(spec, a, b, c)
    for point in candidate_points(bundle) + rational_points(spec):
        direct = residue_at(bundle, point)
        tame = residue_tame_oracle(bundle, point)
        assert direct.trivial == tame.trivial
        assert direct.same_class(spec, tame)


@settings(max_examples=500, deadline=None)
@given(_bundles())
def test_residue_agrees_with_direct_splitness(data):
    params, a, b, c = data
    spec = field_spec(*params)
    bundle = make_bundle(spec, a, b, c)
    for point in candidate_points(bundle):
        assert residue_at(bundle, point).trivial == fibre_split_direct(bundle, point)


@settings(max_examples=500, deadline=None)
@given(_bundles())
def test_locus_has_even_size(data):
    params, a, b, c = data
    assert len(nonsplit_locus(make_bundle(field_spec(*params), a, b, c))) % 2 == 0


@settings(max_examples=500, deadline=None)
@given(_bundles(), st.lists(st.integers(0, 8), min_size=1, max_size=3))
def test_square_factors_change_nothing(data, g_coeffs):
    params, a, b, c = data
    spec = field_spec(*params)
    g = poly(spec, [x % spec.q for x in g_coeffs])
    assume(poly_ints(g))
    bundle = make_bundle(spec, a, b, c)
    scaled = ConicBundle.create(spec, bundle.a * g * g, bundle.b, bundle.c)
    assert nonsplit_locus(scaled).points == nonsplit_locus(bundle).points


@settings(max_examples=200, deadline=None)
@given(_bundles(), st.lists(st.tuples(st.integers(0, 100), st.integers(0, 100), st.booleans()),
                            min_size=1, max_size=3))
def test_base_change_parity_law(data, layers):
    params, a, b, c = data
    spec = field_spec(*params)
    bundle = make_bundle(spec, a, b, c)
    points = rational_points(spec)
    cover = Cover.identity(spec)
    for i, j, twist in layers:
        P, Q = points[i % len(points)], points[j % len(points)]
        assume(P != Q)
        cover = compose_covers(cover, double_cover(spec, P, Q, twist))
    pulled = nonsplit_locus(pullback_bundle(bundle, cover.map)).points
    locus = nonsplit_locus(bundle).points
    expected = set()
    for s in locus:
        expected.update(fp.point for fp in fibre(cover.map, s) if (fp.e * fp.f) % 2)
    assert set(pulled) == expected
