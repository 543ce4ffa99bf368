from itertools import islice

import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import make_bundle, pt
from conicert.certify import (
    bundle_with_prescribed_locus,
    make_rng,
    verify_chain,
    verify_parity,
    verify_pullback_vanishing,
    verify_requiv,
)
from conicert.conicbundle import NonSplitLocus, nonsplit_locus
from conicert.coversynth import (
    Cover,
    CoverStep,
    branch_points,
    classify_fibres,
    double_cover,
    double_cover_from_discriminant,
    fibral_discriminant,
    kill_rational_residues,
    quadruple_point_cover,
    reduce_degree_cover,
    search_rational_tower,
    synth_requiv_cover,
    synth_unirational_cover,
    twist_cover,
)
from conicert.exceptions import HypothesisError, MapError, PointError, SynthesisError
from conicert.gf import field_spec
from conicert.p1curve import (
    ClosedPoint,
    FibrePoint,
    RationalMap,
    fibre,
    points_of_degree,
    poly,
    poly_ints,
    random_point,
    rational_points,
    standard_quadratic_point,
)

INF = ClosedPoint.infinity()


def square(spec):
    return RationalMap.polynomial(spec, [0, 0, 1])


def has_rational_point_over(cover, s):
    return any(fp.f == 1 for fp in fibre(cover.map, s))


class TestCover:
    def test_unknown_step_kind(self, F3):
        with pytest.raises(MapError):
            CoverStep("blowup", square(F3))

    def test_identity(self, F3):
        cover = Cover.identity(F3)
        assert cover.degree == 1
        assert cover.recompose() == cover.map

    def test_to_dict(self, F3):
        cover = Cover.from_step("squaring", square(F3))
        data = cover.to_dict()
        assert data["num"] == [0, 0, 1]
        assert data["den"] == [1]
        assert [step["kind"] for step in data["chain"]] == ["squaring"]


class TestDoubleCover:
    def test_zero_infinity(self, F5):
        cover = double_cover(F5, pt(F5, 0), INF)
        assert cover.map == square(F5)
        assert [step.kind for step in cover.chain] == ["squaring"]
        assert fibre(cover.map, pt(F5, 0)) == [FibrePoint(pt(F5, 0), 2, 1)]

    def test_twisted(self, F5):
        cover = double_cover(F5, pt(F5, 0), INF, twist=True)
        assert cover.map == RationalMap.create(F5, poly(F5, [0, 0, 1]), poly(F5, [2]))
        assert [(fp.e, fp.f) for fp in fibre(cover.map, pt(F5, 1))] == [(1, 2)]

    def test_general_branch_points(self, F3):
        cover = double_cover(F3, pt(F3, 1), pt(F3, 2))
        assert cover.degree == 2
        for s in (pt(F3, 1), pt(F3, 2)):
            fib = fibre(cover.map, s)
            assert [(fp.e, fp.f) for fp in fib] == [(2, 1)]
            assert fib[0].point == s
        assert cover.recompose() == cover.map

    def test_rejects_equal_points(self, F3):
        with pytest.raises(PointError):
            double_cover(F3, pt(F3, 1), pt(F3, 1))

    def test_rejects_non_rational(self, F3):
        point = ClosedPoint.from_poly(poly(F3, [1, 0, 1]))
        with pytest.raises(PointError):
            double_cover(F3, point, INF)

    def test_classify_fibres(self, F5):
        cover = double_cover(F5, pt(F5, 0), INF)
        points = [pt(F5, a) for a in (0, 1, 2, 4)]
        result = classify_fibres(cover, points)
        assert result.ts == (pt(F5, 1), pt(F5, 4))
        assert result.inert == (pt(F5, 2),)
        assert result.ramified == (pt(F5, 0),)

    def test_classify_needs_degree_two(self, F5):
        with pytest.raises(MapError):
            classify_fibres(Cover.identity(F5), [pt(F5, 0)])


class TestDiscriminant:
    def test_discriminant_of_square(self, F5):
        delta = fibral_discriminant(square(F5))
        assert poly_ints(delta) == (0, 4)
        assert branch_points(square(F5)) == [pt(F5, 0), INF]

    def test_twist_of_square(self, F5):
        twisted = twist_cover(Cover.from_step("squaring", square(F5)))
        assert twisted.map == RationalMap.create(F5, poly(F5, [3]), poly(F5, [0, 0, 1]))
        assert branch_points(twisted.map) == [pt(F5, 0), INF]
        assert [(fp.e, fp.f) for fp in fibre(twisted.map, pt(F5, 1))] == [(1, 2)]
        assert twisted.chain[0].kind == "twist"

    def test_twist_flips_rational_fibres(self, F5):
        cover = double_cover(F5, pt(F5, 1), pt(F5, 3))
        twisted = twist_cover(cover)
        for s in rational_points(F5):
            if s in (pt(F5, 1), pt(F5, 3)):
                continue
            assert len(fibre(cover.map, s)) + len(fibre(twisted.map, s)) == 3

    def test_twist_keeps_even_degree_fibres(self, F3):
        cover = double_cover(F3, pt(F3, 0), INF)
        twisted = twist_cover(cover)
        for m in points_of_degree(F3, 2):
            assert len(fibre(cover.map, m)) == len(fibre(twisted.map, m))

    def test_from_discriminant_with_irreducible_branch(self, F3):
        cover = double_cover_from_discriminant(F3, poly(F3, [1, 0, 1]), 1)
        assert cover.degree == 2
        assert branch_points(cover.map) == [ClosedPoint.from_poly(poly(F3, [1, 0, 1]))]

    def test_rejects_bad_discriminant(self, F3):
        with pytest.raises(MapError):
            double_cover_from_discriminant(F3, poly(F3, [1, 0, 0, 1]), 1)


class TestDescent:
    @pytest.mark.parametrize("p", [3, 5])
    def test_quadratic_point_to_degree_one(self, p):
        spec = field_spec(p)
        m = next(points_of_degree(spec, 2))
        cover = reduce_degree_cover(spec, m)
        assert cover.degree == 1
        assert fibre(cover.map, standard_quadratic_point(spec)) == [FibrePoint(m, 1, 1)]

    def test_quartic_point(self, F3):
        m = next(points_of_degree(F3, 4))
        cover = reduce_degree_cover(F3, m)
        assert cover.degree == 2
        assert fibre(cover.map, standard_quadratic_point(F3)) == [FibrePoint(m, 1, 2)]
        assert cover.chain[0].kind == "descent"

    def test_rejects_odd_degree(self, F3):
        m = next(points_of_degree(F3, 3))
        with pytest.raises(PointError):
            reduce_degree_cover(F3, m)

    def test_quadruple_point_cover(self, F3):
        for P2 in points_of_degree(F3, 2):
            cover = quadruple_point_cover(F3, P2)
            assert cover.degree == 2
            fib = fibre(cover.map, P2)
            assert len(fib) == 1 and fib[0].point.degree == 4
            assert cover.recompose() == cover.map


class TestKillRationalResidues:
    def test_zero_infinity(self, F3):
        cover = kill_rational_residues(F3, [pt(F3, 0), INF], pt(F3, 0), INF)
        assert cover.map == square(F3)

    def test_empty_set(self, F3):
        cover = kill_rational_residues(F3, [], pt(F3, 0), INF)
        assert cover.degree == 2
        assert kill_rational_residues(F3, [], pt(F3, 0), INF, allow_identity=True).degree == 1

    def test_four_points_over_f5(self, F5):
        B = [pt(F5, 0), pt(F5, 1), pt(F5, 2), INF]
        cover = kill_rational_residues(F5, B, pt(F5, 0), INF)
        assert cover.map == RationalMap.polynomial(F5, [0, 0, 0, 0, 4])
        assert [step.kind for step in cover.chain] == ["squaring", "twist"]
        assert verify_parity(cover, B).passed
        for s in (pt(F5, 0), INF):
            assert [(fp.e, fp.f) for fp in fibre(cover.map, s)] == [(4, 1)]

    def test_free_designation(self, F5):
        B = rational_points(F5)
        cover = kill_rational_residues(F5, B, pt(F5, 0), INF, pin=False)
        assert verify_parity(cover, B).passed
        assert cover.recompose() == cover.map

    def test_rejects_non_rational(self, F3):
        point = ClosedPoint.from_poly(poly(F3, [1, 0, 1]))
        with pytest.raises(PointError):
            kill_rational_residues(F3, [point], pt(F3, 0), INF)


class TestTowerSearch:
    def test_kills_targets_and_keeps_anchors(self, F3):
        targets = [pt(F3, 1), pt(F3, 2)]
        cover = search_rational_tower(F3, targets, [pt(F3, 0)], [INF])
        assert verify_parity(cover, targets).passed
        assert has_rational_point_over(cover, pt(F3, 0))
        assert has_rational_point_over(cover, INF)

    def test_no_targets(self, F3):
        assert search_rational_tower(F3, [], [pt(F3, 0)], [INF]).degree == 1


class TestUnirational:
    def test_rational_pair(self, t_bundle):
        cover = synth_unirational_cover(nonsplit_locus(t_bundle))
        assert cover.map == square(t_bundle.spec)

    def test_empty_locus(self, F3):
        assert synth_unirational_cover(NonSplitLocus(F3, ())).degree == 1

    def test_degree_two_and_rational(self, F3):
        m = ClosedPoint.from_poly(poly(F3, [1, 0, 1]))
        bundle = bundle_with_prescribed_locus(F3, [m, pt(F3, 0)], make_rng(0))
        locus = nonsplit_locus(bundle)
        assert set(locus.points) == {m, pt(F3, 0)}
        cover = synth_unirational_cover(locus)
        assert verify_parity(cover, locus).passed

    def test_mixed_degrees_over_f5(self, F5):
        bundle = bundle_with_prescribed_locus(F5, [1, 1, 2, 3], make_rng(0))
        locus = nonsplit_locus(bundle)
        assert sorted(locus.degrees) == [1, 1, 2, 3]
        cover = synth_unirational_cover(locus)
        assert verify_parity(cover, locus).passed
        assert cover.recompose() == cover.map

    def test_hypothesis_unmet(self, F3):
        bundle = bundle_with_prescribed_locus(F3, [2, 2], make_rng(1))
        with pytest.raises(HypothesisError):
            synth_unirational_cover(nonsplit_locus(bundle))


class TestRequiv:
    def test_branched_at_the_locus(self, t_bundle, F3):
        cover = synth_requiv_cover(nonsplit_locus(t_bundle), pt(F3, 0), INF)
        assert cover.map == square(F3)

    def test_falls_back_to_tower_search(self, t_bundle, F3):
        locus = nonsplit_locus(t_bundle)
        cover = synth_requiv_cover(locus, pt(F3, 1), pt(F3, 2))
        assert verify_parity(cover, locus).passed
        assert has_rational_point_over(cover, pt(F3, 1))
        assert has_rational_point_over(cover, pt(F3, 2))

    def test_all_rational_points(self, F3):
        bundle = bundle_with_prescribed_locus(F3, rational_points(F3))
        locus = nonsplit_locus(bundle)
        assert len(locus) == 4
        cover = synth_requiv_cover(locus, pt(F3, 0), INF)
        assert verify_parity(cover, locus).passed
        assert has_rational_point_over(cover, pt(F3, 0))
        assert has_rational_point_over(cover, INF)

    def test_quadratic_point(self, F5):
        m = ClosedPoint.from_poly(poly(F5, [3, 0, 1]))  # t^2 - 2
        bundle = bundle_with_prescribed_locus(F5, [m, pt(F5, 0), pt(F5, 1), INF], make_rng(0))
        locus = nonsplit_locus(bundle)
        assert sorted(locus.degrees) == [1, 1, 1, 2]
        cover = synth_requiv_cover(locus, pt(F5, 2), pt(F5, 3))
        assert verify_parity(cover, locus).passed
        assert has_rational_point_over(cover, pt(F5, 2))
        assert has_rational_point_over(cover, pt(F5, 3))

    def test_empty_locus(self, F3):
        cover = synth_requiv_cover(NonSplitLocus(F3, ()), pt(F3, 0), INF)
        assert cover.degree == 1

    def test_rejects_equal_points(self, t_bundle, F3):
        with pytest.raises(PointError):
            synth_requiv_cover(nonsplit_locus(t_bundle), pt(F3, 1), pt(F3, 1))

    def test_hypothesis_unmet(self, F5):
        bundle = bundle_with_prescribed_locus(F5, [1, 2, 3], make_rng(0))
        with pytest.raises(HypothesisError):
            synth_requiv_cover(nonsplit_locus(bundle), pt(F5, 0), INF)


class TestTwistChain:
    def test_mobius_steps_survive(self, F5):
        cover = double_cover(F5, pt(F5, 1), pt(F5, 3))
        twisted = twist_cover(cover)
        assert [step.kind for step in cover.chain] == ["mobius", "squaring", "mobius"]
        assert [step.kind for step in twisted.chain] == ["mobius", "twist", "mobius"]
        assert twisted.chain[0].map == cover.chain[0].map
        assert twisted.chain[-1].map == cover.chain[-1].map
        assert verify_chain(twisted).passed
        assert branch_points(twisted.map) == branch_points(cover.map)

    def test_bare_map_is_twisted_whole(self, F5):
        twisted = twist_cover(Cover(square(F5), ()))
        assert twisted.map == RationalMap.create(F5, poly(F5, [3]), poly(F5, [0, 0, 1]))
        assert verify_chain(twisted).passed

    def test_quadruple_cover_twist_keeps_its_descent(self, F3):
        P2 = next(points_of_degree(F3, 2))
        cover = quadruple_point_cover(F3, P2)
        twisted = twist_cover(cover)
        assert verify_chain(twisted).passed
        assert len(twisted.chain) == len(cover.chain)
        fib = fibre(twisted.map, P2)
        assert [(fp.e, fp.f) for fp in fib] == [(1, 2)]


def _table_points(spec):
    """All points of degree <= 4 over F_3; over larger fields ten of each degree above 2."""
    points = [INF]
    for d in (1, 2, 3, 4):
        found = points_of_degree(spec, d)
        points.extend(found if spec.q == 3 or d < 3 else islice(found, 10))
    return points


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([3, 5]), st.lists(st.integers(0, 4), min_size=2, max_size=3),
       st.integers(1, 4))
def test_twist_flips_odd_fibres_and_keeps_even_ones(p, coeffs, c):
    spec = field_spec(p)
    delta = poly(spec, [x % p for x in coeffs])
    assume(delta.degree >= 1)
    try:
        cover = double_cover_from_discriminant(spec, delta, c % p or 1)
    except (SynthesisError, MapError):
        assume(False)
    twisted = twist_cover(cover)
    branch = branch_points(cover.map)
    assert branch_points(twisted.map) == branch
    for s in _table_points(spec):
        if s in branch:
            continue
        before, after = len(fibre(cover.map, s)), len(fibre(twisted.map, s))
        if s.degree % 2:
            assert before + after == 3
        else:
            assert before == after


class TestDescentSweep:
    @pytest.mark.parametrize("p", [3, 5])
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_random_even_points(self, p, d):
        spec = field_spec(p)
        for index in range(5):
            m = random_point(spec, 2 * d, make_rng(p * 10 + d, index))
            cover = reduce_degree_cover(spec, m)
            assert cover.degree == d
            assert fibre(cover.map, standard_quadratic_point(spec)) == [FibrePoint(m, 1, d)]
            assert set(cover.chain[0].params) == {"point"}

    @pytest.mark.parametrize("p", [5, 7])
    def test_quadruple_cover_over_every_quadratic_point(self, p):
        spec = field_spec(p)
        for P2 in points_of_degree(spec, 2):
            fib = fibre(quadruple_point_cover(spec, P2).map, P2)
            assert [(fp.e, fp.f) for fp in fib] == [(1, 2)]


def _star_request(rng, allow_both):
    degrees = [1] * int(rng.integers(0, 4))
    with_two, with_odd = bool(rng.integers(0, 2)), bool(rng.integers(0, 2))
    if with_two and with_odd and not allow_both:
        with_odd = False
    if with_two:
        degrees.append(2)
    if with_odd:
        degrees.append(3)
    return degrees


@pytest.mark.slow
@pytest.mark.parametrize("p", [3, 5, 7])
def test_unirational_sweep(p):
    spec = field_spec(p)
    for index in range(100):
        rng = make_rng(100 + p, index)
        bundle = bundle_with_prescribed_locus(spec, _star_request(rng, True), rng)
        locus = nonsplit_locus(bundle)
        cover = synth_unirational_cover(locus)
        assert verify_parity(cover, locus).passed, index
        assert verify_pullback_vanishing(bundle, cover).passed, index


@pytest.mark.slow
@pytest.mark.parametrize("p", [3, 5])
def test_requiv_sweep(p):
    spec = field_spec(p)
    points = rational_points(spec)
    for index in range(50):
        rng = make_rng(200 + p, index)
        bundle = bundle_with_prescribed_locus(spec, _star_request(rng, False), rng)
        i, j = (int(k) for k in rng.choice(len(points), size=2, replace=False))
        s0, s1 = points[i], points[j]
        locus = nonsplit_locus(bundle)
        cover = synth_requiv_cover(locus, s0, s1)
        assert verify_parity(cover, locus).passed, index
        assert verify_pullback_vanishing(bundle, cover).passed, index
        assert verify_requiv(cover, s0, s1).passed, index
