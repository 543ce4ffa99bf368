"""Constructive synthesis of covers P^1 -> P^1.

Every cover carries an audit chain of elementary steps, outermost first,
whose composition reproduces its map. Constructions verify their own
output with ``fibre`` and raise SynthesisError (carrying the chain) when a
post-condition fails.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import galois

from conicert.conicbundle import NonSplitLocus, condition_star, condition_star_star
from conicert.exceptions import (
    BudgetExceeded,
    FieldMismatchError,
    HypothesisError,
    MapError,
    PointError,
    SynthesisError,
)
from conicert.gf import FieldSpec, QuadExt, is_square, iter_elements, sqrt
from conicert.p1curve import (
    ClosedPoint,
    FibrePoint,
    Mobius,
    RationalMap,
    coefficient,
    compose,
    compose_all,
    embed_poly,
    factor,
    fibre,
    frobenius_poly,
    homogenize,
    is_zero,
    leading_coefficient,
    mobius_between_quadratic_points,
    mobius_from_points,
    monic,
    poly,
    poly_ints,
    points_of_degree,
    rational_points,
    scale,
    standard_quadratic_point,
)

logger = logging.getLogger(__name__)

STEP_KINDS = ("mobius", "squaring", "twist", "descent", "composition")

# candidates expanded per node of the rational tower search
TOWER_BEAM = 6


# ---------------------------------------------------------------------------
# Covers and audit chains
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CoverStep:
    """One elementary map of an audit chain."""
    kind: str
    map: RationalMap
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in STEP_KINDS:
            raise MapError(f"unknown cover step kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params), "map": self.map.to_dict()}


@dataclass(frozen=True, eq=False)
class Cover:
    """A rational map together with the chain of steps that built it."""
    map: RationalMap
    chain: Tuple[CoverStep, ...] = ()

    @classmethod
    def identity(cls, spec: FieldSpec) -> "Cover":
        return cls(RationalMap.identity(spec), ())

    @classmethod
    def from_step(cls, kind: str, phi: RationalMap, **params) -> "Cover":
        return cls(phi, (CoverStep(kind, phi, params),))

    @classmethod
    def from_map(cls, phi: RationalMap) -> "Cover":
        """Wrap a bare map (e.g. one read from a file) as a one-step chain."""
        return cls.from_step("composition", phi)

    @classmethod
    def from_chain(cls, spec: FieldSpec, steps: Sequence[CoverStep]) -> "Cover":
        return cls(compose_all(spec, [s.map for s in steps]), tuple(steps))

    @property
    def spec(self) -> FieldSpec:
        return self.map.spec

    @property
    def degree(self) -> int:
        return self.map.degree

    def recompose(self) -> RationalMap:
        return compose_all(self.spec, [s.map for s in self.chain])

    def to_dict(self) -> dict:
        data = self.map.to_dict()
        data["chain"] = [s.to_dict() for s in self.chain]
        return data


def compose_covers(outer: Cover, inner: Cover) -> Cover:
    """outer o inner, chains concatenated."""
    return Cover(compose(outer.map, inner.map), outer.chain + inner.chain)


def _mobius_cover(mu: Mobius) -> Cover:
    return Cover.from_step("mobius", mu.as_map(), **mu.to_dict())


@dataclass(frozen=True)
class FibreClassification:
    """Fibre types of a degree-2 cover over a list of points."""
    ts: Tuple[ClosedPoint, ...] = ()
    inert: Tuple[ClosedPoint, ...] = ()
    ramified: Tuple[ClosedPoint, ...] = ()

    def to_dict(self, spec: FieldSpec) -> dict:
        return {
            "ts": [p.to_json(spec) for p in self.ts],
            "inert": [p.to_json(spec) for p in self.inert],
            "ramified": [p.to_json(spec) for p in self.ramified],
        }


# ---------------------------------------------------------------------------
# Internal checks
# ---------------------------------------------------------------------------

def _check_deadline(deadline: Optional[float]) -> None:
    if deadline is not None and time.monotonic() > deadline:
        raise BudgetExceeded("time budget exhausted during synthesis")


def _expect_total_ramification(cover: Cover, points: Iterable[ClosedPoint]) -> None:
    for s in points:
        fib = fibre(cover.map, s)
        if len(fib) != 1 or fib[0].e != cover.degree:
            raise SynthesisError(f"cover is not totally ramified over {s.to_json(cover.spec)}",
                                 chain=cover.chain)


def _check_parity(cover: Cover, points: Iterable[ClosedPoint]) -> None:
    for s in points:
        for fp in fibre(cover.map, s):
            if (fp.e * fp.f) % 2:
                raise SynthesisError(
                    f"odd e*f at {fp.point.to_json(cover.spec)} over {s.to_json(cover.spec)}",
                    chain=cover.chain)


def _has_rational_point(cover: Cover, s: ClosedPoint) -> bool:
    return any(fp.f == 1 for fp in fibre(cover.map, s))


def _rational_preimages(cover: Cover, points: Iterable[ClosedPoint]) -> List[ClosedPoint]:
    found = set()
    for s in points:
        found.update(fp.point for fp in fibre(cover.map, s) if fp.point.is_rational)
    return sorted(found, key=lambda p: p.sort_key)


def _without(points: Iterable[ClosedPoint], excluded: Iterable[ClosedPoint]) -> List[ClosedPoint]:
    excluded = set(excluded)
    return sorted({p for p in points if p not in excluded}, key=lambda p: p.sort_key)


def _spare_points(spec: FieldSpec, taken: Iterable[ClosedPoint], count: int) -> List[ClosedPoint]:
    taken = set(taken)
    spare = [z for z in rational_points(spec) if z not in taken][:count]
    if len(spare) < count:
        raise SynthesisError("not enough spare rational points")
    return spare


def _pad_even(spec: FieldSpec, points: Sequence[ClosedPoint],
              reserved: Sequence[ClosedPoint]) -> List[ClosedPoint]:
    """Add the smallest spare rational point when points and reserved have odd total size."""
    taken = set(points) | set(reserved)
    if len(taken) % 2 == 0:
        return sorted(points, key=lambda p: p.sort_key)
    return sorted(list(points) + _spare_points(spec, taken, 1), key=lambda p: p.sort_key)


# ---------------------------------------------------------------------------
# Double covers
# ---------------------------------------------------------------------------

def double_cover(spec: FieldSpec, P: ClosedPoint, Q: ClosedPoint, twist: bool = False) -> Cover:
    """Degree-2 cover totally ramified exactly over the rational points P and Q.

    Built as mu^-1 o s o mu with mu sending P, Q, R to 0, infinity, 1 (R the
    smallest other rational point) and s = T^2, or T^2/alpha when twisted.
    The ramification points over P and Q are P and Q themselves.

    Example:
        P = 0, Q = infinity  ->  T^2 (twisted over F_5: T^2/2)
    """
    if not (P.is_rational and Q.is_rational):
        raise PointError("double covers are built over rational points")
    if P == Q:
        raise PointError("the two branch points must be distinct")
    R = next(z for z in rational_points(spec) if z not in (P, Q))
    zero, one = ClosedPoint.rational(spec, 0), ClosedPoint.rational(spec, 1)
    mu = mobius_from_points(spec, [P, Q, R], [zero, ClosedPoint.infinity(), one])

    square = galois.Poly([1, 0, 0], field=spec.GF)
    if twist:
        alpha = spec.nonsquare_witness
        middle = Cover.from_step(
            "twist", RationalMap.create(spec, square, galois.Poly([int(alpha)], field=spec.GF)),
            alpha=spec.to_json(alpha))
    else:
        middle = Cover.from_step("squaring", RationalMap.create(spec, square, galois.Poly.One(field=spec.GF)))

    steps: List[CoverStep] = []
    if not mu.is_identity():
        steps.extend(_mobius_cover(mu.inverse()).chain)
    steps.extend(middle.chain)
    if not mu.is_identity():
        steps.extend(_mobius_cover(mu).chain)
    cover = Cover.from_chain(spec, steps)
    _expect_total_ramification(cover, (P, Q))
    return cover


def classify_fibres(cover: Cover, points: Iterable[ClosedPoint]) -> FibreClassification:
    """Split the points into totally split, inert and ramified fibres."""
    if cover.degree != 2:
        raise MapError("fibre classification needs a degree-2 cover")
    ts, inert, ramified = [], [], []
    for s in points:
        fib = fibre(cover.map, s)
        if len(fib) == 2:
            ts.append(s)
        elif fib[0].e == 2:
            ramified.append(s)
        else:
            inert.append(s)
    return FibreClassification(tuple(ts), tuple(inert), tuple(ramified))


def fibral_discriminant(phi: RationalMap) -> galois.Poly:
    """Discriminant in T of num(T) - t den(T) for a degree-2 map; degree <= 2 in t.

    Over a finite point the fibre is split, inert or ramified as the value
    is a nonzero square, a nonsquare or zero; over infinity read the
    t^2 coefficient (zero when the degree drops).
    """
    if phi.degree != 2:
        raise MapError("the fibral discriminant is defined for degree-2 maps")
    spec = phi.spec
    linear = [poly(spec, [coefficient(phi.num, k), -coefficient(phi.den, k)]) for k in range(3)]
    four = galois.Poly([int(spec.scalar(4))], field=spec.GF)
    return linear[1] * linear[1] - four * linear[2] * linear[0]


def branch_points(phi: RationalMap) -> List[ClosedPoint]:
    """Branch locus of a degree-2 map."""
    delta = fibral_discriminant(phi)
    _, pairs = factor(delta)
    points = [ClosedPoint(poly_ints(p)) for p, _ in pairs]
    if delta.degree < 2:
        points.append(ClosedPoint.infinity())
    return sorted(points, key=lambda p: p.sort_key)


def double_cover_from_discriminant(spec: FieldSpec, delta: galois.Poly, c) -> Cover:
    """The double cover y^2 = c * delta(t), parametrized by lines through a rational point.

    delta must be squarefree of degree 1 or 2. The base point (t0, y0) is
    the first finite t0 in canonical order with c * delta(t0) a square.

    Raises:
        SynthesisError: no finite point found, or the parametrization degenerates
    """
    if is_zero(delta) or delta.degree < 1 or delta.degree > 2:
        raise MapError("the discriminant must have degree 1 or 2")
    c = spec.element(c)
    g = scale(delta, c)
    for x in iter_elements(spec):
        value = g(x)
        if is_square(spec, value):
            t0 = x
            break
    else:
        raise SynthesisError("no finite rational point on y^2 = c * delta(t)")
    y0 = sqrt(spec, value)
    m2 = coefficient(g, 2)
    two = spec.scalar(2)
    slope = two * m2 * t0 + coefficient(g, 1)
    # t = t0 + (slope - 2 y0 T) / (T^2 - m2)
    num = poly(spec, [slope - t0 * m2, -two * y0, t0])
    den = poly(spec, [-m2, spec.GF(0), spec.GF(1)])
    phi = RationalMap.create(spec, num, den)
    if phi.degree != 2:
        raise SynthesisError("the discriminant is not squarefree")
    kind = "squaring" if c == 1 else "twist"
    logger.debug("double cover y^2 = c*delta with c=%s, base point t0=%s",
                 spec.to_json(c), spec.to_json(t0))
    return Cover.from_step(
        kind, phi,
        discriminant=[spec.to_json(spec.GF(v)) for v in poly_ints(delta)],
        c=spec.to_json(c),
        base_point=[spec.to_json(t0), spec.to_json(y0)],
    )


def twist_cover(cover: Cover) -> Cover:
    """The quadratic twist: same branch locus, fibre types flipped at odd degree.

    Only the degree-2 step of the chain is replaced; Mobius steps around it
    are kept.

    Example:
        T^2 over F_5  ->  3/T^2 (T^2/2 after T -> 1/T)
    """
    if cover.degree != 2:
        raise MapError("only degree-2 covers can be twisted")
    spec = cover.spec
    if cover.chain and cover.recompose() == cover.map:
        steps = list(cover.chain)
    else:
        steps = [CoverStep("composition", cover.map)]
    index = next(i for i, step in enumerate(steps) if step.map.degree == 2)
    delta = fibral_discriminant(steps[index].map)
    middle = double_cover_from_discriminant(spec, delta, spec.nonsquare_witness)
    steps[index:index + 1] = middle.chain
    twisted = Cover.from_chain(spec, steps)
    if branch_points(twisted.map) != branch_points(cover.map):
        raise SynthesisError("twisting moved the branch locus", chain=twisted.chain)
    return twisted


# ---------------------------------------------------------------------------
# Degree reduction by Galois descent
# ---------------------------------------------------------------------------

def _descend_poly(ext: QuadExt, f: galois.Poly) -> galois.Poly:
    big = ext.big
    coeffs = [ext.descend(big.GF(int(c))) for c in f.coefficients(order="asc")]
    return poly(ext.base, coeffs)


def reduce_degree_cover(spec: FieldSpec, m: ClosedPoint) -> Cover:
    """Degree-d cover sending a point of degree 2d onto (t^2 - alpha).

    Over F_{q^2} the point splits as p1 * sigma(p1). The map
    sqrt(alpha) (p1 + p2) / (p1 - p2) is Frobenius invariant and descends
    to F_q. Both factors are monic, so no norm-one scalar is needed.

    Raises:
        PointError: m has odd degree
        SynthesisError: a descent or fibre check fails
    """
    if m.is_infinity or m.degree % 2:
        raise PointError("degree reduction needs a finite point of even degree")
    d = m.degree // 2
    ext = QuadExt(spec)
    big = ext.big
    _, pairs = factor(embed_poly(ext, m.poly(spec)))
    if len(pairs) != 2 or any(p.degree != d or e != 1 for p, e in pairs):
        raise SynthesisError(f"point {m.to_json(spec)} does not split into two conjugates over F_{big.q}")
    p1, p2 = pairs[0][0], pairs[1][0]
    if poly_ints(frobenius_poly(p1, spec.q)) != poly_ints(p2):
        raise SynthesisError("the factors over the quadratic extension are not conjugate")

    num = (p1 + p2) * galois.Poly([int(ext.sqrt_alpha)], field=big.GF)
    den = p1 - p2
    unit = leading_coefficient(den) ** -1
    num, den = scale(num, unit), scale(den, unit)
    try:
        phi = RationalMap.create(spec, _descend_poly(ext, num), _descend_poly(ext, den))
    except FieldMismatchError as exc:
        raise SynthesisError(f"descent failed: {exc}") from exc

    cover = Cover.from_step("descent", phi, point=m.to_json(spec))
    if fibre(phi, standard_quadratic_point(spec)) != [FibrePoint(m, 1, d)]:
        raise SynthesisError(f"{m.to_json(spec)} is not the full fibre over (t^2 - alpha)",
                             chain=cover.chain)
    logger.debug("reduced point %s to degree-%d cover", m.to_json(spec), d)
    return cover


def quadruple_point_cover(spec: FieldSpec, P2: ClosedPoint) -> Cover:
    """Degree-2 cover whose fibre over the degree-2 point P2 is one point of degree 4."""
    if P2.is_infinity or P2.degree != 2:
        raise PointError("a degree-2 point is required")
    m = next(points_of_degree(spec, 4))
    theta = reduce_degree_cover(spec, m)
    mu = mobius_between_quadratic_points(spec, standard_quadratic_point(spec), P2)
    cover = theta if mu.is_identity() else compose_covers(_mobius_cover(mu), theta)
    fib = fibre(cover.map, P2)
    if len(fib) != 1 or (fib[0].e, fib[0].f) != (1, 2):
        raise SynthesisError(f"fibre over {P2.to_json(spec)} is not a single degree-4 point",
                             chain=cover.chain)
    return cover


# ---------------------------------------------------------------------------
# Killing rational residues
# ---------------------------------------------------------------------------

def _kill_pinned(spec: FieldSpec, rest: List[ClosedPoint], P: ClosedPoint, Q: ClosedPoint,
                 depth: int, deadline: Optional[float]) -> Optional[Cover]:
    """Tower totally ramified over P and Q; None when the depth bound is hit."""
    _check_deadline(deadline)
    if depth == 0:
        return None
    points = _pad_even(spec, rest, (P, Q))
    options = []
    for twist in (False, True):
        psi = double_cover(spec, P, Q, twist)
        options.append((len(classify_fibres(psi, points).ts), twist, psi))
    options.sort(key=lambda option: option[:2])
    for _, twist, psi in options:
        split = classify_fibres(psi, points).ts
        if not split:
            return psi
        lifted = _without(_rational_preimages(psi, split), (P, Q))
        theta = _kill_pinned(spec, lifted, P, Q, depth - 1, deadline)
        if theta is not None:
            return compose_covers(psi, theta)
        logger.debug("pinned branch twist=%s stalled at depth %d", twist, depth)
    return None


def _kill_free(spec: FieldSpec, rest: List[ClosedPoint], P: ClosedPoint, Q: ClosedPoint,
               deadline: Optional[float]) -> Cover:
    """Tower ramified over P and Q at the top level, re-designating below."""
    _check_deadline(deadline)
    points = _pad_even(spec, rest, (P, Q))
    best = None
    for twist in (False, True):
        psi = double_cover(spec, P, Q, twist)
        split = classify_fibres(psi, points).ts
        if best is None or len(split) < len(best[1]):
            best = (psi, split)
    psi, split = best
    if not split:
        return psi
    lifted = _rational_preimages(psi, split)
    P2, Q2 = lifted[0], lifted[1]
    return compose_covers(psi, _kill_free(spec, _without(lifted, (P2, Q2)), P2, Q2, deadline))


def kill_rational_residues(spec: FieldSpec, B_rat: Sequence[ClosedPoint], P: ClosedPoint,
                           Q: ClosedPoint, *, pin: bool = True, allow_identity: bool = False,
                           deadline: Optional[float] = None) -> Cover:
    """2-power cover with 2 | e*f over every point of B_rat.

    With pin=True the cover is totally ramified over P and Q, which need
    not belong to B_rat. Each level is the double cover branched at P and
    Q, twisted so that at most half of the remaining points split; the split
    points' rational preimages are handled recursively. With pin=False the
    lower levels branch at the two smallest lifted points instead, which
    always terminates but drops total ramification below the top level.

    Raises:
        SynthesisError: the pinned recursion stalls within its depth bound
    """
    for z in (P, Q, *B_rat):
        if not z.is_rational:
            raise PointError(f"{z.to_json(spec)} is not a rational point")
    if P == Q:
        raise PointError("the designated points must be distinct")
    rest = _without(B_rat, (P, Q))
    if not rest:
        if allow_identity and not B_rat:
            return Cover.identity(spec)
        return double_cover(spec, P, Q)

    if pin:
        depth = 1 + math.ceil(len(B_rat) / 2)
        cover = _kill_pinned(spec, rest, P, Q, depth, deadline)
        if cover is None:
            raise SynthesisError(
                f"pinned tower over {P.to_json(spec)}, {Q.to_json(spec)} stalled at depth {depth}")
        _expect_total_ramification(cover, (P, Q))
    else:
        cover = _kill_free(spec, rest, P, Q, deadline)
    _check_parity(cover, B_rat)
    logger.debug("killed %d rational residue(s) with a degree-%d tower", len(B_rat), cover.degree)
    return cover


# ---------------------------------------------------------------------------
# Rational tower search
# ---------------------------------------------------------------------------

def _tower_candidates(spec: FieldSpec) -> List[Tuple[galois.Poly, object]]:
    """(delta, c) for every branch divisor of degree 2 and both twist classes."""
    deltas = []
    for pair in combinations(rational_points(spec), 2):
        f = galois.Poly.One(field=spec.GF)
        for b in pair:
            if not b.is_infinity:
                f = f * b.poly(spec)
        deltas.append(f)
    deltas.extend(p.poly(spec) for p in points_of_degree(spec, 2))
    twists = (spec.GF(1), spec.nonsquare_witness)
    return [(delta, c) for delta in deltas for c in twists]


def _local_type(spec: FieldSpec, delta: galois.Poly, c, x: ClosedPoint) -> str:
    if x.is_infinity:
        value = c * coefficient(delta, 2)
    else:
        value = c * delta(x.root(spec))
    if value == 0:
        return "ramified"
    return "ts" if is_square(spec, value) else "inert"


def search_rational_tower(spec: FieldSpec, targets: Sequence[ClosedPoint],
                          anchors0: Sequence[ClosedPoint], anchors1: Sequence[ClosedPoint],
                          max_depth: int = 8, deadline: Optional[float] = None) -> Cover:
    """Depth-bounded search for a tower of double covers killing rational targets.

    Each level is a double cover y^2 = c * delta(t) with delta a pair of
    rational points or a degree-2 point. A level is admissible when both
    anchor sets keep a rational preimage; candidates are tried by the number
    of split targets they leave.

    Raises:
        SynthesisError: no tower within max_depth
    """
    candidates = _tower_candidates(spec)
    failed: Dict[tuple, int] = {}

    def dfs(S: frozenset, A0: frozenset, A1: frozenset, depth: int) -> Optional[Cover]:
        _check_deadline(deadline)
        if not S:
            return Cover.identity(spec)
        key = (S, A0, A1)
        if depth == 0 or failed.get(key, -1) >= depth:
            return None
        scored = []
        for index, (delta, c) in enumerate(candidates):
            types = {x: _local_type(spec, delta, c, x) for x in S | A0 | A1}
            if all(types[a] == "inert" for a in A0) or all(types[a] == "inert" for a in A1):
                continue
            split = [x for x in S if types[x] == "ts"]
            if 2 * len(split) <= len(S) + 1:
                scored.append((2 * len(split), index, split))
        scored.sort(key=lambda entry: entry[:2])
        for _, index, split in scored[:TOWER_BEAM]:
            delta, c = candidates[index]
            chi = double_cover_from_discriminant(spec, delta, c)
            theta = dfs(frozenset(_rational_preimages(chi, split)),
                        frozenset(_rational_preimages(chi, A0)),
                        frozenset(_rational_preimages(chi, A1)),
                        depth - 1)
            if theta is not None:
                return compose_covers(chi, theta)
        failed[key] = depth
        return None

    result = dfs(frozenset(targets), frozenset(anchors0), frozenset(anchors1), max_depth)
    if result is None:
        raise SynthesisError(f"rational tower search exhausted at depth {max_depth}")
    logger.debug("tower search found a degree-%d cover", result.degree)
    return result


# ---------------------------------------------------------------------------
# Composite constructions
# ---------------------------------------------------------------------------

def _anchor_pair(spec: FieldSpec, points: Sequence[ClosedPoint]) -> Tuple[ClosedPoint, ClosedPoint]:
    chosen = sorted(points, key=lambda p: p.sort_key)[:2]
    chosen += _spare_points(spec, chosen, 2 - len(chosen))
    return chosen[0], chosen[1]


def _split_under(cover: Cover, point: ClosedPoint) -> bool:
    return len(fibre(cover.map, point)) == 2


def synth_unirational_cover(locus: NonSplitLocus, deadline: Optional[float] = None) -> Cover:
    """Cover with 2 | e*f over every point of a locus satisfying condition (*).

    Raises:
        HypothesisError: condition (*) fails
        SynthesisError: a construction step fails its own check
    """
    if not condition_star(locus):
        raise HypothesisError(f"condition (*) fails for degrees {locus.degrees}")
    spec = locus.spec
    rational = locus.rational
    P = next((z for z in locus.points if z.degree == 2), None)
    Q = next((z for z in locus.points if z.degree > 1 and z.degree % 2), None)

    if P is None and Q is None:
        if not rational:
            return Cover.identity(spec)
        a0, a1 = _anchor_pair(spec, rational)
        cover = kill_rational_residues(spec, rational, a0, a1, pin=False, deadline=deadline)
        _check_parity(cover, locus.points)
        return cover

    if P is not None:
        psi = quadruple_point_cover(spec, P)
        if Q is not None and _split_under(psi, Q):
            psi = twist_cover(psi)
    else:
        a0, a1 = _anchor_pair(spec, rational)
        psi = double_cover(spec, a0, a1, twist=_split_under(double_cover(spec, a0, a1), Q))
    logger.info("unirational pipeline: degree-%d base cover", psi.degree)

    lifted = _rational_preimages(psi, classify_fibres(psi, rational).ts)
    cover = psi
    if lifted:
        theta = kill_rational_residues(spec, lifted, lifted[0], lifted[1], pin=False, deadline=deadline)
        cover = compose_covers(psi, theta)
    _check_parity(cover, locus.points)
    return cover


def _fixes_point(mu: Mobius, f: galois.Poly) -> bool:
    """Whether mu maps the degree-2 point (f) to itself."""
    a, b, c, d = mu.entries
    field_ = f.field
    h = homogenize(f, galois.Poly([b, a], field=field_, order="asc"),
                   galois.Poly([d, c], field=field_, order="asc"), 2)
    return h.degree == 2 and poly_ints(monic(h)) == poly_ints(f)


def _quadratic_case_base(spec: FieldSpec, m: ClosedPoint, s1: ClosedPoint) -> Cover:
    """Degree-2 cover ramified over s1 whose fibre over m is one point of degree 4."""
    psi0 = quadruple_point_cover(spec, m)
    m_poly = m.poly(spec)
    for b in (z for z in branch_points(psi0.map) if z.is_rational):
        for nu in Mobius.all(spec):
            if nu.apply(b) == s1 and _fixes_point(nu, m_poly):
                logger.debug("stabilizer element %s moves branch point to s1", nu.entries)
                return psi0 if nu.is_identity() else compose_covers(_mobius_cover(nu), psi0)
    logger.info("no stabilizer element found; searching double covers branched at s1")
    for b in rational_points(spec):
        if b == s1:
            continue
        for twist in (False, True):
            psi = double_cover(spec, s1, b, twist)
            fib = fibre(psi.map, m)
            if len(fib) == 1 and fib[0].f == 2:
                return psi
    raise SynthesisError(f"no degree-2 cover branched at {s1.to_json(spec)} keeps "
                         f"{m.to_json(spec)} inert")


def synth_requiv_cover(locus: NonSplitLocus, s0: ClosedPoint, s1: ClosedPoint, *,
                       max_depth: int = 8, deadline: Optional[float] = None) -> Cover:
    """Cover with the parity property over a (**) locus and rational points over s0, s1.

    Raises:
        HypothesisError: condition (**) fails
        PointError: s0, s1 not distinct rational points
        SynthesisError: construction or fallback search fails
    """
    if not condition_star_star(locus):
        raise HypothesisError(f"condition (**) fails for degrees {locus.degrees}")
    if not (s0.is_rational and s1.is_rational) or s0 == s1:
        raise PointError("s0 and s1 must be distinct rational points")
    spec = locus.spec
    if not locus.points:
        return Cover.identity(spec)
    rational = locus.rational
    m = next((z for z in locus.points if not z.is_rational), None)

    if m is None or m.degree % 2:
        twist = m is not None and _split_under(double_cover(spec, s0, s1), m)
        psi = double_cover(spec, s0, s1, twist)
        anchors0, anchors1 = [s0], [s1]
    else:
        psi = _quadratic_case_base(spec, m, s1)
        if not _has_rational_point(psi, s0):
            psi = twist_cover(psi)
        anchors0 = _rational_preimages(psi, [s0])
        anchors1 = _rational_preimages(psi, [s1])
        if not anchors0 or not anchors1:
            raise SynthesisError("base cover lost the rational points over s0, s1", chain=psi.chain)

    lifted = _rational_preimages(psi, classify_fibres(psi, rational).ts)
    try:
        theta = kill_rational_residues(spec, lifted, anchors0[0], anchors1[0],
                                       allow_identity=True, deadline=deadline)
    except SynthesisError as exc:
        logger.warning("%s; falling back to the rational tower search", exc)
        theta = search_rational_tower(spec, lifted, anchors0, anchors1, max_depth, deadline)
    cover = compose_covers(psi, theta)

    _check_parity(cover, locus.points)
    for s in (s0, s1):
        if not _has_rational_point(cover, s):
            raise SynthesisError(f"no rational point over {s.to_json(spec)}", chain=cover.chain)
    return cover
