"""Diagonal conic bundles a x^2 + b y^2 + c z^2 = 0 over P^1_{F_q}.

Local normal forms, residues with values in kappa(P)^x / squares, the
non-split locus, and pullback along rational maps.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import galois

from conicert.exceptions import FieldMismatchError, InputError
from conicert.gf import FieldSpec
from conicert.p1curve import (
    ClosedPoint,
    RationalMap,
    factor,
    homogenize,
    inverse_mod,
    is_square_mod,
    is_zero,
    leading_coefficient,
    multiplicity,
    poly_ints,
    residue_order,
    square_class_part,
    variable,
)

logger = logging.getLogger(__name__)

# (x-slot, y-slot, z-slot) rearrangements tried in order by normalize_at
_ORDERINGS = ((0, 1, 2), (1, 0, 2), (2, 0, 1))
_NAMES = "abc"


@dataclass(frozen=True, eq=False)
class ConicBundle:
    """The diagonal model (a(t), b(t), c(t)), abc != 0."""
    spec: FieldSpec
    a: galois.Poly
    b: galois.Poly
    c: galois.Poly

    @classmethod
    def create(cls, spec: FieldSpec, a: galois.Poly, b: galois.Poly, c: galois.Poly) -> "ConicBundle":
        for name, f in zip(_NAMES, (a, b, c)):
            if f.field is not spec.GF:
                raise FieldMismatchError(f"coefficient {name} lies in a different field")
            if is_zero(f):
                raise InputError(f"coefficient {name} must be nonzero")
        return cls(spec, a, b, c)

    @property
    def coefficients(self) -> Tuple[galois.Poly, galois.Poly, galois.Poly]:
        return (self.a, self.b, self.c)

    @property
    def key(self) -> tuple:
        return (self.spec,) + tuple(poly_ints(f) for f in self.coefficients)

    def __eq__(self, other) -> bool:
        return isinstance(other, ConicBundle) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def to_dict(self) -> dict:
        spec = self.spec
        data = {"field": spec.to_dict()}
        for name, f in zip(_NAMES, self.coefficients):
            data[name] = [spec.to_json(spec.GF(x)) for x in poly_ints(f)]
        return data


@dataclass(frozen=True, eq=False)
class LocalForm:
    """a' x^2 + b' y^2 - z^2 at a point, with v(a') in {0, 1} and b' a unit.

    Units are residues modulo the uniformizer (constants at infinity).
    """
    point: ClosedPoint
    uniformizer: galois.Poly
    valuations: Tuple[int, int, int]
    ordering: str
    a_val: int
    a_unit: galois.Poly
    b_unit: galois.Poly


@dataclass(frozen=True, eq=False)
class ResidueClass:
    """A class in kappa(P)^x / (kappa(P)^x)^2 and its triviality flag."""
    point: ClosedPoint
    representative: galois.Poly
    trivial: bool

    def same_class(self, spec: FieldSpec, other: "ResidueClass") -> bool:
        modulus = _uniformizer(spec, self.point)
        product = (self.representative * other.representative) % modulus
        return is_square_mod(product, modulus, residue_order(spec, self.point))

    def to_dict(self, spec: FieldSpec) -> dict:
        return {
            "point": self.point.to_json(spec),
            "degree": self.point.degree,
            "residue_representative": [spec.to_json(spec.GF(x)) for x in poly_ints(self.representative)],
            "trivial": self.trivial,
        }


@dataclass(frozen=True)
class NonSplitLocus:
    """The points with non-split fibre, sorted canonically."""
    spec: FieldSpec
    points: Tuple[ClosedPoint, ...]
    residues: Tuple[ResidueClass, ...] = field(default=(), compare=False)

    @classmethod
    def of_points(cls, spec: FieldSpec, points: Sequence[ClosedPoint]) -> "NonSplitLocus":
        return cls(spec, tuple(sorted(set(points), key=lambda p: p.sort_key)))

    @property
    def delta(self) -> int:
        return sum(p.degree for p in self.points)

    @property
    def degrees(self) -> List[int]:
        return [p.degree for p in self.points]

    @property
    def rational(self) -> List[ClosedPoint]:
        return [p for p in self.points if p.is_rational]

    def __len__(self) -> int:
        return len(self.points)

    def to_list(self) -> List[dict]:
        if self.residues:
            return [r.to_dict(self.spec) for r in self.residues]
        return [{"point": p.to_json(self.spec), "degree": p.degree} for p in self.points]


@dataclass(frozen=True)
class SplittingField:
    degree: int
    witness: galois.Poly


def _uniformizer(spec: FieldSpec, point: ClosedPoint) -> galois.Poly:
    """p_P, or u = 1/t in the chart at infinity."""
    if point.is_infinity:
        return variable(spec)
    return point.poly(spec)


def chart_swap(f: galois.Poly) -> galois.Poly:
    """u^(2 ceil(deg f / 2)) f(1/u): the coefficient in the chart at infinity."""
    reversed_f = galois.Poly(f.coefficients(order="desc"), order="asc")
    if f.degree % 2:
        reversed_f = reversed_f * galois.Poly([1, 0], field=f.field)
    return reversed_f


def _local_data(bundle: ConicBundle, point: ClosedPoint):
    """Uniformizer and (valuation, unit) for each coefficient at the point."""
    coefficients = bundle.coefficients
    if point.is_infinity:
        coefficients = tuple(chart_swap(f) for f in coefficients)
    pi = _uniformizer(bundle.spec, point)
    data = []
    for f in coefficients:
        v = multiplicity(f, pi)
        data.append((v, f // pi ** v))
    return pi, data


def normalize_at(bundle: ConicBundle, point: ClosedPoint) -> LocalForm:
    """Rewrite the fibre-local form as a' x^2 + b' y^2 - z^2.

    Valuations are reduced mod 2 (dividing by even powers of the
    uniformizer), the slots are rearranged so that the last two valuations
    agree in parity, and the form is divided by minus the z-slot.

    Example:
        (t^3, 1, -1) at (t)  ->  v(a') = 1, b' = 1
    """
    pi, data = _local_data(bundle, point)
    valuations = tuple(v for v, _ in data)
    for x, y, z in _ORDERINGS:
        if (valuations[y] - valuations[z]) % 2 == 0:
            break
    units = [u for _, u in data]
    z_inverse = inverse_mod(units[z], pi)
    a_unit = (-units[x] * z_inverse) % pi
    b_unit = (-units[y] * z_inverse) % pi
    return LocalForm(
        point=point,
        uniformizer=pi,
        valuations=valuations,
        ordering=_NAMES[x] + _NAMES[y] + _NAMES[z],
        a_val=(valuations[x] - valuations[z]) % 2,
        a_unit=a_unit,
        b_unit=b_unit,
    )


def residue_at(bundle: ConicBundle, point: ClosedPoint) -> ResidueClass:
    """The residue [b'^v(a')] at a closed point."""
    form = normalize_at(bundle, point)
    if form.a_val == 1:
        representative = form.b_unit
    else:
        representative = galois.Poly.One(field=bundle.spec.GF)
    trivial = is_square_mod(representative, form.uniformizer, residue_order(bundle.spec, point))
    return ResidueClass(point, representative, trivial)


def _power_mod(f: galois.Poly, e: int, modulus: galois.Poly) -> galois.Poly:
    if e < 0:
        f, e = inverse_mod(f, modulus), -e
    return pow(f % modulus, e, modulus)


def _tame_parts(num: galois.Poly, den: galois.Poly, point: ClosedPoint, pi: galois.Poly):
    """Valuation and leading unit (mod pi) of num/den at the point."""
    if point.is_infinity:
        unit = leading_coefficient(num) / leading_coefficient(den)
        return den.degree - num.degree, galois.Poly([int(unit)], field=num.field)
    vn, vd = multiplicity(num, pi), multiplicity(den, pi)
    unit = ((num // pi ** vn) * inverse_mod(den // pi ** vd, pi)) % pi
    return vn - vd, unit


def residue_tame_oracle(bundle: ConicBundle, point: ClosedPoint) -> ResidueClass:
    """Residue via the tame symbol of the quaternion pair (-a/c, -b/c).

    The class is (-1)^(v(x) v(y)) x^v(y) y^(-v(x)) modulo P; at infinity
    valuations come from degrees and units from leading coefficients.
    """
    spec = bundle.spec
    pi = _uniformizer(spec, point)
    vx, ux = _tame_parts(-bundle.a, bundle.c, point, pi)
    vy, uy = _tame_parts(-bundle.b, bundle.c, point, pi)
    symbol = (_power_mod(ux, vy, pi) * _power_mod(uy, -vx, pi)) % pi
    if (vx * vy) % 2:
        symbol = (-symbol) % pi
    trivial = is_square_mod(symbol, pi, residue_order(spec, point))
    return ResidueClass(point, symbol, trivial)


def fibre_split_direct(bundle: ConicBundle, point: ClosedPoint) -> bool:
    """Whether the fibre at the point is split, read off the reduced form.

    A rank-3 reduction is a smooth conic (split over a finite field); a
    rank-2 reduction u_i X^2 + u_j Y^2 splits iff -u_i u_j is a square.
    """
    pi, data = _local_data(bundle, point)
    parities = [v % 2 for v, _ in data]
    if len(set(parities)) == 1:
        return True
    odd_one = next(k for k in range(3) if parities.count(parities[k]) == 1)
    i, j = (k for k in range(3) if k != odd_one)
    discriminant = (-(data[i][1] * data[j][1])) % pi
    return is_square_mod(discriminant, pi, residue_order(bundle.spec, point))


def minimal_splitting_field(bundle: ConicBundle, point: ClosedPoint) -> SplittingField:
    """Degree over kappa(P) of a minimal splitting field and its witness."""
    residue = residue_at(bundle, point)
    if residue.trivial:
        return SplittingField(1, galois.Poly.One(field=bundle.spec.GF))
    return SplittingField(2, residue.representative)


def candidate_points(bundle: ConicBundle) -> List[ClosedPoint]:
    """Irreducible factors of a, b, c together with infinity."""
    points = {ClosedPoint.infinity()}
    for f in bundle.coefficients:
        _, pairs = factor(f)
        points.update(ClosedPoint(poly_ints(p)) for p, _ in pairs)
    return sorted(points, key=lambda p: p.sort_key)


def nonsplit_locus(bundle: ConicBundle) -> NonSplitLocus:
    """Scan the candidate points and keep those with nontrivial residue."""
    residues = []
    for point in candidate_points(bundle):
        residue = residue_at(bundle, point)
        if not residue.trivial:
            residues.append(residue)
    logger.debug("non-split locus: %d point(s)", len(residues))
    return NonSplitLocus(bundle.spec, tuple(r.point for r in residues), tuple(residues))


def _non_rational_degrees(locus) -> List[int]:
    degrees = locus.degrees if isinstance(locus, NonSplitLocus) else list(locus)
    return sorted(d for d in degrees if d > 1)


def condition_star(locus) -> bool:
    """Rational points plus at most one point of degree 2 and one of odd degree."""
    extra = _non_rational_degrees(locus)
    if not extra:
        return True
    if len(extra) == 1:
        return extra[0] == 2 or extra[0] % 2 == 1
    if len(extra) == 2:
        return extra[0] == 2 and extra[1] % 2 == 1
    return False


def condition_star_star(locus) -> bool:
    """Rational points plus at most one point of degree 2 or of odd degree."""
    extra = _non_rational_degrees(locus)
    return not extra or (len(extra) == 1 and (extra[0] == 2 or extra[0] % 2 == 1))


def pullback_bundle(bundle: ConicBundle, phi: RationalMap) -> ConicBundle:
    """Base change along phi, denominators cleared and squares stripped.

    Example:
        (t, -1, -1) along T^2  ->  (1, -1, -1)
    """
    if phi.spec != bundle.spec:
        raise FieldMismatchError("bundle and map live over different fields")
    pulled = []
    for f in bundle.coefficients:
        k = f.degree
        g = homogenize(f, phi.num, phi.den, k) * phi.den ** (k % 2)
        pulled.append(square_class_part(g))
    return ConicBundle.create(bundle.spec, *pulled)
