"""The function field F_q(t) and the closed points of P^1 over F_q.

Polynomials are galois ``Poly`` objects over ``FieldSpec.GF``. The infinite
place is handled by the chart swap t -> 1/t, never by homogeneous
coordinates.
"""
import logging
from dataclasses import dataclass
from functools import reduce
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import galois
import numpy as np

from conicert.exceptions import FieldMismatchError, MapError, MobiusError, PointError
from conicert.gf import FieldSpec, QuadExt, sqrt

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Polynomial helpers
# ---------------------------------------------------------------------------

def poly(spec: FieldSpec, coeffs: Sequence) -> galois.Poly:
    """Polynomial from little-endian coefficients (ints, coefficient lists or elements)."""
    values = [int(spec.element(c)) for c in coeffs]
    if not values:
        return galois.Poly.Zero(field=spec.GF)
    return galois.Poly(values, field=spec.GF, order="asc")


def constant(spec: FieldSpec, c) -> galois.Poly:
    return galois.Poly([int(spec.element(c))], field=spec.GF)


def variable(spec: FieldSpec) -> galois.Poly:
    return galois.Poly([1, 0], field=spec.GF)


def poly_ints(f: galois.Poly) -> Tuple[int, ...]:
    """Little-endian integer representation; () for the zero polynomial."""
    if is_zero(f):
        return ()
    return tuple(int(c) for c in f.coefficients(order="asc"))


def is_zero(f: galois.Poly) -> bool:
    return f.degree == 0 and int(f.coeffs[0]) == 0


def is_constant(f: galois.Poly) -> bool:
    return f.degree == 0


def leading_coefficient(f: galois.Poly):
    return f.field(int(f.coeffs[0]))


def coefficient(f: galois.Poly, i: int):
    """Coefficient of t^i (zero beyond the degree)."""
    if i > f.degree or is_zero(f):
        return f.field(0)
    return f.field(int(f.coefficients(order="asc")[i]))


def scale(f: galois.Poly, c) -> galois.Poly:
    return f * galois.Poly([int(c)], field=f.field)


def monic(f: galois.Poly) -> galois.Poly:
    return scale(f, leading_coefficient(f) ** -1)


def frobenius_poly(f: galois.Poly, exponent: int) -> galois.Poly:
    """Raise every coefficient to the given power."""
    coeffs = f.coefficients(order="asc") ** exponent
    return galois.Poly(coeffs, order="asc")


def homogenize(f: galois.Poly, num: galois.Poly, den: galois.Poly, n: int) -> galois.Poly:
    """sum_i f_i num^i den^(n-i), i.e. den^n f(num/den) for n >= deg f."""
    if is_zero(f):
        return f
    result = galois.Poly.Zero(field=f.field)
    for i, c in enumerate(f.coefficients(order="asc")):
        if int(c):
            result += galois.Poly([int(c)], field=f.field) * num ** i * den ** (n - i)
    return result


def multiplicity(f: galois.Poly, p: galois.Poly) -> int:
    """Exponent of the irreducible p in the nonzero polynomial f."""
    count = 0
    while f.degree >= p.degree and is_zero(f % p):
        f = f // p
        count += 1
    return count


def factor(f: galois.Poly) -> Tuple[object, List[Tuple[galois.Poly, int]]]:
    """Factor into leading unit and sorted monic irreducibles with multiplicities.

    Raises:
        MapError: f is the zero polynomial
    """
    if is_zero(f):
        raise MapError("cannot factor the zero polynomial")
    unit = leading_coefficient(f)
    if f.degree == 0:
        return unit, []
    factors, multiplicities = monic(f).factors()
    pairs = [(p, int(m)) for p, m in zip(factors, multiplicities)]
    pairs.sort(key=lambda pair: (pair[0].degree, poly_ints(pair[0])))
    return unit, pairs


def squarefree_part(f: galois.Poly) -> galois.Poly:
    """Product of the distinct monic irreducible factors."""
    _, pairs = factor(f)
    result = galois.Poly.One(field=f.field)
    for p, _ in pairs:
        result *= p
    return result


def square_class_part(f: galois.Poly) -> galois.Poly:
    """Leading unit times the irreducibles of odd multiplicity (f modulo squares)."""
    unit, pairs = factor(f)
    result = galois.Poly([int(unit)], field=f.field)
    for p, m in pairs:
        if m % 2:
            result *= p
    return result


def is_irreducible(f: galois.Poly) -> bool:
    return f.degree >= 1 and f.is_irreducible()


def gcd(f: galois.Poly, g: galois.Poly) -> galois.Poly:
    return galois.gcd(f, g)


def resultant(f: galois.Poly, g: galois.Poly):
    """Resultant of two polynomials over a field, by the Euclidean recurrence."""
    field = f.field
    if is_zero(f) or is_zero(g):
        return field(0)
    result = field(1)
    while g.degree > 0:
        r = f % g
        if is_zero(r):
            return field(0)
        if (f.degree * g.degree) % 2:
            result = -result
        result *= leading_coefficient(g) ** (f.degree - r.degree)
        f, g = g, r
    return result * leading_coefficient(g) ** f.degree


def inverse_mod(f: galois.Poly, modulus: galois.Poly) -> galois.Poly:
    """Inverse of f in F_q[t]/(modulus)."""
    g, s, _ = galois.egcd(f % modulus, modulus)
    if g.degree != 0:
        raise MapError("polynomial is not invertible modulo the given point")
    return (s * galois.Poly([int(leading_coefficient(g) ** -1)], field=f.field)) % modulus


def is_square_mod(f: galois.Poly, modulus: galois.Poly, order: int) -> bool:
    """Square test in the residue field F_q[t]/(modulus) of the given order."""
    r = f % modulus
    if is_zero(r):
        return True
    return poly_ints(pow(r, (order - 1) // 2, modulus)) == (1,)


# ---------------------------------------------------------------------------
# Closed points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClosedPoint:
    """A closed point of P^1: the infinite place, or a monic irreducible.

    ``coeffs`` holds the little-endian integer representation of the
    monic irreducible; None is the infinite place.
    """
    coeffs: Optional[Tuple[int, ...]] = None

    @classmethod
    def infinity(cls) -> "ClosedPoint":
        return cls(None)

    @classmethod
    def rational(cls, spec: FieldSpec, a) -> "ClosedPoint":
        """The point t = a (a may be an element, an int, or 'inf')."""
        if isinstance(a, str) and a == "inf":
            return cls.infinity()
        value = spec.element(a)
        return cls((int(-value), 1))

    @classmethod
    def from_poly(cls, f: galois.Poly) -> "ClosedPoint":
        if f.degree < 1 or int(f.coeffs[0]) != 1:
            raise PointError(f"{f} is not a monic polynomial of positive degree")
        if not f.is_irreducible():
            raise PointError(f"{f} is not irreducible")
        return cls(poly_ints(f))

    @property
    def is_infinity(self) -> bool:
        return self.coeffs is None

    @property
    def degree(self) -> int:
        return 1 if self.coeffs is None else len(self.coeffs) - 1

    @property
    def is_rational(self) -> bool:
        return self.degree == 1

    @property
    def sort_key(self) -> tuple:
        if self.coeffs is None:
            return (1, 1, ())
        if self.degree == 1:
            return (1, 0, (self.coeffs[0],))
        return (self.degree, 0, tuple(reversed(self.coeffs)))

    def poly(self, spec: FieldSpec) -> galois.Poly:
        if self.coeffs is None:
            raise PointError("the infinite place has no defining polynomial")
        return galois.Poly(list(self.coeffs), field=spec.GF, order="asc")

    def root(self, spec: FieldSpec):
        """Coordinate of a finite rational point; None at infinity."""
        if not self.is_rational:
            raise PointError("only rational points have a coordinate")
        if self.coeffs is None:
            return None
        return -spec.GF(self.coeffs[0])

    def to_json(self, spec: FieldSpec):
        if self.coeffs is None:
            return "inf"
        return [spec.to_json(spec.GF(c)) for c in self.coeffs]

    def __lt__(self, other: "ClosedPoint") -> bool:
        return self.sort_key < other.sort_key


def rational_points(spec: FieldSpec) -> List[ClosedPoint]:
    """P^1(F_q) in canonical order: 0, 1, ..., then infinity."""
    points = [ClosedPoint.rational(spec, spec.GF(i)) for i in range(spec.q)]
    points.append(ClosedPoint.infinity())
    return points


def points_of_degree(spec: FieldSpec, d: int) -> Iterator[ClosedPoint]:
    """Finite closed points of degree d in canonical order."""
    q = spec.q
    for k in range(q ** d):
        digits = []
        for _ in range(d):
            k, digit = divmod(k, q)
            digits.append(digit)
        f = galois.Poly(digits + [1], field=spec.GF, order="asc")
        if f.is_irreducible():
            yield ClosedPoint(poly_ints(f))


def random_point(spec: FieldSpec, d: int, rng: np.random.Generator) -> ClosedPoint:
    """A uniformly drawn finite closed point of degree d."""
    while True:
        digits = [int(x) for x in rng.integers(0, spec.q, size=d)]
        f = galois.Poly(digits + [1], field=spec.GF, order="asc")
        if f.is_irreducible():
            return ClosedPoint(poly_ints(f))


def residue_order(spec: FieldSpec, point: ClosedPoint) -> int:
    """|kappa(P)| = q^deg P."""
    return spec.q ** point.degree


@dataclass(frozen=True)
class FibrePoint:
    """A point t over s with ramification index e and residue degree f."""
    point: ClosedPoint
    e: int
    f: int

    def to_dict(self, spec: FieldSpec) -> dict:
        return {"point": self.point.to_json(spec), "e": self.e, "f": self.f}


# ---------------------------------------------------------------------------
# Rational maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RationalMap:
    """t -> num(T)/den(T), reduced, den monic, degree >= 1.

    Build instances with RationalMap.create, which normalizes.
    """
    spec: FieldSpec
    num: galois.Poly
    den: galois.Poly

    @classmethod
    def create(cls, spec: FieldSpec, num: galois.Poly, den: galois.Poly) -> "RationalMap":
        if num.field is not spec.GF or den.field is not spec.GF:
            raise FieldMismatchError("map coefficients lie in a different field")
        if is_zero(den):
            raise MapError("zero denominator")
        if is_zero(num):
            raise MapError("the zero map is not dominant")
        g = galois.gcd(num, den)
        num, den = num // g, den // g
        unit = leading_coefficient(den) ** -1
        num, den = scale(num, unit), scale(den, unit)
        if max(num.degree, den.degree) < 1:
            raise MapError("a constant map is not dominant")
        return cls(spec, num, den)

    @classmethod
    def identity(cls, spec: FieldSpec) -> "RationalMap":
        return cls.create(spec, variable(spec), galois.Poly.One(field=spec.GF))

    @classmethod
    def polynomial(cls, spec: FieldSpec, coeffs: Sequence) -> "RationalMap":
        return cls.create(spec, poly(spec, coeffs), galois.Poly.One(field=spec.GF))

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    @property
    def key(self) -> tuple:
        return (self.spec, poly_ints(self.num), poly_ints(self.den))

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalMap) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"RationalMap(num={list(poly_ints(self.num))}, den={list(poly_ints(self.den))})"

    def is_identity(self) -> bool:
        return self == RationalMap.identity(self.spec)

    def image_of_rational(self, point: ClosedPoint) -> ClosedPoint:
        """phi(P) for a rational point P."""
        if point.is_infinity:
            if self.num.degree > self.den.degree:
                return ClosedPoint.infinity()
            if self.num.degree < self.den.degree:
                return ClosedPoint.rational(self.spec, 0)
            return ClosedPoint.rational(
                self.spec, leading_coefficient(self.num) / leading_coefficient(self.den))
        a = point.root(self.spec)
        d = self.den(a)
        if d == 0:
            return ClosedPoint.infinity()
        return ClosedPoint.rational(self.spec, self.num(a) / d)

    def to_dict(self) -> dict:
        return {
            "num": [self.spec.to_json(self.spec.GF(c)) for c in poly_ints(self.num)],
            "den": [self.spec.to_json(self.spec.GF(c)) for c in poly_ints(self.den)],
        }


def valuation_at(f: Union[galois.Poly, RationalMap], point: ClosedPoint) -> int:
    """Order of vanishing of a polynomial or rational function at a closed point.

    Raises:
        MapError: zero input
    """
    if isinstance(f, RationalMap):
        num, den = f.num, f.den
    else:
        num, den = f, galois.Poly.One(field=f.field)
    if is_zero(num):
        raise MapError("valuation of zero is undefined")
    if point.is_infinity:
        return den.degree - num.degree
    p = galois.Poly(list(point.coeffs), field=num.field, order="asc")
    return multiplicity(num, p) - multiplicity(den, p)


def fibre(phi: RationalMap, s: ClosedPoint) -> List[FibrePoint]:
    """The points over s with ramification indices and residue degrees.

    Example:
        phi = T^2 over F_5, s = (t - 4)  ->  [(T - 2), e=1, f=1], [(T - 3), e=1, f=1]
    """
    spec = phi.spec
    if s.is_infinity:
        swapped = RationalMap.create(spec, phi.den, phi.num)
        return fibre(swapped, ClosedPoint.rational(spec, 0))

    d = s.degree
    total = d * phi.degree
    h = homogenize(s.poly(spec), phi.num, phi.den, d)
    _, pairs = factor(h)
    points = []
    for p, m in pairs:
        if p.degree % d:
            raise MapError(f"fibre factor of degree {p.degree} over a point of degree {d}")
        points.append(FibrePoint(ClosedPoint(poly_ints(p)), m, p.degree // d))
    if h.degree < total:
        if d != 1:
            raise MapError("infinity cannot lie over a point of degree > 1")
        points.append(FibrePoint(ClosedPoint.infinity(), total - h.degree, 1))
    points.sort(key=lambda fp: fp.point.sort_key)
    return points


def compose(outer: RationalMap, inner: RationalMap) -> RationalMap:
    """outer o inner."""
    if outer.spec != inner.spec:
        raise FieldMismatchError("cannot compose maps over different fields")
    k = outer.degree
    num = homogenize(outer.num, inner.num, inner.den, k)
    den = homogenize(outer.den, inner.num, inner.den, k)
    return RationalMap.create(outer.spec, num, den)


def compose_all(spec: FieldSpec, maps: Sequence[RationalMap]) -> RationalMap:
    """maps[0] o maps[1] o ... (identity for an empty sequence)."""
    return reduce(compose, maps, RationalMap.identity(spec))


# ---------------------------------------------------------------------------
# Mobius transformations
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Mobius:
    """t -> (a t + b)/(c t + d), stored projectively normalized."""
    spec: FieldSpec
    entries: Tuple[int, int, int, int]

    @classmethod
    def create(cls, spec: FieldSpec, a, b, c, d) -> "Mobius":
        a, b, c, d = (spec.element(x) if not isinstance(x, galois.FieldArray) else x
                      for x in (a, b, c, d))
        if a * d - b * c == 0:
            raise MobiusError("singular matrix")
        pivot = c if c != 0 else d
        inv = pivot ** -1
        return cls(spec, tuple(int(x * inv) for x in (a, b, c, d)))

    @classmethod
    def identity(cls, spec: FieldSpec) -> "Mobius":
        return cls.create(spec, 1, 0, 0, 1)

    @classmethod
    def from_matrix(cls, spec: FieldSpec, matrix) -> "Mobius":
        return cls.create(spec, matrix[0, 0], matrix[0, 1], matrix[1, 0], matrix[1, 1])

    @classmethod
    def all(cls, spec: FieldSpec) -> Iterator["Mobius"]:
        """Every element of PGL_2(F_q), each once."""
        GF = spec.GF
        q = spec.q
        for a in range(q):
            for b in range(q):
                for d in range(q):
                    if GF(a) * GF(d) - GF(b) != 0:
                        yield cls(spec, (a, b, 1, d))
        for a in range(1, q):
            for b in range(q):
                yield cls(spec, (a, b, 0, 1))

    @property
    def matrix(self):
        a, b, c, d = self.entries
        return self.spec.GF([[a, b], [c, d]])

    def __eq__(self, other) -> bool:
        return isinstance(other, Mobius) and (self.spec, self.entries) == (other.spec, other.entries)

    def __hash__(self) -> int:
        return hash((self.spec, self.entries))

    def __matmul__(self, other: "Mobius") -> "Mobius":
        """self o other."""
        return Mobius.from_matrix(self.spec, self.matrix @ other.matrix)

    def inverse(self) -> "Mobius":
        a, b, c, d = (self.spec.GF(x) for x in self.entries)
        return Mobius.create(self.spec, d, -b, -c, a)

    def is_identity(self) -> bool:
        return self == Mobius.identity(self.spec)

    def as_map(self) -> RationalMap:
        a, b, c, d = self.entries
        GF = self.spec.GF
        return RationalMap.create(
            self.spec,
            galois.Poly([b, a], field=GF, order="asc"),
            galois.Poly([d, c], field=GF, order="asc"),
        )

    def apply(self, point: ClosedPoint) -> ClosedPoint:
        """Image of a closed point."""
        if point.is_rational:
            return self.as_map().image_of_rational(point)
        return fibre(self.inverse().as_map(), point)[0].point

    def to_dict(self) -> dict:
        return {"matrix": [self.spec.to_json(self.spec.GF(x)) for x in self.entries]}


def _to_standard_triple(spec: FieldSpec, z1: ClosedPoint, z2: ClosedPoint, z3: ClosedPoint) -> Mobius:
    """The Mobius map sending z1, z2, z3 to 0, 1, infinity."""
    x1, x2, x3 = (None if z.is_infinity else z.root(spec) for z in (z1, z2, z3))
    if x1 is None:
        return Mobius.create(spec, 0, x2 - x3, 1, -x3)
    if x2 is None:
        return Mobius.create(spec, 1, -x1, 1, -x3)
    if x3 is None:
        return Mobius.create(spec, 1, -x1, 0, x2 - x1)
    return Mobius.create(spec, x2 - x3, -x1 * (x2 - x3), x2 - x1, -x3 * (x2 - x1))


def mobius_from_points(spec: FieldSpec, sources: Sequence[ClosedPoint],
                       targets: Sequence[ClosedPoint]) -> Mobius:
    """The unique Mobius map sending sources[i] to targets[i].

    Raises:
        MobiusError: a triple has repeated or non-rational points
    """
    for triple in (sources, targets):
        if len(triple) != 3:
            raise MobiusError("three points are required")
        if any(not z.is_rational for z in triple):
            raise MobiusError("Mobius interpolation needs rational points")
        if len(set(triple)) != 3:
            raise MobiusError("points must be pairwise distinct")
    to_std = _to_standard_triple(spec, *sources)
    from_std = _to_standard_triple(spec, *targets).inverse()
    return from_std @ to_std


def _affine_from_standard(spec: FieldSpec, point: ClosedPoint) -> Mobius:
    """t -> x + y t sending the point (t^2 - alpha) to the given degree-2 point."""
    if point.degree != 2 or point.is_infinity:
        raise PointError("a degree-2 point is required")
    gamma, beta = (spec.GF(c) for c in point.coeffs[:2])
    two = spec.scalar(2)
    alpha = spec.nonsquare_witness
    x = -beta / two
    y = sqrt(spec, (beta * beta - two * two * gamma) / (two * two * alpha))
    return Mobius.create(spec, y, x, 0, 1)


def standard_quadratic_point(spec: FieldSpec) -> ClosedPoint:
    """The degree-2 point (t^2 - alpha)."""
    alpha = spec.nonsquare_witness
    return ClosedPoint((int(-alpha), 0, 1))


def mobius_between_quadratic_points(spec: FieldSpec, source: ClosedPoint,
                                    target: ClosedPoint) -> Mobius:
    """A Mobius map sending the degree-2 point source to target."""
    forward = _affine_from_standard(spec, target)
    backward = _affine_from_standard(spec, source).inverse()
    return forward @ backward


def embed_poly(ext: QuadExt, f: galois.Poly) -> galois.Poly:
    """Image of a polynomial over F_q in F_{q^2}[T]."""
    coeffs = [int(ext.embed(f.field(int(c)))) for c in f.coefficients(order="asc")]
    return galois.Poly(coeffs, field=ext.big.GF, order="asc")
