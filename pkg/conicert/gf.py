"""Exact arithmetic in F_q and in its quadratic extension F_{q^2}.

Elements are galois ``FieldArray`` scalars. Externally an element of
F_q = F_p[x]/(modulus) is its little-endian coefficient list over F_p; a
single residue is accepted (and emitted) when n = 1.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Optional, Sequence, Tuple, Union

import galois
import numpy as np

from conicert.exceptions import (
    FieldMismatchError,
    FieldSpecError,
    NotASquareError,
    ZeroInverseError,
)

logger = logging.getLogger(__name__)

# Fields (or quadratic extensions) up to this order are searched exhaustively.
EXHAUSTIVE_LIMIT = 1 << 16

ElementLike = Union[int, Sequence[int], galois.FieldArray]


@dataclass(frozen=True)
class FieldSpec:
    """The finite field F_q, q = p^n, p odd.

    Attributes:
        p: Odd prime characteristic
        n: Extension degree over F_p
        modulus: Little-endian monic irreducible of degree n over F_p (None when n = 1)
    """
    p: int
    n: int = 1
    modulus: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 3 or not galois.is_prime(self.p):
            raise FieldSpecError(f"p must be an odd prime, got {self.p!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise FieldSpecError(f"n must be a positive integer, got {self.n!r}")
        if self.n == 1:
            if self.modulus is not None and len(self.modulus) != 2:
                raise FieldSpecError("a modulus for n = 1 must be linear")
            object.__setattr__(self, "modulus", None)
            return
        if self.modulus is None:
            raise FieldSpecError(f"n = {self.n} requires an explicit modulus")
        modulus = tuple(int(c) for c in self.modulus)
        if len(modulus) != self.n + 1 or modulus[-1] != 1:
            raise FieldSpecError(f"modulus must be monic of degree {self.n}")
        if any(c < 0 or c >= self.p for c in modulus):
            raise FieldSpecError(f"modulus coefficients must lie in [0, {self.p})")
        poly = galois.Poly(list(reversed(modulus)), field=galois.GF(self.p))
        if not poly.is_irreducible():
            raise FieldSpecError(f"modulus {list(modulus)} is reducible over F_{self.p}")
        object.__setattr__(self, "modulus", modulus)

    @property
    def q(self) -> int:
        return self.p ** self.n

    @cached_property
    def GF(self):
        """The galois field class realizing this spec."""
        if self.n == 1:
            return galois.GF(self.p)
        irreducible = galois.Poly(list(reversed(self.modulus)), field=galois.GF(self.p))
        return galois.GF(self.p ** self.n, irreducible_poly=irreducible)

    @cached_property
    def nonsquare_witness(self) -> galois.FieldArray:
        """First element, in canonical order, with x^((q-1)/2) = -1."""
        minus_one = -self.GF(1)
        exponent = (self.q - 1) // 2
        for value in range(1, self.q):
            x = self.GF(value)
            if x ** exponent == minus_one:
                return x
        raise FieldSpecError(f"no nonsquare found in F_{self.q}")

    # -- conversion -------------------------------------------------------

    def element(self, value: ElementLike) -> galois.FieldArray:
        """Build an element from an integer or a little-endian coefficient list."""
        if isinstance(value, galois.FieldArray):
            self.check(value)
            return value
        if isinstance(value, (list, tuple, np.ndarray)):
            coeffs = [int(c) for c in value]
            if len(coeffs) > self.n:
                raise FieldMismatchError(f"element {coeffs} has more than {self.n} coefficients")
            if any(c < 0 or c >= self.p for c in coeffs):
                raise FieldMismatchError(f"element coefficients must lie in [0, {self.p})")
            return self.GF(sum(c * self.p ** i for i, c in enumerate(coeffs)))
        value = int(value)
        if self.n == 1:
            return self.GF(value % self.p)
        if not 0 <= value < self.q:
            raise FieldMismatchError(f"integer {value} is not an element of F_{self.q}")
        return self.GF(value)

    def scalar(self, k: int) -> galois.FieldArray:
        """The integer k read in the prime subfield (k * 1)."""
        return self.GF(k % self.p)

    def coeffs(self, x: galois.FieldArray) -> Tuple[int, ...]:
        """Little-endian coefficient tuple of length n."""
        self.check(x)
        value = int(x)
        digits = []
        for _ in range(self.n):
            value, digit = divmod(value, self.p)
            digits.append(digit)
        return tuple(digits)

    def to_json(self, x: galois.FieldArray) -> Union[int, list]:
        if self.n == 1:
            return int(x)
        return list(self.coeffs(x))

    def to_dict(self) -> dict:
        data = {"p": self.p, "n": self.n}
        if self.modulus is not None:
            data["modulus"] = list(self.modulus)
        return data

    # -- arithmetic -------------------------------------------------------

    def check(self, *values: galois.FieldArray) -> None:
        """Raise FieldMismatchError unless every value is a scalar of this field."""
        for x in values:
            if type(x) is not self.GF or np.ndim(x) != 0:
                raise FieldMismatchError(f"{x!r} is not an element of F_{self.q}")

    def add(self, a, b):
        self.check(a, b)
        return a + b

    def sub(self, a, b):
        self.check(a, b)
        return a - b

    def mul(self, a, b):
        self.check(a, b)
        return a * b

    def inv(self, a):
        self.check(a)
        if a == 0:
            raise ZeroInverseError("inversion of zero")
        return a ** -1

    def power(self, a, e: int):
        self.check(a)
        if e < 0:
            return self.inv(a) ** (-e)
        return a ** e

    def frobenius(self, a, k: int = 1):
        """x -> x^(p^k)."""
        self.check(a)
        return a ** (self.p ** k)

    def elements(self) -> galois.FieldArray:
        """All q elements in canonical (integer) order."""
        return self.GF.elements

    def sort_key(self, x) -> Tuple[int, ...]:
        """Lexicographic key on the little-endian coefficient list."""
        return self.coeffs(x)


@lru_cache(maxsize=None)
def field_spec(p: int, n: int = 1, modulus: Optional[Tuple[int, ...]] = None) -> FieldSpec:
    """Cached FieldSpec factory."""
    return FieldSpec(p, n, None if modulus is None else tuple(modulus))


def is_square(spec: FieldSpec, x) -> bool:
    """True iff x = y^2 for some y in the field (0 counts as a square)."""
    spec.check(x)
    if x == 0:
        return True
    return bool(x ** ((spec.q - 1) // 2) == 1)


def sqrt(spec: FieldSpec, x):
    """Canonical square root: the root with the smaller coefficient list.

    Raises:
        NotASquareError: x is not a square
    """
    if not is_square(spec, x):
        raise NotASquareError(f"{spec.to_json(x)} is not a square in F_{spec.q}")
    if x == 0:
        return spec.GF(0)
    if spec.q <= EXHAUSTIVE_LIMIT:
        elements = spec.elements()
        roots = elements[np.nonzero(elements ** 2 == x)[0]]
        root = min((spec.GF(int(r)) for r in roots), key=spec.sort_key)
    else:
        y = spec.GF(int(np.sqrt(x)))
        root = min((y, -y), key=spec.sort_key)
    if root ** 2 != x:
        raise NotASquareError(f"square root of {spec.to_json(x)} failed to verify")
    return root


@dataclass(frozen=True)
class QuadExt:
    """F_{q^2} together with the embedding of F_q.

    F_{q^2} is realized as F_p[y]/(M) with M the smallest irreducible of
    degree 2n over F_p; F_q embeds by sending x to the smallest root of the
    base modulus.
    """
    base: FieldSpec

    @cached_property
    def big(self) -> FieldSpec:
        p, n = self.base.p, self.base.n
        modulus = galois.irreducible_poly(p, 2 * n, method="min")
        return FieldSpec(p, 2 * n, tuple(int(c) for c in modulus.coefficients(order="asc")))

    @cached_property
    def _generator_image(self):
        big_gf = self.big.GF
        if self.base.n == 1:
            return None
        poly = galois.Poly(list(reversed(self.base.modulus)), field=big_gf)
        return min(poly.roots(), key=int)

    @cached_property
    def _embedding_matrix(self):
        """Columns are the F_p-coordinates of r^i in F_{q^2}."""
        big = self.big
        r = self._generator_image
        columns = [big.coeffs(r ** i) for i in range(self.base.n)]
        return galois.GF(self.base.p)(np.array(columns, dtype=int).T)

    def embed(self, c):
        """Image of an element of F_q in F_{q^2}."""
        self.base.check(c)
        if self.base.n == 1:
            return self.big.GF(int(c))
        vector = self._embedding_matrix @ galois.GF(self.base.p)(list(self.base.coeffs(c)))
        return self.big.element([int(v) for v in vector])

    def frobenius(self, z):
        """The generator of Gal(F_{q^2}/F_q): z -> z^q."""
        self.big.check(z)
        return z ** self.base.q

    def descend(self, z):
        """Element of F_q whose embedding is z.

        Raises:
            FieldMismatchError: z is not fixed by Frobenius
        """
        if self.frobenius(z) != z:
            raise FieldMismatchError(f"{self.big.to_json(z)} does not lie in F_{self.base.q}")
        if self.base.n == 1:
            return self.base.GF(int(z))
        n = self.base.n
        GFp = galois.GF(self.base.p)
        target = GFp(list(self.big.coeffs(z))).reshape(-1, 1)
        augmented = np.hstack([self._embedding_matrix, target]).view(GFp)
        reduced = augmented.row_reduce()
        c = self.base.element([int(v) for v in reduced[:n, n]])
        if self.embed(c) != z:
            raise FieldMismatchError("descent failed to verify")
        return c

    @cached_property
    def sqrt_alpha(self):
        """A square root of the nonsquare witness of F_q inside F_{q^2}."""
        return sqrt(self.big, self.embed(self.base.nonsquare_witness))

    def norm(self, z):
        return self.descend(z ** (self.base.q + 1))


def solve_norm_equation(ext: QuadExt, v):
    """Find u in F_{q^2} with u * u^q = v.

    Raises:
        ZeroInverseError: v = 0
    """
    ext.base.check(v)
    if v == 0:
        raise ZeroInverseError("the norm equation has no solution for v = 0")
    q = ext.base.q
    target = ext.embed(v)
    big_gf = ext.big.GF
    if ext.big.q <= EXHAUSTIVE_LIMIT:
        units = big_gf.elements[1:]
        hits = np.nonzero(units ** (q + 1) == target)[0]
        u = big_gf(int(units[int(hits[0])]))
    else:
        g = big_gf.primitive_element
        log = int(target.log())
        u = g ** (log // (q + 1))
    if u ** (q + 1) != target:
        raise ZeroInverseError(f"norm equation for {ext.base.to_json(v)} failed to verify")
    logger.debug("norm equation v=%s solved by u=%s", ext.base.to_json(v), ext.big.to_json(u))
    return u


def iter_elements(spec: FieldSpec) -> Iterable:
    """Iterate the field elements as scalars in canonical order."""
    for x in spec.elements():
        yield spec.GF(int(x))
