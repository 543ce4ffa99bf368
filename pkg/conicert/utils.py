"""Utility functions for Conicert: JSON input parsing and plain-text formatting."""
import json
from typing import Any, Optional

import galois

from conicert.conicbundle import ConicBundle
from conicert.coversynth import Cover, CoverStep
from conicert.exceptions import ConicertError, FieldSpecError, InputError, PointError
from conicert.gf import FieldSpec, field_spec
from conicert.p1curve import ClosedPoint, RationalMap, poly_ints


def load_json(path: str) -> Any:
    """Read a JSON file, reporting syntax errors with their position."""
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc


def _require(data: Any, key: str, where: str) -> Any:
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object")
    if key not in data:
        raise InputError(f"{where}: missing key '{key}'")
    return data[key]


def parse_field(data: Any, where: str = "field") -> FieldSpec:
    """{"p": 3, "n": 2, "modulus": [1, 0, 1]} -> FieldSpec."""
    p = _require(data, "p", where)
    n = data.get("n", 1)
    modulus = data.get("modulus")
    if not isinstance(p, int) or not isinstance(n, int):
        raise FieldSpecError(f"{where}: p and n must be integers")
    if modulus is not None and (not isinstance(modulus, list)
                                or not all(isinstance(c, int) for c in modulus)):
        raise FieldSpecError(f"{where}.modulus: expected a list of integers")
    return field_spec(p, n, None if modulus is None or n == 1 else tuple(modulus))


def parse_element(spec: FieldSpec, value: Any, where: str):
    """An int c is the element [c]; a list is a little-endian coefficient list."""
    try:
        if isinstance(value, bool):
            raise InputError("booleans are not field elements")
        if isinstance(value, int):
            return spec.element(value) if spec.n == 1 else spec.element([value])
        if isinstance(value, list):
            return spec.element(value)
    except ConicertError as exc:
        raise InputError(f"{where}: {exc}") from exc
    raise InputError(f"{where}: expected an integer or a coefficient list")


def parse_poly(spec: FieldSpec, value: Any, where: str) -> galois.Poly:
    """Little-endian coefficient list -> polynomial."""
    if not isinstance(value, list):
        raise InputError(f"{where}: expected a coefficient list")
    coeffs = [int(parse_element(spec, c, f"{where}[{i}]")) for i, c in enumerate(value)]
    if not coeffs:
        return galois.Poly.Zero(field=spec.GF)
    return galois.Poly(coeffs, field=spec.GF, order="asc")


def parse_point(spec: FieldSpec, value: Any, where: str = "point") -> ClosedPoint:
    """'inf' or the coefficient list of a monic irreducible."""
    if value == "inf":
        return ClosedPoint.infinity()
    f = parse_poly(spec, value, where)
    try:
        return ClosedPoint.from_poly(f)
    except PointError as exc:
        raise PointError(f"{where}: {exc}") from exc


def parse_rational_point(spec: FieldSpec, text: str, where: str = "point") -> ClosedPoint:
    """CLI form of a rational point: 'inf', a coordinate, or a JSON coefficient list.

    Example: '2' -> (t - 2), '[1, 1]' -> (t + 1), 'inf' -> infinity
    """
    text = text.strip()
    if text == "inf":
        return ClosedPoint.infinity()
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PointError(f"{where}: cannot parse {text!r}") from exc
    if isinstance(value, int) and not isinstance(value, bool) or (
            isinstance(value, list) and spec.n > 1 and all(isinstance(c, int) for c in value)):
        return ClosedPoint.rational(spec, parse_element(spec, value, where))
    point = parse_point(spec, value, where)
    if not point.is_rational:
        raise PointError(f"{where}: {text} is not a rational point")
    return point


def parse_bundle(data: Any) -> ConicBundle:
    """{"field": {...}, "a": [...], "b": [...], "c": [...]} -> ConicBundle."""
    spec = parse_field(_require(data, "field", "bundle"))
    a, b, c = (parse_poly(spec, _require(data, key, "bundle"), f"bundle.{key}") for key in "abc")
    return ConicBundle.create(spec, a, b, c)


def parse_map(spec: FieldSpec, data: Any, where: str = "map") -> RationalMap:
    num = parse_poly(spec, _require(data, "num", where), f"{where}.num")
    den = parse_poly(spec, data.get("den", [1]), f"{where}.den")
    return RationalMap.create(spec, num, den)


def parse_cover(spec: FieldSpec, data: Any, where: str = "cover") -> Cover:
    """Cover JSON; without a chain the map becomes a single composition step."""
    phi = parse_map(spec, data, where)
    chain = data.get("chain")
    if not chain:
        return Cover.from_map(phi)
    steps = []
    for i, entry in enumerate(chain):
        kind = _require(entry, "kind", f"{where}.chain[{i}]")
        step_map = parse_map(spec, _require(entry, "map", f"{where}.chain[{i}]"), f"{where}.chain[{i}].map")
        steps.append(CoverStep(kind, step_map, dict(entry.get("params", {}))))
    # the stored map is kept as given; verify_chain compares it with the recomposition
    return Cover(phi, tuple(steps))


def format_element(spec: FieldSpec, x) -> str:
    value = spec.to_json(x)
    return str(value) if spec.n == 1 else "(" + ", ".join(str(v) for v in value) + ")"


def format_poly(spec: FieldSpec, f: galois.Poly, var: str = "t") -> str:
    """Render a polynomial with descending powers.

    Example: [1, 0, 2] over F_3 -> '2*t^2 + 1'
    """
    ints = poly_ints(f)
    if not ints:
        return "0"
    terms = []
    for i in range(len(ints) - 1, -1, -1):
        if ints[i] == 0:
            continue
        c = format_element(spec, spec.GF(ints[i]))
        if i == 0:
            terms.append(c)
            continue
        power = var if i == 1 else f"{var}^{i}"
        terms.append(power if ints[i] == 1 else f"{c}*{power}")
    return " + ".join(terms)


def format_point(spec: FieldSpec, point: Optional[ClosedPoint]) -> str:
    if point is None:
        return "-"
    if point.is_infinity:
        return "inf"
    return f"({format_poly(spec, point.poly(spec))})"


def format_map(phi: RationalMap, var: str = "T") -> str:
    num = format_poly(phi.spec, phi.num, var)
    if phi.den.degree == 0:
        return num
    return f"({num})/({format_poly(phi.spec, phi.den, var)})"


def format_field(spec: FieldSpec) -> str:
    """Example: FieldSpec(3, 2, (1, 0, 1)) -> 'F_9 = F_3[x]/(x^2 + 1)'"""
    if spec.n == 1:
        return f"F_{spec.p}"
    prime = field_spec(spec.p)
    modulus = galois.Poly(list(spec.modulus), field=prime.GF, order="asc")
    return f"F_{spec.q} = F_{spec.p}[x]/({format_poly(prime, modulus, 'x')})"
