"""Orchestration, independent verification and test-support generators.

The verifiers read only a bundle and a cover: parity goes through
``p1curve.fibre`` and residue vanishing through pullback plus a fresh
residue scan, never through synthesis internals.
"""
import logging
import time
from dataclasses import dataclass, field
from math import prod
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import galois
import numpy as np

from conicert.config import EngineConfig
from conicert.conicbundle import (
    ConicBundle,
    NonSplitLocus,
    condition_star,
    condition_star_star,
    nonsplit_locus,
    pullback_bundle,
)
from conicert.coversynth import Cover, synth_requiv_cover, synth_unirational_cover
from conicert.exceptions import (
    BudgetExceeded,
    HypothesisError,
    LocusError,
    SynthesisError,
    VerificationError,
)
from conicert.gf import FieldSpec, sqrt, is_square
from conicert.p1curve import (
    ClosedPoint,
    fibre,
    is_square_mod,
    is_zero,
    leading_coefficient,
    poly,
    poly_ints,
    random_point,
    rational_points,
    residue_order,
)

logger = logging.getLogger(__name__)

CERTIFIED = "certified"
HYPOTHESIS_UNMET = "hypothesis_unmet"
FAILED = "failed"

CLAIM = ("2 | e*f at every point over the non-split locus; the pulled-back bundle "
         "has no non-split fibre and therefore admits a section")


def make_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Independent RNG stream for instance `index` of a run seeded with `seed`."""
    return np.random.default_rng([seed, index])


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: Any = None

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True, eq=False)
class Certificate:
    """A cover together with the passing checks that justify it."""
    kind: str
    bundle: ConicBundle
    locus: NonSplitLocus
    cover: Cover
    checks: Tuple[CheckResult, ...]
    s0: Optional[ClosedPoint] = None
    s1: Optional[ClosedPoint] = None

    def to_dict(self) -> dict:
        spec = self.bundle.spec
        data = {
            "status": CERTIFIED,
            "kind": self.kind,
            "claim": CLAIM,
            "cover": self.cover.to_dict(),
            "degree": self.cover.degree,
        }
        if self.s0 is not None:
            data["s0"] = self.s0.to_json(spec)
            data["s1"] = self.s1.to_json(spec)
        return data


@dataclass
class Report:
    """Stable-order, JSON-serializable outcome of one command."""
    spec: FieldSpec
    bundle: ConicBundle
    locus: NonSplitLocus
    certificate: Optional[dict] = None
    checks: List[CheckResult] = field(default_factory=list)
    seed: Optional[int] = None
    timings: Dict[str, float] = field(default_factory=dict)
    issued: Optional[Certificate] = None

    @property
    def star(self) -> bool:
        return condition_star(self.locus)

    @property
    def star_star(self) -> bool:
        return condition_star_star(self.locus)

    @property
    def status(self) -> Optional[str]:
        return None if self.certificate is None else self.certificate["status"]

    @property
    def exit_code(self) -> int:
        """0 success, 1 hypothesis not met, 2 verification or synthesis failure."""
        if self.status is None:
            return 0 if self.star else 1
        return {CERTIFIED: 0, HYPOTHESIS_UNMET: 1}.get(self.status, 2)

    def to_dict(self) -> dict:
        return {
            "field": self.spec.to_dict(),
            "bundle": self.bundle.to_dict(),
            "locus": self.locus.to_list(),
            "delta": self.locus.delta,
            "star": self.star,
            "star_star": self.star_star,
            "certificate": self.certificate,
            "checks": [c.to_dict() for c in self.checks],
            "seed": self.seed,
            "timings": {k: round(v, 3) for k, v in self.timings.items()},
        }


def _elapsed_ms(start: float) -> float:
    return (time.perf_counter() - start) * 1000.0


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------

def verify_parity(cover: Cover, locus: Union[NonSplitLocus, Sequence[ClosedPoint]]) -> CheckResult:
    """Pass iff every point over every s in the locus has e*f even."""
    spec = cover.spec
    points = locus.points if isinstance(locus, NonSplitLocus) else list(locus)
    detail = []
    passed = True
    for s in points:
        fib = fibre(cover.map, s)
        ok = all((fp.e * fp.f) % 2 == 0 for fp in fib)
        passed = passed and ok
        detail.append({"point": s.to_json(spec), "fibre": [fp.to_dict(spec) for fp in fib], "ok": ok})
    return CheckResult("parity", passed, detail)


def verify_pullback_vanishing(bundle: ConicBundle, cover: Cover) -> CheckResult:
    """Pass iff the pulled-back bundle has an empty non-split locus."""
    pulled = pullback_bundle(bundle, cover.map)
    locus = nonsplit_locus(pulled)
    return CheckResult("pullback_residues_vanish", len(locus) == 0,
                       {"pullback": pulled.to_dict(), "locus": locus.to_list()})


def verify_requiv(cover: Cover, s0: ClosedPoint, s1: ClosedPoint) -> CheckResult:
    """Pass iff the fibres over s0 and s1 both contain a rational point."""
    spec = cover.spec
    detail = {}
    passed = True
    for name, s in (("s0", s0), ("s1", s1)):
        fib = fibre(cover.map, s)
        ok = any(fp.f == 1 for fp in fib)
        passed = passed and ok
        detail[name] = {"point": s.to_json(spec), "fibre": [fp.to_dict(spec) for fp in fib], "ok": ok}
    return CheckResult("fibre_rational_points", passed, detail)


def verify_chain(cover: Cover) -> CheckResult:
    """Pass iff the audit chain recomposes to the map with multiplicative degrees."""
    recomposed = cover.recompose()
    degrees = [step.map.degree for step in cover.chain]
    passed = recomposed == cover.map and prod(degrees) == cover.degree
    return CheckResult("chain_recomposes", passed,
                       {"steps": [step.kind for step in cover.chain], "degrees": degrees})


def issue_certificate(kind: str, bundle: ConicBundle, locus: NonSplitLocus, cover: Cover,
                      checks: Sequence[CheckResult], s0: Optional[ClosedPoint] = None,
                      s1: Optional[ClosedPoint] = None) -> Certificate:
    """Wrap passing checks in a certificate; raise VerificationError otherwise."""
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise VerificationError(f"checks failed: {', '.join(failed)}")
    return Certificate(kind, bundle, locus, cover, tuple(checks), s0, s1)


def verify_certificate(bundle: ConicBundle, cover: Cover, s0: Optional[ClosedPoint] = None,
                       s1: Optional[ClosedPoint] = None) -> List[CheckResult]:
    """Run every applicable verifier from the bundle and cover alone."""
    locus = nonsplit_locus(bundle)
    checks = [
        verify_chain(cover),
        verify_parity(cover, locus),
        verify_pullback_vanishing(bundle, cover),
    ]
    if s0 is not None and s1 is not None:
        checks.append(verify_requiv(cover, s0, s1))
    return checks


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

def analyze(bundle: ConicBundle, seed: Optional[int] = None) -> Report:
    """Non-split locus, delta and the (*)/(**) flags; no cover."""
    start = time.perf_counter()
    locus = nonsplit_locus(bundle)
    report = Report(bundle.spec, bundle, locus, seed=seed)
    report.timings["analyze_ms"] = _elapsed_ms(start)
    return report


def _failure(exc: Exception) -> dict:
    data = {"status": FAILED, "error": type(exc).__name__, "message": str(exc)}
    chain = getattr(exc, "chain", None)
    if chain:
        data["chain"] = [step.to_dict() for step in chain]
    return data


def _certify(kind: str, bundle: ConicBundle, synthesize, engine: EngineConfig,
             seed: Optional[int], s0: Optional[ClosedPoint] = None,
             s1: Optional[ClosedPoint] = None) -> Report:
    report = analyze(bundle, seed)
    locus = report.locus
    hypothesis = report.star if kind == "unirational" else report.star_star
    if not hypothesis:
        condition = "(*)" if kind == "unirational" else "(**)"
        report.certificate = {"status": HYPOTHESIS_UNMET, "condition": condition,
                              "degrees": locus.degrees}
        return report

    start = time.perf_counter()
    deadline = time.monotonic() + engine.budget_ms / 1000.0
    try:
        cover = synthesize(locus, deadline)
    except (SynthesisError, HypothesisError) as exc:
        logger.warning("%s synthesis failed: %s", kind, exc)
        report.timings["synthesis_ms"] = _elapsed_ms(start)
        report.certificate = _failure(exc)
        return report
    report.timings["synthesis_ms"] = _elapsed_ms(start)

    start = time.perf_counter()
    report.checks = verify_certificate(bundle, cover, s0, s1)
    report.timings["verification_ms"] = _elapsed_ms(start)
    try:
        report.issued = issue_certificate(kind, bundle, locus, cover, report.checks, s0, s1)
    except VerificationError as exc:
        logger.warning("%s certificate rejected: %s", kind, exc)
        report.certificate = _failure(exc)
        report.certificate["cover"] = cover.to_dict()
        return report
    report.certificate = report.issued.to_dict()
    logger.info("issued %s certificate with a degree-%d cover", kind, cover.degree)
    return report


def certify_unirational(bundle: ConicBundle, engine: Optional[EngineConfig] = None,
                        seed: Optional[int] = None) -> Report:
    engine = engine or EngineConfig()
    return _certify("unirational", bundle,
                    lambda locus, deadline: synth_unirational_cover(locus, deadline),
                    engine, seed)


def certify_requiv(bundle: ConicBundle, s0: ClosedPoint, s1: ClosedPoint,
                   engine: Optional[EngineConfig] = None, seed: Optional[int] = None) -> Report:
    engine = engine or EngineConfig()
    return _certify(
        "requiv", bundle,
        lambda locus, deadline: synth_requiv_cover(
            locus, s0, s1, max_depth=engine.max_tower_depth, deadline=deadline),
        engine, seed, s0, s1)


def verify_report(bundle: ConicBundle, cover: Cover, s0: Optional[ClosedPoint] = None,
                  s1: Optional[ClosedPoint] = None, seed: Optional[int] = None) -> Report:
    """Report for an externally supplied cover (the `verify` command)."""
    report = analyze(bundle, seed)
    start = time.perf_counter()
    report.checks = verify_certificate(bundle, cover, s0, s1)
    report.timings["verification_ms"] = _elapsed_ms(start)
    kind = "requiv" if s0 is not None else "unirational"
    try:
        report.issued = issue_certificate(kind, bundle, report.locus, cover, report.checks, s0, s1)
        report.certificate = report.issued.to_dict()
    except VerificationError as exc:
        report.certificate = _failure(exc)
    return report


# ---------------------------------------------------------------------------
# Prescribed loci
# ---------------------------------------------------------------------------

def _random_poly(spec: FieldSpec, max_degree: int, rng: np.random.Generator) -> galois.Poly:
    digits = [int(x) for x in rng.integers(0, spec.q, size=max_degree + 1)]
    return galois.Poly(digits, field=spec.GF, order="asc")


def _random_nonsquare_residue(spec: FieldSpec, point: ClosedPoint,
                              rng: np.random.Generator) -> galois.Poly:
    modulus = point.poly(spec)
    order = residue_order(spec, point)
    while True:
        r = _random_poly(spec, point.degree - 1, rng)
        if not is_zero(r) and not is_square_mod(r, modulus, order):
            return r


def _infinity_lift(spec: FieldSpec, a_degree: int, want_infinity: bool,
                   rng: np.random.Generator) -> galois.Poly:
    """Random g of degree 1..3 for b + a*g; for odd deg a its leading class sets infinity."""
    if a_degree % 2:
        degree = int(rng.choice([1, 3]))
        lead = spec.nonsquare_witness if want_infinity else spec.GF(1)
    else:
        degree = int(rng.choice([1, 3])) if want_infinity else int(rng.integers(1, 4))
        lead = spec.GF(int(rng.integers(1, spec.q)))
    return _random_poly(spec, degree - 1, rng) + galois.Poly([int(lead)] + [0] * degree, field=spec.GF)


def _draw_points(spec: FieldSpec, degrees: Sequence[int], rng: np.random.Generator,
                 attempts: int) -> List[ClosedPoint]:
    chosen: List[ClosedPoint] = []
    rational = rational_points(spec)
    if len(degrees) % 2:
        # infinity is reserved for the reciprocity adjustment
        rational = rational[:-1]
    for d in degrees:
        if d < 1:
            raise LocusError(f"point degrees must be positive, got {d}")
        for _ in range(attempts):
            if d == 1:
                candidate = rational[int(rng.integers(0, len(rational)))]
            else:
                candidate = random_point(spec, d, rng)
            if candidate not in chosen:
                chosen.append(candidate)
                break
        else:
            raise LocusError(f"could not draw a fresh point of degree {d}")
    return chosen


def prescribed_target(spec: FieldSpec, points: Sequence[ClosedPoint]) -> List[ClosedPoint]:
    """The locus actually realizable for a request: infinity added on odd counts.

    Raises:
        LocusError: repeated points, or an odd request that already contains infinity
    """
    if len(set(points)) != len(points):
        raise LocusError("requested points must be distinct")
    target = list(points)
    if len(target) % 2:
        if ClosedPoint.infinity() in target:
            raise LocusError("an odd locus containing infinity cannot be realized")
        logger.warning("odd locus requested; adding infinity to satisfy reciprocity")
        target.append(ClosedPoint.infinity())
    return sorted(target, key=lambda p: p.sort_key)


def bundle_with_prescribed_locus(spec: FieldSpec, request: Sequence[Union[int, ClosedPoint]],
                                 rng: Optional[np.random.Generator] = None,
                                 attempts: int = 500) -> ConicBundle:
    """A diagonal bundle whose non-split locus is exactly the requested one.

    a is the product of the finite points and b a CRT lift making -b*c a
    nonsquare modulo each of them. c is -1, or minus the nonsquare witness
    when infinity is wanted and deg a is even; in that case b gets odd
    degree. Retries add a * g with deg g >= 1, whose parity and leading
    coefficient fix the class at infinity. Integers in the request are
    degrees of randomly drawn points.

    Raises:
        LocusError: unrealizable request or no success within `attempts`
    """
    rng = rng if rng is not None else make_rng(0)
    if request and all(isinstance(x, (int, np.integer)) for x in request):
        points = _draw_points(spec, [int(x) for x in request], rng, attempts)
    else:
        points = list(request)
    target = prescribed_target(spec, points)
    minus_one = galois.Poly([int(-spec.GF(1))], field=spec.GF)
    one = galois.Poly.One(field=spec.GF)
    if not target:
        return ConicBundle.create(spec, one, one, minus_one)

    finite = [p for p in target if not p.is_infinity]
    want_infinity = ClosedPoint.infinity() in target
    a = one
    for p in finite:
        a = a * p.poly(spec)
    moduli = [p.poly(spec) for p in finite]
    # with deg a even, infinity is non-split only for odd deg b and -c a nonsquare
    scaled = want_infinity and a.degree % 2 == 0
    minus_c = spec.nonsquare_witness if scaled else spec.GF(1)
    c = galois.Poly([int(-minus_c)], field=spec.GF)
    to_b = galois.Poly([int(minus_c ** -1)], field=spec.GF)
    for attempt in range(attempts):
        residues = [(_random_nonsquare_residue(spec, p, rng) * to_b) % m
                    for p, m in zip(finite, moduli)]
        b = residues[0] if len(finite) == 1 else galois.crt(residues, moduli)
        if attempt:
            b = b + a * _infinity_lift(spec, a.degree, want_infinity, rng)
        bundle = ConicBundle.create(spec, a, b, c)
        if list(nonsplit_locus(bundle).points) == target:
            logger.debug("prescribed locus realized after %d attempt(s)", attempt + 1)
            return bundle
    raise LocusError(f"no bundle realized the requested locus in {attempts} attempts")


# ---------------------------------------------------------------------------
# Section oracle
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SectionResult:
    section: Optional[Tuple[galois.Poly, galois.Poly, galois.Poly]]
    max_deg: int
    candidates: int
    nonexistence_proved: bool = False

    @property
    def found(self) -> bool:
        return self.section is not None

    def to_dict(self, spec: FieldSpec) -> dict:
        data = {"found": self.found, "max_deg": self.max_deg, "candidates": self.candidates}
        if self.found:
            data["section"] = {name: [spec.to_json(spec.GF(v)) for v in poly_ints(f)]
                               for name, f in zip("xyz", self.section)}
        else:
            data["nonexistence_proved"] = self.nonexistence_proved
            data["evidence"] = ("non-split locus is nonempty, so no section exists in any degree"
                                if self.nonexistence_proved
                                else f"no section of degree <= {self.max_deg}")
        return data


def _polys_of_degree_at_most(spec: FieldSpec, max_deg: int, monic_only: bool):
    """Polynomials of degree <= max_deg by (degree, encoding); zero first unless monic_only."""
    q = spec.q
    if not monic_only:
        for k in range(q ** (max_deg + 1)):
            digits = []
            for _ in range(max_deg + 1):
                k, digit = divmod(k, q)
                digits.append(digit)
            yield galois.Poly(digits, field=spec.GF, order="asc")
        return
    for degree in range(max_deg + 1):
        for k in range(q ** degree):
            digits = []
            for _ in range(degree):
                k, digit = divmod(k, q)
                digits.append(digit)
            yield galois.Poly(digits + [1], field=spec.GF, order="asc")


def poly_sqrt(spec: FieldSpec, w: galois.Poly) -> Optional[galois.Poly]:
    """Square root in F_q[t] with the smaller little-endian encoding, or None."""
    if is_zero(w):
        return w
    if w.degree % 2 or not is_square(spec, leading_coefficient(w)):
        return None
    k = w.degree // 2
    wc = [spec.GF(int(c)) for c in w.coefficients(order="asc")]
    y = [spec.GF(0)] * (k + 1)
    y[k] = sqrt(spec, wc[2 * k])
    two_lead = spec.scalar(2) * y[k]
    for i in range(1, k + 1):
        j = k - i
        # coefficient of t^(k+j) in y^2, excluding the unknown 2 y_k y_j term
        partial = spec.GF(0)
        for l in range(j + 1, k):
            r = k + j - l
            if j < r <= k:
                partial += y[l] * y[r]
        y[j] = (wc[k + j] - partial) / two_lead
    root = poly(spec, y)
    if root * root != w:
        return None
    return min(root, -root, key=poly_ints)


def section_search_oracle(bundle: ConicBundle, max_deg: int,
                          budget_ms: Optional[int] = None) -> SectionResult:
    """Exhaustive search for a polynomial section of degree <= max_deg.

    Triples are normalized so the first nonzero of (x, z) is monic; y is
    solved from b y^2 = -(a x^2 + c z^2).

    Raises:
        BudgetExceeded: the time budget ran out before the search finished
    """
    if max_deg < 0:
        raise LocusError("max_deg must be non-negative")
    spec = bundle.spec
    deadline = None if budget_ms is None else time.monotonic() + budget_ms / 1000.0
    a, b, c = bundle.coefficients
    zero = galois.Poly.Zero(field=spec.GF)
    candidates = 0
    xs = [zero] + list(_polys_of_degree_at_most(spec, max_deg, monic_only=True))
    for x in xs:
        if deadline is not None and time.monotonic() > deadline:
            raise BudgetExceeded(f"section search exceeded {budget_ms} ms after {candidates} candidates")
        ax2 = a * x * x
        for z in _polys_of_degree_at_most(spec, max_deg, monic_only=is_zero(x)):
            candidates += 1
            rhs = -(ax2 + c * z * z)
            if not is_zero(rhs % b):
                continue
            y = poly_sqrt(spec, rhs // b)
            if y is None or (not is_zero(y) and y.degree > max_deg):
                continue
            logger.debug("section found after %d candidates", candidates)
            return SectionResult((x, y, z), max_deg, candidates)
    proved = len(nonsplit_locus(bundle)) > 0
    return SectionResult(None, max_deg, candidates, nonexistence_proved=proved)
