"""
Conicert - Self Test
Runs the worked examples end to end and prints a pass/fail summary.
"""
import sys

from conicert.certify import (
    CERTIFIED,
    analyze,
    bundle_with_prescribed_locus,
    certify_requiv,
    certify_unirational,
    section_search_oracle,
    verify_parity,
)
from conicert.conicbundle import ConicBundle, nonsplit_locus, residue_at, residue_tame_oracle
from conicert.coversynth import Cover, double_cover, kill_rational_residues
from conicert.gf import field_spec, is_square, sqrt
from conicert.p1curve import ClosedPoint, RationalMap, fibre, poly, rational_points


def _bundle(p, a, b, c, n=1, modulus=None):
    spec = field_spec(p, n, modulus)
    return ConicBundle.create(spec, poly(spec, a), poly(spec, b), poly(spec, c))


def _section(title):
    print("=" * 60)
    print(title)
    print("=" * 60)


def _report(label, ok):
    print(f"{'✓' if ok else '✗'} {label}")
    return ok


def test_field_arithmetic():
    """Squares and square roots in F_5 and F_9."""
    _section("Testing Field Arithmetic...")
    F5 = field_spec(5)
    F9 = field_spec(3, 2, (1, 0, 1))
    results = [
        _report("F_5: sqrt(4) = 2", int(sqrt(F5, F5.GF(4))) == 2),
        _report("F_5: 2 is not a square", not is_square(F5, F5.GF(2))),
        _report("F_9: 2 is a square", is_square(F9, F9.scalar(2))),
    ]
    print()
    return all(results)


def test_fibres():
    """Fibres of T^2 over F_5."""
    _section("Testing Fibres...")
    F5 = field_spec(5)
    square = RationalMap.polynomial(F5, [0, 0, 1])
    over_two = fibre(square, ClosedPoint.rational(F5, 2))
    over_four = fibre(square, ClosedPoint.rational(F5, 4))
    over_inf = fibre(square, ClosedPoint.infinity())
    results = [
        _report("over 2: one point with f = 2", [(fp.e, fp.f) for fp in over_two] == [(1, 2)]),
        _report("over 4: two rational points", [(fp.e, fp.f) for fp in over_four] == [(1, 1), (1, 1)]),
        _report("over infinity: e = 2", [(fp.e, fp.f) for fp in over_inf] == [(2, 1)]),
    ]
    print()
    return all(results)


def test_residues():
    """Non-split locus of (t, -1, -1) over F_3 and agreement with the tame symbol."""
    _section("Testing Residues...")
    bundle = _bundle(3, [0, 1], [2], [2])
    locus = nonsplit_locus(bundle)
    results = [
        _report("locus is {(t), inf}", list(locus.points) == [ClosedPoint.rational(bundle.spec, 0),
                                                              ClosedPoint.infinity()]),
        _report("delta = 2", locus.delta == 2),
    ]
    agree = all(residue_at(bundle, P).trivial == residue_tame_oracle(bundle, P).trivial
                for P in rational_points(bundle.spec))
    results.append(_report("residue agrees with the tame symbol at every rational point", agree))
    print()
    return all(results)


def test_covers():
    """Double covers and rational residue killing."""
    _section("Testing Cover Synthesis...")
    F5 = field_spec(5)
    zero, inf = ClosedPoint.rational(F5, 0), ClosedPoint.infinity()
    square = double_cover(F5, zero, inf)
    B = [ClosedPoint.rational(F5, a) for a in (0, 1, 2)] + [inf]
    tower = kill_rational_residues(F5, B, zero, inf)
    results = [
        _report("double cover over 0, inf is T^2", square.map == RationalMap.polynomial(F5, [0, 0, 1])),
        _report(f"kill over F_5 {{0, 1, 2, inf}}: degree {tower.degree}", tower.degree <= 4),
        _report("kill passes the parity check", verify_parity(tower, B).passed),
        _report("parity fails for T^2 over 4", not verify_parity(square, [ClosedPoint.rational(F5, 4)]).passed),
    ]
    print()
    return all(results)


def test_certificates():
    """End-to-end certification for both pipelines."""
    _section("Testing Certificates...")
    bundle = _bundle(3, [0, 1], [2], [2])
    spec = bundle.spec
    unirational = certify_unirational(bundle)
    requiv = certify_requiv(bundle, ClosedPoint.rational(spec, 0), ClosedPoint.infinity())
    unmet = analyze(bundle_with_prescribed_locus(field_spec(3), [2, 2]))
    results = [
        _report("unirational certificate issued", unirational.status == CERTIFIED),
        _report("R-equivalence certificate issued", requiv.status == CERTIFIED),
        _report("degrees {2, 2} fail condition (*)", not unmet.star),
    ]
    for report in (unirational, requiv):
        for check in report.checks:
            _report(f"  {check.name}", check.passed)
    print()
    return all(results)


def test_section_oracle():
    """Bounded section search against the residue computation."""
    _section("Testing Section Oracle...")
    found = section_search_oracle(_bundle(3, [0, 0, 1], [2], [2]), 1)
    missing = section_search_oracle(_bundle(3, [0, 1], [2], [2]), 1)
    results = [
        _report("(t^2, -1, -1) has a section of degree <= 1", found.found),
        _report("(t, -1, -1) has none, and none can exist", not missing.found and missing.nonexistence_proved),
    ]
    print()
    return all(results)


def generate_report(results):
    """Print the summary table; True when everything passed."""
    print()
    print("=" * 60)
    print("TEST SUMMARY")
    print("=" * 60)

    total_tests = len(results)
    passed_tests = sum(results.values())

    for test_name, passed in results.items():
        status = "✓ PASS" if passed else "✗ FAIL"
        print(f"{status} - {test_name}")

    print()
    print(f"Results: {passed_tests}/{total_tests} tests passed")
    print()
    return passed_tests == total_tests


def main():
    """Run all checks; exit code 0 when all pass, 2 otherwise."""
    print()
    print("CONICERT - SELF TEST")
    print()

    results = {}
    results['Field Arithmetic'] = test_field_arithmetic()
    results['Fibres'] = test_fibres()
    results['Residues'] = test_residues()
    results['Cover Synthesis'] = test_covers()
    results['Certificates'] = test_certificates()
    results['Section Oracle'] = test_section_oracle()

    return 0 if generate_report(results) else 2


if __name__ == "__main__":
    sys.exit(main())
