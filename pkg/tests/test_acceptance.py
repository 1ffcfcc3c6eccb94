"""Acceptance suite: one PASS/FAIL line per criterion, each with its runtime budget.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import random
import sys
import time
from fractions import Fraction as F

import pytest

from quadrature_oracle import alpha_oracle, beta_oracle, close
from sasakicert.cscsolver import (
    CscPolynomial,
    build_h,
    certify_positivity_at_root_dim5,
    check_equivalence,
    csc_in_x,
    explicit_h5,
    explicit_h7,
    find_csc_rays,
)
from sasakicert.exactalg import Refutation, sturm_count
from sasakicert.extremality import (
    ConeCertificate,
    ExtremalityProblem,
    build_F,
    certify_whole_cone,
    closed_form_p5,
    closed_form_p5_bivariate,
    is_extremal_ray,
    table_h0,
    table_p_polystable,
    table_p_product,
)
from sasakicert.fiberjoin import (
    BaseManifold,
    FiberJoinSpec,
    cohomology,
    inverse_quotient_classes,
    strong_admissibility_check,
    validate,
)
from sasakicert.momentintegrals import LogTermError, alpha, beta
from strategies import random_K, random_surface, random_unit
from test_momentintegrals import _floats, _random_spec


def _surface(g, k1, k2):
    return validate(FiberJoinSpec.surface(g, k1, k2))


def _product(g1, g2):
    return validate(FiberJoinSpec.product(g1, g2, ((10 * g1, 100 * g2), (2 * g1, g2))))


def _polystable(g):
    return validate(FiberJoinSpec.polystable(g, "odd", ((10 * g, 100 * g), (2 * g, g))))


def _rand_s(rng):
    return F(rng.randint(-40, 40), rng.randint(1, 9))


# ---------------------------------------------------------------------------
# criteria: each returns (ok, detail)
# ---------------------------------------------------------------------------


def criterion_1():
    d = _surface(7, 2, 1)
    c = F(-299, 301)
    _, red = build_F(ExtremalityProblem(d, c))
    value = red.p(F(-1, 5))
    verdict = is_extremal_ray(ExtremalityProblem(d, c))
    ok = (value == F(-7794656, 61155675) and not verdict.extremal
          and isinstance(verdict.evidence, Refutation) and verdict.replay())
    return ok, f"p(-1/5) = {value}, ray extremal = {verdict.extremal}"


def criterion_2():
    rng = random.Random(2)
    bad = 0
    for _ in range(100):
        x, s = random_unit(rng, 200), _rand_s(rng)
        h = explicit_h5(x, s)
        bad += not (h(1) == 4 * (1 - x) ** 2 and h(-1) == -4 * (1 + x) ** 2)
        x1, x2, s1, s2 = random_unit(rng, 200), random_unit(rng, 200), _rand_s(rng), _rand_s(rng)
        h = explicit_h7(x1, x2, s1, s2)
        bad += not (h(1) == 24 * (1 - x1) ** 2 * (1 - x2) ** 2 and h(-1) == -24 * (1 + x1) ** 2 * (1 + x2) ** 2)
    # the same identities on integral-built h, checked by CscPolynomial itself
    for _ in range(100):
        H5 = build_h(_surface(*random_surface(rng, min_g=0)))
        H7 = build_h(validate(FiberJoinSpec.cp1xcp1(random_K(rng))))
        bad += not (isinstance(H5, CscPolynomial) and H5.endpoint_identities_hold() and H7.endpoint_identities_hold())
    return bad == 0, f"{400 - bad}/400 identity checks hold"


def criterion_3():
    rng = random.Random(3)
    bad = 0
    for _ in range(20):
        d = _surface(*random_surface(rng, min_g=0))
        c = random_unit(rng, 300, nonzero=False)
        _, red = build_F(ExtremalityProblem(d, c), check_closed_form=False)
        bad += red.p != closed_form_p5(d.x[0], d.s[0], c)
        bad += build_h(d).h != explicit_h5(d.x[0], d.s[0])
    for kind in ("product", "polystable"):
        for _ in range(20):
            c = random_unit(rng, 300, nonzero=False)
            if kind == "product":
                g1, g2 = rng.randint(1, 9), rng.randint(1, 9)
                d, table, scale = _product(g1, g2), table_p_product(g1, g2), 1212 * g1 * g2
            else:
                g = rng.randint(1, 9)
                d, table, scale = _polystable(g), table_p_polystable(g), 1212 * g
            _, red = build_F(ExtremalityProblem(d, c), check_closed_form=False)
            bad += red.p * (scale * table_h0()(c)) != table.at_c(c)
            bad += build_h(d).h != explicit_h7(*d.x, *d.s)
    return bad == 0, f"{bad} coefficient mismatches over 60 draws"


def _displayed(g, k1, b, y):
    j = g - 4
    num = 32 * (b * b * k1 * k1 * (k1 - j * y + y * y) + 3 * b * k1 * k1 * y + 4 * b * k1 * k1 + 4 * b * k1 * y * y
                + (2 * j + 9) * b * k1 * y + (3 * k1 - (j + 3)) * y + k1 + y * y)
    return num / ((b + 1) ** 2 * (k1 + 1) ** 3 * (y + 1) ** 2)


def criterion_4():
    failed = []
    for g in range(1, 7):
        for k1 in range(2, 13):
            for k2 in range(1, k1):
                d = _surface(g, k1, k2)
                cert = certify_whole_cone(d)
                if not (isinstance(cert, ConeCertificate) and cert.replay()):
                    failed.append((g, k1, k2))
                if k2 == 1 and g in (5, 6):
                    p = closed_form_p5_bivariate(d.x[0], d.s[0])
                    grid = (F(1, 3), F(1), F(2), F(7, 2))
                    for b in grid:
                        for y in grid:
                            c, z = (1 - b) / (1 + b), (1 - y) / (1 + y)
                            if p(z, c) != _displayed(g, k1, b, y):
                                failed.append((g, k1, k2, "numerator"))
    return not failed, f"396 cells, failures: {failed[:5]}"


def criterion_5():
    failed = []
    cases = [("product", (a, b), _product(a, b)) for a in range(1, 5) for b in range(1, 5)]
    cases += [("polystable", (g,), _polystable(g)) for g in range(1, 5)]
    for kind, params, d in cases:
        cert = certify_whole_cone(d)
        rays = find_csc_rays(d)
        if not (isinstance(cert, ConeCertificate) and cert.replay()):
            failed.append((kind, params, "cone"))
        if not any(r.certified and r.replay() for r in rays):
            failed.append((kind, params, "csc"))
    return not failed, f"{len(cases)} specs, failures: {failed}"


def criterion_6():
    rng = random.Random(6)
    bad = 0
    for _ in range(200):
        d = _surface(*random_surface(rng))
        h = build_h(d).h
        cert = certify_positivity_at_root_dim5(d)
        bad += not (sturm_count(h, -1, 1) == 1 and cert.replay() and cert.descartes_changes == 1)
    return bad == 0, f"{200 - bad}/200 draws: one root, elimination certificate valid"


def criterion_7():
    rng = random.Random(7)
    bad = 0
    for _ in range(50):
        rep = check_equivalence(FiberJoinSpec.cp1xcp1(random_K(rng)),
                                [(rng.randint(1, 30), rng.randint(1, 30)) for _ in range(4)])
        bad += not (rep.holds and not rep.factor.is_zero())
    return bad == 0, f"{50 - bad}/50 specs agree up to -8 n1 n2"


def criterion_8():
    rng = random.Random(8)
    fired = worst = 0
    mismatches = 0
    for _ in range(200):
        which, spec = _random_spec(rng)
        c = max(min(random_unit(rng, 50, nonzero=False), F(9, 10)), F(-9, 10))
        try:
            value = alpha(spec, c) if which == "alpha" else beta(spec, c)
        except LogTermError:
            fired += 1
            continue
        xs, ss = _floats(spec)
        approx = alpha_oracle(spec.r, spec.m, xs, float(c)) if which == "alpha" else beta_oracle(spec.r, spec.m, xs, ss, float(c))
        if not close(value, approx, rel=1e-9):
            mismatches += 1
        if value:
            worst = max(worst, abs(float(value) - approx) / max(1.0, abs(float(value))))
    return mismatches == 0 and fired == 0, f"200 samples, max rel err {worst:.1e}, log assertion fired {fired}"


def criterion_9():
    fam = inverse_quotient_classes(1, -1)
    sol = fam.solve_line(-1, 0)
    family_ok = sol.kind == "family" and sol.points
    for k1, k2 in sol.points:
        x1, x2 = fam.x(k1, k2)
        family_ok = family_ok and k2 == k1 + 1 and x2 == -x1 and csc_in_x((1, 1), 1, -1, x1, x2) == 0
    empty = fam.solve_line(1, -1)
    return bool(family_ok) and empty.kind == "empty", f"family points {len(sol.points)}, shifted line {empty.kind}"


def criterion_10():
    rng = random.Random(10)
    bad = 0
    for _ in range(10):
        g1, g2 = rng.randint(0, 5), rng.randint(0, 5)
        (a, b), (c, d) = random_K(rng, 9)
        rep = cohomology(FiberJoinSpec.product(g1, g2, ((a, b), (c, d))))
        b1, mid = 2 * g1 + 2 * g2, 4 * g1 * g2 + 2
        bad += rep.ranks != (1, b1, mid, b1, b1, mid, b1, 1)
        bad += rep.torsion[4] != (a * d + b * c,)
        bad += any(t for i, t in enumerate(rep.torsion) if i != 4)
    rep = cohomology(BaseManifold.surface_product(2, 3), 2)
    base = [1, 10, 26, 10, 1]
    expect = [0] * 10
    for k, v in enumerate(base):
        expect[k] += v
        expect[k + 5] += v
    bad += list(rep.ranks) != expect
    return bad == 0, f"10 fiber joins plus the d=2 product, {bad} mismatches"


def criterion_11():
    verdicts = []
    for g in (2, 3, 5):
        base = BaseManifold.example38(g)
        sa = strong_admissibility_check(FiberJoinSpec(base, base.fixture_K()))
        verdicts.append(sa.verdict == "admissible-not-strong" and dict(sa.class_sum)["delta"] == 2
                        and "delta" in sa.obstruction)
    base = BaseManifold.example39()
    sa = strong_admissibility_check(FiberJoinSpec(base, base.fixture_K()))
    verdicts.append(sa.verdict == "admissible-not-strong" and "chi/2pi" in sa.obstruction)
    rng = random.Random(11)
    for _ in range(5):
        sa = strong_admissibility_check(FiberJoinSpec.cp1xcp1(random_K(rng)))
        verdicts.append(sa.verdict == "strongly admissible")
    return all(verdicts), f"{sum(verdicts)}/{len(verdicts)} fixtures as expected"


CRITERIA = [
    (1, "counterexample ray p(-1/5) exact and refuted", criterion_1, 1),
    (2, "endpoint identities of h in dimensions 5 and 7", criterion_2, 10),
    (3, "integral-built h and p equal the explicit forms", criterion_3, 30),
    (4, "surface scan g 1..6, k up to 12: every ray extremal", criterion_4, 120),
    (5, "surface products and polystable bases: cones and CSC rays", criterion_5, 120),
    (6, "dimension-5 CSC ray is unique and certified", criterion_6, 60),
    (7, "weight quintic agrees with the log-pair equation", criterion_7, 30),
    (8, "exact moments match adaptive quadrature within 1e-9", criterion_8, 30),
    (9, "inverse quotient family and empty shifted line", criterion_9, 1),
    (10, "cohomology table, torsion and d >= 2 products", criterion_10, 1),
    (11, "strong admissibility fixtures", criterion_11, 1),
]


def evaluate(number, fn, budget):
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # report the failure line rather than abort the suite
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < budget
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail} [{elapsed:.2f}s < {budget}s]"
    return ok, line


@pytest.mark.parametrize("number,title,fn,budget", CRITERIA, ids=[f"criterion_{n:02d}" for n, *_ in CRITERIA])
def test_criterion(number, title, fn, budget, capsys):
    ok, line = evaluate(number, fn, budget)
    with capsys.disabled():
        print(f"\n{line} ({title})")
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n, fn, budget) for n, _, fn, budget in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
