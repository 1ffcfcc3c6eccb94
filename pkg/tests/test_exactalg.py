from fractions import Fraction as F

import pytest
import sympy as sp
from hypothesis import assume, given
from hypothesis import strategies as st

from sasakicert.exactalg import (
    BiPoly,
    BoundaryRootError,
    IsolatingInterval,
    Poly,
    PositivityCertificate,
    RatFunc,
    Refutation,
    certify_positive,
    count_roots,
    descartes_sign_changes,
    isolate_roots,
    mobius_substitute,
    parse_rational,
    poly_arith,
    rational_str,
    resultant,
    simplest_rational_between,
    sturm_count,
)
from strategies import polys, rationals

z = Poly.x()


def _sympy_count(p: Poly, lo, hi) -> int:
    """Distinct real roots in (lo, hi), from sympy's own isolation."""
    x = sp.symbols("x")
    sp_p = sp.Poly([sp.Rational(a.numerator, a.denominator) for a in reversed(p.coeffs)], x)
    sqf = sp.Poly(sp.quo(sp_p, sp.gcd(sp_p, sp_p.diff(x))), x)
    return len([r for r in sp.real_roots(sqf) if sp.Rational(lo) < r < sp.Rational(hi)])


class TestRationals:
    def test_parse_and_print(self):
        assert parse_rational("7/2") == F(7, 2)
        assert parse_rational(" -3 ") == -3
        assert rational_str(F(0)) == "0/1"
        assert rational_str(F(-6, 4)) == "-3/2"

    @pytest.mark.parametrize("bad", ["", "1/0", "a/b", "1.5", "2//3"])
    def test_parse_rejects(self, bad):
        with pytest.raises((ValueError, ZeroDivisionError)):
            parse_rational(bad)

    @given(rationals(), rationals())
    def test_exactness(self, a, b):
        assert (a + b) - b == a
        assert (a * b) / b == a if b else True


class TestPolyArithmetic:
    def test_divrem_exact_factor(self):
        q, r = divmod(z**2 - 1, z - 1)
        assert q == z + 1 and r.is_zero()

    def test_derivative(self):
        assert (z**3 * 3).derivative() == z**2 * 9

    def test_gcd_up_to_unit(self):
        assert Poly.gcd(z**2 - 1, z**2 - z * 2 + 1).monic() == z - 1

    def test_poly_arith_dispatch(self):
        assert poly_arith(z, z, "add") == z * 2
        assert poly_arith(z**2, z + 1, "compose") == (z + 1) ** 2
        q, r = poly_arith(z**3 + 1, z + 1, "divrem")
        assert q * (z + 1) + r == z**3 + 1

    def test_division_by_zero_poly(self):
        with pytest.raises(ZeroDivisionError):
            divmod(z, Poly())

    def test_leading_coefficient_normalized(self):
        assert Poly((1, 2, 0, 0)).degree == 1
        assert Poly(()).is_zero() and Poly((0, 0)).is_zero()

    def test_immutable(self):
        with pytest.raises(AttributeError):
            z.coeffs = (1,)

    @given(polys(), polys(max_degree=5))
    def test_division_identity(self, a, b):
        assume(not b.is_zero())
        q, r = divmod(a, b)
        assert q * b + r == a
        assert r.is_zero() or r.degree < b.degree

    @given(polys(5), polys(5), polys(5))
    def test_ring_axioms(self, a, b, c):
        assert (a + b) * c == a * c + b * c
        assert (a * b) * c == a * (b * c)
        assert a - a == Poly()

    @given(polys(6), rationals())
    def test_sqfree_keeps_roots(self, p, r):
        assume(not p.is_zero() and p.degree >= 1)
        q = p * (z - r) ** 2
        s = q.sqfree()
        assert s(r) == 0
        assert s.multiplicity_of_root(r) == 1


class TestRatFunc:
    def test_reduced_with_monic_denominator(self):
        f = RatFunc(z**2 - 1, (z - 1) * 2)
        assert f.den == Poly.const(1)
        assert f.num == (z + 1) * F(1, 2)

    def test_zero_denominator(self):
        with pytest.raises(ZeroDivisionError):
            RatFunc(z, Poly())

    @given(rationals(-3, 3), rationals(-3, 3))
    def test_field_ops_pointwise(self, a, b):
        f = RatFunc(z + 1, z - 3)
        g = RatFunc(z**2, z + 5)
        for c in (a, b):
            if c in (3, -5):
                continue
            assert (f + g)(c) == f(c) + g(c)
            assert (f * g)(c) == f(c) * g(c)


class TestSturm:
    def test_two_roots(self):
        assert sturm_count(z**2 - F(1, 4), -1, 1) == 2

    def test_no_roots(self):
        assert sturm_count(z**2 + 1, -1, 1) == 0

    def test_boundary_root_is_reported(self):
        with pytest.raises(BoundaryRootError):
            sturm_count(z**2 - 1, -1, 1)

    def test_boundary_root_distinct_from_malformed(self):
        with pytest.raises(ValueError) as info:
            sturm_count(z, 1, 1)
        assert not isinstance(info.value, BoundaryRootError)

    def test_count_roots_tolerates_endpoints(self):
        assert count_roots((z**2 - 1) * z, -1, 1) == 1

    @given(polys(8), rationals(-5, 5), rationals(-5, 5))
    def test_matches_independent_isolation(self, p, a, b):
        assume(p.degree >= 1 and a < b)
        assume(p(a) != 0 and p(b) != 0)
        assert sturm_count(p, a, b) == _sympy_count(p, a, b)

    def test_sign_sampling_oracle_for_csc_cubic(self):
        # g=2, k=(2,1): x = 1/3, s = -2
        from sasakicert.cscsolver import explicit_h5

        h = explicit_h5(F(1, 3), -2)
        samples = [F(i, 10**4) for i in range(-10**4 + 1, 10**4)]
        changes = sum(1 for u, v in zip(samples, samples[1:]) if h(u) * h(v) < 0)
        assert changes == 1
        assert sturm_count(h, -1, 1) == 1


class TestIsolation:
    def test_two_intervals_around_halves(self):
        ivs = isolate_roots(z**2 - F(1, 4), -1, 1)
        assert len(ivs) == 2
        assert ivs[0].lo < F(-1, 2) < ivs[0].hi and ivs[1].lo < F(1, 2) < ivs[1].hi
        assert all(iv.width <= F(1, 2**40) for iv in ivs)

    def test_cubic_without_roots(self):
        assert isolate_roots(z**3 + 5, -1, 1) == []

    def test_dim5_h_sign_change(self):
        from sasakicert.cscsolver import explicit_h5

        x = F(1, 3)  # g=1 so s=0, k=(2,1)
        h = explicit_h5(x, 0)
        assert h(0) == -2 * x < 0 < h(1) == 4 * (1 - x) ** 2
        (iv,) = isolate_roots(h, -1, 1)
        assert 0 < iv.lo < iv.hi < 1

    def test_multiplicity_hint(self):
        (iv,) = isolate_roots((z - F(1, 3)) ** 3 * (z + 7), -1, 1)
        assert iv.multiplicity_hint == 3

    def test_interval_invariants(self):
        with pytest.raises(ValueError):
            IsolatingInterval(F(1), F(0))

    @given(st.lists(rationals(-1, 1, 30), min_size=1, max_size=5, unique=True), st.integers(1, 9))
    def test_finds_planted_roots(self, roots, tail):
        roots = [r for r in roots if -1 < r < 1]
        assume(roots)
        p = Poly.from_roots(roots) * (z**2 + tail)
        ivs = isolate_roots(p, -1, 1, tol=F(1, 2**20))
        assert len(ivs) == len(roots)
        for r, iv in zip(sorted(roots), ivs):
            assert iv.lo < r < iv.hi and iv.isolates(p)


class TestMobius:
    def test_linear(self):
        assert mobius_substitute(z) == Poly((1, -1))

    def test_constant(self):
        assert mobius_substitute(Poly.const(1)) == Poly.const(1)

    def test_csc_cubic_sign_pattern(self):
        from sasakicert.cscsolver import explicit_h5

        # g=3, k=(3,1): x = 1/2, s = -2, so s x <= 0
        t = mobius_substitute(explicit_h5(F(1, 2), -2), 3)
        signs = [(a > 0) - (a < 0) for a in t.coeffs if a]
        assert descartes_sign_changes(t) == 1
        assert signs[0] != signs[-1]

    @given(polys(6))
    def test_involution_up_to_scalar(self, p):
        assume(p.degree >= 1)
        n = p.degree
        twice = mobius_substitute(mobius_substitute(p, n), n)
        assert twice == p * 2**n

    @given(st.lists(rationals(-1, 1, 20), min_size=1, max_size=4, unique=True))
    def test_root_correspondence(self, roots):
        roots = [r for r in roots if -1 < r < 1]
        assume(roots)
        p = Poly.from_roots(roots)
        t = mobius_substitute(p)
        pos = isolate_roots(t, 0, 10**6, tol=F(1, 2**30))
        assert len(pos) == len(roots)
        images = sorted((1 - r) / (1 + r) for r in roots)
        for u, iv in zip(images, pos):
            assert iv.lo < u < iv.hi


class TestCertifyPositive:
    def test_simple_positive(self):
        cert = certify_positive(1 - z**2 / 2)
        assert isinstance(cert, PositivityCertificate) and cert.replay()

    def test_refutes_identity(self):
        ref = certify_positive(z)
        assert isinstance(ref, Refutation)
        assert ref.point <= 0 and ref.value <= 0 and ref.replay()

    def test_deflates_boundary_roots(self):
        cert = certify_positive((1 - z**2) * (z + 3))
        assert isinstance(cert, PositivityCertificate)
        assert cert.method == "endpoint-deflation" and cert.replay()

    def test_touching_zero_is_not_positive(self):
        ref = certify_positive((z - F(1, 3)) ** 2)
        assert isinstance(ref, Refutation) and ref.point == F(1, 3) and ref.value == 0

    def test_zero_poly_rejected(self):
        with pytest.raises(ValueError):
            certify_positive(Poly())

    def test_tampered_certificate_fails_replay(self):
        cert = certify_positive(z**2 + F(1, 10) - z / 2)
        forged = PositivityCertificate(z**2 - F(1, 10), cert.lo, cert.hi, cert.method, cert.witness)
        assert cert.replay() and not forged.replay()

    def test_counterexample_ray_value(self):
        from sasakicert.extremality import closed_form_p5

        # g=7, k=(2,1): x = 1/3, s = -12
        p = closed_form_p5(F(1, 3), -12, F(-299, 301))
        assert p(F(-1, 5)) == F(-7794656, 61155675)
        assert isinstance(certify_positive(p), Refutation)

    @given(polys(7))
    def test_iff_sturm_and_sample(self, p):
        assume(p.degree >= 1 and p(-1) != 0 and p(1) != 0)
        ev = certify_positive(p)
        expected = sturm_count(p, -1, 1) == 0 and p(0) > 0
        assert isinstance(ev, PositivityCertificate) == expected
        assert ev.replay()
        if isinstance(ev, Refutation):
            assert -1 < ev.point < 1 and p(ev.point) <= 0


class TestSimplestRational:
    @given(rationals(), rationals())
    def test_inside_and_minimal_denominator(self, a, b):
        assume(a < b)
        r = simplest_rational_between(a, b)
        assert a < r < b
        for d in range(1, r.denominator):
            lo = a * d
            n = lo.numerator // lo.denominator + 1
            assert not F(n, d) < b


class TestResultant:
    def test_discriminant_of_quadratic(self):
        # res(p, p') = -a * disc for p = a z^2 + b z + c
        c = Poly.x()
        p = BiPoly((c, Poly.const(2), Poly.const(1)))  # z^2 + 2z + c
        r = resultant(p, p.derivative_z())
        assert r == (Poly.const(4) - c * 4) * -1

    @given(polys(4), polys(4))
    def test_vanishes_on_common_root(self, a, b):
        assume(a.degree >= 1 and b.degree >= 1)
        r = resultant(a * (z - 2), b * (z - 2))
        assert r.is_zero() or r == Poly()
