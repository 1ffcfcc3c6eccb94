import json
import random
from fractions import Fraction as F
from math import gcd

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from sasakicert.fiberjoin import (
    BOTT_MATRIX_EXAMPLE39,
    BaseManifold,
    FiberJoinSpec,
    KMatrix,
    NotStronglyAdmissibleError,
    SpecError,
    c_to_w,
    cohomology,
    colinearity_check,
    expand_family,
    inverse_quotient_classes,
    parse_family,
    parse_spec,
    quasiregular_quotient,
    spec_to_json,
    strong_admissibility_check,
    validate,
    w_to_c,
)
from strategies import surface_params, two_by_two_K


class TestValidate:
    def test_surface_data(self):
        d = validate(FiberJoinSpec.surface(2, 3, 1))
        assert d.dimension == 5
        assert d.x == (F(1, 2),) and d.s == (F(-1),) and d.n == (2,)

    def test_equal_column_rejected_with_reason(self):
        with pytest.raises(SpecError, match="Hirzebruch"):
            validate(FiberJoinSpec.cp1xcp1(((2, 3), (1, 3))))

    def test_nonpositive_rejected(self):
        with pytest.raises(SpecError):
            validate(FiberJoinSpec.cp1xcp1(((2, 0), (1, 3))))

    def test_polystable_odd_even_branch(self):
        g = 3
        d = validate(FiberJoinSpec.polystable(g, "odd", ((10 * g, 100 * g), (2 * g, g))))
        assert d.genera == (0, g)

    def test_polystable_odd_half_integer_branch(self):
        validate(FiberJoinSpec.polystable(2, "odd", ((3, F(7, 2)), (1, F(3, 2)))))
        with pytest.raises(SpecError, match="parity"):
            validate(FiberJoinSpec.polystable(2, "odd", ((3, 4), (1, 1))))

    def test_half_integers_need_odd_polystable(self):
        with pytest.raises(SpecError):
            validate(FiberJoinSpec.product(1, 1, ((F(5, 2), 3), (1, 2))))

    def test_wrong_shape(self):
        with pytest.raises(SpecError):
            validate(FiberJoinSpec(BaseManifold.surface(2), KMatrix(((1, 2), (3, 4)))))

    def test_polystable_dimension_seven_s_values(self):
        # s1 = 2 / (k^1_1 - k^1_2), s2 = 2(1-g)/(k^2_1 - k^2_2)
        g = 4
        d = validate(FiberJoinSpec.polystable(g, "even", ((10, 100), (2, 1))))
        assert d.s == (F(2, 10 - 2), F(2 * (1 - g), 100 - 1))

    @given(surface_params())
    def test_x_range_and_sign(self, params):
        g, k1, k2 = params
        d = validate(FiberJoinSpec.surface(g, k1, k2))
        (x,), (n,) = d.x, d.n
        assert 0 < abs(x) < 1 and x * n > 0

    @given(two_by_two_K(), st.integers(0, 6), st.integers(0, 6))
    def test_x_range_product(self, rows, g1, g2):
        d = validate(FiberJoinSpec.product(g1, g2, rows))
        for x, n in zip(d.x, d.n):
            assert 0 < abs(x) < 1 and x * n > 0

    @given(two_by_two_K())
    def test_euler_class_positive(self, rows):
        spec = FiberJoinSpec.product(1, 1, rows)
        K = spec.K
        assert K.k(1, 1) * K.k(2, 2) + K.k(2, 1) * K.k(1, 2) > 0


class TestRays:
    @pytest.mark.parametrize("c,w", [(0, (1, 1)), (F(1, 3), (2, 1)), (F(-1, 3), (1, 2)), (F(-299, 301), (1, 300))])
    def test_conversions(self, c, w):
        assert c_to_w(c) == w and w_to_c(w) == c

    def test_join_ray(self):
        spec = FiberJoinSpec.surface(3, 6, 4)
        x = validate(spec).x[0]
        assert c_to_w(x) == (3, 2)
        assert colinearity_check(spec).join_ray() == (3, 2)

    @pytest.mark.parametrize("c", [1, -1, F(5, 4)])
    def test_c_range(self, c):
        with pytest.raises(SpecError):
            c_to_w(c)

    @pytest.mark.parametrize("w", [(0, 1), (2, 4), (-1, 3)])
    def test_bad_weights(self, w):
        with pytest.raises(SpecError):
            w_to_c(w)

    @given(st.integers(1, 10**6), st.integers(1, 10**6))
    def test_bijection(self, a, b):
        assume(gcd(a, b) == 1)
        assert c_to_w(w_to_c((a, b))) == (a, b)


class TestQuotient:
    @given(two_by_two_K())
    def test_regular_quotient(self, rows):
        spec = FiberJoinSpec.cp1xcp1(rows)
        q = quasiregular_quotient(spec, (1, 1))
        d = validate(spec)
        assert q.branch_weights == (0, 0)
        assert q.bundle_degrees == d.n and q.x == d.x
        assert dict(q.kahler_class) == dict(d.class_terms)

    def test_colinear_surface_ratio(self):
        # n = b1 w2 - b2 w1 and x = (b1 w2 - b2 w1)/(b1 w2 + b2 w1)
        spec = FiberJoinSpec.surface(2, 5, 2)
        q = quasiregular_quotient(spec, (2, 7))
        assert q.bundle_degrees == (5 * 7 - 2 * 2,)
        assert q.x == (F(5 * 7 - 2 * 2, 5 * 7 + 2 * 2),)

    def test_degenerate_flag(self):
        spec = FiberJoinSpec.cp1xcp1(((3, 2), (1, 1)))
        q = quasiregular_quotient(spec, (3, 1))
        assert q.bundle_degrees == (0, -1)
        assert q.degenerate_flag and q.x is None
        assert q.branch_weights == (F(2, 3), 0)

    def test_bad_w(self):
        with pytest.raises(SpecError):
            quasiregular_quotient(FiberJoinSpec.cp1xcp1(((3, 2), (1, 1))), (2, 2))


class TestColinearity:
    def test_surface_always_colinear(self):
        col = colinearity_check(FiberJoinSpec.surface(4, 7, 3))
        assert col.colinear and col.b == (7, 3)

    def test_proportional_rows(self):
        assert colinearity_check(FiberJoinSpec.cp1xcp1(((2, 4), (1, 2)))).colinear

    @given(two_by_two_K())
    def test_det_criterion(self, rows):
        spec = FiberJoinSpec.cp1xcp1(rows)
        assert colinearity_check(spec).colinear == (spec.K.det() == 0)

    @pytest.mark.parametrize("seed", range(50))
    def test_surface_colinear_iff_single_x_template(self, seed):
        rng = random.Random(seed)
        g, k2 = rng.randint(0, 9), rng.randint(1, 20)
        k1 = k2 + rng.randint(1, 20)
        spec = FiberJoinSpec.surface(g, k1, k2)
        sa = strong_admissibility_check(spec)
        assert colinearity_check(spec).colinear
        assert sa.strongly_admissible and len(sa.x) == 1
        assert sa.x == validate(spec).x


class TestStrongAdmissibility:
    def test_example38_obstruction(self):
        for g in (2, 3, 5):
            base = BaseManifold.example38(g)
            sa = strong_admissibility_check(FiberJoinSpec(base, base.fixture_K()))
            assert sa.verdict == "admissible-not-strong"
            assert dict(sa.class_sum)["delta"] == 2
            assert "delta" in sa.obstruction

    def test_example38_ampleness(self):
        base = BaseManifold.example38(3)
        assert base.is_ample((F(3), F(3), F(1)))  # l_4
        assert not base.is_ample((F(2), F(2), F(1)))  # l_3, s = g

    def test_example39_obstruction(self):
        base = BaseManifold.example39()
        sa = strong_admissibility_check(FiberJoinSpec(base, base.fixture_K()))
        assert sa.verdict == "admissible-not-strong"
        assert sa.obstruction and "chi/2pi" in sa.obstruction
        assert BOTT_MATRIX_EXAMPLE39[3] == (5, 3, 2, 1)

    def test_examples_have_no_admissible_data(self):
        base = BaseManifold.example38(2)
        with pytest.raises(NotStronglyAdmissibleError):
            validate(FiberJoinSpec(base, base.fixture_K()))

    @given(two_by_two_K())
    def test_cp1xcp1_strong(self, rows):
        sa = strong_admissibility_check(FiberJoinSpec.cp1xcp1(rows))
        assert sa.verdict == "strongly admissible"


class TestInverseQuotient:
    def test_antidiagonal_family(self):
        fam = inverse_quotient_classes(1, -1)
        sol = fam.solve_line(-1, 0)
        assert sol.kind == "family" and sol.family == (1, 1)
        for k1, k2 in sol.points:
            assert k2 == k1 + 1
            x1, x2 = fam.x(k1, k2)
            assert x1 == F(1, 1 + 2 * k1) and x2 == -x1

    def test_shifted_line_empty(self):
        sol = inverse_quotient_classes(1, -1).solve_line(1, -1)
        assert sol.kind == "empty" and sol.points == ()

    def test_koiso_sakane_point_out_of_range(self):
        ok, why = inverse_quotient_classes(1, -1).contains_point(F(1, 2), F(-1, 2))
        assert not ok and "k^1" in why

    def test_k_bounds(self):
        fam = inverse_quotient_classes(1, -1)
        assert fam.k_min(1) == 1 and fam.k_min(2) == 2
        with pytest.raises(SpecError):
            inverse_quotient_classes(0, 1)

    @given(st.integers(-6, 6).filter(bool), st.integers(-6, 6).filter(bool), st.integers(0, 20), st.integers(0, 20))
    def test_family_matches_validate(self, n1, n2, j1, j2):
        fam = inverse_quotient_classes(n1, n2)
        k1, k2 = fam.k_min(1) + j1, fam.k_min(2) + j2
        spec = FiberJoinSpec.cp1xcp1(fam.K(k1, k2).rows)
        d = validate(spec)
        assert d.n == (n1, n2) and d.x == fam.x(k1, k2)
        assert fam.contains_point(*d.x)[0]


class TestCohomology:
    def test_product_table(self):
        rep = cohomology(FiberJoinSpec.product(1, 1, ((2, 3), (1, 2))))
        assert rep.euler_number == 7
        assert rep.group(2) == "Z^6"
        assert rep.group(4) == "Z^4 + Z_7"

    @pytest.mark.parametrize("seed", range(10))
    def test_table_shape(self, seed):
        rng = random.Random(seed)
        g1, g2 = rng.randint(0, 5), rng.randint(0, 5)
        while True:
            a, b, c, d = (rng.randint(1, 9) for _ in range(4))
            if a != c and b != d:
                break
        rep = cohomology(FiberJoinSpec.product(g1, g2, ((a, b), (c, d))))
        e = a * d + b * c
        b1 = 2 * g1 + 2 * g2
        assert rep.ranks == (1, b1, 4 * g1 * g2 + 2, b1, b1, 4 * g1 * g2 + 2, b1, 1)
        assert rep.torsion[4] == (e,)
        assert all(not t for i, t in enumerate(rep.torsion) if i != 4)

    def test_higher_d_is_product(self):
        rep = cohomology(BaseManifold.surface_product(2, 3), 2)
        # S^5 x Sigma_2 x Sigma_3
        base = [1, 10, 26, 10, 1]
        expect = [0] * 10
        for k, b in enumerate(base):
            expect[k] += b
            expect[k + 5] += b
        assert list(rep.ranks) == expect and rep.method == "product"

    def test_betti_drop_simply_connected_base(self):
        rep = cohomology(FiberJoinSpec.cp1xcp1(((2, 3), (1, 2))))
        # b_4(N) = 1, b_1(N) = 0: b_4(M) = b_4(N) - 1
        assert rep.ranks[4] == 0 and rep.group(4) == "Z_7"

    def test_bad_d(self):
        with pytest.raises(SpecError):
            cohomology(BaseManifold.surface_product(1, 1), 0)


class TestJson:
    def test_roundtrip(self):
        spec = FiberJoinSpec.polystable(2, "odd", ((3, F(7, 2)), (1, F(3, 2))))
        assert parse_spec(spec_to_json(spec)) == spec

    def test_flat_surface_pair(self):
        spec = parse_spec('{"base": {"kind": "Surface", "params": {"genus": 2}}, "K": ["3", "1"]}')
        assert validate(spec).x == (F(1, 2),)

    def test_line_numbers(self):
        text = '{\n  "base": {"kind": "CP1xCP1"},\n  "K": [["2", "3"],\n        ["1", "x"]]\n}'
        with pytest.raises(SpecError) as info:
            parse_spec(text)
        assert info.value.line == 3 or info.value.line == 4

    def test_invalid_json_line(self):
        with pytest.raises(SpecError) as info:
            parse_spec('{\n "base": {"kind": "CP1xCP1"},\n "K": [["2", "3"] ["1", "2"]]\n}')
        assert info.value.line == 3

    def test_unknown_kind(self):
        with pytest.raises(SpecError):
            parse_spec('{"base": {"kind": "K3"}, "K": [["1", "2"], ["3", "4"]]}')

    def test_extra_field(self):
        with pytest.raises(SpecError):
            parse_spec('{"base": {"kind": "CP1xCP1"}, "K": [["2", "3"], ["1", "2"]], "colour": 1}')

    def test_family_expansion(self):
        fam = parse_family(json.dumps({
            "name": "surfaces",
            "base": {"kind": "Surface", "params": {"genus": "g"}},
            "ranges": {"g": [1, 2], "k1": [1, 4], "k2": [1, 4]},
            "order": [["k2", "k1"]],
            "K": [["k1"], ["k2"]],
        }))
        cells = expand_family(fam)
        assert len(cells) == 2 * 6
        env, spec = cells[0]
        assert env == {"g": 1, "k1": 2, "k2": 1}
        assert spec.base.param["genus"] == 1

    def test_family_template(self):
        fam = parse_family(json.dumps({
            "base": {"kind": "SurfaceProduct", "params": {"g1": "g1", "g2": "g2"}},
            "ranges": {"g1": [2, 2], "g2": [3, 3]},
            "K": [["10*g1", "100*g2"], ["2*g1", "g2"]],
        }))
        ((_, spec),) = expand_family(fam)
        assert spec.K.rows == ((20, 300), (4, 3))

    def test_family_bad_template_line(self):
        text = '{\n "base": {"kind": "Surface", "params": {"genus": "g"}},\n "ranges": {"g": [1, 2]},\n "K": [["3*q"],\n ["1"]]\n}'
        with pytest.raises(SpecError) as info:
            parse_family(text)
        assert info.value.line == 4
