"""Extremality of Reeb rays: the polynomial F_c(z) and its positivity.

For a ray with CR-twist parameter c, the ray carries an extremal
representative exactly when

    F_c(z) = (cz+1)^m [ 2 w(-1) (z+1) / (1-c)^m + int_{-1}^z Q(t)(z-t) dt ]

is positive on (-1, 1). Here w is the weight polynomial, m = 3 in
dimension 5 and 4 in dimension 7, and

    Q(t) = 2 source(t) / (ct+1)^m - (A1 t + A2) w(t) / (ct+1)^(m+2)

with (A1, A2) solving a 2x2 moment system.

F always vanishes at z = +-1. We divide out (1 - z^2) and a positive
scalar to get the reduced polynomial p.

Two constructions are provided:

* pointwise, for a fixed rational c: exact, used per ray;
* bivariate: p(z, c) is a polynomial in both variables, certified on
  the whole square at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd
from typing import Any

from .exactalg import (
    BiPoly,
    IsolatingInterval,
    Poly,
    PositivityCertificate,
    Refutation,
    certify_positive,
    isolate_roots,
    mobius_substitute,
    rational_str,
    resultant,
    simplest_rational_between,
)
from .fiberjoin import AdmissibleData, FiberJoinSpec, validate
from .momentintegrals import (
    IntegralSpec5,
    IntegralSpec7,
    PoleRat,
    _upow,
    alpha,
    alpha_pole,
    beta,
    beta_pole,
)

__all__ = [
    "ExtremalityProblem",
    "ReducedExtremalPoly",
    "CancellationError",
    "ClosedFormMismatch",
    "RayVerdict",
    "ConeCertificate",
    "ConeCounterexample",
    "ConeInconclusive",
    "solve_A_system",
    "build_F",
    "bivariate_p",
    "is_extremal_ray",
    "certify_whole_cone",
    "closed_form_p5",
    "closed_form_p5_bivariate",
    "closed_form_dim7",
    "table_p_product",
    "table_p_polystable",
    "table_h0",
    "bivariate_mobius",
    "farey",
]


class CancellationError(AssertionError):
    """Negative powers of (cz+1) survived, or F failed to vanish at z = +-1."""


class ClosedFormMismatch(AssertionError):
    """The integral construction disagrees with an explicit coefficient table."""


# ---------------------------------------------------------------------------
# problem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtremalityProblem:
    """Admissible data plus a ray parameter c (None means c is symbolic)."""

    data: AdmissibleData
    c: Fraction | None = None

    def __post_init__(self):
        if self.data.dimension not in (5, 7):
            raise ValueError("dimension must be 5 or 7")
        if len(self.data.x) != (1 if self.data.dimension == 5 else 2):
            raise ValueError("admissible data does not match the dimension")
        if self.c is not None:
            c = Fraction(self.c)
            if not -1 < c < 1:
                raise ValueError(f"c must lie in (-1, 1), got {c}")
            object.__setattr__(self, "c", c)

    @classmethod
    def from_spec(cls, spec: FiberJoinSpec, c=None) -> ExtremalityProblem:
        return cls(validate(spec), None if c is None else Fraction(c))

    def at(self, c) -> ExtremalityProblem:
        return ExtremalityProblem(self.data, Fraction(c))

    @property
    def dimension(self) -> int:
        return self.data.dimension

    @property
    def m(self) -> int:
        """Exponent of (cz+1) in F, and of (ct+1) in the source moments."""
        return 3 if self.dimension == 5 else 4

    @property
    def weight(self) -> Poly:
        w = Poly.const(1)
        for x in self.data.x:
            w = w * Poly((1, x))
        return w

    @property
    def source(self) -> Poly:
        x, s = self.data.x, self.data.s
        if self.dimension == 5:
            return Poly.const(x[0] * s[0])
        return Poly((x[0] * s[0], x[0] * s[0] * x[1])) + Poly((x[1] * s[1], x[1] * s[1] * x[0]))

    def moment_spec(self, r: int, m: int):
        d = self.data
        if self.dimension == 5:
            return IntegralSpec5(r, m, d.x[0], d.s[0])
        return IntegralSpec7(r, m, d.x[0], d.x[1], d.s[0], d.s[1])


@dataclass(frozen=True)
class ReducedExtremalPoly:
    """F = scalar_prefactor * (1 - z^2) * p, with scalar_prefactor > 0."""

    p: Poly
    scalar_prefactor: Fraction
    deflated_factors: dict = field(compare=False)
    closed_form: str | None = None

    def to_dict(self) -> dict:
        return {
            "p": [rational_str(a) for a in self.p.coeffs],
            "scalar_prefactor": rational_str(self.scalar_prefactor),
            "deflated_factors": dict(self.deflated_factors),
            "closed_form": self.closed_form,
        }


# ---------------------------------------------------------------------------
# rings: the same construction runs over Q (fixed c) and over PoleRat (symbolic c)
# ---------------------------------------------------------------------------


class _PointRing:
    def __init__(self, c: Fraction):
        self.c = c

    def const(self, a):
        return Fraction(a)

    def c_pow(self, e: int):
        return self.c**e

    def one_minus_pow(self, e: int):
        return (1 - self.c) ** e

    def zero(self):
        return Fraction(0)

    def is_zero(self, a) -> bool:
        return a == 0


class _PoleRing:
    def const(self, a):
        return PoleRat.const(a)

    def c_pow(self, e: int):
        if e >= 0:
            return PoleRat(Poly.monomial(e))
        return PoleRat(Poly.const(1), -e, 0, 0)

    def one_minus_pow(self, e: int):
        return _upow(e, False)

    def zero(self):
        return PoleRat(Poly())

    def is_zero(self, a) -> bool:
        return a.reduce().is_zero()


def _laurent_add(acc: dict, power: int, value) -> None:
    acc[power] = acc[power] + value if power in acc else value


def _W(g: Poly, k: int, ring) -> dict:
    """int_{-1}^z g(t) (1+ct)^(-k) (z-t) dt as a Laurent polynomial in v = 1 + cz."""
    out: dict = {}
    for j, gj in enumerate(g.coeffs):
        if gj == 0:
            continue
        if j > k - 3:
            raise ValueError("integrand degree too high for a log-free antiderivative")
        scale = ring.c_pow(-(j + 2)) * gj
        for i in range(j + 1):
            e = comb(j, i) * (-1) ** (j - i)
            a = i - k + 1
            _laurent_add(out, a + 1, scale * (Fraction(e, a) - Fraction(e, a + 1)))
            _laurent_add(out, 1, scale * ring.one_minus_pow(a) * Fraction(-e, a))
            _laurent_add(out, 0, scale * ring.one_minus_pow(a + 1) * Fraction(e, a + 1))
    return out


def _F_laurent(problem: ExtremalityProblem, ring, A1, A2, lead) -> dict:
    """(cz+1)^m times the bracket, as a Laurent polynomial in v; ``lead`` scales the A-free part."""
    m = problem.m
    w = problem.weight
    acc: dict = {}
    boundary = ring.one_minus_pow(-m) * ring.c_pow(-1) * (2 * w(-1))
    # z + 1 = (v - 1 + c) / c
    _laurent_add(acc, 1, boundary * lead)
    _laurent_add(acc, 0, boundary * lead * (ring.c_pow(1) - 1))
    for power, val in _W(problem.source, m, ring).items():
        _laurent_add(acc, power, val * lead * 2)
    for power, val in _W(w * Poly.x(), m + 2, ring).items():
        _laurent_add(acc, power, -(val * A1))
    for power, val in _W(w, m + 2, ring).items():
        _laurent_add(acc, power, -(val * A2))
    shifted = {}
    for power, val in acc.items():
        if power + m < 0:
            if not ring.is_zero(val):
                raise CancellationError(f"v^{power + m} term survived in F")
            continue
        shifted[power + m] = val
    return shifted


# ---------------------------------------------------------------------------
# pointwise construction
# ---------------------------------------------------------------------------


def solve_A_system(problem: ExtremalityProblem) -> tuple[Fraction, Fraction]:
    """Solve  a1 A1 + a0 A2 = 2 b0,  a2 A1 + a1 A2 = 2 b1  exactly."""
    if problem.c is None:
        raise ValueError("solve_A_system needs a rational c")
    c, mA, mB = problem.c, problem.m + 2, problem.m
    a0, a1, a2 = (alpha(problem.moment_spec(r, mA), c) for r in (0, 1, 2))
    b0, b1 = (beta(problem.moment_spec(r, mB), c) for r in (0, 1))
    det = a1 * a1 - a0 * a2
    if det == 0:
        raise ArithmeticError("singular moment system (the Gram determinant cannot vanish)")
    A1 = 2 * (b0 * a1 - a0 * b1) / det
    A2 = 2 * (a1 * b1 - a2 * b0) / det
    assert a1 * A1 + a0 * A2 == 2 * b0 and a2 * A1 + a1 * A2 == 2 * b1
    return A1, A2


def _F_at_zero(problem: ExtremalityProblem, A1: Fraction, A2: Fraction) -> Poly:
    """c = 0: every (ct+1) power is 1 and F is a plain double integral."""
    w = problem.weight
    Q = problem.source * 2 - Poly((A2, A1)) * w
    G1 = Q.antiderivative()
    G2 = (Q * Poly.x()).antiderivative()
    z = Poly.x()
    integral = z * (G1 - G1(-1)) - (G2 - G2(-1))
    return Poly((1, 1)) * (2 * w(-1)) + integral


def build_F(problem: ExtremalityProblem, check_closed_form: bool = True) -> tuple[Poly, ReducedExtremalPoly]:
    """F_c(z) and its reduction p(z) for a fixed rational c."""
    if problem.c is None:
        raise ValueError("build_F needs a rational c; use bivariate_p for symbolic c")
    c = problem.c
    A1, A2 = solve_A_system(problem)
    if c == 0:
        F = _F_at_zero(problem, A1, A2)
    else:
        lau = _F_laurent(problem, _PointRing(c), A1, A2, Fraction(1))
        v = Poly((1, c))
        F = Poly()
        for power in sorted(lau):
            F = F + v**power * lau[power]
    if F(1) != 0 or F(-1) != 0:
        raise CancellationError("F does not vanish at z = +-1")
    raw = F.exact_div(Poly((1, 0, -1)))
    dmax = 2 if problem.dimension == 5 else 3
    if raw.degree > dmax:
        raise CancellationError(f"reduced polynomial has degree {raw.degree} > {dmax}")
    if problem.dimension == 5:
        scale = _dtilde(problem.data.x[0], c)
    else:
        scale = Fraction(1)
    p = raw * scale
    form = None
    if check_closed_form:
        form = _check_closed_form(problem, raw)
    return F, ReducedExtremalPoly(
        p=p,
        scalar_prefactor=1 / scale,
        deflated_factors={"one_minus_z_squared": 1, "cz_plus_one_power": problem.m},
        closed_form=form,
    )


def _dtilde(x: Fraction, c: Fraction) -> Fraction:
    return (1 - c) ** 2 * (1 + x) ** 2 + (1 + c) ** 2 * (1 - x) ** 2 + 4 * (1 - c * c) * (1 - x * x)


# ---------------------------------------------------------------------------
# explicit closed forms
# ---------------------------------------------------------------------------


def closed_form_p5(x, s, c) -> Poly:
    """The explicit quadratic p(z) in dimension 5."""
    x, s, c = Fraction(x), Fraction(s), Fraction(c)
    p0 = c * c * s * x + 3 * c * c * x * x - c * c - 2 * c * s * x * x + 3 * c * x**3 - 7 * c * x + s * x**3 - 4 * x * x + 6
    p1 = 2 * x * (3 * c * c * x * x - c * c - 4 * c * x - x * x + 3)
    p2 = (c - x) * (-c * s * x + 3 * c * x * x - c + s * x * x - 2 * x)
    return Poly((p0, p1, p2))


def closed_form_p5_bivariate(x, s) -> BiPoly:
    x, s = Fraction(x), Fraction(s)
    p0 = Poly((s * x**3 - 4 * x * x + 6, -2 * s * x * x + 3 * x**3 - 7 * x, s * x + 3 * x * x - 1))
    p1 = Poly((2 * x * (3 - x * x), -8 * x * x, 2 * x * (3 * x * x - 1)))
    p2 = Poly((-x, 1)) * Poly((s * x * x - 2 * x, -s * x + 3 * x * x - 1))
    return BiPoly((p0, p1, p2))


def table_h0() -> Poly:
    return Poly((544829, -1814364, 2225984, -1185624, 229199))


_H45 = {
    "21": (1849633, -3952908, 2583653, -545438, 68368),
    "22": (5029446, -10073556, 5505031, -421486, -29519),
    "23": (1085299, -2250304, 1327594, -148704, -11901),
    "24": (2453521, -4733176, 2196021, 235654, -147064),
    "31": (173925883, -629489348, 863749558, -530449308, 122385903),
    "32": (86771822, -314540932, 432305747, -265928422, 61453077),
    "33": (169929491, -609982556, 828678836, -502956696, 114452421),
    "34": (42386813, -152393768, 207385193, -126091058, 28743168),
    "41": (72852912, -233877440, 270006303, -130233426, 21229919),
    "42": (365166252, -1171579852, 1351415507, -650974422, 105863967),
    "43": (184191678, -594750598, 693107613, -339776268, 57173843),
    "44": (184642524, -595846924, 693799609, -339679914, 57031029),
}

_H45_G1 = {
    "21": (5671303, -12465928, 8863948, -2529108, 469713),
    "22": (515185, -1068076, 661802, -131428, 23509),
    "31": (35584455, -129799228, 179764056, -111588384, 26063877),
    "32": (44385009, -162147164, 224920554, -139837364, 32709909),
}

_H46 = {
    "21": (5793707, -13073132, 9976937, -3421902, 734322),
    "22": (515185, -1068076, 661802, -131428, 23509),
    "31": (181918667, -668502932, 933891002, -585434532, 138252867),
    "32": (44385009, -162147164, 224920554, -139837364, 32709909),
    "41": (356026968, -1129159208, 1277664093, -594396318, 89753413),
    "42": (90261864, -287866464, 328807949, -155647254, 24416469),
}


def _taylor_minus_one(coeffs: list[Poly]) -> BiPoly:
    """sum_i coeffs[i](c) (1+z)^i as a BiPoly in (z, c)."""
    out = [Poly() for _ in coeffs]
    for i, a in enumerate(coeffs):
        for j in range(i + 1):
            out[j] = out[j] + a * comb(i, j)
    return BiPoly(tuple(out))


def table_h_product(g1: int, g2: int) -> dict[str, Poly]:
    """h_0 .. h_4 for K = [[10 g1, 100 g2], [2 g1, g2]] over Sigma_g1 x Sigma_g2."""
    H = {k: Poly(v) for k, v in _H45.items()}
    a, b = g1 - 2, g2 - 2
    return {
        "h0": table_h0(),
        "h2": H["21"] * 6 + H["22"] * b + (H["23"] * 5 + H["24"] * b) * a,
        "h3": H["31"] * 2 + H["32"] * (2 * b) + (H["33"] + H["34"] * (2 * b)) * a,
        "h4": H["41"] * 10 + H["42"] * b + (H["43"] * 2 + H["44"] * b) * a,
    }


def table_h_product_genus_one(g2: int) -> dict[str, Poly]:
    """The g1 = 1 rewrites of h_2 and h_3."""
    H = {k: Poly(v) for k, v in _H45_G1.items()}
    b = g2 - 2
    return {"h2": H["21"] + H["22"] * (5 * b), "h3": H["31"] * 5 + H["32"] * (2 * b)}


def table_p_product(g1: int, g2: int) -> BiPoly:
    h = table_h_product(g1, g2)
    return _taylor_minus_one([h["h0"] * (8 * g1 * g2), h["h2"] * 4, h["h3"] * 2, h["h4"]])


def table_h_polystable(g: int) -> dict[str, Poly]:
    H = {k: Poly(v) for k, v in _H46.items()}
    b = g - 2
    return {
        "h0": table_h0(),
        "h2": H["21"] * 4 + H["22"] * (20 * b),
        "h3": H["31"] * 2 + H["32"] * (4 * b),
        "h4": H["41"] + H["42"] * (2 * b),
    }


def table_p_polystable(g: int) -> BiPoly:
    h = table_h_polystable(g)
    return _taylor_minus_one([h["h0"] * (8 * g), h["h2"], h["h3"], h["h4"]])


_X_TEMPLATE = (Fraction(2, 3), Fraction(99, 101))


def closed_form_dim7(data: AdmissibleData) -> tuple[str, BiPoly, Poly] | None:
    """Explicit p and its normalizer when the data come from a tabulated K.

    Returns (name, p_table(z, c), denominator(c)) with
    F = (1 - z^2) p_table / denominator, or None.
    """
    if data.dimension != 7 or data.x != _X_TEMPLATE:
        return None
    g1, g2 = data.genera
    if g1 >= 1 and g2 >= 1 and data.n == (8 * g1, 99 * g2):
        return "product-table", table_p_product(g1, g2), table_h0() * (1212 * g1 * g2)
    if g1 == 0 and g2 >= 1 and data.n == (8 * g2, 99 * g2):
        return "polystable-table", table_p_polystable(g2), table_h0() * (1212 * g2)
    return None


def _check_closed_form(problem: ExtremalityProblem, raw: Poly) -> str | None:
    c = problem.c
    if problem.dimension == 5:
        x, s = problem.data.x[0], problem.data.s[0]
        expect = closed_form_p5(x, s, c)
        got = raw * _dtilde(x, c)
        if got != expect:
            raise ClosedFormMismatch(f"dimension-5 p differs from the explicit quadratic at c = {c}")
        return "dim5-quadratic"
    cf = closed_form_dim7(problem.data)
    if cf is None:
        return None
    name, table, den = cf
    if raw * den(c) != table.at_c(c):
        raise ClosedFormMismatch(f"{name}: integral p differs from the table at c = {c}")
    return name


# ---------------------------------------------------------------------------
# symbolic construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BivariateP:
    """p(z, c) with F = mu(c) (1 - z^2) p(z, c) and mu > 0 on (-1, 1).

    ``p`` has integer coefficients and trivial content in Q[c].
    """

    p: BiPoly
    mu_numerator: Poly
    mu_denominator: Poly


def _poly_lcm_den(polys) -> int:
    den = 1
    for q in polys:
        for a in q.coeffs:
            den = den * a.denominator // gcd(den, a.denominator)
    return den


def _primitive_bipoly(B: BiPoly) -> tuple[BiPoly, Poly]:
    """Split B = content(c) * prim(z, c) with prim integral and primitive."""
    nz = [q for q in B.coeffs if not q.is_zero()]
    g = nz[0]
    for q in nz[1:]:
        g = Poly.gcd(g, q)
        if g.degree == 0:
            break
    g = g.monic()
    parts = [q.exact_div(g) if not q.is_zero() else Poly() for q in B.coeffs]
    den = _poly_lcm_den(parts)
    ints = [int(a * den) for q in parts for a in q.coeffs]
    num = 0
    for a in ints:
        num = gcd(num, a)
    scale = Fraction(den, num)
    prim = BiPoly(tuple(q * scale for q in parts))
    return prim, g * (1 / scale)


def _div_one_minus_z2(B: BiPoly) -> BiPoly:
    N = list(B.coeffs)
    d = len(N) - 1
    q = [Poly() for _ in range(max(d - 1, 0))]
    for i in range(d - 1):
        q[i] = N[i] + (q[i - 2] if i >= 2 else Poly())
    Q = BiPoly(tuple(q))
    if Q * BiPoly((Poly.const(1), Poly(), Poly.const(-1))) != B:
        raise CancellationError("bivariate F is not divisible by 1 - z^2")
    return Q


def bivariate_p(data: AdmissibleData) -> BivariateP:
    """p(z, c) for all rays at once, normalized to be primitive over Z[c]."""
    problem = ExtremalityProblem(data)
    ring = _PoleRing()
    mA, mB = problem.m + 2, problem.m
    a0, a1, a2 = (alpha_pole(problem.moment_spec(r, mA)) for r in (0, 1, 2))
    b0, b1 = (beta_pole(problem.moment_spec(r, mB)) for r in (0, 1))
    delta = (a1 * a1 - a0 * a2).reduce()
    A1 = ((b0 * a1 - a0 * b1) * 2).reduce()
    A2 = ((a1 * b1 - a2 * b0) * 2).reduce()
    lau = _F_laurent(problem, ring, A1, A2, delta)
    # F * delta = sum_n lau[n] (1 + cz)^n
    zc: dict[int, PoleRat] = {}
    for n, coef in lau.items():
        for i in range(n + 1):
            term = coef * PoleRat(Poly.monomial(i, comb(n, i)))
            zc[i] = zc[i] + term if i in zc else term
    deg = max(zc)
    e0 = max(v.e0 for v in zc.values())
    e1 = max(v.e1 for v in zc.values())
    e2 = max(v.e2 for v in zc.values())
    nums = [zc[i]._lift(e0, e1, e2) if i in zc else Poly() for i in range(deg + 1)]
    # strip common special factors
    while e0 and all(q.is_zero() or q[0] == 0 for q in nums):
        nums = [Poly(q.coeffs[1:]) if not q.is_zero() else q for q in nums]
        e0 -= 1
    one_minus, one_plus = Poly((1, -1)), Poly((1, 1))
    while e1 and all(q.is_zero() or q(1) == 0 for q in nums):
        nums = [q.exact_div(one_minus) if not q.is_zero() else q for q in nums]
        e1 -= 1
    while e2 and all(q.is_zero() or q(-1) == 0 for q in nums):
        nums = [q.exact_div(one_plus) if not q.is_zero() else q for q in nums]
        e2 -= 1
    if e0:
        raise CancellationError("bivariate F retains a pole at c = 0")
    N = BiPoly(tuple(nums))
    while N.coeffs and N.coeffs[-1].is_zero():
        N = BiPoly(N.coeffs[:-1])
    P = _div_one_minus_z2(N)
    prim, content = _primitive_bipoly(P)
    special = one_minus**e1 * one_plus**e2
    # F = content * prim * (1 - z^2) / (special * delta), delta = delta.num / delta.special
    mu_num = content * delta.denominator()
    mu_den = special * delta.num
    if mu_num(0) / mu_den(0) < 0:
        prim = BiPoly(tuple(-q for q in prim.coeffs))
        mu_num = -mu_num
    return BivariateP(prim, mu_num, mu_den)


# ---------------------------------------------------------------------------
# per-ray verdicts
# ---------------------------------------------------------------------------

EXTREMAL = "extremal ray (up to isotopy)"
NOT_EXTREMAL = "not extremal, no extremal representative in this ray"


@dataclass(frozen=True)
class RayVerdict:
    c: Fraction
    extremal: bool
    evidence: PositivityCertificate | Refutation
    reduced: ReducedExtremalPoly

    @property
    def verdict(self) -> str:
        return EXTREMAL if self.extremal else NOT_EXTREMAL

    def replay(self) -> bool:
        return self.evidence.replay() and isinstance(self.evidence, PositivityCertificate) == self.extremal

    def to_dict(self) -> dict:
        return {
            "c": rational_str(self.c),
            "extremal": "yes" if self.extremal else "no",
            "verdict": self.verdict,
            "reduced": self.reduced.to_dict(),
            "evidence": self.evidence.to_dict(),
        }


def is_extremal_ray(problem: ExtremalityProblem) -> RayVerdict:
    """Certify p > 0 on (-1, 1) at the problem's c, or refute with a rational z*."""
    _, red = build_F(problem)
    ev = certify_positive(red.p)
    return RayVerdict(problem.c, isinstance(ev, PositivityCertificate), ev, red)


# ---------------------------------------------------------------------------
# whole-cone certification
# ---------------------------------------------------------------------------


def bivariate_mobius(p: BiPoly) -> dict[tuple[int, int], Fraction]:
    """(1+b)^dc (1+y)^dz p((1-y)/(1+y), (1-b)/(1+b)) as {(b power, y power): coeff}."""
    dz = p.degree_z
    dc = p.degree_c
    out: dict[tuple[int, int], Fraction] = {}
    # z -> (1-y)/(1+y): z^i (1+y)^dz = (1-y)^i (1+y)^(dz-i)
    ypolys = [Poly((1, -1)) ** i * Poly((1, 1)) ** (dz - i) for i in range(dz + 1)]
    for i, q in enumerate(p.coeffs):
        if q.is_zero():
            continue
        qb = mobius_substitute(q, dc)
        for bj, a in enumerate(qb.coeffs):
            if a == 0:
                continue
            for yk, bcoef in enumerate(ypolys[i].coeffs):
                if bcoef:
                    out[(bj, yk)] = out.get((bj, yk), Fraction(0)) + a * bcoef
    return {k: v for k, v in sorted(out.items()) if v != 0}


def _b_groups(P: dict[tuple[int, int], Fraction]) -> list[Poly]:
    nb = max(k[0] for k in P) + 1
    ny = max(k[1] for k in P) + 1
    rows = [[Fraction(0)] * ny for _ in range(nb)]
    for (bj, yk), v in P.items():
        rows[bj][yk] = v
    return [Poly(r) for r in rows]


def farey(order: int, lo: Fraction = Fraction(-1), hi: Fraction = Fraction(1)) -> list[Fraction]:
    """Rationals strictly inside (lo, hi) with denominator <= order, ascending."""
    pts = set()
    for q in range(1, order + 1):
        a0 = int(lo * q) - 1
        a1 = int(hi * q) + 1
        for a in range(a0, a1 + 1):
            f = Fraction(a, q)
            if lo < f < hi:
                pts.add(f)
    return sorted(pts)


@dataclass(frozen=True)
class ConeCertificate:
    """Proof that every ray in the cone is extremal.

    ``method`` is one of:

    * ``mobius-bivariate``: all coefficients of the doubly transformed p
      are nonnegative;
    * ``grouped-sturm``: each b-power coefficient, a polynomial in y, is
      certified positive on (0, inf) or vanishes identically;
    * ``taylor-template``: p = sum_i a_i(c)(1+z)^i with a_0, ..., a_{d-1}
      positive and p(1, c) positive. The coefficient sign pattern then
      has at most one change, so p has no root in (-1, 1];
    * ``cell-decomposition``: no root of p(., c) can enter or leave
      (-1, 1) between consecutive critical values of c, every cell
      sample is certified, and every double root at a critical value
      lies outside (-1, 1).
    """

    method: str
    p: BiPoly
    witness: dict = field(compare=False)

    status = "extremal"

    def replay(self) -> bool:
        return _replay_cone(self)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "method": self.method,
            "p": _bipoly_json(self.p),
            "witness": _json(self.witness),
        }


@dataclass(frozen=True)
class ConeCounterexample:
    """A ray c* and point z* where p(z*, c*) <= 0, found by ``search``."""

    c: Fraction
    z: Fraction
    value: Fraction
    search: str
    p: BiPoly

    status = "not-extremal"

    def replay(self) -> bool:
        return self.p(self.z, self.c) == self.value and self.value <= 0

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "c": rational_str(self.c),
            "z": rational_str(self.z),
            "value": rational_str(self.value),
            "search": self.search,
            "p": _bipoly_json(self.p),
        }


@dataclass(frozen=True)
class ConeInconclusive:
    reason: str
    p: BiPoly
    attempts: tuple[str, ...] = ()

    status = "inconclusive"

    def replay(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"status": self.status, "reason": self.reason, "attempts": list(self.attempts), "p": _bipoly_json(self.p)}


def _bipoly_json(p: BiPoly) -> list[list[str]]:
    return [[rational_str(a) for a in q.coeffs] for q in p.coeffs]


def _json(w):
    if isinstance(w, Poly):
        return [rational_str(a) for a in w.coeffs]
    if isinstance(w, Fraction):
        return rational_str(w)
    if isinstance(w, (PositivityCertificate, Refutation, IsolatingInterval)):
        return w.to_dict()
    if isinstance(w, BiPoly):
        return _bipoly_json(w)
    if isinstance(w, dict):
        return {str(k): _json(v) for k, v in w.items()}
    if isinstance(w, (list, tuple)):
        return [_json(v) for v in w]
    return w


def _positive_on_half_line(q: Poly) -> PositivityCertificate | Refutation:
    """q > 0 on (0, inf) via y = (1-t)/(1+t), t in (-1, 1)."""
    return certify_positive(mobius_substitute(q, q.degree))


def _try_mobius(p: BiPoly) -> ConeCertificate | None:
    P = bivariate_mobius(p)
    if P and all(v >= 0 for v in P.values()):
        return ConeCertificate("mobius-bivariate", p, {"transformed": {f"{a},{b}": v for (a, b), v in P.items()}})
    return None


def _try_grouped(p: BiPoly) -> ConeCertificate | None:
    P = bivariate_mobius(p)
    if not P:
        return None
    groups = _b_groups(P)
    certs = []
    for q in groups:
        if q.is_zero():
            certs.append(None)
            continue
        ev = _positive_on_half_line(q)
        if not isinstance(ev, PositivityCertificate):
            return None
        certs.append(ev)
    return ConeCertificate("grouped-sturm", p, {"groups": groups, "certificates": certs})


def _taylor_coeffs(p: BiPoly) -> list[Poly]:
    return p.taylor_z(-1)


def _try_template(p: BiPoly) -> ConeCertificate | None:
    a = _taylor_coeffs(p)
    if len(a) < 2:
        return None
    certs = []
    for q in a[:-1]:
        if q.is_zero():
            return None
        ev = certify_positive(q)
        if not isinstance(ev, PositivityCertificate):
            return None
        certs.append(ev)
    edge = p.at_z(1)
    ev = certify_positive(edge)
    if not isinstance(ev, PositivityCertificate):
        return None
    return ConeCertificate("taylor-template", p, {"taylor": a, "coefficient_certificates": certs, "edge_certificate": ev})


def _dc(p: BiPoly) -> BiPoly:
    return BiPoly(tuple(q.derivative() for q in p.coeffs))


def _critical_polynomial(p: BiPoly) -> dict[str, Poly]:
    return {
        "discriminant": resultant(p, p.derivative_z()),
        "leading": p.coeffs[-1],
        "edge_minus": p.at_z(-1),
        "edge_plus": p.at_z(1),
        "c_gradient": resultant(p, _dc(p)),
    }


def _cells(p: BiPoly, tol: Fraction) -> tuple[str, Any]:
    """Cell decomposition over c in (-1, 1).

    Critical values are the roots of the discriminant, the leading
    coefficient and the two edge polynomials p(+-1, c). Between
    consecutive critical values the number of roots of p(., c) in
    (-1, 1) is constant, so one certified sample per cell proves
    p > 0 there. At a critical value p >= 0 by continuity, and a zero
    would be an interior local minimum: p = p_z = p_c = 0. That forces
    a common root of res_z(p, p_z) and res_z(p, p_c). So a gcd with
    no root in (-1, 1) finishes the proof.

    Returns ("proof", witness), ("witness", (c, refutation)) or
    ("degenerate", reason).
    """
    if p.degree_z < 1:
        return "degenerate", "p does not depend on z"
    crit = _critical_polynomial(p)
    if crit["discriminant"].is_zero():
        return "degenerate", "p has a repeated factor in z"
    if crit["edge_minus"].is_zero() or crit["edge_plus"].is_zero():
        return "degenerate", "p vanishes identically on an edge"
    prod = Poly.const(1)
    for name in ("discriminant", "leading", "edge_minus", "edge_plus"):
        prod = prod * _strip_endpoint_roots(crit[name])
    roots = isolate_roots(prod, -1, 1, tol=tol)
    cuts = [Fraction(-1)] + [e for iv in roots for e in (iv.lo, iv.hi)] + [Fraction(1)]
    samples = [simplest_rational_between(cuts[i], cuts[i + 1]) for i in range(0, len(cuts), 2)]
    certs = []
    for cs in samples:
        ev = certify_positive(p.at_c(cs))
        if not isinstance(ev, PositivityCertificate):
            return "witness", (cs, ev)
        certs.append(ev)
    grad = crit["c_gradient"]
    if grad.is_zero():
        return "degenerate", "p and its c-derivative share a factor"
    touch = Poly.gcd(crit["discriminant"], grad)
    touch_roots = isolate_roots(_strip_endpoint_roots(touch), -1, 1) if touch.degree > 0 else []
    if touch_roots:
        iv = touch_roots[0]
        return "degenerate", f"possible touching zero near c in [{iv.lo}, {iv.hi}]"
    return "proof", {
        "critical": crit,
        "roots": roots,
        "samples": samples,
        "sample_certificates": certs,
        "touching_gcd": touch,
    }


def _strip_endpoint_roots(q: Poly) -> Poly:
    while q.degree > 0 and q(1) == 0:
        q = q.exact_div(Poly((-1, 1)))
    while q.degree > 0 and q(-1) == 0:
        q = q.exact_div(Poly((1, 1)))
    return q


ConeResult = ConeCertificate | ConeCounterexample | ConeInconclusive


def certify_whole_cone(
    data: AdmissibleData | ExtremalityProblem | BivariateP,
    grid_order: int = 64,
    use_cells: bool = True,
    tol: Fraction = Fraction(1, 2**40),
) -> ConeResult:
    """Decide extremality of every ray c in (-1, 1).

    Sufficient conditions are tried cheapest first (bivariate Moebius,
    grouped Sturm, Taylor template). On failure a Farey grid of the
    given order is searched for a witness ray. Then the cell
    decomposition either proves positivity or supplies a witness from
    a cell sample. Anything else is inconclusive; a failed sufficient
    condition is never reported as non-extremality.
    """
    if isinstance(data, ExtremalityProblem):
        data = data.data
    bp = data if isinstance(data, BivariateP) else bivariate_p(data)
    p = bp.p
    attempts = []
    for name, fn in (("mobius-bivariate", _try_mobius), ("grouped-sturm", _try_grouped), ("taylor-template", _try_template)):
        cert = fn(p)
        if cert is not None:
            return cert
        attempts.append(name)
    if grid_order:
        for cs in sorted(farey(grid_order), key=lambda f: (f.denominator, f)):
            ev = certify_positive(p.at_c(cs))
            if isinstance(ev, Refutation) and ev.point is not None:
                return ConeCounterexample(cs, ev.point, ev.value, f"farey-{grid_order}", p)
        attempts.append(f"farey-{grid_order}")
    if use_cells:
        kind, payload = _cells(p, tol)
        if kind == "proof":
            return ConeCertificate("cell-decomposition", p, payload)
        if kind == "witness":
            cs, ev = payload
            if ev.point is not None:
                return ConeCounterexample(cs, ev.point, ev.value, "cell-sample", p)
            return ConeInconclusive("cell sample touches zero at an irrational point", p, tuple(attempts + ["cell-decomposition"]))
        attempts.append("cell-decomposition")
        return ConeInconclusive(payload, p, tuple(attempts))
    return ConeInconclusive("sufficient conditions failed and no witness was found", p, tuple(attempts))


def _replay_cone(cert: ConeCertificate) -> bool:
    p, w = cert.p, cert.witness
    if cert.method == "mobius-bivariate":
        P = bivariate_mobius(p)
        return bool(P) and all(v >= 0 for v in P.values()) and {f"{a},{b}": v for (a, b), v in P.items()} == w["transformed"]
    if cert.method == "grouped-sturm":
        groups = _b_groups(bivariate_mobius(p))
        if groups != list(w["groups"]):
            return False
        nonzero = False
        for q, ev in zip(groups, w["certificates"]):
            if q.is_zero():
                if ev is not None:
                    return False
                continue
            nonzero = True
            if ev is None or not ev.replay() or ev.polynomial != mobius_substitute(q, q.degree):
                return False
        return nonzero
    if cert.method == "taylor-template":
        a = _taylor_coeffs(p)
        if a != list(w["taylor"]) or _taylor_minus_one(a) != p:
            return False
        for q, ev in zip(a[:-1], w["coefficient_certificates"]):
            if ev.polynomial != q or not ev.replay():
                return False
        ev = w["edge_certificate"]
        return ev.polynomial == p.at_z(1) and ev.replay()
    if cert.method == "cell-decomposition":
        kind, payload = _cells(p, Fraction(1, 2**40))
        if kind != "proof":
            return False
        return [s for s in payload["samples"]] == list(w["samples"]) and all(ev.replay() for ev in w["sample_certificates"])
    return False


# ---------------------------------------------------------------------------
# helpers for callers holding a FiberJoinSpec
# ---------------------------------------------------------------------------


def whole_cone_for_spec(spec: FiberJoinSpec, **kw) -> ConeResult:
    return certify_whole_cone(validate(spec), **kw)


def ray_for_spec(spec: FiberJoinSpec, c) -> RayVerdict:
    return is_extremal_ray(ExtremalityProblem.from_spec(spec, c))
