"""Constant scalar curvature rays.

The extremal representative of the ray c has constant scalar curvature
exactly when

    alpha_{1,-m'} beta_{0,-m} - alpha_{0,-m'} beta_{1,-m} = 0,

where m = 3, m' = 4 in dimension 5 and m = 4, m' = 5 in dimension 7.
Clearing the positive factor (1 - c^2)^k leaves a cubic or quintic
h(c). Its roots in (-1, 1) are the CSC candidates; each one also needs
p(z) > 0 at that root.

For bases CP1 x CP1, the same condition is also available in
weight-vector form (a binary quintic in (w1, w2)) and through the
quasi-regular quotient's own CSC equation; the two are compared
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactalg import (
    BiPoly,
    IsolatingInterval,
    Poly,
    PositivityCertificate,
    Refutation,
    certify_positive,
    count_roots,
    descartes_sign_changes,
    isolate_roots,
    mobius_substitute,
    rational_str,
    resultant,
)
from .extremality import (
    BivariateP,
    ExtremalityProblem,
    bivariate_p,
    closed_form_p5_bivariate,
)
from .fiberjoin import AdmissibleData, FiberJoinSpec, KMatrix, SpecError, _divisors, c_to_w, check_spec, validate
from .momentintegrals import alpha_pole, beta_pole

__all__ = [
    "CscPolynomial",
    "HMismatch",
    "EliminationCertificate",
    "RegionCertificate",
    "CscRayCertificate",
    "build_h",
    "explicit_h5",
    "explicit_h7",
    "find_csc_rays",
    "certify_positivity_at_root_dim5",
    "certify_positivity_at_root_dim7",
    "f_CR",
    "csc_weight_quintic",
    "quintic_value",
    "csc_in_x",
    "EquivalenceReport",
    "check_equivalence",
    "REGION_DEPTH",
]

REGION_DEPTH = 12


class HMismatch(AssertionError):
    """The integral-built and explicit CSC polynomials disagree."""


@dataclass(frozen=True)
class CscPolynomial:
    h: Poly
    dimension: int
    provenance: str  # "from-integrals" | "explicit-form"
    x: tuple[Fraction, ...]

    def __post_init__(self):
        expect_deg = 3 if self.dimension == 5 else 5
        if self.h.degree > expect_deg:
            raise HMismatch(f"h has degree {self.h.degree} > {expect_deg}")
        if not self.endpoint_identities_hold():
            raise HMismatch("h violates its endpoint identities")

    def endpoint_identities_hold(self) -> bool:
        if self.dimension == 5:
            (x,) = self.x
            return self.h(1) == 4 * (1 - x) ** 2 and self.h(-1) == -4 * (1 + x) ** 2
        x1, x2 = self.x
        return self.h(1) == 24 * (1 - x1) ** 2 * (1 - x2) ** 2 and self.h(-1) == -24 * (1 + x1) ** 2 * (1 + x2) ** 2

    def to_dict(self) -> dict:
        return {
            "h": [rational_str(a) for a in self.h.coeffs],
            "dimension": self.dimension,
            "provenance": self.provenance,
        }


def explicit_h5(x, s) -> Poly:
    x, s = Fraction(x), Fraction(s)
    return Poly((x * (s * x - 2), 5 + x * x - s * x, -x * (6 + s * x), -(1 - s * x - 3 * x * x)))


def explicit_h7(x1, x2, s1, s2) -> Poly:
    x1, x2, s1, s2 = (Fraction(v) for v in (x1, x2, s1, s2))
    c5 = 3 * x1 * x2 * (s1 * x2 + s2 * x1) - s1 * x1 - s2 * x2 + 3 * (3 * x1**2 * x2**2 - x1**2 + 2 * x1 * x2 - x2**2 + 1)
    c4 = (
        s1 * x1**2
        + s2 * x2**2
        - 3 * (s1 + s2) * x1**2 * x2**2
        - 4 * (s1 + s2) * x1 * x2
        - 6 * (x1 + x2) * (4 * x1 * x2 + 1)
    )
    c3 = 4 * (
        ((s1 * x1 + s2 * x2) - (s1 * x2 + s2 * x1)) * x1 * x2
        + s1 * x1
        + s2 * x2
        + 3 * x1 * x2 * (x1 * x2 + 5)
        + 6 * (x1**2 + x2**2)
    )
    c2 = 4 * ((s1 + s2) * (x1 * x2 + 1) * x1 * x2 - s1 * x1**2 - s2 * x2**2 - 3 * (x1 + x2) * (2 * x1 * x2 + 3))
    c1 = (
        (s1 * x2 + s2 * x1) * x1 * x2
        - (s1 * x1 + s2 * x2) * (4 * x1 * x2 + 3)
        + 3 * (x1**2 * x2**2 + x1**2 + x2**2 + 10 * x1 * x2 + 7)
    )
    c0 = 3 * (s1 * x1**2 + s2 * x2**2) - (s1 + s2) * x1**2 * x2**2 - 6 * (x1 + x2)
    return Poly((c0, c1, c2, c3, c4, c5))


def _explicit_h(data: AdmissibleData) -> Poly:
    if data.dimension == 5:
        return explicit_h5(data.x[0], data.s[0])
    return explicit_h7(data.x[0], data.x[1], data.s[0], data.s[1])


def build_h(data: AdmissibleData, provenance: str = "from-integrals") -> CscPolynomial:
    """h(c) from the moment integrals, cross-checked against the explicit form.

    In dimension 5 the moment combination equals 4h / (3(1-c^2)^5);
    in dimension 7 it equals 4h / (9(1-c^2)^7).
    """
    explicit = _explicit_h(data)
    if provenance == "explicit-form":
        return CscPolynomial(explicit, data.dimension, provenance, data.x)
    if provenance != "from-integrals":
        raise ValueError(f"unknown provenance {provenance!r}")
    problem = ExtremalityProblem(data)
    m_alpha = 4 if data.dimension == 5 else 5
    m_beta = m_alpha - 1
    a0, a1 = (alpha_pole(problem.moment_spec(r, m_alpha)) for r in (0, 1))
    b0, b1 = (beta_pole(problem.moment_spec(r, m_beta)) for r in (0, 1))
    combo = (a1 * b0 - a0 * b1).reduce()
    k, scale = (5, Fraction(3, 4)) if data.dimension == 5 else (7, Fraction(9, 4))
    if combo.e0 or combo.e1 > k or combo.e2 > k:
        raise HMismatch("moment combination has unexpected poles")
    h = combo.num * Poly((1, -1)) ** (k - combo.e1) * Poly((1, 1)) ** (k - combo.e2) * scale
    if h != explicit:
        raise HMismatch("integral-built h differs from the explicit coefficient form")
    return CscPolynomial(h, data.dimension, provenance, data.x)


# ---------------------------------------------------------------------------
# dimension-5 positivity at the root: elimination modulo h
# ---------------------------------------------------------------------------


def _dtilde_poly(x: Fraction) -> Poly:
    """(1-c)^2(1+x)^2 + (1+c)^2(1-x)^2 + 4(1-c^2)(1-x^2) as a polynomial in c."""
    return (
        Poly((1, -1)) ** 2 * (1 + x) ** 2
        + Poly((1, 1)) ** 2 * (1 - x) ** 2
        + Poly((1, 0, -1)) * (4 * (1 - x * x))
    )


def _product_form(x: Fraction) -> BiPoly:
    """D(c) (1 + cz)(1 - cx - cz + xz) as a BiPoly in (z, c)."""
    D = _dtilde_poly(x)
    lin1 = BiPoly((Poly.const(1), Poly((0, 1))))  # 1 + c z
    lin2 = BiPoly((Poly((1, -x)), Poly((x, -1))))  # (1 - c x) + (x - c) z
    return lin1 * lin2 * D


@dataclass(frozen=True)
class EliminationCertificate:
    """At every root c of h, p(z) equals D(c)(1+cz)(1-cx+(x-c)z)/(1-c^2).

    The identity is checked as
    (1-c^2) p(z, c) - D(c)(1+cz)(1-cx+(x-c)z) = 0 modulo sqfree(h).
    Each factor on the right is positive for |c|, |z|, |x| < 1. The
    linear factor equals (1-c)(1+x) at z = 1 and (1+c)(1-x) at z = -1.
    """

    x: Fraction
    s: Fraction
    h: Poly
    residue: BiPoly
    h_at_x: Fraction
    descartes_changes: int

    def replay(self) -> bool:
        x, s = self.x, self.s
        h = explicit_h5(x, s)
        if h != self.h:
            return False
        if self.h_at_x != h(x) or h(x) != 3 * x * (1 - x * x) ** 2 or h(x) == 0:
            return False
        res = _elimination_residue(x, s, h)
        return res == self.residue and res.is_zero() and self.descartes_changes == descartes_sign_changes(mobius_substitute(h, 3))

    def to_dict(self) -> dict:
        return {
            "kind": "elimination-modulo-h",
            "x": rational_str(self.x),
            "s": rational_str(self.s),
            "h": [rational_str(a) for a in self.h.coeffs],
            "h_at_x": rational_str(self.h_at_x),
            "residue_is_zero": self.residue.is_zero(),
            "descartes_changes": self.descartes_changes,
        }


def _elimination_residue(x: Fraction, s: Fraction, h: Poly) -> BiPoly:
    p = closed_form_p5_bivariate(x, s)
    lhs = p * Poly((1, 0, -1)) - _product_form(x)
    return lhs.mod_c(h.sqfree())


def certify_positivity_at_root_dim5(data: AdmissibleData, root: IsolatingInterval | None = None) -> EliminationCertificate:
    if data.dimension != 5:
        raise ValueError("elimination certificate is dimension-5 only")
    x, s = data.x[0], data.s[0]
    h = explicit_h5(x, s)
    hx = h(x)
    if hx != 3 * x * (1 - x * x) ** 2 or hx == 0:
        raise AssertionError("h(x) guard failed: the root could coincide with c = x")
    res = _elimination_residue(x, s, h)
    if not res.is_zero():
        raise AssertionError("elimination identity fails modulo h")
    return EliminationCertificate(x, s, h, res, hx, descartes_sign_changes(mobius_substitute(h, 3)))


# ---------------------------------------------------------------------------
# dimension-7 positivity at the root: resultant regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionCertificate:
    """Positivity (or its failure) of p(., c) for every c in [lo, hi].

    On the closed interval the z-discriminant and both edge polynomials
    have no root. So p(., c) has a constant number of simple roots in
    (-1, 1) across the interval. The sample at the midpoint decides
    which: no roots (``status`` "positive") or a sign change, which
    refutes positivity at every c in the interval ("refuted").
    """

    status: str  # "positive" | "refuted" | "inconclusive"
    interval: IsolatingInterval
    p: BiPoly
    sample: PositivityCertificate | Refutation | None
    depth: int
    reason: str = ""

    def replay(self) -> bool:
        if self.status == "inconclusive":
            return True
        ok = _region_clear(self.p, self.interval.lo, self.interval.hi)
        if not ok:
            return False
        mid = self.interval.midpoint
        ev = certify_positive(self.p.at_c(mid))
        if self.status == "positive":
            return isinstance(ev, PositivityCertificate) and ev.replay()
        return isinstance(ev, Refutation) and ev.replay()

    def to_dict(self) -> dict:
        return {
            "kind": "resultant-region",
            "status": self.status,
            "interval": self.interval.to_dict(),
            "depth": self.depth,
            "reason": self.reason,
            "sample": None if self.sample is None else self.sample.to_dict(),
        }


def _region_clear(p: BiPoly, lo: Fraction, hi: Fraction) -> bool:
    polys = [resultant(p, p.derivative_z()), p.at_z(-1), p.at_z(1)]
    for q in polys:
        if q.is_zero() or q(lo) == 0 or q(hi) == 0:
            return False
        if count_roots(q, lo, hi) != 0:
            return False
    return True


def certify_positivity_at_root_dim7(
    data: AdmissibleData | BivariateP,
    h: Poly,
    root: IsolatingInterval,
    depth: int = REGION_DEPTH,
) -> RegionCertificate:
    bp = data if isinstance(data, BivariateP) else bivariate_p(data)
    p = bp.p
    hs = h.sqfree()
    lo, hi = root.lo, root.hi
    for step in range(depth + 1):
        iv = IsolatingInterval(lo, hi, root.multiplicity_hint)
        if _region_clear(p, lo, hi):
            ev = certify_positive(p.at_c(iv.midpoint))
            status = "positive" if isinstance(ev, PositivityCertificate) else "refuted"
            return RegionCertificate(status, iv, p, ev, step)
        if step == depth:
            break
        mid = (lo + hi) / 2
        if hs(mid) == 0:
            # the root is rational: shrink to a symmetric bracket around it
            w = (hi - lo) / 4
            lo, hi = mid - w, mid + w
        elif count_roots(hs, lo, mid) == 1:
            hi = mid
        else:
            lo = mid
    return RegionCertificate(
        "inconclusive", IsolatingInterval(lo, hi, root.multiplicity_hint), p, None, depth,
        f"critical polynomials still vanish near the root after {depth} halvings",
    )


# ---------------------------------------------------------------------------
# CSC rays
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CscRayCertificate:
    root: IsolatingInterval
    h: CscPolynomial
    extremality: EliminationCertificate | RegionCertificate
    quasi_regular: tuple[int, int] | None
    rational_root: Fraction | None

    @property
    def certified(self) -> bool:
        if isinstance(self.extremality, EliminationCertificate):
            return True
        return self.extremality.status == "positive"

    @property
    def status(self) -> str:
        if self.certified:
            return "csc"
        if isinstance(self.extremality, RegionCertificate) and self.extremality.status == "refuted":
            return "not-extremal-at-root"
        return "inconclusive"

    def replay(self) -> bool:
        h = self.h.h
        if not self.root.isolates(h):
            return False
        if self.rational_root is not None and h(self.rational_root) != 0:
            return False
        return self.extremality.replay()

    def to_dict(self) -> dict:
        return {
            "root": self.root.to_dict(),
            "status": self.status,
            "rational_root": None if self.rational_root is None else rational_str(self.rational_root),
            "w": None if self.quasi_regular is None else list(self.quasi_regular),
            "extremality": self.extremality.to_dict(),
        }


def _rational_root_in(h: Poly, iv: IsolatingInterval) -> Fraction | None:
    """Exact rational root of h inside iv, by the rational root theorem."""
    ints = h.sqfree().primitive().int_coeffs()
    k = next(i for i, a in enumerate(ints) if a)
    if k and iv.lo < 0 < iv.hi:
        return Fraction(0)
    a0, an = ints[k], ints[-1]
    q = Poly(ints[k:])
    for den in _divisors(abs(an)):
        for num in _divisors(abs(a0)):
            for r in (Fraction(num, den), Fraction(-num, den)):
                if iv.lo < r < iv.hi and q(r) == 0:
                    return r
    return None


def find_csc_rays(spec: FiberJoinSpec | AdmissibleData, tol: Fraction = Fraction(1, 2**40)) -> list[CscRayCertificate]:
    """All roots of h in (-1, 1), each with positivity evidence for p at that root."""
    data = spec if isinstance(spec, AdmissibleData) else validate(spec)
    H = build_h(data)
    roots = isolate_roots(H.h, -1, 1, tol=tol)
    out = []
    bp = bivariate_p(data) if data.dimension == 7 else None
    for iv in roots:
        r = _rational_root_in(H.h, iv)
        w = c_to_w(r) if r is not None else None
        if data.dimension == 5:
            ext = certify_positivity_at_root_dim5(data, iv)
        else:
            coarse = _coarsen(H.h, iv)
            ext = certify_positivity_at_root_dim7(bp, H.h, coarse)
        out.append(CscRayCertificate(iv, H, ext, w, r))
    return out


def _coarsen(h: Poly, iv: IsolatingInterval, width: Fraction = Fraction(1, 64)) -> IsolatingInterval:
    """Widen an isolating interval while it still isolates the same single root."""
    hs = h.sqfree()
    lo, hi = iv.lo, iv.hi
    step = width
    while step > iv.hi - iv.lo:
        mid = iv.midpoint
        a = max(Fraction(-1), mid - step / 2)
        b = min(Fraction(1), mid + step / 2)
        if a > -1 and b < 1 and hs(a) != 0 and hs(b) != 0 and count_roots(hs, a, b) == 1:
            lo, hi = a, b
            break
        step /= 2
    return IsolatingInterval(lo, hi, iv.multiplicity_hint)


# ---------------------------------------------------------------------------
# CP1 x CP1: CR-twist polynomial and weight quintic
# ---------------------------------------------------------------------------


def _k(K: KMatrix) -> tuple[Fraction, Fraction, Fraction, Fraction]:
    if K.ncols != 2:
        raise SpecError("weight-form CSC equations need a 2x2 K")
    for i in (1, 2):
        if K.k(i, 1) == K.k(i, 2):
            raise SpecError(f"degenerate K: k^{i}_1 = k^{i}_2")
    for row in K.rows:
        for v in row:
            if v <= 0:
                raise SpecError("K entries must be positive")
    return K.k(1, 1), K.k(2, 1), K.k(1, 2), K.k(2, 2)


def f_CR(K: KMatrix) -> Poly:
    """The CR-twist CSC polynomial f_CR(c) for a regular quotient over CP1 x CP1."""
    a, b, cc, d = _k(K)  # k^1_1, k^2_1, k^1_2, k^2_2
    c = Poly.x()
    cm, cp = c - 1, c + 1
    return (
        c * (c * c - 1) ** 2 * (18 * a * b * cc * d)
        + cm**5 * (3 * a * a * b * b)
        + cp**5 * (3 * cc * cc * d * d)
        + cp * cm**4 * (a * b * (a + b - 3 * b * cc - 3 * a * d))
        + cp**2 * cm**3 * (b * b * cc + a * a * d - 4 * a * b * cc - 4 * a * b * d)
        + cp**3 * cm**2 * (a * d * d + b * cc * cc - 4 * b * cc * d - 4 * a * cc * d)
        + cp**4 * cm * (cc * d * (cc + d - 3 * a * d - 3 * b * cc))
    )


def csc_weight_quintic(K: KMatrix) -> tuple[Fraction, ...]:
    """Coefficients of w1^(5-i) w2^i, i = 0..5.

    Asserts that f_CR((w1-w2)/(w1+w2)) (w1+w2)^5 = -32 times this form.
    """
    a, b, cc, d = _k(K)
    q = (
        -3 * cc * cc * d * d,
        cc * d * (cc + d - 3 * b * cc - 3 * a * d),
        4 * a * cc * d + 4 * b * cc * d - 9 * a * b * cc * d - b * cc * cc - a * d * d,
        9 * a * b * cc * d + b * b * cc + a * a * d - 4 * a * b * d - 4 * a * b * cc,
        a * b * (3 * b * cc + 3 * a * d - a - b),
        3 * a * a * b * b,
    )
    # dehomogenize at w2 = 1, t = w1: c = (t-1)/(t+1)
    f = f_CR(K)
    t = Poly.x()
    sub = Poly()
    for i, fi in enumerate(f.coeffs):
        sub = sub + (t - 1) ** i * (t + 1) ** (5 - i) * fi
    quint = Poly(tuple(reversed(q)))  # coefficient of t^(5-i) is q[i]
    if sub != quint * -32:
        raise AssertionError("CR-twist polynomial and weight quintic disagree")
    return q


def quintic_value(q: Sequence[Fraction], w: Sequence[int]) -> Fraction:
    w1, w2 = w
    return sum((qi * Fraction(w1) ** (5 - i) * Fraction(w2) ** i for i, qi in enumerate(q)), Fraction(0))


def csc_in_x(w: Sequence[int], n1, n2, x1, x2) -> Fraction:
    """Residual of the quotient-side CSC equation for classes (x1, x2) on the log pair."""
    n1, n2, x1, x2 = (Fraction(v) for v in (n1, n2, x1, x2))
    if n1 == 0 or n2 == 0:
        raise ValueError("n_i must be nonzero")
    for x, n in ((x1, n1), (x2, n2)):
        if not (0 < abs(x) < 1) or x * n <= 0:
            raise ValueError(f"need 0 < |x| < 1 and x n > 0, got x={x}, n={n}")
    w1, w2 = (Fraction(v) for v in w)
    return (
        9 * (w1 - w2) * n1 * n2
        - 6 * (w1 + w2) * n1 * n2 * (x1 + x2)
        + 6 * (w1 - w2) * n1 * n2 * x1 * x2
        + 3 * n2 * (4 * w1 * w2 - n1 * (w1 - w2)) * x1**2
        + 3 * n1 * (4 * w1 * w2 - n2 * (w1 - w2)) * x2**2
        - (4 * w1 * w2 * (n1 + n2) - 3 * (w1 - w2) * n1 * n2) * x1**2 * x2**2
    )


@dataclass(frozen=True)
class EquivalenceReport:
    """Exact comparison of the weight quintic with the quotient-side equation.

    With n_i = w2 k^i_1 - w1 k^i_2 and y_i = w2 k^i_1 + w1 k^i_2, the
    cleared residual y1^2 y2^2 R(w) is divisible by the quintic Q(w). The
    quotient is -8 n1 n2.
    """

    K: KMatrix
    quintic: tuple[Fraction, ...]
    cleared: Poly
    factor: Poly
    holds: bool
    samples: tuple[tuple[tuple[int, int], Fraction, Fraction, Fraction | None], ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "K": self.K.to_json(),
            "quintic": [rational_str(a) for a in self.quintic],
            "factor_t": [rational_str(a) for a in self.factor.coeffs],
            "holds": self.holds,
            "samples": [
                {
                    "w": list(w),
                    "residual": rational_str(r),
                    "quintic": rational_str(qv),
                    "factor": None if f is None else rational_str(f),
                }
                for w, r, qv, f in self.samples
            ],
        }


def check_equivalence(spec: FiberJoinSpec | KMatrix, weights: Sequence[tuple[int, int]] = ()) -> EquivalenceReport:
    if isinstance(spec, FiberJoinSpec):
        check_spec(spec)
        K = spec.K
    else:
        K = spec
    a, b, cc, d = _k(K)
    q = csc_weight_quintic(K)
    t = Poly.x()  # w1 = t, w2 = 1
    n1, n2 = Poly((a, -cc)), Poly((b, -d))
    y1, y2 = Poly((a, cc)), Poly((b, d))
    wm, wp, ww = t - 1, t + 1, t
    cleared = (
        n1 * n2 * wm * 9 * (y1 * y2) ** 2
        - wp * n1 * n2 * (n1 * y1 * y2**2 + n2 * y2 * y1**2) * 6
        + wm * n1 * n2 * n1 * n2 * y1 * y2 * 6
        + n2 * (ww * 4 - n1 * wm) * n1 * n1 * y2 * y2 * 3
        + n1 * (ww * 4 - n2 * wm) * n2 * n2 * y1 * y1 * 3
        - ((n1 + n2) * ww * 4 - n1 * n2 * wm * 3) * n1 * n1 * n2 * n2
    )
    quint = Poly(tuple(reversed(q)))
    factor, rem = divmod(cleared, quint)
    holds = rem.is_zero() and factor == n1 * n2 * -8
    samples = []
    for w in weights:
        w1, w2 = w
        n1w, n2w = w2 * a - w1 * cc, w2 * b - w1 * d
        if n1w == 0 or n2w == 0:
            continue
        x1w, x2w = n1w / (w2 * a + w1 * cc), n2w / (w2 * b + w1 * d)
        r = csc_in_x(w, n1w, n2w, x1w, x2w)
        qv = quintic_value(q, w)
        f = r / qv if qv != 0 else None
        expect = Fraction(-8) * n1w * n2w / ((w2 * a + w1 * cc) ** 2 * (w2 * b + w1 * d) ** 2)
        if (f is None and r != 0) or (f is not None and f != expect):
            holds = False
        samples.append((tuple(w), r, qv, f))
    return EquivalenceReport(K, q, cleared, factor, holds, tuple(samples))
