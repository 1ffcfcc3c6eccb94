"""Moment integrals over [-1, 1] against powers of (ct + 1).

Two families are supported, one per fiber-join dimension:

* dimension 5: weight polynomial ``1 + x t`` and source term ``x s``;
* dimension 7: weight ``(1 + x1 t)(1 + x2 t)`` and source
  ``x1 s1 (1 + x2 t) + x2 s2 (1 + x1 t)``.

``alpha`` integrates ``t^r * weight / (ct+1)^m``; ``beta`` integrates
``t^r * source / (ct+1)^m`` and adds the two boundary contributions.

Every integral is evaluated exactly through the substitution u = 1 + ct and a
term-by-term antiderivative in u. A ``u^-1`` term would produce a logarithm;
the admissible (r, m) pairs rule that out, and the code asserts it.

The symbolic variants return functions of c whose only possible poles sit at
c = 0 and c = +-1, so they are carried in :class:`PoleRat`, which never needs a
polynomial gcd during arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Union

from .exactalg import Poly, RatFunc

__all__ = [
    "IntegralSpec5",
    "IntegralSpec7",
    "IntegralSpec",
    "LogTermError",
    "PoleRat",
    "alpha",
    "beta",
    "alpha_symbolic",
    "beta_symbolic",
    "moment",
    "moment_symbolic",
    "weight_poly",
    "source_poly",
]


class LogTermError(AssertionError):
    """A u^-1 term appeared in an antiderivative (would integrate to a log)."""


def _check_x(name: str, v: Fraction) -> Fraction:
    v = Fraction(v)
    if not (0 < abs(v) < 1):
        raise ValueError(f"{name} must satisfy 0 < |{name}| < 1, got {v}")
    return v


@dataclass(frozen=True)
class IntegralSpec5:
    """Dimension-5 moment: ``t^r (1 + x t) / (ct+1)^m`` (alpha) or ``t^r x s / (ct+1)^m`` (beta)."""

    r: int
    m: int
    x: Fraction
    s: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "x", _check_x("x", self.x))
        object.__setattr__(self, "s", Fraction(self.s))
        _check_rm(self.r, self.m, (3, 4, 5))

    @property
    def weight(self) -> Poly:
        return Poly((1, self.x))

    @property
    def source(self) -> Poly:
        return Poly((self.x * self.s,))


@dataclass(frozen=True)
class IntegralSpec7:
    """Dimension-7 moment with weight ``(1 + x1 t)(1 + x2 t)``."""

    r: int
    m: int
    x1: Fraction
    x2: Fraction
    s1: Fraction = Fraction(0)
    s2: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "x1", _check_x("x1", self.x1))
        object.__setattr__(self, "x2", _check_x("x2", self.x2))
        object.__setattr__(self, "s1", Fraction(self.s1))
        object.__setattr__(self, "s2", Fraction(self.s2))
        _check_rm(self.r, self.m, (4, 5, 6))

    @property
    def weight(self) -> Poly:
        return Poly((1, self.x1)) * Poly((1, self.x2))

    @property
    def source(self) -> Poly:
        x1, x2, s1, s2 = self.x1, self.x2, self.s1, self.s2
        return Poly((x1 * s1, x1 * s1 * x2)) + Poly((x2 * s2, x2 * s2 * x1))


IntegralSpec = Union[IntegralSpec5, IntegralSpec7]


def _check_rm(r: int, m: int, weights: tuple[int, ...]) -> None:
    if not isinstance(r, int) or r not in (0, 1, 2):
        raise ValueError(f"r must be 0, 1 or 2, got {r!r}")
    if m not in weights:
        raise ValueError(f"weight m must be one of {weights}, got {m!r}")
    if r > m - 2:
        raise ValueError(f"(r={r}, m={m}) would produce a logarithmic antiderivative")


def weight_poly(spec: IntegralSpec) -> Poly:
    return spec.weight


def source_poly(spec: IntegralSpec) -> Poly:
    return spec.source


def _check_c(c) -> Fraction:
    c = Fraction(c)
    if not -1 < c < 1:
        raise ValueError(f"c must lie in (-1, 1), got {c}")
    return c


# ---------------------------------------------------------------------------
# pointwise evaluation
# ---------------------------------------------------------------------------


def moment(g: Poly, m: int, c) -> Fraction:
    """Exact value of the integral of g(t) / (ct+1)^m over [-1, 1].

    Requires deg g <= m - 2 when c != 0.
    """
    c = _check_c(c)
    if g.is_zero():
        return Fraction(0)
    if c == 0:
        prim = g.antiderivative()
        return prim(1) - prim(-1)
    # g(t) with t = (u-1)/c, expanded in powers of u
    gu = g.compose(Poly((Fraction(-1) / c, Fraction(1) / c)))
    total = Fraction(0)
    lo, hi = 1 - c, 1 + c
    for k, a in enumerate(gu.coeffs):
        if a == 0:
            continue
        e = k - m + 1
        if e == 0:
            raise LogTermError(f"u^-1 term in moment of degree {g.degree} against weight {m}")
        total += a * (hi**e - lo**e) / e
    return total / c


def _integrand(spec: IntegralSpec, factor: Poly) -> Poly:
    g = Poly.monomial(spec.r) * factor
    # degree above m - 2 would leave a u^-1 term, i.e. a logarithm
    if g.degree > spec.m - 2:
        raise ValueError(f"(r={spec.r}, m={spec.m}) would produce a logarithmic antiderivative")
    return g


def alpha(spec: IntegralSpec, c) -> Fraction:
    """Integral of ``t^r * weight(t) / (ct+1)^m`` over [-1, 1]."""
    return moment(_integrand(spec, spec.weight), spec.m, c)


def _boundary(spec: IntegralSpec, c: Fraction) -> Fraction:
    w = spec.weight
    return (-1) ** spec.r * w(-1) / (1 - c) ** spec.m + w(1) / (1 + c) ** spec.m


def beta(spec: IntegralSpec, c) -> Fraction:
    """Source moment plus the boundary terms ``(-1)^r w(-1)/(1-c)^m + w(1)/(1+c)^m``."""
    c = _check_c(c)
    return moment(_integrand(spec, spec.source), spec.m, c) + _boundary(spec, c)


# ---------------------------------------------------------------------------
# symbolic evaluation
# ---------------------------------------------------------------------------

_ONE_MINUS = Poly((1, -1))
_ONE_PLUS = Poly((1, 1))
_C = Poly((0, 1))


class PoleRat:
    """``num(c) / (c^e0 (1-c)^e1 (1+c)^e2)`` with nonnegative exponents.

    Arithmetic never takes a gcd; :meth:`reduce` strips common factors of the
    three special forms only.
    """

    __slots__ = ("num", "e0", "e1", "e2")

    def __init__(self, num: Poly, e0: int = 0, e1: int = 0, e2: int = 0):
        if min(e0, e1, e2) < 0:
            raise ValueError("negative pole order")
        self.num = num if isinstance(num, Poly) else Poly.const(num)
        self.e0, self.e1, self.e2 = e0, e1, e2

    @classmethod
    def const(cls, a) -> PoleRat:
        return cls(Poly.const(a))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def _lift(self, e0: int, e1: int, e2: int) -> Poly:
        n = self.num
        if e0 > self.e0:
            n = Poly([0] * (e0 - self.e0) + list(n.coeffs))
        if e1 > self.e1:
            n = n * _ONE_MINUS ** (e1 - self.e1)
        if e2 > self.e2:
            n = n * _ONE_PLUS ** (e2 - self.e2)
        return n

    def __add__(self, other) -> PoleRat:
        if not isinstance(other, PoleRat):
            other = PoleRat.const(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        e0, e1, e2 = max(self.e0, other.e0), max(self.e1, other.e1), max(self.e2, other.e2)
        return PoleRat(self._lift(e0, e1, e2) + other._lift(e0, e1, e2), e0, e1, e2)

    __radd__ = __add__

    def __neg__(self) -> PoleRat:
        return PoleRat(-self.num, self.e0, self.e1, self.e2)

    def __sub__(self, other) -> PoleRat:
        if not isinstance(other, PoleRat):
            other = PoleRat.const(other)
        return self + (-other)

    def __mul__(self, other) -> PoleRat:
        if isinstance(other, (int, Fraction)):
            return PoleRat(self.num * other, self.e0, self.e1, self.e2)
        if isinstance(other, Poly):
            return PoleRat(self.num * other, self.e0, self.e1, self.e2)
        return PoleRat(self.num * other.num, self.e0 + other.e0, self.e1 + other.e1, self.e2 + other.e2)

    __rmul__ = __mul__

    def reduce(self) -> PoleRat:
        n, e0, e1, e2 = self.num, self.e0, self.e1, self.e2
        if n.is_zero():
            return PoleRat(n)
        while e0 and n[0] == 0:
            n = Poly(n.coeffs[1:])
            e0 -= 1
        while e1 and n(1) == 0:
            n = n.exact_div(_ONE_MINUS)
            e1 -= 1
        while e2 and n(-1) == 0:
            n = n.exact_div(_ONE_PLUS)
            e2 -= 1
        return PoleRat(n, e0, e1, e2)

    def denominator(self) -> Poly:
        return Poly.monomial(self.e0) * _ONE_MINUS**self.e1 * _ONE_PLUS**self.e2

    def to_ratfunc(self) -> RatFunc:
        return RatFunc(self.num, self.denominator())

    def __call__(self, c) -> Fraction:
        c = Fraction(c)
        d = c**self.e0 * (1 - c) ** self.e1 * (1 + c) ** self.e2
        if d == 0:
            raise ZeroDivisionError(f"pole at c = {c}")
        return self.num(c) / d

    def __repr__(self) -> str:
        return f"PoleRat({self.num} / c^{self.e0}(1-c)^{self.e1}(1+c)^{self.e2})"


def _upow(e: int, at_plus: bool) -> PoleRat:
    """(1 +- c)^e as a PoleRat, for any integer e."""
    base = _ONE_PLUS if at_plus else _ONE_MINUS
    if e >= 0:
        return PoleRat(base**e)
    return PoleRat(Poly.const(1), 0, 0 if at_plus else -e, -e if at_plus else 0)


def moment_symbolic(g: Poly, m: int) -> PoleRat:
    """Integral of g(t)/(ct+1)^m over [-1, 1] as a function of c.

    The pole at c = 0 of the term-by-term formula cancels; the result has
    poles only at c = +-1.
    """
    if g.is_zero():
        return PoleRat(Poly())
    total = PoleRat(Poly())
    for j, a in enumerate(g.coeffs):
        if a == 0:
            continue
        # t^j = c^-j (u-1)^j; dt = du / c
        for i in range(j + 1):
            e = i - m + 1
            if e == 0:
                raise LogTermError(f"u^-1 term in moment of degree {g.degree} against weight {m}")
            coef = a * comb(j, i) * (-1) ** (j - i) / Fraction(e)
            diff = _upow(e, True) - _upow(e, False)
            total = total + PoleRat(diff.num * coef, diff.e0 + j + 1, diff.e1, diff.e2)
    out = total.reduce()
    if out.e0:
        raise ArithmeticError("moment retained a pole at c = 0")
    return out


def _boundary_symbolic(spec: IntegralSpec) -> PoleRat:
    w = spec.weight
    lo = PoleRat(Poly.const((-1) ** spec.r * w(-1)), 0, spec.m, 0)
    hi = PoleRat(Poly.const(w(1)), 0, 0, spec.m)
    return lo + hi


def alpha_pole(spec: IntegralSpec) -> PoleRat:
    return moment_symbolic(_integrand(spec, spec.weight), spec.m)


def beta_pole(spec: IntegralSpec) -> PoleRat:
    return (moment_symbolic(_integrand(spec, spec.source), spec.m) + _boundary_symbolic(spec)).reduce()


def alpha_symbolic(spec: IntegralSpec) -> RatFunc:
    """alpha as a reduced rational function of c."""
    return alpha_pole(spec).to_ratfunc()


def beta_symbolic(spec: IntegralSpec) -> RatFunc:
    """beta as a reduced rational function of c."""
    return beta_pole(spec).to_ratfunc()
