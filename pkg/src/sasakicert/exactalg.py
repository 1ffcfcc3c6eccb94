"""Exact rational polynomial algebra.

Univariate polynomials over Q, rational functions, Sturm sequences,
Descartes' rule, the Moebius substitution c = (1-u)/(1+u), certified
real-root isolation and positivity certificates on open intervals.
A small bivariate type (polynomials in z whose coefficients are
polynomials in c) supports resultants and the two-variable checks.

Everything is exact; there is no floating point anywhere in this module.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, gcd, lcm
from typing import Iterable, Sequence

__all__ = [
    "Rational",
    "parse_rational",
    "rational_str",
    "Poly",
    "RatFunc",
    "BiPoly",
    "BoundaryRootError",
    "IsolatingInterval",
    "PositivityCertificate",
    "Refutation",
    "DEFAULT_TOLERANCE",
    "poly_arith",
    "sturm_sequence",
    "sturm_count",
    "count_roots",
    "isolate_roots",
    "descartes_sign_changes",
    "mobius_substitute",
    "certify_positive",
    "simplest_rational_between",
    "resultant",
    "subresultant",
    "sign_at_root",
]

Rational = Fraction

DEFAULT_TOLERANCE = Fraction(1, 2**40)

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"3"``, ``"-7/2"`` (or pass through ints/Fractions) exactly.

    Decimal and exponent notations are rejected so that no binary
    floating-point value can sneak in through a config file.
    """
    if isinstance(text, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected a rational string like '7/2', got {text!r}")
    s = text.strip()
    if not _RATIONAL_RE.match(s):
        raise ValueError(f"not an exact rational: {text!r}")
    num, _, den = s.partition("/")
    if den and int(den) == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def rational_str(q: Fraction | int) -> str:
    """Canonical ``p/q`` string; integers are written ``p/1``."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _sign(q) -> int:
    return (q > 0) - (q < 0)


class BoundaryRootError(ValueError):
    """The polynomial vanishes at an interval endpoint.

    Callers are expected to deflate boundary roots before counting.
    """

    def __init__(self, point: Fraction):
        super().__init__(f"polynomial vanishes at interval endpoint {point}")
        self.point = point


class Poly:
    """Dense univariate polynomial with Fraction coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("Poly is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def x(cls) -> Poly:
        return cls((0, 1))

    @classmethod
    def const(cls, a) -> Poly:
        return cls((a,))

    @classmethod
    def monomial(cls, k: int, a=1) -> Poly:
        return cls([0] * k + [a])

    @classmethod
    def from_roots(cls, roots: Iterable) -> Poly:
        p = cls((1,))
        for r in roots:
            p = p * cls((-Fraction(r), 1))
        return p

    # -- basic properties ----------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly((other,)).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            a = self.coeffs[k]
            if a == 0:
                continue
            mono = "" if k == 0 else ("z" if k == 1 else f"z^{k}")
            if mono and abs(a) == 1:
                body = mono
            else:
                body = f"{abs(a)}" + (f"*{mono}" if mono else "")
            terms.append(("- " if a < 0 else "+ ") + body)
        out = " ".join(terms)
        return out[2:] if out.startswith("+ ") else "-" + out[2:]

    # -- arithmetic -------------------------------------------------------
    @staticmethod
    def _coerce(other) -> Poly | None:
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly((other,))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly([a[i] + b[i] if i < len(b) else a[i] for i in range(len(a))])

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly([-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly([a * other for a in self.coeffs])
        if not isinstance(other, Poly):
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("polynomial divided by zero scalar")
            return Poly([a / other for a in self.coeffs])
        return NotImplemented

    def __pow__(self, n: int) -> Poly:
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result, base = Poly((1,)), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other) -> tuple[Poly, Poly]:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        db = o.degree
        inv = 1 / o.lc
        if len(rem) - 1 < db:
            return Poly(), self
        quot = [Fraction(0)] * (len(rem) - db)
        for k in range(len(rem) - 1 - db, -1, -1):
            q = rem[k + db] * inv
            quot[k] = q
            if q:
                for j, bj in enumerate(o.coeffs):
                    rem[k + j] -= q * bj
        return Poly(quot), Poly(rem[:db])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other: Poly) -> Poly:
        q, r = divmod(self, other)
        if r:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    # -- evaluation / calculus -----------------------------------------
    def __call__(self, x):
        acc = Fraction(0) if not isinstance(x, Poly) else Poly()
        for a in reversed(self.coeffs):
            acc = acc * x + a
        return acc

    def derivative(self) -> Poly:
        return Poly([k * a for k, a in enumerate(self.coeffs)][1:])

    def antiderivative(self) -> Poly:
        return Poly([0] + [a / (k + 1) for k, a in enumerate(self.coeffs)])

    def compose(self, inner: Poly) -> Poly:
        return self(inner)

    def scale_var(self, a) -> Poly:
        """p(a*z)."""
        a = Fraction(a)
        return Poly([c * a**k for k, c in enumerate(self.coeffs)])

    def shift(self, a) -> Poly:
        """p(z + a)."""
        return self.compose(Poly((a, 1)))

    def reflect(self) -> Poly:
        """p(-z)."""
        return self.scale_var(-1)

    def monic(self) -> Poly:
        if self.is_zero():
            return self
        return self / self.lc

    def primitive(self) -> Poly:
        """Positive rational multiple with coprime integer coefficients."""
        if self.is_zero():
            return self
        den = lcm(*(a.denominator for a in self.coeffs))
        ints = [int(a * den) for a in self.coeffs]
        g = gcd(*ints)
        return Poly([Fraction(v, g) for v in ints])

    def int_coeffs(self) -> list[int]:
        """Coefficients of :meth:`primitive` as Python ints."""
        return [int(a) for a in self.primitive().coeffs]

    def sqfree(self) -> Poly:
        """Square-free part (monic)."""
        if self.degree < 1:
            return self.monic()
        g = Poly.gcd(self, self.derivative())
        return (self // g).monic()

    def sqfree_decomposition(self) -> list[tuple[Poly, int]]:
        """Yun's algorithm: self = lc * prod f_i^i with f_i square-free, coprime."""
        if self.degree < 1:
            return []
        out = []
        a = self.monic()
        b = a.derivative()
        c = Poly.gcd(a, b)
        w = a // c
        y = b // c
        i = 1
        while w.degree > 0:
            z = y - w.derivative()
            g = Poly.gcd(w, z)
            if g.degree > 0:
                out.append((g, i))
            w = w // g
            y = z // g
            i += 1
        return out

    @staticmethod
    def gcd(a: Poly, b: Poly) -> Poly:
        """Monic gcd; gcd(0, 0) = 0."""
        while b:
            a, b = b, a % b
            if b:
                b = b.primitive()
        return a.monic()

    def multiplicity_of_root(self, r) -> int:
        """Order of vanishing at the rational point r."""
        if self.is_zero():
            raise ValueError("zero polynomial")
        k, p, lin = 0, self, Poly((-Fraction(r), 1))
        while p(r) == 0:
            p = p.exact_div(lin)
            k += 1
        return k


def poly_arith(a: Poly, b: Poly | None, op: str):
    """Dispatch for the basic operations by name."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "divrem":
        return divmod(a, b)
    if op == "gcd":
        return Poly.gcd(a, b)
    if op == "derivative":
        return a.derivative()
    if op == "compose":
        return a.compose(b)
    raise ValueError(f"unknown polynomial operation {op!r}")


class RatFunc:
    """Quotient of polynomials, kept gcd-reduced with a monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly | int | Fraction, den: Poly | int | Fraction = 1, *, reduced: bool = False):
        num = num if isinstance(num, Poly) else Poly.const(num)
        den = den if isinstance(den, Poly) else Poly.const(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if not reduced:
            g = Poly.gcd(num, den)
            if g.degree > 0:
                num, den = num // g, den // g
            lc = den.lc
            num, den = num / lc, den / lc
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RatFunc is immutable")

    @staticmethod
    def _coerce(other):
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, Poly):
            return RatFunc(other, 1, reduced=True)
        if isinstance(other, (int, Fraction)):
            return RatFunc(Poly.const(other), 1, reduced=True)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, reduced=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __call__(self, c) -> Fraction:
        d = self.den(c)
        if d == 0:
            raise ZeroDivisionError(f"pole of rational function at {c}")
        return self.num(c) / d

    def is_polynomial(self) -> bool:
        return self.den.degree == 0

    def __repr__(self):
        return f"RatFunc(({self.num}) / ({self.den}))"


@dataclass(frozen=True)
class BiPoly:
    """Polynomial in z whose coefficients are polynomials in c.

    ``coeffs[i]`` is the Poly in c multiplying z**i.
    """

    coeffs: tuple[Poly, ...]

    def __post_init__(self):
        cs = list(self.coeffs)
        while cs and cs[-1].is_zero():
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_dict(cls, terms: dict[tuple[int, int], Fraction]) -> BiPoly:
        """Build from ``{(z_power, c_power): coeff}``."""
        if not terms:
            return cls(())
        dz = max(i for i, _ in terms)
        rows = []
        for i in range(dz + 1):
            row = {j: a for (ii, j), a in terms.items() if ii == i}
            dc = max(row, default=-1)
            rows.append(Poly([row.get(j, 0) for j in range(dc + 1)]))
        return cls(tuple(rows))

    def to_dict(self) -> dict[tuple[int, int], Fraction]:
        return {(i, j): a for i, p in enumerate(self.coeffs) for j, a in enumerate(p.coeffs) if a != 0}

    @property
    def degree_z(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree_c(self) -> int:
        return max((p.degree for p in self.coeffs), default=-1)

    def is_zero(self) -> bool:
        return not self.coeffs

    def at_c(self, c) -> Poly:
        return Poly([p(c) for p in self.coeffs])

    def at_z(self, z) -> Poly:
        z = Fraction(z)
        acc = Poly()
        for p in reversed(self.coeffs):
            acc = acc * z + p
        return acc

    def __call__(self, z, c) -> Fraction:
        return self.at_c(c)(z)

    def __add__(self, other: BiPoly) -> BiPoly:
        n = max(len(self.coeffs), len(other.coeffs))
        get = lambda cs, i: cs[i] if i < len(cs) else Poly()
        return BiPoly(tuple(get(self.coeffs, i) + get(other.coeffs, i) for i in range(n)))

    def __neg__(self) -> BiPoly:
        return BiPoly(tuple(-p for p in self.coeffs))

    def __sub__(self, other: BiPoly) -> BiPoly:
        return self + (-other)

    def __mul__(self, other) -> BiPoly:
        if isinstance(other, (int, Fraction, Poly)):
            return BiPoly(tuple(p * other for p in self.coeffs))
        if not isinstance(other, BiPoly):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return BiPoly(())
        out = [Poly()] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return BiPoly(tuple(out))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, BiPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def derivative_z(self) -> BiPoly:
        return BiPoly(tuple(p * k for k, p in enumerate(self.coeffs))[1:])

    def compose_z(self, inner: BiPoly) -> BiPoly:
        acc = BiPoly(())
        for p in reversed(self.coeffs):
            acc = acc * inner + BiPoly((p,))
        return acc

    def taylor_z(self, z0) -> list[Poly]:
        """Coefficients in powers of (z - z0)."""
        return list(self.compose_z(BiPoly((Poly.const(z0), Poly.const(1)))).coeffs)

    def swap(self) -> BiPoly:
        """Exchange the roles of z and c."""
        return BiPoly.from_dict({(j, i): a for (i, j), a in self.to_dict().items()})

    def mod_c(self, m: Poly) -> BiPoly:
        """Reduce every coefficient modulo the polynomial m(c)."""
        return BiPoly(tuple(p % m for p in self.coeffs))


# ---------------------------------------------------------------------------
# Sturm sequences and root counting
# ---------------------------------------------------------------------------

_NEG_INF = "-inf"
_POS_INF = "+inf"


def _int_prem_seq(p: list[int], q: list[int]) -> list[list[int]]:
    """Sturm sequence with integer coefficients (positive rescalings only)."""
    seq = [p, q]
    while len(seq[-1]) > 1:
        a, b = seq[-2], seq[-1]
        lb = b[-1]
        r = list(a)
        mults = 0
        while len(r) >= len(b):
            lr = r[-1]
            shift = len(r) - len(b)
            r = [v * lb for v in r]
            mults += 1
            for j, bj in enumerate(b):
                r[shift + j] -= lr * bj
            r.pop()
            while r and r[-1] == 0:
                r.pop()
        if not r:
            break
        # r = lb**mults * rem(a, b); the Sturm step wants -rem up to a positive factor
        flip = -1 if (lb < 0 and mults % 2) else 1
        nxt = [-flip * v for v in r]
        g = gcd(*nxt)
        seq.append([v // g for v in nxt])
    return seq


def _eval_int(p: list[int], x) -> Fraction | int:
    if x == _POS_INF:
        return _sign(p[-1]) if p else 0
    if x == _NEG_INF:
        return (_sign(p[-1]) * (-1) ** (len(p) - 1)) if p else 0
    acc = 0
    for a in reversed(p):
        acc = acc * x + a
    return acc


def _variations(values: Iterable) -> int:
    signs = [_sign(v) for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_sequence(p: Poly) -> list[Poly]:
    """Sturm sequence p0 = p, p1 = p', p_{k+1} = -rem(p_{k-1}, p_k), up to positive scalars."""
    if p.is_zero():
        raise ValueError("Sturm sequence of the zero polynomial")
    if p.degree == 0:
        return [p.primitive()]
    base = p.primitive()
    ints = _int_prem_seq(base.int_coeffs(), base.derivative().int_coeffs())
    return [Poly(v) for v in ints]


def _sturm_variations(seq_ints: list[list[int]], x) -> int:
    return _variations(_eval_int(s, x) for s in seq_ints)


def _bound(x):
    if x is None:
        return None
    return Fraction(x)


def sturm_count(p: Poly, lo, hi) -> int:
    """Number of distinct real roots of p in the open interval (lo, hi).

    ``lo``/``hi`` may be ``None`` for -infinity/+infinity.
    Raises :class:`BoundaryRootError` if p vanishes at a finite endpoint.
    """
    if p.is_zero():
        raise ValueError("root count of the zero polynomial")
    lo, hi = _bound(lo), _bound(hi)
    if lo is not None and hi is not None and not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    for e in (lo, hi):
        if e is not None and p(e) == 0:
            raise BoundaryRootError(e)
    if p.degree == 0:
        return 0
    q = p.sqfree()
    seq = [s.int_coeffs() for s in sturm_sequence(q)]
    va = _sturm_variations(seq, _NEG_INF if lo is None else lo)
    vb = _sturm_variations(seq, _POS_INF if hi is None else hi)
    return va - vb


def count_roots(p: Poly, lo, hi) -> int:
    """Distinct roots in the open interval, tolerating roots at the endpoints."""
    lo, hi = _bound(lo), _bound(hi)
    q = p
    for e in (lo, hi):
        if e is not None:
            while q.degree > 0 and q(e) == 0:
                q = q.exact_div(Poly((-e, 1)))
    return sturm_count(q, lo, hi)


def descartes_sign_changes(p: Poly) -> int:
    """Sign variations in the coefficient sequence (bound on positive roots)."""
    return _variations(p.coeffs)


def simplest_rational_between(a: Fraction, b: Fraction) -> Fraction:
    """Rational with the smallest denominator in the open interval (a, b)."""
    a, b = Fraction(a), Fraction(b)
    if not a < b:
        raise ValueError("need a < b")
    if a < 0 < b:
        return Fraction(0)
    if b <= 0:
        return -simplest_rational_between(-b, -a)
    fl = a.numerator // a.denominator
    if fl + 1 < b:
        return Fraction(fl + 1)
    if Fraction(fl) == a and fl + 1 < b:
        return Fraction(fl + 1)
    # a and b share the integer part fl (b may equal fl+1)
    fa, fb = a - fl, b - fl
    if fa == 0:
        # interval (fl, fl + fb): need 1/n < fb
        n = int(1 / fb) + 1
        return fl + Fraction(1, n)
    inner = simplest_rational_between(1 / fb, 1 / fa)
    return fl + 1 / inner


@dataclass(frozen=True)
class IsolatingInterval:
    """Open interval (lo, hi) containing exactly one distinct root of a polynomial."""

    lo: Fraction
    hi: Fraction
    multiplicity_hint: int = 1

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("isolating interval needs lo < hi")
        if self.multiplicity_hint < 1:
            raise ValueError("multiplicity must be positive")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def isolates(self, p: Poly) -> bool:
        """Replay check: exactly one distinct root of p strictly inside."""
        return count_roots(p, self.lo, self.hi) == 1 and p(self.lo) != 0 and p(self.hi) != 0

    def to_dict(self) -> dict:
        return {"lo": rational_str(self.lo), "hi": rational_str(self.hi), "multiplicity": self.multiplicity_hint}


def _refine_sign_change(p: Poly, lo: Fraction, hi: Fraction, tol: Fraction) -> tuple[Fraction, Fraction]:
    """Bisect a square-free simple-root bracket until its width is at most tol."""
    slo = _sign(p(lo))
    while hi - lo > tol:
        mid = (lo + hi) / 2
        sm = _sign(p(mid))
        if sm == 0:
            eps = min(tol, hi - lo) / 4
            return mid - eps, mid + eps
        if sm == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _isolate_sqfree(q: Poly, lo: Fraction, hi: Fraction, tol: Fraction) -> list[tuple[Fraction, Fraction]]:
    seq = [s.int_coeffs() for s in sturm_sequence(q)]
    out: list[tuple[Fraction, Fraction]] = []
    stack = [(lo, hi, _sturm_variations(seq, lo), _sturm_variations(seq, hi))]
    while stack:
        a, b, va, vb = stack.pop()
        n = va - vb
        if n == 0:
            continue
        if n == 1:
            out.append(_refine_sign_change(q, a, b, tol) if q(a) * q(b) < 0 else _refine_by_count(q, seq, a, b, tol))
            continue
        mid = (a + b) / 2
        if q(mid) == 0:
            eps = (b - a) / 2**8
            while True:
                cl = _sturm_variations(seq, mid - eps) - _sturm_variations(seq, mid + eps)
                if cl == 1 and q(mid - eps) != 0 and q(mid + eps) != 0:
                    break
                eps /= 2
            out.append(_refine_sign_change(q, mid - eps, mid + eps, tol))
            vm_lo = _sturm_variations(seq, mid - eps)
            vm_hi = _sturm_variations(seq, mid + eps)
            stack.append((a, mid - eps, va, vm_lo))
            stack.append((mid + eps, b, vm_hi, vb))
            continue
        vm = _sturm_variations(seq, mid)
        stack.append((a, mid, va, vm))
        stack.append((mid, b, vm, vb))
    out.sort()
    return out


def _refine_by_count(q, seq, a, b, tol):
    # one simple root in (a, b) but no sign change visible (cannot happen for
    # square-free q with nonzero endpoints); kept as a guard
    while b - a > tol:
        mid = (a + b) / 2
        if q(mid) == 0:
            eps = min(tol, b - a) / 4
            return mid - eps, mid + eps
        if _sturm_variations(seq, a) - _sturm_variations(seq, mid) == 1:
            b = mid
        else:
            a = mid
    return a, b


def isolate_roots(p: Poly, lo, hi, tol: Fraction = DEFAULT_TOLERANCE) -> list[IsolatingInterval]:
    """Disjoint isolating intervals for every distinct root of p in (lo, hi).

    Each interval has width at most ``tol`` and carries the root's
    multiplicity in p.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    tol = Fraction(tol)
    if p.is_zero():
        raise ValueError("cannot isolate roots of the zero polynomial")
    if not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    for e in (lo, hi):
        if p(e) == 0:
            raise BoundaryRootError(e)
    found: list[IsolatingInterval] = []
    for factor, mult in p.sqfree_decomposition():
        for a, b in _isolate_sqfree(factor, lo, hi, tol):
            found.append(IsolatingInterval(a, b, mult))
    found.sort(key=lambda iv: iv.lo)
    return found


# ---------------------------------------------------------------------------
# Moebius substitution
# ---------------------------------------------------------------------------


def mobius_substitute(p: Poly, degree: int | None = None) -> Poly:
    """Return (1+u)^n * p((1-u)/(1+u)) with n = deg p (or the given degree).

    Roots of p in (-1, 1) correspond to roots of the result in (0, oo).
    """
    if p.is_zero():
        raise ValueError("Moebius substitution of the zero polynomial")
    n = p.degree if degree is None else degree
    if n < p.degree:
        raise ValueError("degree below the polynomial's degree")
    one_minus = Poly((1, -1))
    one_plus = Poly((1, 1))
    out = Poly()
    for k, a in enumerate(p.coeffs):
        if a:
            out = out + one_minus**k * one_plus ** (n - k) * a
    return out


# ---------------------------------------------------------------------------
# Positivity certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Refutation:
    """Evidence that p is not positive on the interval.

    ``point`` is a rational z* with p(z*) <= 0 when one exists; for a
    polynomial that only touches zero at an irrational point, ``point``
    is None and ``touching_root`` isolates that zero.
    """

    polynomial: Poly
    point: Fraction | None
    value: Fraction | None
    touching_root: IsolatingInterval | None = None

    def replay(self) -> bool:
        if self.point is not None:
            return self.polynomial(self.point) == self.value and self.value <= 0
        iv = self.touching_root
        return iv is not None and iv.isolates(self.polynomial)

    def to_dict(self) -> dict:
        return {
            "kind": "refutation",
            "polynomial": [rational_str(a) for a in self.polynomial.coeffs],
            "point": None if self.point is None else rational_str(self.point),
            "value": None if self.value is None else rational_str(self.value),
            "touching_root": None if self.touching_root is None else self.touching_root.to_dict(),
        }


@dataclass(frozen=True)
class PositivityCertificate:
    """Replayable proof that a polynomial is positive on an open interval.

    method is one of ``sturm-root-count``, ``mobius-nonneg-coeffs`` or
    ``endpoint-deflation`` (boundary roots divided out, then Sturm).
    """

    polynomial: Poly
    lo: Fraction
    hi: Fraction
    method: str
    witness: dict = field(compare=False)

    def replay(self) -> bool:
        return _replay_positivity(self)

    def to_dict(self) -> dict:
        return {
            "kind": "positivity",
            "method": self.method,
            "polynomial": [rational_str(a) for a in self.polynomial.coeffs],
            "interval": [rational_str(self.lo), rational_str(self.hi)],
            "witness": _witness_json(self.witness),
        }


def _witness_json(w):
    if isinstance(w, Poly):
        return [rational_str(a) for a in w.coeffs]
    if isinstance(w, Fraction):
        return rational_str(w)
    if isinstance(w, dict):
        return {k: _witness_json(v) for k, v in w.items()}
    if isinstance(w, (list, tuple)):
        return [_witness_json(v) for v in w]
    return w


def _deflate(p: Poly, lo: Fraction, hi: Fraction) -> tuple[Poly, int, int]:
    """Divide out (z - lo)^a (hi - z)^b; both factors are positive inside."""
    a = b = 0
    while p.degree > 0 and p(lo) == 0:
        p = p.exact_div(Poly((-lo, 1)))
        a += 1
    while p.degree > 0 and p(hi) == 0:
        p = p.exact_div(Poly((hi, -1)))
        b += 1
    return p, a, b


def _replay_positivity(cert: PositivityCertificate) -> bool:
    p, lo, hi, w = cert.polynomial, cert.lo, cert.hi, cert.witness
    if cert.method == "mobius-nonneg-coeffs":
        if (lo, hi) != (-1, 1):
            return False
        t = mobius_substitute(p)
        return t == w["transformed"] and all(a >= 0 for a in t.coeffs) and any(a > 0 for a in t.coeffs)
    if cert.method in ("sturm-root-count", "endpoint-deflation"):
        q, a, b = _deflate(p, lo, hi)
        if (a, b) != (w["deflated_lo"], w["deflated_hi"]) or q != w["cofactor"]:
            return False
        if cert.method == "sturm-root-count" and (a or b):
            return False
        if q.degree <= 0:
            return q.lc > 0
        seq = sturm_sequence(q.sqfree())
        if seq != list(w["sturm"]):
            return False
        if sturm_count(q, lo, hi) != 0:
            return False
        s = w["sample"]
        return lo < s < hi and q(s) > 0
    return False


def certify_positive(p: Poly, lo=-1, hi=1) -> PositivityCertificate | Refutation:
    """Decide p > 0 on the open interval (lo, hi), exactly.

    Returns a :class:`PositivityCertificate` whose ``replay()`` re-derives the
    verdict, or a :class:`Refutation` carrying a rational z* with p(z*) <= 0.
    """
    if p.is_zero():
        raise ValueError("positivity of the zero polynomial")
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise ValueError("empty interval")

    if (lo, hi) == (-1, 1) and p(-1) != 0:
        t = mobius_substitute(p)
        if all(a >= 0 for a in t.coeffs):
            return PositivityCertificate(p, lo, hi, "mobius-nonneg-coeffs", {"transformed": t})

    q, a, b = _deflate(p, lo, hi)
    method = "endpoint-deflation" if (a or b) else "sturm-root-count"
    sample = simplest_rational_between(lo, hi)
    if q.degree <= 0:
        if q.lc > 0:
            return PositivityCertificate(
                p, lo, hi, method,
                {"deflated_lo": a, "deflated_hi": b, "cofactor": q, "sturm": [q], "sample": sample},
            )
        return Refutation(p, sample, p(sample))
    n = sturm_count(q, lo, hi)
    if n == 0:
        if q(sample) > 0:
            return PositivityCertificate(
                p, lo, hi, method,
                {
                    "deflated_lo": a,
                    "deflated_hi": b,
                    "cofactor": q,
                    "sturm": sturm_sequence(q.sqfree()),
                    "sample": sample,
                },
            )
        return Refutation(p, sample, p(sample))
    return _find_refutation(p, q, lo, hi)


def _find_refutation(p: Poly, q: Poly, lo: Fraction, hi: Fraction) -> Refutation:
    """q has roots in (lo, hi); locate the simplest rational where p <= 0."""
    roots = isolate_roots(q, lo, hi, tol=Fraction(1, 2**60))
    cuts = [lo] + [x for iv in roots for x in (iv.lo, iv.hi)] + [hi]
    candidates = []
    for i in range(0, len(cuts), 2):
        a, b = cuts[i], cuts[i + 1]
        if a < b:
            z = simplest_rational_between(a, b)
            v = p(z)
            if v <= 0:
                candidates.append(z)
    for iv in roots:
        # rational roots sit exactly on a simplest rational within the bracket
        z = simplest_rational_between(iv.lo, iv.hi)
        if p(z) == 0:
            candidates.append(z)
    if candidates:
        best = min(candidates, key=lambda r: (r.denominator, abs(r.numerator)))
        return Refutation(p, best, p(best))
    return Refutation(p, None, None, roots[0])


# ---------------------------------------------------------------------------
# Resultants and sign determination at algebraic points
# ---------------------------------------------------------------------------


def _bareiss_det(m: list[list[Poly]]) -> Poly:
    n = len(m)
    if n == 0:
        return Poly.const(1)
    a = [row[:] for row in m]
    sign = 1
    prev = Poly.const(1)
    for k in range(n - 1):
        if a[k][k].is_zero():
            for r in range(k + 1, n):
                if not a[r][k].is_zero():
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return Poly()
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]).exact_div(prev)
        prev = a[k][k]
    return a[n - 1][n - 1] * sign


def _as_coeff_rows(p) -> list[Poly]:
    if isinstance(p, BiPoly):
        return list(p.coeffs)
    return [Poly.const(a) for a in p.coeffs]


def subresultant(a, b, j: int) -> list[Poly]:
    """j-th subresultant of a, b (in z), as coefficients z^0..z^j.

    Inputs are Poly (coefficients in Q) or BiPoly (coefficients in Q[c]).
    """
    A, B = _as_coeff_rows(a), _as_coeff_rows(b)
    m, n = len(A) - 1, len(B) - 1
    if m < 0 or n < 0:
        raise ValueError("subresultant of a zero polynomial")
    if not 0 <= j < min(m, n) + (1 if m != n else 0):
        if j >= min(m, n):
            raise ValueError("subresultant index out of range")
    width = m + n - j
    rows = []
    for k in range(n - j):
        row = [Poly()] * width
        for i, coef in enumerate(reversed(A)):
            row[k + i] = coef
        rows.append(row)
    for k in range(m - j):
        row = [Poly()] * width
        for i, coef in enumerate(reversed(B)):
            row[k + i] = coef
        rows.append(row)
    lead = m + n - 2 * j - 1
    out = []
    for i in range(j + 1):
        col = width - 1 - i
        mat = [row[:lead] + [row[col]] for row in rows]
        out.append(_bareiss_det(mat))
    return out


def resultant(a, b) -> Poly:
    """Sylvester resultant of a and b with respect to z."""
    A, B = _as_coeff_rows(a), _as_coeff_rows(b)
    m, n = len(A) - 1, len(B) - 1
    if m < 0 or n < 0:
        return Poly()
    if m == 0 and n == 0:
        return Poly.const(1)
    rows = []
    width = m + n
    for k in range(n):
        row = [Poly()] * width
        for i, coef in enumerate(reversed(A)):
            row[k + i] = coef
        rows.append(row)
    for k in range(m):
        row = [Poly()] * width
        for i, coef in enumerate(reversed(B)):
            row[k + i] = coef
        rows.append(row)
    return _bareiss_det(rows)


def sign_at_root(q: Poly, r: Poly, iv: IsolatingInterval, max_steps: int = 400) -> tuple[int, IsolatingInterval]:
    """Sign of q at the unique root of square-free r inside ``iv``.

    Returns the sign and the (possibly refined) interval used to decide it.
    """
    lo, hi = iv.lo, iv.hi
    if q.is_zero():
        return 0, iv
    g = Poly.gcd(q, r)
    if g.degree > 0 and count_roots(g, lo, hi) == 1:
        return 0, iv
    slo = _sign(r(lo))
    for _ in range(max_steps):
        if q(lo) != 0 and q(hi) != 0 and sturm_count(q, lo, hi) == 0:
            return _sign(q(lo)), IsolatingInterval(lo, hi, iv.multiplicity_hint)
        mid = (lo + hi) / 2
        sm = _sign(r(mid))
        if sm == 0:
            return _sign(q(mid)), iv
        if sm == slo:
            lo = mid
        else:
            hi = mid
    raise ArithmeticError("sign determination did not terminate")
