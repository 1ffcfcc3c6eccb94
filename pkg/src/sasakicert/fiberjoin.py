"""Domain model for d = 1 fiber joins: bases, K-matrices and quotient data.

A fiber join is fixed by a base manifold N (drawn from a small catalogue)
and a K-matrix whose row j holds the coordinates of c1(L_j) in the base's
H^2 basis. From these we derive:

* the regular-quotient admissible data (n_i, x_i, s_i);
* the quasi-regular quotient log pair for a weight vector w;
* colinearity and strong-admissibility verdicts with evidence;
* integral cohomology of the total space.

Specs can be loaded from JSON; schema errors carry the line of the
offending value.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Any, Iterable, Sequence

import jsonschema

from .exactalg import parse_rational, rational_str

__all__ = [
    "SpecError",
    "NotStronglyAdmissibleError",
    "BaseManifold",
    "KMatrix",
    "FiberJoinSpec",
    "AdmissibleData",
    "LogPairQuotient",
    "Colinearity",
    "StrongAdmissibility",
    "InverseQuotientFamily",
    "BilinearSolution",
    "CohomologyReport",
    "BASE_KINDS",
    "validate",
    "quasiregular_quotient",
    "c_to_w",
    "w_to_c",
    "colinearity_check",
    "strong_admissibility_check",
    "inverse_quotient_classes",
    "cohomology",
    "betti_numbers_base",
    "load_spec",
    "parse_spec",
    "spec_to_json",
    "load_family",
    "parse_family",
    "expand_family",
    "SPEC_SCHEMA",
    "FAMILY_SCHEMA",
]


class SpecError(ValueError):
    """Malformed or invalid fiber-join input.

    ``line`` is set when the error could be traced to a location in a JSON
    document.
    """

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if line is not None:
            where = f"line {line}: "
        if path:
            where += f"at {path}: "
        super().__init__(where + message)
        self.line = line
        self.path = path
        self.detail = message


class NotStronglyAdmissibleError(SpecError):
    """The regular quotient class is not admissible, so there is no (x, s) data."""


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------

BASE_KINDS = ("Surface", "SurfaceProduct", "CP1xCP1", "PolystableRuled", "Example38", "Example39")

# Stage-four Bott manifold matrix for the Example39 base, kept as metadata only.
BOTT_MATRIX_EXAMPLE39 = ((1, 0, 0, 0), (0, 1, 0, 0), (1, -1, 1, 0), (5, 3, 2, 1))


@dataclass(frozen=True)
class BaseManifold:
    """A catalogued base N.

    ``params`` by kind:

    * Surface: ``genus``
    * SurfaceProduct: ``g1``, ``g2``
    * CP1xCP1: none
    * PolystableRuled: ``genus`` (>= 1), ``degE_parity`` ("even" | "odd")
    * Example38: ``genus`` (>= 2); N = Sigma_g x Sigma_g, basis (gamma1, gamma2, delta)
    * Example39: none; N = P(1 + O(1,-1)) over CP1 x CP1, basis (f1, f2, chi/2pi)
    """

    kind: str
    params: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self):
        if self.kind not in BASE_KINDS:
            raise SpecError(f"unknown base kind {self.kind!r}; expected one of {', '.join(BASE_KINDS)}")
        p = dict(self.params)
        need = {
            "Surface": {"genus"},
            "SurfaceProduct": {"g1", "g2"},
            "CP1xCP1": set(),
            "PolystableRuled": {"genus", "degE_parity"},
            "Example38": {"genus"},
            "Example39": set(),
        }[self.kind]
        missing = need - set(p)
        extra = set(p) - need
        if missing:
            raise SpecError(f"base {self.kind} needs parameters {sorted(missing)}")
        if extra:
            raise SpecError(f"base {self.kind} does not take parameters {sorted(extra)}")
        for k in need - {"degE_parity"}:
            v = p[k]
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise SpecError(f"{k} must be a nonnegative integer, got {v!r}")
        if self.kind == "PolystableRuled":
            if p["genus"] < 1:
                raise SpecError("PolystableRuled needs genus >= 1")
            if p["degE_parity"] not in ("even", "odd"):
                raise SpecError("degE_parity must be 'even' or 'odd'")
        if self.kind == "Example38" and p["genus"] < 2:
            raise SpecError("Example38 needs genus >= 2")

    # convenience constructors
    @classmethod
    def surface(cls, genus: int) -> BaseManifold:
        return cls("Surface", (("genus", genus),))

    @classmethod
    def surface_product(cls, g1: int, g2: int) -> BaseManifold:
        return cls("SurfaceProduct", (("g1", g1), ("g2", g2)))

    @classmethod
    def cp1xcp1(cls) -> BaseManifold:
        return cls("CP1xCP1")

    @classmethod
    def polystable_ruled(cls, genus: int, parity: str) -> BaseManifold:
        return cls("PolystableRuled", (("degE_parity", parity), ("genus", genus)))

    @classmethod
    def example38(cls, genus: int) -> BaseManifold:
        return cls("Example38", (("genus", genus),))

    @classmethod
    def example39(cls) -> BaseManifold:
        return cls("Example39")

    @property
    def param(self) -> dict[str, Any]:
        return dict(self.params)

    @property
    def h2_basis(self) -> tuple[str, ...]:
        return {
            "Surface": ("omega",),
            "SurfaceProduct": ("Omega1", "Omega2"),
            "CP1xCP1": ("Omega1", "Omega2"),
            "PolystableRuled": ("Omega1", "Omega2"),
            "Example38": ("gamma1", "gamma2", "delta"),
            "Example39": ("f1", "f2", "chi/2pi"),
        }[self.kind]

    @property
    def complex_dim(self) -> int:
        return {"Surface": 1, "Example39": 3}.get(self.kind, 2)

    @property
    def genera(self) -> tuple[int, ...]:
        """Genera of the CSC factors carrying the admissible data.

        The P(E) base is locally CP1 x Sigma_g, so its first factor has genus 0.
        """
        p = self.param
        if self.kind == "Surface":
            return (p["genus"],)
        if self.kind == "SurfaceProduct":
            return (p["g1"], p["g2"])
        if self.kind == "CP1xCP1":
            return (0, 0)
        if self.kind == "PolystableRuled":
            return (0, p["genus"])
        if self.kind == "Example38":
            return (p["genus"], p["genus"])
        return ()

    def factor_classes(self) -> list[tuple[Fraction, ...]]:
        """Classes [Omega_{N_a}] of the local-product CSC factors, in h2_basis coordinates."""
        if self.kind == "Surface":
            return [(Fraction(1),)]
        if self.kind in ("SurfaceProduct", "CP1xCP1", "PolystableRuled"):
            return [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))]
        if self.kind == "Example38":
            return [(Fraction(1), Fraction(0), Fraction(0)), (Fraction(0), Fraction(1), Fraction(0))]
        # Example39: N is irreducible CSC, a single factor with class 4f1 + 4f2 + chi/2pi
        return [(Fraction(4), Fraction(4), Fraction(1))]

    def fixture_K(self) -> KMatrix | None:
        """The line-bundle classes fixed by the catalogued examples."""
        if self.kind == "Example38":
            g = self.param["genus"]
            return KMatrix(((g + 1, g + 1, 1), (g, g, 1)))  # l_{g+2}, l_{g+1}
        if self.kind == "Example39":
            return KMatrix(((6, 6, 2), (2, 2, 1)))
        return None

    def is_ample(self, cls_vec: Sequence[Fraction]) -> bool:
        """Kaehler-cone membership on the catalogued lattice."""
        if self.kind == "Example38":
            # l_s = (s-1)(gamma1+gamma2) + delta is ample iff s > g; scale to delta-coefficient 1
            a, b, d = cls_vec
            if a != b or d <= 0:
                raise SpecError("Example38 ampleness is catalogued only for multiples of l_s")
            s = a / d + 1
            return s > self.param["genus"]
        if self.kind == "Example39":
            return True
        return all(v > 0 for v in cls_vec)

    def to_json(self) -> dict:
        return {"kind": self.kind, "params": dict(sorted(self.params))}


@dataclass(frozen=True)
class KMatrix:
    """Row j holds c1(L_j) in the base's H^2 basis, so for two-factor bases
    ``rows = ((k^1_1, k^2_1), (k^1_2, k^2_2))``."""

    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(parse_rational(v) for v in row) for row in self.rows)
        if len(rows) != 2:
            raise SpecError("K must have exactly two rows (d = 1)")
        if len(rows[0]) != len(rows[1]) or not rows[0]:
            raise SpecError("K rows must have equal, nonzero length")
        object.__setattr__(self, "rows", rows)

    def k(self, i: int, j: int) -> Fraction:
        """k^i_j, with 1-based indices as in the usual notation."""
        return self.rows[j - 1][i - 1]

    @property
    def ncols(self) -> int:
        return len(self.rows[0])

    def det(self) -> Fraction:
        if self.ncols != 2:
            raise ValueError("determinant needs a 2x2 K")
        (a, b), (c, d) = self.rows
        return a * d - b * c

    def swap_rows(self) -> KMatrix:
        return KMatrix((self.rows[1], self.rows[0]))

    def to_json(self) -> list[list[str]]:
        return [[rational_str(v) for v in row] for row in self.rows]


@dataclass(frozen=True)
class FiberJoinSpec:
    base: BaseManifold
    K: KMatrix

    @classmethod
    def surface(cls, genus: int, k1, k2) -> FiberJoinSpec:
        return cls(BaseManifold.surface(genus), KMatrix(((k1,), (k2,))))

    @classmethod
    def product(cls, g1: int, g2: int, rows) -> FiberJoinSpec:
        return cls(BaseManifold.surface_product(g1, g2), KMatrix(rows))

    @classmethod
    def cp1xcp1(cls, rows) -> FiberJoinSpec:
        return cls(BaseManifold.cp1xcp1(), KMatrix(rows))

    @classmethod
    def polystable(cls, genus: int, parity: str, rows) -> FiberJoinSpec:
        return cls(BaseManifold.polystable_ruled(genus, parity), KMatrix(rows))

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "K": self.K.to_json()}


@dataclass(frozen=True)
class AdmissibleData:
    """Regular-quotient admissible data.

    ``dimension`` is 5 for a single Riemann surface (one x, one s) and 7
    for two-factor bases. ``class_terms`` gives the regular quotient class
    2pi(sum_i y_i [Omega_i]) + Xi as ``{basis name: y_i, "Xi": 1}``
    with y_i = n_i / x_i.
    """

    dimension: int
    n: tuple[Fraction, ...]
    x: tuple[Fraction, ...]
    s: tuple[Fraction, ...]
    genera: tuple[int, ...]
    class_terms: tuple[tuple[str, Fraction], ...] = ()

    def __post_init__(self):
        for xi, ni in zip(self.x, self.n):
            if not (0 < abs(xi) < 1) or xi * ni <= 0:
                raise SpecError(f"admissible data out of range: x={xi}, n={ni}")

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "n": [rational_str(v) for v in self.n],
            "x": [rational_str(v) for v in self.x],
            "s": [rational_str(v) for v in self.s],
            "genera": list(self.genera),
            "class": {k: rational_str(v) for k, v in self.class_terms},
        }


def _check_parity(K: KMatrix) -> None:
    for j in (1, 2):
        k1, k2 = K.k(1, j), K.k(2, j)
        even_branch = k1.denominator == 1 and k1 % 2 == 0 and k2.denominator == 1
        odd_branch = k1.denominator == 1 and k1 % 2 == 1 and (k2 - Fraction(1, 2)).denominator == 1
        if not (even_branch or odd_branch):
            raise SpecError(
                f"odd-degree parity rule violated for L_{j}: need k^1_{j} even with k^2_{j} integral, "
                f"or k^1_{j} odd with k^2_{j} - 1/2 integral (got k^1_{j}={k1}, k^2_{j}={k2})"
            )


def check_spec(spec: FiberJoinSpec) -> None:
    """Entry-level gate: positivity, shape, integrality and parity."""
    base, K = spec.base, spec.K
    want = len(base.h2_basis)
    if K.ncols != want:
        raise SpecError(f"K for base {base.kind} needs {want} column(s), got {K.ncols}")
    for row in K.rows:
        for v in row:
            if v <= 0:
                raise SpecError(f"K entries must be positive, got {v}")
    if base.kind == "PolystableRuled" and base.param["degE_parity"] == "odd":
        _check_parity(K)
    else:
        for row in K.rows:
            for v in row:
                if v.denominator != 1:
                    raise SpecError(f"K entries must be integers for base {base.kind}, got {v}")
    if base.kind in ("Example38", "Example39"):
        fixed = base.fixture_K()
        if K != fixed:
            raise SpecError(f"{base.kind} is a fixture; K must be {fixed.to_json()}")
        return
    for i in range(1, K.ncols + 1):
        if K.k(i, 1) == K.k(i, 2):
            raise SpecError(
                f"k^{i}_1 = k^{i}_2 = {K.k(i, 1)}: the regular quotient is then a product with a "
                "Hirzebruch surface, which is excluded from the supported setting"
            )


def validate(spec: FiberJoinSpec) -> AdmissibleData:
    """Gate a spec and return its regular-quotient admissible data."""
    check_spec(spec)
    base, K = spec.base, spec.K
    if base.kind in ("Example38", "Example39"):
        raise NotStronglyAdmissibleError(
            f"{base.kind}: the regular quotient class is not admissible, so no (x, s) data exists"
        )
    ns, xs, ss = [], [], []
    genera = base.genera
    for i in range(1, K.ncols + 1):
        a, b = K.k(i, 1), K.k(i, 2)
        n = a - b
        ns.append(n)
        xs.append(n / (a + b))
        ss.append(2 * (1 - genera[i - 1]) / n)
    terms = tuple((name, n / x) for name, n, x in zip(base.h2_basis, ns, xs)) + (("Xi", Fraction(1)),)
    return AdmissibleData(
        dimension=5 if K.ncols == 1 else 7,
        n=tuple(ns),
        x=tuple(xs),
        s=tuple(ss),
        genera=genera,
        class_terms=terms,
    )


# ---------------------------------------------------------------------------
# rays and quasi-regular quotients
# ---------------------------------------------------------------------------


def w_to_c(w: Sequence[int]) -> Fraction:
    """c = (w1 - w2) / (w1 + w2)."""
    w1, w2 = _check_w(w)
    return Fraction(w1 - w2, w1 + w2)


def c_to_w(c) -> tuple[int, int]:
    """Coprime positive weights with (w1 - w2)/(w1 + w2) = c."""
    c = Fraction(c)
    if not -1 < c < 1:
        raise SpecError(f"c must lie in (-1, 1), got {c}")
    a, b = c.numerator, c.denominator
    g = gcd(b + a, b - a)
    return ((b + a) // g, (b - a) // g)


def _check_w(w: Sequence[int]) -> tuple[int, int]:
    if len(w) != 2:
        raise SpecError("weight vector needs two entries")
    w1, w2 = w
    if any(isinstance(v, bool) or not isinstance(v, int) for v in (w1, w2)):
        raise SpecError("weights must be integers")
    if w1 <= 0 or w2 <= 0:
        raise SpecError(f"weights must be positive, got {tuple(w)}")
    if gcd(w1, w2) != 1:
        raise SpecError(f"weights must be coprime, got {tuple(w)}")
    return w1, w2


@dataclass(frozen=True)
class LogPairQuotient:
    """Quasi-regular quotient (P(1 + L), Delta_w) of the ray xi_w.

    ``bundle_degrees[i] = w2 k^i_1 - w1 k^i_2``; ``kahler_class`` lists the
    coefficients of 2pi(w2[omega_1] + w1[omega_2]) over the H^2 basis,
    with the Xi coefficient 1 appended under the key "Xi".
    """

    w: tuple[int, int]
    c: Fraction
    bundle_degrees: tuple[Fraction, ...]
    branch_weights: tuple[Fraction, Fraction]
    kahler_class: tuple[tuple[str, Fraction], ...]
    degenerate_flag: str | None
    x: tuple[Fraction, ...] | None

    def to_json(self) -> dict:
        return {
            "w": list(self.w),
            "c": rational_str(self.c),
            "bundle_degrees": [rational_str(v) for v in self.bundle_degrees],
            "branch_weights": [rational_str(v) for v in self.branch_weights],
            "kahler_class": {k: rational_str(v) for k, v in self.kahler_class},
            "degenerate": self.degenerate_flag,
            "x": None if self.x is None else [rational_str(v) for v in self.x],
        }


def quasiregular_quotient(spec: FiberJoinSpec, w: Sequence[int]) -> LogPairQuotient:
    check_spec(spec)
    w1, w2 = _check_w(w)
    K = spec.K
    degs, xs = [], []
    for i in range(1, K.ncols + 1):
        a, b = K.k(i, 1), K.k(i, 2)
        degs.append(w2 * a - w1 * b)
        xs.append((w2 * a - w1 * b) / (w2 * a + w1 * b))
    klass = tuple((name, w2 * K.k(i + 1, 1) + w1 * K.k(i + 1, 2)) for i, name in enumerate(spec.base.h2_basis))
    degenerate = None
    if any(d == 0 for d in degs):
        degenerate = "product with a Hirzebruch orbifold"
    return LogPairQuotient(
        w=(w1, w2),
        c=Fraction(w1 - w2, w1 + w2),
        bundle_degrees=tuple(degs),
        branch_weights=(1 - Fraction(1, w1), 1 - Fraction(1, w2)),
        kahler_class=klass + (("Xi", Fraction(1)),),
        degenerate_flag=degenerate,
        x=None if degenerate else tuple(xs),
    )


# ---------------------------------------------------------------------------
# colinearity and strong admissibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Colinearity:
    colinear: bool
    b: tuple[Fraction, Fraction] | None = None
    l: Fraction | None = None
    omega_N: tuple[Fraction, ...] | None = None

    def join_ray(self) -> tuple[int, int] | None:
        """Weights (b1, b2)/l of the regular S^3_w-join Reeb field."""
        if not self.colinear:
            return None
        b1, b2 = self.b
        return (int(b1 / self.l), int(b2 / self.l))


def _primitive_direction(v: Sequence[Fraction]) -> tuple[Fraction, ...]:
    den = 1
    for a in v:
        den = den * a.denominator // gcd(den, a.denominator)
    ints = [int(a * den) for a in v]
    g = 0
    for a in ints:
        g = gcd(g, a)
    return tuple(Fraction(a, g) for a in ints)


def colinearity_check(spec: FiberJoinSpec) -> Colinearity:
    """Colinear iff the rows of K are proportional; then omega_j = b_j omega_N."""
    check_spec(spec)
    r1, r2 = spec.K.rows
    if any(r1[i] * r2[j] != r1[j] * r2[i] for i in range(len(r1)) for j in range(len(r1))):
        return Colinearity(False)
    prim = _primitive_direction(r1)
    idx = next(i for i, v in enumerate(prim) if v)
    b1, b2 = r1[idx] / prim[idx], r2[idx] / prim[idx]
    l = Fraction(gcd(b1.numerator, b2.numerator), b1.denominator * b2.denominator // gcd(b1.denominator, b2.denominator))
    return Colinearity(True, (b1, b2), l, prim)


def _solve_exact(cols: list[tuple[Fraction, ...]], rhs: tuple[Fraction, ...]) -> tuple[list[Fraction] | None, tuple[Fraction, ...]]:
    """Solve sum_a y_a cols[a] = rhs exactly; return (y or None, residual of the best fit)."""
    n, m = len(rhs), len(cols)
    aug = [[cols[a][i] for a in range(m)] + [rhs[i]] for i in range(n)]
    piv_cols = []
    r = 0
    for col in range(m):
        p = next((i for i in range(r, n) if aug[i][col] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [v * inv for v in aug[r]]
        for i in range(n):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        piv_cols.append(col)
        r += 1
    inconsistent = any(all(v == 0 for v in aug[i][:m]) and aug[i][m] != 0 for i in range(n))
    y = [Fraction(0)] * m
    for i, col in enumerate(piv_cols):
        y[col] = aug[i][m]
    fit = tuple(sum((y[a] * cols[a][i] for a in range(m)), Fraction(0)) for i in range(n))
    residual = tuple(rhs[i] - fit[i] for i in range(n))
    return (None if inconsistent else y), residual


@dataclass(frozen=True)
class StrongAdmissibility:
    """Verdict plus the class decomposition backing it."""

    verdict: str  # "strongly admissible" | "admissible-not-strong" | "not applicable"
    class_sum: tuple[tuple[str, Fraction], ...]
    difference: tuple[tuple[str, Fraction], ...]
    n: tuple[Fraction, ...] | None
    y: tuple[Fraction, ...] | None
    x: tuple[Fraction, ...] | None
    obstruction: str | None

    @property
    def strongly_admissible(self) -> bool:
        return self.verdict == "strongly admissible"

    def to_json(self) -> dict:
        fr = lambda t: None if t is None else [rational_str(v) for v in t]
        return {
            "verdict": self.verdict,
            "class_sum": {k: rational_str(v) for k, v in self.class_sum},
            "difference": {k: rational_str(v) for k, v in self.difference},
            "n": fr(self.n),
            "y": fr(self.y),
            "x": fr(self.x),
            "obstruction": self.obstruction,
        }


def strong_admissibility_check(spec: FiberJoinSpec) -> StrongAdmissibility:
    """Decide whether 2pi([omega_1] + [omega_2]) + Xi is a rescaled admissible class.

    Admissible classes are, up to scale, 2pi(sum_a (n_a / x_a)[Omega_a]) + Xi with
    0 < |x_a| < 1 and x_a n_a > 0, where c1(L_1) - c1(L_2) = sum_a n_a [Omega_a].
    Fixing the Xi coefficient at 1 pins the scale, so the test is: solve
    [omega_1] + [omega_2] = sum_a y_a [Omega_a] and require y_a > |n_a|, which
    is 0 < |x_a| < 1 with x_a n_a = n_a^2 / y_a > 0.
    """
    check_spec(spec)
    base, K = spec.base, spec.K
    names = base.h2_basis
    r1, r2 = K.rows
    total = tuple(a + b for a, b in zip(r1, r2))
    diff = tuple(a - b for a, b in zip(r1, r2))
    cols = base.factor_classes()
    named = lambda v: tuple(zip(names, v))
    n, n_res = _solve_exact(cols, diff)
    if n is None:
        return StrongAdmissibility(
            "not applicable", named(total), named(diff), None, None, None,
            "c1(L1) - c1(L2) is not a combination of the factor classes; the regular quotient is not admissible",
        )
    y, y_res = _solve_exact(cols, total)
    if y is None:
        bad = ", ".join(f"{nm}: {rational_str(v)}" for nm, v in zip(names, y_res) if v)
        return StrongAdmissibility(
            "admissible-not-strong", named(total), named(diff), tuple(n), None, None,
            f"class sum has a component outside the admissible span ({bad})",
        )
    for na, ya in zip(n, y):
        if na == 0 or not ya > abs(na):
            return StrongAdmissibility(
                "admissible-not-strong", named(total), named(diff), tuple(n), tuple(y), None,
                f"coefficient y={rational_str(ya)} against n={rational_str(na)} puts x = n/y outside (0, 1)",
            )
    x = tuple(na / ya for na, ya in zip(n, y))
    return StrongAdmissibility("strongly admissible", named(total), named(diff), tuple(n), tuple(y), x, None)


# ---------------------------------------------------------------------------
# inverse quotient problem
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BilinearSolution:
    """Integer solutions (k1, k2) of a target relation x2 = a x1 + b.

    ``kind`` is "family" (a one-parameter family k2 = p k1 + q), "finite"
    (listed points) or "empty"; ``reason`` records the argument.
    """

    kind: str
    coefficients: tuple[Fraction, Fraction, Fraction, Fraction]
    family: tuple[Fraction, Fraction] | None
    points: tuple[tuple[int, int], ...]
    reason: str


@dataclass(frozen=True)
class InverseQuotientFamily:
    """Classes x_i = n_i / (n_i + 2 k^i) realizable from K = [[n1+k1, n2+k2], [k1, k2]]."""

    n1: int
    n2: int

    def __post_init__(self):
        for v in (self.n1, self.n2):
            if isinstance(v, bool) or not isinstance(v, int):
                raise SpecError("n_i must be integers")
            if v == 0:
                raise SpecError("n_i must be nonzero")

    def k_min(self, i: int) -> int:
        n = self.n1 if i == 1 else self.n2
        return max(0, -n) + 1

    def x(self, k1: int, k2: int) -> tuple[Fraction, Fraction]:
        if k1 < self.k_min(1) or k2 < self.k_min(2):
            raise SpecError(f"k must satisfy k^i > max(0, -n_i); got ({k1}, {k2})")
        return Fraction(self.n1, self.n1 + 2 * k1), Fraction(self.n2, self.n2 + 2 * k2)

    def K(self, k1: int, k2: int) -> KMatrix:
        return KMatrix(((self.n1 + k1, self.n2 + k2), (k1, k2)))

    def contains_point(self, x1, x2) -> tuple[bool, str]:
        """Is (x1, x2) realized by some admissible integer (k1, k2)?"""
        ks = []
        for n, xv, i in ((self.n1, Fraction(x1), 1), (self.n2, Fraction(x2), 2)):
            if xv == 0:
                return False, f"x{i} = 0 is never realized"
            k = n * (1 - xv) / (2 * xv)
            if k.denominator != 1:
                return False, f"x{i} = {xv} needs k^{i} = {k}, not an integer"
            if k < self.k_min(i):
                return False, f"x{i} = {xv} needs k^{i} = {k} < {self.k_min(i)}"
            ks.append(int(k))
        return True, f"realized by k = ({ks[0]}, {ks[1]})"

    def solve_line(self, a, b, search_bound: int = 10**4) -> BilinearSolution:
        """All admissible (k1, k2) with x2 = a x1 + b.

        Cross-multiplying gives A k1 k2 + B k1 + C k2 + D = 0 with integer
        coefficients (after scaling).
        """
        a, b = Fraction(a), Fraction(b)
        n1, n2 = self.n1, self.n2
        # n2 (n1 + 2k1) = a n1 (n2 + 2k2) + b (n1 + 2k1)(n2 + 2k2)
        A = -4 * b
        B = 2 * n2 - 2 * b * n2
        C = -2 * a * n1 - 2 * b * n1
        D = n1 * n2 - a * n1 * n2 - b * n1 * n2
        den = 1
        for v in (A, B, C, D):
            den = den * v.denominator // gcd(den, v.denominator)
        A, B, C, D = (int(v * den) for v in (A, B, C, D))
        coeffs = (Fraction(A), Fraction(B), Fraction(C), Fraction(D))
        m1, m2 = self.k_min(1), self.k_min(2)
        if A == 0:
            if C == 0:
                if B == 0:
                    kind = "family" if D == 0 else "empty"
                    return BilinearSolution(kind, coeffs, None, (), "relation is constant")
                k1 = Fraction(-D, B)
                ok = k1.denominator == 1 and k1 >= m1
                return BilinearSolution(
                    "family" if ok else "empty", coeffs, None, (),
                    f"forces k1 = {k1}" + ("" if ok else ", not admissible"),
                )
            # k2 = -(B k1 + D) / C : integral along an arithmetic progression
            p, q = Fraction(-B, C), Fraction(-D, C)
            sols = [(k1, int(p * k1 + q)) for k1 in range(m1, m1 + 64) if (p * k1 + q).denominator == 1 and p * k1 + q >= m2]
            if sols:
                return BilinearSolution("family", coeffs, (p, q), tuple(sols[:5]), f"k2 = {p}*k1 + {q}")
            return BilinearSolution("empty", coeffs, (p, q), (), f"k2 = {p}*k1 + {q} never admissible in range")
        # (A k1 + C)(A k2 + B) = B C - A D
        rhs = B * C - A * D
        if rhs == 0:
            hits = []
            if (-C) % A == 0 and -C // A >= m1:
                hits.append(f"k1 = {-C // A}")
            if (-B) % A == 0 and -B // A >= m2:
                hits.append(f"k2 = {-B // A}")
            kind = "family" if hits else "empty"
            return BilinearSolution(kind, coeffs, None, (), "degenerate product: " + (", ".join(hits) or "no admissible line"))
        points = []
        for d in _divisors(abs(rhs)):
            for u in (d, -d):
                v = rhs // u
                if (u - C) % A or (v - B) % A:
                    continue
                k1, k2 = (u - C) // A, (v - B) // A
                if k1 >= m1 and k2 >= m2:
                    points.append((k1, k2))
        points.sort()
        reason = f"({A}*k1 + {C})({A}*k2 + {B}) = {rhs}; divisor enumeration"
        if not points and A % 2 == 0 and rhs % 2:
            reason += f"; parity: left side is even, right side {rhs} is odd"
        return BilinearSolution("finite" if points else "empty", coeffs, None, tuple(points), reason)


def _divisors(n: int) -> list[int]:
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i * i != n:
                out.append(n // i)
        i += 1
    return sorted(out)


def inverse_quotient_classes(n1: int, n2: int) -> InverseQuotientFamily:
    return InverseQuotientFamily(n1, n2)


# ---------------------------------------------------------------------------
# cohomology
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CohomologyReport:
    """H^p(M, Z) = Z^rank[p] plus the listed cyclic torsion groups."""

    dimension: int
    ranks: tuple[int, ...]
    torsion: tuple[tuple[int, ...], ...]
    euler_number: int | None
    method: str

    def group(self, p: int) -> str:
        r = self.ranks[p]
        parts = []
        if r:
            parts.append("Z" if r == 1 else f"Z^{r}")
        parts += [f"Z_{t}" for t in self.torsion[p]]
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "groups": {str(p): self.group(p) for p in range(len(self.ranks))},
            "betti": list(self.ranks),
            "euler_class": self.euler_number,
            "method": self.method,
        }


def betti_numbers_base(base: BaseManifold) -> tuple[int, ...]:
    p = base.param
    if base.kind == "Surface":
        return (1, 2 * p["genus"], 1)
    if base.kind in ("SurfaceProduct", "CP1xCP1", "PolystableRuled", "Example38"):
        g1, g2 = base.genera if base.kind != "PolystableRuled" else (0, p["genus"])
        b1 = 2 * g1 + 2 * g2
        return (1, b1, 4 * g1 * g2 + 2, b1, 1)
    # Example39: stage-three Bott manifold
    return (1, 0, 3, 0, 3, 0, 1)


def _product_with_sphere(b: Sequence[int], sphere_dim: int) -> list[int]:
    out = [0] * (len(b) + sphere_dim)
    for k, v in enumerate(b):
        out[k] += v
        out[k + sphere_dim] += v
    return out


def cohomology(spec: FiberJoinSpec | BaseManifold, d: int = 1) -> CohomologyReport:
    """Integral cohomology of the S^(2d+1)-bundle over N.

    For d >= dim_C N the groups are those of S^(2d+1) x N (all catalogued
    bases here are torsion-free). For d = 1 over a complex surface, the
    Gysin sequence with Euler class e [N] gives
    b_k(M) = b_k(N) - [k = 4] + b_(k-3)(N) - [k = 3]
    and a single torsion summand Z_e in H^4, e = k^1_1 k^2_2 + k^2_1 k^1_2.
    """
    if isinstance(spec, FiberJoinSpec):
        check_spec(spec)
        base = spec.base
    else:
        base, spec = spec, None
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise SpecError("d must be a positive integer")
    n = base.complex_dim
    b = betti_numbers_base(base)
    dim = 2 * n + 2 * d + 1
    if d >= n:
        ranks = _product_with_sphere(b, 2 * d + 1)
        return CohomologyReport(dim, tuple(ranks), tuple(() for _ in ranks), None, "product")
    if d == 1 and n == 2:
        if spec is None:
            raise SpecError("the d = 1 table needs K for the Euler class")
        K = spec.K
        if base.kind in ("Example38",):
            raise SpecError("Euler class on the Example38 lattice is not catalogued")
        e = K.k(1, 1) * K.k(2, 2) + K.k(2, 1) * K.k(1, 2)
        if e.denominator != 1:
            raise SpecError("Euler number needs integral classes; half-integral K is not catalogued")
        e = int(e)
        ranks = []
        for k in range(dim + 1):
            bk = b[k] if k < len(b) else 0
            bs = b[k - 3] if 0 <= k - 3 < len(b) else 0
            ranks.append(bk - (k == 4) + bs - (k == 3))
        torsion = [() for _ in ranks]
        if e > 1:
            torsion[4] = (e,)
        return CohomologyReport(dim, tuple(ranks), tuple(torsion), e, "gysin-d1")
    raise SpecError(f"cohomology for base {base.kind} with d = {d} is not catalogued")


# ---------------------------------------------------------------------------
# JSON input
# ---------------------------------------------------------------------------

_RAT = {"type": "string", "pattern": r"^[+-]?[0-9]+(/[0-9]+)?$"}

SPEC_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["base", "K"],
    "properties": {
        "schema": {"const": "1"},
        "base": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(BASE_KINDS)},
                "params": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "genus": {"type": "integer", "minimum": 0},
                        "g1": {"type": "integer", "minimum": 0},
                        "g2": {"type": "integer", "minimum": 0},
                        "degE_parity": {"enum": ["even", "odd"]},
                    },
                },
            },
        },
        "K": {
            "oneOf": [
                {"type": "array", "minItems": 2, "maxItems": 2, "items": _RAT},
                {
                    "type": "array",
                    "minItems": 2,
                    "maxItems": 2,
                    "items": {"type": "array", "minItems": 1, "maxItems": 3, "items": _RAT},
                },
            ]
        },
    },
}

_TEMPLATE = {"type": "string", "minLength": 1}

FAMILY_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["base", "ranges", "K"],
    "properties": {
        "schema": {"const": "1"},
        "name": {"type": "string"},
        "base": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(BASE_KINDS)},
                "params": {"type": "object", "additionalProperties": {"type": ["string", "integer"]}},
            },
        },
        "ranges": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": {
                "type": "array",
                "minItems": 2,
                "maxItems": 2,
                "items": {"type": "integer"},
            },
        },
        "order": {
            "type": "array",
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "string"}},
        },
        "K": {
            "type": "array",
            "minItems": 2,
            "maxItems": 2,
            "items": {"type": "array", "minItems": 1, "maxItems": 2, "items": _TEMPLATE},
        },
        "checks": {
            "type": "array",
            "items": {"enum": ["whole-cone", "csc"]},
        },
    },
}


class _LineLocator:
    """Maps JSON paths to source lines by scanning the text once."""

    _ws = re.compile(r"[ \t\n\r]*")

    def __init__(self, text: str):
        self.text = text
        self.lines: dict[tuple, int] = {}
        try:
            self._value(self._skip(0), ())
        except (ValueError, IndexError):
            pass

    def _skip(self, i: int) -> int:
        return self._ws.match(self.text, i).end()

    def _line(self, i: int) -> int:
        return self.text.count("\n", 0, i) + 1

    def _value(self, i: int, path: tuple) -> int:
        self.lines[path] = self._line(i)
        ch = self.text[i]
        if ch == "{":
            i = self._skip(i + 1)
            if self.text[i] == "}":
                return i + 1
            while True:
                key, i = json.decoder.scanstring(self.text, i + 1)
                i = self._skip(i)
                i = self._skip(i + 1)  # ':'
                i = self._skip(self._value(i, path + (key,)))
                if self.text[i] == ",":
                    i = self._skip(i + 1)
                    continue
                return i + 1
        if ch == "[":
            i = self._skip(i + 1)
            if self.text[i] == "]":
                return i + 1
            k = 0
            while True:
                i = self._skip(self._value(i, path + (k,)))
                k += 1
                if self.text[i] == ",":
                    i = self._skip(i + 1)
                    continue
                return i + 1
        if ch == '"':
            _, end = json.decoder.scanstring(self.text, i + 1)
            return end
        _, end = json.JSONDecoder().raw_decode(self.text, i)
        return end

    def line_of(self, path: Iterable) -> int | None:
        path = tuple(path)
        while path not in self.lines and path:
            path = path[:-1]
        return self.lines.get(path)


def _path_str(path: Iterable) -> str:
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _load_json(text: str, schema: dict) -> tuple[Any, _LineLocator]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    loc = _LineLocator(text)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (loc.line_of(e.absolute_path) or 0, list(e.absolute_path)))
    if errors:
        err = errors[0]
        path = list(err.absolute_path)
        raise SpecError(err.message, line=loc.line_of(path), path=_path_str(path))
    return doc, loc


def parse_spec(text: str) -> FiberJoinSpec:
    """Parse and validate a spec document; errors report the offending line."""
    doc, loc = _load_json(text, SPEC_SCHEMA)
    try:
        base = BaseManifold(doc["base"]["kind"], tuple(sorted(doc["base"].get("params", {}).items())))
    except SpecError as exc:
        raise SpecError(exc.detail, line=loc.line_of(("base",)), path="$.base") from None
    raw = doc["K"]
    rows = [[v] for v in raw] if isinstance(raw[0], str) else raw
    try:
        K = KMatrix(tuple(tuple(parse_rational(v) for v in row) for row in rows))
        spec = FiberJoinSpec(base, K)
        check_spec(spec)
    except (SpecError, ValueError) as exc:
        detail = exc.detail if isinstance(exc, SpecError) else str(exc)
        raise SpecError(detail, line=loc.line_of(("K",)), path="$.K") from None
    return spec


def load_spec(path: str) -> FiberJoinSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


def spec_to_json(spec: FiberJoinSpec) -> str:
    return json.dumps({"schema": "1", **spec.to_json()}, sort_keys=True, indent=2)


_TERM = re.compile(r"^\s*(?:([+-]?\d+(?:/\d+)?)\s*\*?\s*)?([A-Za-z_]\w*)?\s*$")


def _eval_template(expr: str, env: dict[str, int]) -> Fraction:
    """Evaluate sums of terms ``q``, ``var`` or ``q*var`` with rational q."""
    total = Fraction(0)
    for raw in re.split(r"(?=[+-])", expr.replace(" ", "")):
        if not raw:
            continue
        sign = 1
        term = raw
        if term[0] in "+-" and not term[1:2].isdigit():
            sign = -1 if term[0] == "-" else 1
            term = term[1:]
        m = _TERM.match(term)
        if not m or (m.group(1) is None and m.group(2) is None):
            raise SpecError(f"cannot parse template term {raw!r} in {expr!r}")
        coef = parse_rational(m.group(1)) if m.group(1) else Fraction(1)
        if m.group(2):
            if m.group(2) not in env:
                raise SpecError(f"template uses unknown variable {m.group(2)!r}")
            coef *= env[m.group(2)]
        total += sign * coef
    return total


@dataclass(frozen=True)
class Family:
    name: str
    base_kind: str
    base_params: tuple[tuple[str, Any], ...]
    ranges: tuple[tuple[str, int, int], ...]
    order: tuple[tuple[str, str], ...]
    K: tuple[tuple[str, ...], ...]
    checks: tuple[str, ...] = field(default=("whole-cone", "csc"))


def parse_family(text: str) -> Family:
    doc, loc = _load_json(text, FAMILY_SCHEMA)
    names = set(doc["ranges"])
    for key, (lo, hi) in doc["ranges"].items():
        if lo > hi:
            raise SpecError(f"empty range for {key}", line=loc.line_of(("ranges", key)), path=f"$.ranges.{key}")
    for i, (a, b) in enumerate(doc.get("order", [])):
        for v in (a, b):
            if v not in names:
                raise SpecError(f"order refers to unknown variable {v!r}", line=loc.line_of(("order", i)), path=f"$.order[{i}]")
    fam = Family(
        name=doc.get("name", "family"),
        base_kind=doc["base"]["kind"],
        base_params=tuple(sorted(doc["base"].get("params", {}).items())),
        ranges=tuple((k, lo, hi) for k, (lo, hi) in sorted(doc["ranges"].items())),
        order=tuple((a, b) for a, b in doc.get("order", [])),
        K=tuple(tuple(row) for row in doc["K"]),
        checks=tuple(doc.get("checks", ["whole-cone", "csc"])),
    )
    # evaluate once at the lower corner so template errors surface with a line
    env = {k: lo for k, lo, _ in fam.ranges}
    for i, row in enumerate(fam.K):
        for j, expr in enumerate(row):
            try:
                _eval_template(expr, env)
            except SpecError as exc:
                raise SpecError(exc.detail, line=loc.line_of(("K", i, j)), path=f"$.K[{i}][{j}]") from None
    return fam


def load_family(path: str) -> Family:
    with open(path, encoding="utf-8") as fh:
        return parse_family(fh.read())


def expand_family(fam: Family) -> list[tuple[dict[str, int], FiberJoinSpec]]:
    """All cells of the family in deterministic (lexicographic) order."""
    import itertools

    names = [k for k, _, _ in fam.ranges]
    grids = [range(lo, hi + 1) for _, lo, hi in fam.ranges]
    cells = []
    for values in itertools.product(*grids):
        env = dict(zip(names, values))
        if any(not env[a] < env[b] for a, b in fam.order):
            continue
        params = tuple(
            (k, int(_eval_template(v, env)) if isinstance(v, str) and k != "degE_parity" else v)
            for k, v in fam.base_params
        )
        base = BaseManifold(fam.base_kind, params)
        K = KMatrix(tuple(tuple(_eval_template(e, env) for e in row) for row in fam.K))
        cells.append((env, FiberJoinSpec(base, K)))
    return cells
