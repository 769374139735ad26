"""Exact arithmetic on the projective line over the rationals.

Points are coprime integer pairs with the Weil height ``ln max(|x|, |y|)``
(natural log throughout).  Maps are pairs of integer binary forms of a common
degree with nonzero resultant.  Critical values are read off the binary form
``Res_{X,Y}(U F - T G, W)`` where ``W`` is the Wronskian; that form vanishes
exactly at the critical values ``(T:U)``, with multiplicity, so both affine
charts are handled at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from itertools import combinations

import gmpy2

from . import _forms
from .errors import InvalidInputError, InvariantError


@dataclass(frozen=True)
class ProjPointQ:
    """Normalized point ``(x:y)``: coprime, ``y > 0`` or ``(1:0)``.

    Build through :func:`normalize` or :func:`point`; the constructor trusts
    its arguments because re-checking coprimality of huge coordinates is costly.
    """

    x: int
    y: int

    def __str__(self):
        return f"({self.x}:{self.y})"

    @property
    def height_bound(self) -> int:
        """``max(|x|, |y|)``; the height is its natural log."""
        return max(abs(self.x), abs(self.y))


def normalize(x: int, y: int) -> ProjPointQ:
    x, y = int(x), int(y)
    if x == 0 and y == 0:
        raise InvalidInputError("(0, 0) is not a point of P^1")
    g = math.gcd(x, y)
    x, y = x // g, y // g
    if y < 0 or (y == 0 and x < 0):
        x, y = -x, -y
    return ProjPointQ(x, y)


def point(value) -> ProjPointQ:
    """Point from an int, Fraction, ``(x, y)`` pair or an existing point."""
    if isinstance(value, ProjPointQ):
        return value
    if isinstance(value, (int, Fraction)):
        value = Fraction(value)
        return normalize(value.numerator, value.denominator)
    x, y = value
    return normalize(x, y)


INFINITY = ProjPointQ(1, 0)


def height(P: ProjPointQ) -> float:
    return math.log(P.height_bound)


def _clear_denominators(coeffs):
    coeffs = [Fraction(c) for c in coeffs]
    lcm = reduce(lambda a, b: a * b // math.gcd(a, b), (c.denominator for c in coeffs), 1)
    return [int(c * lcm) for c in coeffs]


def _strip(coeffs):
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[0] == 0:
        coeffs.pop(0)
    return coeffs


def _poly_str(coeffs, var="x"):
    coeffs = _strip(coeffs)
    n = len(coeffs) - 1
    terms = []
    for k, c in enumerate(coeffs):
        if c == 0:
            continue
        e = n - k
        mono = "" if e == 0 else var if e == 1 else f"{var}^{e}"
        if mono and abs(c) == 1:
            body = mono
        else:
            body = f"{abs(c)}{mono}"
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


@dataclass(frozen=True)
class RationalMapQ:
    """Self-map ``(X:Y) -> (F(X,Y) : G(X,Y))`` of P^1 with integer forms of degree d >= 2."""

    F: tuple[int, ...]
    G: tuple[int, ...]

    def __post_init__(self):
        F, G = tuple(int(c) for c in self.F), tuple(int(c) for c in self.G)
        if len(F) != len(G):
            raise InvalidInputError("F and G must have the same degree")
        if len(F) < 3:
            raise InvalidInputError("maps must have degree >= 2")
        both = _forms.primitive(F + G)
        if not any(both):
            raise InvalidInputError("F and G are both zero")
        F, G = both[: len(F)], both[len(F):]
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "G", G)
        if self.resultant == 0:
            raise InvalidInputError("F and G share a common factor (resultant is zero)")

    @classmethod
    def from_coefficients(cls, numerator, denominator) -> "RationalMapQ":
        """Map ``x -> num(x) / den(x)`` from coefficient lists, highest degree first.

        Lists may be zero-padded to the map degree; rational coefficients are
        cleared to a primitive integer pair.
        """
        numerator, denominator = list(numerator), list(denominator)
        if not numerator or not denominator:
            raise InvalidInputError("coefficient lists must be non-empty")
        joint = _clear_denominators(numerator + denominator)
        num, den = _strip(joint[: len(numerator)]), _strip(joint[len(numerator):])
        if not any(den):
            raise InvalidInputError("denominator is zero")
        d = max(len(num), len(den)) - 1
        F = (0,) * (d + 1 - len(num)) + tuple(num)
        G = (0,) * (d + 1 - len(den)) + tuple(den)
        return cls(F, G)

    @property
    def degree(self) -> int:
        return len(self.F) - 1

    d = degree

    def __str__(self):
        num = _poly_str(_forms.dehomogenize(self.F))
        den = _poly_str(_forms.dehomogenize(self.G))
        if den == "1":
            return num
        return f"({num})/({den})"

    def coefficient_lists(self):
        """Numerator and denominator coefficient lists in ingestion format."""
        return list(self.F), list(self.G)

    @cached_property
    def resultant(self) -> int:
        return _forms.resultant(self.F, self.G)

    def __call__(self, P: ProjPointQ) -> ProjPointQ:
        return evaluate(self, P)

    def compose(self, other: "RationalMapQ") -> "RationalMapQ":
        """``self o other``."""
        return RationalMapQ(_forms.compose(self.F, other.F, other.G), _forms.compose(self.G, other.F, other.G))

    @cached_property
    def _bezout(self):
        """Integer forms with ``A1 F + B1 G = R X^(2d-1)`` and ``A2 F + B2 G = R Y^(2d-1)``.

        The two identities are divided by the gcd of every coefficient and R.
        """
        res = self.resultant
        n = self.degree
        A1, B1 = _forms.bezout_pair(self.F, self.G, res, 0)
        A2, B2 = _forms.bezout_pair(self.F, self.G, res, 2 * n - 1)
        k = reduce(math.gcd, A1 + B1 + A2 + B2, abs(res))
        return tuple(a // k for a in A1), tuple(b // k for b in B1), tuple(a // k for a in A2), tuple(b // k for b in B2), res // k

    @cached_property
    def height_offset_bound(self) -> float:
        return height_offset_bound(self)


def evaluate(phi: RationalMapQ, P: ProjPointQ) -> ProjPointQ:
    fx, gx = _forms.evaluate_pair(phi.F, phi.G, P.x, P.y)
    # gcd(F(x,y), G(x,y)) divides the resultant for coprime (x, y)
    res = abs(phi.resultant)
    g = gmpy2.gcd(gmpy2.gcd(fx % res, gx % res), res)
    if g == 0:
        raise InvariantError(f"{phi} sends {P} to (0, 0)")
    if g != 1:
        fx = gmpy2.divexact(fx, g)
        gx = gmpy2.divexact(gx, g)
    if gx < 0 or (gx == 0 and fx < 0):
        fx, gx = -fx, -gx
    if fx == 0 and gx == 0:
        raise InvariantError(f"{phi} sends {P} to (0, 0)")
    return ProjPointQ(int(fx), int(gx))


def height_offset_bound(phi: RationalMapQ) -> float:
    """A constant C with ``|h(phi(P)) - d h(P)| <= C`` for every rational point P.

    Upper direction: ``|F(x,y)| <= (d+1) max|coeff| * max(|x|,|y|)^d``.
    Lower direction: if ``A1 F + B1 G = R X^(2d-1)`` and ``A2 F + B2 G = R Y^(2d-1)``
    then ``max(|F|, |G|) >= |R| M^d / kappa`` with ``kappa`` the largest
    coefficient l1-norm of (A_i, B_i), while the gcd removed by normalization
    divides ``R``; so ``h(phi P) >= d h(P) - ln kappa``.
    """
    d = phi.degree
    upper = math.log((d + 1) * max(abs(c) for c in phi.F + phi.G))
    A1, B1, A2, B2, _ = phi._bezout
    kappa = max(sum(map(abs, A1)) + sum(map(abs, B1)), sum(map(abs, A2)) + sum(map(abs, B2)))
    lower = math.log(kappa) if kappa > 1 else 0.0
    return max(upper, lower, 0.0)


def wronskian(phi: RationalMapQ) -> tuple[int, ...]:
    """``F_X G_Y - F_Y G_X`` with content removed (degree 2d - 2)."""
    W = _forms.sub(_forms.mul(_forms.dx(phi.F), _forms.dy(phi.G)), _forms.mul(_forms.dy(phi.F), _forms.dx(phi.G)))
    if _forms.is_zero(W):
        raise InvariantError(f"Wronskian of {phi} vanishes identically")
    return _forms.primitive(W)


def critical_value_form(phi: RationalMapQ) -> tuple[int, ...]:
    """Primitive binary form ``R(T, U)`` of degree 2d - 2 whose roots are the critical values.

    ``R(t, 1) = Res(F - t G, W)`` is a polynomial of degree <= 2d - 2 in t, so it
    is recovered exactly from 2d - 1 integer evaluations.
    """
    W = wronskian(phi)
    n = 2 * phi.degree - 2
    samples = []
    for t in range(n + 1):
        samples.append((t, _forms.resultant(_forms.sub(phi.F, _forms.scale(phi.G, t)), W)))
    coeffs = _forms.interpolate(samples)
    coeffs = (0,) * (n + 1 - len(coeffs)) + coeffs
    if _forms.is_zero(coeffs):
        raise InvariantError(f"critical value form of {phi} vanishes identically")
    return _forms.primitive(coeffs)


def _sympy_poly(coeffs):
    from sympy import Poly, Symbol

    return Poly(list(coeffs), Symbol("t"), domain="ZZ")


def _squarefree_form(form) -> bool:
    """A binary form is squarefree iff its dehomogenization is and (1:0) is at most a simple root."""
    if _forms.y_multiplicity(form) > 1:
        return False
    poly = _sympy_poly(_forms.dehomogenize(form))
    if poly.degree() <= 0:
        return True
    return poly.gcd(poly.diff()).degree() == 0


@dataclass(frozen=True)
class CriticalData:
    wronskian: tuple[int, ...]
    crit_value_form: tuple[int, ...]
    infinity_is_critical_value: bool
    simple: bool
    rational_values: tuple[Fraction, ...]
    irrational_factors: tuple[tuple[int, ...], ...]

    @property
    def crit_value_poly(self) -> tuple[int, ...]:
        """``R(t, 1)``, highest degree first."""
        return _forms.dehomogenize(self.crit_value_form)

    @property
    def crit_values_description(self) -> list[str]:
        out = [str(v) for v in self.rational_values]
        if self.infinity_is_critical_value:
            out.append("inf")
        out.extend(f"root of {_poly_str(f, 't')}" for f in self.irrational_factors)
        return out


def critical_values(phi: RationalMapQ) -> CriticalData:
    W = wronskian(phi)
    R = critical_value_form(phi)
    infinity = R[0] == 0  # coefficient of T^(2d-2); vanishes iff U divides R
    simple = _squarefree_form(W) and _squarefree_form(R)
    rational, irrational = [], []
    poly = _sympy_poly(_forms.dehomogenize(R))
    if poly.degree() > 0:
        _, factors = poly.factor_list()
        for fac, _mult in factors:
            c = [int(v) for v in fac.all_coeffs()]
            if len(c) == 2:
                rational.append(Fraction(-c[1], c[0]))
            else:
                irrational.append(tuple(c))
    return CriticalData(W, R, infinity, simple, tuple(sorted(set(rational))), tuple(sorted(set(irrational))))


def are_critically_separate(phi: RationalMapQ, psi: RationalMapQ) -> bool:
    a, b = critical_values(phi), critical_values(psi)
    if a.infinity_is_critical_value and b.infinity_is_critical_value:
        return False
    pa, pb = _sympy_poly(a.crit_value_poly), _sympy_poly(b.crit_value_poly)
    return pa.gcd(pb).degree() <= 0


@dataclass(frozen=True)
class GenericSetReport:
    maps: tuple[RationalMapQ, ...]
    simple: tuple[bool, ...]
    separate: dict[tuple[int, int], bool]
    degree_ok: tuple[bool, ...]

    @property
    def critically_simple(self) -> bool:
        return all(self.simple)

    @property
    def critically_separate(self) -> bool:
        return all(self.separate.values())

    @property
    def degrees_at_least_four(self) -> bool:
        return all(self.degree_ok)

    @property
    def generic(self) -> bool:
        return self.critically_simple and self.critically_separate and self.degrees_at_least_four


def check_generic_set(maps) -> GenericSetReport:
    """Check the critically-simple / critically-separate / degree >= 4 hypotheses."""
    maps = tuple(maps)
    if len(maps) < 2:
        raise InvalidInputError("need at least two maps")
    simple = tuple(critical_values(phi).simple for phi in maps)
    separate = {(i, j): are_critically_separate(maps[i], maps[j]) for i, j in combinations(range(len(maps)), 2)}
    degree_ok = tuple(phi.degree >= 4 for phi in maps)
    return GenericSetReport(maps, simple, separate, degree_ok)
