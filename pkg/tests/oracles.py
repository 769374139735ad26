"""Slow, obviously-correct reference implementations used by the tests."""

import math
from fractions import Fraction

import mpmath
import sympy

from semiorbit.p1_arith import RationalMapQ, normalize


def brute_weights(d, X):
    """Weights of every word (including the empty one) of weight <= X, by tree enumeration."""
    out = []

    def walk(w):
        out.append(w)
        for di in d:
            if w * di <= X:
                walk(w * di)

    walk(1)
    return out


def rho_mp(d, dps=40):
    mpmath.mp.dps = dps
    return mpmath.findroot(lambda s: sum(mpmath.mpf(w) ** -s for w in d) - 1, (mpmath.mpf("0.01"), mpmath.mpf(20)), solver="bisect")


def naive_eval(phi: RationalMapQ, x, y):
    """Evaluate with plain sums of monomials, no Horner, then normalize."""
    n = phi.degree
    f = sum(c * x ** (n - k) * y**k for k, c in enumerate(phi.F))
    g = sum(c * x ** (n - k) * y**k for k, c in enumerate(phi.G))
    return normalize(f, g)


def brute_census(maps, P, depth):
    """Every word of length 1..depth with its image, no pruning; words outermost first."""
    out = []
    level = [((), (P.x, P.y))]
    for _ in range(depth):
        nxt = []
        for word, (x, y) in level:
            for i, phi in enumerate(maps):
                Q = naive_eval(phi, x, y)
                nxt.append(((i,) + word, (Q.x, Q.y)))
        out.extend(nxt)
        level = nxt
    return out


def brute_height_ok(xy, X):
    """Exact ``ln max(|x|,|y|) <= X`` for rational X via high-precision exp."""
    mpmath.mp.dps = 60
    m = max(abs(xy[0]), abs(xy[1]))
    return mpmath.log(m) <= mpmath.mpf(X)


def _sym(form, var):
    X, Y = sympy.symbols("X Y")
    n = len(form) - 1
    return sum(c * X ** (n - k) * Y**k for k, c in enumerate(form)), X, Y


def critical_points_rational(phi):
    """All critical points as projective pairs, or None if some are irrational."""
    X, Y = sympy.symbols("X Y")
    F, _, _ = _sym(phi.F, None)
    G, _, _ = _sym(phi.G, None)
    W = sympy.expand(sympy.diff(F, X) * sympy.diff(G, Y) - sympy.diff(F, Y) * sympy.diff(G, X))
    t = sympy.symbols("t")
    w_aff = sympy.Poly(W.subs({X: t, Y: 1}), t)
    pts = []
    if w_aff.degree() < 2 * phi.degree - 2:
        pts.append((1, 0))
    for root in sympy.roots(w_aff, multiple=False):
        if not root.is_rational:
            return None
        r = Fraction(int(root.p), int(root.q))
        pts.append((r.numerator, r.denominator))
    return pts


def preimage_count(phi, value):
    """Number of distinct points of P^1(C) mapping to ``value`` (a projective pair)."""
    X, Y = sympy.symbols("X Y")
    F, _, _ = _sym(phi.F, None)
    G, _, _ = _sym(phi.G, None)
    a, b = value
    H = sympy.expand(b * F - a * G)  # vanishes exactly on the fibre over (a:b)
    t = sympy.symbols("t")
    h = sympy.Poly(H.subs({X: t, Y: 1}), t)
    count = 1 if h.degree() < phi.degree else 0  # (1:0) is in the fibre
    if h.degree() > 0:
        count += sympy.sqf_part(h).degree()
    return count


def simple_by_preimages(phi):
    """Critically simple iff every critical value has exactly d - 1 preimages; None if not decidable here."""
    pts = critical_points_rational(phi)
    if pts is None:
        return None
    images = (normalize(*_eval_pair(phi, x, y)) for x, y in pts)
    values = {(Q.x, Q.y) for Q in images}
    return all(preimage_count(phi, v) == phi.degree - 1 for v in values)


def _eval_pair(phi, x, y):
    n = phi.degree
    f = sum(c * x ** (n - k) * y**k for k, c in enumerate(phi.F))
    g = sum(c * x ** (n - k) * y**k for k, c in enumerate(phi.G))
    return f, g


def height_float(xy):
    return math.log(max(abs(xy[0]), abs(xy[1])))
