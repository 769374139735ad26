"""Integer binary forms and exact linear algebra.

A form of degree n is a tuple ``c`` of n + 1 integers meaning
``sum_k c[k] * X^(n-k) * Y^k`` (highest power of X first).
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

import gmpy2


def degree(f) -> int:
    return len(f) - 1


def is_zero(f) -> bool:
    return not any(f)


def add(f, g):
    if len(f) != len(g):
        raise ValueError("forms of different degree")
    return tuple(a + b for a, b in zip(f, g))


def sub(f, g):
    if len(f) != len(g):
        raise ValueError("forms of different degree")
    return tuple(a - b for a, b in zip(f, g))


def scale(f, k):
    return tuple(k * a for a in f)


def mul(f, g):
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return tuple(out)


def power(f, e: int):
    out = (1,)
    for _ in range(e):
        out = mul(out, f)
    return out


def dx(f):
    n = degree(f)
    if n == 0:
        return (0,)
    return tuple((n - k) * f[k] for k in range(n))


def dy(f):
    n = degree(f)
    if n == 0:
        return (0,)
    return tuple(k * f[k] for k in range(1, n + 1))


def content(f) -> int:
    return reduce(math.gcd, f, 0)


def primitive(f):
    """Divide out the content and make the first nonzero coefficient positive."""
    c = content(f)
    if c == 0:
        return tuple(f)
    lead = next(a for a in f if a)
    if lead < 0:
        c = -c
    return tuple(a // c for a in f)


def compose(f, p, q):
    """``f(p, q)`` for forms ``p, q`` of a common degree."""
    n = degree(f)
    if len(p) != len(q):
        raise ValueError("substituted forms must share a degree")
    ppow = [(1,)]
    qpow = [(1,)]
    for _ in range(n):
        ppow.append(mul(ppow[-1], p))
        qpow.append(mul(qpow[-1], q))
    out = (0,) * (n * degree(p) + 1)
    for k, c in enumerate(f):
        if c:
            out = add(out, scale(mul(ppow[n - k], qpow[k]), c))
    return out


def evaluate_pair(f, g, x, y):
    """``(f(x, y), g(x, y))`` for forms of equal degree, sharing the powers of y."""
    n = degree(f)
    x = gmpy2.mpz(x)
    y = gmpy2.mpz(y)
    terms = [k for k in range(n + 1) if f[k] or g[k]]
    if len(terms) <= 3:
        # sparse forms (monomials and the like): powering by squaring beats Horner on huge inputs
        fa = gmpy2.mpz(0)
        ga = gmpy2.mpz(0)
        for k in terms:
            t = x ** (n - k) * y**k
            fa += f[k] * t
            ga += g[k] * t
        return fa, ga
    fa = gmpy2.mpz(f[0])
    ga = gmpy2.mpz(g[0])
    ypow = gmpy2.mpz(1)
    for k in range(1, n + 1):
        ypow *= y
        fa = fa * x + f[k] * ypow
        ga = ga * x + g[k] * ypow
    return fa, ga


def evaluate_pair_mod(f, g, x, y, m):
    """``evaluate_pair`` reduced mod ``m`` at every step."""
    n = degree(f)
    fa = f[0] % m
    ga = g[0] % m
    ypow = 1
    for k in range(1, n + 1):
        ypow = ypow * y % m
        fa = (fa * x + f[k] * ypow) % m
        ga = (ga * x + g[k] * ypow) % m
    return fa, ga


def dehomogenize(f):
    """Coefficients of ``f(t, 1)`` highest first, leading zeros stripped."""
    i = 0
    while i < len(f) - 1 and f[i] == 0:
        i += 1
    return tuple(f[i:])


def y_multiplicity(f) -> int:
    """Order of vanishing of the form at (1:0), i.e. the power of Y dividing it."""
    return degree(f) - (len(dehomogenize(f)) - 1)


def sylvester(f, g):
    """Sylvester matrix of two forms; its determinant is their resultant."""
    m, n = degree(f), degree(g)
    size = m + n
    rows = []
    for i in range(n):
        rows.append([0] * i + list(f) + [0] * (size - m - 1 - i))
    for i in range(m):
        rows.append([0] * i + list(g) + [0] * (size - n - 1 - i))
    return rows


def det(matrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    a = [list(row) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def resultant(f, g) -> int:
    return det(sylvester(f, g))


def solve(matrix, rhs):
    """Exact solution of a nonsingular square system over the rationals."""
    n = len(matrix)
    a = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        a[k], a[piv] = a[piv], a[k]
        for i in range(n):
            if i != k and a[i][k] != 0:
                factor = a[i][k] / a[k][k]
                a[i] = [u - factor * v for u, v in zip(a[i], a[k])]
    return [a[i][n] / a[i][i] for i in range(n)]


def bezout_pair(f, g, res, target_index):
    """Forms A, B of degree n - 1 with ``A f + B g = res * X^(2n-1-j) Y^j``.

    ``target_index`` is j; the solution is the corresponding column of the
    adjugate of the (transposed) Sylvester matrix, hence integral.
    """
    n = degree(f)
    size = 2 * n
    # column c of the linear map (A, B) -> A f + B g
    cols = []
    for i in range(n):
        cols.append([0] * i + list(f) + [0] * (n - 1 - i))
    for i in range(n):
        cols.append([0] * i + list(g) + [0] * (n - 1 - i))
    matrix = [[cols[c][r] for c in range(size)] for r in range(size)]
    rhs = [0] * size
    rhs[target_index] = res
    sol = solve(matrix, rhs)
    if any(v.denominator != 1 for v in sol):
        raise ArithmeticError("Bezout coefficients not integral")
    sol = [int(v) for v in sol]
    return tuple(sol[:n]), tuple(sol[n:])


def interpolate(points):
    """Integer-coefficient polynomial through ``(t, value)`` pairs, highest degree first.

    Raises if the interpolant has non-integral coefficients.
    """
    n = len(points)
    coeffs = [Fraction(0)] * n  # lowest degree first
    for i, (ti, vi) in enumerate(points):
        if vi == 0:
            continue
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, (tj, _) in enumerate(points):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for k in range(len(basis) - 1):
                basis[k] -= tj * basis[k + 1]
            denom *= ti - tj
        for k in range(n):
            coeffs[k] += vi * basis[k] / denom
    if any(c.denominator != 1 for c in coeffs):
        raise ArithmeticError("interpolant is not integral")
    return tuple(int(c) for c in reversed(coeffs))
