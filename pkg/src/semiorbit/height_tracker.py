"""Heights deep in an orbit without carrying million-digit coordinates.

After a step ``(x, y) -> (F(x,y), G(x,y)) / g`` the cancelled factor ``g``
divides the map's resultant, so it is determined by ``(x, y)`` modulo that
resultant.  A tracked point therefore keeps

* exact residues of its coordinates modulo ``R**k`` (``R`` the product of the
  generators' resultants; one power is consumed per step), and
* the direction ``(u, v) = (x, y) / max(|x|, |y|)`` and the height ``L`` as
  multiprecision floats.

The cancellation is exact and the magnitude is well conditioned because
``max(|F(u,v)|, |G(u,v)|)`` is bounded away from zero for unit ``(u, v)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2

from . import _forms
from .p1_arith import ProjPointQ, RationalMapQ, evaluate

DEFAULT_PRECISION = 256
DEFAULT_EXACT_BITS = 4096


@dataclass(frozen=True)
class ApproxPoint:
    xr: int
    yr: int
    k: int
    u: object
    v: object
    L: object


class HeightTracker:
    """Steps points exactly while they are small and switches to :class:`ApproxPoint` after.

    Callers pass the number of steps still to come so the residue modulus
    chosen at the switch is large enough.
    """

    def __init__(self, maps, precision: int = DEFAULT_PRECISION, exact_bits: int = DEFAULT_EXACT_BITS):
        self.maps = tuple(maps)
        self.precision = precision
        self.exact_bits = exact_bits
        self.R = math.prod(abs(phi.resultant) for phi in self.maps)

    def _to_approx(self, P: ProjPointQ, remaining: int) -> ApproxPoint:
        k = remaining + 1
        mod = self.R**k
        with gmpy2.context(precision=self.precision):
            m = gmpy2.mpfr(P.height_bound)
            return ApproxPoint(P.x % mod, P.y % mod, k, gmpy2.mpfr(P.x) / m, gmpy2.mpfr(P.y) / m, gmpy2.log(gmpy2.mpz(P.height_bound)))

    def step(self, node, i: int, remaining: int):
        """Image of ``node`` under generator ``i``; ``remaining`` counts steps still to come after this one."""
        phi = self.maps[i]
        if isinstance(node, ProjPointQ):
            if node.height_bound.bit_length() <= self.exact_bits:
                return evaluate(phi, node)
            node = self._to_approx(node, remaining + 1)
        return self._approx_step(phi, node)

    def _approx_step(self, phi: RationalMapQ, a: ApproxPoint) -> ApproxPoint:
        if a.k < 1:
            raise ValueError("residue precision exhausted; pass a larger remaining count")
        mod = self.R**a.k
        fr, gr = _forms.evaluate_pair_mod(phi.F, phi.G, a.xr, a.yr, mod)
        res = abs(phi.resultant)
        g = math.gcd(math.gcd(fr % res, gr % res), res)
        next_mod = self.R ** (a.k - 1)
        with gmpy2.context(precision=self.precision):
            fv, gv = _eval_real(phi.F, phi.G, a.u, a.v)
            m = max(abs(fv), abs(gv))
            L = phi.degree * a.L + gmpy2.log(m) - gmpy2.log(g)
            return ApproxPoint((fr // g) % next_mod, (gr // g) % next_mod, a.k - 1, fv / m, gv / m, L)

    @staticmethod
    def height(node) -> float:
        if isinstance(node, ProjPointQ):
            return math.log(node.height_bound)
        return float(node.L)


def _eval_real(F, G, u, v):
    fa = gmpy2.mpfr(F[0])
    ga = gmpy2.mpfr(G[0])
    vpow = gmpy2.mpfr(1)
    for k in range(1, len(F)):
        vpow *= v
        fa = fa * u + F[k] * vpow
        ga = ga * u + G[k] * vpow
    return fa, ga
