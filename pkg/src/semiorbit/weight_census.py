"""Counting words of bounded multiplicative weight in a free semigroup.

A word ``w = a_{i1} ... a_{im}`` over an alphabet of size ``r`` has weight
``d_{i1} * ... * d_{im}``.  For a semigroup of self-maps with degrees ``d`` the
weight of a word is the degree of the corresponding composition, so everything
here doubles as the degree-growth function of the semigroup.

Exact counts come from the recurrence ``a_n = sum_{d_i | n} a_{n / d_i}``
(``a_1 = 1`` for the empty word); asymptotics come from the growth exponent
``rho`` solving ``sum d_i^-rho = 1`` and, depending on whether the weights are
powers of a common base, either a Tauberian constant or a linear recurrence.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from .errors import InvalidInputError, ResourceLimitError

MAX_TABLE_SIZE = 10**8
MAX_WEIGHT = 2**63 - 1


@dataclass(frozen=True)
class WeightVector:
    d: tuple[int, ...]

    def __post_init__(self):
        d = tuple(self.d)
        if not d:
            raise InvalidInputError("weight vector must be non-empty")
        for w in d:
            if isinstance(w, bool) or not isinstance(w, int):
                raise InvalidInputError(f"weights must be integers, got {w!r}")
            if w < 2:
                raise InvalidInputError(f"weights must be >= 2, got {w}")
            if w > MAX_WEIGHT:
                raise InvalidInputError(f"weight {w} exceeds 2**63 - 1")
        object.__setattr__(self, "d", d)

    @property
    def r(self) -> int:
        return len(self.d)

    def __iter__(self):
        return iter(self.d)

    def __len__(self):
        return len(self.d)


def as_weights(d) -> WeightVector:
    if isinstance(d, WeightVector):
        return d
    return WeightVector(tuple(d))


def _require_r2(d: WeightVector):
    if d.r < 2:
        raise InvalidInputError("growth exponent needs at least two weights (r >= 2)")


@dataclass(frozen=True)
class CyclicClassification:
    """Either acyclic, or cyclic with ``base ** exponents[i] == d[i]`` and gcd(exponents) == 1."""

    cyclic: bool
    base: int | None = None
    exponents: tuple[int, ...] | None = None

    def __str__(self):
        if not self.cyclic:
            return "acyclic"
        return f"cyclic(base={self.base};exponents={','.join(map(str, self.exponents))})"


@dataclass(frozen=True)
class GrowthExponent:
    rho: float
    residual: float

    def __float__(self):
        return self.rho


@dataclass(frozen=True)
class CyclicGrowth:
    theta: float
    C: float
    rho: float


@dataclass
class CountTable:
    """Sparse table of ``a_n`` (words of weight exactly ``n``) for ``n <= N``.

    Only weights that actually occur are stored; ``a(n)`` is zero elsewhere.
    With ``include_identity`` false the empty word is dropped, so ``a(1) == 0``
    while every ``a(n)``, ``n >= 2``, is unchanged.
    """

    N: int
    include_identity: bool
    coefficients: dict[int, int]
    _keys: list[int] = field(init=False, repr=False)
    _prefix: list[int] = field(init=False, repr=False)

    def __post_init__(self):
        self._keys = sorted(self.coefficients)
        total = 0
        self._prefix = []
        for n in self._keys:
            total += self.coefficients[n]
            self._prefix.append(total)

    def a(self, n: int) -> int:
        return self.coefficients.get(n, 0)

    def cumulative(self, x) -> int:
        """Number of words of weight ``<= x`` (any real ``x <= N``)."""
        if x > self.N:
            raise InvalidInputError(f"query {x} beyond table size {self.N}")
        i = bisect.bisect_right(self._keys, math.floor(x))
        return self._prefix[i - 1] if i else 0

    def support(self) -> list[int]:
        return list(self._keys)

    def as_list(self) -> list[int]:
        """Dense ``[a_0, a_1, ..., a_N]`` with ``a_0 = 0``."""
        out = [0] * (self.N + 1)
        for n, c in self.coefficients.items():
            out[n] = c
        return out


def weight_sum(d, s: float) -> float:
    """G(s) = sum d_i^-s."""
    return math.fsum(w ** -s for w in as_weights(d))


def weight_sum_derivative(d, s: float) -> float:
    return -math.fsum(math.log(w) * w ** -s for w in as_weights(d))


def solve_rho(d, tol: float = 1e-12, max_iter: int = 200) -> GrowthExponent:
    """Unique positive root of ``sum d_i^-s = 1`` by bisection.

    G is strictly decreasing with G(0) = r > 1 and G(ln r / ln min d) <= 1,
    which brackets the root.
    """
    d = as_weights(d)
    _require_r2(d)
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    lo, hi = 0.0, math.log(d.r) / math.log(min(d.d))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if weight_sum(d, mid) > 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol and abs(weight_sum(d, hi) - 1.0) <= tol:
            break
    best = min((lo, hi), key=lambda s: abs(weight_sum(d, s) - 1.0))
    residual = abs(weight_sum(d, best) - 1.0)
    if residual > tol:
        raise InvalidInputError(f"tolerance {tol} not reachable in double precision (residual {residual})")
    return GrowthExponent(best, residual)


def _rho_value(d: WeightVector, rho) -> float:
    if rho is None:
        return solve_rho(d).rho
    return float(rho)


def count_table(d, N: int, include_identity: bool = True, max_size: int = MAX_TABLE_SIZE) -> CountTable:
    """Build ``a_1..a_N`` from the divisor recurrence, visiting only reachable weights."""
    d = as_weights(d)
    if N < 1:
        raise InvalidInputError("table size must be >= 1")
    if N > max_size:
        raise ResourceLimitError(f"count table size {N} exceeds limit {max_size}")
    weights = sorted(set(d.d))
    mult = {w: d.d.count(w) for w in weights}
    coeff = {1: 1}
    heap = []
    seen = {1}
    for w in weights:
        if w <= N and w not in seen:
            seen.add(w)
            heapq.heappush(heap, w)
    while heap:
        n = heapq.heappop(heap)
        coeff[n] = sum(mult[w] * coeff.get(n // w, 0) for w in weights if n % w == 0)
        for w in weights:
            m = n * w
            if m <= N and m not in seen:
                seen.add(m)
                heapq.heappush(heap, m)
    if not include_identity:
        del coeff[1]
    return CountTable(N, include_identity, coeff)


def count_exact(d, X: int, include_identity: bool = True, max_size: int = MAX_TABLE_SIZE) -> int:
    """Exact number of words of weight at most ``X``."""
    if X < 1:
        raise InvalidInputError("X must be >= 1")
    X = math.floor(X)
    return count_table(d, X, include_identity, max_size).cumulative(X)


def _factorize(n: int) -> dict[int, int]:
    from sympy import factorint

    return {int(p): int(e) for p, e in factorint(n).items()}


def classify(d) -> CyclicClassification:
    """Decide whether all weights are powers of a single integer.

    Weights are cyclic exactly when their prime exponent vectors share a
    support and are pairwise proportional; the base is then the product of
    ``p ** (e_p / g)`` with ``g`` the gcd of one vector's exponents.
    """
    d = as_weights(d)
    vectors = [_factorize(w) for w in d]
    support = set(vectors[0])
    if any(set(v) != support for v in vectors):
        return CyclicClassification(False)
    primes = sorted(support)
    # primitive direction of the first vector; every other must be an integer multiple
    g0 = reduce(math.gcd, (vectors[0][p] for p in primes))
    direction = {p: vectors[0][p] // g0 for p in primes}
    exponents = []
    for v in vectors:
        k = Fraction(v[primes[0]], direction[primes[0]])
        if k.denominator != 1 or any(v[p] != k * direction[p] for p in primes):
            return CyclicClassification(False)
        exponents.append(int(k))
    g = reduce(math.gcd, exponents)
    base = math.prod(p ** (direction[p] * g) for p in primes)
    return CyclicClassification(True, base, tuple(e // g for e in exponents))


def acyclic_constant(d, rho=None) -> float:
    """Leading constant ``-1 / (rho G'(rho))`` of the word count for acyclic weights."""
    d = as_weights(d)
    _require_r2(d)
    if classify(d).cyclic:
        raise InvalidInputError("weights are cyclic; the count has no single leading constant")
    rho = _rho_value(d, rho)
    return 1.0 / (rho * -weight_sum_derivative(d, rho))


def _exponent_polynomial_root(a: tuple[int, ...], tol: float = 1e-15) -> float:
    """Root in (0, 1) of ``1 - sum x^a_i`` (strictly decreasing on (0, 1))."""
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= tol:
            break
        if 1.0 - math.fsum(mid ** e for e in a) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _cyclic_or_raise(d: WeightVector) -> CyclicClassification:
    _require_r2(d)
    cls = classify(d)
    if not cls.cyclic:
        raise InvalidInputError("weights are acyclic")
    return cls


def cyclic_growth(d) -> CyclicGrowth:
    """theta, C and rho with ``#{|w| <= base^L} ~ C * theta^-L``."""
    d = as_weights(d)
    cls = _cyclic_or_raise(d)
    a = cls.exponents
    theta = _exponent_polynomial_root(a)
    g_prime = -math.fsum(e * theta ** (e - 1) for e in a)
    C = -1.0 / (theta * (1.0 - theta) * g_prime)
    rho = -math.log(theta) / math.log(cls.base)
    return CyclicGrowth(theta, C, rho)


def cyclic_counts(d, L: int) -> int:
    """Exact number of words of weight ``<= base^L`` via ``b_L = 1 + sum b_{L - a_i}``."""
    d = as_weights(d)
    cls = _cyclic_or_raise(d)
    if L < 0:
        raise InvalidInputError("L must be >= 0")
    b = []
    for k in range(L + 1):
        b.append(1 + sum(b[k - e] for e in cls.exponents if k - e >= 0))
    return b[L]


def dirichlet_eval(d, s: float, N: int, margin: float = 1e-9) -> float:
    """Partial sum ``sum_{n <= N} a_n n^-s`` of the weight Dirichlet series."""
    d = as_weights(d)
    rho = solve_rho(d).rho
    if not margin > 0:
        raise InvalidInputError("margin must be positive")
    if s <= rho + margin:
        raise InvalidInputError(f"s = {s} is not beyond rho + margin = {rho + margin}")
    table = count_table(d, N, include_identity=True)
    return math.fsum(c * float(n) ** -s for n, c in table.coefficients.items())


def dirichlet_limit(d, s: float) -> float:
    """``1 / (1 - G(s))``, the value the partial sums converge to for ``s > rho``."""
    return 1.0 / (1.0 - weight_sum(d, s))
