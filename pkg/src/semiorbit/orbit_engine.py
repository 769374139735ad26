"""Semigroup orbits on P^1 by height.

Words are tuples of generator indices written outermost first, so ``(i, j)``
is ``phi_i o phi_j`` and is applied to a point as ``phi_i(phi_j(P))``.

Every search here rests on one fact: once a point's height exceeds the escape
threshold ``2 C_S`` every further image has strictly larger height.  Points at
or below a height bound are finite in number, so a bounded-height search
over *points* always terminates; the word enumeration on top of it is finite
unless a cycle (a preperiodic witness) can feed words back under the cutoff,
which is detected on the point graph first.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .errors import InvalidInputError, InvariantError, ResourceLimitError
from .height_tracker import HeightTracker
from .p1_arith import ProjPointQ, RationalMapQ, evaluate, height, point
from .weight_census import WeightVector, acyclic_constant, classify, solve_rho

DEFAULT_BUDGET = 1_000_000

Word = tuple


def word_degree(S: "SemigroupSystem", word: Word) -> int:
    return math.prod(S.degrees.d[i] for i in word)


def word_str(word: Word) -> str:
    return "o".join(f"phi{i + 1}" for i in word)


def evaluate_word(S: "SemigroupSystem", word: Word, P: ProjPointQ) -> ProjPointQ:
    for i in reversed(word):
        P = evaluate(S.maps[i], P)
    return P


@dataclass(frozen=True)
class SemigroupSystem:
    maps: tuple[RationalMapQ, ...]

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise InvalidInputError("a semigroup needs at least one generator")
        object.__setattr__(self, "maps", maps)

    @property
    def r(self) -> int:
        return len(self.maps)

    @property
    def degrees(self) -> WeightVector:
        return WeightVector(tuple(phi.degree for phi in self.maps))

    @property
    def C_S(self) -> float:
        return max(phi.height_offset_bound for phi in self.maps)

    @property
    def d_S(self) -> int:
        return min(self.degrees.d)

    @property
    def b_S(self) -> float:
        return self.C_S / (self.d_S - 1)

    @property
    def escape_threshold(self) -> float:
        return 2.0 * self.C_S

    @property
    def _escape_cut(self) -> float:
        # inflated so float rounding can only make pruning more conservative
        return self.escape_threshold * (1 + 1e-9) + 1e-9

    def escaped(self, bound: int) -> bool:
        """True when a point with ``max(|x|,|y|) == bound`` is safely above the escape threshold."""
        return math.log(bound) > self._escape_cut


def as_system(S) -> SemigroupSystem:
    if isinstance(S, SemigroupSystem):
        return S
    return SemigroupSystem(tuple(S))


@dataclass(frozen=True)
class HeightCutoff:
    """Height bound ``X`` in nats.

    With ``exp_bound`` set the bound is exactly ``ln(exp_bound)`` and admission
    is a pure integer comparison; otherwise ``value`` is read as an exact
    rational and compared against ``ln max(|x|,|y|)`` at whatever precision
    separates them.
    """

    value: float
    exp_bound: Fraction | None = None

    def __str__(self):
        if self.exp_bound is not None:
            return f"ln({self.exp_bound})"
        return repr(self.value)

    def admits(self, bound: int) -> bool:
        """``ln(bound) <= X``."""
        if self.exp_bound is not None:
            return bound * self.exp_bound.denominator <= self.exp_bound.numerator
        X = self.value
        if bound == 1:
            return X >= 0
        approx = math.log(bound)
        if abs(approx - X) > 1e-9 * max(1.0, abs(X)):
            return approx <= X
        exact = Fraction(X)
        prec = 128
        while True:
            with gmpy2.context(precision=prec):
                diff = gmpy2.log(gmpy2.mpz(bound)) - gmpy2.mpfr(gmpy2.mpq(exact.numerator, exact.denominator))
                if abs(diff) > 2.0 ** (-prec + 8) * max(1.0, abs(X)):
                    return diff < 0
            prec *= 2


def log_cutoff(bound) -> HeightCutoff:
    """The cutoff ``X = ln(bound)`` for a rational ``bound >= 1``."""
    bound = Fraction(bound)
    if bound < 1:
        raise InvalidInputError("exp-bound must be >= 1")
    return HeightCutoff(math.log(bound.numerator) - math.log(bound.denominator), bound)


def as_cutoff(X) -> HeightCutoff:
    if isinstance(X, HeightCutoff):
        return X
    if isinstance(X, Fraction) and Fraction(float(X)) != X:
        raise InvalidInputError(f"cutoff {X} is not exactly representable; pass a float or log_cutoff()")
    X = float(X)
    if not math.isfinite(X):
        raise InvalidInputError("cutoff must be finite")
    return HeightCutoff(X)


@dataclass
class _PointGraph:
    points: list
    index: dict
    succ: list  # per node, per generator: target node index, or -1 when outside the region

    def reachable(self, start: int, allowed=None) -> list[int]:
        """Nodes reachable from ``start`` in one or more steps, in BFS order."""
        seen = set()
        order = []
        queue = deque([start])
        while queue:
            n = queue.popleft()
            for t in self.succ[n]:
                if t >= 0 and t not in seen and (allowed is None or t in allowed):
                    seen.add(t)
                    order.append(t)
                    queue.append(t)
        return order

    def has_cycle(self, nodes: set[int]) -> bool:
        """Kahn's algorithm on the subgraph induced by ``nodes``."""
        indeg = {n: 0 for n in nodes}
        for n in nodes:
            for t in self.succ[n]:
                if t in indeg:
                    indeg[t] += 1
        queue = deque(n for n, k in indeg.items() if k == 0)
        removed = 0
        while queue:
            n = queue.popleft()
            removed += 1
            for t in self.succ[n]:
                if t in indeg:
                    indeg[t] -= 1
                    if indeg[t] == 0:
                        queue.append(t)
        return removed < len(nodes)

    def path_word(self, start: int, goal: int, allowed) -> Word | None:
        """Shortest word carrying ``start`` to ``goal`` in at least one step, generators tried in order."""
        parent = {}
        queue = deque()
        for i, t in enumerate(self.succ[start]):
            if t >= 0 and t in allowed and t not in parent:
                parent[t] = (start, i)
                queue.append(t)
        while queue:
            n = queue.popleft()
            if n == goal:
                break
            for i, t in enumerate(self.succ[n]):
                if t >= 0 and t in allowed and t not in parent:
                    parent[t] = (n, i)
                    queue.append(t)
        if goal not in parent:
            return None
        steps = []
        n = goal
        while True:
            n, i = parent[n]
            steps.append(i)
            if n == start:
                break
        # collected from the goal backwards, which is outermost first
        return tuple(steps)

    def cycle_witness(self, start: int, nodes: set[int]):
        """(f, g) with f carrying start to Q and g fixing Q, or None."""
        for q in self.reachable(start, nodes):
            g = self.path_word(q, q, nodes)
            if g is not None:
                f = self.path_word(start, q, nodes)
                return f, g
        return None


def _point_graph(S: SemigroupSystem, P: ProjPointQ, inside, budget: int) -> _PointGraph:
    """All points reachable from P through points accepted by ``inside(bound)``.

    P itself is always node 0.  Completeness: a path that leaves the region
    through a point above the escape threshold never returns below it.
    """
    graph = _PointGraph([P], {P: 0}, [])
    queue = deque([0])
    while queue:
        n = queue.popleft()
        Q = graph.points[n]
        targets = []
        for phi in S.maps:
            R = evaluate(phi, Q)
            if R in graph.index:
                targets.append(graph.index[R])
            elif inside(R.height_bound):
                if len(graph.points) >= budget:
                    raise ResourceLimitError(f"point search exceeded budget of {budget} points")
                graph.index[R] = len(graph.points)
                graph.points.append(R)
                queue.append(graph.index[R])
                targets.append(graph.index[R])
            else:
                targets.append(-1)
        graph.succ.append(targets)
    return graph


@dataclass(frozen=True)
class CensusEntry:
    word: Word
    point: ProjPointQ
    height: float


@dataclass
class OrbitCensus:
    """Every word f (length >= 1) with ``h(f(P)) <= cutoff``, plus the distinct image points.

    When ``infinite`` is set a cycle feeds infinitely many words under the
    cutoff; ``entries`` is then empty, ``witness`` holds (f, g) with
    ``g(f(P)) = f(P)``, and only the point counts are meaningful.
    """

    cutoff: HeightCutoff
    entries: list[CensusEntry]
    distinct_points: dict[ProjPointQ, Word]
    collisions: list[tuple[Word, Word, ProjPointQ]]
    fiber_max: int
    infinite: bool = False
    witness: tuple[Word, Word] | None = None
    nodes_explored: int = 0
    _func_bounds: list[int] = field(init=False, repr=False)
    _point_bounds: list[int] = field(init=False, repr=False)

    def __post_init__(self):
        self._func_bounds = sorted(e.point.height_bound for e in self.entries)
        self._point_bounds = sorted(Q.height_bound for Q in self.distinct_points)

    def _count(self, bounds, X) -> int:
        cut = as_cutoff(X)
        if cut.value > self.cutoff.value + 1e-12 * max(1.0, self.cutoff.value):
            raise InvalidInputError(f"query {cut} is beyond the census cutoff {self.cutoff}")
        lo, hi = 0, len(bounds)
        while lo < hi:
            mid = (lo + hi) // 2
            if cut.admits(bounds[mid]):
                lo = mid + 1
            else:
                hi = mid
        return lo

    def n_funcs(self, X=None):
        if self.infinite:
            return math.inf
        return len(self.entries) if X is None else self._count(self._func_bounds, X)

    def n_points(self, X=None) -> int:
        return len(self.distinct_points) if X is None else self._count(self._point_bounds, X)

    def heights(self) -> list[float]:
        return [math.log(b) for b in self._func_bounds]

    def jump_heights(self) -> list[float]:
        """Distinct heights at which N_funcs jumps, ascending."""
        return [c.value for c, _ in self.func_jumps()]

    @staticmethod
    def _jumps(bounds) -> list[tuple[HeightCutoff, int]]:
        out = []
        for k, b in enumerate(bounds):
            if k + 1 < len(bounds) and bounds[k + 1] == b:
                continue
            out.append((log_cutoff(b), k + 1))
        return out

    def func_jumps(self) -> list[tuple[HeightCutoff, int]]:
        """(exact cutoff, N_funcs there) at each jump of N_funcs."""
        return self._jumps(self._func_bounds)

    def point_jumps(self) -> list[tuple[HeightCutoff, int]]:
        """(exact cutoff, N_points there) at each jump of N_points."""
        return self._jumps(self._point_bounds)


def orbit_census(S, P, X, budget: int = DEFAULT_BUDGET) -> OrbitCensus:
    """Breadth-first census of all words with ``h(f(P)) <= X``.

    A node is pruned when its height exceeds ``max(X, 2 C_S)``, and also when
    no point under the cutoff is reachable from it; neither rule can drop a
    counted word.
    """
    S = as_system(S)
    P = point(P)
    cut = as_cutoff(X)
    if cut.value <= 0:
        raise InvalidInputError("X must be positive")
    graph = _point_graph(S, P, lambda b: cut.admits(b) or not S.escaped(b), budget)
    n = len(graph.points)
    targets = {i for i in range(n) if cut.admits(graph.points[i].height_bound)}
    # nodes from which some target is reachable (in zero or more steps)
    preds = [[] for _ in range(n)]
    for a in range(n):
        for t in graph.succ[a]:
            if t >= 0:
                preds[t].append(a)
    useful = set(targets)
    queue = deque(targets)
    while queue:
        t = queue.popleft()
        for a in preds[t]:
            if a not in useful:
                useful.add(a)
                queue.append(a)
    live = set(graph.reachable(0, useful))
    reached_targets = [i for i in graph.reachable(0) if i in targets]

    if graph.has_cycle(live):
        f, g = graph.cycle_witness(0, live)
        _verify_witness(S, P, f, g)
        distinct = {}
        for i in reached_targets:
            distinct[graph.points[i]] = graph.path_word(0, i, set(range(n)))
        return OrbitCensus(cut, [], distinct, [], 0, infinite=True, witness=(f, g), nodes_explored=n)

    entries = []
    distinct = {}
    fibers = {}
    collisions = []
    explored = 0
    level = [((i,), t) for i, t in enumerate(graph.succ[0]) if t in live]
    while level:
        nxt = []
        for word, node in level:
            explored += 1
            if explored > budget:
                partial = OrbitCensus(cut, entries, distinct, collisions, max(fibers.values(), default=0), nodes_explored=explored)
                raise ResourceLimitError(f"census exceeded budget of {budget} words", partial)
            if node in targets:
                Q = graph.points[node]
                entries.append(CensusEntry(word, Q, math.log(Q.height_bound)))
                if Q in distinct:
                    collisions.append((distinct[Q], word, Q))
                else:
                    distinct[Q] = word
                fibers[Q] = fibers.get(Q, 0) + 1
            for i, t in enumerate(graph.succ[node]):
                if t in live:
                    nxt.append(((i,) + word, t))
        level = nxt
    return OrbitCensus(cut, entries, distinct, collisions, max(fibers.values(), default=0), nodes_explored=explored)


def growth_violations(S, P, census: OrbitCensus) -> list[CensusEntry]:
    """Entries breaking ``|h(f(P)) / deg f - h(P)| <= b_S``; always empty for sound constants."""
    S = as_system(S)
    hP = height(point(P))
    slack = S.b_S * (1 + 1e-9) + 1e-9
    return [e for e in census.entries if abs(e.height / word_degree(S, e.word) - hP) > slack]


def count_functions_by_height(S, P, X, budget: int = DEFAULT_BUDGET):
    """``#{f in M_S : h(f(P)) <= X}``; ``math.inf`` for a preperiodic cycle under the cutoff."""
    return orbit_census(S, P, X, budget).n_funcs()


def count_points_by_height(S, P, X, budget: int = DEFAULT_BUDGET) -> int:
    return orbit_census(S, P, X, budget).n_points()


@dataclass(frozen=True)
class PreperiodicVerdict:
    verdict: bool
    witness: tuple[Word, Word] | None = None

    def __bool__(self):
        return self.verdict


def _verify_witness(S, P, f, g):
    Q = evaluate_word(S, f, P)
    if not f or not g or evaluate_word(S, g, Q) != Q:
        raise InvariantError(f"preperiodicity witness {word_str(f)}, {word_str(g)} does not re-verify")


def _low_graph(S: SemigroupSystem, P: ProjPointQ, budget: int) -> _PointGraph | None:
    if S.escaped(P.height_bound):
        return None
    return _point_graph(S, P, lambda b: not S.escaped(b), budget)


def is_preperiodic(S, P, budget: int = DEFAULT_BUDGET) -> PreperiodicVerdict:
    """Whether some orbit point is fixed by a nonempty word, with an evaluated witness (f, g)."""
    S = as_system(S)
    P = point(P)
    graph = _low_graph(S, P, budget)
    if graph is None:
        return PreperiodicVerdict(False)
    nodes = set(range(len(graph.points)))
    if not graph.has_cycle(set(graph.reachable(0)) | {0}):
        return PreperiodicVerdict(False)
    found = graph.cycle_witness(0, nodes)
    if found is None:
        return PreperiodicVerdict(False)
    f, g = found
    _verify_witness(S, P, f, g)
    return PreperiodicVerdict(True, (f, g))


def orbit_is_finite(S, P, budget: int = DEFAULT_BUDGET) -> bool:
    """Finite iff the orbit never climbs above the escape threshold."""
    S = as_system(S)
    P = point(P)
    graph = _low_graph(S, P, budget)
    if graph is None:
        return False
    return all(t >= 0 for targets in graph.succ for t in targets)


def _rho(S: SemigroupSystem, rho) -> float:
    if rho is None:
        return solve_rho(S.degrees).rho
    return float(rho)


def theta_ratio(S, P, X_grid, rho=None, budget: int = DEFAULT_BUDGET) -> list[tuple[float, float]]:
    """``Theta(X) = N_funcs(X) / X^rho`` on a grid of cutoffs."""
    S = as_system(S)
    P = point(P)
    if is_preperiodic(S, P, budget):
        raise InvalidInputError(f"{P} is preperiodic")
    rho = _rho(S, rho)
    cuts = [as_cutoff(X) for X in X_grid]
    if not cuts:
        return []
    top = max(cuts, key=lambda c: c.value)
    census = orbit_census(S, P, top, budget)
    return [(c.value, census.n_funcs(c) / c.value**rho) for c in cuts]


def fitted_exponent(pairs) -> float:
    """Least-squares slope of ln N against ln X over (X, N) pairs with X > 1 and N > 0."""
    xs, ys = [], []
    for X, N in pairs:
        if X > 1 and N > 0:
            xs.append(math.log(X))
            ys.append(math.log(N))
    if len(xs) < 2:
        raise InvalidInputError("need at least two usable points to fit a slope")
    mx = math.fsum(xs) / len(xs)
    my = math.fsum(ys) / len(ys)
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    sxy = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return sxy / sxx


@dataclass
class BetaEstimate:
    """Partial sums ``beta_n = sum_{|g| = n} h(g(P))^-rho`` and their geometric tail bound.

    Past ``shift_N`` (the depth after which every branch is above ``2 C_S``)
    consecutive terms differ by at most ``K * C_prime^(n+1)``.
    """

    rho: float
    beta_sequence: list[float]
    K: float
    C_prime: float
    shift_N: int | None
    r: int

    @property
    def beta(self) -> float:
        return self.beta_sequence[-1]

    @property
    def n_max(self) -> int:
        return len(self.beta_sequence)

    def increments(self) -> list[tuple[int, float]]:
        """(n, |beta_{n+1} - beta_n|) for n = 1 .. n_max - 1."""
        b = self.beta_sequence
        return [(n, abs(b[n] - b[n - 1])) for n in range(1, len(b))]

    def increment_bound(self, n: int) -> float:
        return self.K * self.C_prime ** (n + 1)

    def shifted_increment_bound(self, n: int) -> float:
        """Bound for a base point that only escapes at depth ``shift_N``.

        Each of the ``r^N`` depth-N branches starts its own geometric series,
        which costs a factor ``(r / C')^N`` over :meth:`increment_bound`.
        """
        N = self.shift_N or 0
        return self.r**N * self.K * self.C_prime ** (n + 1 - N)

    @property
    def tail_bound(self) -> float:
        n = self.n_max
        return self.K * self.C_prime ** (n + 1) / (1 - self.C_prime)

    def within_bound(self) -> bool:
        if self.shift_N is None:
            return False
        return all(inc <= self.increment_bound(n) for n, inc in self.increments() if n >= self.shift_N)


def estimate_beta(S, P, rho=None, n_max: int = 10, budget: int = DEFAULT_BUDGET, check_preperiodic: bool = True) -> BetaEstimate:
    """Compute ``beta_1 .. beta_{n_max}`` over all ``r^n`` words of each length.

    Freeness of the semigroup is the caller's assertion; without it the sums
    still exist but need not converge to the asymptotic constant.
    """
    S = as_system(S)
    P = point(P)
    if n_max < 1:
        raise InvalidInputError("n_max must be >= 1")
    total = sum(S.r**n for n in range(1, n_max + 1))
    if total > budget:
        raise ResourceLimitError(f"{total} words up to length {n_max} exceed budget {budget}")
    if check_preperiodic and is_preperiodic(S, P, budget):
        raise InvalidInputError(f"{P} is preperiodic")
    rho = _rho(S, rho)
    C_S = S.C_S
    K = C_S**-rho * 2 ** (rho + 1) * rho
    C_prime = math.fsum(d ** -(rho + 1) for d in S.degrees)
    tracker = HeightTracker(S.maps)
    level = [P]
    betas = []
    shift_N = 0 if math.log(P.height_bound) > S._escape_cut else None
    for n in range(1, n_max + 1):
        level = [tracker.step(Q, i, n_max - n) for Q in level for i in range(S.r)]
        hs = [tracker.height(Q) for Q in level]
        betas.append(math.fsum(h**-rho if h > 0 else math.inf for h in hs))
        if shift_N is None and min(hs) > S._escape_cut:
            shift_N = n
    return BetaEstimate(rho, betas, K, C_prime, shift_N, S.r)


def predict_function_count(S, P, X, beta, assume_free: bool = False, rho=None) -> float:
    """Asymptotic ``c * beta * X^rho`` for acyclic degrees and a free semigroup."""
    S = as_system(S)
    if not assume_free:
        raise InvalidInputError("prediction requires the caller to assert that M_S is free")
    if classify(S.degrees).cyclic:
        raise InvalidInputError("degrees are cyclic; the count oscillates and has no single constant")
    if is_preperiodic(S, point(P)):
        raise InvalidInputError(f"{P} is preperiodic")
    rho = _rho(S, rho if rho is not None else getattr(beta, "rho", None))
    beta = beta.beta if isinstance(beta, BetaEstimate) else float(beta)
    X = as_cutoff(X).value
    return acyclic_constant(S.degrees, rho) * beta * X**rho


@dataclass
class OrbitDecomposition:
    F: list[ProjPointQ]
    Q_list: list[ProjPointQ]
    B: float
    upper: float


def decompose_orbit(S, P, B: float, budget: int = DEFAULT_BUDGET) -> OrbitDecomposition:
    """Split the orbit into the finite part of height <= B and seeds Q_i with B < h(Q_i) <= upper.

    Every orbit point above B is either a seed or in the orbit of one.  With
    ``d`` the largest degree, ``upper = max(2dB, d(B + C_S), d(h(P) + C_S))``:
    the first point on a path to exceed B has a predecessor of height at most
    ``max(B, h(P))`` and so lands at most that high.
    """
    S = as_system(S)
    P = point(P)
    if not B > 0:
        raise InvalidInputError("B must be positive")
    if orbit_is_finite(S, P, budget):
        raise InvalidInputError(f"orbit of {P} is finite")
    d = max(S.degrees.d)
    upper = max(2 * d * B, d * (B + S.C_S), d * (height(P) + S.C_S))
    upper_cut = as_cutoff(upper)
    lower_cut = as_cutoff(B)
    graph = _point_graph(S, P, lambda b: upper_cut.admits(b) or not S.escaped(b), budget)
    F, Q_list = [], []
    for i in graph.reachable(0):
        Q = graph.points[i]
        if lower_cut.admits(Q.height_bound):
            F.append(Q)
        elif upper_cut.admits(Q.height_bound):
            Q_list.append(Q)
    return OrbitDecomposition(F, Q_list, B, upper)


def find_collisions(S, P, max_depth: int, budget: int = DEFAULT_BUDGET) -> list[tuple[Word, Word, ProjPointQ]]:
    """All pairs f != g of words of length <= max_depth with f(P) == g(P)."""
    S = as_system(S)
    P = point(P)
    total = sum(S.r**n for n in range(1, max_depth + 1))
    if total > budget:
        raise ResourceLimitError(f"{total} words up to length {max_depth} exceed budget {budget}")
    cache = {}
    fibers: dict[ProjPointQ, list[Word]] = {}
    level = [((), P)]
    for _ in range(max_depth):
        nxt = []
        for word, Q in level:
            for i, phi in enumerate(S.maps):
                key = (Q, i)
                if key not in cache:
                    cache[key] = evaluate(phi, Q)
                R = cache[key]
                w = (i,) + word
                fibers.setdefault(R, []).append(w)
                nxt.append((w, R))
        level = nxt
    out = []
    for R, words in fibers.items():
        for a in range(len(words)):
            for b in range(a + 1, len(words)):
                out.append((words[a], words[b], R))
    return out
