import math
import random
from collections import Counter

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_weights, rho_mp
from semiorbit.errors import InvalidInputError, ResourceLimitError
from semiorbit.weight_census import (
    WeightVector,
    acyclic_constant,
    classify,
    count_exact,
    count_table,
    cyclic_counts,
    cyclic_growth,
    dirichlet_eval,
    dirichlet_limit,
    solve_rho,
)

# 40-digit mpmath references, recomputed live in test_references_match_mpmath
RHO_23 = 0.7878849110258697836
C_23 = 1.4693970127381844
THETA_48 = 0.75487766624669276

weights = st.lists(st.integers(2, 9), min_size=2, max_size=4).map(tuple)


def test_references_match_mpmath():
    mpmath.mp.dps = 40
    rho = rho_mp((2, 3))
    assert float(rho) == pytest.approx(RHO_23, abs=1e-15)
    c = 1 / (rho * (mpmath.log(2) * 2**-rho + mpmath.log(3) * 3**-rho))
    assert float(c) == pytest.approx(C_23, abs=1e-12)
    theta = mpmath.findroot(lambda x: 1 - x**2 - x**3, (0.5, 1), solver="bisect")
    assert float(theta) == pytest.approx(THETA_48, abs=1e-15)


@pytest.mark.parametrize(
    "d, rho",
    [((8, 8), 1 / 3), ((2, 2), 1.0), ((2, 3), RHO_23), ((3, 3, 3), 1.0)],
)
def test_solve_rho_examples(d, rho):
    g = solve_rho(d)
    assert g.rho == pytest.approx(rho, abs=1e-12)
    assert g.residual <= 1e-12


@pytest.mark.parametrize("d", [(2,), (5,), (1, 3), (0, 2), (2, -3)])
def test_solve_rho_rejects(d):
    with pytest.raises(InvalidInputError):
        solve_rho(d)


def test_solve_rho_rejects_bad_tol():
    with pytest.raises(InvalidInputError):
        solve_rho((2, 3), tol=0)


@settings(max_examples=60, deadline=None)
@given(weights)
def test_rho_in_bracket_and_matches_mpmath(d):
    g = solve_rho(d)
    assert 0 < g.rho <= math.log(len(d)) / math.log(min(d)) + 1e-15
    assert g.rho == pytest.approx(float(rho_mp(d, 30)), abs=1e-11)


def test_weight_vector_validation():
    with pytest.raises(InvalidInputError):
        WeightVector(())
    with pytest.raises(InvalidInputError):
        WeightVector((2, 2.0))
    with pytest.raises(InvalidInputError):
        WeightVector((2, True))
    with pytest.raises(InvalidInputError):
        WeightVector((2, 2**63))
    assert WeightVector((2, 3)).r == 2


@pytest.mark.parametrize("d, X, n", [((2, 3), 10, 8), ((2, 2), 8, 15), ((5, 7), 4, 1)])
def test_count_exact_examples(d, X, n):
    assert count_exact(d, X) == n
    assert count_exact(d, X, include_identity=False) == n - 1


def test_count_table_invariants():
    t = count_table((2, 3), 100)
    a = t.as_list()
    assert a[1] == 1
    for n in range(2, 101):
        assert a[n] == sum(a[n // w] for w in (2, 3) if n % w == 0)
    cum = [t.cumulative(x) for x in range(1, 101)]
    assert cum == sorted(cum)
    no_id = count_table((2, 3), 100, include_identity=False)
    assert no_id.a(1) == 0 and no_id.a(12) == t.a(12)


def test_count_table_limits():
    with pytest.raises(ResourceLimitError):
        count_table((2, 3), 10**9)
    with pytest.raises(ResourceLimitError):
        count_table((2, 3), 1000, max_size=100)
    with pytest.raises(InvalidInputError):
        count_exact((2, 3), 0)
    with pytest.raises(InvalidInputError):
        count_table((2, 3), 10).cumulative(11)


def test_repeated_weights_counted_separately():
    # two generators of the same degree give distinct words
    assert count_exact((2, 2, 3), 4) == Counter(brute_weights((2, 2, 3), 4)).total()


@settings(max_examples=80, deadline=None)
@given(weights, st.integers(1, 300))
def test_count_exact_matches_enumeration(d, X):
    assert count_exact(d, X) == len(brute_weights(d, X))


@pytest.mark.parametrize(
    "d, cyclic, base, exps",
    [
        ((4, 8), True, 2, (2, 3)),
        ((2, 3), False, None, None),
        ((6, 36, 216), True, 6, (1, 2, 3)),
        ((8, 8), True, 8, (1, 1)),
        ((12, 18), False, None, None),
        ((4, 16), True, 4, (1, 2)),
        ((36, 216), True, 6, (2, 3)),
        ((5,), True, 5, (1,)),
    ],
)
def test_classify(d, cyclic, base, exps):
    c = classify(d)
    assert c.cyclic is cyclic
    assert c.base == base and c.exponents == exps
    if cyclic:
        assert all(base**a == w for a, w in zip(c.exponents, d))
        assert math.gcd(*c.exponents) == 1


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 60), st.integers(2, 60))
def test_classify_matches_log_ratio(a, b):
    # cyclic iff some a^p == b^q with small p, q (exponents here stay below 6)
    dependent = any(a**p == b**q for p in range(1, 7) for q in range(1, 7))
    assert classify((a, b)).cyclic == dependent


def test_acyclic_constant():
    assert acyclic_constant((2, 3)) == pytest.approx(C_23, rel=1e-9)
    with pytest.raises(InvalidInputError):
        acyclic_constant((4, 8))


def test_tauberian_ratio_improves():
    c, rho = acyclic_constant((2, 3)), solve_rho((2, 3)).rho
    ratios = [count_exact((2, 3), X) / (c * X**rho) for X in (10**3, 10**4, 10**5, 10**6)]
    assert all(0.9 <= r <= 1.1 for r in ratios[1:])
    assert abs(ratios[-1] - 1) < abs(ratios[0] - 1)


def test_two_sided_growth():
    # log(count)/log(X) - rho is about ln(c)/ln(X); at 10**4 that can exceed 0.05, at 10**6 it does not
    rng = random.Random(7)
    for _ in range(30):
        d = tuple(rng.randint(2, 9) for _ in range(rng.randint(2, 4)))
        rho = solve_rho(d).rho
        assert abs(math.log(count_exact(d, 10**6)) / math.log(10**6) - rho) <= 0.05


def test_cyclic_growth_examples():
    g = cyclic_growth((2, 2))
    assert (g.theta, g.rho, g.C) == pytest.approx((0.5, 1.0, 2.0), abs=1e-9)
    g = cyclic_growth((4, 8))
    assert g.theta == pytest.approx(THETA_48, abs=1e-12)
    assert g.rho == pytest.approx(solve_rho((4, 8)).rho, abs=1e-9)
    # theta = base^-rho
    assert g.theta == pytest.approx(2 ** -g.rho, abs=1e-12)
    with pytest.raises(InvalidInputError):
        cyclic_growth((2, 3))


def test_cyclic_counts_examples():
    assert cyclic_counts((2, 2), 3) == 15
    assert cyclic_counts((4, 8), 0) == 1
    assert cyclic_counts((4, 8), 5) == count_exact((4, 8), 2**5)
    with pytest.raises(InvalidInputError):
        cyclic_counts((2, 3), 3)
    with pytest.raises(InvalidInputError):
        cyclic_counts((2, 2), -1)


@pytest.mark.parametrize("d", [(2, 2), (4, 8), (2, 4, 8), (9, 27), (6, 36, 216)])
def test_cyclic_recurrence_matches_table(d):
    cls = classify(d)
    L = 1
    while cls.base ** (L + 1) <= 10**6:
        L += 1
    for k in range(L + 1):
        assert cyclic_counts(d, k) == count_exact(d, cls.base**k)


@pytest.mark.parametrize("d", [(2, 2), (4, 8), (2, 4, 8), (9, 27)])
def test_cyclic_constant_limit(d):
    g = cyclic_growth(d)
    L = math.ceil(math.log(1e-6) / math.log(g.theta))
    assert cyclic_counts(d, L) * g.theta**L == pytest.approx(g.C, rel=0.01)


def test_dirichlet_limits():
    assert dirichlet_limit((2, 2), 2) == pytest.approx(2)
    assert dirichlet_limit((2, 3), 1) == pytest.approx(6)
    assert dirichlet_eval((2, 2), 2, 10**6) == pytest.approx(2, rel=1e-5)


def test_dirichlet_partial_sum_tail():
    # the missing mass past N is about c*rho*N^(rho-1)/(1-rho) for s = 1
    c, rho = C_23, RHO_23
    for N in (10**4, 10**5):
        gap = 6 - dirichlet_eval((2, 3), 1, N)
        assert gap == pytest.approx(c * rho * N ** (rho - 1) / (1 - rho), rel=0.1)
    # 5% of the limit is only reached near N = 10**6
    assert dirichlet_eval((2, 3), 1, 10**4) < 0.95 * 6
    assert dirichlet_eval((2, 3), 1, 10**6) == pytest.approx(6, rel=0.05)


def test_dirichlet_rejects_divergent_region():
    with pytest.raises(InvalidInputError):
        dirichlet_eval((2, 3), 0.5, 100)
    with pytest.raises(InvalidInputError):
        dirichlet_eval((2, 2), 1.0, 100)
