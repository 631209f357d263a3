import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ramsey_container_lab.budget import SizeError, Verdict
from ramsey_container_lab.rado import (
    SCHUR, LinearSystem, PreconditionError, RedundantMatrixError, SolutionMode,
    abbott_wang_bounds, columns_property, difference_set_check, ell_sequence,
    enumerate_solutions, floor_factorial_e, hunew_bound, is_free, is_irredundant,
    is_partition_regular, is_sum_free, is_sum_free_mod, m_A, matmL_checks, mu,
    rank_and_echelon, satisfies_star, schur_f, schur_h, solution_edges,
)

from strategies import brute_mu, brute_solutions, np_rank, star_corpus

DOUBLE = LinearSystem.of((1, 1, -2))  # 3-term arithmetic progressions
TWO_TWO = LinearSystem.of((2, 2, -1))
DIAG = LinearSystem.of((1, -1, 0))


@st.composite
def matrices(draw, max_l=2, max_k=5, lo=-3, hi=3):
    l = draw(st.integers(1, max_l))
    k = draw(st.integers(2, max_k))
    rows = draw(st.lists(st.lists(st.integers(lo, hi), min_size=k, max_size=k),
                         min_size=l, max_size=l))
    return LinearSystem(tuple(tuple(r) for r in rows))


def brute_columns_property(A):
    """Try every ordered set partition of the columns."""
    k = A.k
    cols = A.columns()

    def in_span(vec, idx):
        if all(v == 0 for v in vec):
            return True
        base = [[cols[j][i] for j in idx] for i in range(A.l)]
        ext = [row + [vec[i]] for i, row in enumerate(base)]
        return bool(idx) and np_rank(base) == np_rank(ext)

    def ordered_partitions(items):
        if not items:
            yield []
            return
        for size in range(1, len(items) + 1):
            for first in itertools.combinations(items, size):
                rest = [x for x in items if x not in first]
                for tail in ordered_partitions(rest):
                    yield [list(first)] + tail

    for blocks in ordered_partitions(list(range(k))):
        s0 = [sum(cols[j][i] for j in blocks[0]) for i in range(A.l)]
        if any(s0):
            continue
        used = list(blocks[0])
        ok = True
        for D in blocks[1:]:
            if not in_span([sum(cols[j][i] for j in D) for i in range(A.l)], used):
                ok = False
                break
            used += D
        if ok:
            return True
    return False


def brute_m_A(A):
    best = None
    for size in range(2, A.k + 1):
        for W in itertools.combinations(range(A.k), size):
            rest = [[r[j] for j in range(A.k) if j not in W] for r in A.rows]
            rk = np_rank(rest) if rest[0] else 0
            val = Fraction(size - 1, size - 1 + rk - np_rank(A.rows))
            best = val if best is None else max(best, val)
    return best


# linear algebra -------------------------------------------------------------


def test_rank_examples():
    assert SCHUR.rank == 1
    assert LinearSystem.of((1, 1, -1, 0), (2, 2, -2, 0)).rank == 1
    r, M = rank_and_echelon(LinearSystem.of((2, 4, -2), (1, 1, 1)))
    assert r == 2 and M[0][0] == 1 and M[1][1] == 1
    with pytest.raises(ValueError):
        LinearSystem(((1, 2), (1,)))


@settings(max_examples=100, deadline=None)
@given(matrices(max_l=3, max_k=6))
def test_rank_matches_numpy(A):
    assert A.rank == np_rank(A.rows)
    assert A.rank_without(()) == A.rank


@settings(max_examples=50, deadline=None)
@given(matrices(max_l=3, max_k=6))
def test_echelon_is_reduced(A):
    M, piv = A.echelon()
    for i, p in enumerate(piv):
        assert M[i][p] == 1
        assert all(M[j][p] == 0 for j in range(len(M)) if j != i)
    assert LinearSystem(A.rows).echelon() == (M, piv)


# (*), columns property, irredundance ---------------------------------------


def test_star_and_columns_examples():
    assert satisfies_star(SCHUR) and columns_property(SCHUR).holds
    assert satisfies_star(TWO_TWO) and not columns_property(TWO_TWO).holds
    assert not satisfies_star(DIAG)
    assert columns_property(SCHUR).partition == ((1, 3), (2,))
    assert columns_property(DOUBLE).partition == ((1, 2, 3),)
    assert is_partition_regular(DOUBLE)
    assert not is_partition_regular(LinearSystem.of((1, 2, -4)))


def test_columns_property_size_guard():
    with pytest.raises(SizeError):
        columns_property(LinearSystem.of(tuple([1] * 15)), max_k=14)


@settings(max_examples=80, deadline=None)
@given(matrices(max_l=2, max_k=5))
def test_columns_property_matches_partition_enumeration(A):
    assert columns_property(A).holds == brute_columns_property(A)


@settings(max_examples=80, deadline=None)
@given(matrices(max_l=2, max_k=5))
def test_irredundant_partition_regular_implies_star(A):
    if A.rank != A.l:
        return
    if is_irredundant(A, 8).status is Verdict.TRUE and columns_property(A).holds:
        assert satisfies_star(A)


def test_irredundance_examples():
    assert is_irredundant(SCHUR).witness == (1, 2, 3)
    assert is_irredundant(DOUBLE).witness == (1, 3, 2)
    res = is_irredundant(DIAG)
    assert res.status is Verdict.UNKNOWN and res.witness is None


# m(A) and the structural clauses --------------------------------------------


def test_m_A_examples():
    assert m_A(SCHUR).value == 2
    assert m_A(DOUBLE).value == 2
    with pytest.raises(PreconditionError, match="W="):
        m_A(DIAG)


def test_matmL_examples():
    assert matmL_checks(SCHUR).passed
    assert matmL_checks(TWO_TWO).passed
    with pytest.raises(PreconditionError):
        matmL_checks(DIAG)
    with pytest.raises(PreconditionError):
        matmL_checks(LinearSystem.of((1, 1, -1), (2, 2, -2)))
    with pytest.raises(PreconditionError):
        matmL_checks(SCHUR, irredundance_witness=(1, 1, 2))


def test_redundant_matrix_rejected():
    # x1 + x2 + x3 = 0 satisfies (*) but has no positive solution at all
    A = LinearSystem.of((1, 1, 1))
    assert satisfies_star(A)
    with pytest.raises(RedundantMatrixError):
        matmL_checks(A)


def test_star_corpus_is_well_formed():
    corpus = star_corpus()
    assert len(corpus) >= 50
    for A, x in corpus:
        assert A.k <= 8 and not any(A.evaluate(x)) and len(set(x)) == A.k


def test_m_A_matches_numpy_oracle_on_corpus():
    for A, x in star_corpus(30):
        assert m_A(A).value == brute_m_A(A)


def test_matmL_passes_on_corpus():
    for A, x in star_corpus():
        rep = matmL_checks(A, irredundance_witness=x)
        assert rep.passed, (A.rows, rep.failures)


# solutions ------------------------------------------------------------------


def test_schur_solutions_in_five():
    sols = [s.values for s in enumerate_solutions(SCHUR, range(1, 6))]
    assert sols == [(1, 2, 3), (1, 3, 4), (1, 4, 5), (2, 1, 3), (2, 3, 5),
                    (3, 1, 4), (3, 2, 5), (4, 1, 5)]
    assert len(enumerate_solutions(SCHUR, range(1, 6), "strong", fixed={0: 1})) == 4
    assert len(enumerate_solutions(SCHUR, range(1, 6), "distinct", fixed={0: 1})) == 3
    assert enumerate_solutions(SCHUR, []) == []
    with pytest.raises(ValueError):
        enumerate_solutions(SCHUR, [1], fixed={3: 1})


def test_solution_mode_parse():
    assert SolutionMode.parse("all") is SolutionMode.STRONG
    assert SolutionMode.parse("k-distinct") is SolutionMode.DISTINCT
    with pytest.raises(ValueError):
        SolutionMode.parse("weird")


@settings(max_examples=80, deadline=None)
@given(matrices(max_l=2, max_k=4), st.sets(st.integers(1, 7), min_size=1, max_size=5),
       st.dictionaries(st.integers(0, 3), st.integers(1, 7), max_size=2), st.booleans())
def test_enumeration_matches_brute_force(A, S, fixed, distinct):
    fixed = {j: v for j, v in fixed.items() if j < A.k}
    mode = "distinct" if distinct else "strong"
    ours = [s.values for s in enumerate_solutions(A, S, mode, fixed=fixed)]
    assert ours == brute_solutions(A, S, distinct, fixed)


def test_solution_edges_are_minimal():
    edges = solution_edges(SCHUR, range(1, 7), "strong")
    assert frozenset({1, 2}) in edges  # 1 + 1 = 2
    assert not any(e < f for e in edges for f in edges)


# free sets and mu -----------------------------------------------------------


def test_is_free_examples():
    assert is_free([1, 4], SCHUR).status is Verdict.TRUE
    assert is_free([1, 2, 3], SCHUR).status is Verdict.FALSE
    res = is_free(range(1, 5), SCHUR, r=2, mode="strong")
    assert res.status is Verdict.TRUE and res.certificate.recheck([SCHUR, SCHUR])
    assert is_free(range(1, 6), SCHUR, r=2, mode="strong").status is Verdict.FALSE


@settings(max_examples=40, deadline=None)
@given(st.sets(st.integers(1, 14), max_size=10), st.integers(1, 2), st.booleans())
def test_free_certificates_recheck(S, r, distinct):
    mode = "distinct" if distinct else "strong"
    res = is_free(S, SCHUR, r=r, mode=mode)
    if res.status is Verdict.TRUE:
        assert res.certificate.recheck([SCHUR] * r)
        assert set(res.certificate.ground) == set(S)


@pytest.mark.parametrize("n", range(1, 21))
def test_mu_one_colour_strong(n):
    assert mu(n, SCHUR, 1, "strong").value == math.ceil(n / 2)


def test_mu_two_colours_strong():
    for n in range(5, 16):
        res = mu(n, SCHUR, 2, "strong")
        assert res.value == n - n // 5
        assert len(res.certificate.ground) == res.value
        assert res.certificate.recheck([SCHUR, SCHUR])
    assert mu(2, SCHUR, 1).value == 2


@pytest.mark.parametrize("A,n,r,distinct", [
    (SCHUR, 8, 1, True), (SCHUR, 8, 1, False), (SCHUR, 7, 2, True), (SCHUR, 7, 2, False),
    (DOUBLE, 8, 1, True), (DOUBLE, 7, 2, True), (TWO_TWO, 8, 1, True),
])
def test_mu_matches_brute_force(A, n, r, distinct):
    mode = "distinct" if distinct else "strong"
    assert mu(n, A, r, mode).value == brute_mu(n, A, r, distinct)


def test_mu_non_decreasing_in_r():
    for n in range(3, 13):
        vals = [mu(n, SCHUR, r, "strong").value for r in (1, 2, 3)]
        assert vals == sorted(vals)


def test_mu_budget_gives_bracket():
    res = mu(30, SCHUR, 2, "strong", budget=3)
    lo, hi = res.bracket
    assert res.value is None and lo <= 30 - 30 // 5 <= hi


def test_distinct_vs_strong_mu_soft_report(capsys):
    # the two notions only differ on solutions with repeats; the gap is logged
    gaps = [(n, mu(n, SCHUR, 1, "distinct").value - mu(n, SCHUR, 1, "strong").value)
            for n in range(2, 21)]
    print("distinct - strong mu gaps:", gaps)
    assert all(g >= 0 for _, g in gaps)


# sum-free toolkit -----------------------------------------------------------


def test_ell_sequence():
    assert [ell_sequence(i) for i in range(7)] == [1, 2, 5, 16, 65, 326, 1957]
    assert all(ell_sequence(i) == floor_factorial_e(i) for i in range(15))
    with pytest.raises(ValueError):
        ell_sequence(-1)


def test_hunew_bound_never_violated():
    for n in range(5, 16):
        assert mu(n, SCHUR, 2, "strong").value <= hunew_bound(n, 2)
    for n in range(1, 21):
        assert mu(n, SCHUR, 1, "strong").value <= hunew_bound(n, 1)


def test_schur_numbers():
    assert [schur_f(r).value for r in (1, 2)] == [1, 4]
    assert schur_h(2).value == 4
    f3 = schur_f(3)
    assert f3.value == 13
    assert sorted(x for c in f3.partition for x in c) == list(range(1, 14))
    assert all(is_sum_free(c) for c in f3.partition)


def test_schur_two_brute_force():
    def partitionable(m):
        return any(all(is_sum_free([x for x, c in zip(range(1, m + 1), cols) if c == j]) for j in (0, 1))
                   for cols in itertools.product((0, 1), repeat=m))
    assert partitionable(4) and not partitionable(5)


def test_sum_free_predicates():
    assert is_sum_free([1, 4]) and not is_sum_free([1, 2])
    assert not is_sum_free([2, 4])  # 2 + 2
    assert is_sum_free_mod([1, 4], 5)
    assert not is_sum_free_mod([1, 2], 5)
    assert not is_sum_free_mod([2, 4], 6)  # 4 + 4 = 2 mod 6


def test_abbott_wang_bounds():
    b = abbott_wang_bounds(10, 2)
    assert (b.lower, b.abbott_wang_upper, b.hunew_upper) == (8, 10, 8)
    for n in range(5, 16):
        b = abbott_wang_bounds(n, 2)
        assert b.lower == mu(n, SCHUR, 2, "strong").value <= b.upper


def test_difference_set_examples():
    assert difference_set_check({1, 3, 5}, {2, 4})
    assert not difference_set_check({1, 2}, {5})
    with pytest.raises(ValueError):
        difference_set_check({1, 2}, {3}, n=2)


def _random_sum_free(rng, n):
    S = set()
    for x in rng.sample(range(1, n + 1), n):
        if is_sum_free(S | {x}):
            S.add(x)
    return S


def test_difference_set_facts_random():
    rng = random.Random(7)
    for _ in range(1000):
        n = rng.randint(4, 30)
        S = _random_sum_free(rng, n)
        x = rng.choice(sorted(S))
        T = {t for t in range(1, n + 1) if x + t in S and rng.random() < 0.7}
        if not T:
            continue
        assert difference_set_check(S, T)
        # a difference set of a sum-free set is disjoint from it
        assert not S & T
        y = rng.choice(sorted(T))
        T2 = {t for t in range(1, n + 1) if y + t in T and rng.random() < 0.7}
        if T2:
            # a difference set of a difference set of S is a difference set of S
            assert difference_set_check(S, T2)
