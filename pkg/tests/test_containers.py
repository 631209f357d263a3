import itertools
import json
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ramsey_container_lab.containers import (
    ContainerClauseViolation, ContainerFamily, ContainerParams, build_single, copies_bases,
    independent_tuples, lift_tuple, solution_hypergraph, verify_matcontainer, verify_ramseycont,
)
from ramsey_container_lab.hypergraph import KHypergraph, build_copies_hypergraph
from ramsey_container_lab.rado import SCHUR, mu

from strategies import hypergraphs

K3 = KHypergraph.complete(3)
EDGE = KHypergraph.single_edge(2)


def mask(vs):
    return sum(1 << (v - 1) for v in vs)


def brute_independent_sets(H):
    edges = [set(e) for e in H.edges]
    for size in range(H.n + 1):
        for U in itertools.combinations(range(1, H.n + 1), size):
            if not any(e <= set(U) for e in edges):
                yield mask(U)


def brute_independent_tuples(bases):
    # each vertex goes to one coordinate or none
    n = bases[0].n
    r = len(bases)
    for cols in itertools.product(range(r + 1), repeat=n):
        parts = tuple(mask([v + 1 for v in range(n) if cols[v] == c]) for c in range(r))
        ok = all(not any(mask(e) & p == mask(e) for e in b.edges) for b, p in zip(bases, parts))
        if ok:
            yield parts


def assert_captures(family, bases, tuples):
    for I in tuples:
        S = family.assign(I)
        C = family.container_of(S)
        for s, i, c in zip(S, I, C):
            assert s & i == s  # fingerprint inside the set
            assert i & c == i  # set inside its container
        assert S in set(family.fingerprints())


def test_schur_hypergraph_edges():
    H = solution_hypergraph(SCHUR, 6)
    assert H.k == 3
    assert (1, 2, 3) in H.edges and (1, 4, 5) in H.edges and (2, 4, 6) in H.edges
    assert all(len(set(e)) == 3 for e in H.edges)


def test_edgeless_base_has_one_container():
    fam = build_single(KHypergraph.empty(5, k=3), ContainerParams(3))
    c = fam.coordinates[0]
    assert c.fingerprints == [0]
    assert c.container[0] == (1 << 5) - 1
    assert fam.certified


def test_triangle_copies_on_k4_capture_every_independent_set():
    base = build_copies_hypergraph(K3, 4).hypergraph
    fam = build_single(base, ContainerParams(3))
    assert fam.certified
    indep = list(brute_independent_sets(base))
    assert len(indep) == 2 ** 6 - 23  # 23 edge sets of K_4 contain a triangle
    assert_captures(fam, [base], [(I,) for I in indep])


def test_schur_nine_single_and_pairs():
    base = solution_hypergraph(SCHUR, 9)
    params = ContainerParams(9)
    fam = build_single(base, params)
    assert fam.certified
    assert_captures(fam, [base], [(I,) for I in brute_independent_sets(base)])
    pair = lift_tuple([base, base], params)
    tuples = list(brute_independent_tuples([base, base]))
    assert sorted(tuples) == sorted(independent_tuples([base, base]))
    assert_captures(pair, [base, base], tuples)


def test_mixed_bases_with_one_uniform_coordinate():
    # single-edge copies form a 1-uniform hypergraph: only the empty set is independent
    b1, b2 = copies_bases([K3, EDGE], 5)
    fam = lift_tuple([b1, b2], ContainerParams(10))
    tuples = list(brute_independent_tuples([b1, b2]))
    assert all(t[1] == 0 for t in tuples)
    assert_captures(fam, [b1, b2], tuples)


def test_lift_of_one_base_equals_single_family():
    base = solution_hypergraph(SCHUR, 10)
    params = ContainerParams(6)
    assert lift_tuple([base], params).to_json() == build_single(base, params).to_json()


def test_lift_rejects_mismatched_vertex_sets():
    with pytest.raises(ValueError):
        lift_tuple([solution_hypergraph(SCHUR, 6), solution_hypergraph(SCHUR, 7)], ContainerParams(3))
    with pytest.raises(ValueError):
        lift_tuple([], ContainerParams(3))


def test_params_validation():
    with pytest.raises(ValueError):
        ContainerParams(-1)
    with pytest.raises(ValueError):
        ContainerParams(3, density_ceiling=0)
    with pytest.raises(ValueError):
        ContainerParams(3, p=2)


def test_build_is_deterministic():
    base = solution_hypergraph(SCHUR, 12)
    a = json.dumps(build_single(base, ContainerParams(12)).to_json(), sort_keys=True)
    b = json.dumps(build_single(base, ContainerParams(12)).to_json(), sort_keys=True)
    assert a == b


def test_family_json_round_trip():
    base = solution_hypergraph(SCHUR, 10)
    fam = lift_tuple([base, base], ContainerParams(10))
    data = json.loads(json.dumps(fam.to_json()))
    back = ContainerFamily.from_json(data)
    assert back.to_json() == fam.to_json()
    I = (mask([1, 4, 7, 10]), mask([2, 3]))
    assert back.assign(I) == fam.assign(I)


@settings(max_examples=25, deadline=None)
@given(hypergraphs(k=3, max_n=7), st.integers(0, 4), st.sampled_from([Fraction(1, 2), Fraction(1, 4), Fraction(1)]))
def test_capture_on_random_hypergraphs(H, budget, ceiling):
    fam = build_single(H, ContainerParams(budget, density_ceiling=ceiling))
    assert_captures(fam, [H], [(I,) for I in brute_independent_sets(H)])
    assert fam.max_fingerprint_size() <= budget


def test_tiny_budget_is_uncertified():
    base = build_copies_hypergraph(K3, 5).hypergraph
    fam = build_single(base, ContainerParams(0))
    assert not fam.certified
    coord, I = fam.uncertified_witness()
    assert coord == 1 and I == frozenset()
    with pytest.raises(ContainerClauseViolation):
        verify_ramseycont([K3], 5, Fraction(1, 2), fam)
    rep = verify_ramseycont([K3], 5, Fraction(1, 2), fam, strict=False)
    assert not rep.clauses["certified"] and rep.clauses["i"]


def test_refinement_depth_extends_fingerprints():
    base = solution_hypergraph(SCHUR, 12)
    plain = build_single(base, ContainerParams(1))
    refined = build_single(base, ContainerParams(1, refinement_depth=2))
    assert refined.max_fingerprint_size() <= 3
    assert refined.count_fingerprints() >= plain.count_fingerprints()


def test_verify_schur_single_colour():
    n = 12
    fam = build_single(solution_hypergraph(SCHUR, n), ContainerParams(n))
    rep = verify_matcontainer([SCHUR], n, Fraction(1, 2), fam)
    assert rep.passed
    assert rep.reference_value == mu(n, SCHUR, 1).value
    assert rep.max_union <= rep.union_bound
    data = rep.to_json()
    assert data["clauses"]["i"] is True


def test_verify_schur_two_colours():
    n = 10
    base = solution_hypergraph(SCHUR, n)
    fam = lift_tuple([base, base], ContainerParams(n))
    rep = verify_matcontainer([SCHUR, SCHUR], n, Fraction(1, 2), fam)
    assert rep.passed
    assert rep.max_union <= rep.reference_value + 5


def test_verify_rejects_foreign_family():
    fam = build_single(solution_hypergraph(SCHUR, 9), ContainerParams(5))
    with pytest.raises(ValueError):
        verify_matcontainer([SCHUR], 10, Fraction(1, 2), fam)
    with pytest.raises(ValueError):
        verify_matcontainer([SCHUR, SCHUR], 9, Fraction(1, 2), fam)


def test_verify_triangle_copies():
    base = build_copies_hypergraph(K3, 5).hypergraph
    fam = build_single(base, ContainerParams(10))
    rep = verify_ramseycont([K3], 5, Fraction(1, 2), fam)
    assert rep.passed and rep.reference_value == 6
