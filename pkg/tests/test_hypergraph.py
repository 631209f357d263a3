import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from ramsey_container_lab.budget import SizeError
from ramsey_container_lab.hypergraph import (
    DensityError, DensityReport, KHypergraph, OrderingError, UnsupportedUniformity,
    _d_k_counts, asymmetric_m_k, automorphism_count, automorphism_count_bruteforce,
    build_copies_hypergraph, check_boundedness, chromatic_number, copies, count_copies,
    d_k, delta_ell, embeddings, graph_key, homomorphic_images, m_k, projected_copies_size,
)

from strategies import (
    brute_copies, brute_isomorphic, graphs, graphs_with_edges, hypergraphs, permuted,
)

K3 = KHypergraph.complete(3)
K4 = KHypergraph.complete(4)
C4 = KHypergraph.cycle(4)
C5 = KHypergraph.cycle(5)


def brute_m_k(H):
    """Max d_k over every (vertex set, edge subset) subgraph, isolated vertices included."""
    best = Fraction(0)
    verts = list(H.vertices())
    for size in range(H.k, len(verts) + 1):
        for U in itertools.combinations(verts, size):
            inside = [e for e in H.edges if set(e) <= set(U)]
            for m in range(1, len(inside) + 1):
                for sub in itertools.combinations(inside, m):
                    best = max(best, _d_k_counts(m, size, H.k))
    return best


# construction ---------------------------------------------------------------


def test_edges_are_validated():
    with pytest.raises(ValueError):
        KHypergraph(2, 3, ((1, 1),))
    with pytest.raises(ValueError):
        KHypergraph(2, 3, ((1, 4),))
    with pytest.raises(ValueError):
        KHypergraph(2, 3, ((1, 2), (2, 1)))
    with pytest.raises(ValueError):
        KHypergraph(3, 4, ((1, 2),))


def test_named_constructors():
    assert K4.e == 6 and K4.v == 4
    assert C5.e == 5 and all(C5.degree(x) == 2 for x in C5.vertices())
    assert KHypergraph.path(4).e == 3
    assert KHypergraph.complete(5, k=3).e == 10
    assert KHypergraph.single_edge(3).edges == ((1, 2, 3),)
    assert KHypergraph.empty(4).e == 0


def test_strip_isolated_and_induced():
    H = KHypergraph(2, 5, ((2, 4),))
    S = H.strip_isolated()
    assert (S.n, S.e) == (2, 1)
    assert K4.induced((1, 2, 3)).e == 3
    assert K4.induced_edge_count((1, 2)) == 1


# densities ------------------------------------------------------------------


def test_density_examples():
    assert m_k(K3).m_k == 2
    rep = m_k(K4)
    assert rep.m_k == Fraction(5, 2) and rep.witness == (1, 2, 3, 4)
    assert m_k(C4).m_k == Fraction(3, 2)
    assert m_k(KHypergraph.single_edge(2)).m_k == Fraction(1, 2)
    assert m_k(KHypergraph.single_edge(3)).m_k == Fraction(1, 3)
    assert m_k(KHypergraph.empty(3)).m_k == 0


def test_d_k_rejects_corrupt_counts():
    assert _d_k_counts(1, 2, 2) == Fraction(1, 2)
    assert d_k(KHypergraph.complete(3, k=3)) == Fraction(1, 3)
    with pytest.raises(DensityError):
        d_k(type("Fake", (), {"e": 2, "v": 2, "k": 2})())


def test_density_report_json_round_trip():
    rep = m_k(K4)
    assert DensityReport.from_json(rep.to_json()) == rep
    assert rep.to_json()["m_k"] == "5/2"


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=6, max_edges=9))
def test_m_k_vertex_scan_matches_subgraph_enumeration(H):
    assert m_k(H).m_k == brute_m_k(H)


@settings(max_examples=30, deadline=None)
@given(hypergraphs(k=3, max_n=6))
def test_m_k_vertex_scan_matches_subgraph_enumeration_k3(H):
    assert m_k(H).m_k == brute_m_k(H)


@settings(max_examples=60, deadline=None)
@given(graphs_with_edges(max_n=6))
def test_m_k_witness_attains_value(H):
    rep = m_k(H)
    assert _d_k_counts(H.induced_edge_count(rep.witness), len(rep.witness), 2) == rep.m_k


def test_asymmetric_examples():
    assert asymmetric_m_k(K3, K3).value == 2
    r = asymmetric_m_k(K4, K3)
    assert r.value == Fraction(12, 5) and r.strictly_balanced
    assert asymmetric_m_k(KHypergraph.single_edge(2), KHypergraph.single_edge(2)).value == Fraction(1, 2)
    with pytest.raises(OrderingError):
        asymmetric_m_k(K3, K4)


@settings(max_examples=80, deadline=None)
@given(graphs_with_edges(max_n=6), graphs_with_edges(max_n=6))
def test_asymmetric_sandwich(H1, H2):
    m1, m2 = m_k(H1).m_k, m_k(H2).m_k
    if m1 < m2:
        H1, H2, m1, m2 = H2, H1, m2, m1
    a = asymmetric_m_k(H1, H2).value
    assert m2 <= a <= m1
    assert (a == m1) == (m1 == m2)


def test_chromatic_number_examples():
    assert chromatic_number(K4) == 4
    assert chromatic_number(C5) == 3
    assert chromatic_number(C4) == 2
    assert chromatic_number(KHypergraph.empty(5)) == 1
    with pytest.raises(UnsupportedUniformity):
        chromatic_number(KHypergraph.complete(4, k=3))


@settings(max_examples=60, deadline=None)
@given(graphs(min_n=1, max_n=6))
def test_chromatic_number_matches_brute_force(G):
    def ok(c):
        return any(all(col[a - 1] != col[b - 1] for a, b in G.edges)
                   for col in itertools.product(range(c), repeat=G.n))
    assert chromatic_number(G) == next(c for c in range(1, G.n + 1) if ok(c))


# canonical forms and automorphisms -----------------------------------------


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=6), st.randoms(use_true_random=False))
def test_graph_key_invariant_under_relabelling(G, rnd):
    perm = list(range(1, G.n + 1))
    rnd.shuffle(perm)
    assert graph_key(permuted(G, perm)) == graph_key(G)


@settings(max_examples=80, deadline=None)
@given(graphs(min_n=4, max_n=5), graphs(min_n=4, max_n=5))
def test_graph_key_separates_non_isomorphic(G, H):
    assert (graph_key(G) == graph_key(H)) == brute_isomorphic(G, H)


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=5))
def test_automorphism_count_matches_enumeration(H):
    assert automorphism_count(H) == automorphism_count_bruteforce(H)


@settings(max_examples=20, deadline=None)
@given(hypergraphs(k=3, max_n=5))
def test_automorphism_count_matches_enumeration_k3(H):
    assert automorphism_count(H) == automorphism_count_bruteforce(H)


def test_automorphism_examples():
    assert automorphism_count(K4) == 24
    assert automorphism_count(C5) == 10
    assert automorphism_count(KHypergraph.path(4)) == 2


# copies ---------------------------------------------------------------------


def test_count_copies_examples():
    assert count_copies(K4, K3) == 4
    assert count_copies(K3, K3) == 1
    assert count_copies(C5, K3) == 0
    assert count_copies(KHypergraph.complete(5), C5) == 12


@settings(max_examples=40, deadline=None)
@given(graphs(min_n=2, max_n=6), graphs_with_edges(min_n=2, max_n=4))
def test_copies_match_brute_force(G, H):
    H = H.strip_isolated()
    assert copies(G, H) == brute_copies(G, H)


@settings(max_examples=40, deadline=None)
@given(graphs(min_n=2, max_n=6), graphs_with_edges(min_n=2, max_n=4))
def test_copies_times_aut_equals_injective_homomorphisms(G, H):
    H = H.strip_isolated()
    n_emb = sum(1 for _ in embeddings(H, G))
    assert count_copies(G, H) * automorphism_count(H) == n_emb


def test_copies_hypergraph_triangle_on_four():
    ch = build_copies_hypergraph(K3, 4)
    hyp = ch.hypergraph
    assert (hyp.k, hyp.v, hyp.e) == (3, 6, 4)
    assert hyp.max_degree() == 2
    assert set(ch.edge_set_of(hyp.edges[0])) <= set(K4.edges)


def test_copies_hypergraph_single_edge_is_one_uniform():
    hyp = build_copies_hypergraph(KHypergraph.single_edge(2), 3).hypergraph
    assert (hyp.k, hyp.v, hyp.e) == (1, 3, 3)


@settings(max_examples=25, deadline=None)
@given(graphs_with_edges(min_n=2, max_n=5), st.integers(5, 8))
def test_copies_hypergraph_edge_count_formula(H, n):
    Hs = H.strip_isolated()
    ch = build_copies_hypergraph(H, n)
    expect = math.factorial(Hs.n) // automorphism_count(Hs) * math.comb(n, Hs.n)
    assert ch.hypergraph.e == expect
    assert projected_copies_size(H, n) == (math.comb(n, 2), expect)


def test_copies_hypergraph_guards():
    with pytest.raises(SizeError, match="vertices"):
        build_copies_hypergraph(K3, 30, max_size=1000)
    with pytest.raises(ValueError):
        build_copies_hypergraph(KHypergraph.empty(3), 5)
    with pytest.raises(ValueError):
        build_copies_hypergraph(K4, 3)


# codegrees and boundedness -------------------------------------------------


def test_delta_ell_examples():
    hyp = build_copies_hypergraph(K3, 4).hypergraph
    assert delta_ell(hyp, 1) == 2
    assert delta_ell(hyp, 2) == 1
    assert delta_ell(hyp, 3) == 1
    assert delta_ell(KHypergraph.empty(4, k=3), 1) == 0
    with pytest.raises(ValueError):
        delta_ell(hyp, 0)
    with pytest.raises(ValueError):
        delta_ell(hyp, 4)


def test_boundedness_fitted_constant_closes_every_row():
    ch = build_copies_hypergraph(K3, 6)
    for p in (Fraction(1), Fraction(1, 2), 6 ** -0.5):
        rep = check_boundedness(ch, p, 1)
        again = check_boundedness(ch, p, rep.fitted_c)
        assert again.all_hold
    rep = check_boundedness(ch, Fraction(1), 1)
    # K3 copies on K6: Delta_1 = 4, e/v = 20/15
    assert rep.rows[0].delta == 4
    assert rep.fitted_c == Fraction(4 * 15, 20)
    with pytest.raises(ValueError):
        check_boundedness(ch, 0, 1)


def test_codegree_monotonicity_logged(capsys):
    # not a theorem for every hypergraph, so violations are reported, not asserted
    violations = []
    for H in (K3, K4, C4, C5, KHypergraph.path(4)):
        for n in (5, 6):
            hyp = build_copies_hypergraph(H, n).hypergraph
            ds = [delta_ell(hyp, l) for l in range(1, hyp.k + 1)]
            if any(a < b for a, b in zip(ds, ds[1:])):
                violations.append((str(H), n, ds))
    print("codegree monotonicity violations:", violations)


# homomorphic images ---------------------------------------------------------


def brute_hom_images(H, v_max):
    out = []
    for m in range(1, v_max + 1):
        for phi in itertools.product(range(1, m + 1), repeat=H.n):
            if len(set(phi)) != m:
                continue
            if any(phi[a - 1] == phi[b - 1] for a, b in H.edges):
                continue
            K = KHypergraph(2, m, tuple(sorted({tuple(sorted((phi[a - 1], phi[b - 1]))) for a, b in H.edges})))
            if not any(brute_isomorphic(K, L) for L in out):
                out.append(K)
    return out


def test_homomorphic_images_examples():
    assert [graph_key(K) for K in homomorphic_images(K3)] == [graph_key(K3)]
    assert len(homomorphic_images(C4)) == 3  # C4, P3 and K2
    assert all(K.n <= 3 for K in homomorphic_images(C5, v_max=3))


@settings(max_examples=25, deadline=None)
@given(graphs_with_edges(min_n=2, max_n=5))
def test_homomorphic_images_match_brute_force(H):
    ours = homomorphic_images(H)
    brute = brute_hom_images(H, H.n)
    assert len(ours) == len(brute)
    for K in ours:
        assert any(brute_isomorphic(K, L) for L in brute)
