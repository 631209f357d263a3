"""Exact Ramsey-type searches over edge colourings of k-graphs.

One search engine underlies everything here. It assigns each host edge a colour
in [r] (or, for extremal questions, leaves it out), forbids monochromatic
copies of the colour's pattern(s), propagates forced choices, breaks colour
symmetry between identical patterns and, on complete hosts, rejects partial
colourings isomorphic to ones already explored.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .budget import Budget, BudgetExhausted, DEFAULT_NODE_BUDGET, SizeError, Verdict
from .search import ColouringEngine
from .hypergraph import (
    Edge,
    KHypergraph,
    canonical_form,
    chromatic_number,
    copies,
    count_copies,
    edge_copies,
    graph_key,
    homomorphic_images,
)



@dataclass(frozen=True)
class ColoringAssignment:
    """An r-colouring of (a subgraph of) ``target``; colours are 1-based."""

    target: KHypergraph
    colors: dict[Edge, int] = field(hash=False)
    r: int = 1

    def colour_class(self, i: int) -> KHypergraph:
        return self.target.with_edges(e for e, c in sorted(self.colors.items()) if c == i)

    def support(self) -> KHypergraph:
        return self.target.with_edges(sorted(self.colors))

    def is_free_for(self, patterns: Sequence[KHypergraph]) -> bool:
        """Independent recheck: colour class i holds no copy of pattern i."""
        return all(count_copies(self.colour_class(i + 1), H) == 0 for i, H in enumerate(patterns))

    def to_json(self) -> dict:
        return {"r": self.r, "colors": [[list(e), c] for e, c in sorted(self.colors.items())]}


@dataclass(frozen=True)
class RamseyVerdict:
    status: Verdict
    witness: ColoringAssignment | None
    nodes: int
    certificate: str = ""

    @property
    def is_ramsey(self) -> bool | None:
        if self.status is Verdict.UNKNOWN:
            return None
        return self.status is Verdict.TRUE


@dataclass(frozen=True)
class ExtremalRecord:
    n: int
    k: int
    patterns: tuple[KHypergraph, ...]
    ex_value: int
    extremal_graph: KHypergraph
    free_coloring: ColoringAssignment
    nodes: int


# ---------------------------------------------------------------------------
# the search engine


def _colex(edges: Sequence[Edge]) -> list[Edge]:
    return sorted(edges, key=lambda e: tuple(reversed(e)))


class _Search(ColouringEngine):
    def __init__(self, host: KHypergraph, families: Sequence[Sequence[KHypergraph]],
                 allow_out: bool, budget: Budget, complete_host: bool = False):
        self.host = host
        self.complete = complete_host
        if complete_host:
            self.order = _colex(host.edges)
        else:
            # dense part of the host first
            deg = {x: host.degree(x) for x in host.vertices()}
            rank = {x: i for i, x in enumerate(sorted(host.vertices(), key=lambda y: (-deg[y], y)))}
            self.order = sorted(host.edges, key=lambda e: tuple(sorted((rank[x] for x in e), reverse=True)))
        index = {e: i for i, e in enumerate(self.order)}
        masks = []
        for fam in families:
            fam_masks: set[int] = set()
            for H in fam:
                for es in edge_copies(host, H):
                    mask = 0
                    for e in es:
                        mask |= 1 << index[e]
                    fam_masks.add(mask)
            masks.append(sorted(fam_masks))
        keys = [frozenset(graph_key(H) for H in fam) for fam in families]
        prev_same = [next((d for d in range(c - 1, -1, -1) if keys[d] == keys[c]), -1)
                     for c in range(len(families))]
        super().__init__(len(self.order), masks, prev_same, allow_out, budget)
        self.boundary: dict[int, int] = {}
        if complete_host:
            for mm in range(host.k, host.n + 1):
                self.boundary[math.comb(mm, host.k)] = mm
        self.seen: dict[int, set] = {}

    def _canon(self, assign, mm: int) -> tuple:
        lab = []
        for i in range(math.comb(mm, self.host.k)):
            if assign[i] >= 0:
                lab.append((tuple(x - 1 for x in self.order[i]), assign[i]))
        return canonical_form(mm, lab)

    def memo_hit(self, assign, pos: int, level: int) -> tuple[bool, int]:
        # All edges inside [mm] are decided once pos passes C(mm, k) in colex
        # order; isomorphic decided prefixes have identical futures.
        if not self.complete:
            return False, level
        mm = 0
        for b, val in self.boundary.items():
            if b <= pos and val > mm:
                mm = val
        if mm <= level or mm >= self.host.n:
            return False, level
        key = self._canon(assign, mm)
        bucket = self.seen.setdefault(mm, set())
        if key in bucket:
            return True, mm
        bucket.add(key)
        return False, mm

    def to_colouring(self, assign) -> ColoringAssignment:
        cols = {self.order[i]: c + 1 for i, c in enumerate(assign) if c >= 0}
        return ColoringAssignment(self.host, cols, self.r)


def _as_families(patterns) -> list[list[KHypergraph]]:
    fams = []
    for p in patterns:
        fams.append(list(p) if isinstance(p, (list, tuple)) else [p])
    return fams


def _check_uniformity(host: KHypergraph, families) -> None:
    for fam in families:
        for H in fam:
            if H.k != host.k:
                raise ValueError(f"pattern uniformity {H.k} differs from host uniformity {host.k}")


def _is_complete(G: KHypergraph) -> bool:
    return G.e == math.comb(G.n, G.k)


# ---------------------------------------------------------------------------
# public operations


def is_ramsey(G: KHypergraph, patterns, budget: int | None = DEFAULT_NODE_BUDGET,
              use_clique_shortcut: bool = True) -> RamseyVerdict:
    """Decide whether every r-colouring of G has a colour-i copy of pattern i.

    ``patterns`` entries may themselves be lists of graphs (a family per colour).
    """
    families = _as_families(patterns)
    _check_uniformity(G, families)
    if len(families) == 1:
        found = any(count_copies(G, H) > 0 for H in families[0])
        if found:
            return RamseyVerdict(Verdict.TRUE, None, 0, "contains the pattern")
        return RamseyVerdict(Verdict.FALSE, ColoringAssignment(G, {e: 1 for e in G.edges}, 1), 0)
    if use_clique_shortcut and not _is_complete(G):
        shortcut = _clique_shortcut(G, families)
        if shortcut is not None:
            return shortcut
    b = Budget(budget)
    try:
        search = _Search(G, families, allow_out=False, budget=b, complete_host=_is_complete(G))
        res = search.find_free()
    except BudgetExhausted:
        return RamseyVerdict(Verdict.UNKNOWN, None, b.nodes, "budget exhausted")
    if res is None:
        return RamseyVerdict(Verdict.TRUE, None, b.nodes, "exhausted search")
    return RamseyVerdict(Verdict.FALSE, search.to_colouring(res), b.nodes)


def _clique_size(H: KHypergraph) -> int | None:
    Hs = H.strip_isolated()
    if H.k == 2 and Hs.n >= 2 and _is_complete(Hs):
        return Hs.n
    return None


def _clique_number(G: KHypergraph) -> int:
    adj = {x: set() for x in G.vertices()}
    for a, b in G.edges:
        adj[a].add(b)
        adj[b].add(a)
    best = 0

    def expand(size, cand):
        nonlocal best
        if size + len(cand) <= best:
            return
        if not cand:
            best = max(best, size)
            return
        for x in sorted(cand):
            expand(size + 1, cand & adj[x])
            cand = cand - {x}
            if size + len(cand) <= best:
                return

    expand(0, set(G.vertices()))
    return best


@functools.lru_cache(maxsize=64)
def _cached_clique_ramsey(ells: tuple[int, ...]) -> int | None:
    res = ramsey_number(*ells, budget=2_000_000)
    return res.value


def _clique_shortcut(G: KHypergraph, families) -> RamseyVerdict | None:
    if G.k != 2 or any(len(f) != 1 for f in families):
        return None
    ells = [_clique_size(f[0]) for f in families]
    if any(x is None for x in ells):
        return None
    R = _cached_clique_ramsey(tuple(ells))
    if R is None:
        return None
    if _clique_number(G) >= R:
        return RamseyVerdict(Verdict.TRUE, None, 0, f"contains K_{R} and R{tuple(ells)}={R}")
    return None


@dataclass(frozen=True)
class EpsRamseyResult:
    status: str  # "weak", "strong" or "unknown"
    min_ratio: Fraction | None
    best_coloring: ColoringAssignment | None
    nodes: int


def eps_weak_ramsey(G: KHypergraph, patterns: Sequence[KHypergraph], eps,
                    budget: int | None = DEFAULT_NODE_BUDGET, objective: str = "max") -> EpsRamseyResult:
    """Minimise max_i (colour-i copies of H_i) / C(v(G), v(H_i)) over r-colourings.

    G is eps-weakly Ramsey iff that minimum is below eps. ``objective="sum"``
    minimises the sum of the ratios instead (used for total monochromatic counts).
    """
    if objective not in ("max", "sum"):
        raise ValueError(f"unknown objective {objective!r}")
    combine = max if objective == "max" else sum
    eps = Fraction(eps) if not isinstance(eps, float) else eps
    r = len(patterns)
    n = G.n
    order = _colex(G.edges)
    index = {e: i for i, e in enumerate(order)}
    m = len(order)
    scale = [Fraction(1, math.comb(n, H.n)) if math.comb(n, H.n) else Fraction(0) for H in patterns]
    by_edge: list[list[list[tuple[int, int]]]] = []
    for H in patterns:
        mult: dict[int, int] = {}
        for _, es in copies(G, H):
            mask = 0
            for e in es:
                mask |= 1 << index[e]
            mult[mask] = mult.get(mask, 0) + 1
        lists: list[list[tuple[int, int]]] = [[] for _ in range(m)]
        for mask, w in mult.items():
            top = mask.bit_length() - 1
            lists[top].append((mask, w))
        by_edge.append(lists)
    keys = [graph_key(H) for H in patterns]
    prev_same = [next((d for d in range(c - 1, -1, -1) if keys[d] == keys[c]), -1) for c in range(r)]
    b = Budget(budget)
    best: list = [None, None]

    def go(pos, cmask, counts, used):
        b.tick()
        worst = combine(counts[i] * scale[i] for i in range(r))
        if best[0] is not None and worst >= best[0]:
            return
        if pos == m:
            best[0], best[1] = worst, list(cmask)
            return
        for c in range(r):
            p = prev_same[c]
            if p >= 0 and not used >> p & 1:
                continue
            cm = cmask[c] | (1 << pos)
            add = sum(w for mask, w in by_edge[c][pos] if mask & cm == mask)
            c2 = list(cmask)
            c2[c] = cm
            k2 = list(counts)
            k2[c] += add
            go(pos + 1, c2, k2, used | (1 << c))

    try:
        go(0, [0] * r, [0] * r, 0)
    except BudgetExhausted:
        if best[0] is not None and best[0] < eps:
            return EpsRamseyResult("weak", best[0], _mask_colouring(G, order, best[1]), b.nodes)
        return EpsRamseyResult("unknown", best[0], None, b.nodes)
    colouring = _mask_colouring(G, order, best[1])
    status = "weak" if best[0] < eps else "strong"
    return EpsRamseyResult(status, best[0], colouring, b.nodes)


def _mask_colouring(G, order, cmask) -> ColoringAssignment:
    cols = {}
    for c, mask in enumerate(cmask):
        for i, e in enumerate(order):
            if mask >> i & 1:
                cols[e] = c + 1
    return ColoringAssignment(G, cols, len(cmask))


def min_monochromatic_copies(G: KHypergraph, patterns: Sequence[KHypergraph],
                             budget: int | None = DEFAULT_NODE_BUDGET) -> int:
    """Minimum over r-colourings of the total number of colour-i copies of H_i.

    Patterns must share one vertex count so that the scaled sum is a plain count.
    """
    if len({H.n for H in patterns}) != 1:
        raise ValueError("patterns must have equal vertex counts")
    res = eps_weak_ramsey(G, patterns, 1, budget, objective="sum")
    if res.min_ratio is None or res.status == "unknown":
        raise BudgetExhausted(res.nodes)
    return sum(count_copies(res.best_coloring.colour_class(i + 1), H) for i, H in enumerate(patterns))


def _max_non_ramsey_subgraph(host: KHypergraph, families, budget: Budget, complete: bool):
    search = _Search(host, families, allow_out=True, budget=budget, complete_host=complete)
    inc, inc_assign = search.greedy()
    best, assign = search.max_coloured(inc - 1, inc_assign)
    if assign is None:
        best, assign = inc, inc_assign
    return best, search.to_colouring(assign)


def ex_r(n: int, patterns, k: int = 2, budget: int | None = DEFAULT_NODE_BUDGET) -> ExtremalRecord:
    """Largest n-vertex k-graph that is not (H_1,...,H_r)-Ramsey, with witnesses."""
    families = _as_families(patterns)
    host = KHypergraph.complete(n, k)
    _check_uniformity(host, families)
    b = Budget(budget)
    try:
        value, colouring = _max_non_ramsey_subgraph(host, families, b, complete=True)
    except BudgetExhausted as exc:
        raise SizeError(f"ex^r({n}) search exceeded its budget ({exc.nodes} nodes)") from exc
    return ExtremalRecord(n, k, tuple(f[0] for f in families), value, colouring.support(),
                          colouring, b.nodes)


@dataclass(frozen=True)
class ResilienceResult:
    value: int | None
    bracket: tuple[int, int]
    kept: KHypergraph | None
    free_coloring: ColoringAssignment | None
    nodes: int


def resilience_exact(G: KHypergraph, patterns, budget: int | None = DEFAULT_NODE_BUDGET) -> ResilienceResult:
    """Fewest edge deletions after which G is no longer (H_1,...,H_r)-Ramsey."""
    families = _as_families(patterns)
    _check_uniformity(G, families)
    b = Budget(budget)
    search = _Search(G, families, allow_out=True, budget=b, complete_host=_is_complete(G))
    inc, inc_assign = search.greedy()
    state = {"best": inc, "assign": inc_assign}
    try:
        best, assign = search.max_coloured(inc - 1, inc_assign)
        if assign is not None:
            state["best"], state["assign"] = best, assign
    except BudgetExhausted:
        col = search.to_colouring(state["assign"])
        return ResilienceResult(None, (0, G.e - state["best"]), col.support(), col, b.nodes)
    col = search.to_colouring(state["assign"])
    value = G.e - state["best"]
    return ResilienceResult(value, (value, value), col.support(), col, b.nodes)


def turan_graph(s: int, n: int) -> KHypergraph:
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    part = {}
    x = 1
    for j in range(s):
        size = n // s + (1 if j < n % s else 0)
        for _ in range(size):
            part[x] = j
            x += 1
    es = [(a, b) for a, b in itertools.combinations(range(1, n + 1), 2) if part[a] != part[b]]
    return KHypergraph(2, n, tuple(es))


def turan_number(s: int, n: int) -> int:
    return turan_graph(s, n).e


@dataclass(frozen=True)
class RamseyNumberResult:
    value: int | None
    lower_bound: int
    lower_certificate: ColoringAssignment | None
    nodes: int


def _least_ramsey_clique(families, k: int, budget: int | None, start: int = 1) -> RamseyNumberResult:
    nodes = 0
    cert = None
    m = start
    while True:
        host = KHypergraph.complete(m, k)
        remaining = None if budget is None else budget - nodes
        if remaining is not None and remaining <= 0:
            return RamseyNumberResult(None, m, cert, nodes)
        verdict = is_ramsey(host, families, budget=remaining, use_clique_shortcut=False)
        nodes += verdict.nodes
        if verdict.status is Verdict.UNKNOWN:
            return RamseyNumberResult(None, m, cert, nodes)
        if verdict.status is Verdict.TRUE:
            return RamseyNumberResult(m, m, cert, nodes)
        cert = verdict.witness
        m += 1


def ramsey_number(*ells: int, budget: int | None = DEFAULT_NODE_BUDGET) -> RamseyNumberResult:
    """R(ell_1, ..., ell_r) for cliques; ``lower_bound`` is the least m not yet ruled out."""
    if not ells or any(x < 2 for x in ells):
        raise ValueError("clique sizes must be >= 2")
    families = [[KHypergraph.complete(x)] for x in ells]
    return _least_ramsey_clique(families, 2, budget, start=max(1, min(ells)))


@dataclass(frozen=True)
class ChromaticRamseyInterval:
    lower: int
    upper: float
    hom_families: tuple[tuple[KHypergraph, ...], ...]
    lower_certificate: ColoringAssignment | None
    nodes: int


def chromatic_ramsey_probe(patterns: Sequence[KHypergraph], v_max: int = 8,
                           budget: int | None = DEFAULT_NODE_BUDGET) -> ChromaticRamseyInterval:
    """Least m such that every r-colouring of K_m has a colour-i member of Hom(H_i)."""
    fams = [homomorphic_images(H, v_max) for H in patterns]
    if len(patterns) == 1:
        chi = chromatic_number(patterns[0])
        return ChromaticRamseyInterval(chi, chi, (tuple(fams[0]),), None, 0)
    res = _least_ramsey_clique(fams, 2, budget)
    upper = res.value if res.value is not None else math.inf
    return ChromaticRamseyInterval(res.lower_bound, upper, tuple(tuple(f) for f in fams),
                                   res.lower_certificate, res.nodes)


class MonotonicityViolation(AssertionError):
    pass


def pi_sequence(patterns, n_range, k: int = 2, budget: int | None = DEFAULT_NODE_BUDGET) -> list[tuple[int, Fraction]]:
    """ex^r(n)/C(n,k) over ``n_range``; raises if the sequence ever increases."""
    out = []
    for n in n_range:
        if n < k:
            continue
        rec = ex_r(n, patterns, k=k, budget=budget)
        out.append((n, Fraction(rec.ex_value, math.comb(n, k))))
    for (n1, a), (n2, b) in zip(out, out[1:]):
        if b > a:
            raise MonotonicityViolation(f"density rose from {a} (n={n1}) to {b} (n={n2})")
    return out


def de_caen_bound(s: int, k: int = 2) -> Fraction:
    return 1 - Fraction(1, math.comb(s - 1, k - 1))
