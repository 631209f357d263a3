"""k-uniform hypergraphs on [n], their density parameters, and copies hypergraphs.

Vertices are 1-based integers. All density values are exact ``Fraction`` objects.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .budget import Budget, SizeError

Edge = tuple[int, ...]


class DensityError(ValueError):
    pass


class UnsupportedUniformity(ValueError):
    pass


@dataclass(frozen=True)
class KHypergraph:
    k: int
    n: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"uniformity must be >= 1, got {self.k}")
        if self.n < 0:
            raise ValueError(f"vertex count must be >= 0, got {self.n}")
        canon = []
        for e in self.edges:
            t = tuple(sorted(e))
            if len(t) != self.k:
                raise ValueError(f"edge {e} does not have exactly {self.k} vertices")
            if len(set(t)) != self.k:
                raise ValueError(f"edge {e} repeats a vertex")
            if t[0] < 1 or t[-1] > self.n:
                raise ValueError(f"edge {e} leaves the vertex range [1, {self.n}]")
            canon.append(t)
        canon.sort()
        for a, b in zip(canon, canon[1:]):
            if a == b:
                raise ValueError(f"duplicate edge {a}")
        object.__setattr__(self, "edges", tuple(canon))

    # -- basic structure -------------------------------------------------

    @property
    def v(self) -> int:
        return self.n

    @property
    def e(self) -> int:
        return len(self.edges)

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def degree(self, x: int) -> int:
        return sum(1 for e in self.edges if x in e)

    def max_degree(self) -> int:
        return delta_ell(self, 1) if self.edges else 0

    def non_isolated(self) -> list[int]:
        return sorted({x for e in self.edges for x in e})

    def induced(self, vertex_set: Iterable[int]) -> "KHypergraph":
        """Induced subhypergraph, relabelled onto [|vertex_set|] in increasing order."""
        keep = sorted(set(vertex_set))
        pos = {x: i + 1 for i, x in enumerate(keep)}
        es = [tuple(pos[x] for x in e) for e in self.edges if all(x in pos for x in e)]
        return KHypergraph(self.k, len(keep), tuple(es))

    def induced_edge_count(self, vertex_set: Iterable[int]) -> int:
        s = set(vertex_set)
        return sum(1 for e in self.edges if all(x in s for x in e))

    def strip_isolated(self) -> "KHypergraph":
        return self.induced(self.non_isolated())

    def relabel(self, mapping: Mapping[int, int], n: int | None = None) -> "KHypergraph":
        return KHypergraph(self.k, self.n if n is None else n,
                           tuple(tuple(mapping[x] for x in e) for e in self.edges))

    def with_edges(self, edges: Iterable[Sequence[int]]) -> "KHypergraph":
        return KHypergraph(self.k, self.n, tuple(tuple(e) for e in edges))

    def edge_index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    def __str__(self) -> str:
        return f"KHypergraph(k={self.k}, n={self.n}, e={self.e})"

    # -- named constructors ----------------------------------------------

    @classmethod
    def complete(cls, n: int, k: int = 2) -> "KHypergraph":
        return cls(k, n, tuple(itertools.combinations(range(1, n + 1), k)))

    @classmethod
    def empty(cls, n: int, k: int = 2) -> "KHypergraph":
        return cls(k, n, ())

    @classmethod
    def single_edge(cls, k: int = 2) -> "KHypergraph":
        return cls(k, k, (tuple(range(1, k + 1)),))

    @classmethod
    def cycle(cls, n: int) -> "KHypergraph":
        return cls(2, n, tuple((i, i % n + 1) for i in range(1, n + 1)))

    @classmethod
    def path(cls, n: int) -> "KHypergraph":
        return cls(2, n, tuple((i, i + 1) for i in range(1, n)))

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence[int]], n: int | None = None,
                   k: int | None = None) -> "KHypergraph":
        es = [tuple(e) for e in edges]
        if k is None:
            if not es:
                raise ValueError("cannot infer uniformity from an empty edge list")
            k = len(es[0])
        if n is None:
            n = max((max(e) for e in es), default=0)
        return cls(k, n, tuple(es))


# ---------------------------------------------------------------------------
# densities


def d_k(H: KHypergraph) -> Fraction:
    if H.e == 0:
        return Fraction(0)
    if H.v == H.k:
        if H.e == 1:
            return Fraction(1, H.k)
        raise DensityError(f"{H.e} edges on exactly k={H.k} vertices: corrupt input")
    return Fraction(H.e - 1, H.v - H.k)


def _d_k_counts(e: int, v: int, k: int) -> Fraction:
    if e == 0:
        return Fraction(0)
    if v == k:
        return Fraction(1, k)
    return Fraction(e - 1, v - k)


@dataclass(frozen=True)
class DensityReport:
    d_k: Fraction
    m_k: Fraction
    witness: tuple[int, ...]

    def to_json(self) -> dict:
        return {"d_k": frac_str(self.d_k), "m_k": frac_str(self.m_k),
                "witness": list(self.witness)}

    @classmethod
    def from_json(cls, data: Mapping) -> "DensityReport":
        return cls(parse_frac(data["d_k"]), parse_frac(data["m_k"]), tuple(data["witness"]))


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(s: str | int) -> Fraction:
    return Fraction(s)


def _subsets_by_size(vertices: Sequence[int], min_size: int = 0) -> Iterator[tuple[int, ...]]:
    # smallest sets first, lexicographic within a size: fixes witness tie-breaking
    for size in range(min_size, len(vertices) + 1):
        yield from itertools.combinations(vertices, size)


def m_k(H: KHypergraph) -> DensityReport:
    """Maximum k-density over subhypergraphs.

    Adding edges on a fixed vertex set never lowers d_k, so it suffices to scan
    vertex subsets with every induced edge.
    """
    best = Fraction(0)
    witness: tuple[int, ...] = ()
    for U in _subsets_by_size(list(H.vertices())):
        val = _d_k_counts(H.induced_edge_count(U), len(U), H.k)
        if val > best:
            best, witness = val, U
    return DensityReport(d_k(H), best, witness)


@dataclass(frozen=True)
class AsymmetricDensity:
    value: Fraction
    witness: tuple[int, ...]
    strictly_balanced: bool


class OrderingError(ValueError):
    pass


def asymmetric_m_k(H1: KHypergraph, H2: KHypergraph) -> AsymmetricDensity:
    if H1.k != H2.k:
        raise ValueError("patterns must share the same uniformity")
    if H1.e == 0 or H2.e == 0:
        raise ValueError("both patterns need at least one edge")
    m1, m2 = m_k(H1).m_k, m_k(H2).m_k
    if m1 < m2:
        raise OrderingError(f"need m_k(H1) >= m_k(H2), got {m1} < {m2}; swap the arguments")
    inv = 1 / m2
    best, witness = None, ()
    ratios: dict[tuple[int, ...], Fraction] = {}
    for U in _subsets_by_size(list(H1.vertices()), H1.k):
        e = H1.induced_edge_count(U)
        if e == 0:
            continue
        val = e / (len(U) - H1.k + inv)
        ratios[U] = val
        if best is None or val > best:
            best, witness = val, U
    full = tuple(H1.vertices())
    # proper edge subsets on the full vertex set are strictly worse, so only
    # proper vertex subsets can tie with H1 itself
    strict = (ratios.get(full) == best
              and all(val < best for U, val in ratios.items() if U != full))
    return AsymmetricDensity(best, witness, strict)


# ---------------------------------------------------------------------------
# chromatic number (graphs only)


def chromatic_number(H: KHypergraph) -> int:
    if H.k != 2:
        raise UnsupportedUniformity("chromatic number is only implemented for graphs (k=2)")
    n = H.n
    if n == 0:
        return 0
    adj = [0] * (n + 1)
    for a, b in H.edges:
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    order = sorted(H.vertices(), key=lambda x: (-adj[x].bit_count(), x))

    def colourable(c: int) -> bool:
        colour = [0] * (n + 1)

        def go(i: int, used: int) -> bool:
            if i == len(order):
                return True
            x = order[i]
            forbidden = {colour[y] for y in range(1, n + 1) if adj[x] >> y & 1 and colour[y]}
            for col in range(1, min(used + 1, c) + 1):
                if col not in forbidden:
                    colour[x] = col
                    if go(i + 1, max(used, col)):
                        return True
                    colour[x] = 0
            return False

        return go(0, 0)

    for c in range(1, n + 1):
        if colourable(c):
            return c
    return n


# ---------------------------------------------------------------------------
# canonical forms (individualisation-refinement, exact)


def _refine(n: int, incidence: list[list[tuple[tuple[int, ...], int]]], colours: list[int]) -> list[int]:
    ncls = len(set(colours))
    while True:
        sigs = []
        for v in range(n):
            inc = sorted((lab, tuple(sorted(colours[u] for u in e if u != v)))
                         for e, lab in incidence[v])
            sigs.append((colours[v], tuple(inc)))
        order = {s: i for i, s in enumerate(sorted(set(sigs)))}
        colours = [order[s] for s in sigs]
        if len(order) == ncls:
            return colours
        ncls = len(order)


def _ir_leaves(n: int, edges: Sequence[tuple[tuple[int, ...], int]],
               initial: Sequence[int] | None = None) -> Iterator[tuple]:
    incidence: list[list[tuple[tuple[int, ...], int]]] = [[] for _ in range(n)]
    for e, lab in edges:
        for v in e:
            incidence[v].append((e, lab))
    start = list(initial) if initial is not None else [0] * n

    def form(colours: list[int]) -> tuple:
        return tuple(sorted((tuple(sorted(colours[v] for v in e)), lab) for e, lab in edges))

    def walk(colours: list[int]) -> Iterator[tuple]:
        colours = _refine(n, incidence, colours)
        counts = Counter(colours)
        if len(counts) == n:
            yield form(colours)
            return
        target = min(c for c, m in counts.items() if m > 1)
        for v in range(n):
            if colours[v] == target:
                # individualise v ahead of its cell-mates
                branch = [2 * c + (0 if (c != target or u == v) else 1) for u, c in enumerate(colours)]
                yield from walk(branch)

    yield from walk(start)


def canonical_form(n: int, edges: Iterable[tuple[Sequence[int], int]],
                   vertex_colours: Sequence[int] | None = None) -> tuple:
    """Canonical form of an edge-labelled hypergraph on vertices 0..n-1.

    ``edges`` yields (vertex tuple, label) pairs; isomorphic inputs (vertex
    bijections preserving labels and ``vertex_colours``) give equal forms.
    """
    es = [(tuple(e), lab) for e, lab in edges]
    if n == 0:
        return (0, ())
    return (n, min(_ir_leaves(n, es, vertex_colours)))


def graph_key(H: KHypergraph) -> tuple:
    return (H.k,) + canonical_form(H.n, ((tuple(x - 1 for x in e), 1) for e in H.edges))


def automorphism_count(H: KHypergraph) -> int:
    es = [(tuple(x - 1 for x in e), 1) for e in H.edges]
    if H.n == 0:
        return 1
    leaves = list(_ir_leaves(H.n, es))
    best = min(leaves)
    return sum(1 for f in leaves if f == best)


def automorphism_count_bruteforce(H: KHypergraph) -> int:
    edges = set(H.edges)
    count = 0
    for perm in itertools.permutations(H.vertices()):
        mapping = dict(zip(H.vertices(), perm))
        if all(tuple(sorted(mapping[x] for x in e)) in edges for e in H.edges):
            count += 1
    return count


# ---------------------------------------------------------------------------
# embeddings and copies


def embeddings(H: KHypergraph, G: KHypergraph, budget: Budget | None = None) -> Iterator[dict[int, int]]:
    """Injective maps V(H) -> V(G) sending every edge of H onto an edge of G."""
    if H.k != G.k:
        raise ValueError("uniformities differ")
    if H.n > G.n:
        return
    gedges = set(G.edges)
    # place well-connected vertices first so edge checks fire early
    order: list[int] = []
    remaining = set(H.vertices())
    while remaining:
        placed = set(order)
        x = max(remaining, key=lambda y: (sum(1 for e in H.edges if y in e and any(z in placed for z in e)),
                                          H.degree(y), -y))
        order.append(x)
        remaining.discard(x)
    pos = {x: i for i, x in enumerate(order)}
    closing: list[list[Edge]] = [[] for _ in order]
    for e in H.edges:
        closing[max(pos[x] for x in e)].append(e)

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def go(i: int) -> Iterator[dict[int, int]]:
        if budget is not None:
            budget.tick()
        if i == len(order):
            yield dict(mapping)
            return
        x = order[i]
        for y in G.vertices():
            if y in used:
                continue
            mapping[x] = y
            if all(tuple(sorted(mapping[z] for z in e)) in gedges for e in closing[i]):
                used.add(y)
                yield from go(i + 1)
                used.discard(y)
            del mapping[x]

    yield from go(0)


def copies(G: KHypergraph, H: KHypergraph, budget: Budget | None = None) -> set[tuple[frozenset, frozenset]]:
    """Distinct (vertex image, edge image) pairs of embeddings of H into G."""
    out = set()
    for phi in embeddings(H, G, budget):
        vs = frozenset(phi.values())
        es = frozenset(tuple(sorted(phi[x] for x in e)) for e in H.edges)
        out.add((vs, es))
    return out


def count_copies(G: KHypergraph, H: KHypergraph, budget: int | None = None) -> int:
    return len(copies(G, H, Budget(budget)))


def edge_copies(G: KHypergraph, H: KHypergraph, budget: Budget | None = None) -> set[frozenset]:
    """Distinct edge-set images of H in G (what colourings see)."""
    return {es for _, es in copies(G, H, budget)}


# ---------------------------------------------------------------------------
# copies hypergraph


@dataclass(frozen=True)
class CopiesHypergraph:
    base: KHypergraph
    ground_n: int
    hypergraph: KHypergraph
    labels: tuple[Edge, ...] = field(repr=False)

    def index_of(self) -> dict[Edge, int]:
        return {lab: i + 1 for i, lab in enumerate(self.labels)}

    def edge_set_of(self, vertex_ids: Iterable[int]) -> tuple[Edge, ...]:
        """Translate copies-hypergraph vertex ids back to k-edges of K_n."""
        return tuple(sorted(self.labels[i - 1] for i in vertex_ids))


def projected_copies_size(H: KHypergraph, n: int) -> tuple[int, int]:
    Hs = H.strip_isolated()
    verts = math.comb(n, H.k)
    edges = math.factorial(Hs.n) // automorphism_count(Hs) * math.comb(n, Hs.n)
    return verts, edges


def build_copies_hypergraph(H: KHypergraph, n: int, max_size: int = 2_000_000) -> CopiesHypergraph:
    if H.e == 0:
        raise ValueError("the pattern has no edges; its copies hypergraph is undefined")
    if n < H.n:
        raise ValueError(f"need n >= v(H) = {H.n}, got {n}")
    verts, edges = projected_copies_size(H, n)
    if verts + edges > max_size:
        raise SizeError(f"copies hypergraph would have {verts} vertices and {edges} edges "
                        f"(budget {max_size})")
    Hs = H.strip_isolated()
    labels = tuple(itertools.combinations(range(1, n + 1), H.k))
    index = {lab: i + 1 for i, lab in enumerate(labels)}
    found: set[tuple[int, ...]] = set()
    for U in itertools.combinations(range(1, n + 1), Hs.n):
        for perm in itertools.permutations(U):
            img = tuple(sorted(index[tuple(sorted(perm[x - 1] for x in e))] for e in Hs.edges))
            found.add(img)
    hyper = KHypergraph(Hs.e, len(labels), tuple(found))
    return CopiesHypergraph(H, n, hyper, labels)


def delta_ell(H: KHypergraph, ell: int) -> int:
    if not 1 <= ell <= H.k:
        raise ValueError(f"ell must lie in [1, {H.k}], got {ell}")
    counts: Counter = Counter()
    for e in H.edges:
        counts.update(itertools.combinations(e, ell))
    return max(counts.values(), default=0)


@dataclass(frozen=True)
class BoundednessRow:
    ell: int
    delta: int
    rhs: float
    holds: bool
    needed_c: Fraction | float


@dataclass(frozen=True)
class BoundednessReport:
    rows: tuple[BoundednessRow, ...]
    fitted_c: Fraction | float

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.rows)


def check_boundedness(ch: CopiesHypergraph, p, c) -> BoundednessReport:
    """Compare each co-degree Delta_ell with c * p^(ell-1) * e/v."""
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    hyper = ch.hypergraph
    e, v = hyper.e, hyper.v
    rows = []
    needed = []
    for ell in range(1, hyper.k + 1):
        delta = delta_ell(hyper, ell)
        scale = p ** (ell - 1) * Fraction(e, v) if isinstance(p, Fraction) else p ** (ell - 1) * e / v
        rhs = c * scale
        need = delta / scale
        needed.append(need)
        rows.append(BoundednessRow(ell, delta, float(rhs), delta <= rhs, need))
    return BoundednessReport(tuple(rows), max(needed))


def homomorphic_images(H: KHypergraph, v_max: int | None = None) -> list[KHypergraph]:
    """Hom(H): loopless quotient graphs of H, one per isomorphism class.

    Images with more than ``v_max`` vertices are dropped.
    """
    if H.k != 2:
        raise UnsupportedUniformity("homomorphic images are only implemented for graphs")
    verts = list(H.vertices())
    adj = {x: set() for x in verts}
    for a, b in H.edges:
        adj[a].add(b)
        adj[b].add(a)
    seen: dict[tuple, KHypergraph] = {}

    def partitions(i: int, blocks: list[list[int]]) -> Iterator[list[list[int]]]:
        if i == len(verts):
            yield blocks
            return
        x = verts[i]
        for blk in blocks:
            if not adj[x] & set(blk):
                blk.append(x)
                yield from partitions(i + 1, blocks)
                blk.pop()
        blocks.append([x])
        yield from partitions(i + 1, blocks)
        blocks.pop()

    for blocks in partitions(0, []):
        if v_max is not None and len(blocks) > v_max:
            continue
        where = {x: j + 1 for j, blk in enumerate(blocks) for x in blk}
        es = {tuple(sorted((where[a], where[b]))) for a, b in H.edges}
        K = KHypergraph(2, len(blocks), tuple(es))
        key = graph_key(K)
        if key not in seen:
            seen[key] = K
    return sorted(seen.values(), key=lambda K: (K.n, K.e, K.edges))
