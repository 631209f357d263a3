"""Containers for independent sets and for r-tuples of disjoint independent sets.

Fingerprints come from a degree-greedy scheme: repeatedly take the vertex of
largest degree in the hypergraph induced on the live vertices (fingerprint plus
candidates). If it belongs to the independent set it joins the fingerprint and
every candidate that would complete an edge with the fingerprint is dropped;
otherwise it is simply dropped. Since the decision "is v in I" can be replayed
as "is v in the fingerprint", the fingerprint alone determines the container.
The process stops once the live vertices induce fewer than
``density_ceiling * e(H)`` edges, or when the fingerprint reaches its budget.
In a tuple family every coordinate keeps its own budget and the bound on
sum_i |S_i| is the sum of those budgets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .budget import Verdict
from .hypergraph import KHypergraph, build_copies_hypergraph, m_k
from .rado import LinearSystem, SolutionMode, enumerate_solutions, m_A, mu
from .ramsey import eps_weak_ramsey, ex_r


@dataclass(frozen=True)
class ContainerParams:
    fingerprint_budget: int
    density_ceiling: Fraction = Fraction(1, 2)
    p: Fraction = Fraction(1)
    eps: Fraction = Fraction(1, 2)
    refinement_depth: int = 0

    def __post_init__(self):
        if self.fingerprint_budget < 0:
            raise ValueError("fingerprint_budget must be non-negative")
        if not 0 < Fraction(self.density_ceiling) <= 1:
            raise ValueError("density_ceiling must lie in (0, 1]")
        if not 0 < Fraction(self.p) <= 1:
            raise ValueError("p must lie in (0, 1]")
        if self.refinement_depth < 0:
            raise ValueError("refinement_depth must be non-negative")


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _mask_to_set(mask: int) -> frozenset[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length())
        mask ^= low
    return frozenset(out)


def _set_to_mask(vs) -> int:
    m = 0
    for v in vs:
        m |= 1 << (v - 1)
    return m


class _Scheme:
    """The replayable greedy process on one base hypergraph (vertices as bits)."""

    def __init__(self, base: KHypergraph, params: ContainerParams):
        self.base = base
        self.params = params
        self.edges = [_set_to_mask(e) for e in base.edges]
        self.full = (1 << base.n) - 1
        self.threshold = Fraction(params.density_ceiling) * len(self.edges)
        self.limit = params.fingerprint_budget + params.refinement_depth

    def live_edges(self, live: int) -> list[int]:
        return [e for e in self.edges if e & live == e]

    def dense(self, live: int) -> bool:
        return len(self.edges) > 0 and len(self.live_edges(live)) >= self.threshold

    def pick(self, S: int, A: int) -> int | None:
        """Max-degree candidate in H[S | A]; ties to the smallest vertex."""
        live = S | A
        deg: dict[int, int] = {}
        for e in self.live_edges(live):
            rest = e & A
            while rest:
                low = rest & -rest
                deg[low] = deg.get(low, 0) + 1
                rest ^= low
        if not deg:
            low = A & -A
            return low if A else None
        best = max(deg.values())
        return min((b for b, d in deg.items() if d == best), key=lambda b: b.bit_length())

    def stop(self, S: int, A: int) -> bool:
        if not self.edges or A == 0:
            return True
        if not self.dense(S | A):
            return True
        return _popcount(S) >= self.limit

    def add(self, S: int, A: int, v: int) -> tuple[int, int]:
        S |= v
        A &= ~v
        for e in self.edges:
            rest = e & ~S
            if rest and rest & (rest - 1) == 0 and rest & A:
                A &= ~rest
        return S, A

    def replay(self, I: int) -> tuple[int, int]:
        """Fingerprint and candidate set reached for the independent set I."""
        S, A = 0, self.full
        while not self.stop(S, A):
            v = self.pick(S, A)
            if v & I:
                S, A = self.add(S, A, v)
            else:
                A &= ~v
        return S, A

    def leaves(self) -> dict[int, int]:
        """Every reachable fingerprint with its candidate set."""
        out: dict[int, int] = {}
        stack = [(0, self.full)]
        while stack:
            S, A = stack.pop()
            if self.stop(S, A):
                out[S] = A
                continue
            v = self.pick(S, A)
            stack.append((S, A & ~v))
            stack.append(self.add(S, A, v))
        return out


@dataclass
class SingleFamily:
    base: KHypergraph
    params: ContainerParams
    fingerprints: list[int]  # masks, sorted
    container: dict[int, int]  # fingerprint mask -> container mask
    over_dense: list[int] = field(default_factory=list)
    _scheme: _Scheme | None = field(default=None, repr=False, compare=False)

    @property
    def certified(self) -> bool:
        return not self.over_dense

    def assign(self, I: int) -> int:
        return self._scheme.replay(I)[0]

    def container_of(self, S: int) -> int:
        return self.container[S]


def build_single(base: KHypergraph, params: ContainerParams) -> "ContainerFamily":
    """Container family for the independent sets of ``base`` (r = 1)."""
    return ContainerFamily((_build_single(base, params),))


def _build_single(base: KHypergraph, params: ContainerParams) -> SingleFamily:
    if base.n == 0:
        raise ValueError("base hypergraph needs a nonempty vertex set")
    scheme = _Scheme(base, params)
    leaves = scheme.leaves()
    fps = sorted(leaves, key=lambda m: (_popcount(m), m))
    cont = {S: S | A for S, A in leaves.items()}
    dense = [S for S in fps if scheme.dense(cont[S])]
    return SingleFamily(base, params, fps, cont, dense, scheme)


@dataclass
class ContainerFamily:
    """Per-coordinate families; the tuple family is their disjoint product."""

    coordinates: tuple[SingleFamily, ...]

    @property
    def r(self) -> int:
        return len(self.coordinates)

    @property
    def base(self) -> KHypergraph:
        return self.coordinates[0].base

    @property
    def certified(self) -> bool:
        return all(c.certified for c in self.coordinates)

    def uncertified_witness(self) -> tuple[int, frozenset[int]] | None:
        """(coordinate, independent set) whose container is over-dense."""
        for i, c in enumerate(self.coordinates):
            if c.over_dense:
                return i + 1, _mask_to_set(c.over_dense[0])
        return None

    def fingerprints(self) -> Iterator[tuple[int, ...]]:
        """All fingerprint tuples with pairwise-disjoint coordinates."""

        def go(i, used, acc):
            if i == self.r:
                yield tuple(acc)
                return
            for S in self.coordinates[i].fingerprints:
                if S & used == 0:
                    acc.append(S)
                    yield from go(i + 1, used | S, acc)
                    acc.pop()

        yield from go(0, 0, [])

    def count_fingerprints(self) -> int:
        return sum(1 for _ in self.fingerprints())

    def container_of(self, S: Sequence[int]) -> tuple[int, ...]:
        return tuple(c.container_of(s) for c, s in zip(self.coordinates, S))

    def assign(self, I: Sequence[int]) -> tuple[int, ...]:
        return tuple(c.assign(x) for c, x in zip(self.coordinates, I))

    @property
    def fingerprint_budget(self) -> int:
        """Bound on the total size sum_i |S_i| of a fingerprint tuple."""
        return sum(c.params.fingerprint_budget for c in self.coordinates)

    @property
    def step_limit(self) -> int:
        """As ``fingerprint_budget`` but including refinement steps."""
        return sum(c.params.fingerprint_budget + c.params.refinement_depth for c in self.coordinates)

    def max_fingerprint_size(self) -> int:
        return max(sum(_popcount(s) for s in S) for S in self.fingerprints())

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "certified": self.certified,
            "coordinates": [
                {
                    "base": {"k": c.base.k, "n": c.base.n, "edges": [list(e) for e in c.base.edges]},
                    "params": {
                        "fingerprint_budget": c.params.fingerprint_budget,
                        "density_ceiling": f"{Fraction(c.params.density_ceiling).numerator}/"
                                           f"{Fraction(c.params.density_ceiling).denominator}",
                        "refinement_depth": c.params.refinement_depth,
                    },
                    "fingerprints": [sorted(_mask_to_set(S)) for S in c.fingerprints],
                    "containers": [sorted(_mask_to_set(c.container[S])) for S in c.fingerprints],
                    "over_dense": [sorted(_mask_to_set(S)) for S in c.over_dense],
                }
                for c in self.coordinates
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ContainerFamily":
        coords = []
        for c in data["coordinates"]:
            b = c["base"]
            base = KHypergraph(b["k"], b["n"], tuple(tuple(e) for e in b["edges"]))
            p = c["params"]
            params = ContainerParams(p["fingerprint_budget"], Fraction(p["density_ceiling"]),
                                     refinement_depth=p.get("refinement_depth", 0))
            fps = [_set_to_mask(s) for s in c["fingerprints"]]
            cont = {S: _set_to_mask(C) for S, C in zip(fps, c["containers"])}
            dense = [_set_to_mask(s) for s in c["over_dense"]]
            coords.append(SingleFamily(base, params, fps, cont, dense, _Scheme(base, params)))
        return cls(tuple(coords))


def lift_tuple(bases: Sequence[KHypergraph], params: ContainerParams | Sequence[ContainerParams]) -> ContainerFamily:
    """Tuple family over bases sharing one vertex set: the product of the
    single families, restricted to fingerprint tuples with disjoint coordinates."""
    bases = list(bases)
    if not bases:
        raise ValueError("need at least one base")
    if any(b.n != bases[0].n for b in bases):
        raise ValueError("all bases must share one vertex set")
    if isinstance(params, ContainerParams):
        params = [params] * len(bases)
    cache: dict = {}
    coords = []
    for b, p in zip(bases, params):
        key = (b, p)
        if key not in cache:
            cache[key] = _build_single(b, p)
        coords.append(cache[key])
    return ContainerFamily(tuple(coords))


# ---------------------------------------------------------------------------
# method hypergraphs


def solution_hypergraph(A: LinearSystem, n: int) -> KHypergraph:
    """k-uniform hypergraph on [n] whose edges are the value sets of the
    solutions of Ax = 0 with distinct coordinates."""
    edges = sorted({tuple(sorted(s.values)) for s in enumerate_solutions(A, range(1, n + 1), "distinct",
                                                                        check_bounds=False)})
    return KHypergraph(A.k, n, tuple(edges))


def independent_tuples(bases: Sequence[KHypergraph]) -> Iterator[tuple[int, ...]]:
    """Every r-tuple of pairwise-disjoint independent sets (as vertex masks)."""
    r = len(bases)
    N = bases[0].n
    by_vertex: list[list[list[int]]] = []
    for b in bases:
        lists: list[list[int]] = [[] for _ in range(N)]
        for e in b.edges:
            mask = _set_to_mask(e)
            top = max(e) - 1
            lists[top].append(mask)
        by_vertex.append(lists)
    cur = [0] * r

    def go(v):
        if v == N:
            yield tuple(cur)
            return
        yield from go(v + 1)
        bit = 1 << v
        for c in range(r):
            cm = cur[c] | bit
            if all(mask & cm != mask for mask in by_vertex[c][v]):
                cur[c] = cm
                yield from go(v + 1)
                cur[c] ^= bit

    yield from go(0)


# ---------------------------------------------------------------------------
# verification


class ContainerClauseViolation(AssertionError):
    def __init__(self, clause: str, detail: str):
        super().__init__(f"clause {clause} violated: {detail}")
        self.clause = clause


@dataclass
class CaptureStats:
    tuples: int = 0
    failures: list = field(default_factory=list)


def _check_capture(family: ContainerFamily, bases: Sequence[KHypergraph]) -> CaptureStats:
    stats = CaptureStats()
    memo: list[dict[int, int]] = [dict() for _ in range(family.r)]
    fps = [set(c.fingerprints) for c in family.coordinates]
    for I in independent_tuples(bases):
        stats.tuples += 1
        S = []
        ok = True
        for i, x in enumerate(I):
            s = memo[i].get(x)
            if s is None:
                s = family.coordinates[i].assign(x)
                memo[i][x] = s
            if s not in fps[i] or s & ~x or x & ~family.coordinates[i].container[s]:
                ok = False
            S.append(s)
        used = 0
        for s in S:
            if s & used:
                ok = False
            used |= s
        if not ok and len(stats.failures) < 10:
            stats.failures.append(tuple(sorted(_mask_to_set(x)) for x in I))
    return stats


def _max_union(family: ContainerFamily) -> int:
    best = 0
    for S in family.fingerprints():
        u = 0
        for c, s in zip(family.coordinates, S):
            u |= c.container[s]
        best = max(best, _popcount(u))
    return best


def _check_independent_fingerprints(family: ContainerFamily) -> bool:
    for c in family.coordinates:
        edges = [_set_to_mask(e) for e in c.base.edges]
        for S in c.fingerprints:
            if any(e & S == e for e in edges):
                return False
    return True


def _cardinality_ok(family: ContainerFamily) -> bool:
    v = family.base.n
    per = 1
    for c in family.coordinates:
        per *= sum(math.comb(v, s) for s in range(c.params.fingerprint_budget + c.params.refinement_depth + 1))
    return family.count_fingerprints() <= per


@dataclass
class ContainerReport:
    clauses: dict[str, bool]
    capture_tuples: int
    capture_failures: list
    fitted_D: float
    max_fingerprint: int
    fingerprint_budget_ok: bool
    reference_value: int  # exact mu or ex^r
    union_bound: float
    max_union: int
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.clauses.values())

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "clauses": self.clauses,
            "capture_tuples": self.capture_tuples,
            "capture_failures": self.capture_failures,
            "fitted_D": self.fitted_D,
            "max_fingerprint": self.max_fingerprint,
            "fingerprint_budget_ok": self.fingerprint_budget_ok,
            "reference_value": self.reference_value,
            "union_bound": self.union_bound,
            "max_union": self.max_union,
            "details": self.details,
        }


def _raise_first(report: ContainerReport) -> None:
    for name, ok in report.clauses.items():
        if not ok:
            raise ContainerClauseViolation(name, str(report.to_json()))


def verify_matcontainer(systems: Sequence[LinearSystem], n: int, delta, family: ContainerFamily,
                        strict: bool = True) -> ContainerReport:
    """Check the container conclusions for (L_1,...,L_r)-free tuples of subsets of [n]."""
    delta = Fraction(delta)
    systems = list(systems)
    if len(systems) != family.r:
        raise ValueError("one system per coordinate required")
    bases = [solution_hypergraph(A, n) for A in systems]
    for b, c in zip(bases, family.coordinates):
        if b != c.base:
            raise ValueError("family was not built on the solution hypergraphs of these systems")
    cap = _check_capture(family, bases)
    maxfp = family.max_fingerprint_size()
    m1 = m_A(systems[0]).value
    scale = n ** float((m1 - 1) / m1)
    budget = family.fingerprint_budget
    # (iv)(a): ordered distinct solutions inside each coordinate container
    sol_ok = True
    worst_sol = 0
    for A, c in zip(systems, family.coordinates):
        cap_i = delta * n ** (A.k - A.l)
        for S in c.fingerprints:
            cnt = len(enumerate_solutions(A, sorted(_mask_to_set(c.container[S])), "distinct",
                                          check_bounds=False))
            worst_sol = max(worst_sol, cnt)
            if cnt > cap_i:
                sol_ok = False
    mu_val = mu(n, systems, mode=SolutionMode.DISTINCT, budget=None).value
    bound = mu_val + delta * n
    max_union = _max_union(family)
    report = ContainerReport(
        clauses={
            "i": not cap.failures,
            "ii": maxfp <= family.step_limit,
            "iii": _check_independent_fingerprints(family),
            "iv_a": sol_ok,
            "iv_b": max_union <= bound,
            "cardinality": _cardinality_ok(family),
            "certified": family.certified,
        },
        capture_tuples=cap.tuples,
        capture_failures=cap.failures,
        fitted_D=maxfp / scale,
        max_fingerprint=maxfp,
        fingerprint_budget_ok=maxfp <= budget,
        reference_value=mu_val,
        union_bound=float(bound),
        max_union=max_union,
        details={"max_solutions_in_container": worst_sol, "union_bound_vacuous": n <= bound},
    )
    if strict:
        _raise_first(report)
    return report


def copies_bases(patterns: Sequence[KHypergraph], n: int) -> list[KHypergraph]:
    hs = [build_copies_hypergraph(H, n) for H in patterns]
    labels = hs[0].labels
    if any(h.labels != labels for h in hs):
        raise ValueError("copies hypergraphs disagree on their vertex labelling")
    return [h.hypergraph for h in hs]


def verify_ramseycont(patterns: Sequence[KHypergraph], n: int, delta, family: ContainerFamily,
                      strict: bool = True, budget: int | None = 5_000_000) -> ContainerReport:
    """Check the container conclusions for tuples of edge-disjoint H_i-free graphs on [n]."""
    delta = Fraction(delta)
    patterns = [H.strip_isolated() for H in patterns]
    if len(patterns) != family.r:
        raise ValueError("one pattern per coordinate required")
    chs = [build_copies_hypergraph(H, n) for H in patterns]
    bases = [c.hypergraph for c in chs]
    for b, c in zip(bases, family.coordinates):
        if b != c.base:
            raise ValueError("family was not built on the copies hypergraphs of these patterns")
    labels = chs[0].labels
    k = patterns[0].k
    cap = _check_capture(family, bases)
    maxfp = family.max_fingerprint_size()
    m1 = m_k(patterns[0]).m_k
    scale = n ** float(k - 1 / m1)
    fp_budget = family.fingerprint_budget

    # (iv)(a) via the colouring "least i with e in f(S_i)": its colour-i copies
    # of H_i lie inside f(S_i), so a per-container count below the threshold
    # certifies every tuple at once.
    limits = [delta * math.comb(n, H.n) for H in patterns]
    per_container_ok = True
    worst = Fraction(0)
    for H, c, lim in zip(patterns, family.coordinates, limits):
        edges = [_set_to_mask(e) for e in c.base.edges]
        for S in c.fingerprints:
            C = c.container[S]
            cnt = sum(1 for e in edges if e & C == e)
            worst = max(worst, Fraction(cnt, math.comb(n, H.n)))
            if cnt >= lim:
                per_container_ok = False
    weak_ok = True
    exact_checks = 0
    if not per_container_ok:
        for S in family.fingerprints():
            conts = family.container_of(S)
            colours: dict = {}
            for i, C in enumerate(conts):
                for v in _mask_to_set(C):
                    colours.setdefault(labels[v - 1], i + 1)
            union = KHypergraph(k, n, tuple(sorted(colours)))
            res = eps_weak_ramsey(union, patterns, delta, budget=budget)
            exact_checks += 1
            if res.status != "weak":
                weak_ok = False
                break
    ex_val = ex_r(n, patterns, k=k, budget=budget).ex_value
    total = math.comb(n, k)
    bound = ex_val + delta * total
    max_union = _max_union(family)
    report = ContainerReport(
        clauses={
            "i": not cap.failures,
            "ii": maxfp <= family.step_limit,
            "iii": _check_independent_fingerprints(family),
            "iv_a": weak_ok,
            "iv_b": max_union <= bound,
            "cardinality": _cardinality_ok(family),
            "certified": family.certified,
        },
        capture_tuples=cap.tuples,
        capture_failures=cap.failures,
        fitted_D=maxfp / scale,
        max_fingerprint=maxfp,
        fingerprint_budget_ok=maxfp <= fp_budget,
        reference_value=ex_val,
        union_bound=float(bound),
        max_union=max_union,
        details={"max_copy_ratio_in_container": float(worst), "exact_weak_checks": exact_checks,
                 "union_bound_vacuous": total <= bound},
    )
    if strict:
        _raise_first(report)
    return report
