"""Integer linear systems Ax = 0: exact elimination, matrix properties, solution
enumeration, (L_1,...,L_r)-free sets and the sum-free toolkit."""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .budget import Budget, BudgetExhausted, DEFAULT_NODE_BUDGET, SizeError, Verdict
from .search import OUT, ColouringEngine


class SolutionMode(str, enum.Enum):
    DISTINCT = "distinct"  # only solutions with pairwise distinct coordinates
    STRONG = "strong"  # every solution, repeated coordinates included

    @classmethod
    def parse(cls, value) -> "SolutionMode":
        if isinstance(value, cls):
            return value
        aliases = {"distinct": cls.DISTINCT, "k-distinct": cls.DISTINCT, "strong": cls.STRONG, "all": cls.STRONG}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown solution mode {value!r}") from None


class PreconditionError(ValueError):
    pass


class RedundantMatrixError(PreconditionError):
    pass


def _rref(rows: Sequence[Sequence[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; pivot = first nonzero column, smallest row index."""
    M = [list(r) for r in rows]
    pivots: list[int] = []
    top = 0
    for col in range(ncols):
        piv = next((i for i in range(top, len(M)) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[top], M[piv] = M[piv], M[top]
        lead = M[top][col]
        M[top] = [x / lead for x in M[top]]
        for i in range(len(M)):
            if i != top and M[i][col] != 0:
                fac = M[i][col]
                M[i] = [a - fac * b for a, b in zip(M[i], M[top])]
        pivots.append(col)
        top += 1
        if top == len(M):
            break
    return M[:top], pivots


def _rank_of_columns(rows: Sequence[Sequence[int]], cols: Iterable[int]) -> int:
    cols = list(cols)
    if not cols or not rows:
        return 0
    sub = [[Fraction(r[c]) for c in cols] for r in rows]
    return len(_rref(sub, len(cols))[1])


@dataclass(frozen=True)
class LinearSystem:
    """An l x k integer matrix A standing for the system Ax = 0."""

    rows: tuple[tuple[int, ...], ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        if not rows or not rows[0]:
            raise ValueError("matrix must have at least one row and one column")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("all rows must have the same length")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def of(cls, *rows: Sequence[int]) -> "LinearSystem":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def l(self) -> int:
        return len(self.rows)

    @property
    def k(self) -> int:
        return len(self.rows[0])

    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(r[j] for r in self.rows) for j in range(self.k)]

    def echelon(self) -> tuple[list[list[Fraction]], list[int]]:
        if "rref" not in self._cache:
            self._cache["rref"] = _rref([[Fraction(x) for x in r] for r in self.rows], self.k)
        return self._cache["rref"]

    @property
    def rank(self) -> int:
        return len(self.echelon()[1])

    def rank_without(self, W: Iterable[int]) -> int:
        """rank of A restricted to the columns outside W (0-based)."""
        W = set(W)
        return _rank_of_columns(self.rows, [j for j in range(self.k) if j not in W])

    def evaluate(self, x: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(r, x)) for r in self.rows)

    def to_text(self) -> str:
        lines = [f"{self.l} {self.k}"] + [" ".join(str(v) for v in r) for r in self.rows]
        return "\n".join(lines) + "\n"


SCHUR = LinearSystem.of((1, 1, -1))


def rank_and_echelon(A: LinearSystem) -> tuple[int, list[list[Fraction]]]:
    M, piv = A.echelon()
    return len(piv), [list(r) for r in M]


def satisfies_star(A: LinearSystem) -> bool:
    """No row of the reduced echelon form has exactly two nonzero entries."""
    M, _ = A.echelon()
    return all(sum(1 for x in row if x != 0) != 2 for row in M)


@dataclass(frozen=True)
class ColumnsWitness:
    holds: bool
    partition: tuple[tuple[int, ...], ...] | None  # 1-based column blocks D_1, ..., D_t
    states_explored: int


def columns_property(A: LinearSystem, max_k: int = 14) -> ColumnsWitness:
    """Search for an ordered column partition with D_1 summing to zero and each
    later block-sum in the span of the earlier columns."""
    k = A.k
    if k > max_k:
        raise SizeError(f"columns-property search limited to k <= {max_k}, got {k}")
    cols = A.columns()
    full = (1 << k) - 1

    def block_sum(mask):
        return tuple(sum(cols[j][i] for j in range(k) if mask >> j & 1) for i in range(A.l))

    @functools.lru_cache(maxsize=None)
    def span_rank(mask):
        return _rank_of_columns(A.rows, [j for j in range(k) if mask >> j & 1])

    def in_span(vec, mask):
        if all(v == 0 for v in vec):
            return True
        rows = [list(r) + [vec[i]] for i, r in enumerate(A.rows)]
        return _rank_of_columns(rows, [j for j in range(k) if mask >> j & 1] + [k]) == span_rank(mask)

    failed: set[int] = set()
    explored = [0]

    def extend(used):
        if used == full:
            return []
        if used in failed:
            return None
        explored[0] += 1
        rest = full & ~used
        sub = rest
        cands = []
        while sub:
            cands.append(sub)
            sub = (sub - 1) & rest
        for D in sorted(cands):
            if in_span(block_sum(D), used):
                tail = extend(used | D)
                if tail is not None:
                    return [D] + tail
        failed.add(used)
        return None

    for D1 in range(1, full + 1):
        if all(v == 0 for v in block_sum(D1)):
            tail = extend(D1)
            if tail is not None:
                blocks = tuple(tuple(j + 1 for j in range(k) if D >> j & 1) for D in [D1] + tail)
                return ColumnsWitness(True, blocks, explored[0])
    return ColumnsWitness(False, None, explored[0])


def is_partition_regular(A: LinearSystem) -> bool:
    return columns_property(A).holds


# ---------------------------------------------------------------------------
# solutions


@dataclass(frozen=True)
class SolutionTuple:
    values: tuple[int, ...]

    @property
    def distinct(self) -> bool:
        return len(set(self.values)) == len(self.values)


def _solve_setup(A: LinearSystem, fixed: dict[int, int]):
    """Echelon form of A on the unfixed columns with the fixed part moved right."""
    free_cols = [j for j in range(A.k) if j not in fixed]
    rows = []
    for r in A.rows:
        rhs = -sum(r[j] * v for j, v in fixed.items())
        rows.append([Fraction(r[j]) for j in free_cols] + [Fraction(rhs)])
    M, piv = _rref(rows, len(free_cols))
    # the rhs column becoming a pivot means some row reads 0 = nonzero
    consistent = len(free_cols) not in _rref(rows, len(free_cols) + 1)[1]
    return free_cols, M, piv, consistent


def enumerate_solutions(A: LinearSystem, S: Iterable[int], mode="distinct",
                        fixed: dict[int, int] | None = None, max_count: int | None = 10_000_000,
                        check_bounds: bool = True) -> list[SolutionTuple]:
    """All solutions of Ax = 0 with every coordinate in S.

    ``fixed`` maps 0-based coordinates to prescribed values. The number of
    candidates examined is |S|^(k - t - rank(A restricted to unfixed columns)),
    which is also the count bound asserted at the end.
    """
    mode = SolutionMode.parse(mode)
    S = sorted(set(S))
    fixed = dict(fixed or {})
    for j in fixed:
        if not 0 <= j < A.k:
            raise ValueError(f"fixed coordinate {j} out of range")
    Sset = set(S)
    if not S or any(v not in Sset for v in fixed.values()):
        return []
    free_cols, M, piv, consistent = _solve_setup(A, fixed)
    if not consistent:
        return []
    piv_cols = [free_cols[p] for p in piv]
    param_cols = [free_cols[i] for i in range(len(free_cols)) if i not in set(piv)]
    param_idx = [i for i in range(len(free_cols)) if i not in set(piv)]
    rank_rest = len(piv)
    bound = len(S) ** (len(free_cols) - rank_rest)
    if max_count is not None and bound > max_count:
        raise SizeError(f"solution enumeration would examine {bound} candidates")
    out: list[SolutionTuple] = []
    for vals in itertools.product(S, repeat=len(param_cols)):
        x = [0] * A.k
        for j, v in fixed.items():
            x[j] = v
        for c, v in zip(param_cols, vals):
            x[c] = v
        ok = True
        for row, pc in zip(M, piv_cols):
            val = row[-1] - sum(row[i] * x[free_cols[i]] for i in param_idx)
            if val.denominator != 1 or int(val) not in Sset:
                ok = False
                break
            x[pc] = int(val)
        if not ok:
            continue
        sol = SolutionTuple(tuple(x))
        if mode is SolutionMode.DISTINCT and not sol.distinct:
            continue
        out.append(sol)
    out.sort(key=lambda s: s.values)
    if check_bounds:
        assert len(out) <= len(S) ** (A.k - A.rank), "count exceeds |S|^(k - rank A)"
        t = len(fixed)
        assert len(out) <= len(S) ** (A.k - t - A.rank_without(fixed)), "count exceeds fixed-coordinate bound"
    return out


@dataclass(frozen=True)
class Irredundance:
    status: Verdict  # TRUE or UNKNOWN, never FALSE
    witness: tuple[int, ...] | None
    bound: int


def is_irredundant(A: LinearSystem, search_bound: int = 10) -> Irredundance:
    """Look for a solution with distinct coordinates in [search_bound].

    Searches [b]^k for b = 1, 2, ... and reports the lexicographically least
    distinct solution with the smallest possible maximum coordinate.
    """
    for b in range(A.k, search_bound + 1):
        sols = [s for s in enumerate_solutions(A, range(1, b + 1), "distinct", check_bounds=False)
                if max(s.values) == b]
        if sols:
            return Irredundance(Verdict.TRUE, sols[0].values, search_bound)
    return Irredundance(Verdict.UNKNOWN, None, search_bound)


@dataclass(frozen=True)
class MatrixDensity:
    value: Fraction
    witness: tuple[int, ...]  # 1-based W


def m_A(A: LinearSystem) -> MatrixDensity:
    """max over W of (|W|-1)/(|W|-1+rank(A restricted off W)-rank(A)), |W| >= 2."""
    rank = A.rank
    best: MatrixDensity | None = None
    for size in range(2, A.k + 1):
        for W in itertools.combinations(range(A.k), size):
            den = size - 1 + A.rank_without(W) - rank
            if den <= 0:
                raise PreconditionError(
                    f"nonpositive denominator {den} at W={tuple(j + 1 for j in W)}; "
                    "the matrix must be irredundant and satisfy (*)")
            val = Fraction(size - 1, den)
            if best is None or val > best.value:
                best = MatrixDensity(val, tuple(j + 1 for j in W))
    if best is None:
        raise PreconditionError("m(A) needs at least two columns")
    return best


@dataclass(frozen=True)
class ClauseReport:
    passed: bool
    failures: tuple[tuple[str, tuple[int, ...]], ...]
    m: Fraction
    irredundance_witness: tuple[int, ...]


def matmL_checks(A: LinearSystem, irredundance_witness: Sequence[int] | None = None,
                 search_bound: int = 12) -> ClauseReport:
    """Check the five structural facts for a full-rank irredundant (*) matrix."""
    if A.rank != A.l:
        raise PreconditionError("matrix must have full row rank")
    if not satisfies_star(A):
        raise PreconditionError("matrix fails (*): an echelon row has exactly two nonzero entries")
    if irredundance_witness is None:
        irr = is_irredundant(A, search_bound)
        if irr.status is not Verdict.TRUE:
            raise RedundantMatrixError(f"no distinct solution found in [{search_bound}]")
        irredundance_witness = irr.witness
    w = tuple(irredundance_witness)
    if any(A.evaluate(w)) or len(set(w)) != len(w) or min(w) < 1:
        raise PreconditionError(f"{w} is not a positive distinct solution")
    l, k = A.l, A.k
    mA = m_A(A).value
    fails: list[tuple[str, tuple[int, ...]]] = []
    for size in range(1, k + 1):
        for W in itertools.combinations(range(k), size):
            rw = A.rank_without(W)
            name = tuple(j + 1 for j in W)
            if size == 1 and rw != l:
                fails.append(("i", name))
            if size >= 2:
                if l - rw + 2 > size:
                    fails.append(("ii", name))
                if -size - rw > -l - 1 - Fraction(size - 1) / mA:
                    fails.append(("iii", name))
    if k < l + 2:
        fails.append(("iv", ()))
    if not mA > 1:
        fails.append(("v", ()))
    return ClauseReport(not fails, tuple(fails), mA, w)


# ---------------------------------------------------------------------------
# free sets


def solution_edges(A: LinearSystem, S: Iterable[int], mode="distinct") -> list[frozenset[int]]:
    """Value sets of the solutions in S, keeping only inclusion-minimal ones."""
    mode = SolutionMode.parse(mode)
    sets = {frozenset(s.values) for s in enumerate_solutions(A, S, mode, check_bounds=False)}
    ordered = sorted(sets, key=lambda e: (len(e), sorted(e)))
    minimal: list[frozenset[int]] = []
    for e in ordered:
        if not any(f <= e for f in minimal):
            minimal.append(e)
    return minimal


@dataclass(frozen=True)
class FreenessCertificate:
    ground: tuple[int, ...]
    r: int
    colouring: dict[int, int]  # element -> colour in 1..r
    mode: SolutionMode

    def classes(self) -> list[list[int]]:
        return [sorted(x for x, c in self.colouring.items() if c == i + 1) for i in range(self.r)]

    def recheck(self, systems: Sequence[LinearSystem]) -> bool:
        for A, cls in zip(systems, self.classes()):
            if cls and enumerate_solutions(A, cls, self.mode, check_bounds=False):
                return False
        return True

    def to_json(self) -> dict:
        return {"ground": list(self.ground), "r": self.r, "mode": self.mode.value,
                "classes": self.classes()}


def _systems(systems, r):
    if isinstance(systems, LinearSystem):
        systems = [systems]
    systems = list(systems)
    if r is not None:
        if len(systems) == 1:
            systems = systems * r
        elif len(systems) != r:
            raise ValueError(f"got {len(systems)} systems for r={r}")
    return systems


class _FreeSearch(ColouringEngine):
    """Colourings of a ground set; positions ordered by solution degree, descending."""

    def __init__(self, ground, systems, mode, allow_out, budget):
        ground = sorted(set(ground))
        edges_per = [solution_edges(A, ground, mode) for A in systems]
        deg = {x: 0 for x in ground}
        for edges in edges_per:
            for e in edges:
                for x in e:
                    deg[x] += 1
        self.order = sorted(ground, key=lambda x: (-deg[x], x))
        pos = {x: i for i, x in enumerate(self.order)}
        masks = [[sum(1 << pos[x] for x in e) for e in edges] for edges in edges_per]
        prev_same = [next((d for d in range(c - 1, -1, -1) if systems[d].rows == systems[c].rows), -1)
                     for c in range(len(systems))]
        super().__init__(len(ground), masks, prev_same, allow_out, budget)

    def certificate(self, assign, mode) -> FreenessCertificate:
        col = {self.order[i]: c + 1 for i, c in enumerate(assign) if c >= 0}
        return FreenessCertificate(tuple(sorted(col)), self.r, col, mode)


@dataclass(frozen=True)
class FreeResult:
    status: Verdict  # TRUE: free (certificate attached), FALSE: not free
    certificate: FreenessCertificate | None
    nodes: int


def is_free(S: Iterable[int], systems, r: int | None = None, mode="distinct",
            budget: int | None = DEFAULT_NODE_BUDGET) -> FreeResult:
    """Is there an r-colouring of S with no colour-i solution to system i?"""
    mode = SolutionMode.parse(mode)
    systems = _systems(systems, r)
    b = Budget(budget)
    search = _FreeSearch(S, systems, mode, allow_out=False, budget=b)
    try:
        res = search.find_free()
    except BudgetExhausted:
        return FreeResult(Verdict.UNKNOWN, None, b.nodes)
    if res is None:
        return FreeResult(Verdict.FALSE, None, b.nodes)
    return FreeResult(Verdict.TRUE, search.certificate(res, mode), b.nodes)


@dataclass(frozen=True)
class MuResult:
    value: int | None
    bracket: tuple[int, int]
    certificate: FreenessCertificate
    nodes: int


def mu(n: int, systems, r: int | None = None, mode="distinct",
       budget: int | None = DEFAULT_NODE_BUDGET) -> MuResult:
    """Size of the largest subset of [n] admitting a colouring free of colour-i
    solutions to system i, with such a colouring as certificate."""
    mode = SolutionMode.parse(mode)
    systems = _systems(systems, r)
    b = Budget(budget)
    search = _FreeSearch(range(1, n + 1), systems, mode, allow_out=True, budget=b)
    inc, inc_assign = search.greedy()
    try:
        best, assign = search.max_coloured(inc, inc_assign)
    except BudgetExhausted:
        cert = search.certificate(inc_assign, mode)
        return MuResult(None, (inc, n), cert, b.nodes)
    return MuResult(best, (best, best), search.certificate(assign, mode), b.nodes)


def max_free_subset(S: Iterable[int], systems, r: int | None = None, mode="distinct",
                    budget: int | None = DEFAULT_NODE_BUDGET) -> MuResult:
    """As mu but over an arbitrary finite ground set (used for resilience)."""
    mode = SolutionMode.parse(mode)
    systems = _systems(systems, r)
    b = Budget(budget)
    ground = sorted(set(S))
    search = _FreeSearch(ground, systems, mode, allow_out=True, budget=b)
    inc, inc_assign = search.greedy()
    try:
        best, assign = search.max_coloured(inc, inc_assign)
    except BudgetExhausted:
        return MuResult(None, (inc, len(ground)), search.certificate(inc_assign, mode), b.nodes)
    return MuResult(best, (best, best), search.certificate(assign, mode), b.nodes)


# ---------------------------------------------------------------------------
# sum-free toolkit


def ell_sequence(i: int) -> int:
    """l(0) = 1, l(i) = i*l(i-1) + 1, which equals floor(i! e)."""
    if i < 0:
        raise ValueError("i must be non-negative")
    v = 1
    for t in range(1, i + 1):
        v = t * v + 1
    return v


def floor_factorial_e(i: int) -> int:
    """floor(i! e) from the exact partial sum i! * sum_{t<=i} 1/t! (the tail is < 1)."""
    return int(sum(Fraction(math.factorial(i), math.factorial(t)) for t in range(i + 1)))


def hunew_bound(n: int, r: int) -> int:
    return n - n // ell_sequence(r)


def _colour_classes_ok(x: int, cls: list[int], modulus: int | None) -> bool:
    """May x join the sum-free class ``cls`` (whose elements are all < x)?"""
    members = set(cls)
    if modulus is None:
        return not any(x - y in members for y in cls)
    members.add(x)
    for y in members:
        if (x + y) % modulus in members or (x - y) % modulus in members or (y - x) % modulus in members:
            return False
    return True


def _partition_search(m_limit: int, r: int, modulus: int | None, budget: Budget,
                      stop_at: int | None = None) -> tuple[int, list[list[int]]]:
    """Colour 1, 2, ... in order into r sum-free classes; return the deepest
    prefix reached (capped at ``stop_at``) and its partition."""
    best = [0, [[] for _ in range(r)]]
    classes: list[list[int]] = [[] for _ in range(r)]
    target = stop_at if stop_at is not None else m_limit

    def go(x):
        budget.tick()
        if x - 1 > best[0]:
            best[0], best[1] = x - 1, [list(c) for c in classes]
            if best[0] >= target:
                return True
        if x > m_limit:
            return False
        opened = False
        for c in range(r):
            if not classes[c]:
                if opened:
                    continue
                opened = True
            if _colour_classes_ok(x, classes[c], modulus):
                classes[c].append(x)
                done = go(x + 1)
                classes[c].pop()
                if done:
                    return True
        return False

    go(1)
    return best[0], best[1]


@dataclass(frozen=True)
class SchurResult:
    value: int
    partition: tuple[tuple[int, ...], ...]
    nodes: int


def schur_f(r: int, budget: int | None = 50_000_000, cap: int = 200) -> SchurResult:
    """Largest m such that [m] splits into r sets with no x + y = z (x = y allowed)."""
    if r < 1:
        raise ValueError("r must be positive")
    b = Budget(budget)
    try:
        m, part = _partition_search(cap, r, None, b)
    except BudgetExhausted as exc:
        raise SizeError(f"schur_f({r}) exceeded its budget") from exc
    if m >= cap:
        raise SizeError(f"schur_f({r}) reached the search cap {cap}")
    return SchurResult(m, tuple(tuple(c) for c in part if c), b.nodes)


def _modular_partition(m: int, r: int, budget: Budget):
    depth, part = _partition_search(m, r, m + 1, budget, stop_at=m)
    return part if depth >= m else None


def schur_h(r: int, budget: int | None = 50_000_000) -> SchurResult:
    """Largest m such that [m] splits into r sets that are sum-free modulo m + 1."""
    f = schur_f(r, budget)
    b = Budget(budget)
    for m in range(f.value, 0, -1):
        try:
            part = _modular_partition(m, r, b)
        except BudgetExhausted as exc:
            raise SizeError(f"schur_h({r}) exceeded its budget") from exc
        if part is not None:
            return SchurResult(m, tuple(tuple(c) for c in part if c), b.nodes)
    raise AssertionError("h(r) >= 1 always")  # [1] is sum-free modulo 2


def is_sum_free(S: Iterable[int]) -> bool:
    S = set(S)
    return not any(x + y in S for x in S for y in S)


def is_sum_free_mod(S: Iterable[int], modulus: int) -> bool:
    S = {x % modulus for x in S}
    return not any((x + y) % modulus in S for x in S for y in S)


# e^{-gamma} rounded down to four places
EXP_NEG_GAMMA = Fraction(5615, 10000)


@dataclass(frozen=True)
class SumFreeBounds:
    lower: int
    abbott_wang_upper: int
    hunew_upper: int
    upper: int


def abbott_wang_bounds(n: int, r: int) -> SumFreeBounds:
    h = schur_h(r).value
    f = schur_f(r).value
    lower = n - n // (h + 1)
    aw = n - math.floor(float(EXP_NEG_GAMMA) * n / ((f + 1) * math.log(f + 1)))
    hu = hunew_bound(n, r)
    return SumFreeBounds(lower, aw, hu, min(aw, hu))


def difference_set_check(S: Iterable[int], T: Iterable[int], n: int | None = None) -> bool:
    """Is T a difference set of S, i.e. x + T within S for some x in S?"""
    S = set(S)
    T = set(T)
    if n is not None and not (S | T) <= set(range(1, n + 1)):
        raise ValueError(f"sets must lie in [1, {n}]")
    return any(all(x + t in S for t in T) for x in S)
