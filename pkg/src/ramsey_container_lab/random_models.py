"""Seeded binomial random models G^(k)(n, p) and [n]_p, Monte Carlo estimates,
threshold scans, resilience distributions and Chernoff reference bounds.

Every trial draws from its own Philox stream keyed by (seed, trial index), so
trials can run in any order or process and still reproduce exactly. A Bernoulli
decision with rational p compares a uniform 64-bit integer u with
ceil(p * 2^64), i.e. P[u < t] = t / 2^64, exact whenever p is dyadic.
"""

from __future__ import annotations

import itertools
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from .budget import DEFAULT_NODE_BUDGET, Verdict
from .hypergraph import KHypergraph
from .rado import LinearSystem, SolutionMode, is_free, max_free_subset, mu
from .ramsey import ex_r, is_ramsey, resilience_exact

MODELS = ("gnp_k", "np_set")


def resolve_p(n: int, p=None, C=None, m=None) -> Fraction:
    """Either an explicit p, or p = min(1, C * n^(-1/m)) as an exact binary fraction."""
    if p is not None:
        p = Fraction(p)
    else:
        if C is None or m is None:
            raise ValueError("give p, or both C and the density m")
        p = min(Fraction(1), Fraction(float(Fraction(C)) * n ** (-1.0 / float(Fraction(m)))))
    if not 0 <= p <= 1:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return p


@dataclass(frozen=True)
class RandomModelConfig:
    model: str
    n: int
    p: Fraction
    seed: int
    trials: int = 1
    k: int = 2
    budget: int | None = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.n < 0 or self.trials < 0:
            raise ValueError("n and trials must be non-negative")
        p = Fraction(self.p)
        if not 0 <= p <= 1:
            raise ValueError(f"p must lie in [0, 1], got {p}")
        object.__setattr__(self, "p", p)
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def with_p(self, p) -> "RandomModelConfig":
        return RandomModelConfig(self.model, self.n, Fraction(p), self.seed, self.trials, self.k, self.budget)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def _bernoulli_mask(rng: np.random.Generator, count: int, p: Fraction) -> np.ndarray:
    if count == 0:
        return np.zeros(0, dtype=bool)
    u = rng.integers(0, 2 ** 64, size=count, dtype=np.uint64, endpoint=False)
    if p == 0:
        return np.zeros(count, dtype=bool)
    if p == 1:
        return np.ones(count, dtype=bool)
    threshold = -((-p.numerator << 64) // p.denominator)  # ceil(p * 2^64) < 2^64
    return u < np.uint64(threshold)


def sample(config: RandomModelConfig, trial: int):
    """G^(k)(n, p) as a KHypergraph, or [n]_p as a sorted tuple."""
    rng = trial_rng(config.seed, trial)
    if config.model == "gnp_k":
        slots = list(itertools.combinations(range(1, config.n + 1), config.k))
        keep = _bernoulli_mask(rng, len(slots), config.p)
        return KHypergraph(config.k, config.n, tuple(e for e, b in zip(slots, keep) if b))
    keep = _bernoulli_mask(rng, config.n, config.p)
    return tuple(i + 1 for i in range(config.n) if keep[i])


def sample_size(s) -> int:
    return s.e if isinstance(s, KHypergraph) else len(s)


# ---------------------------------------------------------------------------
# properties


@dataclass(frozen=True)
class RamseyProperty:
    patterns: tuple[KHypergraph, ...]

    model = "gnp_k"

    def holds(self, G: KHypergraph, budget) -> Verdict:
        return is_ramsey(G, list(self.patterns), budget=budget).status

    def resilience(self, G: KHypergraph, budget) -> tuple[int | None, tuple[int, int]]:
        res = resilience_exact(G, list(self.patterns), budget=budget)
        return res.value, res.bracket

    def describe(self) -> dict:
        return {"kind": "ramsey", "patterns": [[list(e) for e in H.edges] for H in self.patterns]}


@dataclass(frozen=True)
class RadoProperty:
    systems: tuple[LinearSystem, ...]
    mode: SolutionMode = SolutionMode.DISTINCT

    model = "np_set"

    def holds(self, S: Sequence[int], budget) -> Verdict:
        res = is_free(S, list(self.systems), mode=self.mode, budget=budget)
        if res.status is Verdict.UNKNOWN:
            return Verdict.UNKNOWN
        return Verdict.FALSE if res.status is Verdict.TRUE else Verdict.TRUE

    def resilience(self, S: Sequence[int], budget) -> tuple[int | None, tuple[int, int]]:
        if not S:
            return 0, (0, 0)
        res = max_free_subset(S, list(self.systems), mode=self.mode, budget=budget)
        lo_keep, hi_keep = res.bracket
        if res.value is None:
            return None, (len(S) - hi_keep, len(S) - lo_keep)
        return len(S) - res.value, (len(S) - res.value, len(S) - res.value)

    def describe(self) -> dict:
        return {"kind": "rado", "systems": [[list(r) for r in A.rows] for A in self.systems],
                "mode": self.mode.value}


def ramsey_property(patterns: Sequence[KHypergraph]) -> RamseyProperty:
    return RamseyProperty(tuple(patterns))


def rado_property(systems, r: int = 1, mode="distinct") -> RadoProperty:
    if isinstance(systems, LinearSystem):
        systems = [systems] * r
    return RadoProperty(tuple(systems), SolutionMode.parse(mode))


# ---------------------------------------------------------------------------
# trials


@dataclass
class TrialRecord:
    seed: int
    trial: int
    size: int
    verdict: str | None = None
    resilience: int | None = None
    bracket: tuple[int, int] | None = None
    normalized: float | None = None
    in_window: bool | None = None
    wall_time: float = 0.0

    def to_json(self, mask_timing: bool = False) -> dict:
        d = asdict(self)
        if d["bracket"] is not None:
            d["bracket"] = list(d["bracket"])
        if mask_timing:
            d.pop("wall_time")
        return d


def _check_model(config: RandomModelConfig, prop) -> None:
    if config.model != prop.model:
        raise ValueError(f"property needs model {prop.model}, config has {config.model}")


def _window(config: RandomModelConfig, size: int, delta: Fraction) -> bool:
    slots = math.comb(config.n, config.k) if config.model == "gnp_k" else config.n
    mean = config.p * slots
    return (1 - delta / 4) * mean <= size <= (1 + delta / 4) * mean


def _verdict_trial(args) -> TrialRecord:
    config, prop, t = args
    start = time.perf_counter()
    s = sample(config, t)
    v = prop.holds(s, config.budget)
    return TrialRecord(config.seed, t, sample_size(s), verdict=v.value,
                       wall_time=time.perf_counter() - start)


def _resilience_trial(args) -> TrialRecord:
    config, prop, t, delta = args
    start = time.perf_counter()
    s = sample(config, t)
    size = sample_size(s)
    val, bracket = prop.resilience(s, config.budget)
    norm = None
    if val is not None:
        # an empty sample has nothing to delete; report 0 rather than 0/0
        norm = val / size if size else 0.0
    return TrialRecord(config.seed, t, size, resilience=val, bracket=bracket, normalized=norm,
                       in_window=_window(config, size, delta), wall_time=time.perf_counter() - start)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("RCL_WORKERS", "1")))
    except ValueError:
        return 1


def _map(fn, tasks: list, workers: int | None) -> list:
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


@dataclass
class MCEstimate:
    estimate: float
    ci: tuple[float, float]
    true_count: int
    false_count: int
    unknown_count: int
    p: Fraction
    records: list[TrialRecord] = field(default_factory=list)

    def to_json(self, mask_timing: bool = False) -> dict:
        return {
            "p": f"{self.p.numerator}/{self.p.denominator}",
            "estimate": self.estimate,
            "ci": list(self.ci),
            "counts": {"true": self.true_count, "false": self.false_count, "unknown": self.unknown_count},
            "records": [r.to_json(mask_timing) for r in self.records],
        }


class EstimationError(RuntimeError):
    pass


def mc_probability(config: RandomModelConfig, prop, workers: int | None = None,
                   confidence: float = 0.95) -> MCEstimate:
    """Fraction of trials with the property; UNKNOWN trials are counted apart."""
    _check_model(config, prop)
    records = _map(_verdict_trial, [(config, prop, t) for t in range(config.trials)], workers)
    records.sort(key=lambda r: r.trial)
    tc = sum(r.verdict == Verdict.TRUE.value for r in records)
    fc = sum(r.verdict == Verdict.FALSE.value for r in records)
    uc = len(records) - tc - fc
    decided = tc + fc
    if decided == 0:
        raise EstimationError("no trial produced a decided verdict")
    ci = binomtest(tc, decided).proportion_ci(confidence_level=confidence, method="wilson")
    return MCEstimate(tc / decided, (float(ci.low), float(ci.high)), tc, fc, uc, config.p, records)


@dataclass
class ResilienceSummary:
    mean: float | None
    std: float | None
    values: list[float]
    predicted_center: float | None
    bracket_trials: int
    out_of_window: int
    records: list[TrialRecord]

    def to_json(self, mask_timing: bool = False) -> dict:
        return {
            "mean": self.mean,
            "std": self.std,
            "values": self.values,
            "predicted_center": self.predicted_center,
            "bracket_trials": self.bracket_trials,
            "out_of_window": self.out_of_window,
            "records": [r.to_json(mask_timing) for r in self.records],
        }


def predicted_resilience_center(config: RandomModelConfig, prop, budget: int | None = None) -> float:
    """1 - mu(n)/n for integer properties, 1 - ex^r(n)/C(n,k) for graph ones (finite-n proxies)."""
    if isinstance(prop, RadoProperty):
        return 1 - mu(config.n, list(prop.systems), mode=prop.mode, budget=budget).value / config.n
    rec = ex_r(config.n, list(prop.patterns), k=config.k, budget=budget)
    return 1 - rec.ex_value / math.comb(config.n, config.k)


def resilience_mc(config: RandomModelConfig, prop, workers: int | None = None,
                  delta: Fraction = Fraction(1, 2), predict: bool = False) -> ResilienceSummary:
    """Distribution of res/|sample| over the trials.

    Trials whose exact search ran out of budget keep only a bracket and are
    left out of the mean; samples outside (1 +- delta/4) of the expected size
    are counted in ``out_of_window`` but kept.
    """
    _check_model(config, prop)
    records = _map(_resilience_trial, [(config, prop, t, delta) for t in range(config.trials)], workers)
    records.sort(key=lambda r: r.trial)
    values = [r.normalized for r in records if r.normalized is not None]
    mean = float(np.mean(values)) if values else None
    std = float(np.std(values)) if values else None
    center = predicted_resilience_center(config, prop) if predict else None
    return ResilienceSummary(mean, std, values, center,
                             sum(r.resilience is None for r in records),
                             sum(not r.in_window for r in records), records)


@dataclass
class ScanRow:
    p: Fraction
    C: float | None
    estimate: MCEstimate


@dataclass
class ScanTable:
    rows: list[ScanRow]
    m: Fraction | None
    crossing_p: float | None
    crossing_C: float | None
    ci_monotone: bool
    inversions: list[tuple[int, int]]

    def to_json(self, mask_timing: bool = False) -> dict:
        return {
            "m": None if self.m is None else f"{self.m.numerator}/{self.m.denominator}",
            "crossing_p": self.crossing_p,
            "crossing_C": self.crossing_C,
            "ci_monotone": self.ci_monotone,
            "inversions": [list(x) for x in self.inversions],
            "rows": [{"C": r.C, **r.estimate.to_json(mask_timing)} for r in self.rows],
        }

    def to_csv(self) -> str:
        lines = ["p,C,estimate,ci_low,ci_high,true,false,unknown"]
        for r in self.rows:
            e = r.estimate
            lines.append(f"{float(r.p)},{'' if r.C is None else r.C},{e.estimate},{e.ci[0]},{e.ci[1]},"
                         f"{e.true_count},{e.false_count},{e.unknown_count}")
        return "\n".join(lines) + "\n"


def threshold_scan(config: RandomModelConfig, prop, p_grid: Sequence | None = None,
                   C_grid: Sequence | None = None, m: Fraction | None = None,
                   workers: int | None = None) -> ScanTable:
    """mc_probability along a grid of p (or of C with p = C n^(-1/m))."""
    if (p_grid is None) == (C_grid is None):
        raise ValueError("give exactly one of p_grid and C_grid")
    n = config.n
    if C_grid is not None:
        if m is None:
            raise ValueError("a C grid needs the density m")
        ps = [resolve_p(n, C=C, m=m) for C in C_grid]
    else:
        ps = [Fraction(p) for p in p_grid]
    rows = []
    for p in ps:
        est = mc_probability(config.with_p(p), prop, workers)
        C = None if m is None else float(p) * n ** (1.0 / float(m))
        rows.append(ScanRow(p, C, est))
    inversions = [(i, j) for i in range(len(rows)) for j in range(i + 1, len(rows))
                  if rows[j].p >= rows[i].p and rows[j].estimate.ci[1] < rows[i].estimate.ci[0]]
    cross_p = None
    for a, b in zip(rows, rows[1:]):
        ea, eb = a.estimate.estimate, b.estimate.estimate
        if ea < 0.5 <= eb:
            frac = (0.5 - ea) / (eb - ea)
            cross_p = float(a.p) + frac * (float(b.p) - float(a.p))
            break
    if cross_p is None and rows and rows[0].estimate.estimate >= 0.5:
        cross_p = float(rows[0].p)
    cross_C = None if (cross_p is None or m is None) else cross_p * n ** (1.0 / float(m))
    return ScanTable(rows, m, cross_p, cross_C, not inversions, inversions)


# ---------------------------------------------------------------------------
# reference bounds (floating point: reporting only)


def chernoff_bound(E, lam) -> float:
    """P[X > E + lam] <= exp(-lam^2 / (2 (E + lam/3)))."""
    E, lam = float(E), float(lam)
    if lam < 0 or E < 0:
        raise ValueError("need E >= 0 and lambda >= 0")
    if lam == 0:
        return 1.0
    return math.exp(-lam * lam / (2 * (E + lam / 3)))


def chernoff_two_sided(E, eps) -> float:
    """P[|X - E| > eps E] <= 2 exp(-eps^2 E / 3) for 0 < eps <= 3/2."""
    E, eps = float(E), float(eps)
    if not 0 < eps <= 1.5:
        raise ValueError("eps must lie in (0, 3/2]")
    if E < 0:
        raise ValueError("E must be non-negative")
    return 2 * math.exp(-eps * eps * E / 3)
