"""Small-n numerical probes of three open problems.  Nothing here is asserted.

free-count    number of 2-colourable Schur-free subsets of [n], divided by 2^{4n/5}
chromatic     ex^r(n; H,...,H) next to the Turan number t_{R_chi - 1}(n)
asymmetric    P[G(n,p) is (H1,H2)-Ramsey] at p = C n^{-1/m_2(H1,H2)}

    python scripts/conjecture_probes.py free-count --n 5 10 15   # n=15 takes about a minute
    python scripts/conjecture_probes.py chromatic --n 3 4 5 6 7
    python scripts/conjecture_probes.py asymmetric --n 10 12 --trials 30 --seed 2
"""
import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from ramsey_container_lab.budget import Verdict
from ramsey_container_lab.hypergraph import KHypergraph, asymmetric_m_k, frac_str
from ramsey_container_lab.rado import SCHUR, is_free
from ramsey_container_lab.ramsey import chromatic_ramsey_probe, ex_r, turan_number
from ramsey_container_lab.random_models import RandomModelConfig, ramsey_property, threshold_scan

NAMED = {
    "K3": KHypergraph.complete(3),
    "K4": KHypergraph.complete(4),
    "C4": KHypergraph.cycle(4),
    "C5": KHypergraph.cycle(5),
}


def _pattern(name: str) -> KHypergraph:
    if name in NAMED:
        return NAMED[name]
    if name == "2K3":  # two disjoint triangles, not colour-critical
        return KHypergraph.from_edges([(1, 2), (2, 3), (1, 3), (4, 5), (5, 6), (4, 6)])
    raise SystemExit(f"unknown pattern {name!r}; choose from {sorted(NAMED) + ['2K3']}")


def count_free_subsets(n: int, r: int = 2, mode: str = "distinct") -> int:
    # freeness is hereditary, so grow sets in increasing order and prune
    count = 0
    stack = [((), 1)]
    while stack:
        S, nxt = stack.pop()
        count += 1
        for x in range(nxt, n + 1):
            T = S + (x,)
            res = is_free(T, [SCHUR], r=r, mode=mode, budget=None)
            if res.status is Verdict.TRUE:
                stack.append((T, x + 1))
    return count


def free_count(n_values, mode: str) -> list[dict]:
    rows = []
    for n in n_values:
        c = count_free_subsets(n, mode=mode)
        rows.append({"n": n, "mode": mode, "count": c, "ratio": c / 2 ** (4 * n / 5)})
    return rows


def chromatic(name: str, r: int, n_values) -> list[dict]:
    H = _pattern(name)
    probe = chromatic_ramsey_probe([H] * r)
    rows = []
    for n in n_values:
        rec = ex_r(n, [H] * r)
        row = {"pattern": name, "r": r, "n": n, "ex": rec.ex_value, "R_chi_interval": [probe.lower, probe.upper]}
        if probe.upper != float("inf"):
            s = int(probe.upper) - 1
            t = turan_number(s, n) if s <= n else math.comb(n, 2)
            row.update(turan=t, equal=rec.ex_value == t)
        rows.append(row)
    return rows


@dataclass
class AsymmetricConfig:
    patterns: tuple[str, str] = ("K4", "K3")
    n_values: list[int] = field(default_factory=lambda: [10, 12])
    C_grid: list[float] = field(default_factory=lambda: [0.5, 1.0, 2.0, 3.0])
    trials: int = 30
    seed: int = 2


def asymmetric(cfg: AsymmetricConfig) -> list[dict]:
    H1, H2 = (_pattern(p) for p in cfg.patterns)
    m = asymmetric_m_k(H1, H2).value
    rows = []
    for n in cfg.n_values:
        model = RandomModelConfig("gnp_k", n, Fraction(1, 2), cfg.seed, cfg.trials)
        table = threshold_scan(model, ramsey_property([H1, H2]), C_grid=cfg.C_grid, m=m, workers=None)
        for row in table.rows:
            rows.append({"n": n, "m": frac_str(m), "C": row.C, "p": float(row.p),
                         "estimate": row.estimate.estimate, "ci": list(row.estimate.ci)})
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="probe", required=True)
    p1 = sub.add_parser("free-count")
    p1.add_argument("--n", type=int, nargs="+", default=[5, 8, 11])
    p1.add_argument("--mode", choices=["distinct", "strong"], default="distinct")
    p2 = sub.add_parser("chromatic")
    p2.add_argument("--pattern", default="K3")
    p2.add_argument("--r", type=int, default=2)
    p2.add_argument("--n", type=int, nargs="+", default=[3, 4, 5, 6, 7])
    p3 = sub.add_parser("asymmetric")
    p3.add_argument("--patterns", nargs=2, default=["K4", "K3"])
    p3.add_argument("--n", type=int, nargs="+", default=[10, 12])
    p3.add_argument("--C", type=float, nargs="+", default=[0.5, 1.0, 2.0, 3.0])
    p3.add_argument("--trials", type=int, default=30)
    p3.add_argument("--seed", type=int, default=2)
    a = ap.parse_args(argv)
    if a.probe == "free-count":
        rows = free_count(a.n, a.mode)
    elif a.probe == "chromatic":
        rows = chromatic(a.pattern, a.r, a.n)
    else:
        rows = asymmetric(AsymmetricConfig(tuple(a.patterns), a.n, a.C, a.trials, a.seed))
    for row in rows:
        print(json.dumps(row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
