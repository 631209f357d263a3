"""Build Schur containers on [n] for a ladder of n and report the fitted D.

fitted D = (max fingerprint size) / n^{(m-1)/m} with m = m(x+y=z) = 2.  The
container bounds only say it stays bounded; this just prints the numbers.

    python scripts/schur_container_ladder.py --n 9 12 15 18 --r 1
"""
import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from ramsey_container_lab.containers import ContainerParams, lift_tuple, solution_hypergraph, verify_matcontainer
from ramsey_container_lab.rado import SCHUR


@dataclass
class LadderConfig:
    n_values: list[int] = field(default_factory=lambda: [9, 12, 15, 18])
    r: int = 1
    delta: Fraction = Fraction(1, 2)
    budget: int | None = None  # per coordinate; None means n (always certifies)


def run(cfg: LadderConfig) -> list[dict]:
    rows = []
    for n in cfg.n_values:
        t0 = time.perf_counter()
        base = solution_hypergraph(SCHUR, n)
        params = ContainerParams(cfg.budget if cfg.budget is not None else n)
        fam = lift_tuple([base] * cfg.r, params)
        rep = verify_matcontainer([SCHUR] * cfg.r, n, cfg.delta, fam, strict=False)
        rows.append({
            "n": n, "r": cfg.r, "passed": rep.passed, "fitted_D": round(rep.fitted_D, 4),
            "max_fingerprint": rep.max_fingerprint, "fingerprints": fam.count_fingerprints(),
            "captured_tuples": rep.capture_tuples, "mu": rep.reference_value, "max_union": rep.max_union,
            "seconds": round(time.perf_counter() - t0, 2),
        })
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[9, 12, 15, 18])
    ap.add_argument("--r", type=int, default=1)
    ap.add_argument("--budget", type=int, default=None)
    a = ap.parse_args(argv)
    for row in run(LadderConfig(a.n, a.r, budget=a.budget)):
        print(json.dumps(row))
    return 0


if __name__ == "__main__":
    sys.exit(main())
