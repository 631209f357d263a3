"""Monte Carlo scan of P[G(n,p) is (K3,K3)-Ramsey] over p = C n^{-1/2}.

Writes one CSV per n to --out (default: stdout).  Example:

    python scripts/triangle_threshold_scan.py --n 10 14 --trials 40 --seed 1
"""
import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from ramsey_container_lab.hypergraph import KHypergraph
from ramsey_container_lab.random_models import RandomModelConfig, ramsey_property, threshold_scan


@dataclass
class ScanConfig:
    n_values: list[int] = field(default_factory=lambda: [10, 14])
    C_grid: list[float] = field(default_factory=lambda: [0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    trials: int = 40
    seed: int = 1
    workers: int | None = None


def run(cfg: ScanConfig, out) -> None:
    K3 = KHypergraph.complete(3)
    prop = ramsey_property([K3, K3])
    for n in cfg.n_values:
        model = RandomModelConfig("gnp_k", n, Fraction(1, 2), cfg.seed, cfg.trials)
        table = threshold_scan(model, prop, C_grid=cfg.C_grid, m=Fraction(2), workers=cfg.workers)
        out.write(f"# n={n} ci_monotone={table.ci_monotone} crossing_p={table.crossing_p}\n")
        out.write(table.to_csv())
        if not table.to_csv().endswith("\n"):
            out.write("\n")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[10, 14])
    ap.add_argument("--C", type=float, nargs="+", default=[0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    ap.add_argument("--trials", type=int, default=40)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default=None)
    a = ap.parse_args(argv)
    cfg = ScanConfig(a.n, a.C, a.trials, a.seed, a.workers)
    if a.out:
        with open(a.out, "w") as fh:
            run(cfg, fh)
    else:
        run(cfg, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
