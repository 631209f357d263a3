"""Command-line entry point: ``rcl <subcommand> ...``.

Every run prints exactly one report envelope. Exit status is 0 when the
verdict is OK, or UNKNOWN with a result attached; 1 otherwise; argparse usage
errors exit with 2.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import __version__
from .budget import DEFAULT_NODE_BUDGET, Verdict
from .containers import (
    ContainerFamily,
    ContainerParams,
    copies_bases,
    lift_tuple,
    solution_hypergraph,
    verify_matcontainer,
    verify_ramseycont,
)
from .formats import parse_hypergraph, parse_matrix
from .hypergraph import KHypergraph, asymmetric_m_k, frac_str, m_k
from .rado import (
    SolutionMode,
    columns_property,
    is_irredundant,
    m_A,
    matmL_checks,
    mu,
    rank_and_echelon,
    satisfies_star,
    schur_f,
    schur_h,
)
from .ramsey import chromatic_ramsey_probe, ex_r, is_ramsey, ramsey_number, resilience_exact
from .random_models import (
    RandomModelConfig,
    default_workers,
    mc_probability,
    rado_property,
    ramsey_property,
    resilience_mc,
    resolve_p,
    threshold_scan,
)

SCHEMA_VERSION = 1


class UsageError(ValueError):
    pass


@dataclass
class ReportEnvelope:
    config: dict
    verdict: str = "OK"
    result: Any = None
    timing: dict = field(default_factory=dict)
    error: str | None = None

    def to_json(self, mask_timing: bool = False) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "config": self.config,
            "verdict": self.verdict,
            "result": self.result,
        }
        if not mask_timing:
            out["timing"] = self.timing
        if self.error is not None:
            out["error"] = self.error
        return out

    @property
    def exit_code(self) -> int:
        if self.verdict == "OK":
            return 0
        if self.verdict == "UNKNOWN" and self.result is not None:
            return 0
        return 1


# ---------------------------------------------------------------------------
# argument helpers


def _frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from None


def _frac_list(s: str) -> list[Fraction]:
    return [_frac(x) for x in s.split(",") if x]


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {s!r}") from None


def _paths(s: str) -> list[str]:
    return [x for x in s.split(",") if x]


def _patterns(paths: list[str]) -> list[KHypergraph]:
    return [parse_hypergraph(p) for p in paths]


def _budget(args) -> int | None:
    b = getattr(args, "budget", None)
    return None if b is not None and b <= 0 else b


def _verdict_of(status) -> str:
    return "UNKNOWN" if status is Verdict.UNKNOWN else "OK"


def _colouring_json(c) -> dict | None:
    return None if c is None else c.to_json()


# ---------------------------------------------------------------------------
# handlers: each returns (verdict, result)


def cmd_density(args):
    H = parse_hypergraph(args.graph)
    if args.strip_isolated:
        H = H.strip_isolated()
    rep = m_k(H)
    out = {"k": H.k, **rep.to_json()}
    if args.graph2:
        H2 = parse_hypergraph(args.graph2)
        asym = asymmetric_m_k(H, H2)
        out["asymmetric"] = {"value": frac_str(asym.value), "witness": list(asym.witness),
                             "strictly_balanced": asym.strictly_balanced}
    return "OK", out


def cmd_ramsey_check(args):
    G = parse_hypergraph(args.graph)
    v = is_ramsey(G, _patterns(args.patterns), budget=_budget(args))
    return _verdict_of(v.status), {"is_ramsey": v.is_ramsey, "status": v.status.value, "nodes": v.nodes,
                                   "certificate": v.certificate, "witness": _colouring_json(v.witness)}


def cmd_ramsey_ex(args):
    pats = _patterns(args.patterns)
    rec = ex_r(args.n, pats, k=pats[0].k, budget=_budget(args))
    return "OK", {"n": rec.n, "k": rec.k, "ex": rec.ex_value, "density": frac_str(Fraction(rec.ex_value, math.comb(rec.n, rec.k))),
                  "extremal_graph": [list(e) for e in rec.extremal_graph.edges],
                  "free_coloring": rec.free_coloring.to_json(), "nodes": rec.nodes}


def cmd_ramsey_number(args):
    if args.patterns:
        res = chromatic_ramsey_probe(_patterns(args.patterns), v_max=args.v_max, budget=_budget(args))
        upper = None if math.isinf(res.upper) else int(res.upper)
        verdict = "OK" if upper is not None else "UNKNOWN"
        return verdict, {"kind": "hom-family", "lower": res.lower, "upper": upper, "nodes": res.nodes,
                         "family_sizes": [len(f) for f in res.hom_families]}
    if not args.cliques:
        raise UsageError("give --cliques a,b,... or --patterns for the homomorphism-family probe")
    res = ramsey_number(*args.cliques, budget=_budget(args))
    verdict = "OK" if res.value is not None else "UNKNOWN"
    return verdict, {"kind": "cliques", "cliques": args.cliques, "value": res.value,
                     "lower_bound": res.lower_bound, "nodes": res.nodes,
                     "lower_certificate": _colouring_json(res.lower_certificate)}


def cmd_ramsey_resilience(args):
    G = parse_hypergraph(args.graph)
    res = resilience_exact(G, _patterns(args.patterns), budget=_budget(args))
    verdict = "OK" if res.value is not None else "UNKNOWN"
    return verdict, {"resilience": res.value, "bracket": list(res.bracket), "e": G.e, "nodes": res.nodes,
                     "kept_edges": None if res.kept is None else [list(e) for e in res.kept.edges]}


def cmd_rado_classify(args):
    A = parse_matrix(args.matrix)
    rank, ech = rank_and_echelon(A)
    cols = columns_property(A)
    irr = is_irredundant(A, args.search_bound)
    out = {
        "rank": rank,
        "echelon": [[frac_str(x) for x in row] for row in ech],
        "star": satisfies_star(A),
        "columns_property": cols.holds,
        "columns_partition": None if cols.partition is None else [list(b) for b in cols.partition],
        "irredundant": irr.status.value,
        "irredundance_witness": None if irr.witness is None else list(irr.witness),
    }
    if out["star"] and irr.status is Verdict.TRUE and rank == A.l:
        rep = matmL_checks(A, irr.witness)
        out["structure_checks"] = {"passed": rep.passed, "failures": [list(f) for f in rep.failures]}
    return "OK", out


def cmd_rado_mA(args):
    A = parse_matrix(args.matrix)
    d = m_A(A)
    return "OK", {"m": frac_str(d.value), "witness": list(d.witness)}


def cmd_rado_mu(args):
    A = parse_matrix(args.matrix)
    res = mu(args.n, A, r=args.r, mode=args.mode, budget=_budget(args))
    verdict = "OK" if res.value is not None else "UNKNOWN"
    return verdict, {"n": args.n, "r": args.r, "mode": SolutionMode.parse(args.mode).value, "mu": res.value,
                     "bracket": list(res.bracket), "certificate": res.certificate.to_json(), "nodes": res.nodes}


def cmd_rado_schur(args):
    if (args.f is None) == (args.h is None):
        raise UsageError("give exactly one of --f R and --h R")
    if args.f is not None:
        res = schur_f(args.f)
        return "OK", {"f": args.f, "value": res.value, "partition": [list(c) for c in res.partition]}
    res = schur_h(args.h)
    return "OK", {"h": args.h, "value": res.value, "partition": [list(c) for c in res.partition]}


def _container_bases(args) -> list[KHypergraph]:
    sources = sum(x is not None for x in (args.hypergraph, args.matrix, args.patterns))
    if sources != 1:
        raise UsageError("give exactly one of --hypergraph, --matrix (with --n) or --patterns (with --n)")
    if args.hypergraph:
        return [parse_hypergraph(args.hypergraph)] * args.r
    if args.n is None:
        raise UsageError("--n is required with --matrix or --patterns")
    if args.matrix:
        return [solution_hypergraph(parse_matrix(args.matrix), args.n)] * args.r
    pats = _patterns(args.patterns)
    if len(pats) == 1:
        pats = pats * args.r
    return copies_bases(pats, args.n)


def cmd_containers_build(args):
    bases = _container_bases(args)
    fam = lift_tuple(bases, ContainerParams(args.budget, args.ceiling, refinement_depth=args.refine))
    data = fam.to_json()
    if args.family_out:
        Path(args.family_out).write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")
    out = {"r": fam.r, "certified": fam.certified, "fingerprints": fam.count_fingerprints(),
           "max_fingerprint": fam.max_fingerprint_size(),
           "per_coordinate_fingerprints": [len(c.fingerprints) for c in fam.coordinates]}
    wit = fam.uncertified_witness()
    if wit is not None:
        out["uncertified_witness"] = {"coordinate": wit[0], "independent_set": sorted(wit[1])}
    if not args.family_out:
        out["family"] = data
    return ("OK" if fam.certified else "UNCERTIFIED"), out


def cmd_containers_verify(args):
    if args.family:
        fam = ContainerFamily.from_json(json.loads(Path(args.family).read_text()))
    else:
        fam = None
    if args.n is None:
        raise UsageError("--n is required")
    params = ContainerParams(args.budget, args.ceiling, refinement_depth=args.refine)
    if args.mode == "rado":
        if not args.matrix:
            raise UsageError("--mode rado needs --matrix")
        A = parse_matrix(args.matrix)
        if fam is None:
            fam = lift_tuple([solution_hypergraph(A, args.n)] * args.r, params)
        rep = verify_matcontainer([A] * fam.r, args.n, args.delta, fam, strict=False)
    else:
        if not args.patterns:
            raise UsageError("--mode ramsey needs --patterns")
        pats = _patterns(args.patterns)
        if len(pats) == 1:
            pats = pats * args.r
        if fam is None:
            fam = lift_tuple(copies_bases(pats, args.n), params)
        rep = verify_ramseycont(pats, args.n, args.delta, fam, strict=False, budget=DEFAULT_NODE_BUDGET)
    if rep.passed:
        return "OK", rep.to_json()
    return ("UNCERTIFIED" if not rep.clauses.get("certified", True) else "ERROR"), rep.to_json()


def _random_setup(args):
    if args.seed is None:
        raise UsageError("--seed is required for random runs")
    if args.patterns and args.rado:
        raise UsageError("give either --patterns or --rado, not both")
    if args.patterns:
        pats = _patterns(args.patterns)
        if len(pats) == 1 and args.r > 1:
            pats = pats * args.r
        prop = ramsey_property(pats)
        model = args.model or "gnp_k"
        k = pats[0].k
    elif args.rado:
        prop = rado_property(parse_matrix(args.rado), r=args.r, mode=args.mode)
        model = args.model or "np_set"
        k = 2
    else:
        raise UsageError("give --patterns (graph property) or --rado (integer property)")
    m = None
    if args.exponent_from:
        kind, _, path = args.exponent_from.partition(":")
        if kind == "graph":
            m = m_k(parse_hypergraph(path)).m_k
        elif kind == "matrix":
            m = m_A(parse_matrix(path)).value
        else:
            raise UsageError("--exponent-from must be graph:FILE or matrix:FILE")
    return prop, model, k, m


def _resolve_single_p(args, m) -> Fraction:
    if args.p is not None:
        return resolve_p(args.n, p=args.p)
    if args.C is not None:
        if m is None:
            raise UsageError("--C needs --exponent-from")
        return resolve_p(args.n, C=args.C, m=m)
    raise UsageError("give --p or --C with --exponent-from")


def cmd_mc(args):
    prop, model, k, m = _random_setup(args)
    p = _resolve_single_p(args, m)
    cfg = RandomModelConfig(model, args.n, p, args.seed, args.trials, k, _budget(args))
    est = mc_probability(cfg, prop, workers=args.workers)
    verdict = "OK" if est.unknown_count == 0 else "UNKNOWN"
    return verdict, est.to_json(mask_timing=args.no_timing)


def cmd_scan(args):
    prop, model, k, m = _random_setup(args)
    cfg = RandomModelConfig(model, args.n, Fraction(0), args.seed, args.trials, k, _budget(args))
    if args.p_grid:
        tab = threshold_scan(cfg, prop, p_grid=args.p_grid, m=m, workers=args.workers)
    elif args.C_grid:
        if m is None:
            raise UsageError("--C-grid needs --exponent-from")
        tab = threshold_scan(cfg, prop, C_grid=args.C_grid, m=m, workers=args.workers)
    else:
        raise UsageError("give --p-grid or --C-grid")
    unknown = any(r.estimate.unknown_count for r in tab.rows)
    if args.format == "csv":
        return ("UNKNOWN" if unknown else "OK"), {"csv": tab.to_csv(), **tab.to_json(mask_timing=args.no_timing)}
    return ("UNKNOWN" if unknown else "OK"), tab.to_json(mask_timing=args.no_timing)


def cmd_resilience(args):
    prop, model, k, m = _random_setup(args)
    p = _resolve_single_p(args, m)
    cfg = RandomModelConfig(model, args.n, p, args.seed, args.trials, k, _budget(args))
    summ = resilience_mc(cfg, prop, workers=args.workers, predict=args.predict)
    verdict = "OK" if summ.bracket_trials == 0 else "UNKNOWN"
    return verdict, summ.to_json(mask_timing=args.no_timing)


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, budget_help: str = "search node budget (0 = unlimited)",
            budget_default: int | None = DEFAULT_NODE_BUDGET) -> None:
    p.add_argument("--budget", type=int, default=budget_default, help=budget_help)


def _random_flags(p: argparse.ArgumentParser, grid: bool = False) -> None:
    p.add_argument("--model", choices=["gnp_k", "np_set"])
    p.add_argument("--n", type=int, required=True)
    if grid:
        p.add_argument("--p-grid", type=_frac_list)
        p.add_argument("--C-grid", type=_frac_list)
    else:
        p.add_argument("--p", type=_frac)
        p.add_argument("--C", type=_frac)
    p.add_argument("--exponent-from", help="graph:FILE (uses m_k) or matrix:FILE (uses m(A))")
    p.add_argument("--patterns", type=_paths, help="comma-separated hypergraph files")
    p.add_argument("--rado", help="matrix file for the integer property")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--mode", choices=["distinct", "strong"], default="distinct")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: $RCL_WORKERS or 1)")
    _common(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcl", description="Ramsey, Rado and container computations.")
    parser.add_argument("--version", action="version", version=f"rcl {__version__}")
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--json", action="store_true", help="shorthand for --format json")
    out.add_argument("--format", choices=["json", "csv", "text"], default="text")
    out.add_argument("--output", help="write the report here instead of stdout")
    out.add_argument("--config", help="key=value file; explicit flags win")
    out.add_argument("--no-timing", action="store_true", help="omit wall-clock fields (for byte comparisons)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", parents=[out], help="d_k, m_k and asymmetric density")
    p.add_argument("--graph", required=True)
    p.add_argument("--graph2", help="second pattern for the asymmetric density")
    p.add_argument("--strip-isolated", action="store_true")
    p.set_defaults(func=cmd_density)

    ram = sub.add_parser("ramsey", help="Ramsey oracles").add_subparsers(dest="action", required=True)
    p = ram.add_parser("check", parents=[out])
    p.add_argument("--graph", required=True)
    p.add_argument("--patterns", type=_paths, required=True)
    _common(p)
    p.set_defaults(func=cmd_ramsey_check)
    p = ram.add_parser("ex", parents=[out])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--patterns", type=_paths, required=True)
    _common(p)
    p.set_defaults(func=cmd_ramsey_ex)
    p = ram.add_parser("number", parents=[out])
    p.add_argument("--cliques", type=_int_list)
    p.add_argument("--patterns", type=_paths, help="homomorphism-family probe for these patterns")
    p.add_argument("--v-max", type=int, default=8)
    _common(p)
    p.set_defaults(func=cmd_ramsey_number)
    p = ram.add_parser("resilience", parents=[out])
    p.add_argument("--graph", required=True)
    p.add_argument("--patterns", type=_paths, required=True)
    _common(p)
    p.set_defaults(func=cmd_ramsey_resilience)

    rad = sub.add_parser("rado", help="matrix and sum-free tools").add_subparsers(dest="action", required=True)
    p = rad.add_parser("classify", parents=[out])
    p.add_argument("--matrix", required=True)
    p.add_argument("--search-bound", type=int, default=12)
    p.set_defaults(func=cmd_rado_classify)
    p = rad.add_parser("mA", parents=[out])
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_rado_mA)
    p = rad.add_parser("mu", parents=[out])
    p.add_argument("--matrix", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--mode", choices=["distinct", "strong"], default="distinct")
    _common(p)
    p.set_defaults(func=cmd_rado_mu)
    p = rad.add_parser("schur", parents=[out])
    p.add_argument("--f", type=int)
    p.add_argument("--h", type=int)
    p.set_defaults(func=cmd_rado_schur)

    con = sub.add_parser("containers", help="container families").add_subparsers(dest="action", required=True)
    for name in ("build", "verify"):
        p = con.add_parser(name, parents=[out])
        p.add_argument("--hypergraph")
        p.add_argument("--matrix")
        p.add_argument("--patterns", type=_paths)
        p.add_argument("--n", type=int)
        p.add_argument("--r", type=int, default=1)
        p.add_argument("--budget", type=int, required=True, help="fingerprint budget per coordinate (the tuple bound is r times this)")
        p.add_argument("--ceiling", type=_frac, default=Fraction(1, 2), help="container edge-density ceiling")
        p.add_argument("--refine", type=int, default=0, help="extra fingerprint steps for over-dense containers")
        if name == "build":
            p.add_argument("--family-out", help="write the family JSON here")
            p.set_defaults(func=cmd_containers_build)
        else:
            p.add_argument("--mode", choices=["rado", "ramsey"], required=True)
            p.add_argument("--delta", type=_frac, default=Fraction(1, 2))
            p.add_argument("--family", help="family JSON from 'containers build'")
            p.set_defaults(func=cmd_containers_verify)

    p = sub.add_parser("mc", parents=[out], help="Monte Carlo probability of a Ramsey/Rado property")
    _random_flags(p)
    p.set_defaults(func=cmd_mc)
    p = sub.add_parser("scan", parents=[out], help="threshold scan over a p or C grid")
    _random_flags(p, grid=True)
    p.set_defaults(func=cmd_scan)
    p = sub.add_parser("resilience", parents=[out], help="Monte Carlo resilience distribution")
    _random_flags(p)
    p.add_argument("--predict", action="store_true", help="also compute the finite-n predicted centre")
    p.set_defaults(func=cmd_resilience)
    return parser


def _read_config(path: str) -> list[tuple[str, str]]:
    pairs = []
    for no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value")
        key, value = (x.strip() for x in line.split("=", 1))
        pairs.append((key.replace("_", "-"), value))
    return pairs


def _merge_config(argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        return argv
    given = {a.split("=", 1)[0] for a in argv if a.startswith("--")}
    extra: list[str] = []
    for key, value in _read_config(argv[i + 1]):
        flag = f"--{key}"
        if flag in given:
            continue
        if value.lower() in ("true", "yes", "on"):
            extra.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            extra += [flag, value]
    return argv + extra


def _echo(args) -> dict:
    # worker count is execution detail, reported with timing so payloads match
    skip = {"func", "config", "output", "json", "no_timing", "workers"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, Fraction):
            v = frac_str(v)
        elif isinstance(v, list):
            v = [frac_str(x) if isinstance(x, Fraction) else x for x in v]
        out[k] = v
    return out


def _text(env: dict) -> str:
    lines = [f"verdict: {env['verdict']}"]
    res = env.get("result")
    if isinstance(res, dict):
        for k, v in res.items():
            if isinstance(v, (dict, list)) and len(json.dumps(v)) > 200:
                v = "<omitted; use --json>"
            lines.append(f"{k}: {v if not isinstance(v, (dict, list)) else json.dumps(v)}")
    if env.get("error"):
        lines.append(f"error: {env['error']}")
    return "\n".join(lines) + "\n"


def run(argv: list[str] | None = None) -> ReportEnvelope:
    return _run(argv)[0]


def _run(argv: list[str] | None) -> tuple[ReportEnvelope, argparse.Namespace]:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    argv = _merge_config(argv)
    args = parser.parse_args(argv)
    if args.json:
        args.format = "json"
    if getattr(args, "workers", "absent") is None:
        args.workers = default_workers()
    env = ReportEnvelope(_echo(args))
    start = time.perf_counter()
    try:
        env.verdict, env.result = args.func(args)
    except Exception as exc:  # every failure still produces an envelope
        env.verdict, env.error = "ERROR", f"{type(exc).__name__}: {exc}"
    env.timing = {"wall_seconds": round(time.perf_counter() - start, 6)}
    if getattr(args, "workers", None) is not None:
        env.timing["workers"] = args.workers
    return env, args


def main(argv: list[str] | None = None) -> int:
    env, args = _run(argv)
    data = env.to_json(mask_timing=args.no_timing)
    if args.format == "csv" and isinstance(env.result, dict) and "csv" in env.result:
        text = env.result["csv"]
    elif args.format == "csv" and isinstance(env.result, dict) and "records" in env.result:
        recs = env.result["records"]
        cols = list(recs[0].keys()) if recs else []
        rows = [",".join(cols)] + [",".join("" if r[c] is None else str(r[c]) for c in cols) for r in recs]
        text = "\n".join(rows) + "\n"
    elif args.format == "text":
        text = _text(data)
    else:
        text = json.dumps(data, sort_keys=True, indent=1) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return env.exit_code


if __name__ == "__main__":
    sys.exit(main())
