"""Command-line front end.

    hyperlag lambda --complete 4 --r 3
    hyperlag verify conj2 --l 5 --output conj2.jsonl
    hyperlag counterexample --r 3 --l 5

Exit codes: 0 every conclusion holds, 1 certified counterexample, 2 inconclusive
margins, 3 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from . import lab
from .hypergraph import (
    GraphFormatError,
    RUniformGraph,
    colex_initial_segment,
    complete_graph,
    compress,
    is_left_compressed,
    link,
    link_difference,
    load_graph,
    max_clique_order,
)
from .solver import SolverConfig, maximize

EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunReport:
    command: str
    config: dict
    items: list[dict] = field(default_factory=list)
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def header(self) -> dict:
        return {"type": "header", "tool": "hyperlag", "version": self.version, "command": self.command,
                "config": self.config, "timestamp": self.timestamp}

    def lines(self) -> list[str]:
        rows = [self.header()] + [{"type": "result", **item} for item in self.items]
        return [json.dumps(row, sort_keys=True) for row in rows]

    def exit_code(self) -> int:
        verdicts = [item.get("verdict") for item in self.items]
        if lab.COUNTEREXAMPLE in verdicts:
            return EXIT_COUNTEREXAMPLE
        if lab.INCONCLUSIVE in verdicts:
            return EXIT_INCONCLUSIVE
        return EXIT_OK


def write_report(rep: RunReport, path) -> Path:
    """JSONL: a header line, then one line per result. Overwrites."""
    path = Path(path)
    path.write_text("\n".join(rep.lines()) + "\n", encoding="utf-8")
    return path


def _int_range(text: str) -> list[int]:
    """'7', '4..7' or '4,5,9'."""
    out = []
    try:
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, range a..b or list, got {text!r}") from None
    return out


def _add_graph_source(p, required=True):
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--graph", type=Path, help="graph document (JSON)")
    src.add_argument("--colex", type=int, nargs="+", metavar="N", help="C_{r,m}: give 'R M', or M with --r")
    src.add_argument("--complete", type=int, nargs="+", metavar="N", help="[t]^(r): give 'T R', or T with --r")
    p.add_argument("--r", type=int, help="uniformity for --colex/--complete with a single value")


def _add_solver(p):
    d = SolverConfig()
    p.add_argument("--restarts", type=int, default=d.restarts)
    p.add_argument("--max-iterations", type=int, default=d.max_iterations)
    p.add_argument("--convergence-tol", type=float, default=d.convergence_tol)
    p.add_argument("--support-threshold", type=float, default=d.support_threshold)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--workers", type=int, default=None, help=f"worker processes (default ${lab.WORKERS_ENV} or 1)")


def _add_output(p):
    p.add_argument("--output", type=Path, help="write the JSONL report here")
    p.add_argument("--json", action="store_true", help="print the JSONL report instead of a summary")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperlag", description="Lagrangians of r-uniform hypergraphs")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("lambda", help="maximise lambda(G, x) over the simplex")
    _add_graph_source(p)
    _add_solver(p)
    _add_output(p)

    p = sub.add_parser("colex", help="emit the colex initial segment C_{r,m}")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    _add_output(p)

    for name, text in (("compress", "left-compress a graph"), ("clique", "largest clique order")):
        p = sub.add_parser(name, help=text)
        _add_graph_source(p)
        _add_output(p)

    p = sub.add_parser("links", help="links E_i, E_ij and link differences")
    _add_graph_source(p)
    p.add_argument("--vertex", type=int, nargs="+", required=True, metavar="V", help="one or two vertices")
    p.add_argument("--difference", action="store_true", help="E_{i\\j} for --vertex i j")
    _add_output(p)

    p = sub.add_parser("verify", help="run a conjecture or theorem check")
    which = p.add_subparsers(dest="check", required=True, parser_class=_Parser)
    c = which.add_parser("conj1")
    c.add_argument("--r", type=int, default=3)
    c.add_argument("--l", type=int, required=True)
    c.add_argument("--m", type=_int_range)
    c = which.add_parser("conj2")
    c.add_argument("--l", type=int, required=True)
    c.add_argument("--m", type=_int_range)
    c = which.add_parser("ff")
    c.add_argument("--r", type=int, default=3)
    c.add_argument("--m", type=_int_range, required=True)
    c.add_argument("--vertex-cap", type=int)
    for name in ("thm2a", "thm3"):
        c = which.add_parser(name)
        _add_graph_source(c)
        c.add_argument("--l", type=int, required=True)
    c = which.add_parser("thm39")
    c.add_argument("--r", type=int, default=3)
    c.add_argument("--l", type=int, required=True)
    c.add_argument("--sample-budget", type=int)
    c.add_argument("--vertex-cap", type=int)
    for c in which.choices.values():
        _add_solver(c)
        _add_output(c)

    p = sub.add_parser("counterexample", help="the one-edge-too-many construction, in exact arithmetic")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    _add_output(p)
    return parser


def _graph_from(args) -> RUniformGraph:
    if args.graph is not None:
        try:
            text = args.graph.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {args.graph}: {exc}") from None
        return load_graph(text)
    vals = args.colex or args.complete
    if len(vals) == 1 and args.r is None:
        raise UsageError("give the uniformity with --r or as the first value")
    if len(vals) > 2:
        raise UsageError("expected at most two values")
    if args.colex:
        r, m = (args.r, vals[0]) if len(vals) == 1 else vals
        return colex_initial_segment(r, m)
    t, r = (vals[0], args.r) if len(vals) == 1 else vals
    return complete_graph(t, r)


def _solver_config(args) -> SolverConfig:
    return SolverConfig(args.restarts, args.max_iterations, args.convergence_tol, args.support_threshold, args.seed)


def _resolved(args) -> dict:
    out = {}
    for k, v in vars(args).items():
        if k in ("output", "json"):
            continue
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def _timed(fn, *a, **kw):
    t0 = time.perf_counter()
    res = fn(*a, **kw)
    return res, round(time.perf_counter() - t0, 6)


def _verdict_items(v: lab.ConjectureVerdict, elapsed) -> list[dict]:
    rows = v.rows()
    for row in rows:
        row["elapsed_s"] = elapsed
    return rows


def _theorem_item(name, g, l, res: lab.TheoremCheck, elapsed) -> dict:
    item = {"check": name, "r": g.r, "l": l, "m": len(g), "graph": g.to_document(), **res.to_json(),
            "elapsed_s": elapsed}
    if res.verdict is None:
        item["verdict"] = "inapplicable"
    return item


def run_command(args) -> tuple[RunReport, list[str]]:
    """Execute a parsed request; returns the report and summary lines."""
    rep = RunReport(command=args.command if args.command != "verify" else f"verify {args.check}",
                    config=_resolved(args))
    say = []
    if args.command == "lambda":
        g = _graph_from(args)
        est, dt = _timed(maximize, g, _solver_config(args))
        rep.items.append({"graph": g.to_document(), **est.to_json(), "elapsed_s": dt})
        say.append(f"lambda = {est.value:.15g} on support {list(est.support)} (KKT residual {est.kkt.max_residual:.2e})")
    elif args.command == "colex":
        g = colex_initial_segment(args.r, args.m)
        rep.items.append({"graph": g.to_document()})
        say.append(g.dumps())
    elif args.command == "compress":
        g = _graph_from(args)
        h = compress(g)
        rep.items.append({"graph": h.to_document(), "left_compressed": is_left_compressed(h)})
        say.append(h.dumps())
    elif args.command == "clique":
        g = _graph_from(args)
        w = max_clique_order(g)
        rep.items.append({"graph": g.to_document(), "max_clique_order": w})
        say.append(f"max clique order {w}")
    elif args.command == "links":
        g = _graph_from(args)
        vs = args.vertex
        if args.difference:
            if len(vs) != 2:
                raise UsageError("--difference needs exactly two vertices")
            fam = link_difference(g, *vs)
        else:
            fam = link(g, vs)
        rows = sorted(fam, key=lambda a: tuple(reversed(a)))
        rep.items.append({"vertices": vs, "difference": args.difference, "sets": [list(a) for a in rows]})
        say.append(" ".join("".join(map(str, a)) if a else "{}" for a in rows) or "(empty)")
    elif args.command == "verify":
        cfg = _solver_config(args)
        check = args.check
        if check == "conj1":
            v, dt = _timed(lab.conjecture1_check, args.r, args.l, args.m, cfg, args.workers)
            rep.items.extend(_verdict_items(v, dt))
        elif check == "conj2":
            v, dt = _timed(lab.conjecture2_check, args.l, args.m, cfg, args.workers)
            rep.items.extend(_verdict_items(v, dt))
        elif check == "ff":
            for m in args.m:
                v, dt = _timed(lab.frankl_furedi_check, args.r, m, args.vertex_cap, cfg, args.workers)
                rep.items.extend(_verdict_items(v, dt))
        elif check in ("thm2a", "thm3"):
            g = _graph_from(args)
            fn = lab.theorem_2a_hypothesis_check if check == "thm2a" else lab.theorem3_check
            res, dt = _timed(fn, g, args.l, cfg)
            rep.items.append(_theorem_item(check, g, args.l, res, dt))
        elif check == "thm39":
            v, dt = _timed(lab.theorem39_check, args.r, args.l, args.sample_budget, args.seed,
                           args.vertex_cap, cfg, args.workers)
            rep.items.extend(_verdict_items(v, dt))
        for item in rep.items:
            say.append(f"{item['check']} r={item['r']} l={item['l']} m={item['m']}: {item['verdict']}"
                       f" (margin {item.get('margin')}, graphs {item.get('graphs_examined', 1)})")
    elif args.command == "counterexample":
        g, x, val, bench = lab.remark_counterexample(args.r, args.l)
        statement = f"{val} > {bench}"
        rep.items.append({"graph": g.to_document(), "weights": [str(w) for w in x], "value": str(val),
                          "clique_value": str(bench), "statement": statement, "verdict": lab.HOLDS})
        say.append(statement)
    return rep, say


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rep, say = run_command(args)
    except (UsageError, GraphFormatError, lab.ScaleError, ValueError) as exc:
        print(f"hyperlag: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output is not None:
        try:
            write_report(rep, args.output)
        except OSError as exc:
            print(f"hyperlag: error: cannot write {args.output}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    print("\n".join(rep.lines() if args.json else say))
    return rep.exit_code()


if __name__ == "__main__":
    sys.exit(main())
