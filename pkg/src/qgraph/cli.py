"""``qgraph`` command line.

Exit codes: 0 success, 1 bad input, 2 solver did not converge, 3 a check failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import graphs as G
from . import reports
from .graphs import CapabilityError
from .invariants import (EPIGRAPH_FORMS, SolverFailure, lovasz_theta, phi_lin_general,
                         phi_lin_graph, phi_quad_general, phi_quad_graph)
from .linalg import DimensionError
from .sdp import SdpNumericalError, SolverOptions
from .systems import InvalidSystemError, MatricialSystem

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3
MAX_TOL = 1e-2
DEFAULT_SEED = 20240611
INVARIANTS = ("theta", "phi-lin", "phi-quad", "omega", "alpha")


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    graph_spec: str | None = None
    system_spec: str | None = None
    tol_gap: float | None = None
    tol_feas: float | None = None
    output_format: str = "table"
    seed: int = DEFAULT_SEED
    output_path: str | None = None
    max_iter: int | None = None

    def __post_init__(self):
        if self.max_iter is not None and self.max_iter < 1:
            raise InputError(f"max_iter must be at least 1, got {self.max_iter}")
        for name in ("tol_gap", "tol_feas"):
            v = getattr(self, name)
            if v is not None and not (0 < v <= MAX_TOL):
                raise InputError(f"{name} must lie in (0, {MAX_TOL}], got {v}")

    def solver_options(self) -> SolverOptions | None:
        """None lets each invariant pick its own defaults."""
        if (self.tol_gap is None and self.tol_feas is None and self.max_iter is None
                and not os.environ.get("QG_TOL_GAP")):
            return None
        try:
            opts = SolverOptions.from_env(tol_gap=self.tol_gap, tol_feas=self.tol_feas,
                                          max_iter=self.max_iter)
        except ValueError as exc:
            raise InputError(f"bad QG_TOL_GAP: {exc}") from None
        if not (0 < opts.tol_gap <= MAX_TOL):
            raise InputError(f"tolerance must lie in (0, {MAX_TOL}], got {opts.tol_gap}")
        return opts


# ---------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower() if isinstance(v, bool) else "-"
    if isinstance(v, (float, np.floating)):
        return f"{v:.4f}" if abs(v) >= 1e-4 or v == 0 else f"{v:.3e}"
    return str(v)


def render(rows: list[dict], fmt: str, meta: dict | None = None) -> str:
    if fmt == "json":
        return json.dumps({"meta": meta or {}, "rows": rows}, indent=2, sort_keys=True,
                          default=float) + "\n"
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols and not isinstance(r[k], (list, dict))]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(r[k]) if isinstance(r.get(k), float) else r.get(k) for k in cols})
        return buf.getvalue()
    table = [cols] + [[_fmt(r.get(k)) for k in cols] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _flatten_counterexample(row: dict) -> dict:
    out = {k: v for k, v in row.items() if k not in ("quantities", "note")}
    for q in row["quantities"]:
        out[q["name"]] = q["value"]
    return out


def _summarize_counterexample(row: dict) -> dict:
    """Compact table row: printed quantities side by side with the paper's."""
    digits = ".12g" if row["item"] == 3 else ".4f"
    qs = [q for q in row["quantities"] if q.get("paper") is not None]
    return {"item": row["item"], "graph": row["graph"],
            "quantities": ", ".join(q["name"] for q in qs),
            "values": " / ".join(format(q["value"], digits) for q in qs),
            "paper": " / ".join(format(q["paper"], digits) for q in qs),
            "violation": row["violation"], "paper_violation": row["paper_violation"],
            "gap_budget": row["gap_budget"], "matches_paper": row["matches_paper"],
            "counts_as_counterexample": row["counts_as_counterexample"]}


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output_path:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# inputs


def load_graph(spec: str, minus_edge: str | None = None) -> G.Graph:
    try:
        g = G.parse_graph_spec(spec)
    except (ValueError, OSError) as exc:
        raise InputError(f"cannot read graph {spec!r}: {exc}") from None
    if minus_edge:
        try:
            i, j = (int(t) for t in minus_edge.split(","))
            g = g.minus_edge(i - 1, j - 1)
        except ValueError as exc:
            raise InputError(f"bad --minus-edge {minus_edge!r}: {exc}") from None
    return g


def load_system(path: str) -> MatricialSystem:
    try:
        with open(path) as fh:
            return MatricialSystem.from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read system {path!r}: {exc}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_invariant(name: str, cfg: RunConfig, minus_edge: str | None = None,
                  certificate: bool = False) -> tuple[int, list[dict]]:
    if (cfg.graph_spec is None) == (cfg.system_spec is None):
        raise InputError("give exactly one of a graph spec or --system")
    opts = cfg.solver_options()
    if cfg.system_spec is not None:
        if name not in ("phi-lin", "phi-quad"):
            raise InputError(f"{name} needs a graph, not a matricial system")
        s = load_system(cfg.system_spec)
        res = (phi_lin_general if name == "phi-lin" else phi_quad_general)(s, opts)
        label = s.label or cfg.system_spec
    else:
        g = load_graph(cfg.graph_spec, minus_edge)
        label = cfg.graph_spec + (f" minus {minus_edge}" if minus_edge else "")
        if name in ("omega", "alpha"):
            v = G.clique_number(g) if name == "omega" else G.independence_number(g)
            return EXIT_OK, [{"invariant": name, "input": label, "value": v, "gap": 0.0,
                              "route": "branch_and_bound", "status": "optimal"}]
        fn = {"theta": lovasz_theta, "phi-lin": phi_lin_graph, "phi-quad": phi_quad_graph}[name]
        res = fn(g, opts)
    row = {"invariant": name, "input": label}
    row.update(res.to_dict())
    if certificate and res.certificate is not None:
        cert = getattr(res.certificate, "choi", res.certificate)
        cert = np.asarray(cert)
        row["certificate"] = (cert.real.tolist() if np.allclose(cert.imag, 0)
                              else [[[z.real, z.imag] for z in r] for r in cert.tolist()])
    return (EXIT_OK if res.status == "optimal" else EXIT_SOLVER), [row]


def cmd_verify(cfg: RunConfig, families: list[str], max_n: int, check_tol: float):
    unknown = [f for f in families if f not in G.FAMILIES]
    if unknown:
        raise InputError(f"unknown families {unknown}; choose from {sorted(G.FAMILIES)}")
    if max_n > 8:
        raise InputError("--max-n is capped at 8 for the verification suite")
    rows = reports.verify_suite(families, max_n, check_tol, cfg.solver_options())
    return (EXIT_OK if all(r["passed"] for r in rows) else EXIT_CHECK), rows


def cmd_counterexamples(cfg: RunConfig, only: list[int] | None, form: str):
    if only and any(i not in range(1, 6) for i in only):
        raise InputError("--only takes items 1..5")
    rows = reports.counterexample_suite(cfg.solver_options(), only)
    ok = True
    for r in rows:
        sig = r["significant"]
        if r["item"] == 3 and form == "squared":
            sig = r["significant_squared_form"]
        r["counts_as_counterexample"] = bool(sig)
        ok = ok and sig and r["matches_paper"]
    return (EXIT_OK if ok else EXIT_CHECK), rows


def cmd_explore(name: str, cfg: RunConfig, max_n: int, quad: bool):
    opts = cfg.solver_options()
    if name == "cycles":
        if not 3 <= max_n <= 12:
            raise InputError("--max-n must lie in 3..12 for cycles")
        return EXIT_OK, reports.explore_cycles(max_n, quad, opts)
    return EXIT_OK, reports.explore_supermultiplicativity(opts)


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", dest="output_format", choices=("table", "json", "csv"),
                   default="table")
    p.add_argument("--output-path")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                   help=f"random seed (default {DEFAULT_SEED})")
    p.add_argument("--tol-gap", type=float, help="relative gap tolerance; overrides QG_TOL_GAP")
    p.add_argument("--tol-feas", type=float, help="feasibility tolerance")
    p.add_argument("--max-iter", type=int, help="interior-point iteration limit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qgraph", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariant", help="compute one invariant of a graph or system")
    p.add_argument("name", choices=INVARIANTS)
    p.add_argument("graph", nargs="?", help="family spec (path:5, ~cycle:7, path:3xpath:3) "
                   "or an edge-list file")
    p.add_argument("--system", help="matricial system JSON file")
    p.add_argument("--minus-edge", help="delete edge i,j (1-based) from the graph")
    p.add_argument("--certificate", action="store_true", help="include the optimizer")
    _common(p)

    p = sub.add_parser("verify", help="run the inequality checks over graph families")
    p.add_argument("--families", default=",".join(reports.DEFAULT_FAMILIES))
    p.add_argument("--max-n", type=int, default=8)
    p.add_argument("--check-tol", type=float, default=reports.CHECK_TOL)
    _common(p)

    p = sub.add_parser("counterexamples", help="reproduce the five counterexamples")
    p.add_argument("--only", help="comma-separated item numbers")
    p.add_argument("--form", choices=EPIGRAPH_FORMS, default="norm",
                   help="epigraph used when judging item 3")
    _common(p)

    p = sub.add_parser("explore", help="tabulate open-question quantities")
    p.add_argument("name", choices=("cycles", "supermultiplicativity"))
    p.add_argument("--max-n", type=int, default=9)
    p.add_argument("--quad", action="store_true", help="add phi_quad of the cycle complement")
    _common(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    notes: list[str] = []
    try:
        cfg = RunConfig(args.command, getattr(args, "graph", None), getattr(args, "system", None),
                        args.tol_gap, args.tol_feas, args.output_format, args.seed,
                        args.output_path, args.max_iter)
        np.random.seed(cfg.seed % 2**32)
        if args.command == "invariant":
            code, rows = cmd_invariant(args.name, cfg, args.minus_edge, args.certificate)
        elif args.command == "verify":
            fams = [f.strip() for f in args.families.split(",") if f.strip()]
            code, rows = cmd_verify(cfg, fams, args.max_n, args.check_tol)
        elif args.command == "counterexamples":
            try:
                only = [int(t) for t in args.only.split(",")] if args.only else None
            except ValueError:
                raise InputError(f"bad --only {args.only!r}") from None
            code, rows = cmd_counterexamples(cfg, only, args.form)
            if cfg.output_format == "csv":
                rows = [_flatten_counterexample(r) for r in rows]
            elif cfg.output_format == "table":
                notes = [f"item {r['item']}: {r['note']}" for r in rows if r["note"]]
                rows = [_summarize_counterexample(r) for r in rows]
        else:
            code, rows = cmd_explore(args.name, cfg, args.max_n, args.quad)
    except (InputError, InvalidSystemError, DimensionError, CapabilityError) as exc:
        print(f"qgraph: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverFailure, SdpNumericalError) as exc:
        print(f"qgraph: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    meta = {"command": args.command, "seed": cfg.seed, "exit_code": code}
    text = render(rows, cfg.output_format, meta)
    if args.command == "counterexamples" and cfg.output_format == "table" and notes:
        text += "\n" + "\n".join(notes) + "\n"
    _emit(text, cfg)
    if code == EXIT_CHECK:
        failed = [f"{r['check']}[{r['input']}]" if "check" in r else f"item {r.get('item')}"
                  for r in rows
                  if not r.get("passed", r.get("counts_as_counterexample", True))]
        print(f"qgraph: failed: {', '.join(failed)}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
