"""Command-line front end.

Subcommands: check (run an analysis and print table + verdict), table
(per-bound reachability deltas), fcr (per-thread finiteness evidence), approx
(the finite overapproximation and generator sets).  Exit codes: 0 safe,
1 unsafe, 2 inconclusive or partial output, 3 bad input.
"""

import argparse
import csv
import json
import os
import sys
import time

from . import approx, engine, explicit, symbolic, textfmt
from .automata import initial_psa, post_star, to_dot
from .engine import Budgets, Inconclusive, SafeConverged, Unsafe
from .model import format_state, format_visible, state_key, visible_key
from .textfmt import ParseError, ValidationError

SCHEMA_VERSION = 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cpdsv",
        description="Safety verification for concurrent pushdown systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="system description")
        p.add_argument("--max-k", type=int, default=20,
                       help="context-bound cap (default 20)")
        p.add_argument("--closure-budget", type=int, default=10 ** 6,
                       help="states per context closure (default 1000000)")
        p.add_argument("--layer-budget", type=int, default=10 ** 4,
                       help="symbolic states per layer (default 10000)")
        p.add_argument("--timeout", type=float, default=1800.0,
                       help="wall-clock seconds (default 1800)")

    p = sub.add_parser("check", help="verify the bad-state property")
    common(p)
    p.add_argument("--method", choices=["cuba", "alg3", "scheme1"],
                   default="cuba")
    p.add_argument("--backend", choices=["auto", "explicit", "symbolic"],
                   default="auto")
    p.add_argument("--json", metavar="PATH", help="write the report as JSON")
    p.add_argument("--report", metavar="DIR",
                   help="write report.csv and growth.png into DIR")
    p.add_argument("--quiet", action="store_true",
                   help="print only the verdict line")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("table", help="print per-bound reachability deltas")
    common(p)
    p.add_argument("--visible-only", action="store_true",
                   help="only visible-state deltas (symbolic when needed)")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("fcr", help="check finite context reachability")
    common(p)
    p.add_argument("--dump-automata", metavar="DIR",
                   help="write each thread's saturated automaton as DOT")
    p.set_defaults(func=cmd_fcr)

    p = sub.add_parser("approx", help="print the finite overapproximation")
    common(p)
    p.set_defaults(func=cmd_approx)
    return parser


def budgets_from(args):
    return Budgets(args.max_k, args.closure_budget, args.layer_budget,
                   args.timeout)


def _psa_state_name(state):
    """Compact rendering for store-automaton states in cycle witnesses."""
    if hasattr(state, "name"):
        return state.name
    if isinstance(state, tuple) and len(state) == 3 and state[0] == "push":
        return "push(%s,%s)" % (state[1].name, state[2].name)
    return str(state)


def _visible_names(items):
    return [format_visible(v) for v in sorted(items, key=visible_key)]


def _state_names(items):
    return [format_state(s) for s in sorted(items, key=state_key)]


def explicit_rows(cpds, max_k, budget):
    """(rows, exhausted): per-k state and visible delta names."""
    table = explicit.build_table(cpds, max_k, budget)
    rows = []
    for layer, vis in zip(table.layers, table.visible_deltas):
        rows.append({"k": layer.k,
                     "new_states": _state_names(layer.delta),
                     "new_visible": _visible_names(vis)})
    return rows, table.exhausted


def symbolic_rows(cpds, max_k):
    """Per-k visible delta names from the symbolic layers (no state names)."""
    layer = symbolic.initial_symbolic_layer(cpds)
    seen = set(layer.tops)
    rows = [{"k": 0, "new_states": None,
             "new_visible": _visible_names(layer.tops)}]
    for k in range(1, max_k + 1):
        layer = symbolic.next_symbolic_layer(cpds, layer)
        fresh = layer.tops - seen
        seen |= fresh
        rows.append({"k": k, "new_states": None,
                     "new_visible": _visible_names(fresh)})
    return rows


def verdict_json(verdict):
    if isinstance(verdict, Unsafe):
        path = None
        if verdict.path is not None:
            path = ["thread %d: %s" % (s.thread + 1, s.action)
                    for s in verdict.path.steps]
        return {"kind": "unsafe", "k": verdict.k,
                "witness": format_visible(verdict.witness), "path": path}
    if isinstance(verdict, SafeConverged):
        return {"kind": "safe", "k": verdict.k, "method": verdict.method}
    return {"kind": "inconclusive", "reason": verdict.reason,
            "progress": verdict.progress}


def verdict_line(verdict):
    if isinstance(verdict, Unsafe):
        return ("verdict: error reachable with resource amount %d (witness %s)"
                % (verdict.k, format_visible(verdict.witness)))
    if isinstance(verdict, SafeConverged):
        return ("verdict: safe for any resource amount (converged at k=%d, %s)"
                % (verdict.k, verdict.method))
    return ("verdict: inconclusive (%s, last completed k=%d)"
            % (verdict.reason, verdict.progress))


def exit_code(verdict):
    if isinstance(verdict, SafeConverged):
        return 0
    if isinstance(verdict, Unsafe):
        return 1
    return 2


def peak_memory_kb():
    try:
        import resource
        return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    except (ImportError, ValueError):
        return None


def render_report(report):
    """Human-readable text for a report dict; pure, snapshot-testable."""
    lines = []
    lines.append("input: %s" % report["input"])
    lines.append("method: %s  backend: %s" % (report["method"], report["backend"]))
    fcr = report["fcr"]
    looped = [str(i + 1) for i, c in enumerate(fcr["cycles"]) if c]
    note = "" if fcr["holds"] else "  (loops in thread %s)" % ", ".join(looped)
    lines.append("finite context reachability: %s%s"
                 % ("yes" if fcr["holds"] else "no", note))
    lines.append("overapproximation: |Z| = %d, reachable generators <= %d"
                 % (report["approx"]["z_size"],
                    report["approx"]["generators_reachable"]))
    if report["table"]:
        lines.append("")
        lines.append("  k | new global states | new visible states")
        for row in report["table"]:
            states = "-" if row["new_states"] is None else " ".join(row["new_states"])
            lines.append("%3d | %s | %s"
                         % (row["k"], states or "(none)",
                            " ".join(row["new_visible"]) or "(none)"))
        lines.append("")
    lines.append(report["verdict_line"])
    return "\n".join(lines)


def write_report_files(report, directory):
    """CSV of the per-k table plus a growth figure, side by side."""
    os.makedirs(directory, exist_ok=True)
    rows = report["table"]
    csv_path = os.path.join(directory, "report.csv")
    with open(csv_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["k", "new_states", "new_visible",
                         "total_states", "total_visible", "new_visible_names"])
        total_states = 0
        total_visible = 0
        for row in rows:
            new_states = len(row["new_states"]) if row["new_states"] is not None else ""
            if new_states != "":
                total_states += new_states
            total_visible += len(row["new_visible"])
            writer.writerow([row["k"], new_states, len(row["new_visible"]),
                             total_states if new_states != "" else "",
                             total_visible, " ".join(row["new_visible"])])
    png_path = os.path.join(directory, "growth.png")
    _plot_growth(rows, report["verdict_line"], png_path)
    return csv_path, png_path


def _plot_growth(rows, title, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ks = [row["k"] for row in rows]
    vis = []
    states = []
    tv = ts = 0
    track_states = rows and rows[0]["new_states"] is not None
    for row in rows:
        tv += len(row["new_visible"])
        vis.append(tv)
        if track_states:
            ts += len(row["new_states"])
            states.append(ts)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, vis, marker="o", label="visible states")
    if track_states:
        ax.plot(ks, states, marker="s", label="global states")
    ax.set_xlabel("context bound k")
    ax.set_ylabel("reachable (cumulative)")
    ax.set_title(title, fontsize=9)
    ax.legend(loc="lower right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_check(cpds, prop, args):
    t0 = time.perf_counter()
    budgets = budgets_from(args)
    fcr = engine.fcr_check(cpds)
    t_fcr = time.perf_counter()

    backend = args.backend
    if backend == "auto":
        backend = "explicit" if fcr.holds else "symbolic"
    if args.method == "cuba":
        verdict = engine.cuba(cpds, prop, budgets)
    elif args.method == "alg3":
        verdict = engine.alg3(cpds, prop, backend, budgets)
    else:
        verdict = engine.scheme1(cpds, prop, backend, budgets)
    t_analysis = time.perf_counter()

    if isinstance(verdict, Unsafe):
        table_k = verdict.k
    elif isinstance(verdict, SafeConverged):
        table_k = verdict.k + 1
    else:
        table_k = verdict.progress
    table_k = min(table_k, budgets.max_k)
    if fcr.holds:
        rows, _ = explicit_rows(cpds, table_k, budgets.closure_budget)
    else:
        rows = symbolic_rows(cpds, table_k)
    t_table = time.perf_counter()

    report = {
        "schema": SCHEMA_VERSION,
        "command": "check",
        "input": args.file,
        "method": args.method,
        "backend": backend if args.method != "cuba" else "auto",
        "budgets": {"max_k": budgets.max_k,
                    "closure_budget": budgets.closure_budget,
                    "layer_budget": budgets.layer_budget,
                    "timeout": budgets.timeout},
        "fcr": {"holds": fcr.holds,
                "cycles": [[_psa_state_name(x) for x in c] if c else None
                           for c in fcr.cycles]},
        "approx": {"z_size": len(approx.compute_Z(cpds)),
                   "generators_reachable": len(approx.reachable_generators_upper(cpds))},
        "table": rows,
        "verdict": verdict_json(verdict),
        "verdict_line": verdict_line(verdict),
        "timings": {"fcr": round(t_fcr - t0, 6),
                    "analysis": round(t_analysis - t_fcr, 6),
                    "table": round(t_table - t_analysis, 6),
                    "total": round(time.perf_counter() - t0, 6)},
        "memory_peak_kb": peak_memory_kb(),
    }
    if args.json:
        with open(args.json, "w") as handle:
            json.dump(report, handle, indent=2, sort_keys=True)
            handle.write("\n")
    if args.report:
        write_report_files(report, args.report)
    if args.quiet:
        print(report["verdict_line"])
    else:
        print(render_report(report))
    return exit_code(verdict)


def cmd_table(cpds, prop, args):
    budgets = budgets_from(args)
    exhausted = False
    if args.visible_only and not engine.fcr_check(cpds).holds:
        rows = symbolic_rows(cpds, args.max_k)
    else:
        rows, exhausted = explicit_rows(cpds, args.max_k,
                                        budgets.closure_budget)
    header = "  k | new visible states" if args.visible_only else \
        "  k | new global states | new visible states"
    print(header)
    for row in rows:
        visible_text = " ".join(row["new_visible"]) or "(none)"
        if args.visible_only:
            print("%3d | %s" % (row["k"], visible_text))
        else:
            states = "-" if row["new_states"] is None else \
                (" ".join(row["new_states"]) or "(none)")
            print("%3d | %s | %s" % (row["k"], states, visible_text))
    if exhausted:
        print("table truncated: context closure exceeded %d states"
              % budgets.closure_budget)
        return 2
    return 0


def cmd_fcr(cpds, prop, args):
    result = engine.fcr_check(cpds)
    print("FCR: %s" % ("yes" if result.holds else "no"))
    for i, cycle in enumerate(result.cycles):
        if cycle is None:
            print("thread %d: loop-free" % (i + 1))
        else:
            print("thread %d: cycle %s"
                  % (i + 1, " -> ".join(_psa_state_name(x) for x in cycle)))
    if args.dump_automata:
        os.makedirs(args.dump_automata, exist_ok=True)
        for i, pds in enumerate(cpds.threads):
            saturated, _ = post_star(pds, initial_psa(pds))
            path = os.path.join(args.dump_automata, "thread%d.dot" % (i + 1))
            with open(path, "w") as handle:
                handle.write(to_dot(saturated, "thread%d" % (i + 1)))
                handle.write("\n")
    return 0


def cmd_approx(cpds, prop, args):
    z = approx.compute_Z(cpds)
    spec = approx.generator_spec(cpds)
    print("Z (%d): %s" % (len(z), " ".join(_visible_names(z))))
    for i in range(len(cpds.threads)):
        targets = " ".join(q.name for q in sorted(spec.pop_targets[i], key=lambda q: q.index)) or "(none)"
        emerging = " ".join(s.name for s in sorted(spec.emerging[i], key=lambda s: s.index)) or "(none)"
        print("thread %d: pop targets: %s; emerging: %s" % (i + 1, targets, emerging))
    generators = approx.enumerate_generators(cpds, spec)
    print("G (%d): %s" % (len(generators), " ".join(format_visible(v) for v in generators)))
    reachable = approx.reachable_generators_upper(cpds)
    print("G and Z (%d): %s" % (len(reachable), " ".join(_visible_names(reachable))))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cpds, prop = textfmt.parse_file(args.file)
    except OSError as err:
        print("error: %s" % err, file=sys.stderr)
        return 3
    except ParseError as err:
        print("parse error: %s" % err, file=sys.stderr)
        return 3
    except ValidationError as err:
        for diag in err.diagnostics:
            print("invalid system: %s" % diag, file=sys.stderr)
        return 3
    return args.func(cpds, prop, args)


if __name__ == "__main__":
    sys.exit(main())
