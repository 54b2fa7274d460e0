"""Command-line entry point: ``matchlab <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Optional

from . import adversary, balance, combinatorics, graph, pricing, ranking, verify

SCHEMA = "matchlab/1"


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--exact", action="store_true", help="force exact rational arithmetic")
    p.add_argument("--threads", type=int, default=None, help="worker cap (fallback: MATCHLAB_THREADS)")
    p.add_argument("--graph", default=None, help="graph fixture in matchlab JSON format")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="matchlab", description="Online bipartite matching experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    tables = sub.add_parser("tables", help="exact integer tables")
    tsub = tables.add_subparsers(dest="table", required=True)
    for name, desc in (("d", "d(n,i) triangle with a(n) row sums"), ("a", "a(n)"),
                       ("derangements", "n, n!, d(n), a(n)")):
        t = tsub.add_parser(name, parents=[common], help=desc)
        t.add_argument("--n-max", type=int, required=True)

    rho = sub.add_parser("rho", parents=[common], help="exact expected Ranking size on MonotoneG(n)")
    rho.add_argument("--n", type=int, required=True)

    rk = sub.add_parser("ranking", help="Ranking algorithm")
    rsub = rk.add_subparsers(dest="mode", required=True)
    r_exact = rsub.add_parser("exact", parents=[common])
    r_exact.add_argument("--n", type=int, required=True)
    r_mc = rsub.add_parser("mc", parents=[common])
    r_mc.add_argument("--n", type=int, default=None)

    bal = sub.add_parser("balance", help="Balance fractional algorithm")
    bsub = bal.add_subparsers(dest="mode", required=True)
    b_run = bsub.add_parser("run", parents=[common])
    b_run.add_argument("--n", type=int, default=None)
    b_run.add_argument("--trace", action="store_true")
    b_cf = bsub.add_parser("closed-form", parents=[common])
    b_cf.add_argument("--n", type=int, required=True)
    b_avg = bsub.add_parser("averaging", parents=[common])
    b_avg.add_argument("--n", type=int, default=None)

    pr = sub.add_parser("pricing", help="revenue/utility analysis of Ranking")
    psub = pr.add_subparsers(dest="mode", required=True)
    p_mc = psub.add_parser("mc", parents=[common])
    p_mc.add_argument("--n", type=int, default=None)
    p_sl = psub.add_parser("slackness", parents=[common])
    p_sl.add_argument("--n", type=int, required=True)

    adv = sub.add_parser("adversary", parents=[common], help="adaptive adversary vs deterministic greedy")
    adv.add_argument("--n", type=int, required=True)
    adv.add_argument("--alg", choices=("lowest", "highest", "lowest-degree-seen", "ranking-fixed-pi"),
                     default="lowest")

    ver = sub.add_parser("verify", parents=[common], help="run the verification battery")
    ver.add_argument("--n-max", type=int, default=10)
    ver.add_argument("--triangle-fixture", default=None, help="JSON list of d(n,i) rows to check instead")
    return parser


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if not callable(v)}
    if cfg.get("threads") is None and os.environ.get("MATCHLAB_THREADS"):
        cfg["threads"] = int(os.environ["MATCHLAB_THREADS"])
    return cfg


def _load_or_make(args, default_n: Optional[int] = None) -> graph.BipartiteGraph:
    if args.graph:
        return graph.load_graph(args.graph)
    n = args.n if getattr(args, "n", None) is not None else default_n
    if n is None:
        raise UsageError("give --n or --graph")
    return graph.make_monotone_graph(n)


def _csv(header: list, rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, result: dict, csv_header: Optional[list] = None, csv_rows: Optional[list] = None) -> str:
    if args.format == "csv" and csv_header is not None:
        return _csv(csv_header, csv_rows)
    doc = {"schema": SCHEMA, "config": _config(args), "result": verify.json_ready(result)}
    return json.dumps(doc, indent=2) + "\n"


def cmd_tables(args) -> str:
    if args.n_max < 1:
        raise UsageError("--n-max must be at least 1")
    t = combinatorics.d_triangle(args.n_max)
    a = combinatorics.a_row_sums(args.n_max)
    if args.table == "d":
        header = ["n"] + [f"d(n,{i})" for i in range(1, args.n_max + 1)] + ["a(n)"]
        rows = [[n] + list(t.row(n)) + [""] * (args.n_max - n) + [a[n - 1]] for n in range(1, args.n_max + 1)]
        result = {"rows": [list(t.row(n)) for n in range(1, args.n_max + 1)], "a": a}
    elif args.table == "a":
        header = ["n", "a(n)"]
        rows = [[n, a[n - 1]] for n in range(1, args.n_max + 1)]
        result = {"a": a}
    else:
        import math

        header = ["n", "n!", "d(n)", "a(n)"]
        rows = [[n, math.factorial(n), combinatorics.derangements(n), combinatorics.a_exact(n)]
                for n in range(1, args.n_max + 1)]
        result = {"rows": rows}
    return _emit(args, result, header, rows)


def cmd_rho(args) -> str:
    r = combinatorics.rho_ranking_monotone(args.n)
    result = {"n": r.n, "a_n": r.a_n, "rho": r.rho, "nu": r.nu, "nu_bound": r.bound, "within_bound": r.within_bound()}
    row = [r.n, r.a_n, str(r.rho), verify.json_ready(r.nu)]
    return _emit(args, result, ["n", "a_n", "rho", "nu"], [row])


def cmd_ranking(args) -> str:
    if args.mode == "exact":
        total, expectation = ranking.enumerate_ranking_exact(args.n, args.threads)
        result = {"n": args.n, "sum_of_sizes": total, "expectation": expectation,
                  "formula": combinatorics.a_exact(args.n)}
        return _emit(args, result, ["n", "sum_of_sizes", "expectation"], [[args.n, total, str(expectation)]])
    g = _load_or_make(args)
    rep = ranking.ranking_monte_carlo(g, args.trials, args.seed)
    d = rep.to_dict()
    return _emit(args, d, list(d), [list(d.values())])


def cmd_balance(args) -> str:
    if args.mode == "closed-form":
        k, size = balance.balance_monotone_closed_form(args.n, True if args.exact else None)
        return _emit(args, {"n": args.n, "k": k, "size": size}, ["n", "k", "size"], [[args.n, k, str(size)]])
    g = _load_or_make(args)
    if args.mode == "run":
        f, steps = balance.run_balance(g, True if args.exact else None)
        result = {"n": g.n, "size": f.size, "exact": f.exact or not f.weights,
                  "violations": graph.validate_fractional(g, f),
                  "loads_offline": list(f.loads_offline)}
        if args.trace:
            result["steps"] = [{"j": s.j, "budget": s.budget, "threshold": s.threshold,
                                "raised": [[i, w] for i, w in s.raised]} for s in steps]
        return _emit(args, result, ["n", "size"], [[g.n, str(f.size)]])
    tr = balance.averaging_process(g, True if args.exact else None)
    result = {"n": tr.n, "credited": list(tr.credited), "slackness": list(tr.slackness),
              "stop_round": tr.stop_round, "total": tr.total, "balance_size": tr.balance_size}
    return _emit(args, result, ["n", "stop_round", "total", "balance_size"],
                 [[tr.n, tr.stop_round, str(tr.total), str(tr.balance_size)]])


def cmd_pricing(args) -> str:
    if args.mode == "slackness":
        r = pricing.slackness_mc(args.n, args.trials, args.seed)
        return _emit(args, r, list(r), [list(r.values())])
    g = _load_or_make(args)
    perfect = graph.maximum_matching(g)
    if perfect.size != g.n:
        raise UsageError(f"per-edge analysis needs a perfect matching; maximum is {perfect.size} of {g.n}")
    rep = pricing.per_edge_bound_mc(g, perfect, args.trials, args.seed)
    ident = pricing.revenue_utility_identity(g, args.trials, args.seed)
    result = rep.to_dict()
    result["identity_holds"] = ident["holds"]
    rows = [[j, i, rep.means[i - 1], rep.stderrs[i - 1]] for j, i in rep.edges]
    return _emit(args, result, ["online", "offline", "mean", "stderr"], rows)


def cmd_adversary(args) -> str:
    algs = adversary.builtin_algorithms(args.n, args.seed) if args.n >= 1 else {}
    t = adversary.run_adaptive_adversary(algs[args.alg], args.n)
    d = t.to_dict()
    d["algorithm"] = args.alg
    return _emit(args, d, ["n", "algorithm", "matching_size", "max_matching_size"],
                 [[t.n, args.alg, t.size, t.max_matching]])


def cmd_verify(args) -> tuple[str, int]:
    triangle = None
    if args.triangle_fixture:
        with open(args.triangle_fixture) as fh:
            triangle = combinatorics.CountTriangle(tuple(tuple(int(x) for x in row) for row in json.load(fh)))
    scale = verify.Scale(n_max=args.n_max, trials=args.trials, seed=args.seed, threads=args.threads)
    report = verify.run_verification(scale, triangle)
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    return _emit(args, report.to_dict()), report.exit_code


COMMANDS = {
    "tables": cmd_tables,
    "rho": cmd_rho,
    "ranking": cmd_ranking,
    "balance": cmd_balance,
    "pricing": cmd_pricing,
    "adversary": cmd_adversary,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = COMMANDS[args.command](args)
    except (UsageError, graph.GraphError, ranking.EnumerationTooLarge, ValueError, OSError) as exc:
        print(f"matchlab: error: {exc}", file=sys.stderr)
        return 2
    code = 0
    if isinstance(out, tuple):
        out, code = out
    sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
