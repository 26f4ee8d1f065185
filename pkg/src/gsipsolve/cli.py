"""Command-line driver: run one instance or benchmark a suite."""

from __future__ import annotations

import argparse
import sys
import time
from typing import Optional

import numpy as np

from . import corpus
from .convexkkt import build_kkt_pop, build_lme_pop
from .gsip import (
    STATUS_GSIP_INFEASIBLE,
    STATUS_GSIP_OPTIMAL,
    GsipOptions,
    solve_gsip,
)
from .popsolve import STATUS_POP_OPTIMAL, PopOptions, minimize
from .problemfile import parse_problem, print_problem, to_convex, to_gsip
from .report import BenchReport, BenchRow, RunReport, TraceRow


def _options_from_args(args) -> GsipOptions:
    pop = PopOptions()
    if getattr(args, "order_cap", None) is not None:
        pop.extra_orders = args.order_cap
    if getattr(args, "rank_tol", None) is not None:
        pop.rank_tol = args.rank_tol
    opts = GsipOptions(pop=pop)
    if getattr(args, "eps", None) is not None:
        opts.eps = args.eps
    if getattr(args, "max_loops", None) is not None:
        opts.max_loops = args.max_loops
    return opts


def run_text(text: str, opts: GsipOptions | None = None, case: Optional[str] = None) -> RunReport:
    """Parse and solve one problem definition."""
    pf = parse_problem(text)
    opts = opts or GsipOptions()
    t0 = time.perf_counter()
    if pf.mode == "gsip":
        prob = to_gsip(pf, case=case)
        res = solve_gsip(prob, opts)
        trace = [
            TraceRow(
                k=r.k,
                xhat=[float(v) for v in r.xhat],
                uhat=None if r.u_sel is None else [float(v) for v in r.u_sel],
                f_k=float(r.f_k),
                g_k=float(r.g_k),
            )
            for r in res.trace
        ]
        if res.status == STATUS_GSIP_INFEASIBLE:
            trace.append(
                TraceRow(
                    k=len(res.trace),
                    xhat=[],
                    uhat=None,
                    f_k=float("nan"),
                    g_k=float("nan"),
                    note="moment relaxation is infeasible",
                )
            )
        return RunReport(
            instance=pf.name or "<anonymous>",
            mode=pf.mode,
            status=res.status,
            f_star=None if res.x_star is None else float(res.f_star),
            x_star=None if res.x_star is None else [float(v) for v in res.x_star],
            g_star=None if res.x_star is None else float(res.g_star),
            loops=res.loops,
            wall_time=time.perf_counter() - t0,
            trace=trace,
            message=res.message,
        )
    # convex single-shot reformulations
    prob = to_convex(pf, case=case)
    kkt = build_kkt_pop(prob) if pf.mode == "convex_kkt" else build_lme_pop(prob)
    res = minimize(kkt.pop, PopOptions(var_scale=kkt.var_scale, sdp=opts.pop.sdp,
                                       rank_tol=opts.pop.rank_tol))
    status = "optimal" if res.status == STATUS_POP_OPTIMAL else res.status
    x_star = None
    g_star = None
    if res.minimizers:
        x, zs, _ = kkt.split_point(res.minimizers[0])
        x_star = [float(v) for v in x]
        gv = []
        for j, z in enumerate(zs):
            xz = list(x) + list(z)
            gv.append(prob.g[j].num.eval(xz) / prob.g[j].den.eval(xz))
        g_star = float(min(gv)) if gv else None
    trace = [
        TraceRow(
            k=0,
            xhat=x_star or [],
            uhat=None,
            f_k=float(res.value),
            g_k=g_star if g_star is not None else float("nan"),
            note=f"single-shot reformulation, relaxation order {res.order_used}",
        )
    ]
    return RunReport(
        instance=pf.name or "<anonymous>",
        mode=pf.mode,
        status=status,
        f_star=float(res.value),
        x_star=x_star,
        g_star=g_star,
        loops=1,
        wall_time=time.perf_counter() - t0,
        trace=trace,
    )


def run_instance(name_or_path: str, opts: GsipOptions | None = None, case=None) -> RunReport:
    if name_or_path.startswith("corpus:"):
        entry = corpus.get(name_or_path[len("corpus:") :])
        return run_text(entry.text, opts, case)
    if name_or_path in corpus.CORPUS:
        return run_text(corpus.get(name_or_path).text, opts, case)
    with open(name_or_path) as fh:
        return run_text(fh.read(), opts, case)


def _bench_one(entry: corpus.CorpusEntry, opts: GsipOptions) -> BenchRow:
    try:
        rep = run_text(entry.text, opts)
    except Exception as exc:  # a failure is a row, not an abort
        return BenchRow(
            instance=entry.name,
            status="error",
            f_star=None,
            expected_f=entry.expected_f,
            loops=0,
            expected_loops=entry.expected_loops,
            value_ok=False,
            loops_ok=False,
            wall_time=0.0,
            message=str(exc),
        ), None
    if entry.expected_f is None:
        value_ok = rep.status == "infeasible"
    else:
        tol = entry.value_tol
        if abs(entry.expected_f) > 10:
            tol = max(tol, 1e-3 * abs(entry.expected_f))
        value_ok = (
            rep.status == "optimal"
            and rep.f_star is not None
            and abs(rep.f_star - entry.expected_f) <= tol
        )
    loops_ok = abs(rep.loops - entry.expected_loops) <= 2
    return BenchRow(
        instance=entry.name,
        status=rep.status,
        f_star=rep.f_star,
        expected_f=entry.expected_f,
        loops=rep.loops,
        expected_loops=entry.expected_loops,
        value_ok=value_ok,
        loops_ok=loops_ok,
        wall_time=rep.wall_time,
        message=rep.message,
    ), rep


def bench(suite_name: str, include_slow: bool = False, opts: GsipOptions | None = None,
          jobs: int = 1) -> BenchReport:
    entries = corpus.suite(suite_name, include_slow=include_slow)
    opts = opts or GsipOptions()
    report = BenchReport(suite=suite_name)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bench_entry_by_name, [(e.name, opts) for e in entries]))
        for (row, rep), entry in zip(results, entries):
            report.rows.append(row)
            if rep is not None:
                report.reports[entry.name] = rep
    else:
        for entry in entries:
            row, rep = _bench_one(entry, opts)
            report.rows.append(row)
            if rep is not None:
                report.reports[entry.name] = rep
    return report


def _bench_entry_by_name(payload):
    name, opts = payload
    return _bench_one(corpus.get(name), opts)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gsipsolve",
        description="semi-infinite polynomial optimization by extension-based relaxations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="solve one instance (corpus:NAME or a file path)")
    p_run.add_argument("instance")
    p_run.add_argument("--case", default=None)
    p_run.add_argument("--eps", type=float, default=None)
    p_run.add_argument("--max-loops", type=int, default=None)
    p_run.add_argument("--order-cap", type=int, default=None,
                       help="extra relaxation orders past the minimum")
    p_run.add_argument("--rank-tol", type=float, default=None)
    p_run.add_argument("--emit", default=None, help="write the JSON report here")
    p_run.add_argument("--trace", action="store_true", help="print the loop table")

    p_bench = sub.add_parser("bench", help="run a suite against the stored reference values")
    p_bench.add_argument("suite", choices=["sec6", "appendixA", "appendixB", "all"])
    p_bench.add_argument("--slow", action="store_true", help="include slow-tagged instances")
    p_bench.add_argument("--jobs", type=int, default=1)
    p_bench.add_argument("--eps", type=float, default=None)
    p_bench.add_argument("--max-loops", type=int, default=None)
    p_bench.add_argument("--order-cap", type=int, default=None)
    p_bench.add_argument("--rank-tol", type=float, default=None)
    p_bench.add_argument("--emit", default=None)

    p_list = sub.add_parser("list", help="list corpus instances")
    p_print = sub.add_parser("print", help="print an instance in canonical form")
    p_print.add_argument("instance")

    args = parser.parse_args(argv)

    if args.command == "list":
        for suite_name in ("sec6", "appendixA", "appendixB"):
            for e in corpus.suite(suite_name, include_slow=True):
                tag = " [slow]" if e.slow else ""
                expected = "infeasible" if e.expected_f is None else f"f* = {e.expected_f}"
                print(f"{e.name:<24} {suite_name:<10} {expected}{tag}")
        return 0

    if args.command == "print":
        name = args.instance.removeprefix("corpus:")
        print(print_problem(parse_problem(corpus.get(name).text)), end="")
        return 0

    if args.command == "run":
        rep = run_instance(args.instance, _options_from_args(args), case=args.case)
        if args.trace:
            print(rep.to_text())
        else:
            print(
                f"{rep.instance}: {rep.status}"
                + (f", f* = {rep.f_star:.6g}" if rep.f_star is not None else "")
                + f", loops = {rep.loops}, time = {rep.wall_time:.2f}s"
            )
        if args.emit:
            with open(args.emit, "w") as fh:
                fh.write(rep.to_json())
        return 0 if rep.status in ("optimal", "infeasible") else 1

    if args.command == "bench":
        report = bench(
            args.suite, include_slow=args.slow, opts=_options_from_args(args), jobs=args.jobs
        )
        print(report.to_text())
        if args.emit:
            with open(args.emit, "w") as fh:
                fh.write(report.to_json())
        return 0 if report.all_ok else 1

    return 2


if __name__ == "__main__":
    sys.exit(main())
