"""Run reports: per-loop tables in the reference layout plus a
machine-readable emission carrying full precision."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def _fmt_vec(v, digits=4) -> str:
    if v is None:
        return "-"
    return "(" + ", ".join(f"{float(x):.{digits}f}" for x in v) + ")"


def _fmt_val(v, digits=4) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return "-"
    if np.isinf(v):
        return "+inf" if v > 0 else "-inf"
    if v != 0 and abs(v) < 10 ** (-digits):
        return f"{v:.1e}"
    return f"{v:.{digits}f}"


@dataclass
class TraceRow:
    k: int
    xhat: list[float]
    uhat: Optional[list[float]]
    f_k: float
    g_k: float
    note: str = ""


@dataclass
class RunReport:
    instance: str
    mode: str
    status: str
    f_star: Optional[float] = None
    x_star: Optional[list[float]] = None
    g_star: Optional[float] = None
    loops: int = 0
    wall_time: float = 0.0
    trace: list[TraceRow] = field(default_factory=list)
    message: str = ""
    extras: dict = field(default_factory=dict)

    def to_text(self) -> str:
        """Loop table with 4-decimal display, one block per loop."""
        lines = [f"instance {self.instance} [{self.mode}]"]
        width = 66
        lines.append("-" * width)
        lines.append(f"{'k':>3}  {'(x_k, u_k)':<42} function values")
        for row in self.trace:
            lines.append(f"{row.k:>3}  x = {_fmt_vec(row.xhat):<40} f_{row.k} = {_fmt_val(row.f_k)}")
            u_txt = _fmt_vec(row.uhat) if row.uhat is not None else "-"
            lines.append(f"{'':>3}  u = {u_txt:<40} g_{row.k} = {_fmt_val(row.g_k)}")
            if row.note:
                lines.append(f"{'':>3}  {row.note}")
        lines.append("-" * width)
        if self.status == "optimal":
            lines.append(
                f"output: x* = {_fmt_vec(self.x_star)}, f* = {_fmt_val(self.f_star)}, "
                f"g* = {_fmt_val(self.g_star)}"
            )
        elif self.status == "infeasible":
            lines.append("output: the problem is infeasible (certified relaxation ray)")
        else:
            lines.append(f"output: {self.status}" + (f" ({self.message})" if self.message else ""))
        lines.append(f"loops: {self.loops}   time: {self.wall_time:.2f}s")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "mode": self.mode,
            "status": self.status,
            "f_star": self.f_star,
            "x_star": self.x_star,
            "g_star": self.g_star,
            "loops": self.loops,
            "wall_time": self.wall_time,
            "message": self.message,
            "trace": [
                {
                    "k": r.k,
                    "xhat": r.xhat,
                    "uhat": r.uhat,
                    "f_k": r.f_k,
                    "g_k": r.g_k,
                    "note": r.note,
                }
                for r in self.trace
            ],
            **self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=float)


@dataclass
class BenchRow:
    instance: str
    status: str
    f_star: Optional[float]
    expected_f: Optional[float]
    loops: int
    expected_loops: int
    value_ok: bool
    loops_ok: bool
    wall_time: float
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.value_ok and self.loops_ok


@dataclass
class BenchReport:
    suite: str
    rows: list[BenchRow] = field(default_factory=list)
    reports: dict = field(default_factory=dict)

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def to_text(self) -> str:
        head = (
            f"{'instance':<22} {'status':<12} {'f*':>10} {'expected':>10} "
            f"{'loops':>5} {'ref':>4} {'value':>6} {'count':>6} {'time':>8}"
        )
        lines = [f"suite {self.suite}", head, "-" * len(head)]
        for r in self.rows:
            lines.append(
                f"{r.instance:<22} {r.status:<12} {_fmt_val(r.f_star):>10} "
                f"{_fmt_val(r.expected_f):>10} {r.loops:>5} {r.expected_loops:>4} "
                f"{'pass' if r.value_ok else 'FAIL':>6} {'pass' if r.loops_ok else 'FAIL':>6} "
                f"{r.wall_time:>7.2f}s"
            )
        n_ok = sum(r.ok for r in self.rows)
        lines.append("-" * len(head))
        lines.append(f"{n_ok}/{len(self.rows)} instances pass")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(
            {
                "suite": self.suite,
                "rows": [vars(r) for r in self.rows],
                "reports": {k: v.to_dict() for k, v in self.reports.items()},
            },
            indent=2,
            default=float,
        )
