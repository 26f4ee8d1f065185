"""Global polynomial optimization through the moment hierarchy.

minimize() escalates the relaxation order until flat truncation certifies
global minimizers, an infeasibility ray proves the problem infeasible, or
the order cap is reached.  Two practical fallbacks keep the surrounding
semi-infinite loop moving when the relaxation optimum sits on a continuum
(no atomic representing measure, so flat truncation cannot hold):

* a deterministic tiny linear perturbation of the objective, which breaks
  the optimal face to a vertex and usually restores flatness;
* the first-moment (mean) point of the returned pseudo-moment sequence.

The reported value is always the unperturbed relaxation optimum, which is
a certified lower bound; fallback points are labeled as such.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .momentsos import (
    ExtractionFailure,
    FlatResult,
    Pop,
    Tms,
    atomic_residual,
    check_flat_truncation,
    extract_minimizers,
    solve_moment_relaxation,
)
from .poly import Polynomial, basis_size
from .sdp import SdpOptions

STATUS_POP_OPTIMAL = "optimal"
STATUS_POP_INFEASIBLE = "infeasible"
STATUS_POP_UNBOUNDED = "unbounded_suspected"
STATUS_POP_ORDER_CAP = "order_cap_reached"


class PopNumericalError(Exception):
    pass


@dataclass
class PopOptions:
    k_min: Optional[int] = None
    k_max: Optional[int] = None
    extra_orders: int = 3  # default cap: d0 + 3
    rank_tol: float = 1e-6
    feas_tol: float = 1e-6
    extraction_tol: float = 1e-4
    var_scale: Optional[Sequence[float]] = None
    perturb_for_point: bool = True
    # relaxations feed minimizer extraction and feasibility decisions, so
    # they run at tighter tolerances than the solver's general default
    sdp: SdpOptions = field(default_factory=lambda: SdpOptions(tol_gap=1e-10, tol_feas=1e-10))


@dataclass
class PopResult:
    status: str
    value: float = np.nan
    minimizers: list[np.ndarray] = field(default_factory=list)
    order_used: int = -1
    flat: FlatResult = field(default_factory=lambda: FlatResult(False))
    tms: Optional[Tms] = None
    bounds_log: list[tuple[int, float]] = field(default_factory=list)
    fallback: Optional[str] = None  # None | perturbed | mean
    certificate_quality: float = np.inf


def check_membership(
    point: Sequence[float], pop: Pop, feas_tol: float = 1e-6
) -> tuple[bool, float]:
    """Feasibility of a point: equalities within feas_tol, inequalities
    above -feas_tol, after normalizing each constraint to unit max
    coefficient.  Returns (feasible, worst_violation)."""
    point = list(point)
    worst = 0.0
    for p in pop.eq_constraints:
        scale = max(p.max_coeff(), 1.0)
        worst = max(worst, abs(p.eval(point)) / scale)
    for p in pop.ineq_constraints:
        scale = max(p.max_coeff(), 1.0)
        worst = max(worst, max(0.0, -p.eval(point)) / scale)
    return worst <= feas_tol, worst


def _normalized(pop: Pop) -> Pop:
    def norm(p: Polynomial) -> Polynomial:
        c = p.max_coeff()
        return p.scale(1.0 / c) if c > 0 else p

    return Pop(
        pop.nvars,
        pop.objective,
        [norm(p) for p in pop.eq_constraints],
        [norm(p) for p in pop.ineq_constraints],
    )


def _scaled(pop: Pop, scale: Sequence[float]) -> Pop:
    shifts = [0.0] * pop.nvars

    def s(p: Polynomial) -> Polynomial:
        return p.compose_affine(scale, shifts)

    return Pop(
        pop.nvars,
        s(pop.objective),
        [s(p) for p in pop.eq_constraints],
        [s(p) for p in pop.ineq_constraints],
    )


def _certified_points(
    pop_solve: Pop,
    pop_orig: Pop,
    tms: Tms,
    d0: int,
    k: int,
    bound: float,
    scale: np.ndarray,
    opts: PopOptions,
) -> tuple[Optional[list[np.ndarray]], FlatResult]:
    flat = check_flat_truncation(tms, d0, k, opts.rank_tol)
    if not flat.flat:
        return None, flat
    try:
        pts_scaled = extract_minimizers(tms, flat.t, flat.rank, opts.rank_tol)
    except ExtractionFailure:
        return None, flat
    if atomic_residual(tms, flat.t, pts_scaled) > opts.extraction_tol:
        return None, flat
    pts = [p * scale for p in pts_scaled]
    fscale = 1.0 + abs(bound)
    good = []
    for p in pts:
        ok, _ = check_membership(p, pop_orig, max(opts.feas_tol, 1e-5))
        if ok and abs(pop_orig.objective.eval(list(p)) - bound) <= 1e-5 * fscale + 1e-7:
            good.append(p)
    if not good:
        return None, flat
    return good, flat


def _point_certifies(
    p: np.ndarray, pop_orig: Pop, bound: float, opts: PopOptions
) -> bool:
    """A feasible point achieving the lower bound is a global minimizer,
    flat truncation or not.  Both tolerances are kept tight: an
    eps-infeasible point can undercut an eps-loose bound, so loose
    thresholds here would certify wrong points at loose orders."""
    ok, _ = check_membership(p, pop_orig, opts.feas_tol)
    if not ok:
        return False
    fscale = 1.0 + abs(bound)
    return abs(pop_orig.objective.eval(list(p)) - bound) <= 1e-6 * fscale + 1e-9


def _perturbed_points(
    pop_solve: Pop,
    k: int,
    eps: float,
    opts: PopOptions,
) -> Optional[list[np.ndarray]]:
    """Solve with a deterministic linear perturbation of size eps to break
    a flat optimal face to a vertex; returns extracted scaled points.

    The perturbation must dominate the SDP gap tolerance or the returned
    pseudo-moments stay contaminated by the rest of the face and flat
    truncation keeps failing; callers stage eps upward.
    """
    rng = np.random.default_rng(20240613)
    delta = eps * (0.5 + rng.random(pop_solve.nvars))
    f_pert = pop_solve.objective
    for i in range(pop_solve.nvars):
        f_pert = f_pert + Polynomial.variable(i, pop_solve.nvars).scale(delta[i])
    pop_pert = Pop(
        pop_solve.nvars, f_pert, pop_solve.eq_constraints, pop_solve.ineq_constraints
    )
    pert_opts = SdpOptions(
        tol_gap=max(opts.sdp.tol_gap, 1e-8),
        tol_feas=max(opts.sdp.tol_feas, 1e-8),
        max_iter=min(opts.sdp.max_iter, 80),
    )
    res = solve_moment_relaxation(pop_pert, k, pert_opts)
    if res.kind != "bound":
        return None
    flat = check_flat_truncation(res.tms, pop_pert.min_order(), k, opts.rank_tol)
    if not flat.flat:
        return None
    try:
        return extract_minimizers(res.tms, flat.t, flat.rank, opts.rank_tol)
    except ExtractionFailure:
        return None


_PERTURB_STAGES = (1e-3, 3e-2)


def minimize(pop: Pop, opts: PopOptions | None = None) -> PopResult:
    """Drive the moment hierarchy for one polynomial program."""
    opts = opts or PopOptions()
    scale = (
        np.asarray(opts.var_scale, dtype=float)
        if opts.var_scale is not None
        else np.ones(pop.nvars)
    )
    if len(scale) != pop.nvars:
        raise ValueError("var_scale length mismatch")
    pop_solve = _normalized(_scaled(pop, scale) if opts.var_scale is not None else pop)

    d0 = pop_solve.min_order()
    k_min = max(opts.k_min or d0, d0)
    k_max = opts.k_max if opts.k_max is not None else d0 + opts.extra_orders
    k_max = max(k_max, k_min)

    bounds_log: list[tuple[int, float]] = []
    last_bound = None  # (k, value, tms)
    loose_candidate = None  # (gap_to_bound, points, tag, k)
    saw_no_bound = False

    for k in range(k_min, k_max + 1):
        res = solve_moment_relaxation(pop_solve, k, opts.sdp)
        if res.kind == "infeasible":
            return PopResult(
                status=STATUS_POP_INFEASIBLE,
                order_used=k,
                bounds_log=bounds_log,
                certificate_quality=res.certificate_quality,
            )
        if res.kind == "no_bound":
            saw_no_bound = True
            continue
        if res.kind == "failure":
            continue
        bound = res.value
        bounds_log.append((k, bound))
        last_bound = (k, bound, res.tms)
        points, flat = _certified_points(
            pop_solve, pop, res.tms, d0, k, bound, scale, opts
        )
        if points is not None:
            return PopResult(
                status=STATUS_POP_OPTIMAL,
                value=bound,
                minimizers=points,
                order_used=k,
                flat=flat,
                tms=res.tms,
                bounds_log=bounds_log,
            )
        # flat truncation failed: the optimum may sit on a continuum.  A
        # feasible point achieving the bound certifies optimality anyway.
        mean_pt = res.tms.first_moments() * scale
        mean_ok, _ = check_membership(mean_pt, pop, max(opts.feas_tol, 1e-5))
        mean_gap = pop.objective.eval(list(mean_pt)) - bound
        # perturbed re-solves are only worth their cost when the bound
        # looks attained (the mean nearly certifies) or escalation is over
        try_perturbed = (k == k_max) or (
            mean_ok and abs(mean_gap) <= 1e-3 * (1.0 + abs(bound))
        )
        candidates: list[tuple[str, list[np.ndarray]]] = [("mean", [mean_pt])]
        for tag, pts_all in _iter_point_candidates(
            candidates, pop_solve, k, scale, opts, try_perturbed
        ):
            certified = [p for p in pts_all if _point_certifies(p, pop, bound, opts)]
            if certified:
                return PopResult(
                    status=STATUS_POP_OPTIMAL,
                    value=bound,
                    minimizers=certified,
                    order_used=k,
                    tms=res.tms,
                    bounds_log=bounds_log,
                    fallback=tag,
                )
            for p in pts_all:
                ok, _ = check_membership(p, pop, max(opts.feas_tol, 1e-5))
                if not ok:
                    continue
                gap = pop.objective.eval(list(p)) - bound
                if loose_candidate is None or gap < loose_candidate[0]:
                    loose_candidate = (gap, [p], tag, k)

    if last_bound is None:
        if saw_no_bound:
            # no SOS bound at any order: unbounded below is the suspicion
            return PopResult(status=STATUS_POP_UNBOUNDED, bounds_log=bounds_log)
        raise PopNumericalError("every relaxation order failed numerically")

    k, bound, tms = last_bound
    if loose_candidate is not None:
        _, pts, tag, k_used = loose_candidate
        return PopResult(
            status=STATUS_POP_ORDER_CAP,
            value=bound,
            minimizers=pts,
            order_used=k_used,
            tms=tms,
            bounds_log=bounds_log,
            fallback=tag,
        )
    return PopResult(
        status=STATUS_POP_ORDER_CAP,
        value=bound,
        minimizers=[tms.first_moments() * scale],
        order_used=k,
        tms=tms,
        bounds_log=bounds_log,
        fallback="mean",
    )


def _iter_point_candidates(seeded, pop_solve, k, scale, opts, try_perturbed=True):
    """Yield (tag, points) candidates lazily: the mean point first, then
    perturbed-vertex extractions with growing perturbation size."""
    for tag, pts in seeded:
        yield tag, pts
    if not opts.perturb_for_point or not try_perturbed:
        return
    stages = _PERTURB_STAGES
    if basis_size(pop_solve.nvars, 2 * k) > 1500:
        stages = _PERTURB_STAGES[-1:]  # big relaxations: one retry only
    for eps in stages:
        pts_scaled = _perturbed_points(pop_solve, k, eps, opts)
        if pts_scaled:
            yield f"perturbed[{eps:g}]", [p * scale for p in pts_scaled]


def moment_feasibility(
    constraints_eq: list[Polynomial],
    constraints_ineq: list[Polynomial],
    nvars: int,
    order: int | None = None,
    var_scale: Optional[Sequence[float]] = None,
    sdp_opts: SdpOptions | None = None,
) -> str:
    """Order-d0 emptiness test for a semialgebraic set.

    Returns "empty" only on a verified infeasibility ray (conclusive),
    "feasible" when the relaxation admits a pseudo-moment vector (which is
    only evidence of nonemptiness), "unknown" on numerical failure.
    """
    pop = Pop(nvars, Polynomial.zero(nvars), constraints_eq, constraints_ineq)
    scale = np.asarray(var_scale, dtype=float) if var_scale is not None else None
    pop_solve = _normalized(_scaled(pop, scale) if scale is not None else pop)
    k = order if order is not None else pop_solve.min_order()
    res = solve_moment_relaxation(pop_solve, k, sdp_opts)
    if res.kind == "infeasible":
        return "empty"
    if res.kind == "bound":
        return "feasible"
    return "unknown"
