"""The exchange-with-polynomial-extensions loop for GSIPs.

Each loop k minimizes the objective over the current outer relaxation
F_k (a polynomial program solved globally through the moment hierarchy),
checks feasibility of the iterate by solving the lower-level problems
min_u g_j(xhat, u) over U(xhat), and, while some g_j dips below -eps,
tightens F_{k+1} with cuts g_j(x, q_{k,j}(x)) >= 0 built from polynomial
extensions q_{k,j} of the violating lower-level minimizers.

Infeasibility of a relaxation (P_k) certifies infeasibility of the GSIP
because F sits inside every F_k; emptiness of U(xhat) makes the iterate
feasible outright.  Cuts are constructed for every lower-level problem
that produced a minimizer, not only the violated ones: any extension
yields a valid inequality on F, and the extra cuts reproduce the
trajectories of the reference results.

The classical exchange step (constant-u cuts) is kept only to demonstrate
its unsoundness for genuinely x-dependent U(x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .extensions import (
    Extension,
    ExtensionError,
    ExtensionNotFound,
    ball_extension,
    box_extension,
    constant_extension,
    ellipsoid_extension,
    numeric_extension,
    sample_set,
    simplex_extension,
    split_affine_in_u,
    validate_extension,
)
from .momentsos import Pop
from .poly import Polynomial
from .popsolve import (
    STATUS_POP_INFEASIBLE,
    STATUS_POP_OPTIMAL,
    STATUS_POP_ORDER_CAP,
    STATUS_POP_UNBOUNDED,
    PopOptions,
    check_membership,
    minimize,
    moment_feasibility,
)

STATUS_GSIP_OPTIMAL = "optimal"
STATUS_GSIP_INFEASIBLE = "infeasible"
STATUS_GSIP_LOOP_CAP = "loop_cap"
STATUS_GSIP_EXTENSION_FAILURE = "extension_failure"


class GsipError(Exception):
    pass


@dataclass
class ExtensionSpec:
    """How to build polynomial extensions for U(x).

    Closed forms carry their shape data as polynomials in x; `numeric`
    solves the conic feasibility system over the coefficients of q and
    requires every U-constraint to be affine in u.
    """

    kind: str = "auto"  # auto|constant|box|simplex|ball|ellipsoid|numeric
    l: list[Polynomial] = field(default_factory=list)
    w: list[Polynomial] = field(default_factory=list)  # [w] scalar for simplex/ball
    a: list[Polynomial] = field(default_factory=list)
    D: list[list[Polynomial]] = field(default_factory=list)
    degrees: tuple = (2, 4)


@dataclass
class GsipProblem:
    nx: int
    nu: int
    objective: Polynomial  # over nx
    x_eq: list[Polynomial] = field(default_factory=list)
    x_ineq: list[Polynomial] = field(default_factory=list)
    u_eq: list[Polynomial] = field(default_factory=list)  # over nx + nu
    u_ineq: list[Polynomial] = field(default_factory=list)
    g: list[Polynomial] = field(default_factory=list)  # over nx + nu
    extension: ExtensionSpec = field(default_factory=ExtensionSpec)
    x_scale: Optional[list[float]] = None
    u_scale: Optional[list[float]] = None
    sample_lo: Optional[list[float]] = None
    sample_hi: Optional[list[float]] = None
    name: str = ""

    @property
    def s(self) -> int:
        return len(self.g)

    def u_constraints_at(self, xhat) -> tuple[list[Polynomial], list[Polynomial]]:
        """U(xhat) as polynomials in u alone."""
        consts = [Polynomial.constant(self.nu, float(v)) for v in xhat]
        uvars = [Polynomial.variable(i, self.nu) for i in range(self.nu)]
        images = consts + uvars

        def plug(p: Polynomial) -> Polynomial:
            return p.compose(images)

        return [plug(p) for p in self.u_eq], [plug(p) for p in self.u_ineq]

    def g_at(self, j: int, xhat) -> Polynomial:
        consts = [Polynomial.constant(self.nu, float(v)) for v in xhat]
        uvars = [Polynomial.variable(i, self.nu) for i in range(self.nu)]
        return self.g[j].compose(consts + uvars)

    def u_is_constant(self) -> bool:
        return not any(
            p.involves(i) for p in self.u_eq + self.u_ineq for i in range(self.nx)
        )


@dataclass
class IterationRecord:
    k: int
    xhat: np.ndarray
    f_k: float
    g_kj: list[float]
    u_kj: list[Optional[np.ndarray]]
    g_k: float
    N_k: list[int]
    extensions: list[Extension] = field(default_factory=list)
    pop_status: str = ""
    pop_order: int = -1
    all_minimizers: list[np.ndarray] = field(default_factory=list)

    @property
    def u_sel(self) -> Optional[np.ndarray]:
        """The u achieving g_k (the paper's per-loop u-hat column)."""
        if not self.g_kj:
            return None
        j = int(np.argmin(self.g_kj))
        return self.u_kj[j]


@dataclass
class GsipResult:
    status: str
    x_star: Optional[np.ndarray] = None
    f_star: float = np.nan
    g_star: float = np.nan
    trace: list[IterationRecord] = field(default_factory=list)
    added_cuts: list[Polynomial] = field(default_factory=list)
    loops: int = 0
    message: str = ""
    certificate_quality: float = np.inf

    @property
    def optimal(self) -> bool:
        return self.status == STATUS_GSIP_OPTIMAL


@dataclass
class GsipOptions:
    eps: float = 1e-6
    max_loops: int = 30
    pop: PopOptions = field(default_factory=PopOptions)
    upper_pop: Optional[PopOptions] = None  # override for the (P_k) solves
    cut_all: bool = True  # cuts for every j with a minimizer, not just N_k
    classical_exchange: bool = False  # constant-u cuts (unsound for GSIPs)
    validate_cuts: bool = True
    polish: bool = True  # Newton-polish outer iterates on their active set


def _polish_iterate(x, pop: Pop, rounds: int = 4) -> np.ndarray:
    """Sharpen an extracted outer iterate with Lagrange-Newton steps on the
    near-active constraints.

    Extraction precision is capped near the SDP's attainable accuracy
    (1e-7-ish after unscaling), while the feasibility threshold downstream
    is 1e-6; a couple of exact-derivative Newton steps on the active set
    recovers the missing digits.  The step is rejected lazily: callers
    compare feasibility of the polished and raw points.
    """
    x = np.asarray(x, dtype=float).copy()
    n = len(x)
    fobj = pop.objective
    for _ in range(rounds):
        acts: list[Polynomial] = list(pop.eq_constraints)
        for c in pop.ineq_constraints:
            if c.eval(x) <= 1e-4 * max(c.max_coeff(), 1.0):
                acts.append(c)
        gf = np.array([fobj.diff(i).eval(x) for i in range(n)])
        if acts:
            A = np.array([[a.diff(i).eval(x) for i in range(n)] for a in acts])
            r = np.array([a.eval(x) for a in acts])
            lam, *_ = np.linalg.lstsq(A.T, gf, rcond=None)
            H = np.zeros((n, n))
            for i in range(n):
                for j in range(i, n):
                    v = fobj.diff(i).diff(j).eval(x)
                    for lk, a in zip(lam, acts):
                        v -= lk * a.diff(i).diff(j).eval(x)
                    H[i, j] = H[j, i] = v
            m = len(acts)
            KKT = np.zeros((n + m, n + m))
            KKT[:n, :n] = H + 1e-10 * np.eye(n)
            KKT[:n, n:] = -A.T
            KKT[n:, :n] = A
            rhs = np.concatenate([-(gf - A.T @ lam), -r])
            try:
                step = np.linalg.lstsq(KKT, rhs, rcond=None)[0]
            except np.linalg.LinAlgError:
                break
            dx = step[:n]
        else:
            H = np.zeros((n, n))
            for i in range(n):
                for j in range(i, n):
                    H[i, j] = H[j, i] = fobj.diff(i).diff(j).eval(x)
            try:
                dx = -np.linalg.lstsq(H + 1e-10 * np.eye(n), gf, rcond=None)[0]
            except np.linalg.LinAlgError:
                break
        if np.linalg.norm(dx) > 1e-2 * (1.0 + np.linalg.norm(x)):
            break  # not a local correction: keep the extracted point
        x = x + dx
        if np.linalg.norm(dx) < 1e-13 * (1.0 + np.linalg.norm(x)):
            break
    return x


def _pop_options(base: PopOptions, scale) -> PopOptions:
    out = PopOptions(
        k_min=base.k_min,
        k_max=base.k_max,
        extra_orders=base.extra_orders,
        rank_tol=base.rank_tol,
        feas_tol=base.feas_tol,
        extraction_tol=base.extraction_tol,
        var_scale=scale,
        perturb_for_point=base.perturb_for_point,
        sdp=base.sdp,
    )
    return out


def _project_affine_anchor(
    prob: GsipProblem, xhat, uhat, tol: float = 1e-5
) -> np.ndarray:
    """Nudge uhat onto {h(xhat, u) >= 0} for u-affine descriptions; small
    SDP noise otherwise makes the numeric feasibility system inconsistent."""
    u = np.asarray(uhat, dtype=float).copy()
    ueq, uin = prob.u_constraints_at(xhat)
    for _ in range(3):
        rows, rhs = [], []
        for h in ueq:
            val = h.eval(u)
            if abs(val) > 1e-12:
                rows.append([h.diff(i).eval(u) for i in range(prob.nu)])
                rhs.append(-val)
        for h in uin:
            val = h.eval(u)
            if val < 0:
                if val < -tol * max(1.0, h.max_coeff()):
                    raise ExtensionError("anchor violates U(xhat) beyond tolerance")
                rows.append([h.diff(i).eval(u) for i in range(prob.nu)])
                rhs.append(-val)
        if not rows:
            break
        A = np.array(rows)
        r = np.array(rhs)
        delta, *_ = np.linalg.lstsq(A, r, rcond=None)
        u = u + delta
    return u


def build_extension(prob: GsipProblem, xhat, uhat, pop_opts: PopOptions) -> Extension:
    spec = prob.extension
    kind = spec.kind
    if kind == "auto":
        if prob.u_is_constant():
            kind = "constant"
        else:
            try:
                for h in prob.u_eq + prob.u_ineq:
                    split_affine_in_u(h, prob.nx, prob.nu)
                kind = "numeric"
            except ExtensionError as exc:
                raise GsipError(
                    "no extension rule applies: U(x) depends on x and is "
                    "nonlinear in u"
                ) from exc
    if kind == "constant":
        return constant_extension(prob.nx, xhat, uhat)
    if kind == "box":
        return box_extension(spec.l, spec.w, xhat, uhat)
    if kind == "simplex":
        return simplex_extension(spec.l, spec.w[0], xhat, uhat)
    if kind == "ball":
        return ball_extension(spec.a, spec.l[0], spec.w[0], xhat, uhat)
    if kind == "ellipsoid":
        return ellipsoid_extension(spec.a, spec.D, xhat, uhat)
    if kind == "numeric":
        anchor = _project_affine_anchor(prob, xhat, uhat)
        return numeric_extension(
            prob.x_eq,
            prob.x_ineq,
            prob.u_eq,
            prob.u_ineq,
            prob.nx,
            prob.nu,
            xhat,
            anchor,
            degrees=spec.degrees,
            sdp_opts=pop_opts.sdp,
        )
    raise GsipError(f"unknown extension kind {kind!r}")


def check_feasibility(
    xhat, prob: GsipProblem, opts: GsipOptions | None = None
) -> tuple[list[float], list[Optional[np.ndarray]], float]:
    """Solve the lower-level problems at xhat.

    Returns (g_kj values, u_kj minimizers, g_k).  Emptiness of U(xhat)
    certified by the moment relaxation gives g_k = +inf with empty
    per-problem lists.
    """
    opts = opts or GsipOptions()
    ueq, uin = prob.u_constraints_at(xhat)
    uscale = prob.u_scale
    feas = moment_feasibility(
        ueq, uin, prob.nu, var_scale=uscale, sdp_opts=opts.pop.sdp
    )
    if feas == "empty":
        return [], [], np.inf
    g_vals: list[float] = []
    u_pts: list[Optional[np.ndarray]] = []
    popts = _pop_options(opts.pop, uscale)
    for j in range(prob.s):
        pop = Pop(prob.nu, prob.g_at(j, xhat), ueq, uin)
        res = minimize(pop, popts)
        if res.status == STATUS_POP_INFEASIBLE:
            return [], [], np.inf
        if res.status == STATUS_POP_UNBOUNDED:
            g_vals.append(-np.inf)
            u_pts.append(res.minimizers[0] if res.minimizers else None)
            continue
        g_vals.append(res.value)
        u_pts.append(res.minimizers[0] if res.minimizers else None)
    g_k = min(g_vals) if g_vals else np.inf
    return g_vals, u_pts, g_k


def classical_exchange_step(
    prob: GsipProblem, base: Pop, uhat
) -> Pop:
    """Append the constant-u cuts g(x, uhat) >= 0 to an outer relaxation.

    Valid for SIPs; for genuinely x-dependent U(x) the cut may exclude
    true minimizers, which is exactly the failure this function exists to
    reproduce.
    """
    consts = [Polynomial.constant(prob.nx, float(v)) for v in uhat]
    cuts = [gj.substitute_block(prob.nx, consts) for gj in prob.g]
    return Pop(
        base.nvars,
        base.objective,
        list(base.eq_constraints),
        list(base.ineq_constraints) + cuts,
    )


def solve_gsip(prob: GsipProblem, opts: GsipOptions | None = None) -> GsipResult:
    opts = opts or GsipOptions()
    cuts: list[Polynomial] = []
    trace: list[IterationRecord] = []
    upper_opts = _pop_options(opts.upper_pop or opts.pop, prob.x_scale)
    samples = None
    warm_k: Optional[int] = None

    for k in range(opts.max_loops):
        pop_k = Pop(prob.nx, prob.objective, list(prob.x_eq), list(prob.x_ineq) + cuts)
        if warm_k is not None:
            # start where the previous loop certified; deeper truncations
            # keep every soundness property, this only skips dead orders
            upper_opts.k_min = max(upper_opts.k_min or 0, warm_k)
        res = minimize(pop_k, upper_opts)
        if res.order_used >= 0:
            warm_k = res.order_used
        if res.status == STATUS_POP_INFEASIBLE:
            return GsipResult(
                status=STATUS_GSIP_INFEASIBLE,
                trace=trace,
                added_cuts=cuts,
                loops=k + 1,
                message=f"relaxation infeasible at loop {k} "
                f"(certificate quality {res.certificate_quality:.2e})",
                certificate_quality=res.certificate_quality,
            )
        if res.status == STATUS_POP_UNBOUNDED:
            raise GsipError(f"outer relaxation unbounded at loop {k}")
        if not res.minimizers:
            raise GsipError(f"no usable iterate at loop {k}")
        xhat = res.minimizers[0]
        f_k = res.value
        if opts.polish:
            polished = _polish_iterate(xhat, pop_k)
            _, viol_raw = check_membership(xhat, pop_k, opts.pop.feas_tol)
            okp, viol_pol = check_membership(polished, pop_k, opts.pop.feas_tol)
            fscale = 1.0 + abs(f_k)
            if (
                viol_pol <= viol_raw + 1e-9
                and pop_k.objective.eval(list(polished))
                <= pop_k.objective.eval(list(xhat)) + 1e-4 * fscale
            ):
                xhat = polished

        g_vals, u_pts, g_k = check_feasibility(xhat, prob, opts)
        N_k = [j for j, v in enumerate(g_vals) if v < 0]
        rec = IterationRecord(
            k=k,
            xhat=xhat,
            f_k=f_k,
            g_kj=g_vals,
            u_kj=u_pts,
            g_k=g_k,
            N_k=N_k,
            pop_status=res.status,
            pop_order=res.order_used,
            all_minimizers=res.minimizers,
        )
        trace.append(rec)

        if g_k >= -opts.eps:
            return GsipResult(
                status=STATUS_GSIP_OPTIMAL,
                x_star=xhat,
                f_star=f_k,
                g_star=g_k,
                trace=trace,
                added_cuts=cuts,
                loops=k + 1,
            )

        # build extensions and append cuts
        new_cuts: list[Polynomial] = []
        scope = range(prob.s) if opts.cut_all else N_k
        for j in scope:
            if j >= len(u_pts) or u_pts[j] is None:
                continue
            uhat = u_pts[j]
            try:
                if opts.classical_exchange:
                    ext = constant_extension(prob.nx, xhat, uhat)
                else:
                    ext = build_extension(prob, xhat, uhat, opts.pop)
            except (ExtensionError, ExtensionNotFound) as exc:
                if j in N_k:
                    return GsipResult(
                        status=STATUS_GSIP_EXTENSION_FAILURE,
                        trace=trace,
                        added_cuts=cuts,
                        loops=k + 1,
                        message=f"loop {k}, constraint {j}: {exc}",
                    )
                continue
            if opts.validate_cuts and prob.sample_lo is not None:
                if samples is None:
                    samples = sample_set(
                        prob.nx,
                        prob.sample_lo,
                        prob.sample_hi,
                        prob.x_ineq,
                        prob.x_eq,
                    )
                flags = [True] * len(prob.u_eq) + [False] * len(prob.u_ineq)
                ext.validity = validate_extension(
                    ext, prob.u_eq + prob.u_ineq, prob.nx, samples, flags
                )
            rec.extensions.append(ext)
            new_cuts.append(ext.cut(prob.g[j], prob.nx))
        if not new_cuts:
            return GsipResult(
                status=STATUS_GSIP_EXTENSION_FAILURE,
                trace=trace,
                added_cuts=cuts,
                loops=k + 1,
                message=f"loop {k}: no cut could be constructed",
            )
        cuts.extend(new_cuts)

    last = trace[-1] if trace else None
    return GsipResult(
        status=STATUS_GSIP_LOOP_CAP,
        x_star=last.xhat if last else None,
        f_star=last.f_k if last else np.nan,
        g_star=last.g_k if last else np.nan,
        trace=trace,
        added_cuts=cuts,
        loops=len(trace),
        message="loop cap reached",
    )
