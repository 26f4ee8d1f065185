"""Polynomial extensions: maps q with q(xhat) = uhat and q(x) in U(x) on X.

A violating lower-level point uhat observed at one iterate xhat only cuts
soundly when it is extended to a map that stays inside U(x) across the
whole outer feasible set; these builders produce such maps for box,
simplex, ball and ellipsoid shaped U(x), for constant U (the classical
SIP case), and - for U(x) affine in u - through a conic feasibility
program over the coefficients of q.

Anchors coming out of an SDP carry ~1e-8 noise, so every rule projects
uhat back into U(xhat) before forming interpolation weights; violations
beyond `anchor_tol` are rejected as caller errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .poly import Polynomial, monomial_basis
from .sdp import (
    STATUS_OPTIMAL,
    STATUS_PRIMAL_INFEASIBLE,
    SdpBuilder,
    SdpOptions,
    solve_sdp,
)


class ExtensionError(Exception):
    pass


class ExtensionNotFound(ExtensionError):
    """The numeric feasibility system was infeasible at every tried degree."""


@dataclass
class ValidityReport:
    samples: int
    worst_violation: float  # min over samples/constraints of h_i(x, q(x))
    anchor_error: float

    def ok(self, tol: float = 1e-6) -> bool:
        return self.anchor_error <= 1e-8 and self.worst_violation >= -tol


@dataclass
class Extension:
    q: list[Polynomial]
    xhat: np.ndarray
    uhat: np.ndarray
    kind: str
    validity: Optional[ValidityReport] = None

    def degree(self) -> int:
        return max(p.degree() for p in self.q)

    def cut(self, g: Polynomial, nx: int) -> Polynomial:
        """g(x, q(x)) for g over (x, u)."""
        return g.substitute_block(nx, self.q)


def _as_array(v) -> np.ndarray:
    return np.asarray(v, dtype=float)


def _clip01(v: float, tol: float) -> float:
    if v < -tol or v > 1 + tol:
        raise ExtensionError(f"interpolation weight {v} outside [0,1]")
    return min(1.0, max(0.0, v))


def constant_extension(nx: int, xhat, uhat) -> Extension:
    q = [Polynomial.constant(nx, float(u)) for u in uhat]
    return Extension(q, _as_array(xhat), _as_array(uhat), "constant")


def box_extension(
    l: Sequence[Polynomial],
    w: Sequence[Polynomial],
    xhat,
    uhat,
    anchor_tol: float = 1e-6,
) -> Extension:
    """q_j = sigma_j l_j + (1 - sigma_j) w_j with sigma_j from the anchor."""
    xhat = _as_array(xhat)
    uhat = _as_array(uhat)
    if len(l) != len(w) or len(l) != len(uhat):
        raise ExtensionError("box data dimension mismatch")
    q = []
    for j in range(len(l)):
        lo = l[j].eval(xhat)
        hi = w[j].eval(xhat)
        if uhat[j] < lo - anchor_tol * max(1, abs(lo)) - anchor_tol:
            raise ExtensionError(f"anchor below box floor in coordinate {j}")
        if uhat[j] > hi + anchor_tol * max(1, abs(hi)) + anchor_tol:
            raise ExtensionError(f"anchor above box ceiling in coordinate {j}")
        width = hi - lo
        if width <= anchor_tol:
            sigma = 0.0  # degenerate interval: take the upper bound map
        else:
            sigma = _clip01((hi - uhat[j]) / width, 1e-9 + anchor_tol / max(width, 1e-12))
        q.append(l[j].scale(sigma) + w[j].scale(1.0 - sigma))
    return Extension(q, xhat, uhat, "box")


def simplex_extension(
    l: Sequence[Polynomial],
    w: Polynomial,
    xhat,
    uhat,
    anchor_tol: float = 1e-6,
) -> Extension:
    """q_j = mu_j (w - e'l) + l_j on {l <= u, e'u <= w}."""
    xhat = _as_array(xhat)
    uhat = _as_array(uhat)
    p = len(l)
    lvals = np.array([lj.eval(xhat) for lj in l])
    wval = w.eval(xhat)
    slack = wval - lvals.sum()
    if np.any(uhat < lvals - anchor_tol):
        raise ExtensionError("anchor below the simplex floor")
    if uhat.sum() > wval + anchor_tol:
        raise ExtensionError("anchor above the simplex cap")
    if slack <= anchor_tol:
        mu = np.zeros(p)
    else:
        mu = np.maximum(uhat - lvals, 0.0) / slack
        total = mu.sum()
        if total > 1.0:
            if total > 1.0 + anchor_tol / max(slack, 1e-12) + 1e-9:
                raise ExtensionError("simplex weights exceed one")
            mu = mu / total
    eTl = Polynomial.zero(l[0].nvars)
    for lj in l:
        eTl = eTl + lj
    spread = w - eTl
    q = [spread.scale(float(mu[j])) + l[j] for j in range(p)]
    return Extension(q, xhat, uhat, "simplex")


def ball_extension(
    a: Sequence[Polynomial],
    l: Polynomial,
    w: Polynomial,
    xhat,
    uhat,
    anchor_tol: float = 1e-6,
) -> Extension:
    """q = a(x) + (mu1 l(x) + mu2 w(x)) v on {l <= ||u - a|| <= w}."""
    xhat = _as_array(xhat)
    uhat = _as_array(uhat)
    p = len(a)
    avals = np.array([aj.eval(xhat) for aj in a])
    diff = uhat - avals
    rho = float(np.linalg.norm(diff))
    lval = l.eval(xhat)
    wval = w.eval(xhat)
    if rho < lval - anchor_tol or rho > wval + anchor_tol:
        raise ExtensionError("anchor outside the annulus")
    if rho <= 1e-12:
        v = np.ones(p) / np.sqrt(p)
        mu1, mu2 = 1.0, 0.0
        if lval > anchor_tol:
            raise ExtensionError("anchor at the center but inner radius positive")
    else:
        v = diff / rho
        width = wval - lval
        if width <= anchor_tol:
            mu1, mu2 = 1.0, 0.0
        else:
            mu2 = _clip01((rho - lval) / width, 1e-9 + anchor_tol / max(width, 1e-12))
            mu1 = 1.0 - mu2
    radial = l.scale(mu1) + w.scale(mu2)
    q = [a[j] + radial.scale(float(v[j])) for j in range(p)]
    return Extension(q, xhat, uhat, "ball")


def ellipsoid_extension(
    a: Sequence[Polynomial],
    D: Sequence[Sequence[Polynomial]],
    xhat,
    uhat,
    anchor_tol: float = 1e-6,
    cond_limit: float = 1e10,
) -> Extension:
    """q(x) = a(x) + D(x)' z with z = D(xhat)^-T (uhat - a(xhat))."""
    xhat = _as_array(xhat)
    uhat = _as_array(uhat)
    p = len(a)
    Dhat = np.array([[D[r][c].eval(xhat) for c in range(p)] for r in range(p)])
    if np.linalg.cond(Dhat) > cond_limit:
        raise ExtensionError("shape matrix numerically singular at the anchor")
    avals = np.array([aj.eval(xhat) for aj in a])
    z = np.linalg.solve(Dhat.T, uhat - avals)
    nz = float(np.linalg.norm(z))
    if nz > 1.0 + anchor_tol:
        raise ExtensionError("anchor outside the ellipsoid")
    if nz > 1.0:
        z = z / nz
    q = []
    for j in range(p):
        qj = a[j]
        for r in range(p):
            qj = qj + D[r][j].scale(float(z[r]))  # D(x)^T column j
        q.append(qj)
    return Extension(q, xhat, uhat, "ellipsoid")


# ----------------------------------------------------------------------
# numeric extension for U(x) affine in u


def split_affine_in_u(h: Polynomial, nx: int, p: int):
    """h(x, u) = h0(x) + sum_l h1[l](x) u_l; raises when h is nonlinear in u."""
    h0_terms: dict = {}
    h1_terms: list[dict] = [dict() for _ in range(p)]
    for e, c in h.terms.items():
        xe = e[:nx]
        ue = e[nx:]
        total_u = sum(ue)
        if total_u == 0:
            h0_terms[xe] = h0_terms.get(xe, 0.0) + c
        elif total_u == 1:
            l = ue.index(1)
            h1_terms[l][xe] = h1_terms[l].get(xe, 0.0) + c
        else:
            raise ExtensionError("constraint is not affine in the inner variables")
    return (
        Polynomial(nx, h0_terms),
        [Polynomial(nx, t) for t in h1_terms],
    )


def numeric_extension(
    x_eq: Sequence[Polynomial],
    x_ineq: Sequence[Polynomial],
    h_eq: Sequence[Polynomial],
    h_ineq: Sequence[Polynomial],
    nx: int,
    p: int,
    xhat,
    uhat,
    degrees: Sequence[int] = (2, 4),
    sdp_opts: SdpOptions | None = None,
) -> Extension:
    """Solve the conic feasibility system for the coefficients of q.

    Each h_i(x, q(x)) is required to lie in the degree-truncated ideal of
    the X equalities (equality indices) or in ideal + quadratic module of
    the X description (inequality indices); together with the
    interpolation rows q(xhat) = uhat this is one SDP over the q and
    multiplier coefficients.  Infeasible at every degree in `degrees`
    raises ExtensionNotFound.
    """
    xhat = _as_array(xhat)
    uhat = _as_array(uhat)
    splits_eq = [split_affine_in_u(h, nx, p) for h in h_eq]
    splits_in = [split_affine_in_u(h, nx, p) for h in h_ineq]

    last_status = None
    for dq in degrees:
        ext = _try_numeric_degree(
            x_eq, x_ineq, splits_eq, splits_in, nx, p, xhat, uhat, dq, sdp_opts
        )
        if isinstance(ext, Extension):
            return ext
        last_status = ext
    raise ExtensionNotFound(
        f"no extension up to degree {max(degrees)} (last solver status: {last_status})"
    )


def _try_numeric_degree(
    x_eq, x_ineq, splits_eq, splits_in, nx, p, xhat, uhat, dq, sdp_opts
):
    degree_need = 0
    for h0, h1 in splits_eq + splits_in:
        d = max([h0.degree()] + [g.degree() + dq for g in h1 if not g.is_zero()])
        degree_need = max(degree_need, d)
    two_k = degree_need + (degree_need % 2)
    two_k = max(two_k, 2)
    K = two_k // 2

    bld = SdpBuilder()
    qbasis = monomial_basis(nx, dq)
    phi_cols = [bld.add_free(len(qbasis)) for _ in range(p)]

    def add_identity(h0, h1, row_of, with_sos):
        # sigma/psi terms minus the phi contribution equals h0
        if with_sos:
            b0 = monomial_basis(nx, K)
            blk = bld.add_block(len(b0))
            for i, al in enumerate(b0):
                for j in range(i, len(b0)):
                    mu = tuple(x + z for x, z in zip(al, b0[j]))
                    bld.add_entry(row_of[mu], blk, i, j, 1.0)
            for c in x_ineq:
                t = K - (c.degree() + 1) // 2
                if t < 0:
                    continue
                bi = monomial_basis(nx, t)
                blk = bld.add_block(len(bi))
                for i, al in enumerate(bi):
                    for j in range(i, len(bi)):
                        for e, cc in c.terms.items():
                            mu = tuple(x + z + w for x, z, w in zip(al, bi[j], e))
                            bld.add_entry(row_of[mu], blk, i, j, cc)
        for ceq in x_eq:
            dpsi = two_k - ceq.degree()
            if dpsi < 0:
                continue
            bpsi = monomial_basis(nx, dpsi)
            first = bld.add_free(len(bpsi))
            for ci, d in enumerate(bpsi):
                for e, cc in ceq.terms.items():
                    mu = tuple(x + w for x, w in zip(d, e))
                    bld.add_free_entry(row_of[mu], first + ci, cc)
        # phi columns: -(h1_l * phi_l)
        for l in range(p):
            g = h1[l]
            if g.is_zero():
                continue
            for ci, d in enumerate(qbasis):
                for e, cc in g.terms.items():
                    mu = tuple(x + w for x, w in zip(d, e))
                    bld.add_free_entry(row_of[mu], phi_cols[l] + ci, -cc)

    basis2k = monomial_basis(nx, two_k)
    for split, with_sos in [(splits_eq, False), (splits_in, True)]:
        for h0, h1 in split:
            row_of = {}
            for mu in basis2k:
                row_of[mu] = bld.new_constraint(h0.coeff(mu))
            add_identity(h0, h1, row_of, with_sos)

    # interpolation rows q(xhat) = uhat
    xpow = np.array([float(np.prod(xhat ** np.array(d))) for d in qbasis])
    for l in range(p):
        row = bld.new_constraint(float(uhat[l]))
        for ci in range(len(qbasis)):
            if xpow[ci] != 0.0:
                bld.add_free_entry(row, phi_cols[l] + ci, xpow[ci])

    sol = solve_sdp(bld.build(), sdp_opts or SdpOptions())
    if sol.status == STATUS_OPTIMAL:
        q = []
        for l in range(p):
            coeffs = sol.x_free[phi_cols[l] : phi_cols[l] + len(qbasis)]
            q.append(Polynomial(nx, dict(zip(qbasis, coeffs))))
        return Extension(q, xhat, uhat, "numeric")
    return sol.status


# ----------------------------------------------------------------------
# sampled validity


def sample_set(
    n: int,
    lo: Sequence[float],
    hi: Sequence[float],
    ineqs: Sequence[Polynomial],
    eqs: Sequence[Polynomial] = (),
    count: int = 500,
    eq_band: float = 5e-2,
    seed: int = 7,
) -> np.ndarray:
    """Low-discrepancy samples of a box filtered by a semialgebraic
    description; equality constraints are relaxed to a thin band (the
    report is advisory, closed-form membership is proved structurally)."""
    lo = _as_array(lo)
    hi = _as_array(hi)
    sob = qmc.Sobol(d=n, scramble=True, seed=seed)
    kept = []
    for _ in range(12):
        pts = qmc.scale(sob.random(max(count, 64)), lo, hi)
        mask = np.ones(len(pts), dtype=bool)
        for g in ineqs:
            mask &= g.eval_many(pts) >= -1e-9
        for e in eqs:
            scale = max(e.max_coeff(), 1.0)
            mask &= np.abs(e.eval_many(pts)) <= eq_band * scale
        kept.append(pts[mask])
        if sum(len(k) for k in kept) >= count:
            break
    if kept:
        out = np.vstack(kept)
        return out[:count]
    return np.zeros((0, n))


def validate_extension(
    ext: Extension,
    h_all: Sequence[Polynomial],
    nx: int,
    samples: np.ndarray,
    equality_flags: Sequence[bool] | None = None,
) -> ValidityReport:
    """Worst membership violation of (x, q(x)) over the samples; equality
    constraints count by absolute residual."""
    anchor_err = max(
        abs(qj.eval(ext.xhat) - uj) for qj, uj in zip(ext.q, ext.uhat)
    ) if len(ext.q) else 0.0
    worst = np.inf
    if len(samples) == 0:
        return ValidityReport(0, np.nan, anchor_err)
    flags = equality_flags or [False] * len(h_all)
    for h, is_eq in zip(h_all, flags):
        cut = ext.cut(h, nx)
        vals = cut.eval_many(samples)
        scale = max(h.max_coeff(), 1.0)
        if is_eq:
            worst = min(worst, float(-np.abs(vals / scale).max()))
        else:
            worst = min(worst, float((vals / scale).min()))
    return ValidityReport(len(samples), worst, anchor_err)
