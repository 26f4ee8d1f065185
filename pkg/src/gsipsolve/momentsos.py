"""Moment relaxations of polynomial optimization problems.

The order-k relaxation of

    min f(x)  s.t.  e_i(x) = 0,  g_i(x) >= 0

is the moment program over a truncated moment sequence y indexed by
monomials of degree <= 2k:

    min <f, y>  s.t.  V_{e_i}[y] = 0,  L_{g_i}[y] >= 0,  M_k[y] >= 0,  y_0 = 1.

The embedded SDP is assembled in the sums-of-squares orientation (one
equality row per monomial of degree <= 2k, Gram blocks for the SOS
multipliers, free scalars for the bound and the equality multipliers),
which keeps the Schur complement at |N^n_{2k}| rows regardless of how
large the moment matrix gets.  The moment vector is recovered from the
dual of that SDP and the moment matrix is its slack, so both sides of the
classical duality pairing are available to callers.

Infeasibility of the moment program (which soundly certifies
infeasibility of the polynomial problem) surfaces as an improving ray of
the SOS side; the ray is re-verified here at the polynomial level before
it is trusted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .poly import Polynomial, basis_size, grlex_key, monomial_basis
from .sdp import (
    STATUS_DUAL_INFEASIBLE,
    STATUS_NUMERICAL_FAILURE,
    STATUS_OPTIMAL,
    STATUS_PRIMAL_INFEASIBLE,
    SdpBuilder,
    SdpOptions,
    SdpProblem,
    SdpSolution,
    solve_sdp,
)


class OrderTooSmall(Exception):
    pass


class DegreeOverflow(Exception):
    pass


class ExtractionFailure(Exception):
    pass


@dataclass
class Pop:
    """Standard-form polynomial optimization problem."""

    nvars: int
    objective: Polynomial
    eq_constraints: list[Polynomial] = field(default_factory=list)
    ineq_constraints: list[Polynomial] = field(default_factory=list)

    def __post_init__(self):
        for p in [self.objective, *self.eq_constraints, *self.ineq_constraints]:
            if p.nvars != self.nvars:
                raise ValueError("all polynomials must share the Pop's nvars")

    def min_order(self) -> int:
        """d0: half the max degree, rounded up, at least one."""
        degs = [self.objective.degree()]
        degs += [p.degree() for p in self.eq_constraints]
        degs += [p.degree() for p in self.ineq_constraints]
        return max(1, max((d + 1) // 2 for d in degs if d >= 0) if any(d >= 0 for d in degs) else 1)


@dataclass
class Tms:
    """Truncated moment sequence of degree 2*order, graded ordering."""

    nvars: int
    order: int
    values: np.ndarray

    def __post_init__(self):
        expected = basis_size(self.nvars, 2 * self.order)
        if len(self.values) != expected:
            raise ValueError(f"tms needs {expected} entries, got {len(self.values)}")
        self._basis = monomial_basis(self.nvars, 2 * self.order)
        self._index = {e: i for i, e in enumerate(self._basis)}

    @property
    def basis(self):
        return self._basis

    def value(self, exponent) -> float:
        return float(self.values[self._index[tuple(exponent)]])

    def normalized(self) -> "Tms":
        y0 = self.values[0]
        if abs(y0) < 1e-300:
            raise ValueError("cannot normalize: y0 is zero")
        return Tms(self.nvars, self.order, self.values / y0)

    def first_moments(self) -> np.ndarray:
        """The degree-one moments: mean of the representing measure."""
        out = np.zeros(self.nvars)
        for i in range(self.nvars):
            e = [0] * self.nvars
            e[i] = 1
            out[i] = self.value(e)
        return out

    @staticmethod
    def from_atoms(
        points: Sequence[Sequence[float]],
        weights: Sequence[float] | None,
        order: int,
    ) -> "Tms":
        pts = np.asarray(points, dtype=float)
        nvars = pts.shape[1]
        if weights is None:
            weights = np.full(len(pts), 1.0 / len(pts))
        weights = np.asarray(weights, dtype=float)
        basis = monomial_basis(nvars, 2 * order)
        vals = np.zeros(len(basis))
        for i, e in enumerate(basis):
            vals[i] = float(weights @ np.prod(pts ** np.array(e), axis=1))
        return Tms(nvars, order, vals)


@dataclass
class FlatResult:
    flat: bool
    t: int = -1
    rank: int = 0
    ranks: dict = field(default_factory=dict)


# ----------------------------------------------------------------------
# moment and localizing operators


def moment_matrix(y: Tms, d: int) -> np.ndarray:
    if 2 * d > 2 * y.order:
        raise DegreeOverflow("moment matrix degree exceeds the tms order")
    basis = monomial_basis(y.nvars, d)
    n = len(basis)
    M = np.empty((n, n))
    for i, a in enumerate(basis):
        for j in range(i, n):
            b = basis[j]
            M[i, j] = M[j, i] = y.value(tuple(x + z for x, z in zip(a, b)))
    return M


def localizing_degree(p: Polynomial, k: int) -> int:
    """Half-degree budget for the multiplier of p at relaxation order k."""
    return k - (p.degree() + 1) // 2


def localizing_matrix(p: Polynomial, y: Tms, k: int) -> np.ndarray:
    if p.degree() > 2 * k or k > y.order:
        raise DegreeOverflow("polynomial degree exceeds 2k")
    t = localizing_degree(p, k)
    if t < 0:
        raise DegreeOverflow("no multiplier degrees left at this order")
    basis = monomial_basis(y.nvars, t)
    n = len(basis)
    L = np.empty((n, n))
    for i, a in enumerate(basis):
        for j in range(i, n):
            b = basis[j]
            acc = 0.0
            for e, c in p.terms.items():
                acc += c * y.value(tuple(x + z + w for x, z, w in zip(a, b, e)))
            L[i, j] = L[j, i] = acc
    return L


def localizing_vector(p: Polynomial, y: Tms, two_k: int) -> np.ndarray:
    if p.degree() > two_k or two_k > 2 * y.order:
        raise DegreeOverflow("polynomial degree exceeds 2k")
    basis = monomial_basis(y.nvars, two_k - p.degree())
    out = np.empty(len(basis))
    for i, d in enumerate(basis):
        acc = 0.0
        for e, c in p.terms.items():
            acc += c * y.value(tuple(x + w for x, w in zip(d, e)))
        out[i] = acc
    return out


def numerical_rank(M: np.ndarray, rank_tol: float) -> int:
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[0] <= 0:
        return 0
    return int(np.sum(sv > rank_tol * sv[0]))


def check_flat_truncation(y: Tms, d0: int, k: int, rank_tol: float = 1e-6) -> FlatResult:
    """Scan t = d0..k for rank M_{t-d0} = rank M_t."""
    if d0 > k:
        return FlatResult(False)
    ranks = {}
    for t in range(0, k + 1):
        ranks[t] = numerical_rank(moment_matrix(y, t), rank_tol)
    for t in range(d0, k + 1):
        if ranks[t - d0] == ranks[t]:
            return FlatResult(True, t=t, rank=ranks[t], ranks=ranks)
    return FlatResult(False, ranks=ranks)


# ----------------------------------------------------------------------
# minimizer extraction (Henrion-Lasserre)


def _pivoted_factor(M: np.ndarray, r: int) -> np.ndarray:
    """Rank-r factor F with M ~ F F'; pivoted Cholesky with an
    eigendecomposition fallback for indefinite noise."""
    try:
        from scipy.linalg.lapack import dpstrf

        c, piv, rank, info = dpstrf(M, lower=1)
        if rank >= r:
            L = np.tril(c)[:, :r]
            # undo the pivoting: rows of the factor follow piv
            F = np.zeros_like(L)
            F[piv - 1] = L
            return F
    except Exception:
        pass
    w, Q = np.linalg.eigh(M)
    idx = np.argsort(w)[::-1][:r]
    return Q[:, idx] * np.sqrt(np.maximum(w[idx], 0.0))


def extract_minimizers(
    y: Tms,
    t: int,
    r: int,
    rank_tol: float = 1e-6,
    seed: int = 0,
) -> list[np.ndarray]:
    """Extract the support of an r-atomic representing measure of M_t[y].

    Pivoted Cholesky -> column echelon coordinates -> multiplication
    operators per variable -> simultaneous diagonalization through the
    real Schur form of a random convex combination (fixed seed).
    """
    n = y.nvars
    basis_t = monomial_basis(n, t)
    index_t = {e: i for i, e in enumerate(basis_t)}
    M = moment_matrix(y, t)
    if r < 1:
        raise ExtractionFailure("rank must be at least one")
    F = _pivoted_factor(M, r)

    # greedy pivot rows in graded order
    pivots: list[int] = []
    basis_rows: list[tuple[int, ...]] = []
    Q = np.zeros((r, 0))
    fnorm = np.linalg.norm(F)
    for i, mono in enumerate(basis_t):
        row = F[i]
        resid = row - Q @ (Q.T @ row)
        if np.linalg.norm(resid) > max(rank_tol * fnorm, 1e-12):
            Q = np.hstack([Q, (resid / np.linalg.norm(resid))[:, None]])
            pivots.append(i)
            basis_rows.append(mono)
            if len(pivots) == r:
                break
    if len(pivots) < r:
        raise ExtractionFailure("could not find independent pivot rows")

    Fp = F[pivots]  # r x r, invertible
    try:
        E = np.linalg.solve(Fp.T, F.T).T  # E[i] = coords of row i in pivot basis
    except np.linalg.LinAlgError as exc:
        raise ExtractionFailure("pivot block is singular") from exc

    mult = []
    for v in range(n):
        rows = []
        for mono in basis_rows:
            shifted = list(mono)
            shifted[v] += 1
            key = tuple(shifted)
            if key not in index_t:
                raise ExtractionFailure("pivot basis is not closed under shifts")
            rows.append(E[index_t[key]])
        mult.append(np.array(rows))

    for attempt in range(3):
        rng = np.random.default_rng(seed + attempt)
        lam = rng.random(n)
        lam /= lam.sum()
        N = sum(l * Nv for l, Nv in zip(lam, mult))
        T, Z = sla.schur(N, output="real")
        # require a fully real Schur form; retry with a new combination
        sub = np.diag(T, -1)
        if len(sub) and np.max(np.abs(sub)) > 1e-7 * max(1.0, np.max(np.abs(T))):
            continue
        points = []
        for j in range(r):
            q = Z[:, j]
            points.append(np.array([float(q @ Nv @ q) for Nv in mult]))
        return points
    raise ExtractionFailure("Schur form stayed complex over all retries")


def atomic_residual(y: Tms, t: int, points: list[np.ndarray]) -> float:
    """Relative error between M_t[y] and the best atomic fit on points."""
    basis_t = monomial_basis(y.nvars, t)
    pts = np.asarray(points)
    V = np.zeros((len(basis_t), len(points)))
    for i, e in enumerate(basis_t):
        V[i] = np.prod(pts ** np.array(e), axis=1)
    target = np.array([y.value(e) for e in basis_t])
    w, *_ = np.linalg.lstsq(V, target, rcond=None)
    Mt = moment_matrix(y, t)
    Ma = np.zeros_like(Mt)
    for wt, p in zip(w, points):
        vec = np.prod(p ** np.array(basis_t), axis=1)
        Ma += wt * np.outer(vec, vec)
    denom = max(1.0, np.linalg.norm(Mt))
    return float(np.linalg.norm(Ma - Mt) / denom)


# ----------------------------------------------------------------------
# relaxation assembly (SOS orientation)


@dataclass
class MomentRelaxation:
    pop: Pop
    order: int
    sdp: SdpProblem
    basis2k: list[tuple[int, ...]]
    index2k: dict
    d0: int
    gram_bases: list[list[tuple[int, ...]]]
    gamma_col: int

    def tms_from(self, sol: SdpSolution) -> Tms:
        y = -sol.y_dual[: len(self.basis2k)]
        tms = Tms(self.pop.nvars, self.order, y)
        return tms.normalized()

    def bound_from(self, sol: SdpSolution) -> float:
        # primal optimum is -gamma*
        return -sol.obj_primal


def build_moment_relaxation(pop: Pop, k: int) -> MomentRelaxation:
    n = pop.nvars
    degs = [pop.objective.degree()] + [
        p.degree() for p in pop.eq_constraints + pop.ineq_constraints
    ]
    if max(degs) > 2 * k:
        raise OrderTooSmall(f"order {k} cannot cover degree {max(degs)}")
    basis2k = monomial_basis(n, 2 * k)
    index2k = {e: i for i, e in enumerate(basis2k)}

    bld = SdpBuilder()
    for e in basis2k:
        bld.new_constraint(pop.objective.coeff(e))

    gram_bases = []
    # Gram block of the plain SOS term
    b0 = monomial_basis(n, k)
    blk0 = bld.add_block(len(b0))
    gram_bases.append(b0)
    for i, a in enumerate(b0):
        for j in range(i, len(b0)):
            mu = tuple(x + z for x, z in zip(a, b0[j]))
            bld.add_entry(index2k[mu], blk0, i, j, 1.0)

    # Gram block per inequality, weighted by the constraint coefficients
    for p in pop.ineq_constraints:
        t = localizing_degree(p, k)
        if t < 0:
            raise OrderTooSmall(f"constraint degree {p.degree()} too high for order {k}")
        bi = monomial_basis(n, t)
        blk = bld.add_block(len(bi))
        gram_bases.append(bi)
        for i, a in enumerate(bi):
            for j in range(i, len(bi)):
                for e, c in p.terms.items():
                    mu = tuple(x + z + w for x, z, w in zip(a, bi[j], e))
                    bld.add_entry(index2k[mu], blk, i, j, c)

    # free multiplier polynomial per equality
    for p in pop.eq_constraints:
        dpsi = 2 * k - p.degree()
        if dpsi < 0:
            raise OrderTooSmall(f"equality degree {p.degree()} too high for order {k}")
        bpsi = monomial_basis(n, dpsi)
        first = bld.add_free(len(bpsi))
        for ci, d in enumerate(bpsi):
            for e, c in p.terms.items():
                mu = tuple(x + w for x, w in zip(d, e))
                bld.add_free_entry(index2k[mu], first + ci, c)

    # the bound variable: constant row, cost -1 (maximize the bound)
    gamma_col = bld.add_free(1)
    bld.add_free_entry(index2k[(0,) * n], gamma_col, 1.0)
    bld.set_free_cost(gamma_col, -1.0)

    return MomentRelaxation(
        pop=pop,
        order=k,
        sdp=bld.build(),
        basis2k=basis2k,
        index2k=index2k,
        d0=pop.min_order(),
        gram_bases=gram_bases,
        gamma_col=gamma_col,
    )


@dataclass
class MomentSolveResult:
    kind: str  # bound | infeasible | no_bound | failure
    value: float = np.nan
    tms: Optional[Tms] = None
    sol: Optional[SdpSolution] = None
    relaxation: Optional[MomentRelaxation] = None
    certificate_quality: float = np.inf


def verify_emptiness_ray(rel: MomentRelaxation, sol: SdpSolution, tol: float = 1e-6) -> float:
    """Validate a Positivstellensatz ray certifying moment infeasibility.

    The solver's primal ray gives Gram blocks G_i >= 0 and multiplier
    coefficients with  sigma_0 + sum sigma_i g_i + sum psi_i e_i + gamma = 0
    and gamma > 0, which rules out any normalized moment vector.  Returns
    the worst relative violation (inf when the ray is structurally wrong).
    """
    cert = sol.certificate
    if cert is None or cert.X is None:
        return np.inf
    gamma = cert.x_free[rel.gamma_col] if cert.x_free is not None else 0.0
    if gamma <= 0:
        return np.inf
    scale = max(max(np.abs(G).max() for G in cert.X), abs(gamma))
    worst = 0.0
    for G in cert.X:
        w = np.linalg.eigvalsh(0.5 * (G + G.T))
        worst = max(worst, max(0.0, -w[0]) / scale)
    # identity residual: the constraint rows applied to the ray must vanish
    resid = np.zeros(rel.sdp.m)
    for P, G in zip(rel.sdp.con_blocks, cert.X):
        resid += P @ G.ravel()
    if rel.sdp.free_cols is not None and cert.x_free is not None:
        resid += rel.sdp.free_cols @ cert.x_free
    worst = max(worst, float(np.abs(resid).max()) / scale)
    return worst / max(gamma / scale, 1e-12)


def solve_moment_relaxation(
    pop: Pop, k: int, sdp_opts: SdpOptions | None = None
) -> MomentSolveResult:
    rel = build_moment_relaxation(pop, k)
    sol = solve_sdp(rel.sdp, sdp_opts)
    if sol.status == STATUS_OPTIMAL:
        try:
            tms = rel.tms_from(sol)
        except ValueError:
            return MomentSolveResult(kind="failure", sol=sol, relaxation=rel)
        return MomentSolveResult(
            kind="bound", value=rel.bound_from(sol), tms=tms, sol=sol, relaxation=rel
        )
    if sol.status == STATUS_DUAL_INFEASIBLE:
        quality = verify_emptiness_ray(rel, sol)
        if quality <= 1e-5:
            return MomentSolveResult(
                kind="infeasible", sol=sol, relaxation=rel, certificate_quality=quality
            )
        return MomentSolveResult(kind="failure", sol=sol, relaxation=rel)
    if sol.status == STATUS_PRIMAL_INFEASIBLE:
        # the SOS side admits no identity at this order: no bound here
        return MomentSolveResult(kind="no_bound", sol=sol, relaxation=rel)
    return MomentSolveResult(kind="failure", sol=sol, relaxation=rel)
