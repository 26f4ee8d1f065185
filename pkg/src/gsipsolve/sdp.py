"""Dense primal-dual interior-point solver for block-diagonal SDPs.

Solves standard-form problems

    min  <C, X> + c_f' x_f
    s.t. <A_i, X> + (A_f x_f)_i = b_i   (i = 1..m)
         X  block-diagonal PSD,  x_f free,

via the homogeneous self-dual embedding with Nesterov-Todd scaling and a
Mehrotra predictor-corrector.  The embedding certifies infeasibility with
an improving ray instead of relying on iteration failure: a primal
infeasible problem yields (y, S) with b'y > 0 and sum_i y_i A_i <= 0, a
dual infeasible one yields an improving primal ray.

Free variables are handled natively in the KKT system (block elimination
through the Schur complement) rather than split into differences of PSD
scalars; splitting empties the dual interior and caps attainable accuracy,
which the moment relaxations downstream cannot afford.

The Schur complement is formed densely per block with chunked batched
matrix products; everything here is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

STATUS_OPTIMAL = "optimal"
STATUS_PRIMAL_INFEASIBLE = "primal_infeasible"
STATUS_DUAL_INFEASIBLE = "dual_infeasible"
STATUS_NUMERICAL_FAILURE = "numerical_failure"


class SdpError(Exception):
    pass


@dataclass
class SdpOptions:
    tol_gap: float = 1e-8
    tol_feas: float = 1e-8
    tol_cert: float = 1e-6
    max_iter: int = 200
    step_frac: float = 0.99
    verbose: bool = False
    # accept a mildly degraded solution instead of failing outright
    tol_slack_accept: float = 1e-5


@dataclass
class SdpProblem:
    """Assembled problem data.

    con_blocks[b] is a CSR matrix of shape (m, n_b * n_b) whose row i is
    the full (symmetric) matrix A_{i,b} flattened, so <A_{i,b}, X_b> is a
    plain dot product with X_b.ravel().
    """

    block_sizes: list[int]
    cost: list[np.ndarray]
    con_blocks: list[sp.csr_matrix]
    b: np.ndarray
    free_cost: Optional[np.ndarray] = None
    free_cols: Optional[sp.csr_matrix] = None

    @property
    def m(self) -> int:
        return len(self.b)

    @property
    def n_free(self) -> int:
        return 0 if self.free_cost is None else len(self.free_cost)


@dataclass
class SdpCertificate:
    """Improving ray: dual (y, S) for primal infeasibility, primal
    (X, x_f) for dual infeasibility; normalized so the improving inner
    product is one."""

    kind: str
    y: Optional[np.ndarray] = None
    S: Optional[list[np.ndarray]] = None
    X: Optional[list[np.ndarray]] = None
    x_free: Optional[np.ndarray] = None
    quality: float = np.inf  # worst residual of the ray, relative


@dataclass
class SdpSolution:
    status: str
    X: list[np.ndarray] = field(default_factory=list)
    S: list[np.ndarray] = field(default_factory=list)
    y_dual: np.ndarray = field(default_factory=lambda: np.zeros(0))
    x_free: np.ndarray = field(default_factory=lambda: np.zeros(0))
    obj_primal: float = np.nan
    obj_dual: float = np.nan
    gap: float = np.inf
    primal_res: float = np.inf
    dual_res: float = np.inf
    iterations: int = 0
    certificate: Optional[SdpCertificate] = None
    history: list[dict] = field(default_factory=list)


class SdpBuilder:
    """Incremental assembly of an SdpProblem."""

    def __init__(self):
        self.block_sizes: list[int] = []
        self._cost_entries: list[list[tuple[int, int, float]]] = []
        self._free_cost: list[float] = []
        self._rhs: list[float] = []
        # per block: parallel triplet arrays (row, r, c, v)
        self._entries: list[list[tuple[int, int, int, float]]] = []
        self._free_entries: list[tuple[int, int, float]] = []

    def add_block(self, size: int) -> int:
        if size < 1:
            raise ValueError("block size must be positive")
        self.block_sizes.append(size)
        self._cost_entries.append([])
        self._entries.append([])
        return len(self.block_sizes) - 1

    def add_free(self, count: int = 1) -> int:
        """Returns the index of the first new free scalar."""
        first = len(self._free_cost)
        self._free_cost.extend([0.0] * count)
        return first

    def set_cost(self, block: int, r: int, c: int, v: float):
        self._cost_entries[block].append((r, c, float(v)))

    def set_free_cost(self, idx: int, v: float):
        self._free_cost[idx] = float(v)

    def new_constraint(self, rhs: float) -> int:
        self._rhs.append(float(rhs))
        return len(self._rhs) - 1

    def add_entry(self, row: int, block: int, r: int, c: int, v: float):
        """A_{row,block}[r,c] = A_{row,block}[c,r] = v (accumulating)."""
        self._entries[block].append((row, r, c, float(v)))

    def add_free_entry(self, row: int, idx: int, v: float):
        self._free_entries.append((row, idx, float(v)))

    def build(self) -> SdpProblem:
        m = len(self._rhs)
        cost = []
        for size, entries in zip(self.block_sizes, self._cost_entries):
            C = np.zeros((size, size))
            for r, c, v in entries:
                C[r, c] += v
                if r != c:
                    C[c, r] += v
            cost.append(C)
        con_blocks = []
        for bi, size in enumerate(self.block_sizes):
            rows, cols, vals = [], [], []
            for row, r, c, v in self._entries[bi]:
                rows.append(row)
                cols.append(r * size + c)
                vals.append(v)
                if r != c:
                    rows.append(row)
                    cols.append(c * size + r)
                    vals.append(v)
            con_blocks.append(
                sp.csr_matrix(
                    (vals, (rows, cols)), shape=(m, size * size), dtype=float
                )
            )
        nf = len(self._free_cost)
        if nf:
            rows = [e[0] for e in self._free_entries]
            cols = [e[1] for e in self._free_entries]
            vals = [e[2] for e in self._free_entries]
            free_cols = sp.csr_matrix((vals, (rows, cols)), shape=(m, nf), dtype=float)
            free_cost = np.array(self._free_cost)
        else:
            free_cols = None
            free_cost = None
        return SdpProblem(
            block_sizes=list(self.block_sizes),
            cost=cost,
            con_blocks=con_blocks,
            b=np.array(self._rhs, dtype=float),
            free_cost=free_cost,
            free_cols=free_cols,
        )


# ----------------------------------------------------------------------
# solver internals


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def _min_eig_step(block: np.ndarray, delta: np.ndarray) -> float:
    """Largest alpha with block + alpha*delta PSD: the generalized
    eigenvalue bound -1 / lambda_min(delta, block)."""
    try:
        w = sla.eigh(
            delta, block, eigvals_only=True, check_finite=False,
            subset_by_index=(0, 0),
        )
        wmin = w[0]
    except (sla.LinAlgError, ValueError):
        n = block.shape[0]
        jitter = 1e-12 * max(np.trace(block) / n, 1.0)
        w = sla.eigh(
            delta, block + jitter * np.eye(n), eigvals_only=True,
            check_finite=False, subset_by_index=(0, 0),
        )
        wmin = w[0]
    if wmin >= 0:
        return np.inf
    return -1.0 / wmin


class _Scaling:
    """Per-block NT scaling data."""

    def __init__(self, X: np.ndarray, S: np.ndarray):
        n = X.shape[0]
        Gx = np.linalg.cholesky(X)
        Gs = np.linalg.cholesky(S)
        U, sv, Vt = np.linalg.svd(Gs.T @ Gx)
        V = Vt.T
        GxV = Gx @ V
        self.W = _sym(GxV @ np.diag(1.0 / sv) @ GxV.T)
        lam, Q = np.linalg.eigh(self.W)
        lam = np.maximum(lam, 1e-300)
        root = np.sqrt(lam)
        self.D = _sym(Q @ np.diag(root) @ Q.T)
        self.Dinv = _sym(Q @ np.diag(1.0 / root) @ Q.T)
        # scaled point V = D S D with eigen data for Lyapunov solves
        Vp = _sym(self.D @ S @ self.D)
        self.v_eig, self.v_P = np.linalg.eigh(Vp)

    def lyap_inv(self, Z: np.ndarray) -> np.ndarray:
        """Solve (V Y + Y V)/2 = Z for symmetric Y."""
        P = self.v_P
        Zp = P.T @ Z @ P
        denom = 0.5 * (self.v_eig[:, None] + self.v_eig[None, :])
        return P @ (Zp / denom) @ P.T


class _BlockEntries:
    """Per-block constraint entries bucketed by row sparsity.

    The Schur contribution of one constraint is W A_i W with A_i holding
    a handful of entries, so it is a low-rank update: for entries
    (a, b, v) of row i,  W A_i W = sum_e v_e W[:, a_e] W[b_e, :]'.
    Rows with similar entry counts are padded to a common width and the
    whole bucket is computed as one batched product; that keeps the work
    proportional to nnz * n^2 instead of m * n^3.
    """

    def __init__(self, P: sp.csr_matrix, n: int):
        self.n = n
        coo = P.tocoo()
        # keep the upper triangle only, halving the diagonal weight, and
        # symmetrize the batched product afterwards: T = T_raw + T_raw'
        a_all, b_all = np.divmod(coo.col, n)
        keep = a_all <= b_all
        rows_k = coo.row[keep]
        a_k = a_all[keep]
        b_k = b_all[keep]
        v_k = coo.data[keep].copy()
        v_k[a_k == b_k] *= 0.5
        order = np.argsort(rows_k, kind="stable")
        rows = rows_k[order]
        a_idx = a_k[order]
        b_idx = b_k[order]
        vals = v_k[order]
        counts = np.bincount(rows, minlength=P.shape[0])
        self.buckets = []
        nonzero_rows = np.where(counts > 0)[0]
        if len(nonzero_rows) == 0:
            return
        starts = np.zeros(P.shape[0] + 1, dtype=np.int64)
        np.cumsum(counts, out=starts[1:])
        # bucket rows by padded width (powers of two)
        widths = {}
        for r in nonzero_rows:
            k = counts[r]
            key = 1 << int(np.ceil(np.log2(k)))
            widths.setdefault(key, []).append(r)
        for K, rlist in sorted(widths.items()):
            rarr = np.array(rlist)
            R = len(rarr)
            A = np.zeros((R, K), dtype=np.int64)
            B = np.zeros((R, K), dtype=np.int64)
            V = np.zeros((R, K))
            for i, r in enumerate(rarr):
                s, e = starts[r], starts[r + 1]
                A[i, : e - s] = a_idx[s:e]
                B[i, : e - s] = b_idx[s:e]
                V[i, : e - s] = vals[s:e]
            self.buckets.append((rarr, A, B, V))
        self.P_T = sp.csr_matrix(P.T)

    def schur_into(self, W: np.ndarray, M: np.ndarray, chunk_target: float = 8e6):
        """Accumulate M[rows, :] += <A_i, W A_row W> over all i.

        Only the upper half of each W A_row W is formed (T_raw); every
        A_i is symmetric, so <A_i, T_raw + T_raw'> = 2 <A_i, T_raw> and
        the symmetrization never needs to be materialized.
        """
        n = self.n
        for rarr, A, B, V in self.buckets:
            R, K = A.shape
            rows_per_chunk = max(1, int(chunk_target // max(n * n, K * n)))
            for start in range(0, R, rows_per_chunk):
                stop = min(R, start + rows_per_chunk)
                k = stop - start
                G1 = W[A[start:stop].ravel()].reshape(k, K, n) * V[start:stop][:, :, None]
                G2 = W[B[start:stop].ravel()].reshape(k, K, n)
                T = np.matmul(G1.transpose(0, 2, 1), G2)  # upper half only
                M[rarr[start:stop], :] += 2.0 * (T.reshape(k, n * n) @ self.P_T)


def _apply_A(prob: SdpProblem, Zs: list[np.ndarray], xf: Optional[np.ndarray]) -> np.ndarray:
    out = np.zeros(prob.m)
    for P, Z in zip(prob.con_blocks, Zs):
        out += P @ Z.ravel()
    if xf is not None and prob.free_cols is not None:
        out += prob.free_cols @ xf
    return out


def _apply_At(prob: SdpProblem, y: np.ndarray) -> list[np.ndarray]:
    outs = []
    for P, size in zip(prob.con_blocks, prob.block_sizes):
        outs.append(_sym((P.T @ y).reshape(size, size)))
    return outs


def _inner(Xs: list[np.ndarray], Ys: list[np.ndarray]) -> float:
    return float(sum(np.tensordot(X, Y) for X, Y in zip(Xs, Ys)))


class _KktFactor:
    """Factorization of [[M, Af], [Af', 0]] with static regularization and
    one round of iterative refinement."""

    def __init__(self, M: np.ndarray, Af: Optional[sp.csr_matrix]):
        m = M.shape[0]
        self.M = M
        self.Af = Af
        scale = max(np.trace(M) / max(m, 1), 1e-10)
        eps = 1e-13 * scale
        attempt = 0
        while True:
            try:
                self.L = np.linalg.cholesky(M + eps * np.eye(m))
                break
            except np.linalg.LinAlgError:
                attempt += 1
                eps *= 100.0
                if attempt > 6:
                    raise SdpError("Schur complement factorization failed")
        self.eps = eps
        if Af is not None:
            Afd = Af.toarray()
            F = sla.solve_triangular(self.L, Afd, lower=True, check_finite=False)
            Sf = F.T @ F
            nf = Sf.shape[0]
            sf_scale = max(np.trace(Sf) / max(nf, 1), 1e-10)
            eps_f = 1e-12 * sf_scale
            attempt = 0
            while True:
                try:
                    self.Lf = np.linalg.cholesky(Sf + eps_f * np.eye(nf))
                    break
                except np.linalg.LinAlgError:
                    attempt += 1
                    eps_f *= 100.0
                    if attempt > 6:
                        raise SdpError("free-variable Schur factorization failed")
            self.F = F
        else:
            self.Lf = None
            self.F = None

    def _solve_M(self, r: np.ndarray) -> np.ndarray:
        t = sla.solve_triangular(self.L, r, lower=True, check_finite=False)
        return sla.solve_triangular(self.L.T, t, lower=False, check_finite=False)

    def _solve_once(self, r1: np.ndarray, r2: Optional[np.ndarray]):
        if self.Af is None:
            return self._solve_M(r1), None
        t1 = sla.solve_triangular(self.L, r1, lower=True, check_finite=False)
        rhs_f = self.F.T @ t1 - r2
        u = sla.solve_triangular(self.Lf, rhs_f, lower=True, check_finite=False)
        dxf = sla.solve_triangular(self.Lf.T, u, lower=False, check_finite=False)
        dy = self._solve_M(r1 - self.Af @ dxf)
        return dy, dxf

    def solve(self, r1: np.ndarray, r2: Optional[np.ndarray]):
        dy, dxf = self._solve_once(r1, r2)
        # one refinement pass against the unregularized system
        res1 = r1 - self.M @ dy
        if self.Af is not None:
            res1 -= self.Af @ dxf
            res2 = r2 - self.Af.T @ dy
        else:
            res2 = None
        cy, cxf = self._solve_once(res1, res2)
        dy = dy + cy
        if dxf is not None:
            dxf = dxf + cxf
        return dy, dxf


def solve_sdp(prob: SdpProblem, opts: SdpOptions | None = None) -> SdpSolution:
    """Run the homogeneous self-dual interior-point method."""
    opts = opts or SdpOptions()
    m = prob.m
    sizes = prob.block_sizes
    if not sizes:
        raise SdpError("problem has no PSD blocks")
    nf = prob.n_free

    # --- presolve: empty rows are either trivially satisfied or a
    # trivial infeasibility certificate
    row_norms = np.zeros(m)
    for P in prob.con_blocks:
        row_norms += np.asarray(P.multiply(P).sum(axis=1)).ravel()
    if prob.free_cols is not None:
        row_norms += np.asarray(
            prob.free_cols.multiply(prob.free_cols).sum(axis=1)
        ).ravel()
    row_norms = np.sqrt(row_norms)
    empty = row_norms == 0.0
    if np.any(empty):
        bad = np.where(empty & (np.abs(prob.b) > 1e-12))[0]
        if len(bad):
            i = int(bad[0])
            y = np.zeros(m)
            y[i] = np.sign(prob.b[i])
            cert = SdpCertificate(
                kind=STATUS_PRIMAL_INFEASIBLE,
                y=y / abs(prob.b[i]),
                S=[np.zeros((s, s)) for s in sizes],
                quality=0.0,
            )
            return SdpSolution(status=STATUS_PRIMAL_INFEASIBLE, certificate=cert)
        keep = ~empty
        sub = SdpProblem(
            block_sizes=list(sizes),
            cost=prob.cost,
            con_blocks=[P[keep] for P in prob.con_blocks],
            b=prob.b[keep],
            free_cost=prob.free_cost,
            free_cols=None if prob.free_cols is None else prob.free_cols[keep],
        )
        sol = solve_sdp(sub, opts)
        # re-embed duals over the dropped rows
        if len(sol.y_dual):
            y_full = np.zeros(m)
            y_full[keep] = sol.y_dual
            sol.y_dual = y_full
        if sol.certificate is not None and sol.certificate.y is not None:
            y_full = np.zeros(m)
            y_full[keep] = sol.certificate.y
            sol.certificate.y = y_full
        return sol

    # --- scaling: equilibrate rows, normalize cost and rhs
    d_row = 1.0 / np.maximum(row_norms, 1e-8)
    P_blocks = [sp.csr_matrix(sp.diags(d_row) @ P) for P in prob.con_blocks]
    Af = None if prob.free_cols is None else sp.csr_matrix(sp.diags(d_row) @ prob.free_cols)
    b = prob.b * d_row
    c_norm = max(
        max((np.abs(C).max() if C.size else 0.0) for C in prob.cost),
        (np.abs(prob.free_cost).max() if nf else 0.0),
        1e-8,
    )
    b_norm = max(np.abs(b).max(), 1e-8)
    Cs = [C / c_norm for C in prob.cost]
    cf = prob.free_cost / c_norm if nf else None
    b = b / b_norm
    scaled = SdpProblem(list(sizes), Cs, P_blocks, b, cf, Af)

    block_entries = [_BlockEntries(P, s) for P, s in zip(P_blocks, sizes)]

    nu = sum(sizes)
    X = [np.eye(s) for s in sizes]
    S = [np.eye(s) for s in sizes]
    y = np.zeros(m)
    xf = np.zeros(nf) if nf else None
    tau, kappa = 1.0, 1.0

    b_norm_s = 1.0 + np.linalg.norm(b)
    c_norm_s = 1.0 + np.sqrt(sum(float(np.tensordot(C, C)) for C in Cs))

    best = None
    best_metric = np.inf
    history: list[dict] = []
    status = STATUS_NUMERICAL_FAILURE
    stall = 0
    it = 0

    def current_metrics():
        Aty = _apply_At(scaled, y)
        pobj = (_inner(Cs, X) + (cf @ xf if nf else 0.0)) / tau
        dobj = float(b @ y) / tau
        rp = b * tau - _apply_A(scaled, X, xf)
        pres = np.linalg.norm(rp / tau) / b_norm_s
        dres_sq = 0.0
        for C, At, Sb in zip(Cs, Aty, S):
            R = C * tau - At - Sb
            dres_sq += float(np.tensordot(R, R))
        dres = np.sqrt(dres_sq) / tau / c_norm_s
        if nf:
            fres = np.linalg.norm(cf * tau - Af.T @ y) / tau / c_norm_s
            dres = max(dres, fres)
        relgap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        return pobj, dobj, pres, dres, relgap

    def check_certificates() -> Optional[SdpSolution]:
        # primal infeasibility: y with b'y > 0 and -A*(y) PSD
        by = float(b @ y)
        if by > 1e-12:
            yn = y / by
            Sray = [-Z for Z in _apply_At(scaled, yn)]
            viol = 0.0
            for Z in Sray:
                w = np.linalg.eigvalsh(Z)
                viol = max(viol, max(0.0, -w[0]))
            if nf:
                viol = max(viol, float(np.abs(Af.T @ yn).max()))
            if viol <= opts.tol_cert:
                y_out = yn * d_row / (b_norm / 1.0)
                # renormalize in original data: b'y_out = 1
                by_orig = float(prob.b @ y_out)
                y_out = y_out / by_orig
                Sout = [-Z for Z in _apply_At(prob, y_out)]
                cert = SdpCertificate(
                    kind=STATUS_PRIMAL_INFEASIBLE, y=y_out, S=Sout, quality=viol
                )
                return SdpSolution(
                    status=STATUS_PRIMAL_INFEASIBLE,
                    certificate=cert,
                    iterations=it,
                    history=history,
                )
        # dual infeasibility: X >= 0 with A(X) = 0 and <C, X> < 0
        cost_ray = _inner(Cs, X) + (cf @ xf if nf else 0.0)
        if cost_ray < -1e-12:
            scale = -cost_ray
            Xray = [Z / scale for Z in X]
            xfray = xf / scale if nf else None
            resid = float(np.abs(_apply_A(scaled, Xray, xfray)).max())
            xnorm = max(max(np.abs(Z).max() for Z in Xray), 1.0)
            if resid <= opts.tol_cert * xnorm:
                Xout = [Z * (b_norm / c_norm) for Z in Xray]
                xfout = xfray * (b_norm / c_norm) if nf else np.zeros(0)
                cost_o = _inner(prob.cost, Xout) + (
                    prob.free_cost @ xfout if nf else 0.0
                )
                Xout = [Z / abs(cost_o) for Z in Xout]
                xfout = xfout / abs(cost_o) if nf else np.zeros(0)
                cert = SdpCertificate(
                    kind=STATUS_DUAL_INFEASIBLE,
                    X=Xout,
                    x_free=xfout,
                    quality=resid,
                )
                return SdpSolution(
                    status=STATUS_DUAL_INFEASIBLE,
                    certificate=cert,
                    iterations=it,
                    history=history,
                )
        return None

    def pack_solution(status: str, pobj, dobj, pres, dres, relgap) -> SdpSolution:
        Xo = [Z * (b_norm / tau) for Z in X]
        So = [Z * (c_norm / tau) for Z in S]
        yo = y * d_row * (c_norm / tau)
        xfo = xf * (b_norm / tau) if nf else np.zeros(0)
        return SdpSolution(
            status=status,
            X=Xo,
            S=So,
            y_dual=yo,
            x_free=xfo,
            obj_primal=pobj * c_norm * b_norm,
            obj_dual=dobj * c_norm * b_norm,
            gap=relgap,
            primal_res=pres,
            dual_res=dres,
            iterations=it,
            history=history,
        )

    prev_metric = np.inf
    for it in range(1, opts.max_iter + 1):
        pobj, dobj, pres, dres, relgap = current_metrics()
        mu = (_inner(X, S) + tau * kappa) / (nu + 1)
        history.append(
            dict(
                iter=it,
                mu=mu,
                pobj=pobj * c_norm * b_norm,
                dobj=dobj * c_norm * b_norm,
                pres=pres,
                dres=dres,
                relgap=relgap,
                tau=tau,
                kappa=kappa,
            )
        )
        if not np.isfinite(mu) or not np.isfinite(pres) or not np.isfinite(dres):
            break
        metric = max(pres, dres, relgap)
        if metric < best_metric and tau > 1e-10:
            best_metric = metric
            best = (
                [Z.copy() for Z in X],
                [Z.copy() for Z in S],
                y.copy(),
                xf.copy() if nf else None,
                tau,
                (pobj, dobj, pres, dres, relgap),
            )
        if pres <= opts.tol_feas and dres <= opts.tol_feas and relgap <= opts.tol_gap:
            return pack_solution(STATUS_OPTIMAL, pobj, dobj, pres, dres, relgap)
        if tau < 1e-8 * max(1.0, kappa):
            res = check_certificates()
            if res is not None:
                return res
        if metric > 0.5 * prev_metric and mu < 1e-14:
            break
        prev_metric = min(prev_metric, metric)

        # residuals for the Newton systems
        rp = b * tau - _apply_A(scaled, X, xf)
        Aty = _apply_At(scaled, y)
        Rd = [C * tau - At - Sb for C, At, Sb in zip(Cs, Aty, S)]
        rf = (cf * tau - Af.T @ y) if nf else None
        rg = kappa + _inner(Cs, X) + (cf @ xf if nf else 0.0) - float(b @ y)

        # NT scaling and Schur complement
        try:
            scal = [_Scaling(Xb, Sb) for Xb, Sb in zip(X, S)]
        except (np.linalg.LinAlgError, ValueError):
            break
        M = np.zeros((m, m))
        u = np.zeros(m)
        e = 0.0
        WCW = []
        WRdW = []
        for sc, P, ent, C, Rdb in zip(scal, P_blocks, block_entries, Cs, Rd):
            ent.schur_into(sc.W, M)
            if np.any(C):
                wcw = _sym(sc.W @ C @ sc.W)
                u += P @ wcw.ravel()
                e += float(np.tensordot(C, wcw))
            else:
                wcw = np.zeros_like(C)
            WCW.append(wcw)
            WRdW.append(_sym(sc.W @ Rdb @ sc.W))
        M = _sym(M)

        try:
            kkt = _KktFactor(M, Af)
        except SdpError:
            break
        p1, q1 = kkt.solve(b + u, cf if nf else None)

        def solve_direction(Rc: list[np.ndarray], r_tk: float):
            ARc = np.zeros(m)
            CRc = 0.0
            for P, Rcb, C in zip(P_blocks, Rc, Cs):
                ARc += P @ Rcb.ravel()
                CRc += float(np.tensordot(C, Rcb))
            h1 = rp - ARc + np.zeros(m)
            for P, Z in zip(P_blocks, WRdW):
                h1 += P @ Z.ravel()
            h2 = rf if nf else None
            CWRdW = sum(float(np.tensordot(C, Z)) for C, Z in zip(Cs, WRdW))
            h3 = -rg - r_tk / tau - CRc + CWRdW
            p2, q2 = kkt.solve(h1, h2)
            denom = float((u - b) @ p1) + (float(cf @ q1) if nf else 0.0) - (e + kappa / tau)
            if abs(denom) < 1e-300:
                raise SdpError("singular tau pivot")
            num = h3 - float((u - b) @ p2) - (float(cf @ q2) if nf else 0.0)
            dtau = num / denom
            dy = p2 + dtau * p1
            dxf = (q2 + dtau * q1) if nf else None
            Aty_d = _apply_At(scaled, dy)
            dS = [C * dtau - At + Rdb for C, At, Rdb in zip(Cs, Aty_d, Rd)]
            dX = [
                _sym(Rcb - sc.W @ dSb @ sc.W)
                for Rcb, sc, dSb in zip(Rc, scal, dS)
            ]
            dS = [_sym(Z) for Z in dS]
            dkappa = (r_tk - kappa * dtau) / tau
            return dX, dS, dy, dxf, dtau, dkappa

        def max_step(dX, dS, dtau, dkappa):
            alpha = np.inf
            for Xb, dXb in zip(X, dX):
                alpha = min(alpha, _min_eig_step(Xb, dXb))
            for Sb, dSb in zip(S, dS):
                alpha = min(alpha, _min_eig_step(Sb, dSb))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        # predictor
        Rc_aff = [-Xb for Xb in X]
        try:
            aff = solve_direction(Rc_aff, -tau * kappa)
        except (SdpError, ValueError, np.linalg.LinAlgError):
            break
        dXa, dSa, dya, dxfa, dtaua, dkappaa = aff
        alpha_aff = min(1.0, max_step(dXa, dSa, dtaua, dkappaa))
        # centering parameter
        ip = 0.0
        for Xb, dXb, Sb, dSb in zip(X, dXa, S, dSa):
            ip += float(np.tensordot(Xb + alpha_aff * dXb, Sb + alpha_aff * dSb))
        ip += (tau + alpha_aff * dtaua) * (kappa + alpha_aff * dkappaa)
        mu_aff = ip / (nu + 1)
        sigma = min(1.0, max((mu_aff / mu) ** 3, 1e-10))

        # corrector
        Rc = []
        for sc, Xb, dXb, dSb in zip(scal, X, dXa, dSa):
            dXt = sc.Dinv @ dXb @ sc.Dinv
            dSt = sc.D @ dSb @ sc.D
            Tcorr = 0.5 * (dXt @ dSt + dSt @ dXt)
            Z = sigma * mu * np.eye(Xb.shape[0]) - Tcorr
            Rcb = sc.D @ sc.lyap_inv(_sym(Z)) @ sc.D - Xb
            Rc.append(_sym(Rcb))
        r_tk = sigma * mu - tau * kappa - dtaua * dkappaa
        try:
            dX, dS, dy, dxf, dtau, dkappa = solve_direction(Rc, r_tk)
        except (SdpError, ValueError, np.linalg.LinAlgError):
            break
        alpha = min(1.0, opts.step_frac * max_step(dX, dS, dtau, dkappa))
        if not np.isfinite(alpha) or alpha <= 1e-10:
            break

        # take the step, backing off if a Cholesky of the new point fails;
        # equal-size blocks are checked in one stacked factorization
        size_groups: dict[int, list[int]] = {}
        for bi, s_b in enumerate(sizes):
            size_groups.setdefault(s_b, []).append(bi)
        ok = False
        for _ in range(8):
            Xn = [_sym(Xb + alpha * dXb) for Xb, dXb in zip(X, dX)]
            Sn = [_sym(Sb + alpha * dSb) for Sb, dSb in zip(S, dS)]
            taun = tau + alpha * dtau
            kappan = kappa + alpha * dkappa
            if taun > 0 and kappan > 0:
                try:
                    for idxs in size_groups.values():
                        np.linalg.cholesky(np.stack([Xn[i] for i in idxs]))
                        np.linalg.cholesky(np.stack([Sn[i] for i in idxs]))
                    ok = True
                    break
                except np.linalg.LinAlgError:
                    pass
            alpha *= 0.8
        if not ok:
            break
        X, S, tau, kappa = Xn, Sn, taun, kappan
        y = y + alpha * dy
        if nf:
            xf = xf + alpha * dxf
        if alpha < 1e-4:
            stall += 1
            if stall >= 4:
                break
        else:
            stall = 0

    # no clean convergence: try certificates, then a degraded solution
    res = check_certificates()
    if res is not None:
        return res
    if best is not None:
        Xb, Sb, yb, xfb, taub, (pobj, dobj, pres, dres, relgap) = best
        X, S, y, tau = Xb, Sb, yb, taub
        xf = xfb
        if (
            pres <= opts.tol_slack_accept
            and dres <= opts.tol_slack_accept
            and relgap <= opts.tol_slack_accept
        ):
            return pack_solution(STATUS_OPTIMAL, pobj, dobj, pres, dres, relgap)
        return pack_solution(STATUS_NUMERICAL_FAILURE, pobj, dobj, pres, dres, relgap)
    return SdpSolution(status=STATUS_NUMERICAL_FAILURE, iterations=it, history=history)


def feasibility_sdp(prob: SdpProblem, opts: SdpOptions | None = None) -> SdpSolution:
    """Solve with the cost zeroed out; status reports feasibility."""
    zero_cost = [np.zeros_like(C) for C in prob.cost]
    zero_free = np.zeros(prob.n_free) if prob.n_free else None
    feas = SdpProblem(
        block_sizes=list(prob.block_sizes),
        cost=zero_cost,
        con_blocks=prob.con_blocks,
        b=prob.b,
        free_cost=zero_free,
        free_cols=prob.free_cols,
    )
    return solve_sdp(feas, opts)


def dump_sdpa(prob: SdpProblem, path: str):
    """Sparse SDPA text dump for cross-checking against external solvers.

    Free scalars are emitted as differences of paired 1x1 blocks (the dump
    is for debugging only; the solver itself never splits them).
    """
    nf = prob.n_free
    sizes = list(prob.block_sizes) + ([1] * (2 * nf) if nf else [])
    with open(path, "w") as fh:
        fh.write(f"{prob.m} = mDIM\n")
        fh.write(f"{len(sizes)} = nBLOCK\n")
        fh.write(" ".join(str(s) for s in sizes) + " = bLOCKsTRUCT\n")
        fh.write(" ".join(f"{v:.17g}" for v in prob.b) + "\n")
        for bi, C in enumerate(prob.cost):
            for r in range(C.shape[0]):
                for c in range(r, C.shape[1]):
                    if C[r, c] != 0.0:
                        fh.write(f"0 {bi+1} {r+1} {c+1} {C[r, c]:.17g}\n")
        if nf:
            base = len(prob.block_sizes)
            for j in range(nf):
                v = prob.free_cost[j]
                if v != 0.0:
                    fh.write(f"0 {base+2*j+1} 1 1 {v:.17g}\n")
                    fh.write(f"0 {base+2*j+2} 1 1 {-v:.17g}\n")
        for bi, P in enumerate(prob.con_blocks):
            size = prob.block_sizes[bi]
            coo = P.tocoo()
            for i, flat, v in zip(coo.row, coo.col, coo.data):
                r, c = divmod(flat, size)
                if r <= c and v != 0.0:
                    fh.write(f"{i+1} {bi+1} {r+1} {c+1} {v:.17g}\n")
        if nf and prob.free_cols is not None:
            base = len(prob.block_sizes)
            coo = prob.free_cols.tocoo()
            for i, j, v in zip(coo.row, coo.col, coo.data):
                if v != 0.0:
                    fh.write(f"{i+1} {base+2*j+1} 1 1 {v:.17g}\n")
                    fh.write(f"{i+1} {base+2*j+2} 1 1 {-v:.17g}\n")
