import numpy as np
import pytest
import scipy.optimize

from gsipsolve.sdp import (
    STATUS_DUAL_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_PRIMAL_INFEASIBLE,
    SdpBuilder,
    SdpOptions,
    dump_sdpa,
    feasibility_sdp,
    solve_sdp,
)


def scalar_problem(rhs, cost=1.0):
    bld = SdpBuilder()
    b0 = bld.add_block(1)
    bld.set_cost(b0, 0, 0, cost)
    row = bld.new_constraint(rhs)
    bld.add_entry(row, b0, 0, 0, 1.0)
    return bld.build()


class TestScalarCases:
    def test_min_x11_equals_one(self):
        sol = solve_sdp(scalar_problem(1.0))
        assert sol.status == STATUS_OPTIMAL
        assert abs(sol.obj_primal - 1.0) < 1e-7
        assert abs(sol.X[0][0, 0] - 1.0) < 1e-7

    def test_negative_rhs_infeasible(self):
        sol = solve_sdp(scalar_problem(-1.0))
        assert sol.status == STATUS_PRIMAL_INFEASIBLE
        cert = sol.certificate
        assert cert is not None and cert.y is not None
        # improving ray: b'y > 0 and sum y_i A_i <= 0
        assert -1.0 * cert.y[0] > 0.99
        combo = cert.y[0] * 1.0
        assert combo <= 1e-6

    def test_feasibility_wrapper(self):
        assert feasibility_sdp(scalar_problem(1.0)).status == STATUS_OPTIMAL
        assert (
            feasibility_sdp(scalar_problem(-1.0)).status == STATUS_PRIMAL_INFEASIBLE
        )


class TestTwoByTwo:
    def test_trace_completion(self):
        # min trace(X) s.t. X12 = 1, X PSD; analytic optimum 2 at [[1,1],[1,1]]
        # oracle: parameterize X11, X22 >= 0 with X11*X22 >= 1, minimize sum
        grid = np.linspace(0.05, 5, 400)
        oracle = min(a + 1.0 / a for a in grid)
        bld = SdpBuilder()
        b0 = bld.add_block(2)
        bld.set_cost(b0, 0, 0, 1.0)
        bld.set_cost(b0, 1, 1, 1.0)
        row = bld.new_constraint(1.0)
        bld.add_entry(row, b0, 0, 1, 0.5)  # <A, X> = X12 (off-diag counted twice)
        sol = solve_sdp(bld.build())
        assert sol.status == STATUS_OPTIMAL
        assert abs(sol.obj_primal - 2.0) < 1e-6
        assert abs(sol.obj_primal - oracle) < 1e-2
        assert np.allclose(sol.X[0], np.ones((2, 2)), atol=1e-5)

    def test_dual_infeasible_unbounded(self):
        # min X11 - X22 with only X12 fixed: objective unbounded below
        bld = SdpBuilder()
        b0 = bld.add_block(2)
        bld.set_cost(b0, 0, 0, 1.0)
        bld.set_cost(b0, 1, 1, -1.0)
        row = bld.new_constraint(1.0)
        bld.add_entry(row, b0, 0, 1, 0.5)
        sol = solve_sdp(bld.build())
        assert sol.status == STATUS_DUAL_INFEASIBLE
        cert = sol.certificate
        assert cert is not None and cert.X is not None
        # improving ray: A(X) = 0, cost < 0, X PSD
        assert abs(cert.X[0][0, 1]) < 1e-6
        assert np.linalg.eigvalsh(cert.X[0])[0] > -1e-8


class TestAgainstLinprog:
    """Diagonal SDPs are LPs; scipy.optimize.linprog is the oracle."""

    @pytest.mark.parametrize("seed", range(6))
    def test_random_diagonal_sdp(self, seed):
        rng = np.random.default_rng(seed)
        n, m = 6, 3
        A = rng.standard_normal((m, n))
        x_feas = rng.uniform(0.5, 1.5, n)
        b = A @ x_feas
        c = rng.standard_normal(n) + 1.0
        lp = scipy.optimize.linprog(
            c, A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs"
        )
        bld = SdpBuilder()
        blocks = [bld.add_block(1) for _ in range(n)]
        for j in range(n):
            bld.set_cost(blocks[j], 0, 0, c[j])
        for i in range(m):
            row = bld.new_constraint(b[i])
            for j in range(n):
                if A[i, j] != 0.0:
                    bld.add_entry(row, blocks[j], 0, 0, A[i, j])
        sol = solve_sdp(bld.build())
        if lp.status == 0:
            assert sol.status == STATUS_OPTIMAL
            assert abs(sol.obj_primal - lp.fun) < 1e-6 * (1 + abs(lp.fun))
        elif lp.status == 3:
            assert sol.status == STATUS_DUAL_INFEASIBLE

    def test_free_variables_match_linprog(self):
        rng = np.random.default_rng(42)
        n_psd, n_free, m = 4, 3, 5
        A = rng.standard_normal((m, n_psd))
        F = rng.standard_normal((m, n_free))
        x0 = rng.uniform(0.5, 1.5, n_psd)
        z0 = rng.standard_normal(n_free)
        b = A @ x0 + F @ z0
        # build a dual-feasible cost so the LP is bounded
        y0 = rng.standard_normal(m)
        c = A.T @ y0 + rng.uniform(0.1, 1.0, n_psd)
        cf = F.T @ y0
        lp = scipy.optimize.linprog(
            np.concatenate([c, cf]),
            A_eq=np.hstack([A, F]),
            b_eq=b,
            bounds=[(0, None)] * n_psd + [(None, None)] * n_free,
            method="highs",
        )
        bld = SdpBuilder()
        blocks = [bld.add_block(1) for _ in range(n_psd)]
        fr = bld.add_free(n_free)
        for j in range(n_psd):
            bld.set_cost(blocks[j], 0, 0, c[j])
        for j in range(n_free):
            bld.set_free_cost(fr + j, cf[j])
        for i in range(m):
            row = bld.new_constraint(b[i])
            for j in range(n_psd):
                bld.add_entry(row, blocks[j], 0, 0, A[i, j])
            for j in range(n_free):
                bld.add_free_entry(row, fr + j, F[i, j])
        sol = solve_sdp(bld.build())
        assert lp.status == 0
        assert sol.status == STATUS_OPTIMAL
        assert abs(sol.obj_primal - lp.fun) < 1e-6 * (1 + abs(lp.fun))


class TestInvariants:
    def make_random_sdp(self, seed, n=4, m=5):
        rng = np.random.default_rng(seed)
        bld = SdpBuilder()
        b0 = bld.add_block(n)
        C = rng.standard_normal((n, n))
        C = C @ C.T + np.eye(n)  # PD cost keeps the problem bounded
        for r in range(n):
            for c in range(r, n):
                bld.set_cost(b0, r, c, C[r, c])
        X0 = rng.standard_normal((n, n))
        X0 = X0 @ X0.T + np.eye(n)
        for i in range(m):
            Ai = rng.standard_normal((n, n))
            Ai = Ai + Ai.T
            rhs = float(np.tensordot(Ai, X0))
            row = bld.new_constraint(rhs)
            for r in range(n):
                for c in range(r, n):
                    bld.add_entry(row, b0, r, c, Ai[r, c])
        return bld.build()

    @pytest.mark.parametrize("seed", range(4))
    def test_constraint_reconstruction(self, seed):
        prob = self.make_random_sdp(seed)
        sol = solve_sdp(prob)
        assert sol.status == STATUS_OPTIMAL
        binf = np.abs(prob.b).max()
        for i in range(prob.m):
            lhs = float((prob.con_blocks[0][i] @ sol.X[0].ravel())[0])
            assert abs(lhs - prob.b[i]) <= 1e-7 * (1 + binf)

    @pytest.mark.parametrize("seed", range(4))
    def test_psd_and_gap(self, seed):
        prob = self.make_random_sdp(seed)
        sol = solve_sdp(prob)
        assert np.linalg.eigvalsh(sol.X[0])[0] >= -1e-7
        assert np.linalg.eigvalsh(sol.S[0])[0] >= -1e-7
        assert abs(sol.obj_primal - sol.obj_dual) <= 1e-6 * (1 + abs(sol.obj_primal))

    def test_weak_duality_along_iterates(self):
        prob = self.make_random_sdp(11)
        sol = solve_sdp(prob)
        # HSD iterates keep the duality gap nonnegative up to residual noise
        scale = 1 + abs(sol.obj_primal)
        for row in sol.history:
            slack = 1e-8 * scale + 10 * scale * max(row["pres"], row["dres"])
            assert row["pobj"] >= row["dobj"] - slack

    def test_determinism(self):
        prob = self.make_random_sdp(7)
        s1 = solve_sdp(prob)
        s2 = solve_sdp(prob)
        assert s1.iterations == s2.iterations
        assert np.array_equal(s1.X[0], s2.X[0])
        assert np.array_equal(s1.y_dual, s2.y_dual)

    def test_empty_row_infeasible(self):
        bld = SdpBuilder()
        b0 = bld.add_block(1)
        bld.set_cost(b0, 0, 0, 1.0)
        row = bld.new_constraint(2.0)  # 0 = 2
        _ = row
        sol = solve_sdp(bld.build())
        assert sol.status == STATUS_PRIMAL_INFEASIBLE

    def test_sdpa_dump(self, tmp_path):
        prob = self.make_random_sdp(3)
        path = tmp_path / "prob.dat-s"
        dump_sdpa(prob, str(path))
        text = path.read_text()
        assert "mDIM" in text and "bLOCKsTRUCT" in text


class TestMomentFeasibilityStyle:
    def test_empty_interval_moment_infeasible(self):
        # moment feasibility of {u >= 1, -u >= 0} at order 1, written in the
        # tie formulation: X = (M1, L_{u-1}, L_{-u}),
        # M1 = [[y0, y1], [y1, y2]], y0 = 1, L1 = y1 - y0, L2 = -y1
        bld = SdpBuilder()
        M = bld.add_block(2)
        L1 = bld.add_block(1)
        L2 = bld.add_block(1)
        r0 = bld.new_constraint(1.0)  # y0 = 1
        bld.add_entry(r0, M, 0, 0, 1.0)
        r1 = bld.new_constraint(0.0)  # L1 - (y1 - y0) = 0
        bld.add_entry(r1, L1, 0, 0, 1.0)
        bld.add_entry(r1, M, 0, 1, -0.5)
        bld.add_entry(r1, M, 0, 0, 1.0)
        r2 = bld.new_constraint(0.0)  # L2 + y1 = 0
        bld.add_entry(r2, L2, 0, 0, 1.0)
        bld.add_entry(r2, M, 0, 1, 0.5)
        sol = feasibility_sdp(bld.build())
        assert sol.status == STATUS_PRIMAL_INFEASIBLE
        cert = sol.certificate
        assert cert is not None and cert.quality <= 1e-6

    def test_nonempty_interval_feasible(self):
        bld = SdpBuilder()
        M = bld.add_block(2)
        r0 = bld.new_constraint(1.0)
        bld.add_entry(r0, M, 0, 0, 1.0)
        sol = feasibility_sdp(bld.build())
        assert sol.status == STATUS_OPTIMAL
