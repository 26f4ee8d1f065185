import numpy as np
import pytest

from gsipsolve.momentsos import Pop
from gsipsolve.poly import Polynomial
from gsipsolve.popsolve import (
    STATUS_POP_INFEASIBLE,
    STATUS_POP_OPTIMAL,
    PopOptions,
    check_membership,
    minimize,
    moment_feasibility,
)


def poly(nvars, terms):
    return Polynomial(nvars, terms)


class TestMinimize:
    def test_parabola(self):
        pop = Pop(1, poly(1, {(2,): 1.0, (0,): -1.0}))
        res = minimize(pop)
        assert res.status == STATUS_POP_OPTIMAL
        assert abs(res.value + 1.0) < 1e-6
        assert abs(res.minimizers[0][0]) < 1e-5

    def test_empty_interval_infeasible(self):
        pop = Pop(
            1,
            poly(1, {(1,): 1.0}),
            ineq_constraints=[
                poly(1, {(1,): 1.0, (0,): -1.0}),  # x >= 1
                poly(1, {(1,): -1.0}),  # -x >= 0
            ],
        )
        res = minimize(pop)
        assert res.status == STATUS_POP_INFEASIBLE
        assert res.certificate_quality <= 1e-5

    def test_example31_lower_problem(self):
        # min u^5 - 3 x2^2 over U(x0) at the paper's first iterate
        x2h = 0.4350
        g = poly(1, {(5,): 1.0, (0,): -3 * x2h**2})
        U = [
            poly(1, {(1,): -1.0}),  # -u >= 0
            poly(1, {(1,): 1.0, (0,): 2.0}),  # u + 2 >= 0
            poly(1, {(5,): 1.0, (0,): 4.0 + x2h**2 - 1.0}),  # u^5+4x1^2+x2^2-1 >= 0
        ]
        res = minimize(Pop(1, g, ineq_constraints=U))
        assert res.status == STATUS_POP_OPTIMAL
        assert abs(res.minimizers[0][0] + 1.2611) < 1e-3
        # oracle: dense grid on the feasible interval
        us = np.linspace(-1.3, 0, 3001)
        feas = [u for u in us if u**5 + 4 + x2h**2 - 1 >= 0]
        grid_min = min(u**5 - 3 * x2h**2 for u in feas)
        assert abs(res.value - grid_min) < 5e-3

    def test_monotone_bounds_log(self):
        # quartic with two basins; force several orders to be solved
        pop = Pop(
            1,
            poly(1, {(4,): 1.0, (2,): -2.0, (1,): 0.3}),
            ineq_constraints=[poly(1, {(0,): 4.0, (2,): -1.0})],
        )
        res = minimize(pop, PopOptions(k_min=2, k_max=4))
        vals = [v for _, v in res.bounds_log]
        assert all(b >= a - 1e-7 for a, b in zip(vals, vals[1:]))

    def test_minimizers_pass_membership(self):
        pop = Pop(
            2,
            poly(2, {(1, 0): 1.0, (0, 1): 2.0}),
            ineq_constraints=[
                poly(2, {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0}),
            ],
        )
        res = minimize(pop)
        assert res.status == STATUS_POP_OPTIMAL
        for p in res.minimizers:
            ok, viol = check_membership(p, pop, 1e-5)
            assert ok, viol

    def test_flat_face_mean_or_perturbed_point(self):
        # min x1 over [0,1]^2: every (0, t) is optimal; a usable point must
        # still come back from the fallback path
        pop = Pop(
            2,
            poly(2, {(1, 0): 1.0}),
            ineq_constraints=[
                poly(2, {(1, 0): 1.0}),
                poly(2, {(0, 0): 1.0, (1, 0): -1.0}),
                poly(2, {(0, 1): 1.0}),
                poly(2, {(0, 0): 1.0, (0, 1): -1.0}),
            ],
        )
        res = minimize(pop, PopOptions(k_max=2))
        assert abs(res.value) < 1e-6
        assert len(res.minimizers) == 1
        x = res.minimizers[0]
        assert abs(x[0]) < 1e-4
        assert -1e-6 <= x[1] <= 1 + 1e-6

    def test_var_scale_roundtrip(self):
        # min (x - 50)^2 over [-100, 100], scaled internally to [-1, 1]
        pop = Pop(
            1,
            poly(1, {(2,): 1.0, (1,): -100.0, (0,): 2500.0}),
            ineq_constraints=[poly(1, {(0,): 1e4, (2,): -1.0})],
        )
        res = minimize(pop, PopOptions(var_scale=[100.0]))
        assert res.status == STATUS_POP_OPTIMAL
        assert abs(res.minimizers[0][0] - 50.0) < 1e-3
        assert abs(res.value) < 1e-4

    def test_brute_force_agreement_2d(self):
        # bivariate quartic over a box against a dense grid
        pop = Pop(
            2,
            poly(
                2,
                {(4, 0): 1.0, (0, 4): 1.0, (2, 1): -1.0, (1, 0): 0.5, (0, 1): -0.3},
            ),
            ineq_constraints=[
                poly(2, {(0, 0): 1.0, (2, 0): -1.0}),
                poly(2, {(0, 0): 1.0, (0, 2): -1.0}),
            ],
        )
        res = minimize(pop)
        assert res.status == STATUS_POP_OPTIMAL
        xs = np.linspace(-1, 1, 201)
        X, Y = np.meshgrid(xs, xs)
        F = X**4 + Y**4 - X**2 * Y + 0.5 * X - 0.3 * Y
        assert abs(res.value - F.min()) < 5e-3


class TestCheckMembership:
    def test_boundary_point(self):
        pop = Pop(1, Polynomial.zero(1), ineq_constraints=[poly(1, {(1,): 1.0})])
        ok, viol = check_membership([0.0], pop)
        assert ok and viol == 0.0

    def test_small_violation_rejected(self):
        pop = Pop(1, Polynomial.zero(1), ineq_constraints=[poly(1, {(1,): 1.0})])
        ok, viol = check_membership([-1e-3], pop, feas_tol=1e-6)
        assert not ok and abs(viol - 1e-3) < 1e-12

    def test_paper_optimum_in_box(self):
        box = [
            poly(2, {(1, 0): 1.0}),
            poly(2, {(0, 0): 1.0, (1, 0): -1.0}),
            poly(2, {(0, 1): 1.0}),
            poly(2, {(0, 0): 1.0, (0, 1): -1.0}),
        ]
        pop = Pop(2, Polynomial.zero(2), ineq_constraints=box)
        ok, _ = check_membership([0.5, 0.0], pop)
        assert ok


class TestMomentFeasibility:
    def test_empty(self):
        eq = []
        ineq = [poly(1, {(1,): 1.0, (0,): -1.0}), poly(1, {(1,): -1.0})]
        assert moment_feasibility(eq, ineq, 1) == "empty"

    def test_nonempty(self):
        ineq = [poly(1, {(1,): 1.0}), poly(1, {(0,): 1.0, (1,): -1.0})]
        assert moment_feasibility([], ineq, 1) == "feasible"
