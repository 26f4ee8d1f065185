import numpy as np
import pytest

from gsipsolve.extensions import (
    Extension,
    ExtensionError,
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
from gsipsolve.poly import Polynomial, monomial_basis


def poly(nvars, terms):
    return Polynomial(nvars, terms)


def const(nvars, v):
    return Polynomial.constant(nvars, v)


class TestBox:
    def test_degenerate_interval_takes_upper(self):
        # w(xhat) = l(xhat): sigma = 0 and q = w
        l = [poly(1, {(1,): 1.0})]
        w = [poly(1, {(1,): 1.0})]
        ext = box_extension(l, w, [0.3], [0.3])
        assert ext.q[0] == w[0]

    def test_constant_box(self):
        l = [const(2, 0.0)]
        w = [const(2, 1.0)]
        ext = box_extension(l, w, [0.1, 0.2], [0.3])
        assert (ext.q[0] - const(2, 0.3)).max_coeff() < 1e-12

    def test_example63_anchor(self):
        # substituted form of the motivating example: l = 1-4x1^2-x2^2, w = 0
        l = [poly(2, {(0, 0): 1.0, (2, 0): -4.0, (0, 2): -1.0})]
        w = [Polynomial.zero(2)]
        xhat = [1.0, 0.3251]
        uhat = [-3.1057]
        # sigma from the formula: (0 - uhat) / (0 - l(xhat))
        lval = l[0].eval(xhat)
        sigma = (0.0 - uhat[0]) / (0.0 - lval)
        assert abs(sigma - 1.0) < 1e-3
        ext = box_extension(l, w, xhat, uhat, anchor_tol=1e-3)  # 4-decimal table anchor
        # q is (numerically) the lower bound polynomial
        diff = ext.q[0] - l[0]
        assert diff.max_coeff() < 5e-3
        # anchor reproduced up to the table's own rounding
        assert abs(ext.q[0].eval(xhat) - uhat[0]) < 1e-4

    def test_anchor_outside_box_raises(self):
        l = [const(1, 0.0)]
        w = [const(1, 1.0)]
        with pytest.raises(ExtensionError):
            box_extension(l, w, [0.0], [1.5])


class TestSimplex:
    def test_anchor_at_floor(self):
        l = [poly(1, {(1,): 1.0}), const(1, 0.0)]
        w = const(1, 5.0)
        xhat, uhat = [0.5], [0.5, 0.0]
        ext = simplex_extension(l, w, xhat, uhat)
        assert ext.q[0] == l[0]
        assert ext.q[1] == l[1]

    def test_scalar_simplex(self):
        ext = simplex_extension([const(1, 0.0)], const(1, 1.0), [0.2], [0.5])
        assert ext.q[0] == const(1, 0.5)

    def test_b2_substituted_set(self):
        # Y(x) = {0 <= y, e'y <= x1} with the appendix solution as anchor
        nx, p = 2, 3
        l = [Polynomial.zero(nx) for _ in range(p)]
        w = poly(nx, {(1, 0): 1.0})
        xhat = [0.9999, 0.9999]
        uhat = [0.5, 0.5, 0.0]  # y = u^2 at u = (0.7071, 0.7071, 0)
        ext = simplex_extension(l, w, xhat, uhat, anchor_tol=1e-3)
        assert max(abs(q.eval(xhat) - u) for q, u in zip(ext.q, uhat)) < 1e-3
        # membership over X = [0,1]^2, sampled
        box = [
            poly(nx, {(1, 0): 1.0}),
            poly(nx, {(0, 0): 1.0, (1, 0): -1.0}),
            poly(nx, {(0, 1): 1.0}),
            poly(nx, {(0, 0): 1.0, (0, 1): -1.0}),
        ]
        pts = sample_set(nx, [0, 0], [1, 1], box)
        # membership constraints in (x, y): y_j >= 0 and x1 - e'y >= 0
        h = [poly(5, {(0, 0, 1, 0, 0): 1.0}),
             poly(5, {(0, 0, 0, 1, 0): 1.0}),
             poly(5, {(0, 0, 0, 0, 1): 1.0}),
             poly(5, {(1, 0, 0, 0, 0): 1.0, (0, 0, 1, 0, 0): -1.0,
                      (0, 0, 0, 1, 0): -1.0, (0, 0, 0, 0, 1): -1.0})]
        rep = validate_extension(ext, h, nx, pts)
        assert rep.worst_violation >= -1e-6


class TestBall:
    def test_center_anchor_zero_inner_radius(self):
        a = [poly(1, {(1,): 1.0}), const(1, 0.0)]
        ext = ball_extension(a, const(1, 0.0), const(1, 1.0), [0.4], [0.4, 0.0])
        assert ext.q[0] == a[0]
        assert ext.q[1] == a[1]

    def test_center_anchor_positive_inner_radius_rejected(self):
        a = [const(1, 0.0)]
        with pytest.raises(ExtensionError):
            ball_extension(a, const(1, 0.5), const(1, 1.0), [0.0], [0.0])

    def test_example65_anchor(self):
        # U(x) = {||u - (x1,x2,0,0,0)|| <= sqrt(3) x3}, table anchors
        nx, p = 5, 5
        a = [poly(nx, {(1, 0, 0, 0, 0): 1.0}), poly(nx, {(0, 1, 0, 0, 0): 1.0})]
        a += [Polynomial.zero(nx) for _ in range(3)]
        w = poly(nx, {(0, 0, 1, 0, 0): np.sqrt(3.0)})
        l = Polynomial.zero(nx)
        xhat = [-4.0182, -2.1036, 1.5910, 1.2571, 0.5634]
        uhat = [-4.2767, 0.6399, 0.0, 0.0, 0.0]
        ext = ball_extension(a, l, w, xhat, uhat, anchor_tol=1e-3)
        assert max(abs(q.eval(xhat) - u) for q, u in zip(ext.q, uhat)) < 2e-4
        # sampled membership: ||q(x) - a(x)|| <= sqrt(3) x3 wherever x3 >= 0
        rng_box_lo = [-5, -5, 0, -5, -5]
        rng_box_hi = [5, 5, 5, 5, 5]
        pts = sample_set(nx, rng_box_lo, rng_box_hi, [poly(nx, {(0, 0, 1, 0, 0): 1.0})], count=200)
        for x in pts:
            qv = np.array([q.eval(x) for q in ext.q])
            av = np.array([aj.eval(x) for aj in a])
            assert np.linalg.norm(qv - av) <= np.sqrt(3) * x[2] + 1e-7


class TestEllipsoid:
    def test_identity_shape_is_translation(self):
        nx = p = 2
        a = [poly(nx, {(1, 0): 1.0}), poly(nx, {(0, 1): 1.0})]
        D = [[const(nx, 1.0), const(nx, 0.0)], [const(nx, 0.0), const(nx, 1.0)]]
        xhat = [0.3, -0.2]
        uhat = [0.5, 0.1]
        ext = ellipsoid_extension(a, D, xhat, uhat)
        # q(x) = x + (uhat - xhat)
        for j, q in enumerate(ext.q):
            want = a[j] + const(nx, uhat[j] - xhat[j])
            assert (q - want).max_coeff() < 1e-12

    def test_anchor_at_center(self):
        nx = p = 2
        a = [const(nx, 1.0), const(nx, 2.0)]
        D = [[poly(nx, {(1, 0): 1.0}), const(nx, 0.0)], [const(nx, 0.0), poly(nx, {(0, 1): 1.0})]]
        ext = ellipsoid_extension(a, D, [1.0, 1.0], [1.0, 2.0])
        assert (ext.q[0] - a[0]).max_coeff() < 1e-12
        assert (ext.q[1] - a[1]).max_coeff() < 1e-12

    def test_design_centering_shape(self):
        # D(x) = [[x3, x4], [0, x5]] at a mid-run iterate; membership sampled
        nx, p = 5, 2
        a = [poly(nx, {(1, 0, 0, 0, 0): 1.0}), poly(nx, {(0, 1, 0, 0, 0): 1.0})]
        D = [
            [poly(nx, {(0, 0, 1, 0, 0): 1.0}), poly(nx, {(0, 0, 0, 1, 0): 1.0})],
            [Polynomial.zero(nx), poly(nx, {(0, 0, 0, 0, 1): 1.0})],
        ]
        xhat = np.array([1.5, 1.0, 1.4, -1.4, 0.9])
        Dhat = np.array([[1.4, -1.4], [0.0, 0.9]])
        z = np.array([0.6, -0.2])
        uhat = xhat[:2] + Dhat.T @ z  # inside: ||z|| < 1
        ext = ellipsoid_extension(a, D, xhat, uhat)
        assert max(abs(q.eval(xhat) - u) for q, u in zip(ext.q, uhat)) < 1e-10
        rng = np.random.default_rng(3)
        for _ in range(200):
            x = rng.uniform(-2, 2, nx)
            if abs(x[2]) < 0.2 or abs(x[4]) < 0.2:
                continue
            qv = np.array([q.eval(x) for q in ext.q])
            av = np.array([aj.eval(x) for aj in a])
            Dx = np.array([[D[r][c].eval(x) for c in range(p)] for r in range(p)])
            P = Dx.T @ Dx
            val = (qv - av) @ np.linalg.solve(P, qv - av)
            assert val <= 1.0 + 1e-8

    def test_singular_shape_raises(self):
        nx = p = 1
        a = [const(1, 0.0)]
        D = [[poly(1, {(1,): 1.0})]]
        with pytest.raises(ExtensionError):
            ellipsoid_extension(a, D, [0.0], [0.0])


class TestSplitAffine:
    def test_split(self):
        # h = x2 - x1 u1 - x2 u2 over (x1, x2, u1, u2)
        h = poly(4, {(0, 1, 0, 0): 1.0, (1, 0, 1, 0): -1.0, (0, 1, 0, 1): -1.0})
        h0, h1 = split_affine_in_u(h, 2, 2)
        assert h0 == poly(2, {(0, 1): 1.0})
        assert h1[0] == poly(2, {(1, 0): -1.0})
        assert h1[1] == poly(2, {(0, 1): -1.0})

    def test_nonlinear_rejected(self):
        h = poly(2, {(0, 2): 1.0})
        with pytest.raises(ExtensionError):
            split_affine_in_u(h, 1, 1)


class TestNumeric:
    def test_sip_specialization_constant_map(self):
        # h independent of x: the constant map q = uhat must be found
        nx, p = 2, 1
        h = [poly(3, {(0, 0, 1): 1.0}),  # u >= 0
             poly(3, {(0, 0, 0): 1.0, (0, 0, 1): -1.0})]  # 1 - u >= 0
        x_ineq = [poly(2, {(1, 0): 1.0}), poly(2, {(0, 1): 1.0})]
        ext = numeric_extension([], x_ineq, [], h, nx, p, [0.5, 0.5], [0.3])
        assert abs(ext.q[0].eval([0.5, 0.5]) - 0.3) < 1e-7
        pts = sample_set(nx, [0, 0], [3, 3], x_ineq, count=300)
        rep = validate_extension(ext, h, nx, pts)
        assert rep.worst_violation >= -1e-6

    def test_worked_instance_from_the_text(self):
        # X: c = (x2 - x1, x1, 2 - x1 - x2) >= 0, U(x) affine in u,
        # anchor x = (1/2, 1), u = (1/3, 2/3)
        nx, p = 2, 2
        x_ineq = [
            poly(2, {(0, 1): 1.0, (1, 0): -1.0}),
            poly(2, {(1, 0): 1.0}),
            poly(2, {(0, 0): 2.0, (1, 0): -1.0, (0, 1): -1.0}),
        ]
        h = [
            poly(4, {(0, 1, 0, 0): 1.0, (1, 0, 1, 0): -1.0, (0, 1, 0, 1): -1.0}),
            poly(4, {(0, 0, 1, 0): 1.0, (1, 0, 0, 1): 1.0, (1, 1, 0, 0): -1.0}),
            poly(4, {(1, 0, 0, 0): 1.0, (0, 0, 1, 0): 3.0, (0, 0, 0, 1): -1.0}),
            poly(4, {(0, 0, 1, 0): 1.0, (2, 0, 0, 1): -1.0}),
        ]
        xhat = [0.5, 1.0]
        uhat = [1.0 / 3.0, 2.0 / 3.0]
        # sanity: the anchor is strictly inside U(xhat)
        for hi in h:
            assert hi.eval(list(xhat) + list(uhat)) > 0
        ext = numeric_extension([], x_ineq, [], h, nx, p, xhat, uhat)
        assert max(abs(q.eval(xhat) - u) for q, u in zip(ext.q, uhat)) < 1e-7
        pts = sample_set(nx, [0, 0], [2, 2], x_ineq, count=400)
        rep = validate_extension(ext, h, nx, pts)
        assert rep.samples > 100
        assert rep.worst_violation >= -1e-6


class TestInvariantSuites:
    def test_degree_bound_of_closed_forms(self):
        l = [poly(2, {(2, 0): 1.0}), poly(2, {(0, 1): 1.0})]
        w = [poly(2, {(0, 0): 3.0}), poly(2, {(0, 0): 4.0})]
        ext = box_extension(l, w, [0.5, 0.5], [1.0, 2.0])
        assert ext.degree() <= max(p.degree() for p in l + w)

    @pytest.mark.parametrize("seed", range(25))
    def test_randomized_box_instances(self, seed):
        rng = np.random.default_rng(seed)
        nx, p = 2, int(rng.integers(1, 4))
        basis = monomial_basis(nx, 2)
        l, w = [], []
        for _ in range(p):
            lj = Polynomial(nx, dict(zip(basis, rng.uniform(-1, 1, len(basis)))))
            gap = Polynomial(nx, {(0, 0): rng.uniform(0.3, 2.0)})
            sq = Polynomial(nx, dict(zip(monomial_basis(nx, 1), rng.uniform(-0.5, 0.5, 3))))
            w.append(lj + gap + sq * sq)
            l.append(lj)
        xhat = rng.uniform(-1, 1, nx)
        lv = np.array([q.eval(xhat) for q in l])
        wv = np.array([q.eval(xhat) for q in w])
        theta = rng.uniform(0, 1, p)
        uhat = lv + theta * (wv - lv)
        ext = box_extension(l, w, xhat, uhat)
        assert max(abs(q.eval(xhat) - u) for q, u in zip(ext.q, uhat)) <= 1e-8
        pts = rng.uniform(-1, 1, size=(200, nx))
        for j in range(p):
            qv = ext.q[j].eval_many(pts)
            assert np.all(qv >= l[j].eval_many(pts) - 1e-9)
            assert np.all(qv <= w[j].eval_many(pts) + 1e-9)
