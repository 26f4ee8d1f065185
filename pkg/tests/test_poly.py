import math
from itertools import product

import numpy as np
import pytest

from gsipsolve.poly import (
    Polynomial,
    basis_size,
    grlex_key,
    monomial_basis,
    taylor_poly,
)


def brute_force_exponents(nvars, degree):
    """Independent enumeration: full cartesian grid filtered by degree."""
    return {e for e in product(range(degree + 1), repeat=nvars) if sum(e) <= degree}


def random_poly(rng, nvars, degree, nterms=6):
    basis = monomial_basis(nvars, degree)
    terms = {}
    for _ in range(nterms):
        e = basis[rng.integers(len(basis))]
        terms[e] = terms.get(e, 0.0) + rng.standard_normal()
    return Polynomial(nvars, terms)


class TestMonomialBasis:
    def test_univariate(self):
        assert monomial_basis(1, 2) == [(0,), (1,), (2,)]

    def test_bivariate_count(self):
        assert len(monomial_basis(2, 2)) == 6

    def test_count_matches_brute_force(self):
        # independent oracle for the (3, 4) case
        assert len(monomial_basis(3, 4)) == len(brute_force_exponents(3, 4)) == 35

    def test_first_element_is_zero(self):
        assert monomial_basis(4, 3)[0] == (0, 0, 0, 0)

    @pytest.mark.parametrize("nvars", range(1, 7))
    @pytest.mark.parametrize("degree", range(0, 9))
    def test_cardinality_and_order(self, nvars, degree):
        basis = monomial_basis(nvars, degree)
        assert len(basis) == basis_size(nvars, degree)
        assert set(basis) == brute_force_exponents(nvars, degree)
        keys = [grlex_key(e) for e in basis]
        assert all(a < b for a, b in zip(keys, keys[1:]))

    def test_graded_lex_convention(self):
        # within a degree, x1-leading monomials come first
        assert monomial_basis(2, 2) == [
            (0, 0),
            (1, 0),
            (0, 1),
            (2, 0),
            (1, 1),
            (0, 2),
        ]


class TestEval:
    def test_hand_example(self):
        p = Polynomial(2, {(2, 0): 1.0, (0, 1): 2.0})  # x1^2 + 2 x2
        assert p.eval([3.0, 1.0]) == 11.0

    def test_zero_poly(self):
        assert Polynomial.zero(3).eval([4.0, 5.0, 6.0]) == 0.0

    def test_paper_example_point(self):
        # g = u^5 - 3 x2^2 vanishes at x = (0.5, 0), u = 0
        g = Polynomial(3, {(0, 0, 5): 1.0, (0, 2, 0): -3.0})
        assert g.eval([0.5, 0.0, 0.0]) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            Polynomial.zero(2).eval([1.0])

    def test_monomial_eval_exact(self):
        rng = np.random.default_rng(0)
        for nvars, degree in [(1, 4), (2, 3), (3, 3)]:
            points = rng.uniform(-2, 2, size=(50, nvars))
            for e in monomial_basis(nvars, degree):
                p = Polynomial.monomial(e)
                expected = np.prod(points ** np.array(e), axis=1)
                got = p.eval_many(points)
                assert np.allclose(got, expected, rtol=1e-12, atol=1e-300)


class TestRingOps:
    def test_eval_homomorphism(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            nvars = int(rng.integers(1, 4))
            a = random_poly(rng, nvars, 3)
            b = random_poly(rng, nvars, 3)
            pt = rng.uniform(-1.5, 1.5, nvars)
            scale = max(1.0, abs(a.eval(pt) * b.eval(pt)))
            assert abs((a * b).eval(pt) - a.eval(pt) * b.eval(pt)) < 1e-10 * scale
            assert abs((a + b).eval(pt) - (a.eval(pt) + b.eval(pt))) < 1e-12 * scale
            assert abs((a - b).eval(pt) - (a.eval(pt) - b.eval(pt))) < 1e-12 * scale

    def test_power(self):
        rng = np.random.default_rng(2)
        p = random_poly(rng, 2, 2, nterms=3)
        pt = [0.7, -0.3]
        for k in range(5):
            assert abs((p**k).eval(pt) - p.eval(pt) ** k) < 1e-10

    def test_zero_degree_sentinel(self):
        assert Polynomial.zero(2).degree() == -1
        assert Polynomial.constant(2, 3.0).degree() == 0
        assert (Polynomial.constant(2, 1.0) - 1.0).degree() == -1

    def test_product_drops_tiny_coeffs(self):
        p = Polynomial(1, {(1,): 1e-8})
        q = Polynomial(1, {(1,): 1e-8})
        assert (p * q).is_zero()


class TestCalculus:
    def test_gradient_example(self):
        # grad_u of u1^2 + x1 u2 with x-block = {0}, u-block = {1, 2}
        p = Polynomial(3, {(0, 2, 0): 1.0, (1, 0, 1): 1.0})
        gu = p.gradient([1, 2])
        assert gu[0] == Polynomial(3, {(0, 1, 0): 2.0})
        assert gu[1] == Polynomial(3, {(1, 0, 0): 1.0})

    def test_gradient_of_u_free_poly(self):
        p = Polynomial(3, {(2, 0, 0): 5.0})
        gu = p.gradient([1, 2])
        assert all(q.is_zero() for q in gu)

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(3)
        h = 1e-6
        for _ in range(20):
            nvars = int(rng.integers(1, 4))
            p = random_poly(rng, nvars, 4)
            pt = rng.uniform(0.2, 1.2, nvars)
            for i in range(nvars):
                ep = pt.copy()
                em = pt.copy()
                ep[i] += h
                em[i] -= h
                fd = (p.eval(ep) - p.eval(em)) / (2 * h)
                exact = p.diff(i).eval(pt)
                assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact))


class TestSubstitution:
    def test_identity_substitution(self):
        # p = u1 with q = (x1 + 1)
        p = Polynomial(2, {(0, 1): 1.0})
        q = Polynomial(1, {(1,): 1.0, (0,): 1.0})
        r = p.substitute_block(1, [q])
        assert r == q

    def test_constant_substitution(self):
        # p = u^5 - 3 x2^2 with u := 0
        p = Polynomial(3, {(0, 0, 5): 1.0, (0, 2, 0): -3.0})
        r = p.substitute_block(2, [Polynomial.zero(2)])
        assert r == Polynomial(2, {(0, 2): -3.0})

    def test_substitute_commutes_with_eval(self):
        rng = np.random.default_rng(4)
        n, p_dim = 2, 2
        for _ in range(100):
            poly = random_poly(rng, n + p_dim, 3)
            qs = [random_poly(rng, n, 2, nterms=3) for _ in range(p_dim)]
            composed = poly.substitute_block(n, qs)
            x = rng.uniform(-1, 1, n)
            inner = [q.eval(x) for q in qs]
            direct = poly.eval(list(x) + inner)
            via = composed.eval(x)
            assert abs(direct - via) <= 1e-10 * max(1.0, abs(direct))

    def test_substitution_length_mismatch(self):
        p = Polynomial(3, {(0, 0, 1): 1.0})
        with pytest.raises(ValueError):
            p.substitute_block(2, [])

    def test_compose_affine(self):
        p = Polynomial(2, {(2, 0): 1.0, (0, 1): 1.0})
        q = p.compose_affine([2.0, 3.0], [1.0, -1.0])
        for pt in ([0.3, 0.4], [-1.0, 2.0]):
            assert abs(q.eval(pt) - p.eval([2 * pt[0] + 1, 3 * pt[1] - 1])) < 1e-12


class TestTaylor:
    def test_sin_degree7(self):
        t = taylor_poly("sin", 7)
        assert t == Polynomial(
            1, {(1,): 1.0, (3,): -1 / 6, (5,): 1 / 120, (7,): -1 / 5040}
        )

    def test_exp_degree0(self):
        assert taylor_poly("exp", 0) == Polynomial.constant(1, 1.0)

    def test_cos_degree4(self):
        assert taylor_poly("cos", 4) == Polynomial(
            1, {(0,): 1.0, (2,): -0.5, (4,): 1 / 24}
        )

    def test_values_near_zero(self):
        t = taylor_poly("exp", 10)
        for v in np.linspace(-0.5, 0.5, 7):
            assert abs(t.eval([v]) - math.exp(v)) < 1e-9
