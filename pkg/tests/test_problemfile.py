import numpy as np
import pytest

from gsipsolve.corpus import CORPUS, get, suite
from gsipsolve.poly import Polynomial
from gsipsolve.problemfile import (
    ParseError,
    parse_problem,
    print_problem,
    to_convex,
    to_gsip,
)

EX31_TEXT = """
problem gsip
name ex31
xvars x1 x2
uvars u
minimize -x1
X:
  x1 >= 0
  1 - x1 >= 0
  x2 >= 0
  1 - x2 >= 0
U:
  -u >= 0
  u + 2 >= 0
  u^5 + 4*x1^2 + x2^2 - 1 >= 0
g:
  u^5 - 3*x2^2 >= 0
"""


class TestParsing:
    def test_dimension_readback(self):
        pf = parse_problem(EX31_TEXT)
        prob = to_gsip(pf)
        assert prob.nx == 2 and prob.nu == 1 and prob.s == 1

    def test_expressions(self):
        pf = parse_problem(EX31_TEXT)
        g = pf.g_constraints[0].poly.as_poly()
        assert g == Polynomial(3, {(0, 0, 5): 1.0, (0, 2, 0): -3.0})

    def test_taylor_annotation_degree(self):
        text = """
problem gsip
name taylor-test
xvars x1
uvars u
minimize x1
U:
  u >= 0
  1 - u >= 0
g:
  sin(pi*u):taylor(11) + x1 >= 0
"""
        pf = parse_problem(text)
        g = pf.g_constraints[0].poly.as_poly()
        # degree 11 in u after expanding the Taylor polynomial of sin(pi u)
        assert g.degree() == 11
        # leading coefficient matches pi^11 / 11!
        import math

        assert abs(g.coeff((0, 11)) - (-(math.pi**11) / math.factorial(11))) < 1e-9

    def test_sin_without_taylor_is_an_error(self):
        text = EX31_TEXT.replace("u^5 - 3*x2^2", "sin(u) - 3*x2^2")
        with pytest.raises(ParseError) as err:
            parse_problem(text)
        assert "taylor" in str(err.value)

    def test_minmax_adds_epigraph_variable(self):
        entry = get("ex6.1")
        pf = parse_problem(entry.text)
        assert pf.nx == 3  # two declared plus the epigraph variable
        assert pf.xvars[-1] == "t"
        prob = to_gsip(pf)
        assert prob.s == 3  # epigraph row plus the two explicit constraints
        assert prob.objective == Polynomial.variable(2, 3)

    def test_parse_error_carries_location(self):
        bad = EX31_TEXT.replace("u^5 - 3*x2^2 >= 0", "u^5 - $bad >= 0")
        with pytest.raises(ParseError) as err:
            parse_problem(bad)
        assert err.value.line > 0

    def test_unknown_identifier(self):
        bad = EX31_TEXT.replace("-x1", "-zz")
        with pytest.raises(ParseError):
            parse_problem(bad)

    def test_case_block(self):
        text = EX31_TEXT + "\ncase tight:\n  4*x1^2 + x2^2 - 1 >= 0\n"
        pf = parse_problem(text)
        base = to_gsip(pf)
        cased = to_gsip(pf, case="tight")
        assert len(cased.x_ineq) == len(base.x_ineq) + 1

    def test_rational_rejected_outside_convex(self):
        bad = EX31_TEXT.replace("u^5 - 3*x2^2", "u^5/(1 + x1) - 3*x2^2")
        with pytest.raises(ParseError):
            parse_problem(bad)


class TestRoundTrip:
    @pytest.mark.parametrize("name", sorted(CORPUS))
    def test_parse_print_roundtrip(self, name):
        pf1 = parse_problem(get(name).text)
        pf2 = parse_problem(print_problem(pf1))
        assert pf1.mode == pf2.mode
        assert pf1.xvars == pf2.xvars and pf1.uvars == pf2.uvars
        assert pf1.objective == pf2.objective
        for a, b in (
            (pf1.x_constraints, pf2.x_constraints),
            (pf1.u_constraints, pf2.u_constraints),
            (pf1.g_constraints, pf2.g_constraints),
        ):
            assert len(a) == len(b)
            for c1, c2 in zip(a, b):
                assert c1.kind == c2.kind
                assert (c1.poly.num - c2.poly.num).max_coeff() < 1e-14
        assert pf1.extension_kind == pf2.extension_kind
        assert len(pf1.ext_lower) == len(pf2.ext_lower)
        assert pf1.xscale == pf2.xscale and pf1.uscale == pf2.uscale


class TestCorpusIntegrity:
    """Hand-recorded dimensions for every instance; transformations from
    the source formulations are recorded in the instance notes."""

    DIMS = {
        "ex6.1": (3, 2, 3),
        "ex6.2": (4, 3, 2),
        "ex6.3-case1": (2, 1, 1),
        "ex6.3-case2": (2, 1, 1),
        "ex6.4": (3, 2, 2),
        "ex6.5": (5, 5, 3),
        "ex6.6": (3, 2, 2),
        "ex6.7": (5, 2, 4),
        "ex6.8": (2, 2, 1),
        "ex6.9": (2, 2, 2),
        "appA-watson1": (2, 1, 1),
        "appA-watson2": (3, 2, 1),
        "appA-wang3": (2, 1, 1),
        "appA-wang-pmi": (2, 3, 1),
        "appA-lemonidis3": (6, 2, 1),
        "appA-teo1": (3, 2, 1),
        "appA-betro": (8, 1, 1),
        "appA-floudas1": (4, 1, 2),
        "appA-zakovic": (3, 2, 1),
        "appA-lemonidis-paper": (2, 1, 1),
        "appB-aboussoror": (2, 2, 1),
        "appB-alexander1": (2, 3, 1),
        "appB-diehl": (2, 1, 1),
        "appB-jongen": (3, 1, 1),
        "appB-alexander4": (3, 2, 1),
        "appB-alexander5": (3, 1, 1),
        "appB-alexander6": (3, 1, 1),
        "appB-alexander7": (3, 1, 1),
        "appB-harwood": (4, 2, 1),
        "appB-stein": (4, 2, 3),
    }

    @pytest.mark.parametrize("name", sorted(CORPUS))
    def test_dimensions(self, name):
        pf = parse_problem(get(name).text)
        nx, nu, s = self.DIMS[name]
        assert pf.nx == nx, name
        assert pf.nu == nu, name
        n_g = len(pf.g_constraints)
        assert n_g == s, name

    def test_suites_cover_everything(self):
        assert len(suite("sec6", include_slow=True)) == 10
        assert len(suite("appendixA", include_slow=True)) == 10
        assert len(suite("appendixB", include_slow=True)) == 10
        assert len(suite("appendixB", include_slow=False)) == 9  # harwood excluded

    def test_transformed_instances_note_their_source(self):
        for name in ("ex6.3-case1", "appA-teo1", "appB-aboussoror"):
            entry = get(name)
            pf = parse_problem(entry.text)
            assert entry.notes or pf.meta

    def test_convex_instances_build(self):
        for name in ("ex6.8", "ex6.9"):
            prob = to_convex(parse_problem(get(name).text))
            assert prob.s >= 1 and prob.m >= 2
