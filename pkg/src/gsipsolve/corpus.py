"""Embedded benchmark corpus.

Every instance is stored post-transformation, exactly as the reference
results solved it: variable substitutions (y := u^5, y := u^2), epigraph
reformulations of min-max objectives, auxiliary variables replacing
absolute values, Taylor truncations of transcendental functions at the
stated degrees, denominator clearings, and manual case splits on
emptiness of U(x) all appear here as problem data, with a note in the
instance metadata.

Golden values: `expected_f` / `expected_loops` come from the reference
tables (4 printed decimals); `expected_x` where a criterion checks the
minimizer itself.  `slow` marks the one instance excluded from default
benchmark runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional


@dataclass
class CorpusEntry:
    name: str
    suite: str  # sec6 | appendixA | appendixB
    text: str
    expected_f: Optional[float] = None  # None: expected infeasible
    expected_loops: int = 0
    expected_x: Optional[list[float]] = None
    value_tol: float = 1e-3
    slow: bool = False
    notes: str = ""


_ENTRIES: list[CorpusEntry] = []


def _add(entry: CorpusEntry):
    _ENTRIES.append(entry)


# ----------------------------------------------------------------- sec6

_add(CorpusEntry(
    name="ex6.1",
    suite="sec6",
    expected_f=-1.6228,
    expected_loops=3,
    expected_x=[-0.4000, -0.2449, -1.6228],
    notes="min-max SIP, epigraph variable added by the minmax block",
    text="""
problem gsip
name ex6.1
xvars x1 x2
uvars u1 u2
minmax 5*x1^2 + 5*x2^2 - u1^2 - u2^2 + x1*(-u1 + u2 + 5) + x2*(u1 - u2 + 3)
X:
  x1 + 100 >= 0
  100 - x1 >= 0
  x2 + 100 >= 0
  100 - x2 >= 0
  t + 100 >= 0
  100 - t >= 0
U:
  u1 + 0.2 >= 0
  0.2 - u1 >= 0
  u2 + 0.2 >= 0
  0.2 - u2 >= 0
g:
  0.2 - x1^2 - u1^2 >= 0
  0.1 - x2^2 - u2^2 >= 0
extension constant
xscale 100 100 100
uscale 0.2 0.2
samplebox -100 -100 -100 ; 100 100 100
meta source "min-max SIP instance; epigraph transform applied"
""",
))

_add(CorpusEntry(
    name="ex6.2",
    suite="sec6",
    expected_f=-23.7793,
    expected_loops=2,
    value_tol=1e-2,
    notes="SIP with ball-compact U",
    text="""
problem gsip
name ex6.2
xvars x1 x2 x3 x4
uvars u1 u2 u3
minimize (x1 - x2)*(x3 - x4) + (x1 - x3)*(x2 - x4) + x1*x2 - x2*x3 + x3*x4
X:
  10 - x1^2 - x2^2 - x3^2 - x4^2 >= 0
  3*x1*x2 - 2*x3^2 + 4*x4 >= 0
  x1*x2*x3 - 1 >= 0
  -3*x3*x4 + x2 + 2*x3 >= 0
U:
  u1*u2*u3 - 1 >= 0
  -2*u3^2 + u1 + u2 + 3 >= 0
  -u1^2 - u2^2 - u3^2 + u1 + u3 + 5 >= 0
g:
  -2*x1*x2*u2*u3 + u1^2*x4 + x1*u2 - x2*u3 + x3*u1 + x4 + 1 >= 0
  2*u1*x2 - u3*x4 + 2*u2*u3 + 2*x1*x4 - x2*x3 + 1 >= 0
extension constant
xscale 3.2 3.2 3.2 3.2
uscale 3.2 3.2 3.2
samplebox -3.2 -3.2 -3.2 -3.2 ; 3.2 3.2 3.2 3.2
""",
))

_add(CorpusEntry(
    name="ex6.3-case1",
    suite="sec6",
    expected_f=-0.5,
    expected_loops=2,
    expected_x=[0.5, 0.0],
    notes="motivating example after y := u^5; case 1 - 4x1^2 - x2^2 <= 0",
    text="""
problem gsip
name ex6.3-case1
xvars x1 x2
uvars y
minimize -x1
X:
  x1 >= 0
  1 - x1 >= 0
  x2 >= 0
  1 - x2 >= 0
  4*x1^2 + x2^2 - 1 >= 0
U:
  -y >= 0
  y + 32 >= 0
  y - 1 + 4*x1^2 + x2^2 >= 0
g:
  y - 3*x2^2 >= 0
extension box
  lower: 1 - 4*x1^2 - x2^2
  upper: 0
uscale 32
samplebox 0 0 ; 1 1
meta source "substitution y := u^5 applied; nonempty-U case"
""",
))

_add(CorpusEntry(
    name="ex6.3-case2",
    suite="sec6",
    expected_f=-0.5,
    expected_loops=1,
    expected_x=[0.5, 0.0],
    notes="empty-U case: 1 - 4x1^2 - x2^2 >= 0 appended to X",
    text="""
problem gsip
name ex6.3-case2
xvars x1 x2
uvars y
minimize -x1
X:
  x1 >= 0
  1 - x1 >= 0
  x2 >= 0
  1 - x2 >= 0
  1 - 4*x1^2 - x2^2 >= 0
U:
  -y >= 0
  y + 32 >= 0
  y - 1 + 4*x1^2 + x2^2 >= 0
g:
  y - 3*x2^2 >= 0
extension box
  lower: 1 - 4*x1^2 - x2^2
  upper: 0
uscale 32
samplebox 0 0 ; 1 1
""",
))

_add(CorpusEntry(
    name="ex6.4",
    suite="sec6",
    expected_f=None,
    expected_loops=3,
    notes="infeasible GSIP: relaxation infeasibility certificate at loop 2",
    text="""
problem gsip
name ex6.4
xvars x1 x2 x3
uvars u1 u2
minimize x1^2*x2 - x2^2*x3 - x1*x2*x3 + (x1 + 1)^2
X:
  25 - x1^2 - x2^2 - x3^2 >= 0
  x1 - x2^2 >= 0
  x3 - x2 - 1 >= 0
U:
  u1 >= 0
  x1 - u1 >= 0
  u2 - x2 >= 0
  x3 - u2 >= 0
g:
  x1^2*u1 + x2*u2^2 - x3*u1^2 - x1*x3*u2 + 1 >= 0
  x1*x2*u1*u2 + x1*x3*u1 + x1*x3*u2 - x3*u2 - 1 >= 0
extension box
  lower: 0, x2
  upper: x1, x3
xscale 5 5 5
uscale 5 5
samplebox -5 -5 -5 ; 5 5 5
""",
))

_add(CorpusEntry(
    name="ex6.5",
    suite="sec6",
    expected_f=-18.0471,
    expected_loops=4,
    value_tol=1e-2,
    notes="ball-type U(x) with radius sqrt(3) x3",
    text="""
problem gsip
name ex6.5
xvars x1 x2 x3 x4 x5
uvars u1 u2 u3 u4 u5
minimize x1^2*x2 - x1*x2^2 - x1*x2*x3 + x3*x4*x5 + x3^3
X:
  25 - x1^2 - x2^2 - x3^2 - x4^2 - x5^2 >= 0
  x1*x2 - 1 >= 0
  x3 >= 0
  -x2 + x3*x5 - 3 >= 0
  x3*x4 - 2 >= 0
U:
  3*x3^2 - (u1 - x1)^2 - (u2 - x2)^2 - u3^2 - u4^2 - u5^2 >= 0
g:
  x1*u1 + x2*x5*u5 - x3*u2*u3 - x4*u4 - 1 >= 0
  x1*x2*u1*u2 - x3*x4*u1 - x5*u3*u4*u5 - 5 >= 0
  u1*u2 + x5*u3 - (x1 - u1)^2 - (x3 - u4)^2 - u5^2 + 1 >= 0
extension ball
  center: x1, x2, 0, 0, 0
  lower: 0
  upper: sqrt(3)*x3
xscale 5 5 5 5 5
uscale 14 14 9 9 9
samplebox -5 -5 0 -5 -5 ; 5 5 5 5 5
""",
))

_add(CorpusEntry(
    name="ex6.6",
    suite="sec6",
    expected_f=-4.7306,
    expected_loops=4,
    value_tol=1e-2,
    notes="u-affine U(x); extensions from the conic feasibility system",
    text="""
problem gsip
name ex6.6
xvars x1 x2 x3
uvars u1 u2
minimize (1 - x1)*(1 - x2)*(1 - x3) + (x1 - 1)*(x1 - x2)*(x1 - x3) + (x2 - 1)*(x2 - x1)*(x2 - x3) + (x3 - 1)*(x3 - x1)*(x3 - x2)
X:
  x1 + x2 - x3 >= 0
  x1 - x2 >= 0
  1 - x1 - x3 >= 0
  2 - 2*x1 + x2 >= 0
  3*x2 + x3 - 1 >= 0
U:
  x1 + x2 + x3 - u1 - u2 >= 0
  x1*u2 - u1 - x3 - x1*x2 >= 0
  x1 - u2 + x2*u1 >= 0
  -u1 >= 0
g:
  (x1*x2 - u1)*(x3 - u2) + x2*u1*u2 + x1*x3 + 2 >= 0
  2*x1*u1 - x3*u1*u2 + x2 + 1 >= 0
extension numeric
xscale 2 2 5
uscale 3 3
samplebox 0 0 -5 ; 2 2 1
""",
))

_add(CorpusEntry(
    name="ex6.7",
    suite="sec6",
    expected_f=-4.0332,
    expected_loops=9,
    expected_x=[1.5084, 1.0587, 1.4203, -1.4097, 0.9039],
    value_tol=1e-2,
    notes="design centering: maximum ellipsoid inscribed in {g(u) >= 0}",
    text="""
problem gsip
name ex6.7
xvars x1 x2 x3 x4 x5
uvars u1 u2
minimize -pi*x3*x5
X:
  100 - x1^2 - x2^2 - x3^2 - x4^2 - x5^2 >= 0
  x3 >= 0
  x5 >= 0
U:
  x3^2*x5^2 - (u1 - x1)^2*(x4^2 + x5^2) + 2*(u1 - x1)*(u2 - x2)*x3*x4 - (u2 - x2)^2*x3^2 >= 0
g:
  4*u1 + u2^2 - 4 >= 0
  -u1 + 2*u2 + 4 >= 0
  8 - (u1 - 1)^2 - u2^2 >= 0
  3 - u1*u2 >= 0
extension ellipsoid
  center: x1, x2
  row x3, x4
  row 0, x5
xscale 10 10 10 10 10
uscale 4 4
samplebox -10 -10 0 -10 0 ; 10 10 10 10 10
meta source "ellipsoid membership cleared by det(D'D) = x3^2 x5^2"
""",
))

_add(CorpusEntry(
    name="ex6.8",
    suite="sec6",
    expected_f=0.0,
    expected_loops=1,
    expected_x=[0.0, 0.0],
    value_tol=1e-3,
    notes="convex infinity constraint, explicit-multiplier KKT program",
    text="""
problem convex_kkt
name ex6.8
xvars x1 x2
uvars u1 u2
minimize x1^2 + x2^2
U:
  x1 - u1 >= 0
  x2 - u2 >= 0
g:
  (x2 - u2)^2 - (x1 - u1)^2 >= 0
xscale 2 2
uscale 2 2
""",
))

_add(CorpusEntry(
    name="ex6.9",
    suite="sec6",
    expected_f=1.5160,
    expected_loops=1,
    expected_x=[1.1348, 0.4406],
    notes="convex infinity constraints with rational g, multipliers eliminated",
    text="""
problem convex_lme
name ex6.9
xvars x1 x2
uvars u1 u2
minimize -x1*x2 + x1 + 2*x2
X:
  4 - x1^2 - x2^2 >= 0
  x1*x2 - 0.5 >= 0
  x1 >= 0
U:
  u1 >= 0
  u2 - x2*u1 >= 0
  2*x1 - x2*u1 - u2 >= 0
g:
  u1 + u2 + x2^2/(x1 + u1) + x1^2/(x2 + u2) - 2 >= 0
  x1*u2 + (x2^2 + u2^2)/(1 + u1) - x2^2 >= 0
convex:
  phi: 2*x1
  phi_sign positive
  row 2*x1 - 2*x2*u1, 2*x1*x2 - 2*x2*u2, 2*x2, 2*x2, 2*x2
  row -u1, 2*x1 - u2, 1, 1, 1
  row -u1, -u2, 1, 1, 1
  assume_positive: x1 + u1, x2 + u2, 1 + u1
xscale 2 2
uscale 8 4
""",
))

# ------------------------------------------------------------ appendixA

_add(CorpusEntry(
    name="appA-watson1",
    suite="appendixA",
    expected_f=0.1945,
    expected_loops=2,
    text="""
problem gsip
name appA-watson1
xvars x1 x2
uvars u
minimize x1^2/3 + x1/2 + x2^2
X:
  x1 + 100 >= 0
  100 - x1 >= 0
  x2 + 100 >= 0
  100 - x2 >= 0
U:
  u >= 0
  1 - u >= 0
g:
  -(1 - x1^2*u^2)^2 + x1*u^2 + x2^2 - x2 >= 0
extension constant
xscale 100 100
uscale 1
samplebox -100 -100 ; 100 100
""",
))

_add(CorpusEntry(
    name="appA-watson2",
    suite="appendixA",
    expected_f=1.0,
    expected_loops=3,
    text="""
problem gsip
name appA-watson2
xvars x1 x2 x3
uvars u1 u2
minimize x1^2 + x2^2 + x3^2
X:
  x1 + 100 >= 0
  100 - x1 >= 0
  x2 + 100 >= 0
  100 - x2 >= 0
  x3 + 100 >= 0
  100 - x3 >= 0
U:
  u1 >= 0
  1 - u1 >= 0
  u2 >= 0
  1 - u2 >= 0
g:
  -x1*(u1 + u2^2 + 1) - x2*(u1*u2 - u2^2) - x3*(u1*u2 + u2^2 + u2) - 1 >= 0
extension constant
xscale 100 100 100
uscale 1 1
samplebox -100 -100 -100 ; 100 100 100
""",
))

_add(CorpusEntry(
    name="appA-wang3",
    suite="appendixA",
    expected_f=0.0,
    expected_loops=2,
    text="""
problem gsip
name appA-wang3
xvars x1 x2
uvars u
minimize x2
X:
  x1 + 100 >= 0
  100 - x1 >= 0
  x2 + 100 >= 0
  100 - x2 >= 0
U:
  u + 1 >= 0
  1 - u >= 0
g:
  -2*x1^2*u^2 + u^4 - x1^2 + x2 >= 0
extension constant
xscale 100 100
uscale 1
samplebox -100 -100 ; 100 100
""",
))

_add(CorpusEntry(
    name="appA-wang-pmi",
    suite="appendixA",
    expected_f=-2.5616,
    expected_loops=5,
    notes="PSD matrix constraint written as u'G(x)u >= 0 on the unit sphere",
    text="""
problem gsip
name appA-wang-pmi
xvars x1 x2
uvars u1 u2 u3
minimize x1 + x2
X:
  x1 + 100 >= 0
  100 - x1 >= 0
  x2 + 100 >= 0
  100 - x2 >= 0
U:
  u1^2 + u2^2 + u3^2 = 1
g:
  (4 - x1^2 - x2^2)*u1^2 + (x2^2 - x1)*u2^2 + (x1^2 - x2)*u3^2 + 2*x1*u1*u2 + 2*x2*u1*u3 + 2*x1*x2*u2*u3 >= 0
extension constant
xscale 100 100
uscale 1 1 1
samplebox -100 -100 ; 100 100
""",
))

_add(CorpusEntry(
    name="appA-lemonidis3",
    suite="appendixA",
    expected_f=-12.0,
    expected_loops=11,
    text="""
problem gsip
name appA-lemonidis3
xvars x1 x2 x3 x4 x5 x6
uvars u1 u2
minimize -4*x1 - (2/3)*x4 - (2/3)*x6
X:
  x1 + 100 >= 0
  100 - x1 >= 0
  x2 + 100 >= 0
  100 - x2 >= 0
  x3 + 100 >= 0
  100 - x3 >= 0
  x4 + 100 >= 0
  100 - x4 >= 0
  x5 + 100 >= 0
  100 - x5 >= 0
  x6 + 100 >= 0
  100 - x6 >= 0
U:
  u1 + 1 >= 0
  1 - u1 >= 0
  u2 + 1 >= 0
  1 - u2 >= 0
g:
  -x1 - x2*u1 - x3*u2 - x4*u1^2 - x5*u1*u2 - x6*u2^2 + (u1 - u2)^2*(u1 + u2)^2 + 3 >= 0
extension constant
xscale 100 100 100 100 100 100
uscale 1 1
samplebox -100 -100 -100 -100 -100 -100 ; 100 100 100 100 100 100
""",
))

_add(CorpusEntry(
    name="appA-teo1",
    suite="appendixA",
    expected_f=0.3431,
    expected_loops=2,
    notes="x3 = |x1 - x2| auxiliary; (cos u, sin u) mapped to the half-circle",
    text="""
problem gsip
name appA-teo1
xvars x1 x2 x3
uvars w1 w2
minimize (x1 + x2 - 2)^2 + (x1 - x2)^2 + 30*x3^2
X:
  x1 + 100 >= 0
  100 - x1 >= 0
  x2 + 100 >= 0
  100 - x2 >= 0
  x3 >= 0
  100 - x3 >= 0
  x3^2 - (x1 - x2)^2 = 0
U:
  w1^2 + w2^2 = 1
  w2 >= 0
g:
  x1*w1 - x2*w2 + 1 >= 0
extension constant
xscale 100 100 100
uscale 1 1
samplebox -100 -100 0 ; 100 100 100
""",
))

_add(CorpusEntry(
    name="appA-betro",
    suite="appendixA",
    expected_f=0.6931,
    expected_loops=13,
    notes="1/(2-u) cleared by multiplying through with (2-u) > 0",
    text="""
problem gsip
name appA-betro
xvars x1 x2 x3 x4 x5 x6 x7 x8
uvars u
minimize x1 + x2/2 + x3/3 + x4/4 + x5/5 + x6/6 + x7/7 + x8/8
X:
  x1 + 1 >= 0
  1 - x1 >= 0
  x2 + 1 >= 0
  1 - x2 >= 0
  x3 + 1 >= 0
  1 - x3 >= 0
  x4 + 1 >= 0
  1 - x4 >= 0
  x5 + 1 >= 0
  1 - x5 >= 0
  x6 + 1 >= 0
  1 - x6 >= 0
  x7 + 1 >= 0
  1 - x7 >= 0
  x8 + 1 >= 0
  1 - x8 >= 0
U:
  u >= 0
  1 - u >= 0
g:
  (2 - u)*(x1 + x2*u + x3*u^2 + x4*u^3 + x5*u^4 + x6*u^5 + x7*u^6 + x8*u^7) - 1 >= 0
extension constant
uscale 1
samplebox -1 -1 -1 -1 -1 -1 -1 -1 ; 1 1 1 1 1 1 1 1
""",
))

_add(CorpusEntry(
    name="appA-floudas1",
    suite="appendixA",
    expected_f=0.0280,
    expected_loops=7,
    notes="Chebyshev approximation; sin(pi u) at Taylor degree 11",
    text="""
problem gsip
name appA-floudas1
xvars x1 x2 x3 x4
uvars u
minimize x4
X:
  x1 + 1 >= 0
  1 - x1 >= 0
  x2 - 3 >= 0
  5 - x2 >= 0
  x3 + 5 >= 0
  -3 - x3 >= 0
  x4 + 1 >= 0
  3 - x4 >= 0
U:
  u >= 0
  1 - u >= 0
g:
  x4 + sin(pi*u):taylor(11) - x3*u^2 - x2*u - x1 >= 0
  x4 - sin(pi*u):taylor(11) + x3*u^2 + x2*u + x1 >= 0
extension constant
xscale 1 5 5 3
uscale 1
samplebox -1 3 -5 -1 ; 1 5 -3 3
""",
))

_add(CorpusEntry(
    name="appA-zakovic",
    suite="appendixA",
    expected_f=1.4039,
    expected_loops=9,
    notes="min-max problem via the epigraph transform",
    text="""
problem gsip
name appA-zakovic
xvars x1 x2
uvars u1 u2
minmax 4*(x1 - 2)^2 - 2*u1^2 + x1^2*u1 - u2^2 + 2*x2^2*u2
X:
  x1 + 100 >= 0
  100 - x1 >= 0
  x2 + 100 >= 0
  100 - x2 >= 0
  t + 100 >= 0
  100 - t >= 0
U:
  u1 + 5 >= 0
  5 - u1 >= 0
  u2 + 5 >= 0
  5 - u2 >= 0
extension constant
xscale 100 100 100
uscale 5 5
samplebox -100 -100 -100 ; 100 100 100
""",
))

_add(CorpusEntry(
    name="appA-lemonidis-paper",
    suite="appendixA",
    expected_f=-0.25,
    expected_loops=2,
    notes="sin(u) at Taylor degree 7",
    text="""
problem gsip
name appA-lemonidis-paper
xvars x1 x2
uvars u
minimize x1^2/3 + x1/2 + x2^2 - x2
X:
  x1 + 1000 >= 0
  1000 - x1 >= 0
  x2 + 1000 >= 0
  1000 - x2 >= 0
U:
  u >= 0
  2 - u >= 0
g:
  sin(u):taylor(7) - x1^2 - 2*x1*x2*u^2 >= 0
extension constant
uscale 2
samplebox -1000 -1000 ; 1000 1000
""",
))

# ------------------------------------------------------------ appendixB

_add(CorpusEntry(
    name="appB-aboussoror",
    suite="appendixB",
    expected_f=1.75,
    expected_loops=2,
    notes="|x| handled by x2^2 = x1^2, x2 >= 0; objective becomes x1^2 + x2 + 1",
    text="""
problem gsip
name appB-aboussoror
xvars x1 x2
uvars u1 u2
minimize x1^2 + x2 + 1
X:
  x1 + 0.5 >= 0
  0.5 - x1 >= 0
  x2 + 0.5 >= 0
  0.5 - x2 >= 0
  x2^2 - x1^2 = 0
  x2 >= 0
U:
  u1 - x1^2 + 1 >= 0
  -0.75 - u1 >= 0
  u2 - x1 + 1 >= 0
  -0.5 - u2 >= 0
g:
  x1^2 + 2*x1 + u1 + u2 >= 0
extension box
  lower: x1^2 - 1, x1 - 1
  upper: -0.75, -0.5
uscale 2 2
samplebox -0.5 0 ; 0.5 0.5
""",
))

_add(CorpusEntry(
    name="appB-alexander1",
    suite="appendixB",
    expected_f=-0.5,
    expected_loops=2,
    notes="substitution y_i := u_i^2 turns U(x) into the simplex e'y <= x1",
    text="""
problem gsip
name appB-alexander1
xvars x1 x2
uvars y1 y2 y3
minimize -0.5*x1^4 + 2*x1*x2 - 2*x1^2
X:
  x1 >= 0
  1 - x1 >= 0
  x2 >= 0
  1 - x2 >= 0
U:
  y1 >= 0
  y2 >= 0
  y3 >= 0
  x1 - y1 - y2 - y3 >= 0
g:
  -x1^2 + x1 + x2 - y1 - y2 >= 0
extension simplex
  lower: 0, 0, 0
  upper: x1
uscale 1 1 1
samplebox 0 0 ; 1 1
""",
))

_add(CorpusEntry(
    name="appB-diehl",
    suite="appendixB",
    expected_f=5.8284,
    expected_loops=1,
    notes="nonempty-U case x1 <= x2 of the case split",
    text="""
problem gsip
name appB-diehl
xvars x1 x2
uvars u
minimize (x1 + sqrt(2) + 1)^2 + (x2 - 1)^2
X:
  x2 - x1 >= 0
U:
  u - x1 >= 0
  x2 - u >= 0
g:
  u >= 0
extension box
  lower: x1
  upper: x2
xscale 3 3
uscale 3
samplebox -3 -3 ; 3 3
""",
))

_add(CorpusEntry(
    name="appB-jongen",
    suite="appendixB",
    expected_f=0.0,
    expected_loops=2,
    notes="x3^3 = -x1^2 + 2 x2 auxiliary; nonempty-U case x3 <= 0",
    text="""
problem gsip
name appB-jongen
xvars x1 x2 x3
uvars u
minimize x2
X:
  x1 + 100 >= 0
  100 - x1 >= 0
  x2 + 100 >= 0
  100 - x2 >= 0
  x3^3 + x1^2 - 2*x2 = 0
  -x3 >= 0
U:
  u - x3 >= 0
  -u >= 0
g:
  u^3 - x2 >= 0
extension box
  lower: x3
  upper: 0
xscale 100 100 22
uscale 22
samplebox -100 -100 -22 ; 100 100 0
""",
))

_add(CorpusEntry(
    name="appB-alexander4",
    suite="appendixB",
    expected_f=0.3820,
    expected_loops=3,
    notes="on X = [-1,0]^3 the set U(x) is the box -x1 <= u1 <= 1, 0 <= u2 <= 1",
    text="""
problem gsip
name appB-alexander4
xvars x1 x2 x3
uvars u1 u2
minimize x1^2 + x2^2 + x3^2
X:
  x1 + 1 >= 0
  -x1 >= 0
  x2 + 1 >= 0
  -x2 >= 0
  x3 + 1 >= 0
  -x3 >= 0
U:
  u1 + x1 >= 0
  1 - u1 >= 0
  u2 >= 0
  1 - u2 >= 0
g:
  -x1*(u1 + u2^2 + 1) - x2*(u1*u2 - u2^2) - x3*(u1*u2 + u2^2 + u2) - 1 >= 0
extension box
  lower: -x1, 0
  upper: 1, 1
uscale 1 1
samplebox -1 -1 -1 ; 0 0 0
""",
))

_add(CorpusEntry(
    name="appB-alexander5",
    suite="appendixB",
    expected_f=0.5,
    expected_loops=2,
    notes="case -1 <= x2 <= 1: U(x) = [0, (x2+1)/2]; Taylor degrees 5 and 4",
    text="""
problem gsip
name appB-alexander5
xvars x1 x2 x3
uvars u
minimize x1^2 + x2^2 + x3^2
X:
  x1 + 5 >= 0
  5 - x1 >= 0
  x2 + 1 >= 0
  1 - x2 >= 0
  x3 + 5 >= 0
  5 - x3 >= 0
U:
  u >= 0
  x2 + 1 - 2*u >= 0
g:
  2*sin(4*u):taylor(5) - x1 - x2*exp(x3*u):taylor(4) - exp(x2*u):taylor(4) >= 0
extension box
  lower: 0
  upper: (x2 + 1)/2
xscale 5 1 5
uscale 1
samplebox -5 -1 -5 ; 5 1 5
""",
))

_add(CorpusEntry(
    name="appB-alexander6",
    suite="appendixB",
    expected_f=-1.0,
    expected_loops=2,
    notes="x3 = |x1 - x2| auxiliary; U(x) = [max(x1,x2), 1] as a box",
    text="""
problem gsip
name appB-alexander6
xvars x1 x2 x3
uvars u
minimize x1 + x2
X:
  x1 + 1 >= 0
  1 - x1 >= 0
  x2 + 1 >= 0
  1 - x2 >= 0
  x3 >= 0
  2 - x3 >= 0
  x3^2 - (x1 - x2)^2 = 0
U:
  u - (x1 + x2 + x3)/2 >= 0
  1 - u >= 0
g:
  u >= 0
extension box
  lower: (x1 + x2 + x3)/2
  upper: 1
uscale 1
samplebox -1 -1 0 ; 1 1 2
""",
))

_add(CorpusEntry(
    name="appB-alexander7",
    suite="appendixB",
    expected_f=3.5680,
    expected_loops=3,
    notes="case 0 <= x2+x3 <= 1/2; exp at Taylor degree 4; g cleared by (1+u^2)",
    text="""
problem gsip
name appB-alexander7
xvars x1 x2 x3
uvars u
minimize exp(x1):taylor(4) + exp(x2):taylor(4) + exp(x3):taylor(4)
X:
  x1 + 1 >= 0
  1 - x1 >= 0
  x2 + 1 >= 0
  1 - x2 >= 0
  x3 + 1 >= 0
  1 - x3 >= 0
  x2 + x3 >= 0
  0.5 - x2 - x3 >= 0
U:
  u - 2*x2 - 2*x3 >= 0
  1 - u >= 0
g:
  (1 + u^2)*(x1 + x2*u + x3*u^2) - 1 >= 0
extension box
  lower: 2*x2 + 2*x3
  upper: 1
uscale 1
samplebox -1 -1 -1 ; 1 1 1
""",
))

_add(CorpusEntry(
    name="appB-harwood",
    suite="appendixB",
    expected_f=-1.6985,
    expected_loops=4,
    slow=True,
    notes="degree-9 constraint after clearing; excluded from default runs",
    text="""
problem gsip
name appB-harwood
xvars x1 x2 x3 x4
uvars u1 u2
minimize -(x3 - x1)*(x4 - x2)
X:
  x1 + 1 >= 0
  1 - x1 >= 0
  x2 + 1 >= 0
  1 - x2 >= 0
  x3 + 1 >= 0
  1 - x3 >= 0
  x4 + 1 >= 0
  1 - x4 >= 0
  x3 - x1 >= 0
  x4 - x2 >= 0
U:
  u1 - x1 >= 0
  x3 - u1 >= 0
  u2 - x2 >= 0
  x4 - u2 >= 0
g:
  (u2^2 + 1)*(cos(u1):taylor(4)*sin(u2):taylor(4) - 1.841*u1*(1 - u1) - 6.841*u2*(1 - u2)) - u1 >= 0
extension box
  lower: x1, x2
  upper: x3, x4
uscale 1 1
samplebox -1 -1 -1 -1 ; 1 1 1 1
""",
))

_add(CorpusEntry(
    name="appB-stein",
    suite="appendixB",
    expected_f=-3.4838,
    expected_loops=10,
    notes="axis-aligned ellipse design; membership cleared by x3^2 x4^2",
    text="""
problem gsip
name appB-stein
xvars x1 x2 x3 x4
uvars u1 u2
minimize -pi*x3*x4
X:
  100 - x1^2 - x2^2 - x3^2 - x4^2 >= 0
  x3 >= 0
  x4 >= 0
U:
  x3^2*x4^2 - x4^2*(u1 - x1)^2 - x3^2*(u2 - x2)^2 >= 0
g:
  u1 + u2^2 >= 0
  3 - u1 - 4*u2 >= 0
  u2 + 1 >= 0
extension ellipsoid
  center: x1, x2
  row x3, 0
  row 0, x4
xscale 10 10 10 10
uscale 6 6
samplebox -10 -10 0 0 ; 10 10 10 10
""",
))


CORPUS: dict[str, CorpusEntry] = {e.name: e for e in _ENTRIES}

SUITES = {
    "sec6": [e.name for e in _ENTRIES if e.suite == "sec6"],
    "appendixA": [e.name for e in _ENTRIES if e.suite == "appendixA"],
    "appendixB": [e.name for e in _ENTRIES if e.suite == "appendixB"],
}
SUITES["all"] = SUITES["sec6"] + SUITES["appendixA"] + SUITES["appendixB"]


def get(name: str) -> CorpusEntry:
    if name not in CORPUS:
        raise KeyError(f"unknown corpus instance {name!r}")
    return CORPUS[name]


def suite(name: str, include_slow: bool = False) -> list[CorpusEntry]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r} (choose from {sorted(SUITES)})")
    out = [CORPUS[n] for n in SUITES[name]]
    if not include_slow:
        out = [e for e in out if not e.slow]
    return out
