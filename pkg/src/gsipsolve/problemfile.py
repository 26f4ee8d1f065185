"""Text format for problem definitions.

A problem file is line-oriented: keyword statements, then constraint
sections introduced by `X:`, `U:`, `g:` or `case NAME:` headers.
Expressions are polynomial over the declared variables with `+ - * / ^`,
parentheses, float literals, `pi`, constant `sqrt(...)`, and the
transcendental functions sin/cos/exp which must carry an explicit
truncation annotation, e.g. `sin(pi*u):taylor(11)`.  Division by a
non-constant polynomial is legal only inside the g-section of convex-mode
problems, where constraints may be rational.

    problem gsip                  # or convex_kkt | convex_lme
    name ex6.3-case1
    xvars x1 x2
    uvars y
    minimize -x1                  # or: minmax EXPR (adds epigraph var t)
    X:
      x1 >= 0
      1 - x1 >= 0
    U:
      -y >= 0
    g:
      y - 3*x2^2 >= 0
    extension box
      lower: 1 - 4*x1^2 - x2^2
      upper: 0
    xscale 1 1
    uscale 32
    samplebox 0 0 ; 1 1
    meta source "..."

Convex-mode files add a `convex:` block with `phi:`, `phi_sign`,
optional `T:` rows (`row EXPR, EXPR, ...`) and `assume_positive:`
denominators.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from .poly import Polynomial, taylor_poly


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, col {col}: {msg}" if line else msg)
        self.line = line
        self.col = col


@dataclass
class Rational:
    num: Polynomial
    den: Polynomial  # constant one for plain polynomials

    def is_polynomial(self) -> bool:
        return self.den.degree() == 0

    def as_poly(self, line=0) -> Polynomial:
        if not self.is_polynomial():
            raise ParseError("polynomial expected but expression has a denominator", line)
        c = self.den.constant_term()
        return self.num.scale(1.0 / c)


@dataclass
class Constraint:
    poly: Rational
    kind: str  # 'ge' or 'eq'


@dataclass
class ProblemFile:
    mode: str = "gsip"
    name: str = ""
    xvars: list[str] = field(default_factory=list)
    uvars: list[str] = field(default_factory=list)
    objective: Optional[Polynomial] = None
    minmax_expr: Optional[Polynomial] = None  # pre-transform record
    x_constraints: list[Constraint] = field(default_factory=list)
    u_constraints: list[Constraint] = field(default_factory=list)
    g_constraints: list[Constraint] = field(default_factory=list)
    extension_kind: str = "auto"
    ext_lower: list[Polynomial] = field(default_factory=list)
    ext_upper: list[Polynomial] = field(default_factory=list)
    ext_center: list[Polynomial] = field(default_factory=list)
    ext_shape: list[list[Polynomial]] = field(default_factory=list)
    ext_degrees: tuple = (2, 4)
    xscale: Optional[list[float]] = None
    uscale: Optional[list[float]] = None
    sample_lo: Optional[list[float]] = None
    sample_hi: Optional[list[float]] = None
    cases: dict[str, list[Constraint]] = field(default_factory=dict)
    convex_T: list[list[Polynomial]] = field(default_factory=list)
    convex_phi: Optional[Polynomial] = None
    convex_phi_sign: str = "unknown"
    assume_positive: list[Polynomial] = field(default_factory=list)
    meta: dict[str, str] = field(default_factory=dict)

    @property
    def nx(self) -> int:
        return len(self.xvars)

    @property
    def nu(self) -> int:
        return len(self.uvars)


# ----------------------------------------------------------------------
# expression parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^():,]))"
)

_FUNCS = ("sin", "cos", "exp")


class _ExprParser:
    def __init__(self, text: str, varmap: dict[str, int], nvars: int, line: int):
        self.text = text
        self.varmap = varmap
        self.nvars = nvars
        self.line = line
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                if text[pos:].strip() == "":
                    break
                raise ParseError(f"bad character {text[pos]!r}", line, pos + 1)
            pos = m.end()
            if m.group("num") is not None:
                self.tokens.append(("num", m.group("num"), m.start() + 1))
            elif m.group("name") is not None:
                self.tokens.append(("name", m.group("name"), m.start() + 1))
            else:
                self.tokens.append(("op", m.group("op"), m.start() + 1))
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("end", "", len(self.text))

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, col = self.next()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of line'!r}", self.line, col)

    def const(self, v: float) -> Rational:
        return Rational(
            Polynomial.constant(self.nvars, v), Polynomial.constant(self.nvars, 1.0)
        )

    def parse(self) -> Rational:
        r = self.parse_sum()
        kind, val, col = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", self.line, col)
        return r

    def parse_sum(self) -> Rational:
        kind, val, col = self.peek()
        if kind == "op" and val in "+-":
            self.next()
            r = self.parse_term()
            if val == "-":
                r = Rational(-r.num, r.den)
        else:
            r = self.parse_term()
        while True:
            kind, val, col = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.parse_term()
                num = r.num * rhs.den + (rhs.num if val == "+" else -rhs.num) * r.den
                r = Rational(num, r.den * rhs.den)
            else:
                return r

    def parse_term(self) -> Rational:
        r = self.parse_power()
        while True:
            kind, val, col = self.peek()
            if kind == "op" and val == "*":
                self.next()
                rhs = self.parse_power()
                r = Rational(r.num * rhs.num, r.den * rhs.den)
            elif kind == "op" and val == "/":
                self.next()
                rhs = self.parse_power()
                if rhs.num.is_zero():
                    raise ParseError("division by zero", self.line, col)
                r = Rational(r.num * rhs.den, r.den * rhs.num)
            else:
                return r

    def parse_power(self) -> Rational:
        base = self.parse_atom()
        kind, val, col = self.peek()
        if kind == "op" and val == "^":
            self.next()
            kind2, val2, col2 = self.next()
            if kind2 != "num" or not val2.isdigit():
                raise ParseError("exponent must be a nonnegative integer", self.line, col2)
            k = int(val2)
            return Rational(base.num**k, base.den**k)
        return base

    def parse_atom(self) -> Rational:
        kind, val, col = self.next()
        if kind == "num":
            return self.const(float(val))
        if kind == "op" and val == "(":
            r = self.parse_sum()
            self.expect(")")
            return r
        if kind == "op" and val == "-":
            r = self.parse_atom()
            return Rational(-r.num, r.den)
        if kind == "name":
            if val == "pi":
                return self.const(math.pi)
            if val == "sqrt":
                self.expect("(")
                arg = self.parse_sum()
                self.expect(")")
                if not arg.is_polynomial() or arg.num.degree() > 0:
                    raise ParseError("sqrt takes a constant argument", self.line, col)
                return self.const(math.sqrt(arg.as_poly(self.line).constant_term()))
            if val in _FUNCS:
                self.expect("(")
                arg = self.parse_sum()
                self.expect(")")
                kind2, val2, col2 = self.peek()
                if not (kind2 == "op" and val2 == ":"):
                    raise ParseError(
                        f"{val}(...) is not polynomial: annotate as {val}(...):taylor(d)",
                        self.line,
                        col,
                    )
                self.next()
                kind3, val3, col3 = self.next()
                if val3 != "taylor":
                    raise ParseError("expected taylor(...) after ':'", self.line, col3)
                self.expect("(")
                kind4, val4, col4 = self.next()
                if kind4 != "num" or not val4.isdigit():
                    raise ParseError("taylor degree must be an integer", self.line, col4)
                self.expect(")")
                inner = arg.as_poly(self.line)
                t = taylor_poly(val, int(val4))
                return Rational(
                    t.compose([inner]), Polynomial.constant(self.nvars, 1.0)
                )
            if val in self.varmap:
                return Rational(
                    Polynomial.variable(self.varmap[val], self.nvars),
                    Polynomial.constant(self.nvars, 1.0),
                )
            raise ParseError(f"unknown identifier {val!r}", self.line, col)
        raise ParseError(f"unexpected {val or 'end of line'!r}", self.line, col)


def _parse_expr(text: str, varmap: dict[str, int], nvars: int, line: int) -> Rational:
    return _ExprParser(text, varmap, nvars, line).parse()


def _parse_constraint(text: str, varmap, nvars, line) -> Constraint:
    for op, kind, flip in ((">=", "ge", False), ("<=", "ge", True), ("=", "eq", False)):
        if op in text:
            lhs, rhs = text.split(op, 1)
            l = _parse_expr(lhs, varmap, nvars, line)
            r = _parse_expr(rhs, varmap, nvars, line)
            num = l.num * r.den - r.num * l.den
            den = l.den * r.den
            if flip:
                num = -num
            return Constraint(Rational(num, den), kind)
    raise ParseError("constraint needs >=, <= or =", line)


# ----------------------------------------------------------------------
# file parsing


def parse_problem(text: str) -> ProblemFile:
    pf = ProblemFile()
    section = None  # X | U | g | case:NAME | convex
    lines = text.splitlines()

    # first pass: declarations, so sections can reference every variable
    saw_minmax = False
    for raw in lines:
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if stripped.startswith("xvars "):
            pf.xvars = stripped.split()[1:]
        elif stripped.startswith("uvars "):
            pf.uvars = stripped.split()[1:]
        elif stripped.startswith("minmax "):
            saw_minmax = True
    if saw_minmax:
        pf.xvars = pf.xvars + ["t"]
    if not pf.xvars:
        raise ParseError("no xvars declared")
    names = pf.xvars + pf.uvars
    if len(set(names)) != len(names):
        raise ParseError("duplicate variable names")
    nall = len(names)
    vm_all = {n: i for i, n in enumerate(names)}
    vm_x = {n: i for i, n in enumerate(pf.xvars)}

    def poly_x(textv, ln):
        return _parse_expr(textv, vm_x, pf.nx, ln).as_poly(ln)

    def floats(parts, ln):
        try:
            return [float(v) for v in parts]
        except ValueError as exc:
            raise ParseError(f"expected numbers: {exc}", ln) from exc

    for ln, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        head = stripped.split()[0]

        if head == "problem":
            mode = stripped.split()[1]
            if mode not in ("gsip", "convex_kkt", "convex_lme"):
                raise ParseError(f"unknown problem mode {mode!r}", ln)
            pf.mode = mode
            section = None
        elif head == "name":
            pf.name = stripped.split(None, 1)[1]
            section = None
        elif head in ("xvars", "uvars"):
            section = None
        elif head == "minimize":
            pf.objective = poly_x(stripped[len("minimize") :], ln)
            section = None
        elif head == "minmax":
            inner = _parse_expr(stripped[len("minmax") :], vm_all, nall, ln).as_poly(ln)
            pf.minmax_expr = inner
            # epigraph: minimize t with the new constraint t - inner >= 0
            pf.objective = Polynomial.variable(vm_x["t"], pf.nx)
            t_poly = Polynomial.variable(vm_all["t"], nall)
            pf.g_constraints.insert(
                0, Constraint(Rational(t_poly - inner, Polynomial.constant(nall, 1.0)), "ge")
            )
            section = None
        elif stripped in ("X:", "U:", "g:", "convex:"):
            section = stripped[:-1]
        elif head == "case":
            m = re.match(r"case\s+([\w.+-]+)\s*:", stripped)
            if not m:
                raise ParseError("case header must be 'case NAME:'", ln)
            section = "case:" + m.group(1)
            pf.cases.setdefault(m.group(1), [])
        elif head == "extension":
            pf.extension_kind = stripped.split()[1]
            section = "extension"
        elif head == "xscale":
            pf.xscale = floats(stripped.split()[1:], ln)
        elif head == "uscale":
            pf.uscale = floats(stripped.split()[1:], ln)
        elif head == "samplebox":
            body = stripped[len("samplebox") :]
            if ";" not in body:
                raise ParseError("samplebox needs 'lo... ; hi...'", ln)
            lo, hi = body.split(";")
            pf.sample_lo = floats(lo.split(), ln)
            pf.sample_hi = floats(hi.split(), ln)
        elif head == "meta":
            parts = stripped.split(None, 2)
            if len(parts) < 3:
                raise ParseError("meta needs a key and a value", ln)
            pf.meta[parts[1]] = parts[2].strip().strip('"')
        elif section == "extension" and head in ("lower:", "upper:", "center:"):
            exprs = [e for e in stripped.split(":", 1)[1].split(",") if e.strip()]
            target = {"lower:": pf.ext_lower, "upper:": pf.ext_upper, "center:": pf.ext_center}[head]
            target.extend(poly_x(e, ln) for e in exprs)
        elif section == "extension" and head == "row":
            exprs = stripped[len("row") :].split(",")
            pf.ext_shape.append([poly_x(e, ln) for e in exprs])
        elif section == "extension" and head == "degrees:":
            pf.ext_degrees = tuple(int(v) for v in stripped.split(":", 1)[1].split())
        elif section == "convex" and head == "phi:":
            pf.convex_phi = _parse_expr(stripped.split(":", 1)[1], vm_all, nall, ln).as_poly(ln)
        elif section == "convex" and head == "phi_sign":
            sign = stripped.split()[1]
            if sign not in ("positive", "negative", "unknown"):
                raise ParseError("phi_sign must be positive|negative|unknown", ln)
            pf.convex_phi_sign = sign
        elif section == "convex" and head == "row":
            exprs = stripped[len("row") :].split(",")
            pf.convex_T.append(
                [_parse_expr(e, vm_all, nall, ln).as_poly(ln) for e in exprs]
            )
        elif section == "convex" and head == "assume_positive:":
            exprs = stripped.split(":", 1)[1].split(",")
            pf.assume_positive.extend(
                _parse_expr(e, vm_all, nall, ln).as_poly(ln) for e in exprs
            )
        elif section == "X":
            c = _parse_constraint(stripped, vm_x, pf.nx, ln)
            pf.x_constraints.append(Constraint(Rational(c.poly.num, c.poly.den), c.kind))
        elif section == "U":
            pf.u_constraints.append(_parse_constraint(stripped, vm_all, nall, ln))
        elif section == "g":
            pf.g_constraints.append(_parse_constraint(stripped, vm_all, nall, ln))
        elif section and section.startswith("case:"):
            pf.cases[section[5:]].append(_parse_constraint(stripped, vm_x, pf.nx, ln))
        else:
            raise ParseError(f"unexpected statement {stripped!r}", ln)

    if pf.objective is None:
        raise ParseError("no objective (minimize/minmax) given")
    for c in pf.x_constraints + ([] if pf.mode != "gsip" else pf.g_constraints + pf.u_constraints):
        if not c.poly.is_polynomial():
            raise ParseError("rational constraints are only allowed in convex-mode g sections")
    return pf


def print_problem(pf: ProblemFile) -> str:
    """Canonical text emission; parse(print_problem(pf)) is structurally
    identical to pf."""
    out = [f"problem {pf.mode}"]
    if pf.name:
        out.append(f"name {pf.name}")
    xv = pf.xvars[:-1] if pf.minmax_expr is not None else pf.xvars
    out.append("xvars " + " ".join(xv))
    if pf.uvars:
        out.append("uvars " + " ".join(pf.uvars))
    names = pf.xvars + pf.uvars

    def fmt(p: Polynomial, nm) -> str:
        return p.to_string(nm)

    if pf.minmax_expr is not None:
        out.append("minmax " + fmt(pf.minmax_expr, names))
    else:
        out.append("minimize " + fmt(pf.objective, pf.xvars))

    def emit_cons(header, cons, nm):
        if not cons:
            return
        out.append(header)
        for c in cons:
            body = fmt(c.poly.num, nm)
            if not c.poly.is_polynomial():
                body = f"({body}) / ({fmt(c.poly.den, nm)})"
            out.append(f"  {body} {'>=' if c.kind == 'ge' else '='} 0")

    emit_cons("X:", pf.x_constraints, pf.xvars)
    emit_cons("U:", pf.u_constraints, names)
    g_cons = pf.g_constraints[1:] if pf.minmax_expr is not None else pf.g_constraints
    emit_cons("g:", g_cons, names)
    if pf.extension_kind != "auto" or pf.ext_lower or pf.ext_center:
        out.append(f"extension {pf.extension_kind}")
        if pf.ext_lower:
            out.append("  lower: " + ", ".join(fmt(p, pf.xvars) for p in pf.ext_lower))
        if pf.ext_upper:
            out.append("  upper: " + ", ".join(fmt(p, pf.xvars) for p in pf.ext_upper))
        if pf.ext_center:
            out.append("  center: " + ", ".join(fmt(p, pf.xvars) for p in pf.ext_center))
        for row in pf.ext_shape:
            out.append("  row " + ", ".join(fmt(p, pf.xvars) for p in row))
        if pf.ext_degrees != (2, 4):
            out.append("  degrees: " + " ".join(str(d) for d in pf.ext_degrees))
    if pf.xscale:
        out.append("xscale " + " ".join(f"{v:.17g}" for v in pf.xscale))
    if pf.uscale:
        out.append("uscale " + " ".join(f"{v:.17g}" for v in pf.uscale))
    if pf.sample_lo is not None:
        out.append(
            "samplebox "
            + " ".join(f"{v:.17g}" for v in pf.sample_lo)
            + " ; "
            + " ".join(f"{v:.17g}" for v in pf.sample_hi)
        )
    if pf.convex_phi is not None or pf.convex_T:
        out.append("convex:")
        if pf.convex_phi is not None:
            out.append("  phi: " + fmt(pf.convex_phi, names))
            out.append("  phi_sign " + pf.convex_phi_sign)
        for row in pf.convex_T:
            out.append("  row " + ", ".join(fmt(p, names) for p in row))
        if pf.assume_positive:
            out.append(
                "  assume_positive: " + ", ".join(fmt(p, names) for p in pf.assume_positive)
            )
    for cname, cons in pf.cases.items():
        out.append(f"case {cname}:")
        for c in cons:
            out.append(f"  {fmt(c.poly.num, pf.xvars)} {'>=' if c.kind == 'ge' else '='} 0")
    for k, v in pf.meta.items():
        out.append(f'meta {k} "{v}"')
    return "\n".join(out) + "\n"


def to_gsip(pf: ProblemFile, case: Optional[str] = None):
    """Build the solver-side problem value from a parsed gsip-mode file."""
    from .gsip import ExtensionSpec, GsipProblem

    if pf.mode != "gsip":
        raise ParseError(f"problem mode is {pf.mode}, not gsip")
    x_eq = [c.poly.as_poly() for c in pf.x_constraints if c.kind == "eq"]
    x_ineq = [c.poly.as_poly() for c in pf.x_constraints if c.kind == "ge"]
    if case is not None:
        if case not in pf.cases:
            raise ParseError(f"unknown case {case!r}")
        for c in pf.cases[case]:
            (x_eq if c.kind == "eq" else x_ineq).append(c.poly.as_poly())
    u_eq = [c.poly.as_poly() for c in pf.u_constraints if c.kind == "eq"]
    u_ineq = [c.poly.as_poly() for c in pf.u_constraints if c.kind == "ge"]
    g = [c.poly.as_poly() for c in pf.g_constraints]
    spec = ExtensionSpec(
        kind=pf.extension_kind,
        l=pf.ext_lower,
        w=pf.ext_upper,
        a=pf.ext_center,
        D=pf.ext_shape,
        degrees=pf.ext_degrees,
    )
    return GsipProblem(
        nx=pf.nx,
        nu=pf.nu,
        objective=pf.objective,
        x_eq=x_eq,
        x_ineq=x_ineq,
        u_eq=u_eq,
        u_ineq=u_ineq,
        g=g,
        extension=spec,
        x_scale=pf.xscale,
        u_scale=pf.uscale,
        sample_lo=pf.sample_lo,
        sample_hi=pf.sample_hi,
        name=pf.name,
    )


def to_convex(pf: ProblemFile, case: Optional[str] = None):
    """Build the convex-constraint problem value from a parsed
    convex_kkt / convex_lme file."""
    from .convexkkt import ConvexGsip, RationalFn

    if pf.mode not in ("convex_kkt", "convex_lme"):
        raise ParseError(f"problem mode is {pf.mode}, not convex")
    if any(c.kind == "eq" for c in pf.u_constraints):
        raise ParseError(
            "U equality constraints are unsupported in the convex reformulation; "
            "eliminate them by substitution first"
        )
    x_eq = [c.poly.as_poly() for c in pf.x_constraints if c.kind == "eq"]
    x_ineq = [c.poly.as_poly() for c in pf.x_constraints if c.kind == "ge"]
    if case is not None:
        if case not in pf.cases:
            raise ParseError(f"unknown case {case!r}")
        for c in pf.cases[case]:
            (x_eq if c.kind == "eq" else x_ineq).append(c.poly.as_poly())
    h = [c.poly.as_poly() for c in pf.u_constraints]
    g = [RationalFn(c.poly.num, c.poly.den) for c in pf.g_constraints]
    return ConvexGsip(
        nx=pf.nx,
        nu=pf.nu,
        objective=pf.objective,
        x_eq=x_eq,
        x_ineq=x_ineq,
        h=h,
        g=g,
        T=pf.convex_T or None,
        phi=pf.convex_phi,
        phi_sign=pf.convex_phi_sign,
        assume_positive=pf.assume_positive,
        x_scale=pf.xscale,
        u_scale=pf.uscale,
        name=pf.name,
    )
