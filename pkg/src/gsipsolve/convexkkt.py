"""Single-shot reformulation of GSIPs with convex infinity constraints.

When every g_j(x, u) is convex and every h_i(x, u) concave in u, the
quantified constraint "g_j(x, u) >= 0 for all u in U(x)" collapses to a
KKT system in new variables z_j (the worst-case parameter) and lambda_j
(its multipliers): stationarity, complementarity, and g_j(x, z_j) >= 0.
The whole GSIP then becomes one polynomial program.

Multipliers can be eliminated when a polynomial matrix T(x,u) with
T(x,u) H(x,u) = phi(x,u) I is supplied, H stacking the constraint
gradients over diag(h): then lambda_j = T eta_j / phi with
eta_j = (grad_u g_j; 0; ...; 0), and substituting this rational
expression followed by denominator clearing gives a polynomial program in
(x, z_1..z_s) alone.

Constraint data may be rational in (x, u): numerators and denominators
are carried separately, gradients are formed quotient-rule style, and
every clearing multiplication uses either an even power, the
sign-attested phi, or denominators the caller attested positive on the
domain.  Convexity itself is user-attested; checking it is out of scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .momentsos import Pop
from .poly import Polynomial, grlex_key

RESIDUAL_TOL = 1e-10


class ConvexKktError(Exception):
    pass


@dataclass
class RationalFn:
    """num/den with den a verified-positive product (constant times
    attested factors); den defaults to one."""

    num: Polynomial
    den: Polynomial

    @staticmethod
    def poly(p: Polynomial) -> "RationalFn":
        return RationalFn(p, Polynomial.constant(p.nvars, 1.0))

    def is_polynomial(self) -> bool:
        return self.den.degree() == 0


@dataclass
class ConvexGsip:
    nx: int
    nu: int
    objective: Polynomial  # over nx
    x_eq: list[Polynomial] = field(default_factory=list)
    x_ineq: list[Polynomial] = field(default_factory=list)
    h: list[Polynomial] = field(default_factory=list)  # U(x) = {h >= 0}, over nx+nu
    g: list[RationalFn] = field(default_factory=list)  # over nx+nu
    T: Optional[list[list[Polynomial]]] = None
    phi: Optional[Polynomial] = None
    phi_sign: str = "unknown"  # positive | negative | unknown
    assume_positive: list[Polynomial] = field(default_factory=list)
    x_scale: Optional[list[float]] = None
    u_scale: Optional[list[float]] = None
    name: str = ""

    @property
    def s(self) -> int:
        return len(self.g)

    @property
    def m(self) -> int:
        return len(self.h)


@dataclass
class KktPop:
    pop: Pop
    nx: int
    s: int
    p: int
    m: int
    explicit_multipliers: bool
    z_slice: list[slice]
    lam_slice: list[slice]
    var_scale: list[float]

    def split_point(self, point) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
        point = np.asarray(point, dtype=float)
        x = point[: self.nx]
        zs = [point[sl] for sl in self.z_slice]
        lams = [point[sl] for sl in self.lam_slice]
        return x, zs, lams


# ----------------------------------------------------------------------
# polynomial division helpers (denominator verification)


def try_divide(p: Polynomial, d: Polynomial) -> Optional[Polynomial]:
    """Exact quotient p/d, or None when d does not divide p.

    Leading-term elimination in graded order; coefficients below 1e-10 of
    the working scale count as zero.
    """
    if d.is_zero():
        return None
    scale = max(p.max_coeff(), 1.0)
    lead_d = max(d.terms, key=grlex_key)
    cd = d.terms[lead_d]
    q_terms: dict = {}
    rem = p
    for _ in range(len(p.terms) * 4 + 8):
        if rem.is_zero() or rem.max_coeff() <= 1e-10 * scale:
            return Polynomial(p.nvars, q_terms)
        lead_r = max(rem.terms, key=grlex_key)
        diff = tuple(a - b for a, b in zip(lead_r, lead_d))
        if any(v < 0 for v in diff):
            return None
        coef = rem.terms[lead_r] / cd
        q_terms[diff] = q_terms.get(diff, 0.0) + coef
        rem = rem - Polynomial.monomial(diff, coef) * d
    return None


def factor_positive(den: Polynomial, attested: Sequence[Polynomial]) -> bool:
    """True when den is a positive constant times a product of attested
    factors (each possibly repeated)."""
    rem = den
    progress = True
    while rem.degree() > 0 and progress:
        progress = False
        for f in attested:
            q = try_divide(rem, f)
            if q is not None:
                rem = q
                progress = True
                break
    return rem.degree() == 0 and rem.constant_term() > 0


# ----------------------------------------------------------------------
# structural pieces


def assemble_H_eta(
    h: Sequence[Polynomial], g_j: Polynomial, nx: int, nu: int
) -> tuple[list[list[Polynomial]], list[Polynomial]]:
    """H = [grad_u h block on top of diag(h)], eta_j = (grad_u g_j; 0...)."""
    m = len(h)
    zero = Polynomial.zero(nx + nu)
    H = [[h[i].diff(nx + l) for i in range(m)] for l in range(nu)]
    for r in range(m):
        H.append([h[r] if i == r else zero for i in range(m)])
    eta = [g_j.diff(nx + l) for l in range(nu)] + [zero] * m
    return H, eta


def verify_lme_identity(
    T: list[list[Polynomial]], h: Sequence[Polynomial], phi: Polynomial, nx: int, nu: int
) -> float:
    """Max coefficient of T(x,u) H(x,u) - phi(x,u) I, fully expanded."""
    m = len(h)
    H, _ = assemble_H_eta(h, Polynomial.zero(nx + nu), nx, nu)
    if len(T) != m or any(len(row) != nu + m for row in T):
        raise ConvexKktError(f"T must be {m} x {nu + m}")
    worst = 0.0
    for r in range(m):
        for c in range(m):
            acc = Polynomial.zero(nx + nu)
            for k in range(nu + m):
                acc = acc + T[r][k] * H[k][c]
            if r == c:
                acc = acc - phi
            worst = max(worst, acc.max_coeff())
    return worst


def _grad_rational(g: RationalFn, nx: int, nu: int) -> list[RationalFn]:
    """Quotient-rule gradient in u; denominators come out as den^2."""
    out = []
    den2 = g.den * g.den
    for l in range(nu):
        num = g.num.diff(nx + l) * g.den - g.num * g.den.diff(nx + l)
        out.append(RationalFn(num, den2))
    return out


def _embedding(nx: int, nu: int, s: int, m: int, j: int, nvars: int, explicit: bool):
    """Images mapping an (x, u)-polynomial into the joint KKT space with u
    replaced by z_j."""
    images = [Polynomial.variable(i, nvars) for i in range(nx)]
    base = nx + j * nu
    images += [Polynomial.variable(base + l, nvars) for l in range(nu)]
    return images


def _check_g_dens(prob: ConvexGsip):
    for gj in prob.g:
        if gj.den.degree() > 0 and not factor_positive(gj.den, prob.assume_positive):
            raise ConvexKktError(
                "a g denominator is not a product of attested-positive factors"
            )


def build_kkt_pop(prob: ConvexGsip, include_g: bool = True) -> KktPop:
    """Explicit-multiplier reformulation over (x, z_1..z_s, lam_1..lam_s).

    Per block j: stationarity grad_u h(x,z_j) lam_j = grad_u g_j(x,z_j)
    (cleared by the squared g-denominators), complementarity
    lam_{j,i} h_i(x,z_j) = 0, and the inequalities h >= 0, lam >= 0,
    g_j(x,z_j) >= 0.
    """
    _check_g_dens(prob)
    nx, nu, s, m = prob.nx, prob.nu, prob.s, prob.m
    nvars = nx + s * nu + s * m
    eqs: list[Polynomial] = []
    ineqs: list[Polynomial] = []

    for j in range(s):
        img = _embedding(nx, nu, s, m, j, nvars, True)
        lam_base = nx + s * nu + j * m

        def at_z(p: Polynomial) -> Polynomial:
            return p.compose(img)

        grads = _grad_rational(prob.g[j], nx, nu)
        for l in range(nu):
            row = Polynomial.zero(nvars)
            for i in range(m):
                dh = at_z(prob.h[i].diff(nx + l))
                row = row + dh * Polynomial.variable(lam_base + i, nvars)
            den = at_z(grads[l].den)
            num = at_z(grads[l].num)
            row = row * den - num
            if not row.is_zero():
                eqs.append(row)
        for i in range(m):
            hi = at_z(prob.h[i])
            eqs.append(hi * Polynomial.variable(lam_base + i, nvars))
            ineqs.append(hi)
            ineqs.append(Polynomial.variable(lam_base + i, nvars))
        if include_g:
            ineqs.append(at_z(prob.g[j].num))

    for c in prob.x_ineq:
        ineqs.append(c.extend(nvars))
    x_eqs = [c.extend(nvars) for c in prob.x_eq]

    pop = Pop(nvars, prob.objective.extend(nvars), x_eqs + eqs, ineqs)
    xs = list(prob.x_scale) if prob.x_scale else [1.0] * nx
    us = list(prob.u_scale) if prob.u_scale else [1.0] * nu
    scale = xs + us * s + [1.0] * (s * m)
    return KktPop(
        pop=pop,
        nx=nx,
        s=s,
        p=nu,
        m=m,
        explicit_multipliers=True,
        z_slice=[slice(nx + j * nu, nx + (j + 1) * nu) for j in range(s)],
        lam_slice=[
            slice(nx + s * nu + j * m, nx + s * nu + (j + 1) * m) for j in range(s)
        ],
        var_scale=scale,
    )


def auto_T(prob: ConvexGsip) -> tuple[list[list[Polynomial]], Polynomial, str]:
    """Construct (T, phi) for the diagonal case: each h_i depends on its
    own inner variable only, so the gradient block is diagonal and the
    cofactor rows work.  Anything richer must supply T by hand."""
    nx, nu, m = prob.nx, prob.nu, prob.m
    if m != nu:
        raise ConvexKktError("automatic T needs as many constraints as inner variables")
    diag = []
    for i in range(m):
        for l in range(nu):
            d = prob.h[i].diff(nx + l)
            if l == i:
                diag.append(d)
            elif not d.is_zero():
                raise ConvexKktError("automatic T needs a diagonal gradient block")
    zero = Polynomial.zero(nx + nu)
    T = [[zero for _ in range(nu + m)] for _ in range(m)]
    phi = Polynomial.constant(nx + nu, 1.0)
    for i in range(m):
        cof = Polynomial.constant(nx + nu, 1.0)
        for j in range(m):
            if j != i:
                cof = cof * diag[j]
        T[i][i] = cof
        phi = phi * diag[i]
    sign = "unknown"
    consts = [d.constant_term() for d in diag]
    if all(d.degree() == 0 for d in diag):
        sign = "positive" if np.prod(consts) > 0 else "negative"
    return T, phi, sign


def build_lme_pop(prob: ConvexGsip) -> KktPop:
    """Multiplier-eliminated reformulation over (x, z_1..z_s).

    lambda_j is replaced by T eta_j / phi; stationarity rows that reduce
    to identical zero after expansion are dropped, every remaining
    equality is cleared by its exact denominator, and inequalities are
    cleared sign-safely according to the attested sign of phi (squared
    denominators need no attestation).
    """
    if prob.T is None or prob.phi is None:
        T, phi, sign = auto_T(prob)
        prob = ConvexGsip(
            nx=prob.nx,
            nu=prob.nu,
            objective=prob.objective,
            x_eq=prob.x_eq,
            x_ineq=prob.x_ineq,
            h=prob.h,
            g=prob.g,
            T=T,
            phi=phi,
            phi_sign=sign,
            assume_positive=prob.assume_positive,
            x_scale=prob.x_scale,
            u_scale=prob.u_scale,
            name=prob.name,
        )
    if prob.T is None or prob.phi is None:
        raise ConvexKktError("the multiplier-eliminated form needs (T, phi)")
    if prob.phi.is_zero():
        raise ConvexKktError("phi must be a nonzero polynomial")
    resid = verify_lme_identity(prob.T, prob.h, prob.phi, prob.nx, prob.nu)
    if resid > RESIDUAL_TOL:
        raise ConvexKktError(
            f"T H != phi I: residual coefficient {resid:.2e} exceeds {RESIDUAL_TOL}"
        )
    _check_g_dens(prob)
    nx, nu, s, m = prob.nx, prob.nu, prob.s, prob.m
    nvars = nx + s * nu
    eqs: list[Polynomial] = []
    ineqs: list[Polynomial] = []

    for j in range(s):
        img = _embedding(nx, nu, s, m, j, nvars, False)

        def at_z(p: Polynomial) -> Polynomial:
            return p.compose(img)

        grads = _grad_rational(prob.g[j], nx, nu)
        # common denominator D_j of the gradient rows (product of the
        # distinct squared denominators)
        distinct: list[Polynomial] = []
        for gr in grads:
            if gr.den.degree() > 0 and all(
                (gr.den - d).max_coeff() > 1e-12 for d in distinct
            ):
                distinct.append(gr.den)
        D = Polynomial.constant(nx + nu, 1.0)
        for d in distinct:
            D = D * d
        # eta scaled by D: rows l = grad entries, rows p+r = 0
        eta_hat = []
        for gr in grads:
            mult = try_divide(D, gr.den) if gr.den.degree() > 0 else D
            if mult is None:
                raise ConvexKktError("gradient denominators do not share factors")
            eta_hat.append(gr.num * mult)
        eta_hat += [Polynomial.zero(nx + nu)] * m
        # p_hat_i = [T eta_hat]_i, so lambda_{j,i} = p_hat_i / (phi D)
        p_hat = []
        for i in range(m):
            acc = Polynomial.zero(nx + nu)
            for kcol in range(nu + m):
                acc = acc + prob.T[i][kcol] * eta_hat[kcol]
            p_hat.append(acc)

        # stationarity: sum_i d_l h_i * p_hat_i = phi * (D / den_l) * num_l
        for l in range(nu):
            lhs = Polynomial.zero(nx + nu)
            for i in range(m):
                lhs = lhs + prob.h[i].diff(nx + l) * p_hat[i]
            mult = try_divide(D, grads[l].den) if grads[l].den.degree() > 0 else D
            rhs = prob.phi * mult * grads[l].num
            row = lhs - rhs
            if not row.is_zero() and row.max_coeff() > 1e-12:
                eqs.append(at_z(row))
        # complementarity and sign constraints
        for i in range(m):
            comp = prob.h[i] * p_hat[i]
            if not comp.is_zero():
                eqs.append(at_z(comp))
            ineqs.append(at_z(prob.h[i]))
            if prob.phi_sign == "positive":
                ineqs.append(at_z(p_hat[i]))
            elif prob.phi_sign == "negative":
                ineqs.append(at_z(-p_hat[i]))
            else:
                ineqs.append(at_z(p_hat[i] * prob.phi))
        ineqs.append(at_z(prob.g[j].num))

    for c in prob.x_ineq:
        ineqs.append(c.extend(nvars))
    x_eqs = [c.extend(nvars) for c in prob.x_eq]

    pop = Pop(nvars, prob.objective.extend(nvars), x_eqs + eqs, ineqs)
    xs = list(prob.x_scale) if prob.x_scale else [1.0] * nx
    us = list(prob.u_scale) if prob.u_scale else [1.0] * nu
    return KktPop(
        pop=pop,
        nx=nx,
        s=s,
        p=nu,
        m=m,
        explicit_multipliers=False,
        z_slice=[slice(nx + j * nu, nx + (j + 1) * nu) for j in range(s)],
        lam_slice=[],
        var_scale=xs + us * s,
    )


def kkt_residuals(prob: ConvexGsip, point) -> dict:
    """Round-trip diagnostics of an explicit-multiplier solution: per j,
    membership of z_j, multiplier signs, complementarity and stationarity
    residuals (stationarity in the cleared polynomial form)."""
    nx, nu, s, m = prob.nx, prob.nu, prob.s, prob.m
    point = np.asarray(point, dtype=float)
    x = point[:nx]
    out = {"membership": [], "lam_min": [], "complementarity": [], "stationarity": []}
    for j in range(s):
        z = point[nx + j * nu : nx + (j + 1) * nu]
        lam = point[nx + s * nu + j * m : nx + s * nu + (j + 1) * m]
        xz = list(x) + list(z)
        hv = np.array([hi.eval(xz) for hi in prob.h])
        out["membership"].append(float(hv.min()))
        out["lam_min"].append(float(lam.min()))
        out["complementarity"].append(float(np.abs(hv * lam).max()))
        grads = _grad_rational(prob.g[j], nx, nu)
        worst = 0.0
        for l in range(nu):
            lhs = sum(
                prob.h[i].diff(nx + l).eval(xz) * lam[i] for i in range(m)
            )
            den = grads[l].den.eval(xz)
            num = grads[l].num.eval(xz)
            worst = max(worst, abs(lhs * den - num) / max(1.0, abs(den)))
        out["stationarity"].append(worst)
    return out
