"""Sparse multivariate polynomials over float coefficients.

Variables are positional: a polynomial in n + p variables treats indices
0..n-1 as the outer (x) block and n..n+p-1 as the inner (u) block.
Monomials are ordered by graded lexicographic order (degree first, then
alphabetical within a degree), which is the single canonical order used
for moment vectors and Gram bases throughout the package.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement
from typing import Iterable, Sequence

import numpy as np

# Products drop coefficients below this magnitude to bound fill-in.
COEFF_DROP = 1e-14


def grlex_key(alpha: Sequence[int]):
    """Sort key realizing graded lexicographic order with x1 > x2 > ...

    Within one degree, the monomial touching earlier variables first comes
    first, so bases read [1, x1, x2, x1^2, x1*x2, x2^2, ...].
    """
    return (sum(alpha), tuple(-a for a in alpha))


def monomial_basis(nvars: int, degree: int) -> list[tuple[int, ...]]:
    """All exponents of total degree <= degree, in graded order."""
    if nvars < 1:
        raise ValueError("nvars must be >= 1")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    out = [(0,) * nvars]
    for d in range(1, degree + 1):
        level = []
        # choose positions of d unit increments among nvars slots
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            level.append(tuple(e))
        level.sort(key=grlex_key)
        out.extend(level)
    return out


def basis_size(nvars: int, degree: int) -> int:
    return math.comb(nvars + degree, degree)


class Polynomial:
    """Immutable-by-convention sparse polynomial.

    terms maps exponent tuples to nonzero float coefficients. The zero
    polynomial has an empty term map and degree -1.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict[tuple[int, ...], float] | None = None):
        self.nvars = int(nvars)
        clean: dict[tuple[int, ...], float] = {}
        if terms:
            for e, c in terms.items():
                if len(e) != self.nvars:
                    raise ValueError(f"exponent {e} has wrong length for nvars={nvars}")
                c = float(c)
                if c != 0.0:
                    clean[tuple(int(v) for v in e)] = clean.get(tuple(e), 0.0) + c
            clean = {e: c for e, c in clean.items() if c != 0.0}
        self.terms = clean

    # ----- constructors -------------------------------------------------

    @staticmethod
    def zero(nvars: int) -> "Polynomial":
        return Polynomial(nvars, {})

    @staticmethod
    def constant(nvars: int, value: float) -> "Polynomial":
        if value == 0.0:
            return Polynomial.zero(nvars)
        return Polynomial(nvars, {(0,) * nvars: float(value)})

    @staticmethod
    def variable(index: int, nvars: int) -> "Polynomial":
        if not 0 <= index < nvars:
            raise ValueError("variable index out of range")
        e = [0] * nvars
        e[index] = 1
        return Polynomial(nvars, {tuple(e): 1.0})

    @staticmethod
    def monomial(exponent: Sequence[int], coeff: float = 1.0) -> "Polynomial":
        return Polynomial(len(exponent), {tuple(exponent): coeff})

    # ----- basic queries ------------------------------------------------

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial by convention."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def max_coeff(self) -> float:
        if not self.terms:
            return 0.0
        return max(abs(c) for c in self.terms.values())

    def coeff(self, exponent: Sequence[int]) -> float:
        return self.terms.get(tuple(exponent), 0.0)

    def constant_term(self) -> float:
        return self.terms.get((0,) * self.nvars, 0.0)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], float]]:
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]))

    def involves(self, index: int) -> bool:
        return any(e[index] for e in self.terms)

    # ----- ring operations ----------------------------------------------

    def __add__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.nvars, other)
        if self.nvars != other.nvars:
            raise ValueError("nvars mismatch")
        terms = dict(self.terms)
        for e, c in other.terms.items():
            v = terms.get(e, 0.0) + c
            if v == 0.0:
                terms.pop(e, None)
            else:
                terms[e] = v
        return Polynomial(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            other = Polynomial.constant(self.nvars, other)
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def scale(self, factor: float) -> "Polynomial":
        factor = float(factor)
        if factor == 0.0:
            return Polynomial.zero(self.nvars)
        return Polynomial(self.nvars, {e: c * factor for e, c in self.terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float)):
            return self.scale(other)
        if self.nvars != other.nvars:
            raise ValueError("nvars mismatch")
        out: dict[tuple[int, ...], float] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        out = {e: c for e, c in out.items() if abs(c) >= COEFF_DROP}
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power")
        result = Polynomial.constant(self.nvars, 1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __truediv__(self, scalar: float) -> "Polynomial":
        return self.scale(1.0 / float(scalar))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self.nvars == other.nvars
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    # ----- evaluation ---------------------------------------------------

    def eval(self, point: Sequence[float]) -> float:
        if len(point) != self.nvars:
            raise ValueError("point length does not match nvars")
        total = 0.0
        for e, c in self.terms.items():
            v = c
            for i, p in enumerate(e):
                if p:
                    v *= point[i] ** p
            total += v
        return total

    __call__ = eval

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at rows of points (shape (m, nvars))."""
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.nvars:
            raise ValueError("points must have shape (m, nvars)")
        out = np.zeros(points.shape[0])
        for e, c in self.terms.items():
            v = np.full(points.shape[0], c)
            for i, p in enumerate(e):
                if p:
                    v *= points[:, i] ** p
            out += v
        return out

    # ----- calculus -----------------------------------------------------

    def diff(self, index: int) -> "Polynomial":
        out: dict[tuple[int, ...], float] = {}
        for e, c in self.terms.items():
            if e[index]:
                ne = list(e)
                ne[index] -= 1
                ne = tuple(ne)
                out[ne] = out.get(ne, 0.0) + c * e[index]
        return Polynomial(self.nvars, out)

    def gradient(self, indices: Iterable[int]) -> list["Polynomial"]:
        return [self.diff(i) for i in indices]

    # ----- substitution -------------------------------------------------

    def compose(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute variable i by images[i]; all images share one nvars."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        if not images:
            raise ValueError("empty image list")
        target = images[0].nvars
        for q in images:
            if q.nvars != target:
                raise ValueError("images must share nvars")
        # cache powers of each image as needed
        powers: list[dict[int, Polynomial]] = [
            {0: Polynomial.constant(target, 1.0)} for _ in images
        ]

        def power(i: int, k: int) -> Polynomial:
            cache = powers[i]
            if k not in cache:
                cache[k] = power(i, k - 1) * images[i]
            return cache[k]

        result = Polynomial.zero(target)
        for e, c in self.sorted_terms():
            term = Polynomial.constant(target, c)
            for i, p in enumerate(e):
                if p:
                    term = term * power(i, p)
            result = result + term
        return result

    def substitute_block(self, start: int, images: Sequence["Polynomial"]) -> "Polynomial":
        """Replace variables start..start+len(images)-1 by polynomials in the
        leading start variables; the result lives on start variables."""
        if start + len(images) != self.nvars:
            raise ValueError("images must cover the trailing block exactly")
        idmaps = [Polynomial.variable(i, start) for i in range(start)]
        return self.compose(idmaps + list(images))

    def compose_affine(self, scales: Sequence[float], shifts: Sequence[float]) -> "Polynomial":
        """Substitute x_i -> scales[i] * x_i + shifts[i]."""
        if len(scales) != self.nvars or len(shifts) != self.nvars:
            raise ValueError("scales/shifts length mismatch")
        images = []
        for i in range(self.nvars):
            terms = {}
            if scales[i] != 0.0:
                e = [0] * self.nvars
                e[i] = 1
                terms[tuple(e)] = float(scales[i])
            if shifts[i] != 0.0:
                terms[(0,) * self.nvars] = float(shifts[i])
            images.append(Polynomial(self.nvars, terms))
        return self.compose(images)

    def extend(self, nvars: int, offset: int = 0) -> "Polynomial":
        """Reinterpret over a larger variable list, placing the current
        variables at the given offset."""
        if offset + self.nvars > nvars:
            raise ValueError("extension does not fit")
        out = {}
        for e, c in self.terms.items():
            ne = [0] * nvars
            for i, p in enumerate(e):
                ne[offset + i] = p
            out[tuple(ne)] = c
        return Polynomial(nvars, out)

    # ----- display --------------------------------------------------------

    def to_string(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        if names is None:
            names = [f"x{i+1}" for i in range(self.nvars)]
        parts = []
        for e, c in self.sorted_terms():
            factors = []
            for i, p in enumerate(e):
                if p == 1:
                    factors.append(names[i])
                elif p > 1:
                    factors.append(f"{names[i]}^{p}")
            body = "*".join(factors)
            coeff = f"{c:.17g}"
            if body:
                if c == 1.0:
                    piece = body
                elif c == -1.0:
                    piece = f"-{body}"
                else:
                    piece = f"{coeff}*{body}"
            else:
                piece = coeff
            parts.append(piece)
        s = parts[0]
        for piece in parts[1:]:
            if piece.startswith("-"):
                s += " - " + piece[1:]
            else:
                s += " + " + piece
        return s

    def __repr__(self):
        return f"Polynomial({self.nvars}, {self.to_string()})"


def taylor_poly(kind: str, degree: int) -> Polynomial:
    """Maclaurin polynomial of sin, cos or exp truncated at the given degree.

    Univariate (nvars = 1); compose with an inner polynomial to substitute
    a non-trivial argument.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    terms: dict[tuple[int, ...], float] = {}
    if kind == "exp":
        for k in range(degree + 1):
            terms[(k,)] = 1.0 / math.factorial(k)
    elif kind == "sin":
        for k in range(1, degree + 1, 2):
            terms[(k,)] = (-1.0) ** ((k - 1) // 2) / math.factorial(k)
    elif kind == "cos":
        for k in range(0, degree + 1, 2):
            terms[(k,)] = (-1.0) ** (k // 2) / math.factorial(k)
    else:
        raise ValueError(f"unknown taylor kind {kind!r}")
    return Polynomial(1, terms)


def poly_vector(polys: Iterable[Polynomial]) -> list[Polynomial]:
    polys = list(polys)
    if polys:
        n = polys[0].nvars
        for p in polys:
            if p.nvars != n:
                raise ValueError("vector entries must share nvars")
    return polys
