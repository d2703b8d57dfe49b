"""Generating-function calculus: the bilinear operator B, generalized translation,
the coefficient operators D_i, the Hirota operator and the basic generating
function P(xi, eta).

All objects are sparse Laurent polynomials whose coefficients may be exact
rationals, floats or :class:`~gkdv.diffpoly.DiffPoly` values.  Every division
by a difference of variables is carried out by exact synthetic division after
checking that the numerator vanishes on the corresponding diagonal.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from typing import Callable, Mapping, Sequence

import numpy as np

from .diffpoly import DiffPoly
from .spectral import CurveSpec

__all__ = [
    "MultiPoly",
    "LaurentPoly",
    "BiPoly",
    "NotSymmetric",
    "NonVanishingNumerator",
    "bop",
    "bop_k",
    "translate",
    "translate_multi",
    "d_coeff",
    "d_op",
    "hirota",
    "polarization_check",
    "structure_constants",
    "mu_bivariate",
    "q_bivariate",
    "p_bivariate",
    "p_matrix",
]


class NotSymmetric(ValueError):
    pass


class NonVanishingNumerator(ArithmeticError):
    """A numerator that should vanish on a diagonal does not."""


def _is_zero(c, tol: float = 0.0) -> bool:
    if isinstance(c, DiffPoly):
        return c.is_zero()
    if isinstance(c, (int, Fraction)):
        return c == 0
    return abs(c) <= tol


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


class MultiPoly:
    """Sparse Laurent polynomial in ``nvars`` variables."""

    nvars: int = 0

    def __init__(self, terms: Mapping[tuple, object] | None = None, nvars: int | None = None):
        if nvars is not None:
            self.nvars = nvars
        clean = {}
        for e, c in (terms or {}).items():
            e = (e,) if isinstance(e, int) else tuple(e)
            if len(e) != self.nvars:
                raise ValueError(f"exponent {e} has wrong arity for {self.nvars} variables")
            if not _is_zero(c):
                clean[e] = clean[e] + c if e in clean else c
                if _is_zero(clean[e]):
                    del clean[e]
        self.terms = clean

    def _new(self, terms):
        obj = type(self).__new__(type(self))
        obj.nvars = self.nvars
        MultiPoly.__init__(obj, terms, self.nvars)
        return obj

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = self._new({(0,) * self.nvars: other})
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out[e] + c if e in out else c
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self._new({e: c * other for e, c in self.terms.items()})
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out[e] + c1 * c2 if e in out else c1 * c2
        return self._new(out)

    def __rmul__(self, other):
        return self._new({e: other * c for e, c in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if not self.terms:
            return other == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        inner = ", ".join(f"{e}: {c}" for e, c in sorted(self.terms.items()))
        return f"{type(self).__name__}({{{inner}}})"

    # structure --------------------------------------------------------------
    def is_zero(self, tol: float = 0.0) -> bool:
        return all(_is_zero(c, tol) for c in self.terms.values())

    def map_coeffs(self, fn: Callable):
        return self._new({e: fn(c) for e, c in self.terms.items()})

    def shift(self, powers: Sequence[int]):
        return self._new({tuple(a + b for a, b in zip(e, powers)): c for e, c in self.terms.items()})

    def min_powers(self) -> tuple:
        if not self.terms:
            return (0,) * self.nvars
        return tuple(min(e[i] for e in self.terms) for i in range(self.nvars))

    def max_powers(self) -> tuple:
        if not self.terms:
            return (0,) * self.nvars
        return tuple(max(e[i] for e in self.terms) for i in range(self.nvars))

    def __call__(self, *point):
        total = 0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                term = term * (x**k if k >= 0 else 1 / x ** (-k))
            total = total + term
        return total

    def substitute(self, var: int, target: int):
        """Rename variable ``var`` to ``target`` (merging exponents)."""
        out: dict = {}
        for e, c in self.terms.items():
            e2 = list(e)
            e2[target] += e2[var]
            e2[var] = 0
            e2 = tuple(e2)
            out[e2] = out[e2] + c if e2 in out else c
        return self._new(out)

    def extend(self, nvars: int) -> "MultiPoly":
        return MultiPoly({e + (0,) * (nvars - self.nvars): c for e, c in self.terms.items()}, nvars)

    def permute(self, perm: Sequence[int]):
        """Variable i of the result is variable perm[i] of self."""
        return self._new({tuple(e[perm[i]] for i in range(self.nvars)): c for e, c in self.terms.items()})

    def diff(self, var: int):
        out = {}
        for e, c in self.terms.items():
            if e[var]:
                e2 = list(e)
                e2[var] -= 1
                out[tuple(e2)] = c * e[var]
        return self._new(out)

    def divide_difference(self, i: int, j: int, *, tol: float = 0.0, normalize=None):
        """Exact quotient by (x_i - x_j); raises if x_i = x_j is not a root."""
        lo = self.min_powers()
        shift = [0] * self.nvars
        shift[i] = -lo[i] if lo[i] < 0 else 0
        shift[j] = -lo[j] if lo[j] < 0 else 0
        poly = self.shift(shift)
        # group by x_i degree: coefficients are polys in the other variables
        groups: dict[int, dict] = {}
        for e, c in poly.terms.items():
            rest = e[:i] + (0,) + e[i + 1 :]
            groups.setdefault(e[i], {})[rest] = c
        if not groups:
            return self._new({})
        top = max(groups)
        quotient: dict[int, dict] = {}
        carry: dict = {}
        for deg in range(top, -1, -1):
            cur = dict(groups.get(deg, {}))
            for e, c in carry.items():
                cur[e] = cur[e] + c if e in cur else c
            if deg == 0:
                remainder = cur
                break
            quotient[deg - 1] = cur
            carry = {}
            for e, c in cur.items():
                e2 = list(e)
                e2[j] += 1
                carry[tuple(e2)] = c
        for c in remainder.values():
            if normalize is not None:
                c = normalize(c)
            if not _is_zero(c, tol):
                raise NonVanishingNumerator(f"numerator does not vanish on x{i} = x{j}")
        out: dict = {}
        for deg, part in quotient.items():
            for e, c in part.items():
                e2 = list(e)
                e2[i] = deg
                e2 = tuple(e2)
                if normalize is not None:
                    c = normalize(c)
                out[e2] = out[e2] + c if e2 in out else c
        return self._new(out).shift([-s for s in shift])

    def to_json(self) -> list:
        return [[list(e), _coeff_json(c)] for e, c in sorted(self.terms.items())]


def _coeff_json(c):
    if isinstance(c, DiffPoly):
        return c.to_json()
    if isinstance(c, (Fraction, int)):
        return str(c)
    if isinstance(c, complex):
        return [c.real, c.imag]
    return float(c)


class LaurentPoly(MultiPoly):
    """Finite Laurent series sum_k f_k xi^k."""

    nvars = 1

    def __init__(self, terms: Mapping | None = None):
        super().__init__({(k if isinstance(k, tuple) else (k,)): c for k, c in (terms or {}).items()}, 1)

    @classmethod
    def from_list(cls, coeffs: Sequence, start: int = 0) -> "LaurentPoly":
        return cls({start + i: c for i, c in enumerate(coeffs)})

    @classmethod
    def monomial(cls, power: int, coeff=1) -> "LaurentPoly":
        return cls({power: coeff})

    def coeff(self, k: int):
        return self.terms.get((k,), 0)

    @property
    def pole_order(self) -> int:
        return max(0, -self.min_powers()[0])

    def derivative(self) -> "LaurentPoly":
        return LaurentPoly({e[0] - 1: c * e[0] for e, c in self.terms.items() if e[0]})

    def powers(self) -> list[int]:
        return sorted(e[0] for e in self.terms)


class BiPoly(MultiPoly):
    """Laurent polynomial in (xi, eta)."""

    nvars = 2

    def __init__(self, terms: Mapping | None = None, symmetric: bool = False):
        super().__init__(terms, 2)
        self.symmetric = symmetric
        if symmetric and not self.is_symmetric():
            raise NotSymmetric("coefficients are not symmetric in (xi, eta)")

    def _new(self, terms):
        obj = BiPoly.__new__(BiPoly)
        MultiPoly.__init__(obj, terms, 2)
        obj.symmetric = False
        return obj

    @classmethod
    def from_multi(cls, p: MultiPoly, symmetric: bool = False) -> "BiPoly":
        return cls(p.terms, symmetric)

    @classmethod
    def outer(cls, f: LaurentPoly, h: LaurentPoly) -> "BiPoly":
        """f(xi) h(eta)."""
        out: dict = {}
        for (i,), a in f.terms.items():
            for (j,), b in h.terms.items():
                out[(i, j)] = out[(i, j)] + a * b if (i, j) in out else a * b
        return cls(out)

    def coeff(self, i: int, j: int):
        return self.terms.get((i, j), 0)

    def swap(self) -> "BiPoly":
        return BiPoly({(j, i): c for (i, j), c in self.terms.items()})

    def is_symmetric(self, tol: float = 0.0) -> bool:
        return all(_is_zero(c - self.terms.get((j, i), 0), tol) for (i, j), c in self.terms.items())

    def diagonal(self) -> LaurentPoly:
        out: dict = {}
        for (i, j), c in self.terms.items():
            out[i + j] = out[i + j] + c if i + j in out else c
        return LaurentPoly(out)

    def matrix(self, n: int, start: int = 1) -> list[list]:
        """Coefficient array [[c_ij]] for i, j in start..start+n-1."""
        return [[self.coeff(i, j) for j in range(start, start + n)] for i in range(start, start + n)]


def _as_laurent(f) -> LaurentPoly:
    if isinstance(f, LaurentPoly):
        return f
    if isinstance(f, MultiPoly) and f.nvars == 1:
        return LaurentPoly(f.terms)
    return LaurentPoly({0: f})


# ---------------------------------------------------------------------------
# B, B_k and translations


def bop(f, h, *, tol: float = 0.0) -> BiPoly:
    """B(f, h)(xi, eta) = xi eta (f(xi) h(eta) - f(eta) h(xi)) / (2 (xi - eta))."""
    f, h = _as_laurent(f), _as_laurent(h)
    num = BiPoly.outer(f, h) - BiPoly.outer(h, f)
    num = num.shift((1, 1))
    q = num.divide_difference(0, 1, tol=tol)
    return BiPoly.from_multi(q * Fraction(1, 2) if _exact(q) else q * 0.5)


def _exact(p: MultiPoly) -> bool:
    return all(isinstance(c, (int, Fraction, DiffPoly)) for c in p.terms.values())


def bop_k(fs: Sequence, *, tol: float = 0.0) -> MultiPoly:
    """B_k(f_1..f_k)(xi_1..xi_k): prod xi_i^{k-1} det[f_j(xi_i)] / (2^{k-1} W)."""
    fs = [_as_laurent(f) for f in fs]
    k = len(fs)
    if k == 0:
        raise ValueError("need at least one function")
    num = MultiPoly({}, k)
    for perm in permutations(range(k)):
        term = MultiPoly({(0,) * k: _perm_sign(perm)}, k)
        for i, var in enumerate(perm):
            lifted = MultiPoly({tuple(p if v == var else 0 for v in range(k)): c for (p,), c in fs[i].terms.items()}, k)
            term = term * lifted
        num = num + term
    num = num.shift((k - 1,) * k)
    for i in range(k):
        for j in range(i + 1, k):
            num = num.divide_difference(i, j, tol=tol)
    scale = Fraction(1, 2 ** (k - 1))
    return num * (scale if _exact(num) else float(scale))


def translate_multi(h, G: MultiPoly, var: int = 0, *, tol: float = 0.0) -> MultiPoly:
    """Apply T(h) in variable ``var`` of G, creating a new last variable.

    result(..., x_new) = x_var x_new (G h(x_new) - G[x_var -> x_new] h(x_var)) / (2 (x_var - x_new)).
    """
    h = _as_laurent(h)
    n = G.nvars + 1
    G1 = G.extend(n)
    Gs = G1.substitute(var, n - 1)
    h_new = MultiPoly({tuple(p if v == n - 1 else 0 for v in range(n)): c for (p,), c in h.terms.items()}, n)
    h_old = MultiPoly({tuple(p if v == var else 0 for v in range(n)): c for (p,), c in h.terms.items()}, n)
    num = G1 * h_new - Gs * h_old
    shift = [0] * n
    shift[var] = shift[n - 1] = 1
    num = num.shift(shift)
    q = num.divide_difference(var, n - 1, tol=tol)
    return q * (Fraction(1, 2) if _exact(q) else 0.5)


def translate(h, f, *, tol: float = 0.0) -> BiPoly:
    """(T(h)_xi^eta f)(xi) = B(f, h)(xi, eta)."""
    return bop(f, h, tol=tol)


def d_coeff(i: int, f) -> LaurentPoly:
    """(D_i f)(xi) = 1/2 sum_{m <= i-1} f_m xi^{m-i+1}."""
    if i < 1:
        raise ValueError("D_i is defined for i >= 1")
    f = _as_laurent(f)
    out = {}
    for (m,), c in f.terms.items():
        if m <= i - 1:
            out[m - i + 1] = c * Fraction(1, 2) if isinstance(c, (int, Fraction, DiffPoly)) else c * 0.5
    return LaurentPoly(out)


def d_op(i: int, h, f) -> LaurentPoly:
    """d_i f = f D_i h - h D_i f: the eta^i coefficient of T(h) f."""
    f, h = _as_laurent(f), _as_laurent(h)
    return f * d_coeff(i, h) - h * d_coeff(i, f)


def structure_constants(h, k: int) -> BiPoly:
    """Expansion T(h) xi^k = sum c_ij^k xi^i eta^j, as a BiPoly of the c_ij^k."""
    return translate(h, LaurentPoly.monomial(k))


def hirota(f, g) -> LaurentPoly:
    """H[f, g] = f' g - f g'."""
    f, g = _as_laurent(f), _as_laurent(g)
    return f.derivative() * g - f * g.derivative()


def polarization_check(F: BiPoly, f, *, tol: float = 0.0):
    """Check F(xi, xi) = 2 f(xi) and d_xi F |_{xi = eta} = f'(xi).

    Returns ``(ok, {"diagonal": residual, "derivative": residual})``.
    """
    f = _as_laurent(f)
    if not F.is_symmetric(tol):
        raise NotSymmetric("polarization candidate is not symmetric")
    diag = F.diagonal() - f * 2
    dF = BiPoly.from_multi(F.diff(0)).diagonal()
    deriv = dF - f.derivative()
    ok = diag.is_zero(tol) and deriv.is_zero(tol)
    return ok, {"diagonal": diag, "derivative": deriv}


# ---------------------------------------------------------------------------
# the basic generating function


def mu_bivariate(curve: CurveSpec) -> BiPoly:
    """Polarization of mu(xi): 4/xi + 4/eta + 2 sum mu_2i (xi eta)^i + sum mu_{2i+1} (xi + eta)(xi eta)^i."""
    g = curve.g
    terms: dict = {(-1, 0): 4, (0, -1): 4}
    for i in range(1, g + 1):
        terms[(i, i)] = 2 * curve.mu[2 * i - 1]
    for i in range(0, g):
        c = curve.mu[2 * i]
        terms[(i + 1, i)] = terms.get((i + 1, i), 0) + c
        terms[(i, i + 1)] = terms.get((i, i + 1), 0) + c
    return BiPoly(terms)


def _gen(uvals: Sequence[tuple], slot: int) -> LaurentPoly:
    return LaurentPoly({k + 1: trip[slot] for k, trip in enumerate(uvals)})


def q_bivariate(uvals: Sequence[tuple], u1) -> BiPoly:
    """Q(xi, eta), the polarization of the right side of the curve equation."""
    U, dU, ddU = _gen(uvals, 0), _gen(uvals, 1), _gen(uvals, 2)
    two_minus = 2 - U
    out = BiPoly.outer(dU, dU)
    out = out + BiPoly.outer(two_minus, ddU) + BiPoly.outer(ddU, two_minus)
    poles = BiPoly({(-1, 0): 1, (0, -1): 1, (0, 0): 2 * u1})
    out = out + BiPoly.outer(two_minus, two_minus) * poles * 2
    return BiPoly.from_multi(out)


def p_bivariate(uvals: Sequence[tuple], u1, curve: CurveSpec, *, tol: float = 1e-9, normalize=None) -> BiPoly:
    """P(xi, eta) = xi^2 eta^2 (2 mu(xi, eta) - Q(xi, eta)) / (4 (xi - eta)^2).

    ``uvals`` lists (u_k, u_k', u_k'') for k = 1..g.  For floating input the
    diagonal-vanishing test uses ``tol`` relative to the numerator size; for
    symbolic input ``normalize`` (e.g. stationary reduction) is applied before
    each zero test.
    """
    num = mu_bivariate(curve) * 2 - q_bivariate(uvals, u1)
    num = num.shift((2, 2))
    if normalize is not None:
        num = num.map_coeffs(normalize)
    exact = _exact(num)
    abs_tol = 0.0 if exact else tol * max(1.0, max((abs(c) for c in num.terms.values()), default=0.0))
    q = num.divide_difference(0, 1, tol=abs_tol, normalize=normalize)
    q = q.divide_difference(0, 1, tol=abs_tol, normalize=normalize)
    quarter = Fraction(1, 4) if exact else 0.25
    result = q * quarter
    if normalize is not None:
        result = result.map_coeffs(normalize)
    result = BiPoly.from_multi(result)
    if exact:
        result.symmetric = result.is_symmetric()
        if not result.symmetric:
            raise NotSymmetric("P(xi, eta) came out asymmetric")
    else:
        result.symmetric = result.is_symmetric(abs_tol)
    return result


def p_matrix(jet) -> np.ndarray | list:
    """p_ij, i, j = 1..g, at a jet point (exact list for rational jets)."""
    from .jetspace import mu_from_jet, u_values

    g = jet.g
    P = p_bivariate(u_values(jet), jet.c[0], mu_from_jet(jet))
    mat = P.matrix(g)
    if jet.is_exact:
        return mat
    return np.array(mat, dtype=complex if any(isinstance(v, complex) for r in mat for v in r) else float)
