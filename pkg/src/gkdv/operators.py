"""Differential operators with differential-polynomial coefficients.

Operators act on functions of (t_1, ..., t_g) with t_1 = x.  A term is a
coefficient times d_1^{m_1} ... d_g^{m_g}.  On coefficients d_1 acts as
d/dx and d_k (k >= 2) as the derivation u^(m) -> d_x^{m+1} u_k, where
u_k = Theta_k is the auxiliary differential polynomial.

Operators flagged ``stationary`` live modulo the stationary equation of their
genus: every coefficient is reduced after each operation, and mu_1..mu_{g-1}
are expressed through the constants a_0..a_{g-2}.

Sign convention: with L = d_x^2 - u the Lenard polynomials satisfy
r_k = [L, A_k], so for instance [d_x, L] = -u'.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb
from typing import Mapping

from ._linalg import InconsistentSystem, solve_exact
from .diffpoly import DiffPoly, u_monomials
from .jetspace import dk_derivation, mu_poly, theta_reduced
from .lenard import lenard_step, r_poly, reduce_stationary

__all__ = [
    "DiffOperator",
    "GenusMismatch",
    "ConstructionFailed",
    "IndexOutOfRange",
    "op_compose",
    "op_adjoint",
    "op_commutator",
    "lenard_step",
    "r_poly",
    "reduce_stationary",
    "build_L",
    "build_A",
    "build_A_combination",
    "build_calA",
    "build_U",
    "build_U_of_L",
    "check_relation",
]


class GenusMismatch(ValueError):
    pass


class ConstructionFailed(RuntimeError):
    pass


from .jetspace import IndexOutOfRange  # noqa: E402  (shared error type)


@dataclass(frozen=True)
class DiffOperator:
    """Sum of DiffPoly coefficients times monomials in d_1..d_g."""

    genus: int
    terms: Mapping[tuple, DiffPoly] = field(default_factory=dict)
    stationary: bool = False

    def __post_init__(self):
        clean = {}
        for idx, c in dict(self.terms).items():
            idx = tuple(idx)
            if len(idx) != self.genus:
                raise ValueError(f"multi-index {idx} does not match genus {self.genus}")
            c = DiffPoly.coerce(c)
            if self.stationary:
                c = reduce_stationary(c, self.genus)
            if not c.is_zero():
                clean[idx] = clean.get(idx, DiffPoly.zero()) + c
                if clean[idx].is_zero():
                    del clean[idx]
        object.__setattr__(self, "terms", clean)

    # construction -----------------------------------------------------------
    @classmethod
    def mult(cls, coeff, genus: int = 1, stationary: bool = False) -> "DiffOperator":
        return cls(genus, {(0,) * genus: DiffPoly.coerce(coeff)}, stationary)

    @classmethod
    def partial(cls, k: int = 1, power: int = 1, genus: int = 1, stationary: bool = False) -> "DiffOperator":
        """d_k^power; k = 1 is d/dx."""
        if not 1 <= k <= genus:
            raise IndexOutOfRange(f"d_{k} needs genus >= {k}")
        idx = [0] * genus
        idx[k - 1] = power
        return cls(genus, {tuple(idx): DiffPoly.one()}, stationary)

    @classmethod
    def dx(cls, power: int = 1, genus: int = 1, stationary: bool = False) -> "DiffOperator":
        return cls.partial(1, power, genus, stationary)

    def embed(self, genus: int, stationary: bool | None = None) -> "DiffOperator":
        """Same operator viewed in a higher genus (pads multi-indices with zeros)."""
        if genus < self.genus and any(any(i[genus:]) for i in self.terms):
            raise GenusMismatch("operator uses derivatives beyond the target genus")
        st = self.stationary if stationary is None else stationary
        terms = {tuple(idx[:genus]) + (0,) * (genus - self.genus): c for idx, c in self.terms.items()}
        return DiffOperator(genus, terms, st)

    # structure --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        return max((sum(i) for i in self.terms), default=-1)

    def is_multiplication(self) -> bool:
        return all(not any(i) for i in self.terms)

    def multiplier(self) -> DiffPoly:
        """Coefficient of the identity term."""
        return self.terms.get((0,) * self.genus, DiffPoly.zero())

    def x_only(self) -> bool:
        return all(not any(i[1:]) for i in self.terms)

    def coeff(self, idx) -> DiffPoly:
        return self.terms.get(tuple(idx), DiffPoly.zero())

    def dx_coeff(self, n: int) -> DiffPoly:
        return self.coeff((n,) + (0,) * (self.genus - 1))

    def weight(self) -> int | None:
        """Common weight of all terms, deg d_k = 2k - 1; None if inhomogeneous."""
        weights = set()
        for idx, c in self.terms.items():
            parts = c.by_weight(self.genus)
            shift = sum(m * (2 * k + 1) for k, m in enumerate(idx))
            weights.update(w + shift for w in parts)
        if len(weights) != 1:
            return None
        return weights.pop()

    def is_homogeneous(self) -> bool:
        return self.is_zero() or self.weight() is not None

    # arithmetic -------------------------------------------------------------
    def _check(self, other: "DiffOperator"):
        if self.genus != other.genus:
            raise GenusMismatch(f"genus {self.genus} vs {other.genus}")

    def __add__(self, other):
        if not isinstance(other, DiffOperator):
            other = DiffOperator.mult(other, self.genus, self.stationary)
        self._check(other)
        terms = dict(self.terms)
        for idx, c in other.terms.items():
            terms[idx] = terms.get(idx, DiffPoly.zero()) + c
        return DiffOperator(self.genus, terms, self.stationary or other.stationary)

    __radd__ = __add__

    def __neg__(self):
        return DiffOperator(self.genus, {i: -c for i, c in self.terms.items()}, self.stationary)

    def __sub__(self, other):
        return self + (-other if isinstance(other, DiffOperator) else -DiffPoly.coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "DiffOperator":
        c = DiffPoly.coerce(c)
        return DiffOperator(self.genus, {i: c * v for i, v in self.terms.items()}, self.stationary)

    def __mul__(self, other):
        if isinstance(other, DiffOperator):
            return op_compose(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __matmul__(self, other):
        return op_compose(self, other)

    def __pow__(self, n: int):
        out = DiffOperator.mult(1, self.genus, self.stationary)
        for _ in range(n):
            out = op_compose(out, self)
        return out

    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return self.genus == other.genus and self.terms == other.terms

    def __hash__(self):
        return hash((self.genus, frozenset(self.terms.items())))

    # rendering --------------------------------------------------------------
    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for idx in sorted(self.terms, key=lambda i: (-sum(i), tuple(-v for v in i))):
            mono = "*".join(
                (f"d{k + 1}" if m == 1 else f"d{k + 1}^{m}") for k, m in enumerate(idx) if m
            )
            coeff = self.terms[idx].to_str()
            if not mono:
                parts.append(f"({coeff})")
            else:
                parts.append(f"({coeff})*{mono}")
        return " + ".join(parts)

    def __str__(self):
        return self.to_str()

    def __repr__(self):
        return f"DiffOperator(g={self.genus}, {self.to_str()})"

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "terms": [
                {"d": list(idx), "coeff": c.to_json()}
                for idx, c in sorted(self.terms.items(), key=lambda t: tuple(-v for v in t[0]))
            ],
        }


# ---------------------------------------------------------------------------
# products


def _derive(p: DiffPoly, idx: tuple, genus: int, stationary: bool) -> DiffPoly:
    """Apply d_1^{m_1} ... d_g^{m_g} to a coefficient."""
    for k, m in enumerate(idx):
        for _ in range(m):
            if k == 0:
                p = p.ddx()
            else:
                if not stationary:
                    raise ConstructionFailed("t-derivatives of coefficients need a stationary operator")
                p = p.apply_derivation(None, dk_derivation(k + 1, genus))
            if stationary:
                p = reduce_stationary(p, genus)
    return p


def op_compose(A: DiffOperator, B: DiffOperator) -> DiffOperator:
    """The operator product A B (generalized Leibniz rule)."""
    A._check(B)
    g = A.genus
    st = A.stationary or B.stationary
    cache: dict = {}
    out: dict = {}
    for ia, ca in A.terms.items():
        for ib, cb in B.terms.items():
            for sub in product(*(range(m + 1) for m in ia)):
                mult = 1
                for m, s in zip(ia, sub):
                    mult *= comb(m, s)
                key = (ib, sub)
                if key not in cache:
                    cache[key] = _derive(cb, sub, g, st)
                db = cache[key]
                if db.is_zero():
                    continue
                idx = tuple(m - s + n for m, s, n in zip(ia, sub, ib))
                out[idx] = out.get(idx, DiffPoly.zero()) + ca * db * mult
    return DiffOperator(g, out, st)


def op_adjoint(A: DiffOperator) -> DiffOperator:
    """Formal adjoint: (c d^alpha)* = (-1)^|alpha| d^alpha c."""
    out = DiffOperator(A.genus, {}, A.stationary)
    for idx, c in A.terms.items():
        sign = -1 if sum(idx) % 2 else 1
        d = DiffOperator(A.genus, {idx: DiffPoly.one()}, A.stationary)
        out = out + op_compose(d, DiffOperator.mult(c, A.genus, A.stationary)).scale(sign)
    return out


def op_commutator(A: DiffOperator, B: DiffOperator) -> DiffOperator:
    return op_compose(A, B) - op_compose(B, A)


# ---------------------------------------------------------------------------
# the basic operators


def build_L(genus: int = 1, stationary: bool = False) -> DiffOperator:
    """L = d_x^2 - u."""
    return DiffOperator.dx(2, genus, stationary) - DiffPoly.u(0)


def _sym_pair(coeff: DiffPoly, n: int) -> DiffOperator:
    """coeff d_x^n + d_x^n coeff."""
    c = DiffOperator.mult(coeff)
    d = DiffOperator.dx(n)
    return op_compose(c, d) + op_compose(d, c)


@lru_cache(maxsize=None)
def build_A(k: int) -> DiffOperator:
    """The anti-symmetric operator of order 2k+1 with [L, A_k] = r_k.

    Ansatz: d^{2k+1} + sum_j (f_j d^{2j+1} + d^{2j+1} f_j) with f_j of weight
    2k - 2j; the unknown coefficients are fixed by requiring [L, A_k] to be a
    multiplication operator.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    L = build_L()
    lead = DiffOperator.dx(2 * k + 1)
    basis = []
    for j in range(k):
        for mono in u_monomials(2 * k - 2 * j):
            basis.append(_sym_pair(DiffPoly._raw({mono: Fraction(1)}), 2 * j + 1))
    comms = [op_commutator(L, b) for b in basis]
    target = op_commutator(L, lead)
    rows_keys = set()
    for op in comms + [target]:
        for idx, c in op.terms.items():
            if idx[0] >= 1:
                rows_keys.update((idx, m) for m in c.terms)
    keys = sorted(rows_keys)
    rows = [[op.coeff(idx).terms.get(m, 0) for op in comms] for idx, m in keys]
    rhs = [-target.coeff(idx).terms.get(m, 0) for idx, m in keys]
    try:
        sol = solve_exact(rows, rhs) if basis else []
    except InconsistentSystem as exc:
        raise ConstructionFailed(f"no anti-symmetric A_{k}: {exc}") from None
    if not basis and rows and any(rhs):
        raise ConstructionFailed(f"A_{k} ansatz is empty but the commutator is not a multiplier")
    A = lead
    for x, b in zip(sol, basis):
        if x:
            A = A + b.scale(x)
    comm = op_commutator(L, A)
    if not comm.is_multiplication() or comm.multiplier() != r_poly(k):
        raise ConstructionFailed(f"[L, A_{k}] does not reproduce r_{k}")
    return A


def build_A_combination(g: int) -> DiffOperator:
    """A = A_g + sum_{i<g-1} a_i A_i, as a stationary genus-g operator."""
    A = build_A(g).embed(g, stationary=True)
    for i in range(g - 1):
        A = A + build_A(i).embed(g, stationary=True).scale(DiffPoly.a(i))
    return A


def build_calA(k: int, g: int) -> DiffOperator:
    """d_x^2 d_k - 1/2 (u_1 d_k + d_k u_1) - 1/4 (u_k d_x + d_x u_k)."""
    if not 1 <= k <= g:
        raise IndexOutOfRange(f"operator index {k} outside 1..{g}")
    st = True
    dk = DiffOperator.partial(k, 1, g, st)
    dx = DiffOperator.dx(1, g, st)
    u1 = DiffOperator.mult(DiffPoly.u(0), g, st)
    uk = DiffOperator.mult(theta_reduced(k, g), g, st)
    half, quarter = Fraction(1, 2), Fraction(1, 4)
    return (
        DiffOperator.dx(2, g, st) @ dk
        - ((u1 @ dk) + (dk @ u1)).scale(half)
        - ((uk @ dx) + (dx @ uk)).scale(quarter)
    )


@lru_cache(maxsize=None)
def build_U(i: int, g: int) -> DiffOperator:
    """U_i = calA_i - d_{i+1} for i < g, and U_g = calA_g."""
    if not 1 <= i <= g:
        raise IndexOutOfRange(f"U_{i} undefined for genus {g}")
    op = build_calA(i, g)
    if i < g:
        op = op - DiffOperator.partial(i + 1, 1, g, True)
    return op


@lru_cache(maxsize=None)
def build_U_of_L(g: int) -> DiffOperator:
    """U_1 L^{g-1} + U_2 L^{g-2} + ... + U_g."""
    L = build_L(g, True)
    total = build_U(g, g)
    power = DiffOperator.mult(1, g, True)
    for i in range(g - 1, 0, -1):
        power = power @ L
        total = total + build_U(i, g) @ power
    return total


def check_relation(g: int, mu_shift: Mapping[int, object] | None = None) -> DiffOperator:
    """Residual of 4 U(L)^2 = mu~(L), expected to be zero.

    ``mu_shift`` adds constants to selected mu_k (keys 1..2g) to probe the
    sensitivity of the check.
    """
    U = build_U_of_L(g)
    L = build_L(g, True)
    lhs = (U @ U).scale(4)
    rhs = (L ** (2 * g + 1)).scale(4)
    shifts = dict(mu_shift or {})
    power = DiffOperator.mult(1, g, True)
    powers = [power]
    for _ in range(2 * g - 1):
        power = power @ L
        powers.append(power)
    for i in range(1, 2 * g + 1):
        coeff = mu_poly(i, g) + shifts.get(i, 0)
        rhs = rhs + powers[2 * g - i].scale(coeff)
    return lhs - rhs
