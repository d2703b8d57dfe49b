"""Birational map between solution jets and (curve, divisor) pairs.

Forward: the divisor points are the g roots xi_i of 2 - u(0, xi), where
u(0, xi) = sum_k u_k(0) xi^k, together with y_i = sum_k u_k'(0) xi_i^k.

Inverse: factor 2 - u(0, xi) = 2 prod (1 - xi/xi_i) to get u_k(0), solve the
Vandermonde-type system for u_k'(0), then peel the jet off the auxiliary
polynomials Theta_k one derivative at a time.  Theta_k is linear in its top
derivative u^(2k-2) with coefficient 4^{1-k}, which makes the recovery
triangular; the last entry c_2g comes from the constraint u_{g+1} = 0.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from ._linalg import InconsistentSystem, solve_exact
from .diffpoly import DiffPoly
from .jetspace import JetPoint, mu_from_jet, theta, u_values
from .spectral import CurveSpec, _scalar_to_json, a_from_mu, eval_mu, is_exact, to_exact_scalar

__all__ = [
    "Divisor",
    "DegenerateLeading",
    "RepeatedRoots",
    "PointOffCurve",
    "ZeroXi",
    "upsilon",
    "upsilon_inv",
    "curve_residual",
    "random_rational_divisor",
    "random_float_jet",
    "exact_rational_roots",
]


class DegenerateLeading(ArithmeticError):
    """u_g(0) = 0: the divisor polynomial drops degree."""


class RepeatedRoots(ArithmeticError):
    """Divisor points collide; the map is not invertible there."""


class PointOffCurve(ValueError):
    pass


class ZeroXi(ValueError):
    pass


@dataclass(frozen=True)
class Divisor:
    """Unordered g-tuple of curve points (xi_i, y_i)."""

    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(tuple(p) for p in self.points))

    @property
    def xis(self) -> list:
        return [p[0] for p in self.points]

    @property
    def ys(self) -> list:
        return [p[1] for p in self.points]

    @property
    def exact(self) -> bool:
        return is_exact(self.xis + self.ys)

    def canonical(self) -> "Divisor":
        """Points sorted by (Re xi, Im xi) for comparison."""
        return Divisor(tuple(sorted(self.points, key=lambda p: (complex(p[0]).real, complex(p[0]).imag))))

    def distance(self, other: "Divisor") -> float:
        """Max relative gap between the points under the best matching.

        Points are compared as unordered sets, so the result does not depend
        on how near-equal real parts happen to sort.
        """
        if len(self.points) != len(other.points):
            raise ValueError("divisors of different degree")
        a = np.array([[complex(x), complex(y)] for x, y in self.points])
        b = np.array([[complex(x), complex(y)] for x, y in other.points])
        gap = np.abs(a[:, None, :] - b[None, :, :]) / np.maximum(1.0, np.abs(a[:, None, :]))
        cost = gap.max(axis=2)
        rows, cols = linear_sum_assignment(cost)
        return float(cost[rows, cols].max(initial=0.0))

    def to_json(self) -> dict:
        return {"points": [{"xi": _scalar_to_json(x), "y": _scalar_to_json(y)} for x, y in self.points]}

    @classmethod
    def from_json(cls, data: dict | str) -> "Divisor":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple((to_exact_scalar(p["xi"]), to_exact_scalar(p["y"])) for p in data["points"]))


def curve_residual(curve: CurveSpec, d: Divisor):
    """max |y_i^2 - 4 mu(xi_i)|."""
    res = [abs(y * y - 4 * eval_mu(curve, x)) for x, y in d.points]
    return max(res, default=0)


def _mu_scale(curve: CurveSpec, xi) -> float:
    """Size of the individual terms of 4 mu(xi), for relative tolerances."""
    return 4 * (4 / abs(xi) + sum(abs(m) * abs(xi) ** (i + 1) for i, m in enumerate(curve.mu)))


# ---------------------------------------------------------------------------
# roots


def _poly_eval(coeffs_low_first: Sequence, x):
    acc = 0
    for c in reversed(coeffs_low_first):
        acc = acc * x + c
    return acc


def _deflate(coeffs_low_first: list, root) -> list:
    """Divide by (x - root); coefficients lowest degree first."""
    high = list(reversed(coeffs_low_first))
    out = [high[0]]
    for c in high[1:-1]:
        out.append(c + root * out[-1])
    return list(reversed(out))


def exact_rational_roots(coeffs_low_first: Sequence[Fraction], max_den: int = 10**12) -> list | None:
    """All roots of a rational polynomial if it splits over Q, else ``None``.

    Candidates come from floating roots rounded to nearby fractions and are
    then confirmed by exact evaluation.
    """
    coeffs = [Fraction(c) for c in coeffs_low_first]
    roots: list = []
    while len(coeffs) > 1:
        approx = np.roots([float(c) for c in reversed(coeffs)])
        found = None
        for r in sorted(approx, key=lambda z: abs(z.imag)):
            if abs(r.imag) > 1e-6 * max(1.0, abs(r)):
                continue
            for den in (10**2, 10**4, 10**6, 10**9, max_den):
                cand = Fraction(float(r.real)).limit_denominator(den)
                if _poly_eval(coeffs, cand) == 0:
                    found = cand
                    break
            if found is not None:
                break
        if found is None:
            return None
        roots.append(found)
        coeffs = _deflate(coeffs, found)
    return roots


def _check_distinct(xis: Sequence, exact: bool):
    scale = max(abs(x) for x in xis)
    for i in range(len(xis)):
        for j in range(i + 1, len(xis)):
            gap = abs(xis[i] - xis[j])
            if (exact and gap == 0) or (not exact and gap <= 1e-8 * scale):
                raise RepeatedRoots(f"divisor points {i} and {j} coincide")


# ---------------------------------------------------------------------------
# forward map


def upsilon(jet: JetPoint, *, mode: str = "auto") -> tuple[CurveSpec, Divisor]:
    """(curve, divisor) of a solution jet.

    ``mode="exact"`` demands rational roots and raises ``ValueError`` if the
    divisor polynomial does not split over Q; ``"float"`` always uses
    companion-matrix roots; ``"auto"`` tries exact first for rational jets.
    """
    if mode not in ("auto", "exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    g = jet.g
    if mode == "float" and jet.is_exact:
        jet = jet.as_float()
    curve = mu_from_jet(jet)
    vals = u_values(jet)
    u0 = [v[0] for v in vals]
    u1 = [v[1] for v in vals]
    if u0[-1] == 0:
        raise DegenerateLeading("u_g(0) = 0: fewer than g divisor points")
    poly = [2] + [-c for c in u0]
    xis = None
    if jet.is_exact:
        xis = exact_rational_roots(poly)
        if xis is None and mode == "exact":
            raise ValueError("divisor polynomial does not split over the rationals")
    if xis is None:
        coeffs = np.array([complex(c) for c in reversed(poly)])
        roots = np.roots(coeffs)
        xis = [_polish(poly, r) for r in roots]
        if all(abs(complex(x).imag) <= 1e-14 * max(1.0, abs(x)) for x in xis) and not _any_complex(poly):
            xis = [float(complex(x).real) for x in xis]
        u1 = [complex(c) if any(isinstance(x, complex) for x in xis) else float(c) for c in u1]
    _check_distinct(xis, jet.is_exact and isinstance(xis[0], Fraction))
    ys = [_poly_eval([0] + list(u1), x) for x in xis]
    return curve, Divisor(tuple(zip(xis, ys))).canonical()


def _any_complex(values) -> bool:
    return any(isinstance(v, complex) for v in values)


def _polish(poly_low_first: Sequence, root: complex, steps: int = 3) -> complex:
    """A few Newton steps on the original polynomial."""
    coeffs = [complex(c) for c in poly_low_first]
    deriv = [k * c for k, c in enumerate(coeffs)][1:]
    z = complex(root)
    for _ in range(steps):
        d = _poly_eval(deriv, z)
        if d == 0:
            break
        step = _poly_eval(coeffs, z) / d
        z -= step
        if abs(step) <= 1e-17 * max(1.0, abs(z)):
            break
    return z


# ---------------------------------------------------------------------------
# inverse map


@lru_cache(maxsize=None)
def _peel(k: int, shift: int) -> tuple[Fraction, DiffPoly]:
    """Split d_x^shift Theta_k = lead * u^(2k-2+shift) + rest."""
    p = theta(k).ddx(shift)
    top = 3 * (2 * k - 2 + shift)
    lead = p.coeff_of_power(top, 1)
    assert lead.is_constant() and p.degree_in(top) == 1
    return lead.constant_term, p - lead * DiffPoly.u(2 * k - 2 + shift)


def upsilon_inv(curve: CurveSpec, d: Divisor, *, tol: float = 1e-9) -> JetPoint:
    """Jet of the solution with the given curve and divisor."""
    g = curve.g
    if len(d.points) != g:
        raise ValueError(f"genus {g} needs {g} divisor points, got {len(d.points)}")
    xis, ys = d.xis, d.ys
    if any(x == 0 for x in xis):
        raise ZeroXi("divisor point with xi = 0")
    exact = curve.exact and d.exact
    if not exact:
        xis = [complex(x) if isinstance(x, complex) else float(x) for x in xis]
        ys = [complex(y) if isinstance(y, complex) else float(y) for y in ys]
        mu = tuple(complex(m) if isinstance(m, complex) else float(m) for m in curve.mu)
        curve = CurveSpec(g, mu)
    _check_distinct(xis, exact)
    for x, y in zip(xis, ys):
        lhs, rhs = y * y, 4 * eval_mu(curve, x)
        if exact:
            bad = lhs != rhs
        else:
            bad = abs(lhs - rhs) > tol * max(abs(lhs), _mu_scale(curve, x))
        if bad:
            raise PointOffCurve(f"point ({x}, {y}) is not on the curve")

    # 2 prod (1 - xi/xi_i) = 2 - sum u_k(0) xi^k
    prod = [Fraction(1) if exact else 1.0]
    for x in xis:
        inv = 1 / x
        nxt = [0 * prod[0]] * (len(prod) + 1)
        for i, c in enumerate(prod):
            nxt[i] = nxt[i] + c
            nxt[i + 1] = nxt[i + 1] - c * inv
        prod = nxt
    uk0 = [-2 * c for c in prod[1:]]

    # sum_k u_k'(0) xi_i^k = y_i
    rows = [[x**k for k in range(1, g + 1)] for x in xis]
    if exact:
        try:
            uk1 = solve_exact(rows, ys)
        except InconsistentSystem:
            raise RepeatedRoots("Vandermonde system is singular") from None
    else:
        uk1 = list(np.linalg.solve(np.array(rows), np.array(ys)))

    a = a_from_mu(list(curve.mu[: g - 1]), g)
    params = {f"mu{i + 1}": m for i, m in enumerate(curve.mu)}
    c: list = [uk0[0], uk1[0]]
    for k in range(2, g + 1):
        for shift, target in ((0, uk0[k - 1]), (1, uk1[k - 1])):
            lead, rest = _peel(k, shift)
            c.append((target - rest.eval(c, params)) / lead)
    lead, rest = _peel(g + 1, 0)
    c.append(-rest.eval(c, params) / lead)
    if not exact:
        c = [complex(v) if isinstance(v, complex) or np.iscomplexobj(v) else float(v) for v in c]
        if not _any_complex(curve.mu) and _conjugation_closed(d, tol):
            # a real curve with a conjugation-invariant divisor has a real jet
            c = [complex(v).real for v in c]
    return JetPoint(g, tuple(a), tuple(c))


def _conjugation_closed(d: Divisor, tol: float) -> bool:
    pts = [(complex(x), complex(y)) for x, y in d.points]
    scale = max(1.0, max(abs(x) + abs(y) for x, y in pts))
    for x, y in pts:
        if not any(abs(x.conjugate() - x2) + abs(y.conjugate() - y2) <= tol * scale for x2, y2 in pts):
            return False
    return True


# ---------------------------------------------------------------------------
# sampling


def _rand_fraction(rng: random.Random, num: int = 9, den: int = 6, nonzero: bool = False) -> Fraction:
    while True:
        f = Fraction(rng.randint(-num, num), rng.randint(1, den))
        if f or not nonzero:
            return f


def random_rational_divisor(g: int, rng: random.Random | int | None = None) -> tuple[CurveSpec, Divisor]:
    """Random rational curve with g distinct rational points on it.

    mu_1..mu_g and the points are drawn freely; mu_{g+1}..mu_{2g} are then
    solved so that every point lies on the curve.
    """
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    xis: list = []
    while len(xis) < g:
        x = _rand_fraction(rng, nonzero=True)
        if x not in xis:
            xis.append(x)
    ys = [_rand_fraction(rng) for _ in range(g)]
    low = [_rand_fraction(rng) for _ in range(g)]
    rows, rhs = [], []
    for x, y in zip(xis, ys):
        known = 4 / x + sum(m * x ** (i + 1) for i, m in enumerate(low))
        rows.append([x**j for j in range(g + 1, 2 * g + 1)])
        rhs.append(y * y / 4 - known)
    high = solve_exact(rows, rhs)
    return CurveSpec(g, tuple(low) + tuple(high)), Divisor(tuple(zip(xis, ys))).canonical()


def random_float_jet(
    g: int,
    rng: np.random.Generator | int | None = None,
    *,
    scale: float = 1.0,
    xi_bound: float = 4.0,
    min_gap: float = 1e-2,
) -> JetPoint:
    """Random float jet whose divisor is bounded and well separated.

    Entries of a and c are uniform on [-scale, scale].  Draws whose divisor
    has a point with |xi| > xi_bound, or two points closer than min_gap, are
    rejected: the inverse map loses about g*log10(max|xi|) digits in the
    Vandermonde step, so unbounded divisors are not a fair float test.
    """
    rng = np.random.default_rng(rng)
    while True:
        jet = JetPoint(g, tuple(rng.uniform(-scale, scale, g - 1)), tuple(rng.uniform(-scale, scale, 2 * g + 1)))
        try:
            _, d = upsilon(jet, mode="float")
        except (DegenerateLeading, RepeatedRoots):
            continue
        xis = d.xis
        if max(abs(x) for x in xis) > xi_bound:
            continue
        if any(abs(xis[i] - xis[j]) < min_gap for i in range(g) for j in range(i + 1, g)):
            continue
        return jet
