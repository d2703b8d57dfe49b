"""Jets of stationary solutions, the auxiliary functions u_k, curve extraction and flows.

A solution of the genus-g stationary equation is fixed by the constants
a_0..a_{g-2} and the jet c_j = u^(j)(0), j = 0..2g.  The auxiliary functions
u_k = Theta_k(u, ..., u^(2k-2), mu_1..mu_{k-1}) come from matching powers of
xi in

    4 mu(xi) = u'(xi)^2 + 2 u''(xi) (2 - u(xi)) + 4 (1/xi + u_1) (2 - u(xi))^2,

with u(xi) = sum_k u_k xi^k.  The coefficient of xi^k reads
16 u_{k+1} = S_k - 4 mu_k, which both defines Theta_{k+1} and, once u_{k+1}
is forced to vanish (k >= g), expresses mu_k through the jet.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .diffpoly import CompiledPoly, DiffPoly
from .lenard import reduce_stationary, stationary_rhs
from .spectral import CurveSpec, _scalar_to_json, is_exact, mu_from_a, to_exact_scalar

__all__ = [
    "JetPoint",
    "IndexOutOfRange",
    "ZeroScale",
    "theta",
    "theta_reduced",
    "mu_poly",
    "mu_from_jet",
    "u_values",
    "x_flow",
    "t_flow",
    "flow_field",
    "dk_derivation",
    "rescale",
]


class IndexOutOfRange(IndexError):
    pass


class ZeroScale(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class JetPoint:
    """A point of the solution space: genus, constants a_0..a_{g-2}, jet c_0..c_{2g}."""

    g: int
    a: tuple
    c: tuple

    def __post_init__(self):
        if self.g < 1:
            raise ValueError("genus must be positive")
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "c", tuple(self.c))
        if len(self.a) != self.g - 1:
            raise ValueError(f"genus {self.g} needs {self.g - 1} constants a, got {len(self.a)}")
        if len(self.c) != 2 * self.g + 1:
            raise ValueError(f"genus {self.g} needs {2 * self.g + 1} jet values, got {len(self.c)}")

    @classmethod
    def exact(cls, g: int, a: Sequence, c: Sequence) -> "JetPoint":
        return cls(g, tuple(Fraction(v) for v in a), tuple(Fraction(v) for v in c))

    @property
    def is_exact(self) -> bool:
        return is_exact(self.a) and is_exact(self.c)

    @property
    def params(self) -> dict:
        return {f"a{i}": v for i, v in enumerate(self.a)}

    def as_float(self) -> "JetPoint":
        return JetPoint(self.g, tuple(float(v) for v in self.a), tuple(float(v) for v in self.c))

    def state(self) -> np.ndarray:
        return np.array(self.c, dtype=complex if _any_complex(self.c) else float)

    def with_state(self, c: Sequence) -> "JetPoint":
        return JetPoint(self.g, self.a, tuple(c))

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "a": [_scalar_to_json(v) for v in self.a],
            "c": [_scalar_to_json(v) for v in self.c],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "JetPoint":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            int(data["g"]),
            tuple(to_exact_scalar(v) for v in data.get("a", [])),
            tuple(to_exact_scalar(v) for v in data["c"]),
        )


def _any_complex(values) -> bool:
    return any(isinstance(v, complex) or np.iscomplexobj(v) for v in values)


# ---------------------------------------------------------------------------
# auxiliary functions


def _series_coefficient(us: Sequence[DiffPoly], k: int) -> DiffPoly:
    """S_k: the xi^k coefficient of the right side without the -16 u_{k+1} term.

    ``us[i]`` holds u_i for i = 1..len(us)-1 (index 0 unused); missing entries
    are zero.
    """
    n = len(us) - 1

    def u(i):
        return us[i] if 1 <= i <= n else None

    total = DiffPoly.zero()
    for i in range(1, k):
        j = k - i
        if u(i) is None or u(j) is None:
            continue
        total += u(i).ddx() * u(j).ddx()
        total -= 2 * u(i).ddx(2) * u(j)
        total += 4 * us[1] * u(i) * u(j)
    for i in range(1, k + 1):
        j = k + 1 - i
        if u(i) is not None and u(j) is not None:
            total += 4 * u(i) * u(j)
    if u(k) is not None:
        total += 4 * u(k).ddx(2) - 16 * us[1] * u(k)
    return total


@lru_cache(maxsize=None)
def _theta_list(kmax: int) -> tuple:
    us = [None, DiffPoly.u(0)]
    for k in range(1, kmax):
        s = _series_coefficient(us, k)
        us.append((s - 4 * DiffPoly.mu(k)) * Fraction(1, 16))
    return tuple(us)


def theta(k: int, g: int | None = None) -> DiffPoly:
    """u_k as a differential polynomial in u and mu_1..mu_{k-1}."""
    if k < 1 or (g is not None and k > g + 1):
        raise IndexOutOfRange(f"theta index {k} outside 1..{'g+1' if g is None else g + 1}")
    return _theta_list(k)[k]


@lru_cache(maxsize=None)
def theta_reduced(k: int, g: int) -> DiffPoly:
    """Theta_k with mu_1..mu_{g-1} written through a (valid for k <= g)."""
    if not 1 <= k <= g:
        raise IndexOutOfRange(f"u_k exists for 1 <= k <= {g}")
    return reduce_stationary(theta(k, g), g)


@lru_cache(maxsize=None)
def mu_poly(k: int, g: int) -> DiffPoly:
    """mu_k as a differential polynomial in u (and a), k = 1..2g.

    For k < g this is the constant mu_from_a expression; for k >= g it is
    S_k / 4 computed with u_{g+1} = u_{g+2} = ... = 0.
    """
    if not 1 <= k <= 2 * g:
        raise IndexOutOfRange(f"mu index {k} outside 1..{2 * g}")
    if k < g:
        return reduce_stationary(DiffPoly.mu(k), g)
    us = _theta_list(g)
    return reduce_stationary(_series_coefficient(us, k) * Fraction(1, 4), g)


@lru_cache(maxsize=None)
def _mu_compiled(g: int) -> CompiledPoly:
    return CompiledPoly([mu_poly(k, g) for k in range(g, 2 * g + 1)], 2 * g + 1, [f"a{i}" for i in range(g - 1)])


def mu_from_jet(jet: JetPoint) -> CurveSpec:
    """Curve coefficients of the solution through ``jet``; exact for rational jets."""
    g = jet.g
    low = mu_from_a(list(jet.a), g)
    if jet.is_exact:
        high = [mu_poly(k, g).eval(jet.c, jet.params) for k in range(g, 2 * g + 1)]
    else:
        high = list(_mu_compiled(g)(jet.state(), list(jet.a)))
    return CurveSpec(g, tuple(low) + tuple(high))


@lru_cache(maxsize=None)
def _uvalue_polys(g: int) -> tuple:
    polys = []
    for k in range(1, g + 1):
        th = theta_reduced(k, g)
        polys.append((th, th.ddx(), reduce_stationary(th.ddx(2), g)))
    return tuple(polys)


def u_values(jet: JetPoint) -> list[tuple]:
    """[(u_k, u_k', u_k'') for k = 1..g] at the jet point."""
    if jet.is_exact:
        return [tuple(p.eval(jet.c, jet.params) for p in trip) for trip in _uvalue_polys(jet.g)]
    comp = _uvalues_compiled(jet.g)
    flat = comp(jet.state(), list(jet.a))
    return [tuple(flat[3 * i : 3 * i + 3]) for i in range(jet.g)]


@lru_cache(maxsize=None)
def _uvalues_compiled(g: int) -> CompiledPoly:
    polys = [p for trip in _uvalue_polys(g) for p in trip]
    return CompiledPoly(polys, 2 * g + 1, [f"a{i}" for i in range(g - 1)])


# ---------------------------------------------------------------------------
# flows


@lru_cache(maxsize=None)
def flow_polys(k: int, g: int) -> tuple:
    """Velocity components dc_m/dt_k = d_x^{m+1} Theta_k, reduced, m = 0..2g."""
    if not 1 <= k <= g:
        raise IndexOutOfRange(f"flow index {k} outside 1..{g}")
    base = theta_reduced(k, g)
    out = []
    cur = base
    for _ in range(2 * g + 1):
        cur = reduce_stationary(cur.ddx(), g)
        out.append(cur)
    return tuple(out)


@lru_cache(maxsize=None)
def flow_field(k: int, g: int) -> CompiledPoly:
    """Compiled float vector field of the t_k flow (k = 1 is the x flow)."""
    return CompiledPoly(list(flow_polys(k, g)), 2 * g + 1, [f"a{i}" for i in range(g - 1)])


def _velocity(k: int, jet: JetPoint) -> list:
    if jet.is_exact:
        return [p.eval(jet.c, jet.params) for p in flow_polys(k, jet.g)]
    return list(flow_field(k, jet.g)(jet.state(), list(jet.a)))


def x_flow(jet: JetPoint) -> list:
    """dc/dx: shift of the jet with the top entry from the stationary equation."""
    g = jet.g
    top = stationary_rhs(g)
    last = top.eval(jet.c, jet.params) if jet.is_exact else _top_compiled(g)(jet.state(), list(jet.a))[0]
    return list(jet.c[1:]) + [last]


@lru_cache(maxsize=None)
def _top_compiled(g: int) -> CompiledPoly:
    return CompiledPoly([stationary_rhs(g)], 2 * g + 1, [f"a{i}" for i in range(g - 1)])


def t_flow(k: int, jet: JetPoint) -> list:
    """dc/dt_k for 1 <= k <= g; k = 1 coincides with :func:`x_flow`."""
    if not 1 <= k <= jet.g:
        raise IndexOutOfRange(f"flow index {k} outside 1..{jet.g}")
    return _velocity(k, jet)


def dk_derivation(k: int, g: int):
    """Image table of the derivation d/dt_k on the symbols u^(m).

    Returns a callable suitable for :meth:`DiffPoly.apply_derivation`.
    """
    base = theta_reduced(k, g)

    @lru_cache(maxsize=None)
    def image(m: int) -> DiffPoly:
        return base.ddx(m + 1)

    def default(sid: int):
        if sid % 3 == 0:
            return image(sid // 3)
        return None

    return default


# ---------------------------------------------------------------------------
# rescaling


def rescale(jet: JetPoint, kappa) -> JetPoint:
    """Image of the jet under u(x) -> kappa^2 u(kappa x).

    c_j -> kappa^(j+2) c_j and a_i -> kappa^(2g-2i) a_i.
    """
    if kappa == 0:
        raise ZeroScale("rescaling needs a nonzero factor")
    if isinstance(kappa, int):
        kappa = Fraction(kappa)
    g = jet.g
    a = tuple(v * kappa ** (2 * g - 2 * i) for i, v in enumerate(jet.a))
    c = tuple(v * kappa ** (j + 2) for j, v in enumerate(jet.c))
    return JetPoint(g, a, c)
