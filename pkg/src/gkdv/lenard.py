"""Lenard recursion and elimination of high derivatives on stationary solutions."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .diffpoly import DiffPoly, dp_antiderivative
from .spectral import mu_from_a

__all__ = ["lenard_step", "r_poly", "stationary_rhs", "reduce_stationary", "low_mu_substitution"]

_QUARTER = Fraction(1, 4)
_HALF = Fraction(1, 2)


def lenard_step(f: DiffPoly) -> DiffPoly:
    """R(f) = 1/4 f'' - 1/2 u' d^{-1}f - u f, integration constant zero."""
    u0, u1 = DiffPoly.u(0), DiffPoly.u(1)
    return _QUARTER * f.ddx(2) - _HALF * u1 * dp_antiderivative(f) - u0 * f


@lru_cache(maxsize=None)
def r_poly(k: int) -> DiffPoly:
    """r_k = R^k(u'); r_0 = u'."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return DiffPoly.u(1)
    return lenard_step(r_poly(k - 1))


@lru_cache(maxsize=None)
def stationary_rhs(g: int) -> DiffPoly:
    """u^(2g+1) solved from r_g + sum_{k<g-1} a_k r_k = 0.

    The leading coefficient of r_g on u^(2g+1) is 4^-g.
    """
    lhs = r_poly(g)
    for k in range(g - 1):
        lhs = lhs + DiffPoly.a(k) * r_poly(k)
    top = DiffPoly.u(2 * g + 1)
    lead = lhs.coeff_of_power(3 * (2 * g + 1), 1)
    assert lead.is_constant() and lhs.degree_in(3 * (2 * g + 1)) == 1
    rest = lhs - lead * top
    return rest * (-1 / lead.constant_term)


@lru_cache(maxsize=None)
def _elimination_rule(g: int, order: int) -> DiffPoly:
    """Expression for u^(order), order >= 2g+1, in u..u^(2g) and a."""
    top = 2 * g + 1
    if order == top:
        return stationary_rhs(g)
    prev = _elimination_rule(g, order - 1).ddx()
    return prev.subs({3 * top: stationary_rhs(g)})


@lru_cache(maxsize=None)
def low_mu_substitution(g: int) -> dict:
    """mu_1..mu_{g-1} as polynomials in a_0..a_{g-2}."""
    a = [DiffPoly.a(i) for i in range(g - 1)]
    return {3 * (k + 1) + 1: m for k, m in enumerate(mu_from_a(a, g))}


def reduce_stationary(p: DiffPoly, g: int) -> DiffPoly:
    """Rewrite p modulo the stationary equation of genus g.

    The low curve coefficients mu_1..mu_{g-1} are replaced by their
    expressions in a, and every u^(n) with n >= 2g+1 by its reduced form.
    """
    p = p.subs(low_mu_substitution(g))
    top = p.max_order()
    if top <= 2 * g:
        return p
    rules = {3 * n: _elimination_rule(g, n) for n in range(2 * g + 1, top + 1)}
    return p.subs(rules)
