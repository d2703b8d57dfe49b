"""Reference identities checked by ``kdv verify`` and ``kdv --paper-goldens``.

Each check returns a :class:`Check` record; suites are plain lists so the CLI
can serialise them directly.
"""

from __future__ import annotations

import random
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .diffpoly import DiffPoly
from .divisor import random_float_jet, random_rational_divisor, upsilon, upsilon_inv
from .jetspace import JetPoint, mu_from_jet, mu_poly, rescale, theta_reduced
from .lenard import lenard_step, r_poly
from .operators import (
    DiffOperator,
    build_A,
    build_L,
    build_U,
    check_relation,
    op_adjoint,
    op_commutator,
)

__all__ = [
    "Check",
    "formula_goldens",
    "printed_fourth_order_integral",
    "symbolic_suite",
    "numeric_suite",
    "SYMBOLIC_GENUS_CAP",
    "summarize",
]

SYMBOLIC_GENUS_CAP = 2

_F = Fraction
_u = DiffPoly.u


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""
    seconds: float = 0.0

    def to_json(self) -> dict:
        return asdict(self)


def _timed(name: str, fn) -> Check:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed identity, reported as such
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return Check(name, bool(ok), detail, time.perf_counter() - t0)


def _poly_equal(p: DiffPoly, q: DiffPoly):
    diff = p - q
    return diff.is_zero(), "" if diff.is_zero() else f"difference {diff.to_str()}"


def _op_zero(op: DiffOperator):
    return op.is_zero(), "" if op.is_zero() else f"residual {op.to_str()[:200]}"


# ---------------------------------------------------------------------------
# printed formulas


def _A1_expected() -> DiffOperator:
    d = DiffOperator.dx()
    return d**3 - (DiffOperator.mult(_u(0)) @ d).scale(_F(3, 2)) - DiffOperator.mult(_u(1)).scale(_F(3, 4))


def _A2_expected() -> DiffOperator:
    d = DiffOperator.dx()
    u = DiffOperator.mult(_u(0))
    u2 = DiffOperator.mult(_u(2))
    return (
        d**5
        - ((u @ d**3) + (d**3 @ u)).scale(_F(5, 4))
        + (u @ d @ u).scale(_F(15, 8))
        + ((u2 @ d) + (d @ u2)).scale(_F(5, 16))
    )


def printed_fourth_order_integral() -> DiffPoly:
    """The genus-2 first integral as printed: 1/4(4u'''' - 10uu'' - 5u'^2 + 10u^3 + 16 a_0 u)."""
    a0 = DiffPoly.a(0)
    return _F(1, 4) * (4 * _u(4) - 10 * _u(0) * _u(2) - 5 * _u(1) ** 2 + 10 * _u(0) ** 3 + 16 * a0 * _u(0))


def _genus_two_integral() -> DiffPoly:
    a0 = DiffPoly.a(0)
    return _F(1, 4) * (_u(4) - 10 * _u(0) * _u(2) - 5 * _u(1) ** 2 + 10 * _u(0) ** 3 + 16 * a0 * _u(0))


def _upsilon_genus_one():
    rng = random.Random(11)
    for _ in range(20):
        c0 = _F(rng.randint(1, 40), rng.randint(1, 9)) * rng.choice((1, -1))
        c = (c0, _F(rng.randint(-30, 30), rng.randint(1, 9)), _F(rng.randint(-30, 30), rng.randint(1, 9)))
        _, d = upsilon(JetPoint(1, (), c))
        (xi, y), = d.points
        if (xi, y) != (2 / c0, 2 * c[1] / c0):
            return False, f"jet {c}: got {(xi, y)}"
    return True, "20 rational jets"


def formula_goldens() -> list[Check]:
    """Printed closed forms: A_0..A_2, r_1, r_2 and the genus 1, 2 curve data."""
    d = DiffOperator.dx()
    checks = [
        _timed("A0 = d", lambda: (build_A(0) == d, build_A(0).to_str())),
        _timed("A1 = d^3 - 3/2 u d - 3/4 u'", lambda: (build_A(1) == _A1_expected(), build_A(1).to_str())),
        _timed("A2 printed display", lambda: (build_A(2) == _A2_expected(), build_A(2).to_str())),
        _timed("r1 = 1/4(u''' - 6uu')", lambda: _poly_equal(
            lenard_step(_u(1)), _F(1, 4) * (_u(3) - 6 * _u(0) * _u(1)))),
        _timed("r2 = 1/16(u5 - 10uu''' - 20u'u'' + 30u^2u')", lambda: _poly_equal(
            lenard_step(lenard_step(_u(1))),
            _F(1, 16) * (_u(5) - 10 * _u(0) * _u(3) - 20 * _u(1) * _u(2) + 30 * _u(0) ** 2 * _u(1)))),
        _timed("g1 mu1 = c2 - 3c0^2", lambda: _poly_equal(mu_poly(1, 1), _u(2) - 3 * _u(0) ** 2)),
        _timed("g1 mu2 = 1/4(c1^2 - 2c2c0 + 4c0^3)", lambda: _poly_equal(
            mu_poly(2, 1), _F(1, 4) * (_u(1) ** 2 - 2 * _u(2) * _u(0) + 4 * _u(0) ** 3))),
        _timed("g1 divisor (2/c0, 2c1/c0)", _upsilon_genus_one),
        _timed("g2 u2 = 1/4(u'' - 3u^2 - 8a0)", lambda: _poly_equal(
            theta_reduced(2, 2), _F(1, 4) * (_u(2) - 3 * _u(0) ** 2 - 8 * DiffPoly.a(0)))),
        _timed("g2 mu1 = 8a0", lambda: _poly_equal(mu_poly(1, 2), 8 * DiffPoly.a(0))),
        _timed("g2 mu2 as printed", lambda: _poly_equal(mu_poly(2, 2), printed_fourth_order_integral())),
        _timed("g2 mu2 with unit u'''' coefficient", lambda: _poly_equal(mu_poly(2, 2), _genus_two_integral())),
    ]
    return checks


# ---------------------------------------------------------------------------
# operator identities


def symbolic_suite(g: int) -> list[Check]:
    """Commutators, the curve relation and the A_k properties for genus g."""
    if g > SYMBOLIC_GENUS_CAP:
        raise ValueError(f"symbolic level is capped at genus {SYMBOLIC_GENUS_CAP}; use --level numeric")
    checks = []
    for k in range(g + 1):
        A = build_A(k)
        checks.append(_timed(f"A{k} anti-symmetric", lambda A=A: (op_adjoint(A) == A.scale(-1), "")))
        checks.append(_timed(f"[L, A{k}] = r{k}", lambda A=A, k=k: _op_zero(
            op_commutator(build_L(1), A) - DiffOperator.mult(r_poly(k)))))
    L = build_L(g, True)
    for k in range(1, g + 1):
        checks.append(_timed(f"[L, U{k}] = 0", lambda k=k: _op_zero(op_commutator(L, build_U(k, g)))))
    for i in range(1, g + 1):
        for j in range(i + 1, g + 1):
            checks.append(_timed(f"[U{i}, U{j}] = 0", lambda i=i, j=j: _op_zero(
                op_commutator(build_U(i, g), build_U(j, g)))))
    checks.append(_timed(f"4 U(L)^2 = mu~(L), g = {g}", lambda: _op_zero(check_relation(g))))
    return checks


# ---------------------------------------------------------------------------
# numeric suite


def numeric_suite(g: int, seed: int = 0, tol: float = 1e-10) -> list[Check]:
    """Randomised numerical identities: round trips, rescaling and invariance along flows."""
    from .waveplane import integrate_flow

    rng = random.Random(seed)
    checks = []

    def roundtrip():
        worst = 0.0
        np_rng = np.random.default_rng(seed)
        for _ in range(20):
            curve, d = random_rational_divisor(g, rng)
            jet = upsilon_inv(curve, d)
            if upsilon_inv(*upsilon(jet)) != jet:
                return False, "exact round trip changed the jet"
            # float round trips on bounded, separated divisors; see random_float_jet
            fj = random_float_jet(g, np_rng)
            back = upsilon_inv(*upsilon(fj, mode="float"))
            err = max(abs(x - y) for x, y in zip(back.c, fj.c)) / max(1.0, max(abs(v) for v in fj.c))
            worst = max(worst, err)
        return worst <= 1e-8, f"float relative error {worst:.2e}"

    def rescaling():
        for _ in range(20):
            curve, d = random_rational_divisor(g, rng)
            jet = upsilon_inv(curve, d)
            kappa = _F(rng.randint(1, 9), rng.randint(1, 9)) * rng.choice((1, -1))
            if mu_from_jet(rescale(jet, kappa)) != curve.scaled(kappa):
                return False, f"kappa {kappa}"
        return True, "20 cases"

    def constancy():
        worst = 0.0
        for k in range(1, g + 1):
            jet = JetPoint(g, tuple(rng.uniform(-0.3, 0.3) for _ in range(g - 1)),
                           tuple(rng.uniform(-0.3, 0.3) for _ in range(2 * g + 1)))
            traj = integrate_flow(jet, k, 0.5, tol)
            worst = max(worst, traj.mu_drift_abs / max(1.0, max(abs(m) for m in mu_from_jet(jet).mu)))
        return worst <= 10 * tol, f"max drift {worst:.2e}"

    checks.append(_timed(f"g{g} divisor round trip", roundtrip))
    checks.append(_timed(f"g{g} rescaling covariance", rescaling))
    checks.append(_timed(f"g{g} curve invariance along flows", constancy))
    return checks


def summarize(checks: list[Check]) -> dict:
    return {
        "passed": sum(c.ok for c in checks),
        "failed": [c.name for c in checks if not c.ok],
        "checks": [c.to_json() for c in checks],
    }
