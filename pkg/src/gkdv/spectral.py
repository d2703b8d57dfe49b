"""The hyperelliptic curve y^2 = 4 mu(xi) attached to a stationary solution.

mu(xi) = 4/xi + sum_{i=1}^{2g} mu_i xi^i.  In the variable z = 1/xi the curve
polynomial is mu~(z) = 4 z^{2g+1} + mu_1 z^{2g-1} + ... + mu_{2g}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._linalg import det_exact

__all__ = [
    "CurveSpec",
    "PoleAtZero",
    "mu_from_a",
    "a_from_mu",
    "eval_mu",
    "mu_tilde_coeffs",
    "resultant",
    "singular_count",
    "is_exact",
    "to_exact_scalar",
]


class PoleAtZero(ZeroDivisionError):
    """mu(xi) has a simple pole at xi = 0."""


def is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values)


def to_exact_scalar(v):
    """Parse a JSON scalar: rational strings stay exact, everything else is numeric."""
    if isinstance(v, str):
        if any(ch in v.lower() for ch in "ej") and "/" not in v:
            return complex(v) if "j" in v.lower() else float(v)
        return Fraction(v)
    if isinstance(v, bool):
        raise TypeError("boolean is not a scalar")
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return v


def _scalar_to_json(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, complex):
        return str(v)
    return float(v)


@dataclass(frozen=True)
class CurveSpec:
    """Coefficients mu_1..mu_{2g} of the spectral curve."""

    g: int
    mu: tuple

    def __post_init__(self):
        if self.g < 1:
            raise ValueError("genus must be positive")
        if len(self.mu) != 2 * self.g:
            raise ValueError(f"expected {2 * self.g} curve coefficients, got {len(self.mu)}")
        object.__setattr__(self, "mu", tuple(self.mu))

    @property
    def exact(self) -> bool:
        return is_exact(self.mu)

    def __call__(self, xi):
        return eval_mu(self, xi)

    def scaled(self, kappa) -> "CurveSpec":
        """Apply the weight action mu_i -> kappa^(2i+2) mu_i."""
        return CurveSpec(self.g, tuple(m * kappa ** (2 * i + 4) for i, m in enumerate(self.mu)))

    def to_json(self) -> dict:
        return {"g": self.g, "mu": [_scalar_to_json(m) for m in self.mu]}

    @classmethod
    def from_json(cls, data: dict | str) -> "CurveSpec":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["g"]), tuple(to_exact_scalar(m) for m in data["mu"]))


def mu_from_a(a: Sequence, g: int) -> list:
    """Low curve coefficients mu_1..mu_{g-1} from the constants a_0..a_{g-2}.

    mu_k = 8 a_{g-k-1} + 4 sum_{i=1}^{k-2} a_{g-i-1} a_{g-k+i}.  Works for any
    ring of coefficients (numbers or :class:`~gkdv.diffpoly.DiffPoly`).
    """
    if len(a) != g - 1:
        raise ValueError(f"genus {g} needs {g - 1} constants a_0..a_{g - 2}, got {len(a)}")
    out = []
    for k in range(1, g):
        val = 8 * a[g - k - 1]
        for i in range(1, k - 1):
            val = val + 4 * a[g - i - 1] * a[g - k + i]
        out.append(val)
    return out


def a_from_mu(mu: Sequence, g: int) -> list:
    """Inverse of :func:`mu_from_a`, by back substitution in increasing k."""
    if len(mu) < g - 1:
        raise ValueError(f"need mu_1..mu_{g - 1}")
    a: list = [None] * (g - 1)
    for k in range(1, g):
        rest = 0
        for i in range(1, k - 1):
            rest = rest + a[g - i - 1] * a[g - k + i]
        val = mu[k - 1] - 4 * rest
        a[g - k - 1] = val / 8 if not isinstance(val, int) else Fraction(val, 8)
    return a


def eval_mu(curve: CurveSpec, xi):
    if xi == 0:
        raise PoleAtZero("mu(xi) has a pole at xi = 0")
    if isinstance(xi, int):
        xi = Fraction(xi)
    total = 4 / xi
    power = xi
    for m in curve.mu:
        total = total + m * power
        power = power * xi
    return total


def mu_tilde_coeffs(curve: CurveSpec) -> list:
    """Coefficients of mu~(z), highest degree first."""
    return [Fraction(4) if curve.exact else 4.0, 0 * curve.mu[0]] + list(curve.mu)


def _sylvester(p: Sequence, q: Sequence) -> list[list]:
    m, n = len(p) - 1, len(q) - 1
    size = m + n
    zero = 0 * p[0]
    rows = []
    for i in range(n):
        rows.append([zero] * i + list(p) + [zero] * (size - m - 1 - i))
    for i in range(m):
        rows.append([zero] * i + list(q) + [zero] * (size - n - 1 - i))
    return rows


def _derivative(coeffs: Sequence) -> list:
    deg = len(coeffs) - 1
    return [c * (deg - i) for i, c in enumerate(coeffs[:-1])]


def resultant(curve: CurveSpec):
    """Res(mu~, mu~') from the Sylvester determinant."""
    p = mu_tilde_coeffs(curve)
    rows = _sylvester(p, _derivative(p))
    if curve.exact:
        return det_exact(rows)
    return np.linalg.det(np.array(rows, dtype=complex if _has_complex(p) else float))


def _has_complex(values) -> bool:
    return any(isinstance(v, complex) or np.iscomplexobj(v) for v in values)


def _poly_rem(num: list, den: list) -> list:
    num = list(num)
    while len(num) >= len(den) and num:
        f = num[0] / den[0]
        for i in range(len(den)):
            num[i] -= f * den[i]
        num.pop(0)
    while num and num[0] == 0:
        num.pop(0)
    return num


def _gcd_degree_exact(p: list, q: list) -> int:
    p = [Fraction(c) for c in p]
    q = [Fraction(c) for c in q]
    while q:
        p, q = q, _poly_rem(p, q)
    return len(p) - 1


def singular_count(curve: CurveSpec, *, rtol: float = 1e-10) -> int:
    """Number of repeated roots of mu~(z), counted as deg gcd(mu~, mu~').

    Exact input uses Euclid over the rationals.  Floating input uses the rank
    deficiency of the Sylvester matrix, with singular values below
    ``rtol * ||coeffs||`` treated as zero.
    """
    p = mu_tilde_coeffs(curve)
    dp = _derivative(p)
    if curve.exact:
        return _gcd_degree_exact(p, dp)
    syl = np.array(_sylvester(p, dp), dtype=complex if _has_complex(p) else float)
    scale = max(np.linalg.norm(np.asarray(p, dtype=complex)), 1.0)
    sv = np.linalg.svd(syl, compute_uv=False)
    rank = int(np.sum(sv > rtol * scale * sv.size))
    return syl.shape[0] - rank
