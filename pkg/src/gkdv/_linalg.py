"""Small exact linear algebra over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


class InconsistentSystem(ValueError):
    pass


def solve_exact(rows: Sequence[Sequence], rhs: Sequence, *, require_unique: bool = True):
    """Solve ``rows @ x = rhs`` by Gauss-Jordan elimination in exact arithmetic.

    Free variables (if uniqueness is not required) are set to zero.
    """
    n = len(rows[0]) if rows else 0
    m = [[Fraction(v) for v in r] + [Fraction(b)] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(n):
        piv = next((i for i in range(r, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == len(m):
            break
    for i in range(r, len(m)):
        if m[i][n] != 0:
            raise InconsistentSystem("linear system has no solution")
    if require_unique and len(pivots) < n:
        raise InconsistentSystem(f"solution not unique: rank {len(pivots)} < {n}")
    x = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        x[col] = m[i][n]
    return x


def det_exact(mat: Sequence[Sequence]) -> Fraction:
    """Determinant by fraction-valued Gaussian elimination."""
    a = [[Fraction(v) for v in r] for r in mat]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if a[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for i in range(col + 1, n):
            if a[i][col] != 0:
                f = a[i][col] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return det
