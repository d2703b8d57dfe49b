"""Exact ring of differential polynomials in u, u', u'', ... with constant parameters.

Symbols are the jet variables ``u{j}`` (the j-th x-derivative of u) and the
constant parameters ``mu{i}`` (curve coefficients) and ``a{i}`` (coefficients
of the stationary equation).  Coefficients are :class:`fractions.Fraction`.

The grading is deg u^(j) = j + 2, deg mu_i = 2i + 2, deg a_i = 2g - 2i; the
last one depends on the genus and must be supplied when a-symbols occur.

>>> u0, u1 = DiffPoly.u(0), DiffPoly.u(1)
>>> (u0 * u0).ddx() == 2 * u0 * u1
True
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from numbers import Number
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._linalg import InconsistentSystem, solve_exact

__all__ = [
    "DiffPoly",
    "NotExact",
    "MissingSymbol",
    "dp_add",
    "dp_mul",
    "dp_ddx",
    "dp_antiderivative",
    "dp_eval",
    "dp_weight",
    "u_monomials",
]

# symbol ids: u^(j) -> 3j, mu_i -> 3i+1, a_i -> 3i+2
U_KIND, MU_KIND, A_KIND = 0, 1, 2
_KIND_NAMES = ("u", "mu", "a")


class NotExact(ValueError):
    """The polynomial is not a total x-derivative of a differential polynomial."""


class MissingSymbol(KeyError):
    """A symbol occurring in the polynomial has no value."""


def sym_id(kind: str, idx: int) -> int:
    return 3 * idx + _KIND_NAMES.index(kind)


def sym_name(sid: int) -> str:
    return f"{_KIND_NAMES[sid % 3]}{sid // 3}"


def parse_sym(name: str) -> int:
    for kind in ("mu", "u", "a"):
        if name.startswith(kind) and name[len(kind):].isdigit():
            return sym_id(kind, int(name[len(kind):]))
    raise ValueError(f"unknown symbol name {name!r}")


def _sym_weight(sid: int, g: int | None) -> int:
    kind, idx = sid % 3, sid // 3
    if kind == U_KIND:
        return idx + 2
    if kind == MU_KIND:
        return 2 * idx + 2
    if g is None:
        raise ValueError("weight of a_i needs the genus g")
    return 2 * g - 2 * idx


def _mono_mul(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    while i < len(m1) and j < len(m2):
        s1, e1 = m1[i]
        s2, e2 = m2[j]
        if s1 == s2:
            out.append((s1, e1 + e2))
            i += 1
            j += 1
        elif s1 < s2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def _mono_weight(mono: tuple, g: int | None) -> int:
    return sum(e * _sym_weight(s, g) for s, e in mono)


def _split_u(mono: tuple) -> tuple[tuple, tuple]:
    """Split a monomial into (u-part, parameter-part)."""
    upart = tuple(p for p in mono if p[0] % 3 == U_KIND)
    ppart = tuple(p for p in mono if p[0] % 3 != U_KIND)
    return upart, ppart


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"DiffPoly coefficients must be exact, got {type(c).__name__}")


class DiffPoly:
    """Immutable differential polynomial with rational coefficients.

    ``terms`` maps a monomial (a sorted tuple of ``(symbol_id, exponent)``
    pairs) to a nonzero :class:`~fractions.Fraction`.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple, object] | None = None):
        clean = {}
        if terms:
            for mono, c in terms.items():
                c = _as_fraction(c)
                if c:
                    clean[mono] = c
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "DiffPoly":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    # constructors ---------------------------------------------------------
    @classmethod
    def const(cls, c) -> "DiffPoly":
        return cls({(): c})

    @classmethod
    def zero(cls) -> "DiffPoly":
        return cls._raw({})

    @classmethod
    def one(cls) -> "DiffPoly":
        return cls._raw({(): Fraction(1)})

    @classmethod
    def u(cls, j: int = 0) -> "DiffPoly":
        return cls._raw({((3 * j, 1),): Fraction(1)})

    @classmethod
    def mu(cls, i: int) -> "DiffPoly":
        return cls._raw({((3 * i + 1, 1),): Fraction(1)})

    @classmethod
    def a(cls, i: int) -> "DiffPoly":
        return cls._raw({((3 * i + 2, 1),): Fraction(1)})

    @classmethod
    def coerce(cls, x) -> "DiffPoly":
        if isinstance(x, DiffPoly):
            return x
        return cls.const(x)

    # basic protocol -------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m == () for m in self._terms)

    @property
    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def __eq__(self, other) -> bool:
        if isinstance(other, DiffPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({(): Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # arithmetic -----------------------------------------------------------
    def __add__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            if isinstance(other, Number) or isinstance(other, str):
                other = DiffPoly.const(other)
            else:
                return NotImplemented
        out = dict(self._terms)
        for m, c in other._terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return DiffPoly._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            if isinstance(other, Number):
                other = DiffPoly.const(other)
            else:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "DiffPoly":
        return (-self) + other

    def __mul__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            if isinstance(other, (int, Fraction)):
                other = Fraction(other)
                if not other:
                    return DiffPoly.zero()
                return DiffPoly._raw({m: c * other for m, c in self._terms.items()})
            return NotImplemented
        if len(self._terms) == 1 and () in self._terms:
            return other * self._terms[()]
        if len(other._terms) == 1 and () in other._terms:
            return self * other._terms[()]
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                v = out.get(m)
                out[m] = c1 * c2 if v is None else v + c1 * c2
        return DiffPoly._raw({m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DiffPoly":
        other = _as_fraction(other)
        return self * (1 / other)

    def __pow__(self, n: int) -> "DiffPoly":
        if n < 0:
            raise ValueError("negative power")
        result = DiffPoly.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # structure --------------------------------------------------------------
    def symbols(self) -> set[int]:
        return {s for m in self._terms for s, _ in m}

    def max_order(self) -> int:
        """Highest j such that u^(j) occurs; -1 if u does not occur."""
        orders = [s // 3 for s in self.symbols() if s % 3 == U_KIND]
        return max(orders, default=-1)

    def degree_in(self, sid: int) -> int:
        return max((dict(m).get(sid, 0) for m in self._terms), default=0)

    def coeff_of_power(self, sid: int, k: int) -> "DiffPoly":
        """Coefficient of ``sym**k`` when viewed as a polynomial in ``sym``."""
        out = {}
        for m, c in self._terms.items():
            d = dict(m)
            if d.get(sid, 0) == k:
                d.pop(sid, None)
                out[tuple(sorted(d.items()))] = c
        return DiffPoly._raw(out)

    def weight(self, g: int | None = None) -> int | None:
        """Common weight of all terms, or ``None`` if inhomogeneous (or zero)."""
        weights = {_mono_weight(m, g) for m in self._terms}
        if len(weights) != 1:
            return None
        return weights.pop()

    def by_weight(self, g: int | None = None) -> dict[int, "DiffPoly"]:
        parts: dict[int, dict] = {}
        for m, c in self._terms.items():
            parts.setdefault(_mono_weight(m, g), {})[m] = c
        return {w: DiffPoly._raw(t) for w, t in parts.items()}

    # calculus ---------------------------------------------------------------
    def apply_derivation(self, images: Mapping[int, "DiffPoly"] | None = None, default=None) -> "DiffPoly":
        """Apply the derivation sending symbol ``s`` to ``images[s]`` (or ``default(s)``).

        Symbols without an image are treated as constants.
        """
        acc: dict = {}
        for m, c in self._terms.items():
            for idx, (s, e) in enumerate(m):
                img = images.get(s) if images is not None else None
                if img is None and default is not None:
                    img = default(s)
                if img is None or img.is_zero():
                    continue
                if e == 1:
                    rest = m[:idx] + m[idx + 1:]
                else:
                    rest = m[:idx] + ((s, e - 1),) + m[idx + 1:]
                for m2, c2 in img._terms.items():
                    mm = _mono_mul(rest, m2)
                    acc[mm] = acc.get(mm, 0) + c * e * c2
        return DiffPoly._raw({m: Fraction(c) for m, c in acc.items() if c})

    def ddx(self, n: int = 1) -> "DiffPoly":
        p = self
        for _ in range(n):
            p = _ddx_once(p)
        return p

    def subs(self, mapping: Mapping[int, "DiffPoly"]) -> "DiffPoly":
        """Substitute symbols (by id) with differential polynomials."""
        if not mapping or not (self.symbols() & set(mapping)):
            return self
        powcache: dict = {}

        def power(s, e):
            key = (s, e)
            if key not in powcache:
                powcache[key] = mapping[s] ** e
            return powcache[key]

        acc: dict = {}
        for m, c in self._terms.items():
            keep = tuple(p for p in m if p[0] not in mapping)
            term = DiffPoly._raw({keep: c})
            for s, e in m:
                if s in mapping:
                    term = term * power(s, e)
            for mm, cc in term._terms.items():
                acc[mm] = acc.get(mm, 0) + cc
        return DiffPoly._raw({m: c for m, c in acc.items() if c})

    # evaluation -------------------------------------------------------------
    def eval(self, jet: Sequence = (), params: Mapping | None = None):
        values = _value_table(jet, params)
        total = 0
        for m, c in self._terms.items():
            term = c
            for s, e in m:
                try:
                    v = values[s]
                except KeyError:
                    raise MissingSymbol(sym_name(s)) from None
                term = term * v ** e
            total = total + term
        return total

    # rendering --------------------------------------------------------------
    def to_str(self) -> str:
        if not self._terms:
            return "0"
        items = _canonical_order(self._terms)
        parts = []
        for k, (m, c) in enumerate(items):
            sign = "-" if c < 0 else "+"
            a = abs(c)
            mono = "*".join(sym_name(s) if e == 1 else f"{sym_name(s)}^{e}" for s, e in m)
            if not mono:
                body = str(a)
            elif a == 1:
                body = mono
            else:
                body = f"{a}*{mono}"
            if k == 0:
                parts.append(body if sign == "+" else "-" + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"DiffPoly({self.to_str()!r})"

    def to_json(self) -> list:
        """Term list ``[[{"u1": 2, ...}, "p/q"], ...]`` in canonical order."""
        return [
            [{sym_name(s): e for s, e in m}, str(c)] for m, c in _canonical_order(self._terms)
        ]

    @classmethod
    def from_json(cls, data: Iterable) -> "DiffPoly":
        terms = {}
        for mono, c in data:
            key = tuple(sorted((parse_sym(n), int(e)) for n, e in mono.items()))
            terms[key] = Fraction(c)
        return cls(terms)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    def compile(self, nu: int, params: Sequence[str] = ()) -> "CompiledPoly":
        return CompiledPoly([self], nu, params)


def _canonical_order(terms: Mapping) -> list:
    """Graded order: higher weight first, then higher derivatives first."""

    def key(item):
        m, _ = item
        w = sum(e * (s // 3 + 2 if s % 3 == U_KIND else 2 * (s // 3) + 2) for s, e in m)
        dense = dict(m)
        top = max(dense, default=0)
        vec = tuple(dense.get(s, 0) for s in range(top, -1, -1))
        return (w, top, vec)

    return sorted(terms.items(), key=key, reverse=True)


def _value_table(jet: Sequence, params: Mapping | None) -> dict:
    values = {3 * j: v for j, v in enumerate(jet)}
    for name, v in (params or {}).items():
        sid = parse_sym(name) if isinstance(name, str) else int(name)
        values[sid] = v
    return values


def _ddx_once(p: DiffPoly) -> DiffPoly:
    acc: dict = {}
    for m, c in p._terms.items():
        for idx, (s, e) in enumerate(m):
            if s % 3 != U_KIND:
                continue
            nxt = s + 3
            d = dict(m)
            if e == 1:
                del d[s]
            else:
                d[s] = e - 1
            d[nxt] = d.get(nxt, 0) + 1
            mm = tuple(sorted(d.items()))
            acc[mm] = acc.get(mm, 0) + c * e
    return DiffPoly._raw({m: Fraction(c) for m, c in acc.items() if c})


# ---------------------------------------------------------------------------
# graded basis and antiderivative


@lru_cache(maxsize=None)
def u_monomials(weight: int) -> tuple[tuple, ...]:
    """All u-monomials (no parameters) of the given weight."""
    out = []

    def rec(remaining: int, max_part: int, acc: list):
        if remaining == 0:
            d: dict = {}
            for j in acc:
                d[3 * j] = d.get(3 * j, 0) + 1
            out.append(tuple(sorted(d.items())))
            return
        for part in range(min(remaining, max_part), 1, -1):
            rec(remaining - part, part, acc + [part - 2])

    if weight >= 2:
        rec(weight, weight, [])
    return tuple(out)


@lru_cache(maxsize=None)
def _ddx_basis(weight: int):
    basis = u_monomials(weight)
    images = [_ddx_once(DiffPoly._raw({m: Fraction(1)})) for m in basis]
    return basis, images


def dp_antiderivative(p: DiffPoly) -> DiffPoly:
    """Return q with ``q.ddx() == p`` and zero constant term.

    The parameter part of each term is carried along; the u-part is inverted
    weight by weight on the graded monomial basis.
    """
    blocks: dict = {}
    for m, c in p.items():
        upart, ppart = _split_u(m)
        w = _mono_weight(upart, 0)
        blocks.setdefault((ppart, w), {})[upart] = c
    result = DiffPoly.zero()
    for (ppart, w), uterms in blocks.items():
        if w == 0:
            raise NotExact("constant term has no differential-polynomial antiderivative")
        basis, images = _ddx_basis(w - 1)
        targets = sorted(set(uterms) | {m for img in images for m in img._terms})
        rows = [[img._terms.get(t, 0) for img in images] for t in targets]
        rhs = [uterms.get(t, 0) for t in targets]
        if not basis:
            raise NotExact(f"no antiderivative of weight {w - 1}")
        try:
            sol = solve_exact(rows, rhs, require_unique=False)
        except InconsistentSystem:
            raise NotExact("polynomial is not a total x-derivative") from None
        q = {_mono_mul(bm, ppart): x for bm, x in zip(basis, sol) if x}
        result = result + DiffPoly._raw(q)
    return result


# ---------------------------------------------------------------------------
# module-level function aliases


def dp_add(p: DiffPoly, q: DiffPoly) -> DiffPoly:
    return DiffPoly.coerce(p) + DiffPoly.coerce(q)


def dp_mul(p: DiffPoly, q: DiffPoly) -> DiffPoly:
    return DiffPoly.coerce(p) * DiffPoly.coerce(q)


def dp_ddx(p: DiffPoly) -> DiffPoly:
    return p.ddx()


def dp_eval(p: DiffPoly, jet: Sequence = (), params: Mapping | None = None):
    """Substitute jet values ``u^(j) = jet[j]`` and named parameters (``"mu1"``, ``"a0"``)."""
    return p.eval(jet, params)


def dp_weight(p: DiffPoly, g: int | None = None) -> int | None:
    return p.weight(g)


# ---------------------------------------------------------------------------
# fast floating evaluation


class CompiledPoly:
    """Vectorised evaluator for a list of polynomials over u0..u{nu-1} and named parameters."""

    def __init__(self, polys: Sequence[DiffPoly], nu: int, params: Sequence[str] = ()):
        self.nu = nu
        self.params = tuple(params)
        cols = {3 * j: j for j in range(nu)}
        for k, name in enumerate(self.params):
            cols[parse_sym(name)] = nu + k
        monos: dict = {}
        entries = []
        for row, p in enumerate(polys):
            for m, c in p.items():
                if m not in monos:
                    monos[m] = len(monos)
                entries.append((row, monos[m], c))
        nvar = nu + len(self.params)
        self.exponents = np.zeros((len(monos), nvar), dtype=np.int64)
        for m, k in monos.items():
            for s, e in m:
                if s not in cols:
                    raise MissingSymbol(sym_name(s))
                self.exponents[k, cols[s]] = e
        self.coeffs = np.zeros((len(polys), len(monos)))
        for row, k, c in entries:
            self.coeffs[row, k] += float(c)
        self._maxexp = int(self.exponents.max()) if self.exponents.size else 0

    def __call__(self, jet, params: Sequence = ()) -> np.ndarray:
        vals = np.concatenate([np.asarray(jet)[: self.nu], np.asarray(params, dtype=np.asarray(jet).dtype)])
        if not self.exponents.size:
            return self.coeffs.sum(axis=1) * (vals[:1] * 0 + 1) if vals.size else self.coeffs.sum(axis=1)
        # powers table avoids repeated pow on every monomial
        pw = np.ones((self._maxexp + 1, vals.size), dtype=vals.dtype)
        for e in range(1, self._maxexp + 1):
            pw[e] = pw[e - 1] * vals
        mono = np.prod(pw[self.exponents, np.arange(vals.size)], axis=1)
        return self.coeffs @ mono
