"""Generating-function calculus: B, translations, D_i, polarization and P(xi, eta)."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gkdv.genfun import (
    BiPoly,
    LaurentPoly,
    NotSymmetric,
    bop,
    bop_k,
    d_coeff,
    d_op,
    hirota,
    mu_bivariate,
    p_bivariate,
    p_matrix,
    polarization_check,
    structure_constants,
    translate,
    translate_multi,
)
from gkdv.jetspace import JetPoint, mu_from_jet, t_flow, u_values
from gkdv.spectral import CurveSpec

from conftest import fractions

F = Fraction
X = LaurentPoly.monomial(1)
ONE = LaurentPoly.monomial(0)
TWO_OVER_XI = LaurentPoly.monomial(-1, 2)


@st.composite
def polys(draw, max_degree: int = 3):
    return LaurentPoly.from_list(draw(st.lists(fractions, min_size=1, max_size=max_degree + 1)))


@st.composite
def rational_jets(draw, g: int):
    a = draw(st.lists(fractions, min_size=g - 1, max_size=g - 1))
    c = draw(st.lists(fractions, min_size=2 * g + 1, max_size=2 * g + 1))
    return JetPoint(g, tuple(a), tuple(c))


# -- B and B_k ---------------------------------------------------------------


def test_bop_examples():
    assert bop(ONE, TWO_OVER_XI) == BiPoly({(0, 0): 1})
    assert bop(X, X).is_zero()
    assert bop(X, LaurentPoly.monomial(2)) == BiPoly({(2, 2): F(-1, 2)})


@given(polys(), polys())
def test_bop_antisymmetric_and_symmetric(f, h):
    B = bop(f, h)
    assert B == -bop(h, f)
    assert B.is_symmetric()


@given(polys(), polys())
def test_bop_k_low_orders(f, h):
    assert LaurentPoly(bop_k([f]).terms) == f
    assert BiPoly(bop_k([f, h]).terms) == bop(f, h)


@given(polys(), polys())
def test_bop_3_is_double_translation(f, h):
    TT = translate_multi(h, translate_multi(h, LaurentPoly(f.terms)), 0)
    h_over = h * LaurentPoly.monomial(-1)
    assert TT == bop_k([f, h, h_over])


# -- translations ----------------------------------------------------------


def test_translate_examples():
    assert translate(TWO_OVER_XI, ONE) == BiPoly({(0, 0): 1})
    h = LaurentPoly.from_list([F(1), F(-2), F(3)])
    assert translate(h, h).is_zero()


def test_translate_with_two_over_xi_is_difference_quotient():
    # T f = (xi f(xi) - eta f(eta)) / (xi - eta) for h = 2/xi
    f = LaurentPoly.from_list([F(2), F(-1), F(5), F(3)])
    T = translate(TWO_OVER_XI, f)
    for xi, eta in [(F(1, 3), F(2)), (F(-5, 2), F(7, 4))]:
        assert T(xi, eta) == (xi * f(xi) - eta * f(eta)) / (xi - eta)


@given(polys(), polys())
def test_translate_associative_and_commutative(f, h):
    # T_xi^tau T_xi^eta f is invariant under every permutation of (xi, eta, tau)
    TT = translate_multi(h, translate_multi(h, LaurentPoly(f.terms)), 0)
    for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0), (1, 2, 0)]:
        assert TT.permute(perm) == TT
    assert BiPoly(translate(h, f).terms).is_symmetric()


def test_structure_constants_reproduce_d_op():
    h = LaurentPoly.from_list([F(1), F(2), F(-1)], start=-1)
    f = LaurentPoly.from_list([F(3), F(0), F(1), F(-2)])
    T = translate(h, f)
    for i in range(0, 5):
        row = LaurentPoly({p: c for (p, j), c in T.terms.items() if j == i})
        if i >= 1:
            assert row == d_op(i, h, f)
    cs = structure_constants(h, 2)
    assert cs == translate(h, LaurentPoly.monomial(2))


# -- D_i ---------------------------------------------------------------------


def test_d_coeff_examples():
    f = LaurentPoly.from_list([F(3), F(-2), F(5), F(1)])
    assert d_coeff(1, f) == LaurentPoly({0: F(3, 2)})
    assert d_coeff(4, f) == f * LaurentPoly.monomial(-3, F(1, 2))
    lin = LaurentPoly.from_list([F(3), F(7)])
    assert d_coeff(2, lin) == LaurentPoly({-1: F(3, 2), 0: F(7, 2)})
    with pytest.raises(ValueError):
        d_coeff(0, f)


@given(polys(max_degree=5), st.integers(1, 8))
def test_d_coeff_shift_rule(f, k):
    assert d_coeff(k + 1, f) == d_coeff(k, f) * LaurentPoly.monomial(-1) + LaurentPoly({0: f.coeff(k) * F(1, 2)})


@given(polys(max_degree=4), fractions.filter(lambda v: v != 0))
def test_double_expansion_series(f, xi):
    # coefficient of eta^k zeta^m in xi/(2(eta - zeta)) (eta f(eta)/(xi - eta) - zeta f(zeta)/(xi - zeta))
    # is the eta^(k+m+1) coefficient of G(t) = xi t f(t) / (2 (xi - t)) = 1/2 t f(t) sum (t/xi)^j
    def g_coeff(n):
        return F(1, 2) * sum(f.coeff(p) * xi ** (p + 1 - n) for p in range(n))

    for k in range(9):
        for m in range(9 - k):
            assert d_coeff(k + m + 1, f)(xi) == g_coeff(k + m + 1)


def test_double_expansion_closed_forms():
    rng = np.random.default_rng(3)
    f = LaurentPoly.from_list([F(int(v)) for v in rng.integers(-5, 6, size=4)])
    xi, eta, zeta = 1.3, 0.21, -0.17
    series = sum(float(d_coeff(k + m + 1, f)(F(xi))) * eta**k * zeta**m for k in range(60) for m in range(60))
    middle = xi / (2 * (eta - zeta)) * (eta * f(eta) / (xi - eta) - zeta * f(zeta) / (xi - zeta))
    assert series == pytest.approx(middle, rel=1e-12)

    def Fh(t):
        return xi * t * f(t) / (2 * (xi - t))

    # B(1, F)(eta, zeta) with B(f, h) = eta zeta (f(eta) h(zeta) - f(zeta) h(eta)) / (2 (eta - zeta))
    b = eta * zeta * (Fh(zeta) - Fh(eta)) / (2 * (eta - zeta))
    assert -2 / (eta * zeta) * b == pytest.approx(middle, rel=1e-12)


# -- Hirota and polarization ---------------------------------------------------


def test_hirota_examples():
    f = LaurentPoly.from_list([F(1), F(2), F(3)])
    assert hirota(f, f).is_zero()
    assert hirota(X, ONE) == ONE


@given(polys(), polys())
def test_diagonal_of_bop_is_hirota(f, h):
    assert bop(f, h).diagonal() == hirota(f, h) * LaurentPoly.monomial(2, F(1, 2))


def test_polarization_examples():
    f = LaurentPoly.from_list([F(1), F(-3), F(2)])
    F_sum = BiPoly({(p, 0): c for (p,), c in f.terms.items()}) + BiPoly({(0, p): c for (p,), c in f.terms.items()})
    assert polarization_check(F_sum, f)[0]
    curve = CurveSpec(2, (F(1), F(-2), F(3, 2), F(5)))
    mu = LaurentPoly({-1: 4, 1: F(1), 2: F(-2), 3: F(3, 2), 4: F(5)})
    ok, res = polarization_check(mu_bivariate(curve), mu)
    assert ok and res["diagonal"].is_zero()
    assert not polarization_check(BiPoly({(1, 1): 1}), X)[0]
    with pytest.raises(NotSymmetric):
        polarization_check(BiPoly({(1, 0): 1}), X)


# -- P(xi, eta) --------------------------------------------------------------


def test_p_vanishes_for_zero_potential():
    jet = JetPoint.exact(2, [0], [0] * 5)
    P = p_bivariate(u_values(jet), 0, mu_from_jet(jet))
    assert P.is_zero()


@pytest.mark.parametrize("g", [1, 2, 3])
@given(data=st.data())
def test_p_first_row_is_u(g, data):
    jet = data.draw(rational_jets(g))
    P = p_bivariate(u_values(jet), jet.c[0], mu_from_jet(jet))
    assert P.symmetric
    assert all(1 <= i <= g and 1 <= j <= g for i, j in P.terms)
    uv = u_values(jet)
    for i in range(1, g + 1):
        assert P.coeff(1, i) == P.coeff(i, 1) == uv[i - 1][0]


@given(rational_jets(2))
def test_second_derivative_identity(jet):
    uv = u_values(jet)
    p = p_matrix(jet)
    mu1 = mu_from_jet(jet).mu[0]
    u = [t[0] for t in uv] + [0]
    for i in range(1, 3):
        rhs = 3 * u[i - 1] * u[0] + 6 * u[i] - 2 * p[1][i - 1] + (mu1 if i == 1 else 0)
        assert uv[i - 1][2] == rhs


def _directional(fn, jet: JetPoint, k: int, eps: float = 1e-5):
    """Central difference of fn along the t_k velocity at the jet."""
    v = np.array(t_flow(k, jet), dtype=float)
    c = jet.state()
    plus, minus = jet.with_state(c + eps * v), jet.with_state(c - eps * v)
    return (np.asarray(fn(plus)) - np.asarray(fn(minus))) / (2 * eps)


@pytest.mark.parametrize("g", [2, 3])
def test_p_derivatives(g):
    rng = np.random.default_rng(g)
    for _ in range(3):
        jet = JetPoint(g, tuple(rng.uniform(-0.5, 0.5, g - 1)), tuple(rng.uniform(-0.5, 0.5, 2 * g + 1)))
        u = lambda j: np.array([t[0] for t in u_values(j)])
        dP = [_directional(p_matrix, jet, k) for k in range(1, g + 1)]
        dx_p = dP[0]
        for k in range(1, g + 1):
            # x-derivative of row k of P is the t_k derivative of the u_i
            np.testing.assert_allclose(dx_p[:, k - 1], _directional(u, jet, k), atol=1e-6)
            for i in range(1, g + 1):
                # d_k p_ij = d_i p_kj
                np.testing.assert_allclose(dP[k - 1][i - 1, :], dP[i - 1][k - 1, :], atol=1e-6)
