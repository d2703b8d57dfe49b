from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from gkdv.diffpoly import DiffPoly

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


fractions = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 6))
nonzero_fractions = fractions.filter(lambda f: f != 0)


@st.composite
def diffpolys(draw, max_order: int = 3, max_terms: int = 4, max_degree: int = 3):
    """Small random differential polynomials in u, u', ..., u^(max_order)."""
    p = DiffPoly.zero()
    for _ in range(draw(st.integers(0, max_terms))):
        term = DiffPoly.const(draw(nonzero_fractions))
        for _ in range(draw(st.integers(0, max_degree))):
            term = term * DiffPoly.u(draw(st.integers(0, max_order)))
        p = p + term
    return p


@st.composite
def homogeneous_diffpolys(draw, weight: int):
    from gkdv.diffpoly import u_monomials

    p = DiffPoly.zero()
    for mono in u_monomials(weight):
        c = draw(fractions)
        if c:
            p = p + DiffPoly({mono: c})
    return p


@pytest.fixture
def u():
    return DiffPoly.u


# one PASS/FAIL line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
