"""Flows, the w-function and eigenfunctions, checked numerically."""

import numpy as np
import pytest

from gkdv.jetspace import IndexOutOfRange, JetPoint, mu_from_jet, u_values
from gkdv.spectral import eval_mu
from gkdv.waveplane import (
    OffCurve,
    PathInconsistency,
    StepFailure,
    ZeroDenominator,
    branch_wronskian,
    canonical_alphas,
    elliptic_jet,
    gauge_shift,
    integrate_flow,
    phi_eigen,
    phi_kflow_check,
    phi_scaling_residual,
    phi_zero_energy,
    w_grid,
    w_on_axis,
)

ELLIPTIC, ELLIPTIC_CURVE = elliptic_jet(0.5, 0.0, 2.0)
GENUS_TWO = JetPoint(2, (0.3,), (0.2, 0.1, -0.3, 0.2, 0.1))


def curve_point(jet, xi):
    return xi, np.sqrt(complex(4 * eval_mu(mu_from_jet(jet), xi))).real


# -- flows -------------------------------------------------------------------


def test_zero_jet_is_constant():
    for direction in ("x", 2):
        traj = integrate_flow(JetPoint(2, (0.0,), (0.0,) * 5), direction, 2.0)
        assert np.all(traj.states == 0)


def test_elliptic_drift():
    traj = integrate_flow(ELLIPTIC.as_float(), "x", 1.0, 1e-10)
    assert traj.mu_drift <= 1e-8
    assert traj.drift_ok


@pytest.mark.parametrize("g", [1, 2, 3])
def test_drift_on_every_flow(g):
    rng = np.random.default_rng(g)
    jet = JetPoint(g, tuple(rng.uniform(-0.3, 0.3, g - 1)), tuple(rng.uniform(-0.3, 0.3, 2 * g + 1)))
    for k in range(1, g + 1):
        traj = integrate_flow(jet, k, (-0.3, 0.3), 1e-10)
        assert traj.drift_ok, traj.report()


def test_pole_raises_step_failure():
    with pytest.raises(StepFailure) as info:
        integrate_flow(ELLIPTIC.as_float(), "x", 10.0)
    assert 0 < info.value.last_t < 10
    assert np.all(np.isfinite(info.value.last_state))


def test_trajectory_samples_and_dense_output():
    traj = integrate_flow(GENUS_TWO, "x", (-0.5, 0.5), samples=21)
    assert len(traj.samples) == 21
    t, j = traj.samples[5]
    np.testing.assert_allclose(traj.jet_at(t[0]).c, j.c, atol=1e-9)
    np.testing.assert_allclose(traj.start.c, GENUS_TWO.c)


# -- w on the x axis ---------------------------------------------------------


def test_w_on_axis_zero_and_constant():
    xs = np.linspace(-1, 1, 11)
    assert np.allclose(w_on_axis(JetPoint(1, (), (0.0, 0.0, 0.0)), xs).w, 1.0)
    c0 = 0.7
    axis = w_on_axis(JetPoint(1, (), (c0, 0.0, 0.0)), xs)
    np.testing.assert_allclose(axis.w, np.exp(-c0 * xs**2 / 4), rtol=1e-12)


def second_difference(f, h):
    """Fourth-order central second difference on the interior points."""
    return (-f[4:] + 16 * f[3:-1] - 30 * f[2:-2] + 16 * f[1:-3] - f[:-4]) / (12 * h**2)


def test_w_on_axis_second_derivative():
    xs = 0.01 * np.arange(-100, 100)
    axis = w_on_axis(ELLIPTIC.as_float(), xs)
    d2 = second_difference(axis.logw, 0.01)
    u = axis.u[2:-2]
    assert np.max(np.abs(-2 * d2 - u) / np.abs(u)) <= 1e-6
    o = int(np.flatnonzero(xs == 0)[0])
    assert axis.w[o] == 1 and axis.dlogw[o] == 0


def test_w_on_axis_needs_origin():
    with pytest.raises(ValueError):
        w_on_axis(ELLIPTIC.as_float(), np.linspace(0.1, 1, 5))


# -- w on a grid ---------------------------------------------------------------


def test_w_grid_zero():
    g = w_grid(JetPoint(2, (0.0,), (0.0,) * 5), [(1, np.linspace(-0.3, 0.3, 3)), (2, np.linspace(-0.3, 0.3, 3))])
    assert np.max(np.abs(g.logw)) <= 1e-14


def test_w_grid_genus_two():
    axis = np.linspace(-0.4, 0.4, 5)
    grid = w_grid(GENUS_TWO, [(1, axis), (2, axis)], 1e-12)
    o = grid.origin_index()
    assert grid.logw[o] == 0 and np.all(grid.grad[o] == 0)
    assert grid.hessian_residual <= 10 * 1e-9
    assert grid.fd_asymmetry <= 10 * 1e-9
    assert grid.path_gap <= 10 * 1e-12 * 0.8
    along_x = w_on_axis(GENUS_TWO, axis, 1e-12)
    np.testing.assert_allclose(grid.logw[:, o[1]], along_x.logw, atol=1e-8)
    for idx in np.ndindex(grid.logw.shape):
        u1 = u_values(JetPoint(2, (0.3,), tuple(grid.jets[idx])))[0][0]
        assert grid.hessian[idx][0, 0] == pytest.approx(u1, abs=1e-12)


def test_w_grid_detects_inconsistent_paths():
    # a grid flow outside the genus cannot commute with anything sensible
    with pytest.raises((PathInconsistency, IndexOutOfRange, ValueError)):
        w_grid(GENUS_TWO, [(1, np.linspace(-0.1, 0.1, 3)), (3, np.linspace(-0.1, 0.1, 3))])


# -- eigenfunctions ------------------------------------------------------------


def test_free_wave():
    xi = 0.4
    traj = integrate_flow(JetPoint(1, (), (0.0, 0.0, 0.0)), "x", 1.0, samples=11)
    s = phi_eigen(traj, xi, 4 / np.sqrt(xi))
    np.testing.assert_allclose(s.phi, np.exp(traj.times / np.sqrt(xi)), rtol=1e-12)


def test_elliptic_eigenfunction():
    traj = integrate_flow(ELLIPTIC.as_float(), "x", 1.0, 1e-12, samples=41)
    xi, y = curve_point(ELLIPTIC, 0.2)
    s = phi_eigen(traj, xi, y)
    assert s.riccati_residual <= 1e-8
    assert s.eigen_residual <= 1e-6
    assert s.log_phi[0] == 0


def test_off_curve():
    traj = integrate_flow(ELLIPTIC.as_float(), "x", 0.5)
    with pytest.raises(OffCurve):
        phi_eigen(traj, 0.2, 1.0)


def test_divisor_collision():
    # at a divisor point 2 - u(0, xi) = 0
    g1 = JetPoint(1, (), (2.0, 4.0, 3.0))
    traj = integrate_flow(g1, "x", 0.5)
    with pytest.raises(ZeroDenominator):
        phi_eigen(traj, 1.0, 4.0)


@pytest.mark.parametrize("sign", [1, -1])
def test_divisor_collision_along_the_way(sign):
    jet, _ = elliptic_jet(0.8, 0.3, 1.5)
    traj = integrate_flow(jet, "x", 0.8, 1e-12, samples=21)
    xi = 0.7
    y = sign * np.sqrt(4 * float(eval_mu(mu_from_jet(jet.as_float()), xi)))
    with pytest.raises(ZeroDenominator) as info:
        phi_eigen(traj, xi, y)
    # the collision is where u(x) = 2 / xi
    crossing = traj.jet_at(info.value.location)
    assert crossing.c[0] == pytest.approx(2 / xi, rel=1e-6)


def test_zero_energy_branches():
    traj = integrate_flow(ELLIPTIC.as_float(), "x", 1.0, 1e-12, samples=41)
    plus, minus = phi_zero_energy(traj, 1), phi_zero_energy(traj, -1)
    assert plus.eigen_residual <= 1e-6 and minus.eigen_residual <= 1e-6
    w = branch_wronskian(plus, minus)
    assert np.min(np.abs(w)) > 0.1
    np.testing.assert_allclose(w, w[0], rtol=1e-8)


def test_zero_energy_degenerate_branch():
    jet, curve = elliptic_jet(1, 0, 4)
    assert curve.mu[-1] == 0
    traj = integrate_flow(jet.as_float(), "x", 0.3, samples=11)
    plus, minus = phi_zero_energy(traj, 1), phi_zero_energy(traj, -1)
    np.testing.assert_array_equal(plus.log_phi, minus.log_phi)


# -- higher flows and the rescaling limit ----------------------------------------


def test_kflow_zero_jet():
    jet = JetPoint(2, (0.0,), (0.0,) * 5)
    xi, y = 0.3, 4 / np.sqrt(0.3)
    assert phi_kflow_check(jet, xi, y, 2) <= 1e-9


def test_kflow_genus_two():
    xi, y = curve_point(GENUS_TWO, 0.3)
    assert phi_kflow_check(GENUS_TWO, xi, y, 2, 1e-4) <= 1e-5


def test_kflow_genus_three():
    jet = JetPoint(3, (0.2, -0.1), (0.2, 0.1, -0.3, 0.2, 0.1, 0.05, -0.1))
    xi, y = curve_point(jet, 0.25)
    for k in (2, 3):
        assert phi_kflow_check(jet, xi, y, k, 1e-4) <= 1e-5


def test_gauge_shift_preserves_alpha_and_check():
    g, xi = 3, 0.25
    jet = JetPoint(3, (0.2, -0.1), (0.2, 0.1, -0.3, 0.2, 0.1, 0.05, -0.1))
    _, y = curve_point(jet, xi)
    alphas = canonical_alphas(g, xi, y)
    shifted = gauge_shift(alphas, [0.7, -1.3], xi)
    series = lambda al: sum(a * xi ** (i + 1) for i, a in enumerate(al))
    assert series(shifted) == pytest.approx(series(alphas), rel=1e-14)
    assert phi_kflow_check(jet, xi, y, 2, alphas=shifted) <= 1e-5


def test_kflow_rejects_bad_index():
    xi, y = curve_point(GENUS_TWO, 0.3)
    with pytest.raises(IndexOutOfRange):
        phi_kflow_check(GENUS_TWO, xi, y, 3)


@pytest.mark.parametrize("jet", [ELLIPTIC.as_float(), GENUS_TWO])
def test_rescaling_limit_is_linear(jet):
    xs = np.linspace(0, 1, 11)
    r1 = phi_scaling_residual(jet, 0.3, 0.1, xs)
    r2 = phi_scaling_residual(jet, 0.3, 0.01, xs)
    assert r2 < r1
    assert r2 / r1 <= 0.15
