"""Floating-point layer: commuting flows, the w-function and the eigenfunction.

Everything multidimensional is reached by composing one-dimensional flows on
jet space.  A jet point c = (u, u', ..., u^(2g)) at the origin is carried along
x (= t_1) or t_k by the vector fields of :mod:`gkdv.jetspace`; quantities that
live on the plane (log w, Phi) are integrated alongside the jet through their
exact derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .diffpoly import CompiledPoly, DiffPoly
from .genfun import p_bivariate
from .jetspace import (
    JetPoint,
    IndexOutOfRange,
    _uvalues_compiled,
    dk_derivation,
    flow_field,
    mu_from_jet,
    mu_poly,
    theta_reduced,
)
from .lenard import reduce_stationary
from .spectral import CurveSpec, eval_mu

__all__ = [
    "StepFailure",
    "PathInconsistency",
    "OffCurve",
    "ZeroDenominator",
    "Trajectory",
    "AxisW",
    "WGrid",
    "EigenSample",
    "integrate_flow",
    "w_on_axis",
    "w_grid",
    "p_field",
    "phi_eigen",
    "phi_zero_energy",
    "branch_wronskian",
    "phi_kflow_check",
    "kflow_log_derivative",
    "gauge_shift",
    "canonical_alphas",
    "phi_scaling_residual",
    "elliptic_jet",
]

DEFAULT_TOL = 1e-10
FD_STEP = 1e-4


class StepFailure(RuntimeError):
    """Integration stopped early (blow-up near a pole or step-size collapse)."""

    def __init__(self, message: str, last_t: float, last_state: np.ndarray):
        super().__init__(f"{message} (last good point t = {last_t:.6g})")
        self.last_t = last_t
        self.last_state = last_state


class PathInconsistency(ArithmeticError):
    """Two integration paths to the same grid node disagree."""


class OffCurve(ValueError):
    """The supplied (xi, y) does not satisfy y^2 = 4 mu(xi)."""


class ZeroDenominator(ArithmeticError):
    """A denominator of a log-derivative vanished; ``location`` is the flow time."""

    def __init__(self, message: str, location: float | None = None):
        super().__init__(message if location is None else f"{message} at t = {location:.6g}")
        self.location = location


# ---------------------------------------------------------------------------
# small helpers


def _float_jet(jet: JetPoint) -> tuple[np.ndarray, list]:
    state = jet.state()
    if state.dtype == object or not np.iscomplexobj(state):
        state = np.asarray([complex(v) if isinstance(v, complex) else float(v) for v in jet.c])
    a = [complex(v) if isinstance(v, complex) else float(v) for v in jet.a]
    return state, a


def _flow_rhs(k: int, g: int, a: Sequence):
    field_k = flow_field(k, g)
    return lambda c: field_k(c, a)


def _rk4_shift(rhs, z: np.ndarray, h: float, steps: int = 2) -> np.ndarray:
    """Classical RK4 over a short span; used only for finite-difference offsets."""
    dt = h / steps
    for _ in range(steps):
        k1 = rhs(z)
        k2 = rhs(z + 0.5 * dt * k1)
        k3 = rhs(z + 0.5 * dt * k2)
        k4 = rhs(z + dt * k3)
        z = z + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return z


def _richardson_first(f, h: float):
    """Central first derivative with one Richardson step, O(h^4)."""
    d1 = (f(h) - f(-h)) / (2 * h)
    d2 = (f(2 * h) - f(-2 * h)) / (4 * h)
    return (4 * d1 - d2) / 3


def _richardson_second(f, h: float, f0):
    d1 = (f(h) - 2 * f0 + f(-h)) / (h * h)
    d2 = (f(2 * h) - 2 * f0 + f(-2 * h)) / (4 * h * h)
    return (4 * d1 - d2) / 3


def _line(rhs, z0: np.ndarray, coords: np.ndarray, tol: float, event=None) -> np.ndarray:
    """States at every coordinate of ``coords`` (which must contain 0), both directions."""
    coords = np.asarray(coords, dtype=float)
    events = [] if event is None else list(event) if isinstance(event, (list, tuple)) else [event]
    out = np.empty((coords.size, z0.size), dtype=z0.dtype)
    for sign in (1, -1):
        mask = coords * sign > 0
        if not mask.any():
            continue
        pts = coords[mask]
        order = np.argsort(sign * pts)
        t_eval = pts[order]
        sol = solve_ivp(
            lambda t, z: rhs(z),
            (0.0, float(t_eval[-1])),
            z0,
            method="DOP853",
            t_eval=t_eval,
            rtol=tol,
            atol=tol,
            events=events or None,
        )
        if sol.status != 0 or sol.y.shape[1] < t_eval.size:
            last = sol.t[-1] if sol.t.size else 0.0
            state = sol.y[:, -1] if sol.y.size else z0
            guarded = any(getattr(e, "kind", "") == "denominator" for e in events)
            if sol.status == 1 and guarded:
                hit = min(float(t[0]) for t in sol.t_events if len(t))
                raise ZeroDenominator("log-derivative denominator vanished", hit)
            raise StepFailure(sol.message if sol.status != 1 else "solution left the finite region", last, state)
        idx = np.flatnonzero(mask)[order]
        out[idx] = sol.y.T
    out[coords == 0] = z0
    return out


def _blowup_event(limit: float):
    def event(t, z):
        return limit - np.max(np.abs(z))

    event.terminal = True
    event.kind = "blowup"
    return event


def _relative_drift(mu0: Sequence, mu1: Sequence) -> tuple[float, float]:
    mu0 = np.asarray([complex(v) for v in mu0])
    mu1 = np.asarray([complex(v) for v in mu1])
    absolute = float(np.max(np.abs(mu1 - mu0))) if mu0.size else 0.0
    scale = float(np.max(np.abs(mu0))) if mu0.size else 0.0
    return absolute, absolute / scale if scale > 0 else absolute


# ---------------------------------------------------------------------------
# flows


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples of one jet flow.  ``flow`` is 1 for x and k for t_k."""

    g: int
    a: tuple
    flow: int
    times: np.ndarray
    states: np.ndarray
    tol: float
    nfev: int = 0
    mu_drift: float = 0.0
    mu_drift_abs: float = 0.0
    dense: object = field(default=None, repr=False)

    @property
    def samples(self) -> list[tuple[np.ndarray, JetPoint]]:
        out = []
        for t, c in zip(self.times, self.states):
            tvec = np.zeros(self.g)
            tvec[self.flow - 1] = t
            out.append((tvec, JetPoint(self.g, self.a, tuple(c))))
        return out

    @property
    def start(self) -> JetPoint:
        i = int(np.argmin(np.abs(self.times)))
        return JetPoint(self.g, self.a, tuple(self.states[i]))

    def jet_at(self, t: float) -> JetPoint:
        if self.dense is None:
            raise ValueError("trajectory built without dense output")
        return JetPoint(self.g, self.a, tuple(self.dense(t)))

    @property
    def u(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def drift_ok(self) -> bool:
        return self.mu_drift <= 10 * self.tol

    def report(self) -> dict:
        return {
            "g": self.g,
            "flow": self.flow,
            "span": [float(self.times.min()), float(self.times.max())],
            "samples": int(self.times.size),
            "tol": self.tol,
            "nfev": self.nfev,
            "mu_drift": self.mu_drift,
            "mu_drift_abs": self.mu_drift_abs,
            "drift_ok": self.drift_ok,
        }


def _flow_index(direction, g: int) -> int:
    if direction in ("x", 1):
        return 1
    if isinstance(direction, str) and direction.startswith("t"):
        direction = int(direction[1:])
    k = int(direction)
    if not 1 <= k <= g:
        raise IndexOutOfRange(f"flow t_{k} does not exist for genus {g}")
    return k


def integrate_flow(
    jet: JetPoint,
    direction="x",
    span=1.0,
    tol: float = DEFAULT_TOL,
    *,
    samples: int = 101,
    blowup: float = 1e8,
) -> Trajectory:
    """Integrate the jet along x or t_k with DOP853.

    Parameters
    ----------
    jet : JetPoint
        Starting point (exact jets are converted to floats).
    direction : {"x", 1, 2, ..., "t2", ...}
        Which flow to follow.
    span : float or (float, float)
        End time, or an interval containing 0.
    tol : float
        Relative and absolute tolerance of the integrator.
    samples : int
        Number of equally spaced output samples over the span.
    blowup : float
        State norm treated as a pole; the run stops with :class:`StepFailure`.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    g = jet.g
    k = _flow_index(direction, g)
    lo, hi = (0.0, float(span)) if np.isscalar(span) else (float(span[0]), float(span[1]))
    if lo > 0 or hi < 0:
        raise ValueError("span must contain the starting time 0")
    c0, a = _float_jet(jet)
    rhs = _flow_rhs(k, g, a)
    times = np.unique(np.concatenate([np.linspace(lo, hi, samples), [0.0]]))
    event = _blowup_event(blowup)
    parts, nfev, dense = {}, 0, []
    for end in (hi, lo):
        if end == 0:
            continue
        sol = solve_ivp(
            lambda t, z: rhs(z), (0.0, end), c0, method="DOP853", rtol=tol, atol=tol,
            dense_output=True, events=event,
        )
        nfev += sol.nfev
        if sol.status != 0:
            msg = "state exceeded the blow-up bound (pole?)" if sol.status == 1 else sol.message
            raise StepFailure(msg, float(sol.t[-1]), sol.y[:, -1])
        dense.append((min(0.0, end), max(0.0, end), sol.sol))
        sel = times[(times * np.sign(end)) > 0]
        parts.update(zip(sel.tolist(), sol.sol(sel).T))
    states = np.array([parts.get(t, c0) if t != 0 else c0 for t in times.tolist()])

    def interp(t):
        for a0, b0, s in dense:
            if a0 <= t <= b0:
                return s(t)
        if t == 0:
            return c0
        raise ValueError(f"t = {t} outside the integrated span")

    mu_start = mu_from_jet(JetPoint(g, tuple(a), tuple(c0))).mu
    worst_abs, worst_rel = 0.0, 0.0
    for c in states[[0, -1]]:
        mu_t = mu_from_jet(JetPoint(g, tuple(a), tuple(c))).mu
        d_abs, d_rel = _relative_drift(mu_start, mu_t)
        worst_abs, worst_rel = max(worst_abs, d_abs), max(worst_rel, d_rel)
    return Trajectory(g, tuple(a), k, times, states, tol, nfev, worst_rel, worst_abs, interp)


# ---------------------------------------------------------------------------
# w-function


@dataclass(frozen=True, eq=False)
class AxisW:
    """log w and u sampled on the x-axis."""

    xs: np.ndarray
    u: np.ndarray
    logw: np.ndarray
    dlogw: np.ndarray

    @property
    def w(self) -> np.ndarray:
        return np.exp(self.logw)


def w_on_axis(jet: JetPoint, xs, tol: float = 1e-12) -> AxisW:
    """w(x) = exp(-phi(x)) with phi'' = u/2, phi(0) = phi'(0) = 0.

    The double integral is carried as two extra ODE components next to the
    jet, so its error is governed by ``tol``.
    """
    xs = np.asarray(xs, dtype=float)
    if not np.any(xs == 0):
        raise ValueError("sample grid must contain x = 0")
    c0, a = _float_jet(jet)
    n = c0.size
    field_x = flow_field(1, jet.g)

    def rhs(z):
        c = z[:n]
        return np.concatenate([field_x(c, a), [z[n + 1], -0.5 * c[0]]])

    z0 = np.concatenate([c0, [0.0, 0.0]])
    zs = _line(rhs, z0, xs, tol, _blowup_event(1e8))
    return AxisW(xs, zs[:, 0], zs[:, n], zs[:, n + 1])


@lru_cache(maxsize=None)
def _p_polys(g: int) -> tuple:
    """p_ij as reduced differential polynomials, i, j = 1..g."""
    uvals = []
    for k in range(1, g + 1):
        th = theta_reduced(k, g)
        uvals.append((th, reduce_stationary(th.ddx(), g), reduce_stationary(th.ddx(2), g)))
    curve = CurveSpec(g, tuple(mu_poly(k, g) for k in range(1, 2 * g + 1)))
    P = p_bivariate(uvals, DiffPoly.u(0), curve, normalize=lambda c: reduce_stationary(c, g))
    return tuple(tuple(P.coeff(i, j) for j in range(1, g + 1)) for i in range(1, g + 1))


@lru_cache(maxsize=None)
def p_field(g: int) -> CompiledPoly:
    """Compiled evaluator of the g*g matrix p_ij (row major) at a jet."""
    polys = [p for row in _p_polys(g) for p in row]
    return CompiledPoly(polys, 2 * g + 1, [f"a{i}" for i in range(g - 1)])


def _augmented_rhs(k: int, g: int, a: Sequence):
    """Jet flow t_k plus dG_i/dt_k = -p_ik/2 and d(log w)/dt_k = G_k."""
    n = 2 * g + 1
    field_k = flow_field(k, g)
    pf = p_field(g)

    def rhs(z):
        c = z[:n]
        p = pf(c, a).reshape(g, g)
        return np.concatenate([field_k(c, a), -0.5 * p[:, k - 1], [z[n + k - 1]]])

    return rhs


@dataclass(frozen=True, eq=False)
class WGrid:
    """log w on a rectangular grid in the (t_{k1}, t_{k2}, ...) coordinates.

    ``hessian[node]`` holds p_ij (i, j = 1..g) at the node, ``fd_hessian`` the
    finite-difference second derivatives of log w in the grid flows.
    """

    flows: tuple
    axes: tuple
    logw: np.ndarray
    grad: np.ndarray
    jets: np.ndarray
    hessian: np.ndarray
    fd_hessian: np.ndarray | None
    path_gap: float
    tol: float

    @property
    def hessian_residual(self) -> float:
        """max |d_i d_j log w + p_ij/2| over nodes and grid flows."""
        if self.fd_hessian is None:
            return float("nan")
        idx = [k - 1 for k in self.flows]
        target = -0.5 * self.hessian[..., idx, :][..., :, idx]
        return float(np.max(np.abs(self.fd_hessian - target)))

    @property
    def fd_asymmetry(self) -> float:
        if self.fd_hessian is None:
            return float("nan")
        return float(np.max(np.abs(self.fd_hessian - np.swapaxes(self.fd_hessian, -1, -2))))

    def origin_index(self) -> tuple:
        return tuple(int(np.flatnonzero(ax == 0)[0]) for ax in self.axes)


def _sweep(z0: np.ndarray, order: Sequence[int], flows: Sequence[int], axes, rhss, tol) -> np.ndarray:
    """States at all grid nodes, moving along the axes in ``order``."""
    shape = tuple(len(ax) for ax in axes)
    out = np.empty(shape + (z0.size,), dtype=z0.dtype)
    frontier = {(): z0}
    for depth, d in enumerate(order):
        nxt = {}
        for key, z in frontier.items():
            line = _line(rhss[d], z, axes[d], tol, _blowup_event(1e8))
            for i, zi in enumerate(line):
                nxt[key + ((d, i),)] = zi
        frontier = nxt
    for key, z in frontier.items():
        idx = [0] * len(axes)
        for d, i in key:
            idx[d] = i
        out[tuple(idx)] = z
    return out


def w_grid(
    jet: JetPoint,
    grid: Sequence[tuple[int, Sequence[float]]],
    tol: float = 1e-12,
    *,
    fd_step: float | None = 1e-3,
) -> WGrid:
    """Reconstruct log w on a rectangular grid of commuting flow times.

    Parameters
    ----------
    jet : JetPoint
        Data at the origin.
    grid : list of (k, coordinates)
        One entry per axis: the flow index k (1 = x) and the sample times,
        which must include 0.
    tol : float
        Integrator tolerance; the two path orders must agree to ``10 * tol``
        relative to the size of the state.
    fd_step : float or None
        Step for the finite-difference Hessian (None skips it).
    """
    g = jet.g
    flows = tuple(_flow_index(k, g) for k, _ in grid)
    axes = tuple(np.asarray(ax, dtype=float) for _, ax in grid)
    for ax in axes:
        if not np.any(ax == 0):
            raise ValueError("every grid axis must contain 0")
    c0, a = _float_jet(jet)
    n = c0.size
    z0 = np.concatenate([c0, np.zeros(g), [0.0]])
    rhss = [_augmented_rhs(k, g, a) for k in flows]
    dims = list(range(len(axes)))
    first = _sweep(z0, dims, flows, axes, rhss, tol)
    gap = 0.0
    if len(dims) > 1:
        second = _sweep(z0, dims[::-1], flows, axes, rhss, tol)
        scale = max(1.0, float(np.max(np.abs(first))))
        gap = float(np.max(np.abs(first - second))) / scale
        if gap > 10 * tol * max(1.0, _span_factor(axes)):
            raise PathInconsistency(f"path orders disagree by {gap:.3g} (relative)")
    jets = first[..., :n]
    grad = first[..., n : n + g]
    logw = first[..., n + g].real
    pf = p_field(g)
    flat = jets.reshape(-1, n)
    hess = np.array([pf(c, a).reshape(g, g) for c in flat]).reshape(jets.shape[:-1] + (g, g))
    fd = None
    if fd_step is not None:
        fd = np.array([_fd_hessian(z, rhss, fd_step) for z in first.reshape(-1, z0.size)])
        fd = fd.reshape(jets.shape[:-1] + (len(flows), len(flows)))
    return WGrid(flows, axes, logw, grad, jets, hess.real, fd, gap, tol)


def _span_factor(axes) -> float:
    return float(sum(np.max(np.abs(ax)) for ax in axes))


def _fd_hessian(z: np.ndarray, rhss, h: float) -> np.ndarray:
    """Second derivatives of the last component, Richardson-extrapolated."""
    m = len(rhss)
    out = np.empty((m, m))
    L0 = z[-1].real

    def moved(steps):
        zz = z
        for d, s in steps:
            if s:
                zz = _rk4_shift(rhss[d], zz, s, steps=4)
        return zz[-1].real

    for i in range(m):
        out[i, i] = _richardson_second(lambda s: moved([(i, s)]), h, L0)
        for j in range(i + 1, m):

            def mixed(s, i=i, j=j):
                return (moved([(i, s), (j, s)]) - moved([(i, s), (j, -s)])
                        - moved([(i, -s), (j, s)]) + moved([(i, -s), (j, -s)])) / (4 * s * s)

            val = (4 * mixed(h) - mixed(2 * h)) / 3
            out[i, j] = out[j, i] = val
    return out


# ---------------------------------------------------------------------------
# eigenfunction


@dataclass(frozen=True, eq=False)
class EigenSample:
    """Phi along x with its log-derivative and residual diagnostics."""

    xs: np.ndarray
    u: np.ndarray
    log_phi: np.ndarray
    chi: np.ndarray
    riccati_residual: float
    eigen_residual: float
    energy: complex

    @property
    def phi(self) -> np.ndarray:
        return np.exp(self.log_phi)


def _gen_values(g: int, a: Sequence, xi):
    """Functions c -> (u(xi), u'(xi)) with u(xi) = sum_k u_k xi^k."""
    comp = _uvalues_compiled(g)
    powers = np.array([xi**k for k in range(1, g + 1)])

    def values(c):
        flat = comp(c, a).reshape(g, 3)
        return flat[:, 0] @ powers, flat[:, 1] @ powers

    return values


def _check_on_curve(curve: CurveSpec, xi, y, tol: float = 1e-9):
    if xi == 0:
        raise OffCurve("xi must be nonzero")
    lhs = y * y
    rhs = 4 * eval_mu(curve, xi)
    scale = 4 * (4 / abs(xi) + sum(abs(m) * abs(xi) ** (i + 1) for i, m in enumerate(curve.mu)))
    if abs(lhs - rhs) > tol * max(scale, abs(lhs), 1.0):
        raise OffCurve(f"y^2 - 4 mu(xi) = {complex(lhs - rhs):.3g}")


def _log_derivative(values, xi, y):
    def chi(c):
        U, dU = values(c)
        return (y - dU) / (2 * (2 - U))

    return chi


def _eigen_run(traj: Trajectory, chi, denom, energy, h: float, tol: float) -> EigenSample:
    g, a = traj.g, list(traj.a)
    n = 2 * g + 1
    field_x = flow_field(1, g)
    c0 = traj.start.state()
    if abs(denom(c0)) == 0:
        raise ZeroDenominator("denominator vanishes at the start point", 0.0)
    complex_run = np.iscomplexobj(chi(c0)) or np.iscomplexobj(c0)
    dtype = complex if complex_run else float
    z0 = np.concatenate([c0.astype(dtype), [0.0]]).astype(dtype)

    def rhs(z):
        return np.concatenate([field_x(z[:n], a), [chi(z[:n])]])

    d0 = abs(denom(c0))

    def crossing(t, z):
        d = denom(z[:n])
        return d.real if not complex_run else abs(d) - 1e-12

    # on the branch where chi has a pole the stepper stalls before a sign change
    # can be seen, so also stop once the denominator has all but vanished
    def near_zero(t, z):
        return abs(denom(z[:n])) - 1e-8 * d0

    for e in (crossing, near_zero):
        e.terminal = True
        e.kind = "denominator"
    event = [crossing, near_zero]
    zs = _line(rhs, z0, traj.times, tol, event)
    xs = traj.times
    log_phi = zs[:, n]
    chis = np.array([chi(z[:n]) for z in zs])
    u = zs[:, 0]

    ric_res, eig_res, scale = [], [], []
    for z, x_chi, uu in zip(zs, chis, u):

        def chi_at(s, z=z):
            return chi(_rk4_shift(rhs, z, s)[:n])

        def logphi_at(s, z=z):
            return _rk4_shift(rhs, z, s)[n] - z[n]

        dchi = _richardson_first(chi_at, h)
        ric_res.append(dchi + x_chi * x_chi - uu - energy)

        # Phi''/Phi from second differences of exp(log Phi(x+s) - log Phi(x))
        phi_ratio = _richardson_second(lambda s: np.exp(logphi_at(s)), h, 1.0)
        eig_res.append(phi_ratio - uu - energy)
        scale.append(abs(x_chi * x_chi) + abs(uu) + abs(energy))
    sc = max(max(scale), 1e-300)
    return EigenSample(
        xs,
        u,
        log_phi,
        chis,
        float(np.max(np.abs(ric_res)) / sc),
        float(np.max(np.abs(eig_res)) / sc),
        energy,
    )


def phi_eigen(traj: Trajectory, xi, y, *, h: float = FD_STEP, tol: float = 1e-12) -> EigenSample:
    """Eigenfunction L Phi = xi^-1 Phi along an x-trajectory, Phi(start) = 1.

    Phi is integrated through its log-derivative
    chi = (y - u'(xi)) / (2 (2 - u(xi))), where (xi, y) is a point of the curve.
    Residuals are relative to the size of the terms of each equation:
    Riccati chi' + chi^2 = u + 1/xi with chi' by Richardson central differences,
    and (Phi'' - u Phi - Phi/xi)/Phi from second differences.
    """
    if traj.flow != 1:
        raise ValueError("phi_eigen needs a trajectory along x")
    start = traj.start
    _check_on_curve(mu_from_jet(start), xi, y)
    values = _gen_values(traj.g, list(traj.a), xi)

    def denom(c):
        return 2 - values(c)[0]

    return _eigen_run(traj, _log_derivative(values, xi, y), denom, 1 / xi, h, tol)


def _alpha_top(mu_top, sign: int):
    root = np.sqrt(complex(mu_top)) if mu_top < 0 else math.sqrt(mu_top)
    return sign * root / 2


def phi_zero_energy(traj: Trajectory, sign: int = 1, *, h: float = FD_STEP, tol: float = 1e-12) -> EigenSample:
    """Solution of L Phi = 0 via d_x log Phi = (u_g' - 4 alpha_g) / (2 u_g).

    ``sign`` chooses alpha_g = +-sqrt(mu_2g)/2 (a complex root when mu_2g < 0).
    """
    if sign not in (1, -1):
        raise ValueError("branch sign must be +1 or -1")
    g, a = traj.g, list(traj.a)
    start = traj.start
    alpha = _alpha_top(float(np.real(mu_from_jet(start).mu[-1])), sign)
    comp = _uvalues_compiled(g)

    def ug(c):
        flat = comp(c, a)
        return flat[3 * (g - 1)], flat[3 * (g - 1) + 1]

    def chi(c):
        v, dv = ug(c)
        return (dv - 4 * alpha) / (2 * v)

    def denom(c):
        return ug(c)[0]

    if abs(denom(start.state())) == 0:
        raise ZeroDenominator("u_g vanishes at the start point", 0.0)
    return _eigen_run(traj, chi, denom, 0.0, h, tol)


def branch_wronskian(plus: EigenSample, minus: EigenSample) -> np.ndarray:
    """W = Phi_+ Phi_-' - Phi_+' Phi_- along the samples (constant for L Phi = 0)."""
    return np.exp(plus.log_phi + minus.log_phi) * (minus.chi - plus.chi)


# ---------------------------------------------------------------------------
# t_k dependence of Phi


@lru_cache(maxsize=None)
def _dk_u_polys(k: int, g: int) -> tuple:
    """d u_i / d t_k, i = 1..g, reduced."""
    der = dk_derivation(k, g)
    return tuple(reduce_stationary(theta_reduced(i, g).apply_derivation(None, der), g) for i in range(1, g + 1))


@lru_cache(maxsize=None)
def _dk_u_compiled(k: int, g: int) -> CompiledPoly:
    return CompiledPoly(list(_dk_u_polys(k, g)), 2 * g + 1, [f"a{i}" for i in range(g - 1)])


def _d_value(k: int, coeffs: Sequence, xi):
    """D_k f evaluated at xi for f = sum_m coeffs[m] xi^m (m = 0..)."""
    return 0.5 * sum(coeffs[m] * xi ** (m - k + 1) for m in range(min(k, len(coeffs))))


def canonical_alphas(g: int, xi, y) -> list:
    """alpha_1..alpha_g with all weight on alpha_g: sum alpha_i xi^i = y/4."""
    return [0] * (g - 1) + [y / (4 * xi**g)]


def gauge_shift(alphas: Sequence, gammas: Sequence, xi) -> list:
    """Gauge-transformed alpha_1..alpha_g; gammas = gamma_2..gamma_g (gamma_1 = gamma_{g+1} = 0).

    The sum alpha(xi) = sum alpha_i xi^i is unchanged.
    """
    g = len(alphas)
    gam = [0, 0] + list(gammas) + [0]  # gam[k] = gamma_k, k = 1..g+1
    if len(gam) != g + 2:
        raise ValueError(f"need {g - 1} gauge parameters")
    return [alphas[k - 1] + gam[k] / xi - gam[k + 1] for k in range(1, g + 1)]


def kflow_log_derivative(k: int, g: int, a: Sequence, xi, alphas: Sequence):
    """c -> d log Phi / d t_k from the jet, for the alpha-gauge ``alphas``."""
    values = _gen_values(g, a, xi)
    dk = _dk_u_compiled(k, g)
    powers = np.array([xi**i for i in range(1, g + 1)])
    y = 4 * sum(al * xi ** (i + 1) for i, al in enumerate(alphas))
    d_alpha = 2 * _d_value(k, [0] + list(alphas), xi)

    def psi(c):
        U, _ = values(c)
        comp = _uvalues_compiled(g)(c, a).reshape(g, 3)[:, 0]
        d_two_minus_u = _d_value(k, [2] + list(-comp), xi)
        dkU = dk(c, a) @ powers
        return (y * d_two_minus_u - dkU) / (2 * (2 - U)) - d_alpha

    return psi


def phi_kflow_check(
    jet: JetPoint,
    xi,
    y,
    k: int,
    h: float = FD_STEP,
    *,
    x_end: float = 0.5,
    samples: int = 11,
    alphas: Sequence | None = None,
    tol: float = 1e-13,
) -> float:
    """Max relative gap between d log Phi / d t_k and its closed form.

    Phi is fixed on the (x, t_k) plane by integrating the closed form along
    t_k at x = 0 and then chi along x.  Recomputing Phi along x from jets
    shifted by +-h, +-2h in t_k gives a Richardson t_k-derivative at every x
    sample, which must equal the closed form evaluated on the x trajectory.
    """
    g = jet.g
    if not 1 <= k <= g:
        raise IndexOutOfRange(f"flow t_{k} does not exist for genus {g}")
    _check_on_curve(mu_from_jet(jet), xi, y)
    c0, a = _float_jet(jet)
    if alphas is None:
        alphas = canonical_alphas(g, xi, y)
    n = c0.size
    values = _gen_values(g, a, xi)
    chi = _log_derivative(values, xi, y)
    psi = kflow_log_derivative(k, g, a, xi, alphas)
    field_x = flow_field(1, g)
    field_k = flow_field(k, g)
    xs = np.linspace(0.0, x_end, samples)
    cplx = any(np.iscomplexobj(v) for v in (xi, y, c0)) or isinstance(xi, complex) or isinstance(y, complex)
    dtype = complex if cplx else float

    def rhs(z):
        return np.concatenate([field_x(z[:n], a), [chi(z[:n])]])

    def along_x(c):
        z0 = np.concatenate([np.asarray(c, dtype=dtype), [0.0]])
        return _line(rhs, z0, xs, tol)

    base = along_x(c0)

    def log_phi_shift(s):
        c = _rk4_shift(lambda cc: field_k(cc, a), c0.astype(dtype), s, steps=4)
        return along_x(c)[:, n]

    dlog = psi(c0) + _richardson_first(log_phi_shift, h)
    closed = np.array([psi(z[:n]) for z in base])
    scale = max(float(np.max(np.abs(closed))), 1e-300)
    return float(np.max(np.abs(dlog - closed)) / scale)


# ---------------------------------------------------------------------------
# small-scale limit


def phi_scaling_residual(jet: JetPoint, xi: float, kappa: float, xs, sign: int = 1, *, tol: float = 1e-13) -> float:
    """Distance along x between the rescaled eigenfunction and the free wave.

    With xi' = xi kappa^2 and y' chosen so that (xi', y') stays on the curve
    while y' kappa / 4 -> sign xi^-1/2, Phi~(x) = Phi(kappa x; xi', y')
    approaches Phi_0(x) = exp(sign x xi^-1/2).  Returns max |log Phi~ - log Phi_0|
    over ``xs`` (nonnegative, containing 0).
    """
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    xs = np.asarray(xs, dtype=float)
    if xs.min() < 0 or not np.any(xs == 0):
        raise ValueError("xs must be nonnegative and contain 0")
    g = jet.g
    curve = mu_from_jet(jet.as_float())
    a0 = sign * xi**-0.5
    # alpha(xi) of the scaled point: A^2 = 1/xi + 1/4 sum mu_i xi^i kappa^(2i+2)
    corr = 0.25 * sum(m * xi ** (i + 1) * kappa ** (2 * i + 4) for i, m in enumerate(curve.mu))
    A = sign * np.sqrt(complex(1 / xi + corr))
    A = A.real if abs(A.imag) == 0 else A
    xi_s = xi * kappa**2
    y_s = 4 * A / kappa
    c0, a = _float_jet(jet)
    values = _gen_values(g, a, xi_s)
    chi = _log_derivative(values, xi_s, y_s)
    _check_on_curve(curve, xi_s, y_s, tol=1e-8)
    n = c0.size
    field_x = flow_field(1, g)
    dtype = complex if np.iscomplexobj(A) else float

    def rhs(z):
        return np.concatenate([field_x(z[:n], a), [chi(z[:n])]])

    zs = _line(rhs, np.concatenate([c0.astype(dtype), [0.0]]), kappa * xs, tol)
    return float(np.max(np.abs(zs[:, n] - a0 * xs)))


# ---------------------------------------------------------------------------
# samples


def elliptic_jet(p, dp, g2) -> tuple[JetPoint, CurveSpec]:
    """Genus-1 jet of u = 2 P(x + x0) where P(x0) = p, P'(x0) = dp, invariant g2.

    g3 is fixed by dp^2 = 4 p^3 - g2 p - g3; the curve is mu = (-g2, -g3).
    Exact when the inputs are rational.
    """
    if all(isinstance(v, (int, Fraction)) for v in (p, dp, g2)):
        p, dp, g2 = Fraction(p), Fraction(dp), Fraction(g2)
    g3 = 4 * p**3 - g2 * p - dp * dp
    jet = JetPoint(1, (), (2 * p, 2 * dp, 12 * p * p - g2))
    return jet, CurveSpec(1, (-g2, -g3))
