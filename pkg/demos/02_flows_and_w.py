"""Commuting flows on jet space and the w-function built from them.

The curve coefficients are conserved along every flow.  Following the
(x, t_2) flows over a grid gives p_ij at each node; integrating the
gradient of log w recovers a function whose Hessian is -p_ij / 2.
"""

import numpy as np

from gkdv import JetPoint
from gkdv.waveplane import elliptic_jet, integrate_flow, w_grid, w_on_axis

jet, oracle = elliptic_jet(0.5, 0.0, 2.0)
traj = integrate_flow(jet, "x", 1.0, 1e-10)
print("elliptic sample, u = 2 P(x) with P(0) = 1/2, g2 = 2")
print(f"  curve drift over x in [0, 1]: {traj.mu_drift:.1e}  (oracle mu = {oracle.mu})")

jet2 = JetPoint(2, (0.3,), (0.2, 0.1, -0.3, 0.2, 0.1))
for k in (1, 2):
    t = integrate_flow(jet2, k, (-1.0, 1.0), 1e-10)
    print(f"genus 2, flow t_{k}: drift {t.mu_drift:.1e} in {t.nfev} evaluations")

xs = 0.01 * np.arange(-100, 100)
axis = w_on_axis(jet, xs)
print(f"\nw on the x-axis: w(0) = {axis.w[100]}, w(+-1) = {axis.w[0]:.6f}, {axis.w[-1]:.6f}")

grid_axis = np.linspace(-0.4, 0.4, 5)
grid = w_grid(jet2, [(1, grid_axis), (2, grid_axis)], 1e-12)
print("\nlog w on a 5x5 (x, t_2) grid:")
print(np.array2string(grid.logw, precision=5, suppress_small=True))
print(f"Hessian vs -p/2: {grid.hessian_residual:.1e}; two path orders agree to {grid.path_gap:.1e}")
