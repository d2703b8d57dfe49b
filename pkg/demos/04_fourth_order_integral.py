"""The genus-2 first integral and the coefficient of u''''.

The fourth-order conserved quantity is sometimes quoted as
1/4 (4 u'''' - 10 u u'' - 5 u'^2 + 10 u^3 + 16 a_0 u).  Along an actual
genus-2 solution only the version with coefficient 1 on u'''' is constant.
"""

import numpy as np

from gkdv import JetPoint
from gkdv.goldens import printed_fourth_order_integral
from gkdv.jetspace import mu_poly
from gkdv.waveplane import integrate_flow

quoted = printed_fourth_order_integral()
derived = mu_poly(2, 2)
print("derived:", derived.to_str())
print("quoted - derived:", (quoted - derived).to_str())

jet = JetPoint(2, (0.3,), (0.2, 0.1, -0.3, 0.2, 0.1))
traj = integrate_flow(jet, "x", 1.0, 1e-12, samples=6)
print("\n   x     derived      quoted")
for t, c in zip(traj.times, traj.states):
    vals = [float(p.eval(tuple(c), {"a0": 0.3})) for p in (derived, quoted)]
    print(f"{t:5.1f}  {vals[0]:.10f}  {vals[1]:.10f}")
