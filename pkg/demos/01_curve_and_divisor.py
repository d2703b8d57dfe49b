"""From a solution jet to its spectral curve and divisor, and back.

A genus-1 solution is fixed by (u, u', u'') at one point.  Its curve
y^2 = 4 mu(xi) and the single divisor point are computed exactly, then the
jet is rebuilt from the curve and the divisor alone.
"""

from fractions import Fraction

import numpy as np

from gkdv import JetPoint, mu_from_jet, upsilon, upsilon_inv
from gkdv.divisor import random_float_jet, random_rational_divisor
from gkdv.jetspace import rescale
from gkdv.spectral import eval_mu

jet = JetPoint.exact(1, [], [2, 4, 3])
curve, divisor = upsilon(jet)
print("jet          ", [str(c) for c in jet.c])
print("curve mu     ", [str(m) for m in curve.mu])
print("divisor      ", [(str(x), str(y)) for x, y in divisor.points])
(xi, y), = divisor.points
print("on the curve:", y * y == 4 * eval_mu(curve, xi))
print("recovered    ", upsilon_inv(curve, divisor) == jet)

# genus 3: a random curve with three rational points, and the jet it determines
curve3, d3 = random_rational_divisor(3, 1)
jet3 = upsilon_inv(curve3, d3)
print("\ngenus 3 jet  ", [str(c) for c in jet3.c])
print("fiber kept:  ", mu_from_jet(jet3) == curve3)
print("divisor kept:", upsilon(jet3)[1] == d3)

# the same round trip in floating point, on a jet with a bounded divisor
fj = random_float_jet(3, np.random.default_rng(0))
back = upsilon_inv(*upsilon(fj, mode="float"))
err = max(abs(a - b) for a, b in zip(back.c, fj.c)) / max(abs(v) for v in fj.c)
print(f"float round trip relative error {err:.1e}")

# scaling u -> kappa^2 u(kappa x) acts on the curve by weights
kappa = Fraction(3, 2)
print("rescaling covariant:", mu_from_jet(rescale(jet3, kappa)) == curve3.scaled(kappa))
