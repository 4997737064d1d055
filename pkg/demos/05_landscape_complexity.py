# 05_landscape_complexity.py
#
# The potential counts local optima
# =================================
# A low-temperature Boltzmann density over a rugged landscape is a sum of
# narrow Gaussian bumps, one per local minimum.  In that regime phi
# collapses to the log of the number of wells carrying non-negligible
# weight: entropy pays for *which well*, Fisher information knows only
# the *within-well* sharpness, and their combination cancels everything
# but the count.  The sweep below doubles the number of identical cosine
# wells and watches phi climb by log 2 each time, then deepens one well
# until the others fall below the weight threshold.

import math

import numpy as np

from infogauge import (
    CosineSumEnergy,
    EnergyLandscape,
    GaussianDipEnergy,
    GridSpec,
    SumEnergy,
    complexity_report,
    find_local_minima_bruteforce,
)
from infogauge.corpus import cosine_wells

beta, delta, eps = 200.0, 0.01, 0.01

print(f"cosine wells at beta={beta:.0f}, delta={delta}, eps={eps}")
print("=" * 66)
print(f"{'wells':>5s} {'N_LM':>5s} {'phi_mixture':>12s} {'phi_direct':>11s} "
      f"{'log N_LM':>9s} {'correction':>11s}")
print("-" * 66)
phis, lognlms = [], []
for n_wells in (2, 4, 8, 16):
    land, spec = cosine_wells(n_wells, beta=beta)
    rep = complexity_report(land, spec, delta=delta, epsilon=eps)
    phis.append(rep.phi_mixture)
    lognlms.append(rep.log_nlm)
    print(f"{n_wells:5d} {rep.n_lm:5d} {rep.phi_mixture:12.6f} "
          f"{rep.phi_direct:11.6f} {rep.log_nlm:9.6f} "
          f"{rep.curvature_correction:11.2e}")
slope = np.polyfit(lognlms, phis, 1)[0]
print("-" * 66)
print(f"fitted slope of phi vs log N_LM: {slope:.4f} (the log-count law)")

# Deepen one well by enough that every other well drops below the eps
# weight ratio: the effective count collapses to 1 and phi follows.
depth = 2.0 * math.log(1.0 / eps) / beta * 2.0
energy = SumEnergy((
    CosineSumEnergy([1.0], [(1.0,)]),
    GaussianDipEnergy(depth, (0.5,), 0.1),
))
land = EnergyLandscape(energy, beta=beta)
spec = GridSpec((2.0,), (128,))
raw = find_local_minima_bruteforce(land, spec)
rep = complexity_report(land, spec, delta=delta, epsilon=eps)
print()
print(f"deepened-well control: dE = {depth:.4f}")
print(f"  raw minima found      : {len(raw)}")
print(f"  retained at eps={eps}  : {rep.n_lm}")
print(f"  phi_mixture           : {rep.phi_mixture:.6f} (log 1 = 0)")
print(f"  weights               : "
      + ", ".join(f"{w:.2e}" for w in rep.modes.weights))
