# 03_spectral_projections.py
#
# Why only two robust projections survive
# =======================================
# Filtering the surprisal with |k|^(2m) in Fourier space and averaging
# yields a family of statistics: m=0 is the entropy, m=1 the Fisher
# trace, and higher m probe ever finer geometry.  But a statistic built
# from high frequencies inherits whatever noise lives there.  This script
# (1) verifies the m=0 / m=1 identifications on a grid, (2) evaluates the
# analytic sensitivity profile rho_m(k) ~ exp(-s^2 k^2) k^(4m - a) whose
# peak moves into the noise-dominated region as m grows, and (3) runs the
# synthetic cutoff experiment showing m >= 2 statistics swing wildly with
# the cutoff while m <= 1 barely move.

import numpy as np

from infogauge import (
    SpectralFilter,
    entropy,
    grid_fisher_forms,
    projected_statistic,
    robustness_sweep,
    tail_variance_profile,
)
from infogauge.corpus import (
    SWEEP_ALPHA,
    SWEEP_AMPLITUDE,
    SWEEP_CUTOFFS,
    sweep_base_density,
)

d = sweep_base_density()

print("identification on a bimodal grid density")
print("-" * 56)
h = entropy(d).value
grad_form, lap_form = grid_fisher_forms(d)
m0 = projected_statistic(d, SpectralFilter(0))
m1 = projected_statistic(d, SpectralFilter(1))
print(f"  m=0 statistic {m0:.9f}  vs entropy       {h:.9f}")
print(f"  m=1 statistic {m1:.9f}  vs <lap S>       {lap_form:.9f}")
print(f"                                vs <|grad S|^2> {grad_form:.9f}")

print()
print("analytic sensitivity peaks (alpha = 2, unit envelope)")
print("-" * 56)
k = np.linspace(0.05, 5.0, 512)
for m in (0, 1, 2, 3):
    prof = tail_variance_profile(SWEEP_ALPHA, 1.0, m, k)
    print(f"  m={m}: peak at k = {prof.peak_k:5.3f} "
          f"(formula sqrt((4m-a)/2) = {prof.analytic_peak():5.3f})")
print("  m=0 is flat-to-decreasing; m>=2 peaks sit beyond the resolved band.")

print()
print("cutoff experiment: statistic vs where the noise tail starts")
print("-" * 56)
sweep = robustness_sweep(d, SWEEP_ALPHA, SWEEP_AMPLITUDE,
                         cutoffs=SWEEP_CUTOFFS, orders=(0, 1, 2, 3),
                         seed=2024, n_seeds=64)
header = "  m | " + " | ".join(f"k_c={c:4.1f}" for c in SWEEP_CUTOFFS) + " | sensitivity"
print(header)
for m in (0, 1, 2, 3):
    cells = " | ".join(f"{sweep.means[(m, c)]:8.4f}" for c in SWEEP_CUTOFFS)
    print(f"  {m} | {cells} | {sweep.sensitivity[m]:11.2e}")
ratio = min(sweep.sensitivity[2], sweep.sensitivity[3]) / max(
    sweep.sensitivity[0], sweep.sensitivity[1])
print(f"\n  fragile/robust sensitivity ratio: {ratio:.1f}x "
      "(orders 0 and 1 are the keepers)")
