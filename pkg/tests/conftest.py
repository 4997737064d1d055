"""Shared fixtures and independent numerical oracles.

The oracle helpers below deliberately avoid the library's own estimator
code paths: densities are evaluated through scipy.stats and integrated
with dense composite Simpson sums, so expected values asserted in the
tests are computed through an independent route.
"""

import numpy as np
import pytest
from scipy.integrate import simpson
from scipy.stats import norm

from infogauge import GaussianComponent, GaussianMixture, GridSpec, discretize


# ---------------------------------------------------------------------------
# Independent oracles (1-D)
# ---------------------------------------------------------------------------

def mixture_pdf_1d(weights, means, sigmas):
    """Callable pdf built from scipy.stats only."""
    weights = np.asarray(weights, dtype=float)

    def pdf(x):
        return sum(w * norm.pdf(x, m, s) for w, m, s in zip(weights, means, sigmas))

    return pdf


def simpson_entropy_1d(weights, means, sigmas, span=12.0, n=2**16 + 1):
    """-int p log p by composite Simpson on a dense grid."""
    lo = min(m - span * s for m, s in zip(means, sigmas))
    hi = max(m + span * s for m, s in zip(means, sigmas))
    x = np.linspace(lo, hi, n)
    p = mixture_pdf_1d(weights, means, sigmas)(x)
    integrand = np.where(p > 0, -p * np.log(np.where(p > 0, p, 1.0)), 0.0)
    return float(simpson(integrand, x=x))


def simpson_fisher_1d(weights, means, sigmas, span=12.0, n=2**16 + 1):
    """int (p')^2 / p with the analytic mixture derivative."""
    lo = min(m - span * s for m, s in zip(means, sigmas))
    hi = max(m + span * s for m, s in zip(means, sigmas))
    x = np.linspace(lo, hi, n)
    weights = np.asarray(weights, dtype=float)
    p = np.zeros_like(x)
    dp = np.zeros_like(x)
    for w, m, s in zip(weights, means, sigmas):
        phi = norm.pdf(x, m, s)
        p += w * phi
        dp += w * phi * (-(x - m) / s**2)
    mask = p > 1e-300
    return float(simpson(np.where(mask, dp**2 / np.where(mask, p, 1.0), 0.0), x=x))


# ---------------------------------------------------------------------------
# Fixtures
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def unit_gaussian():
    return GaussianComponent([0.0], [[1.0]])


@pytest.fixture(scope="session")
def unit_gaussian_grid(unit_gaussian):
    return discretize(unit_gaussian, GridSpec((8.0,), (256,)))


@pytest.fixture(scope="session")
def far_bimodal():
    """Equal mixture at +-10 with unit variances; overlap below 1e-20."""
    return GaussianMixture(
        [0.5, 0.5],
        (GaussianComponent([-10.0], [[1.0]]), GaussianComponent([10.0], [[1.0]])),
    )


@pytest.fixture(scope="session")
def bimodal_grid():
    mix = GaussianMixture(
        [0.5, 0.5],
        (GaussianComponent([-3.0], [[1.0]]), GaussianComponent([3.0], [[1.0]])),
    )
    return discretize(mix, GridSpec((12.0,), (256,)))
