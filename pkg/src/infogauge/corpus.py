"""Named densities, models, and landscapes shared by the demos, the test
suite, and the ``suite`` command.

Grid extents are chosen so that every density satisfies the boundary-mass
invariant with margin, and flow grids are wide enough that the final
smoothed density (variance grows by t) is still contained.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr

from .bayes import (
    ConjugateGaussianModel,
    GaussianNoiseLikelihood,
    GridBayesProblem,
    HeteroscedasticGaussianLikelihood,
    conjugate_grid_problem,
)
from .density import (
    GaussianComponent,
    GaussianMixture,
    GridDensity,
    GridSpec,
    discretize,
    normalize,
)
from .landscape import CosineSumEnergy, EnergyLandscape


def mixture_1d(*terms) -> GaussianMixture:
    """Mixture from (weight, mean, sigma) triples."""
    weights = [w for w, _, _ in terms]
    comps = tuple(GaussianComponent([m], [[s * s]]) for _, m, s in terms)
    return GaussianMixture(weights, comps)


def smoothed_box(spec: GridSpec, half_width: float = 4.0,
                 smoothing: float = 0.4) -> GridDensity:
    """Uniform density on [-a, a] convolved with N(0, s^2), closed form."""
    x = spec.axes()[0]
    vals = (ndtr((x + half_width) / smoothing) - ndtr((x - half_width) / smoothing))
    return normalize(spec, vals / (2.0 * half_width))


# ---------------------------------------------------------------------------
# Heat-flow corpus (criterion: dissipation laws)
# ---------------------------------------------------------------------------

FLOW_SPEC = GridSpec((128.0,), (4096,))
FLOW_T_MIN = 0.01
FLOW_T_FINAL = 300.0
FLOW_RATIO = 1.04


def flow_corpus() -> dict:
    """Gaussian, bimodal, trimodal, skewed, and near-uniform starts."""
    return {
        "gaussian": discretize(mixture_1d((1.0, 0.0, 1.0)), FLOW_SPEC),
        "bimodal": discretize(mixture_1d((0.5, -3.0, 1.0), (0.5, 3.0, 1.0)), FLOW_SPEC),
        "trimodal": discretize(
            mixture_1d((0.3, -4.0, 0.8), (0.4, 0.0, 1.0), (0.3, 4.0, 0.9)), FLOW_SPEC
        ),
        "skewed": discretize(mixture_1d((0.7, 0.0, 1.0), (0.3, 2.5, 2.0)), FLOW_SPEC),
        "near_uniform": smoothed_box(FLOW_SPEC),
    }


# ---------------------------------------------------------------------------
# Grid corpus (identification and invariance checks)
# ---------------------------------------------------------------------------

def grid_corpus() -> dict:
    """1-D and 2-D grids with varied structure, all safely resolved."""
    corpus = {
        "gaussian_1d": discretize(mixture_1d((1.0, 0.0, 1.0)), GridSpec((8.0,), (256,))),
        "wide_gaussian_1d": discretize(mixture_1d((1.0, 0.5, 1.8)), GridSpec((16.0,), (256,))),
        "bimodal_1d": discretize(
            mixture_1d((0.5, -3.0, 1.0), (0.5, 3.0, 1.0)), GridSpec((12.0,), (256,))
        ),
        "skewed_1d": discretize(
            mixture_1d((0.7, 0.0, 1.0), (0.3, 2.5, 2.0)), GridSpec((16.0,), (256,))
        ),
        "near_uniform_1d": smoothed_box(GridSpec((8.0,), (256,))),
    }
    iso2 = GaussianComponent([0.0, 0.0], np.eye(2))
    corr2 = GaussianComponent([0.0, 0.0], [[1.0, 0.6], [0.6, 1.0]])
    bim2 = GaussianMixture(
        [0.5, 0.5],
        (GaussianComponent([-2.0, -1.5], np.eye(2)),
         GaussianComponent([2.0, 1.5], np.eye(2))),
    )
    spec2 = GridSpec((10.0, 10.0), (256, 256))
    corpus["gaussian_2d"] = discretize(iso2, spec2)
    corpus["correlated_2d"] = discretize(corr2, spec2)
    corpus["bimodal_2d"] = discretize(bim2, spec2)
    return corpus


# ---------------------------------------------------------------------------
# Bayesian problems
# ---------------------------------------------------------------------------

def unit_conjugate_model() -> ConjugateGaussianModel:
    return ConjugateGaussianModel(GaussianComponent([0.0], [[1.0]]), [[1.0]], 1)


def conjugate_on_grid() -> GridBayesProblem:
    return conjugate_grid_problem(unit_conjugate_model(), GridSpec((8.0,), (256,)))


def bimodal_prior_problem() -> GridBayesProblem:
    prior = discretize(
        mixture_1d((0.5, -2.0, 0.8), (0.5, 2.0, 0.8)), GridSpec((10.0,), (256,))
    )
    return GridBayesProblem(prior, GaussianNoiseLikelihood([[1.0]], n_obs=1))


def heteroscedastic_problem() -> GridBayesProblem:
    """Bimodal prior with state-dependent observation noise: the case where
    the likelihood Fisher term genuinely needs the joint expectation."""
    prior = discretize(
        mixture_1d((0.5, -2.0, 0.8), (0.5, 2.0, 0.8)), GridSpec((10.0,), (256,))
    )
    return GridBayesProblem(prior, HeteroscedasticGaussianLikelihood(n_obs=2))


def random_conjugate_model(rng: np.random.Generator, dim: int) -> ConjugateGaussianModel:
    """Random SPD prior and noise covariances for property tests."""

    def spd(scale):
        a = rng.standard_normal((dim, dim))
        return scale * (a @ a.T + dim * np.eye(dim))

    mean = rng.standard_normal(dim)
    n_obs = int(rng.integers(1, 4))
    return ConjugateGaussianModel(
        GaussianComponent(mean, spd(1.0)), spd(float(rng.uniform(0.2, 2.0))), n_obs
    )


# ---------------------------------------------------------------------------
# Landscapes
# ---------------------------------------------------------------------------

def cosine_wells(n_wells: int, beta: float = 200.0):
    """1-D cosine landscape with ``n_wells`` identical wells.

    The domain width scales with the well count so the well shape is held
    fixed; minima sit at half-integer coordinates with curvature 4 pi^2.
    """
    landscape = EnergyLandscape(CosineSumEnergy([1.0], [(1.0,)]), beta=beta)
    spec = GridSpec((n_wells / 2.0,), (32 * n_wells,))
    return landscape, spec


SWEEP_CUTOFFS = (3.0, 5.0, 8.0, 13.0)
SWEEP_ORDERS = (0, 1, 2, 3)
SWEEP_ALPHA = 2.0
SWEEP_AMPLITUDE = 0.25
SWEEP_SEEDS = 64


def sweep_base_density() -> GridDensity:
    return discretize(
        mixture_1d((0.5, -3.0, 1.0), (0.5, 3.0, 1.0)), GridSpec((12.0,), (256,))
    )
