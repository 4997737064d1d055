"""Probability-density representations and measure-preserving transforms.

Two representations are supported end to end:

* :class:`GaussianMixture` / :class:`GaussianComponent` -- analytic, any
  dimension, exact moments and closed-form updates.
* :class:`GridDensity` -- nonnegative values on a uniform periodic grid
  over [-L, L)^N, the workhorse for all spectral and flow operations.

The periodic box stands in for R^N; grids are built large enough that the
mass within one cell of the boundary is below ``BOUNDARY_MASS_TOL`` of the
total, which makes wrap-around numerically irrelevant for the Gaussian-type
targets used here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from . import _grid
from .errors import AllZero, DimensionMismatch, DomainTooSmall, NotPositiveDefinite

# Hard cap on total grid size (128^3); keeps everything desk-scale.
DEFAULT_MAX_POINTS = 2**21

# Mass allowed within one cell of the boundary when discretizing an
# unbounded target onto the periodic box.
BOUNDARY_MASS_TOL = 1e-9

NORMALIZATION_TOL = 1e-10

# p is floored at max(p) * LOG_FLOOR_RATIO before taking logarithms, so
# surprisal tails are bounded instead of dominated by float noise.
LOG_FLOOR_RATIO = 1e-14


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid over the box [-L_a, L_a) per axis.

    Parameters
    ----------
    extent : tuple of float
        Half-width L per axis; the grid covers [-L, L) periodically.
    points : tuple of int
        Points per axis; each must be even and >= 8.
    max_points : int
        Budget on the total point count.
    """

    extent: tuple
    points: tuple
    max_points: int = DEFAULT_MAX_POINTS

    def __post_init__(self):
        extent = tuple(float(x) for x in np.atleast_1d(self.extent))
        points = tuple(int(n) for n in np.atleast_1d(self.points))
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "points", points)
        if len(extent) != len(points):
            raise DimensionMismatch("extent and points must have equal length")
        if not 1 <= len(extent) <= 3:
            raise DimensionMismatch(
                "grids support 1 to 3 axes; use analytic mixtures above that"
            )
        for n in points:
            if n < 8 or n % 2 != 0:
                raise ValueError(f"points per axis must be even and >= 8, got {n}")
        for L in extent:
            if L <= 0:
                raise ValueError("extent must be positive")
        total = int(np.prod(points))
        if total > self.max_points:
            raise ValueError(f"grid of {total} points exceeds budget {self.max_points}")

    @property
    def dims(self) -> int:
        return len(self.extent)

    @property
    def spacing(self) -> tuple:
        return tuple(2.0 * L / n for L, n in zip(self.extent, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def shape(self) -> tuple:
        return self.points

    def axes(self) -> list:
        return [
            -L + h * np.arange(n)
            for L, h, n in zip(self.extent, self.spacing, self.points)
        ]


@dataclass(frozen=True)
class GridDensity:
    """Normalized nonnegative density sampled on a :class:`GridSpec`.

    ``log_floor`` is the relative floor ratio: logarithms are taken of
    ``max(values, max(values) * log_floor)``.
    """

    spec: GridSpec
    values: np.ndarray
    log_floor: float = LOG_FLOOR_RATIO

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.spec.shape:
            raise DimensionMismatch(
                f"values shape {values.shape} does not match grid {self.spec.shape}"
            )
        if np.any(values < 0):
            raise ValueError("density values must be nonnegative")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")
        mass = _grid.riemann(self.spec, values)
        if abs(mass - 1.0) > NORMALIZATION_TOL:
            raise ValueError(
                f"density not normalized (mass {mass!r}); use normalize()"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def floor_threshold(self) -> float:
        return float(self.values.max()) * self.log_floor

    def boundary_mass_fraction(self) -> float:
        """Mass within one cell of the domain boundary, as a fraction."""
        mask = np.zeros(self.spec.shape, dtype=bool)
        for axis in range(self.spec.dims):
            sl_lo = [slice(None)] * self.spec.dims
            sl_hi = [slice(None)] * self.spec.dims
            sl_lo[axis] = slice(0, 1)
            sl_hi[axis] = slice(-1, None)
            mask[tuple(sl_lo)] = True
            mask[tuple(sl_hi)] = True
        return _grid.riemann(self.spec, np.where(mask, self.values, 0.0))


@dataclass(frozen=True)
class ScalarField:
    """Real field on a grid (surprisal and friends), finite everywhere.

    ``floored`` marks points where the log floor was applied.
    """

    spec: GridSpec
    values: np.ndarray
    floored: np.ndarray = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.spec.shape:
            raise DimensionMismatch("field shape does not match grid")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.floored is not None:
            fl = np.asarray(self.floored, dtype=bool).copy()
            fl.setflags(write=False)
            object.__setattr__(self, "floored", fl)


@dataclass(frozen=True)
class GaussianComponent:
    """Multivariate Gaussian with SPD covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch("covariance shape does not match mean")
        if not np.allclose(cov, cov.T, atol=1e-12, rtol=0.0):
            raise NotPositiveDefinite("covariance not symmetric to 1e-12")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite("covariance not positive definite") from exc
        mean = mean.copy()
        mean.setflags(write=False)
        cov = cov.copy()
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def precision(self) -> np.ndarray:
        return np.linalg.inv(self.covariance)

    def log_det_cov(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    def logpdf(self, points: np.ndarray) -> np.ndarray:
        """Log density at ``points`` of shape (n, dim)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dev = pts - self.mean
        # solve L y = dev^T, maha = |y|^2
        y = np.linalg.solve(self._chol, dev.T)
        maha = np.sum(y * y, axis=0)
        return -0.5 * (self.dim * np.log(2.0 * np.pi) + self.log_det_cov() + maha)

    def grad_logpdf(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dev = pts - self.mean
        return -np.linalg.solve(self.covariance, dev.T).T

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal((n, self.dim))
        return self.mean + z @ self._chol.T


@dataclass(frozen=True)
class GaussianMixture:
    """Convex combination of Gaussian components of equal dimension."""

    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        comps = tuple(self.components)
        if len(comps) == 0:
            raise ValueError("mixture needs at least one component")
        if w.size != len(comps):
            raise DimensionMismatch("weights and components disagree in length")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 within 1e-12, got {w.sum()!r}")
        dim = comps[0].dim
        if any(c.dim != dim for c in comps):
            raise DimensionMismatch("components must share a dimension")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    def logpdf(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        logs = np.stack([c.logpdf(pts) for c in self.components], axis=0)
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights)[:, None]
        return logsumexp(logs + logw, axis=0)

    def pdf(self, points: np.ndarray) -> np.ndarray:
        return np.exp(self.logpdf(points))

    def grad_logpdf(self, points: np.ndarray) -> np.ndarray:
        """Gradient of log density, via component responsibilities."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        logs = np.stack([c.logpdf(pts) for c in self.components], axis=0)
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights)[:, None]
        logr = logs + logw
        logr -= logsumexp(logr, axis=0, keepdims=True)
        resp = np.exp(logr)  # (n_comp, n_pts)
        grad = np.zeros_like(pts)
        for r, c in zip(resp, self.components):
            grad += r[:, None] * c.grad_logpdf(pts)
        return grad

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        counts = rng.multinomial(n, self.weights)
        draws = [c.sample(k, rng) for c, k in zip(self.components, counts) if k > 0]
        x = np.concatenate(draws, axis=0)
        return x[rng.permutation(n)]

    def mean(self) -> np.ndarray:
        return sum(w * c.mean for w, c in zip(self.weights, self.components))

    def covariance(self) -> np.ndarray:
        mu = self.mean()
        cov = np.zeros((self.dim, self.dim))
        for w, c in zip(self.weights, self.components):
            d = (c.mean - mu)[:, None]
            cov += w * (c.covariance + d @ d.T)
        return cov


def as_mixture(d) -> GaussianMixture:
    """Wrap a single component as a one-component mixture."""
    if isinstance(d, GaussianMixture):
        return d
    if isinstance(d, GaussianComponent):
        return GaussianMixture(np.array([1.0]), (d,))
    raise TypeError(f"expected Gaussian component or mixture, got {type(d)!r}")


def normalize(spec: GridSpec, values: np.ndarray, log_floor: float = LOG_FLOOR_RATIO) -> GridDensity:
    """Scale nonnegative grid values to unit Riemann mass.

    Raises ``AllZero`` when the input carries no mass.  Idempotent and
    scale-equivariant: normalize(c * v) == normalize(v) for any c > 0.
    """
    values = np.asarray(values, dtype=float)
    mass = _grid.riemann(spec, values)
    if mass <= 0:
        raise AllZero("cannot normalize a zero-mass density")
    return GridDensity(spec, values / mass, log_floor=log_floor)


def renormalize(d: GridDensity) -> GridDensity:
    return normalize(d.spec, d.values, log_floor=d.log_floor)


def discretize(a, spec: GridSpec, log_floor: float = LOG_FLOOR_RATIO) -> GridDensity:
    """Sample an analytic mixture on the grid and normalize.

    Requires the box to cover at least 6 axis-aligned standard deviations
    of every component (plus the component mean offset); the resulting
    boundary mass must stay below ``BOUNDARY_MASS_TOL``.
    """
    mix = as_mixture(a)
    if mix.dim != spec.dims:
        raise DimensionMismatch("mixture dimension does not match grid")
    for c in mix.components:
        sigmas = np.sqrt(np.diag(c.covariance))
        for axis in range(spec.dims):
            needed = abs(c.mean[axis]) + 6.0 * sigmas[axis]
            if spec.extent[axis] < needed:
                raise DomainTooSmall(
                    f"extent {spec.extent[axis]} on axis {axis} below "
                    f"|mean| + 6 sigma = {needed:.3f}"
                )
    pts = _grid.mesh_points(spec)
    vals = mix.pdf(pts).reshape(spec.shape)
    d = normalize(spec, vals, log_floor=log_floor)
    frac = d.boundary_mass_fraction()
    if frac >= BOUNDARY_MASS_TOL:
        raise DomainTooSmall(
            f"boundary mass fraction {frac:.3e} exceeds {BOUNDARY_MASS_TOL:.0e}"
        )
    return d


def surprisal_field(d: GridDensity) -> ScalarField:
    """Surprisal -log p with the relative floor applied, finite everywhere."""
    floor = d.floor_threshold
    floored = d.values < floor
    vals = -np.log(np.maximum(d.values, floor))
    return ScalarField(d.spec, vals, floored=floored)


def rescale(d, a: float):
    """Pushforward density of x' = a * x.

    Gaussians scale means by ``a`` and covariances by ``a**2``.  Grid
    densities are rescaled exactly by scaling the box extent along with
    the values (values / a^N on extent a*L), which preserves mass exactly.
    """
    if a <= 0:
        raise ValueError("scale factor must be positive")
    if isinstance(d, GaussianComponent):
        return GaussianComponent(a * d.mean, (a * a) * d.covariance)
    if isinstance(d, GaussianMixture):
        comps = tuple(GaussianComponent(a * c.mean, (a * a) * c.covariance) for c in d.components)
        return GaussianMixture(d.weights, comps)
    if isinstance(d, GridDensity):
        spec = GridSpec(
            tuple(a * L for L in d.spec.extent), d.spec.points, max_points=d.spec.max_points
        )
        return GridDensity(spec, d.values / a**d.spec.dims, log_floor=d.log_floor)
    raise TypeError(f"cannot rescale {type(d)!r}")


def grid_moments(d: GridDensity):
    """Mean vector, covariance matrix, and excess kurtosis per axis."""
    pts = _grid.mesh_points(d.spec)
    w = d.values.ravel() * d.spec.cell_volume
    mean = w @ pts
    dev = pts - mean
    cov = dev.T @ (dev * w[:, None])
    m2 = w @ dev**2
    m4 = w @ dev**4
    kurt = m4 / m2**2 - 3.0
    return mean, cov, kurt


# ---------------------------------------------------------------------------
# Density specification files (JSON)
# ---------------------------------------------------------------------------

def density_from_dict(obj: dict, base_dir: Path = None):
    """Build a density from its JSON specification.

    ``{"kind": "gaussian_mixture", "weights": [...], "means": [[...]],
    "covariances": [[[...]]]}`` or ``{"kind": "grid", "extent": [...],
    "points": [...], "values_file": "<flat float64 binary or CSV>"}``.
    """
    kind = obj.get("kind")
    if kind == "gaussian_mixture":
        comps = tuple(
            GaussianComponent(np.asarray(m, dtype=float), np.asarray(c, dtype=float))
            for m, c in zip(obj["means"], obj["covariances"])
        )
        return GaussianMixture(np.asarray(obj["weights"], dtype=float), comps)
    if kind == "grid":
        spec = GridSpec(tuple(obj["extent"]), tuple(obj["points"]))
        path = Path(obj["values_file"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        if path.suffix == ".csv":
            flat = np.loadtxt(path, delimiter=",").ravel()
        else:
            flat = np.fromfile(path, dtype=np.float64)
        values = flat.reshape(spec.shape)
        return normalize(spec, values)
    raise ValueError(f"unknown density kind {kind!r}")


def load_density(path):
    path = Path(path)
    with open(path) as fh:
        return density_from_dict(json.load(fh), base_dir=path.parent)
