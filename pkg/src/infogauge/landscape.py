"""Boltzmann posteriors over energy landscapes and their mode complexity.

A low-temperature Boltzmann density p ~ exp(-beta E) over a landscape
with well-separated minima is approximated by a Gaussian mixture: one
component per minimum with covariance ``delta I + Lambda^-1 / beta``
(Laplace approximation broadened by the resolution floor delta) and
weight proportional to exp(-beta E_l) |Sigma_l|^{1/2}.  Components whose
weight ratio to the maximum falls below epsilon are dropped; the number
retained is the effective mode count.

In this regime the potential decomposes into the weight entropy plus a
curvature correction,

    phi ~ H(w) + (N/2) (log lam_bar - mean_log_lam),

with lam_bar the weighted mean precision eigenvalue and mean_log_lam the
weighted mean log precision; for nearly uniform weights and
``|Lambda^-1| / (delta beta) << 1`` the correction is quadratically
suppressed and phi approaches log(effective mode count).

A brute-force grid oracle enumerates the minima independently of the
mixture pipeline.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from . import _grid
from .density import GaussianComponent, GaussianMixture, GridSpec
from .errors import NotPositiveDefinite, PlateauWarning, SeparationWarning
from .estimators import DEFAULT_BUDGET, EstimatorBudget, info_state

# Ties below this energy gap collapse to one plateau representative.
PLATEAU_TOL = 1e-12

# Minimum pairwise Mahalanobis distance for the separated-mode asymptotics.
SEPARATION_MIN = 6.0


# ---------------------------------------------------------------------------
# Energy families (closed-form, so Hessians have analytic cross-checks)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CosineSumEnergy:
    """E(x) = sum_t a_t cos(2 pi f_t . x + phi_t)."""

    amplitudes: tuple
    frequencies: tuple  # one per term; each a tuple with one entry per axis
    phases: tuple = None

    def __post_init__(self):
        amps = tuple(float(a) for a in self.amplitudes)
        freqs = tuple(tuple(float(v) for v in np.atleast_1d(f)) for f in self.frequencies)
        phases = self.phases
        if phases is None:
            phases = tuple(0.0 for _ in amps)
        phases = tuple(float(p) for p in phases)
        if not len(amps) == len(freqs) == len(phases):
            raise ValueError("per-term parameter lengths disagree")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "phases", phases)

    @property
    def dim(self) -> int:
        return len(self.frequencies[0])

    def value(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(pts.shape[0])
        for a, f, p in zip(self.amplitudes, self.frequencies, self.phases):
            out += a * np.cos(2.0 * np.pi * pts @ np.asarray(f) + p)
        return out


@dataclass(frozen=True)
class PolynomialEnergy:
    """1-D polynomial with ascending coefficients."""

    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients",
                           tuple(float(c) for c in self.coefficients))

    @property
    def dim(self) -> int:
        return 1

    def value(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.polynomial.polynomial.polyval(pts[:, 0], self.coefficients)


@dataclass(frozen=True)
class GaussianDipEnergy:
    """Localized depression -depth * exp(-|x - center|^2 / (2 width^2))."""

    depth: float
    center: tuple
    width: float

    @property
    def dim(self) -> int:
        return len(np.atleast_1d(self.center))

    def value(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dev = pts - np.atleast_1d(np.asarray(self.center, dtype=float))
        return -self.depth * np.exp(-0.5 * np.sum(dev**2, axis=1) / self.width**2)


@dataclass(frozen=True)
class SumEnergy:
    terms: tuple

    @property
    def dim(self) -> int:
        return self.terms[0].dim

    def value(self, points: np.ndarray) -> np.ndarray:
        return sum(t.value(points) for t in self.terms)


@dataclass(frozen=True)
class TabulatedEnergy:
    """Energies sampled on a grid, evaluated by linear interpolation."""

    spec: GridSpec
    values: np.ndarray

    @property
    def dim(self) -> int:
        return self.spec.dims

    def value(self, points: np.ndarray) -> np.ndarray:
        from scipy.interpolate import RegularGridInterpolator

        interp = RegularGridInterpolator(
            self.spec.axes(), np.asarray(self.values, dtype=float),
            bounds_error=False, fill_value=None,
        )
        return interp(np.atleast_2d(np.asarray(points, dtype=float)))


@dataclass(frozen=True)
class EnergyLandscape:
    """An energy evaluator with inverse temperature; p ~ exp(-beta E)."""

    energy: object
    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    @property
    def dim(self) -> int:
        return self.energy.dim

    def value(self, points: np.ndarray) -> np.ndarray:
        return self.energy.value(points)


def landscape_from_dict(obj: dict) -> EnergyLandscape:
    family = obj["family"]
    if family == "cosine_sum":
        energy = CosineSumEnergy(obj["amplitudes"], obj["frequencies"], obj.get("phases"))
    elif family == "polynomial":
        energy = PolynomialEnergy(obj["coefficients"])
    elif family == "grid":
        spec = GridSpec(tuple(obj["extent"]), tuple(obj["points"]))
        energy = TabulatedEnergy(spec, np.asarray(obj["values"], dtype=float).reshape(spec.shape))
    else:
        raise ValueError(f"unknown energy family {family!r}")
    return EnergyLandscape(energy, float(obj["beta"]))


# ---------------------------------------------------------------------------
# Modes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Mode:
    location: np.ndarray
    energy: float
    hessian: np.ndarray = None


@dataclass(frozen=True)
class ModeSet:
    """Local minima, optionally with Boltzmann weights and the epsilon rule.

    ``resolution`` holds {"delta": ..., "epsilon": ...} once the mixture
    construction has been applied.
    """

    minima: tuple
    weights: np.ndarray = None
    effective_count: int = None
    resolution: dict = None

    def __post_init__(self):
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.size != len(self.minima):
                raise ValueError("one weight per mode required")
            if abs(w.sum() - 1.0) > 1e-10:
                raise ValueError("weights must sum to 1 within 1e-10")
            object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.minima)


def _neighbor_shifts(dims: int):
    if dims == 1:
        return [(-1,), (1,)]
    shifts = []
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if (di, dj) != (0, 0):
                shifts.append((di, dj))
    return shifts


def _fd_gradient(energy, x: np.ndarray, step: float) -> np.ndarray:
    g = np.empty_like(x)
    for a in range(x.size):
        e = np.zeros_like(x)
        e[a] = step
        g[a] = (energy.value(x + e)[0] - energy.value(x - e)[0]) / (2.0 * step)
    return g


def hessian_at(landscape: EnergyLandscape, x, step: float = 1e-4,
               min_eig: float = 0.0) -> np.ndarray:
    """Central-difference Hessian of the energy at ``x``, symmetrized.

    Raises ``NotPositiveDefinite`` when the smallest eigenvalue is at or
    below ``min_eig`` (a saddle, a degenerate minimum, or an x that is not
    actually near a strict minimum).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.size
    energy = landscape.energy
    hess = np.empty((n, n))
    e0 = energy.value(x)[0]
    for a in range(n):
        ea = np.zeros(n)
        ea[a] = step
        hess[a, a] = (energy.value(x + ea)[0] - 2.0 * e0 + energy.value(x - ea)[0]) / step**2
        for b in range(a + 1, n):
            eb = np.zeros(n)
            eb[b] = step
            mixed = (
                energy.value(x + ea + eb)[0]
                - energy.value(x + ea - eb)[0]
                - energy.value(x - ea + eb)[0]
                + energy.value(x - ea - eb)[0]
            ) / (4.0 * step**2)
            hess[a, b] = mixed
            hess[b, a] = mixed
    hess = 0.5 * (hess + hess.T)
    eigs = np.linalg.eigvalsh(hess)
    if eigs.min() <= min_eig:
        raise NotPositiveDefinite(
            f"Hessian eigenvalues {eigs} not above {min_eig} at x={x}"
        )
    return hess


def find_local_minima_bruteforce(landscape: EnergyLandscape, spec: GridSpec,
                                 refine: bool = True) -> ModeSet:
    """Enumerate local minima on the grid (N <= 2).

    A grid point is a minimum iff strictly smaller than all axis-and-
    diagonal neighbors (periodic wrap).  Tied plateaus collapse to the
    lexicographically smallest point of the region and emit a
    ``PlateauWarning``.  Locations are then refined by one Newton step
    with finite-difference gradient and Hessian.
    """
    if spec.dims > 2:
        raise ValueError("brute-force oracle supports N <= 2 only")
    if landscape.dim != spec.dims:
        raise ValueError("landscape dimension does not match grid")
    pts = _grid.mesh_points(spec)
    e = landscape.value(pts).reshape(spec.shape)

    shifts = _neighbor_shifts(spec.dims)
    neighbor_min = np.full_like(e, np.inf)
    for shift in shifts:
        neighbor_min = np.minimum(neighbor_min, np.roll(e, shift, axis=tuple(range(spec.dims))))
    strict = e < neighbor_min
    weak = e <= neighbor_min + PLATEAU_TOL

    indices = [tuple(idx) for idx in np.argwhere(strict)]
    plateau_candidates = weak & ~strict
    if plateau_candidates.any():
        labels, n_regions = ndimage.label(plateau_candidates)
        collapsed = []
        for r in range(1, n_regions + 1):
            region = labels == r
            region_max = e[region].max()
            # the region is a plateau minimum iff everything bordering it
            # is strictly higher
            border_ok = True
            for shift in shifts:
                shifted = np.roll(region, shift, axis=tuple(range(spec.dims)))
                outside = shifted & ~region
                if outside.any() and e[outside].min() <= region_max + PLATEAU_TOL:
                    border_ok = False
                    break
            if border_ok:
                rep = tuple(min(map(tuple, np.argwhere(region))))
                indices.append(rep)
                collapsed.append((rep, int(region.sum())))
        if collapsed:
            warnings.warn(
                f"collapsed {len(collapsed)} plateau region(s): {collapsed}",
                PlateauWarning,
            )

    axes = spec.axes()
    minima = []
    fd_step = min(spec.spacing) / 8.0
    for idx in sorted(indices):
        x0 = np.array([axes[a][idx[a]] for a in range(spec.dims)])
        x_ref = x0
        if refine:
            try:
                hess = hessian_at(landscape, x0, step=fd_step)
                g = _fd_gradient(landscape.energy, x0, fd_step)
                step_vec = np.linalg.solve(hess, g)
                if np.all(np.abs(step_vec) < np.asarray(spec.spacing)):
                    x_ref = x0 - step_vec
            except NotPositiveDefinite:
                pass  # keep the grid point; hessian_at will flag it later
        minima.append(Mode(x_ref, float(landscape.value(x_ref)[0])))
    return ModeSet(tuple(minima))


def with_hessians(landscape: EnergyLandscape, modes: ModeSet,
                  step: float = 1e-4) -> ModeSet:
    new = tuple(
        Mode(m.location, m.energy, hessian_at(landscape, m.location, step=step))
        for m in modes.minima
    )
    return replace(modes, minima=new)


# ---------------------------------------------------------------------------
# Mixture construction and asymptotics
# ---------------------------------------------------------------------------

def _mode_covariances(modes: ModeSet, beta: float, delta: float) -> list:
    if delta <= 0:
        raise ValueError("delta must be positive")
    covs = []
    for m in modes.minima:
        if m.hessian is None:
            raise ValueError("modes need Hessians; run with_hessians first")
        n = m.location.size
        covs.append(delta * np.eye(n) + np.linalg.inv(m.hessian) / beta)
    return covs


def _boltzmann_weights(modes: ModeSet, covs: list, beta: float) -> np.ndarray:
    energies = np.array([m.energy for m in modes.minima])
    # shifted exponentials keep exp() in range for large beta
    logw = -beta * (energies - energies.min())
    logw += np.array([0.5 * np.linalg.slogdet(c)[1] for c in covs])
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def boltzmann_mixture(modes: ModeSet, beta: float, delta: float) -> GaussianMixture:
    """Gaussian mixture N(x_l, delta I + Lambda_l^-1 / beta) with Boltzmann
    weights ~ exp(-beta E_l) |Sigma_l|^{1/2}."""
    covs = _mode_covariances(modes, beta, delta)
    w = _boltzmann_weights(modes, covs, beta)
    comps = tuple(GaussianComponent(m.location, c) for m, c in zip(modes.minima, covs))
    return GaussianMixture(w, comps)


def effective_mode_count(weights, epsilon: float) -> int:
    """Number of components with w / w_max >= epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    w = np.asarray(weights, dtype=float)
    return int(np.count_nonzero(w / w.max() >= epsilon))


def filter_modes(modes: ModeSet, beta: float, delta: float, epsilon: float) -> ModeSet:
    """Apply the epsilon retention rule; weights of the retained modes are
    renormalized through the same Boltzmann formula."""
    covs = _mode_covariances(modes, beta, delta)
    w = _boltzmann_weights(modes, covs, beta)
    keep = w / w.max() >= epsilon
    retained = tuple(m for m, k in zip(modes.minima, keep) if k)
    sub = ModeSet(retained)
    covs_kept = [c for c, k in zip(covs, keep) if k]
    w_kept = _boltzmann_weights(sub, covs_kept, beta)
    return ModeSet(
        retained,
        weights=w_kept,
        effective_count=len(retained),
        resolution={"delta": delta, "epsilon": epsilon},
    )


def weight_entropy(weights) -> float:
    w = np.asarray(weights, dtype=float)
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def min_pairwise_mahalanobis(modes: ModeSet, covs: list) -> float:
    if len(modes) < 2:
        return math.inf
    best = math.inf
    for i in range(len(modes)):
        for j in range(i + 1, len(modes)):
            dev = modes.minima[i].location - modes.minima[j].location
            avg = 0.5 * (covs[i] + covs[j])
            d2 = float(dev @ np.linalg.solve(avg, dev))
            best = min(best, math.sqrt(d2))
    return best


@dataclass(frozen=True)
class MixtureAsymptotics:
    """Low-temperature decomposition of the potential for a mode set."""

    weight_entropy: float
    curvature_correction: float
    phi_mixture: float
    lambda_bar: float
    mean_log_lambda: float
    series_residual: float
    min_separation: float
    separation_ok: bool


def phi_mixture_asymptotic(modes: ModeSet, beta: float, delta: float) -> MixtureAsymptotics:
    """Weight entropy plus curvature correction for a separated mode set.

    lambda_bar is tr of the weighted mean precision divided by N and
    mean_log_lambda the weighted mean log-determinant of the precisions
    divided by N, both evaluated exactly; the residual of the first-order
    series in 1/(delta beta) is reported alongside.  Emits a
    ``SeparationWarning`` (and flags the result) when two retained modes
    are closer than Mahalanobis distance 6.
    """
    covs = _mode_covariances(modes, beta, delta)
    w = modes.weights
    if w is None:
        w = _boltzmann_weights(modes, covs, beta)
    dim = modes.minima[0].location.size

    lambda_bar = float(sum(
        wi * np.trace(np.linalg.inv(c)) for wi, c in zip(w, covs)
    )) / dim
    mean_log_lambda = float(sum(
        -wi * np.linalg.slogdet(c)[1] for wi, c in zip(w, covs)
    )) / dim
    series = -math.log(delta) - float(sum(
        wi * np.trace(np.linalg.inv(m.hessian)) for wi, m in zip(w, modes.minima)
    )) / (dim * delta * beta)

    h_w = weight_entropy(w)
    correction = 0.5 * dim * (math.log(lambda_bar) - mean_log_lambda)
    min_sep = min_pairwise_mahalanobis(modes, covs)
    ok = min_sep >= SEPARATION_MIN
    if not ok:
        warnings.warn(
            f"min pairwise Mahalanobis separation {min_sep:.2f} below "
            f"{SEPARATION_MIN}; asymptotics unreliable",
            SeparationWarning,
        )
    return MixtureAsymptotics(
        weight_entropy=h_w,
        curvature_correction=correction,
        phi_mixture=h_w + correction,
        lambda_bar=lambda_bar,
        mean_log_lambda=mean_log_lambda,
        series_residual=mean_log_lambda - series,
        min_separation=min_sep,
        separation_ok=ok,
    )


@dataclass(frozen=True)
class ComplexityReport:
    """End-to-end mode-counting audit of a landscape."""

    phi_mixture: float
    phi_direct: float
    log_nlm: float
    weight_entropy: float
    curvature_correction: float
    n_lm: int
    error_budget: dict  # eps_term: |log eps| / (eps N_LM); beta_term: N / (delta beta)^2
    series_residual: float
    separation_ok: bool
    modes: ModeSet

    def __post_init__(self):
        gap = abs(self.phi_mixture - (self.weight_entropy + self.curvature_correction))
        if gap > 1e-10:
            raise ValueError("phi_mixture must equal H(w) + correction")


def complexity_report(landscape: EnergyLandscape, spec: GridSpec, delta: float,
                      epsilon: float, beta: float = None,
                      budget: EstimatorBudget = DEFAULT_BUDGET) -> ComplexityReport:
    """Oracle -> Hessians -> mixture -> epsilon filter -> asymptotic and
    direct potentials, with the error-budget terms of the log-count law."""
    beta = landscape.beta if beta is None else beta
    modes = with_hessians(landscape, find_local_minima_bruteforce(landscape, spec))
    retained = filter_modes(modes, beta, delta, epsilon)
    asym = phi_mixture_asymptotic(retained, beta, delta)
    mixture = boltzmann_mixture(retained, beta, delta)
    direct = info_state(mixture, budget)
    n_lm = retained.effective_count
    dim = landscape.dim
    budget_terms = {
        "eps_term": abs(math.log(epsilon)) / (epsilon * n_lm),
        "beta_term": dim / (delta * beta) ** 2,
    }
    return ComplexityReport(
        phi_mixture=asym.phi_mixture,
        phi_direct=direct.Phi,
        log_nlm=math.log(n_lm),
        weight_entropy=asym.weight_entropy,
        curvature_correction=asym.curvature_correction,
        n_lm=n_lm,
        error_budget=budget_terms,
        series_residual=asym.series_residual,
        separation_ok=asym.separation_ok,
        modes=retained,
    )
