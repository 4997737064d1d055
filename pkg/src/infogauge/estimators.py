"""Entropy, Fisher trace, and the scale-invariant potential built from them.

Every quantity is available for analytic Gaussians / mixtures and for grid
densities, with independent numerical routes where the value is not exact:

* entropy: closed form (Gaussian), adaptive quadrature (1-D mixture),
  Monte Carlo with reported standard error (mixture, N >= 2), floored
  plug-in sum (grid);
* Fisher trace: ``tr(Sigma^-1)`` (Gaussian), quadrature / MC on
  ``|grad log p|^2`` (mixture), and on grids BOTH the gradient form
  ``<|grad S|^2>`` (2nd-order central stencils) and the Laplacian form
  ``<lap S>`` (exact Fourier multiplier).  The two grid forms must agree
  within the configured cross-check tolerance or the grid is declared
  under-resolved.

All logarithms are natural; entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _grid
from .density import (
    GaussianComponent,
    GaussianMixture,
    GridDensity,
    surprisal_field,
)
from .errors import (
    BudgetExceeded,
    ContractFailed,
    CrossCheckFailed,
    NonPositiveFisher,
)

TWO_PI_E = 2.0 * math.pi * math.e

# Integration window per mixture component, in standard deviations.
_QUAD_SIGMA_SPAN = 40.0


@dataclass(frozen=True)
class EstimatorBudget:
    """Resource limits for the stochastic / adaptive estimators."""

    mc_samples: int = 1_000_000
    mc_seed: int = 0
    quad_rel_tol: float = 1e-8
    fisher_crosscheck_tol: float = 0.01
    mc_target_se: float = None

    @classmethod
    def from_dict(cls, obj: dict) -> "EstimatorBudget":
        allowed = {"mc_samples", "mc_seed", "quad_rel_tol", "fisher_crosscheck_tol", "mc_target_se"}
        unknown = set(obj) - allowed
        if unknown:
            raise ValueError(f"unknown budget keys: {sorted(unknown)}")
        return cls(**obj)


DEFAULT_BUDGET = EstimatorBudget()


@dataclass(frozen=True)
class Estimate:
    """A scalar estimate with its uncertainty. ``std_error`` is 0 for
    exact (closed-form or deterministic-grid) routes."""

    value: float
    std_error: float = 0.0
    method: str = "exact"
    n_samples: int = 0

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class InfoState:
    """The (H, J) coordinates of a density plus derived quantities.

    ``phi`` is dimensionless under rescaling; ``entropy_power`` and
    ``resolution_scale`` carry units of length^2.
    """

    H: float
    J: float
    Phi: float
    entropy_power: float
    resolution_scale: float
    dim: int
    h_std_error: float = 0.0
    j_std_error: float = 0.0

    def __post_init__(self):
        if self.J <= 0:
            raise NonPositiveFisher(f"J must be positive, got {self.J}")
        if self.entropy_power <= 0:
            raise ContractFailed("entropy power must be positive")
        # MC-backed estimates widen the slack by 3 standard errors.
        phi_se = self.h_std_error + self.dim / (2.0 * self.J) * self.j_std_error
        slack = 1e-6 + 3.0 * phi_se
        vj = self.entropy_power * self.J
        vj_se = vj * (2.0 * self.h_std_error / self.dim + self.j_std_error / max(self.J, 1e-300))
        if vj < self.dim - (1e-6 + 3.0 * vj_se):
            raise ContractFailed(
                f"Stam inequality violated: V*J = {vj!r} < N = {self.dim}"
            )
        if self.Phi < -slack:
            raise ContractFailed(f"Phi = {self.Phi!r} below -{slack!r}")
        expected = info_potential(self.H, self.J, self.dim)
        if abs(self.Phi - expected) > 1e-12 * max(1.0, abs(expected)):
            raise ContractFailed("Phi inconsistent with its defining formula")


def info_potential(H: float, J: float, dim: int) -> float:
    """The scale-invariant potential H + (N/2) log(J / (2 pi e N)).

    Zero exactly for an isotropic Gaussian; positive otherwise (Stam).
    """
    if J <= 0:
        raise NonPositiveFisher(f"J must be positive, got {J}")
    return H + 0.5 * dim * math.log(J / (TWO_PI_E * dim))


def entropy_power(H: float, dim: int) -> float:
    """Variance of the isotropic Gaussian with entropy H: (2 pi e)^-1 exp(2H/N)."""
    return math.exp(2.0 * H / dim) / TWO_PI_E


def resolution_scale(J: float, dim: int) -> float:
    """Conjugate length^2 scale N / (2 J) induced by local curvature."""
    if J <= 0:
        raise NonPositiveFisher(f"J must be positive, got {J}")
    return dim / (2.0 * J)


def scale_pde_residual(phi_fn, H: float, J: float, dim: int, fd_step: float = 1e-6) -> float:
    """Residual of N dPhi/dH - 2 J dPhi/dJ by central differences.

    Any potential invariant under (H, J) -> (H + N log a, J / a^2) makes
    this vanish; a generic ``phi_fn`` does not.
    """
    if fd_step <= 0:
        raise ValueError("fd_step must be positive")
    h_step = fd_step
    j_step = min(fd_step, 0.5 * J)
    d_dh = (phi_fn(H + h_step, J, dim) - phi_fn(H - h_step, J, dim)) / (2.0 * h_step)
    d_dj = (phi_fn(H, J + j_step, dim) - phi_fn(H, J - j_step, dim)) / (2.0 * j_step)
    return dim * d_dh - 2.0 * J * d_dj


def gauge_pde_residual(H: float, J: float, dim: int, fd_step: float = 1e-6) -> float:
    """Scale-invariance residual of the potential itself; |residual| <= 1e-6
    for fd_step = 1e-6."""
    return scale_pde_residual(info_potential, H, J, dim, fd_step=fd_step)


# ---------------------------------------------------------------------------
# Entropy
# ---------------------------------------------------------------------------

def _gaussian_entropy(c: GaussianComponent) -> float:
    return 0.5 * (c.dim * math.log(TWO_PI_E) + c.log_det_cov())


def _quad_window(mix: GaussianMixture):
    lo, hi, means = np.inf, -np.inf, []
    for c in mix.components:
        s = math.sqrt(float(c.covariance[0, 0]))
        m = float(c.mean[0])
        means.append(m)
        lo = min(lo, m - _QUAD_SIGMA_SPAN * s)
        hi = max(hi, m + _QUAD_SIGMA_SPAN * s)
    return lo, hi, sorted(means)


def _mixture_entropy_quad(mix: GaussianMixture, budget: EstimatorBudget) -> Estimate:
    lo, hi, means = _quad_window(mix)

    def integrand(x):
        logp = mix.logpdf(np.array([[x]]))[0]
        return -logp * math.exp(logp)

    val, err = integrate.quad(
        integrand, lo, hi, points=means, limit=50 + 20 * len(means),
        epsrel=budget.quad_rel_tol, epsabs=1e-13,
    )
    return Estimate(val, std_error=err, method="quadrature")


def _mixture_entropy_mc(mix: GaussianMixture, budget: EstimatorBudget) -> Estimate:
    rng = np.random.default_rng(budget.mc_seed)
    n = budget.mc_samples
    x = mix.sample(n, rng)
    logp = mix.logpdf(x)
    h = -float(np.mean(logp))
    se = float(np.std(logp, ddof=1)) / math.sqrt(n)
    if budget.mc_target_se is not None and se > budget.mc_target_se:
        raise BudgetExceeded(
            f"entropy MC std error {se:.3e} above target {budget.mc_target_se:.3e} "
            f"at {n} samples"
        )
    return Estimate(h, std_error=se, method="monte_carlo", n_samples=n)


def _grid_entropy(d: GridDensity) -> Estimate:
    s = surprisal_field(d)
    return Estimate(_grid.expectation(d.values, s.values, d.spec.cell_volume), method="grid")


def entropy(d, budget: EstimatorBudget = DEFAULT_BUDGET) -> Estimate:
    """Differential entropy in nats, with an error estimate."""
    if isinstance(d, GaussianComponent):
        return Estimate(_gaussian_entropy(d))
    if isinstance(d, GaussianMixture):
        if len(d.components) == 1:
            return Estimate(_gaussian_entropy(d.components[0]))
        if d.dim == 1:
            return _mixture_entropy_quad(d, budget)
        return _mixture_entropy_mc(d, budget)
    if isinstance(d, GridDensity):
        return _grid_entropy(d)
    raise TypeError(f"unsupported density type {type(d)!r}")


# ---------------------------------------------------------------------------
# Fisher trace
# ---------------------------------------------------------------------------

def grid_fisher_forms(d: GridDensity) -> tuple:
    """Gradient form <|grad S|^2> and Laplacian form <lap S> on the grid.

    The gradient uses 2nd-order central stencils; the Laplacian uses the
    exact Fourier multiplier so it coincides with the first-order spectral
    projection.  Their gap is a discretization indicator.
    """
    s = surprisal_field(d)
    grads = _grid.gradient_central(d.spec, s.values)
    grad_sq = np.zeros_like(s.values)
    for g in grads:
        grad_sq += g * g
    grad_form = _grid.expectation(d.values, grad_sq, d.spec.cell_volume)
    lap = _grid.spectral_laplacian(d.spec, s.values)
    lap_form = _grid.expectation(d.values, lap, d.spec.cell_volume)
    return grad_form, lap_form


def _mixture_fisher_quad(mix: GaussianMixture, budget: EstimatorBudget) -> Estimate:
    lo, hi, means = _quad_window(mix)

    def integrand(x):
        pt = np.array([[x]])
        g = mix.grad_logpdf(pt)[0, 0]
        return g * g * math.exp(mix.logpdf(pt)[0])

    val, err = integrate.quad(
        integrand, lo, hi, points=means, limit=50 + 20 * len(means),
        epsrel=budget.quad_rel_tol, epsabs=1e-13,
    )
    return Estimate(val, std_error=err, method="quadrature")


def _mixture_fisher_mc(mix: GaussianMixture, budget: EstimatorBudget) -> Estimate:
    rng = np.random.default_rng(budget.mc_seed + 1)
    n = budget.mc_samples
    x = mix.sample(n, rng)
    g2 = np.sum(mix.grad_logpdf(x) ** 2, axis=1)
    j = float(np.mean(g2))
    se = float(np.std(g2, ddof=1)) / math.sqrt(n)
    if budget.mc_target_se is not None and se > budget.mc_target_se:
        raise BudgetExceeded(
            f"Fisher MC std error {se:.3e} above target {budget.mc_target_se:.3e}"
        )
    return Estimate(j, std_error=se, method="monte_carlo", n_samples=n)


def fisher_trace(d, budget: EstimatorBudget = DEFAULT_BUDGET) -> Estimate:
    """Trace of the Fisher information matrix of the density.

    Grid densities are cross-checked between the gradient and Laplacian
    forms; disagreement beyond ``budget.fisher_crosscheck_tol`` (relative)
    raises ``CrossCheckFailed``.  The gradient form is returned.
    """
    if isinstance(d, GaussianComponent):
        return Estimate(float(np.trace(d.precision)))
    if isinstance(d, GaussianMixture):
        if len(d.components) == 1:
            return Estimate(float(np.trace(d.components[0].precision)))
        if d.dim == 1:
            return _mixture_fisher_quad(d, budget)
        return _mixture_fisher_mc(d, budget)
    if isinstance(d, GridDensity):
        grad_form, lap_form = grid_fisher_forms(d)
        scale = max(abs(grad_form), abs(lap_form))
        if abs(grad_form - lap_form) > budget.fisher_crosscheck_tol * scale:
            raise CrossCheckFailed(
                f"grid Fisher forms disagree: gradient {grad_form!r} vs "
                f"Laplacian {lap_form!r} (tol {budget.fisher_crosscheck_tol})"
            )
        return Estimate(grad_form, method="grid")
    raise TypeError(f"unsupported density type {type(d)!r}")


def info_state(d, budget: EstimatorBudget = DEFAULT_BUDGET) -> InfoState:
    """Bundle entropy, Fisher trace, and the derived quantities for ``d``."""
    if isinstance(d, (GaussianComponent, GaussianMixture)):
        dim = d.dim
    elif isinstance(d, GridDensity):
        dim = d.spec.dims
    else:
        raise TypeError(f"unsupported density type {type(d)!r}")
    h = entropy(d, budget)
    j = fisher_trace(d, budget)
    return InfoState(
        H=h.value,
        J=j.value,
        Phi=info_potential(h.value, j.value, dim),
        entropy_power=entropy_power(h.value, dim),
        resolution_scale=resolution_scale(j.value, dim),
        dim=dim,
        h_std_error=h.std_error,
        j_std_error=j.std_error,
    )
