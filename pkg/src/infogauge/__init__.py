"""Information diagnostics for probability densities.

The library measures two conserved coordinates of a belief distribution,
entropy H and Fisher trace J, and the scale-invariant potential built
from them.  On top of that it verifies, numerically and with independent
oracles, the laws these quantities obey: conservation under Bayesian
updating, identification with low-order spectral projections of the
surprisal, monotone dissipation under Gaussian smoothing, and the
log-count law on multi-well energy landscapes.
"""

from .bayes import (
    ConjugateGaussianModel,
    ConservationReport,
    GaussianNoiseLikelihood,
    GridBayesProblem,
    HeteroscedasticGaussianLikelihood,
    conjugate_grid_problem,
    entropy_conservation_audit,
    entropy_conservation_audit_grid,
    fisher_conservation_audit,
    grid_posterior,
    mutual_information_conjugate,
    pointwise_identity_residual,
    posterior_conjugate,
)
from .density import (
    GaussianComponent,
    GaussianMixture,
    GridDensity,
    GridSpec,
    ScalarField,
    discretize,
    grid_moments,
    load_density,
    normalize,
    rescale,
    surprisal_field,
)
from .errors import (
    AllZero,
    BudgetExceeded,
    ConfigInvalid,
    ContractFailed,
    CrossCheckFailed,
    DimensionMismatch,
    DomainTooSmall,
    FilterOrderRejected,
    InfoGaugeError,
    NonPositiveFisher,
    NotPositiveDefinite,
    PlateauWarning,
    SeparationWarning,
)
from .estimators import (
    Estimate,
    EstimatorBudget,
    InfoState,
    entropy,
    entropy_power,
    fisher_trace,
    gauge_pde_residual,
    grid_fisher_forms,
    info_potential,
    info_state,
    resolution_scale,
    scale_pde_residual,
)
from .heatflow import (
    FlowTrace,
    HessianMoment,
    LyapunovCheck,
    flow_trace,
    gaussian_smooth,
    geometric_times,
    hessian_frobenius_moment,
    lyapunov_check,
)
from .landscape import (
    ComplexityReport,
    CosineSumEnergy,
    EnergyLandscape,
    GaussianDipEnergy,
    Mode,
    ModeSet,
    PolynomialEnergy,
    SumEnergy,
    TabulatedEnergy,
    boltzmann_mixture,
    complexity_report,
    effective_mode_count,
    filter_modes,
    find_local_minima_bruteforce,
    hessian_at,
    phi_mixture_asymptotic,
    weight_entropy,
    with_hessians,
)
from .spectral import (
    RobustnessSweep,
    SpectralFilter,
    TailVarianceProfile,
    projected_conservation_audit,
    projected_statistic,
    robustness_sweep,
    tail_variance_profile,
)

__version__ = "0.1.0"
