"""The acceptance corpus: every numerical contract as a runnable check.

Each criterion function returns a :class:`CriterionResult` plus the data
files it produced; ``run_suite`` executes all of them, writes the files,
and optionally replays the whole run to verify byte-level determinism.
Data files are deterministic given (config, seed): timestamps and wall
times live in a separate metadata file.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import bayes, corpus, estimators, heatflow, landscape, spectral
from .density import GaussianComponent, GridSpec, discretize, rescale

RUNTIME_LIMITS = {
    1: 5.0, 2: 1.0, 3: 120.0, 4: 60.0, 5: 60.0, 6: 120.0, 7: 5.0, 8: 180.0,
}

CRITERION_NAMES = {
    1: "gaussian_null",
    2: "conservation_analytic",
    3: "conservation_grid_mc",
    4: "spectral_identification",
    5: "robustness_selection",
    6: "heat_flow_laws",
    7: "scale_invariance",
    8: "landscape_law",
    9: "suite_determinism",
}


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict
    runtime_seconds: float

    @property
    def runtime_ok(self) -> bool:
        limit = RUNTIME_LIMITS.get(self.number)
        return limit is None or self.runtime_seconds < limit

    def line(self) -> str:
        status = "PASS" if (self.passed and self.runtime_ok) else "FAIL"
        return (f"[{status}] criterion {self.number} ({self.name}) "
                f"in {self.runtime_seconds:.2f}s")


def _fmt(x) -> str:
    return repr(float(x))


def _csv(header: str, rows, preamble: str = "") -> str:
    lines = []
    if preamble:
        lines.append(preamble)
    lines.append(header)
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _sub_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence(master).spawn(index + 1)[index].generate_state(1)[0])


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def criterion_gaussian_null():
    """Isotropic Gaussians have zero potential: analytic within 1e-9,
    grid-estimated within 5e-3 at 256 points per axis."""
    rows = []
    ok = True
    for dim in (1, 2, 3):
        for sigma in (0.5, 1.0, 3.0):
            comp = GaussianComponent(np.zeros(dim), sigma**2 * np.eye(dim))
            phi = estimators.info_state(comp).Phi
            ok &= abs(phi) <= 1e-9
            phi_grid = math.nan
            if dim <= 2:
                spec = GridSpec((8.0 * sigma,) * dim, (256,) * dim)
                phi_grid = estimators.info_state(discretize(comp, spec)).Phi
                ok &= abs(phi_grid) <= 5e-3
            rows.append((dim, float(sigma), float(phi), float(phi_grid)))
    details = {
        "max_abs_phi_analytic": max(abs(r[2]) for r in rows),
        "max_abs_phi_grid": max(abs(r[3]) for r in rows if not math.isnan(r[3])),
    }
    files = {"gaussian_null.csv": _csv("dim,sigma,phi_analytic,phi_grid", rows)}
    return ok, details, files


def criterion_conservation_analytic(seed: int):
    """100 randomized conjugate models keep the entropy and Fisher
    identities to 1e-10, and the posterior Fisher never drops below the
    prior Fisher."""
    rng = np.random.default_rng(seed)
    max_entropy = 0.0
    max_fisher = 0.0
    ok = True
    rows = []
    for i in range(100):
        dim = 1 + i % 3
        model = corpus.random_conjugate_model(rng, dim)
        re = bayes.entropy_conservation_audit(model)
        rf = bayes.fisher_conservation_audit(model)
        max_entropy = max(max_entropy, abs(re.residual))
        max_fisher = max(max_fisher, abs(rf.residual))
        ok &= re.within(1e-10) and rf.within(1e-10)
        post = bayes.posterior_conjugate(model, np.zeros((model.n_obs, dim)))
        ok &= float(np.trace(post.precision)) >= float(np.trace(model.prior.precision))
        rows.append((i, dim, re.residual, rf.residual))
    details = {"max_entropy_residual": max_entropy, "max_fisher_residual": max_fisher}
    files = {"conservation_analytic.csv": _csv("model,dim,entropy_residual,fisher_residual", rows)}
    return ok, details, files


def criterion_conservation_grid(seed: int, n_datasets: int = 2000):
    """Pointwise identity at 1e-8 and the two projected identities within
    3 Monte Carlo standard errors on grid problems."""
    problems = {
        "conjugate": corpus.conjugate_on_grid(),
        "bimodal": corpus.bimodal_prior_problem(),
    }
    ok = True
    rows = []
    pointwise_max = 0.0
    for pi, (name, prob) in enumerate(problems.items()):
        s_point = _sub_seed(seed, 3 * pi)
        rngs = bayes._spawn_rngs(s_point, 10)
        pw = max(
            bayes.pointwise_identity_residual(prob, prob.sample_dataset(rng)).max_residual
            for rng in rngs
        )
        pointwise_max = max(pointwise_max, pw)
        ok &= pw <= 1e-8
        re = bayes.entropy_conservation_audit_grid(prob, n_datasets, _sub_seed(seed, 3 * pi + 1))
        rf = bayes.fisher_conservation_audit(prob, n_datasets, _sub_seed(seed, 3 * pi + 2))
        ok &= re.within_mc(3.0, bayes.DISCRETIZATION_ALLOWANCE)
        ok &= rf.within_mc(3.0, bayes.DISCRETIZATION_ALLOWANCE)
        rows.append((name, "pointwise", pw, 0.0, pw, 0.0, 10))
        for r in (re, rf):
            rows.append((name, r.identity, r.lhs, r.rhs, r.residual, r.mc_std_error,
                         r.samples_used))
    details = {"pointwise_max": pointwise_max, "n_datasets": n_datasets}
    files = {
        "conservation_grid.csv": _csv(
            "problem,identity,lhs,rhs,residual,mc_std_error,samples", rows
        )
    }
    return ok, details, files


def criterion_spectral_identification():
    """Order-0 projection is the entropy (1e-9) and order-1 the
    Laplacian-form Fisher (1e-9) / gradient-form Fisher (1%) on every
    corpus grid."""
    rows = []
    ok = True
    for name, d in corpus.grid_corpus().items():
        h = estimators.entropy(d).value
        grad_form, lap_form = estimators.grid_fisher_forms(d)
        m0 = spectral.projected_statistic(d, spectral.SpectralFilter(0))
        m1 = spectral.projected_statistic(d, spectral.SpectralFilter(1))
        d0 = abs(m0 - h)
        d1 = abs(m1 - lap_form)
        rel = abs(m1 - grad_form) / abs(grad_form)
        ok &= d0 <= 1e-9 and d1 <= 1e-9 and rel <= 0.01
        rows.append((name, h, m0, d0, lap_form, m1, d1, grad_form, rel))
    details = {
        "max_m0_delta": max(r[3] for r in rows),
        "max_m1_delta": max(r[6] for r in rows),
        "max_gradient_rel": max(r[8] for r in rows),
    }
    files = {
        "identification.csv": _csv(
            "density,entropy,m0,m0_delta,lap_fisher,m1,m1_delta,grad_fisher,grad_rel",
            rows,
        )
    }
    return ok, details, files


def criterion_robustness(seed: int, n_seeds: int = corpus.SWEEP_SEEDS):
    """Cutoff sensitivity of orders {0,1} at least 10x below orders {2,3};
    analytic tail-variance peaks in the right place."""
    d = corpus.sweep_base_density()
    sweep = spectral.robustness_sweep(
        d, corpus.SWEEP_ALPHA, corpus.SWEEP_AMPLITUDE,
        cutoffs=corpus.SWEEP_CUTOFFS, orders=corpus.SWEEP_ORDERS,
        seed=seed, n_seeds=n_seeds,
    )
    robust = max(sweep.sensitivity[0], sweep.sensitivity[1])
    fragile = min(sweep.sensitivity[2], sweep.sensitivity[3])
    ratio = fragile / robust
    ok = ratio >= 10.0

    k = np.linspace(0.05, 5.0, 256)
    step = float(k[1] - k[0])
    peak_rows = []
    for m in corpus.SWEEP_ORDERS:
        prof = spectral.tail_variance_profile(corpus.SWEEP_ALPHA, 1.0, m, k)
        target = prof.analytic_peak()
        gap = abs(prof.peak_k - target)
        ok &= gap <= step
        peak_rows.append((m, prof.peak_k, target, gap))

    row_data = [(int(r["order"]), float(r["cutoff"]), int(r["seed"]), float(r["statistic"]))
                for r in sweep.rows]
    summary = [
        (m, c, sweep.means[(m, c)], sweep.variances[(m, c)])
        for m in sweep.orders for c in sweep.cutoffs
    ]
    details = {
        "sensitivity": {str(m): sweep.sensitivity[m] for m in sweep.orders},
        "ratio": ratio,
    }
    files = {
        "sweep_rows.csv": _csv("m,cutoff,seed,statistic", row_data),
        "sweep_summary.csv": _csv("m,cutoff,mean,variance", summary),
        "tail_variance_peaks.csv": _csv("m,peak_k,analytic_peak,gap", peak_rows),
    }
    return ok, details, files


def criterion_heat_flow():
    """Dissipation laws on the 5-density corpus: diffusion entropy rate
    within 2%, Fisher dissipation within 5%, J strictly decreasing, the
    potential nonincreasing and essentially zero at the final time, and
    the Hessian-trace inequality at every recorded time."""
    times = heatflow.geometric_times(corpus.FLOW_T_MIN, corpus.FLOW_T_FINAL,
                                     corpus.FLOW_RATIO)
    ok = True
    files = {}
    summary = []
    for name, d in corpus.flow_corpus().items():
        tr = heatflow.flow_trace(d, times)
        j = np.array([s.J for s in tr.states])
        phi = np.array([s.Phi for s in tr.states])
        ly = heatflow.lyapunov_check(tr)
        checks = {
            "debruijn_rel_max": float(tr.debruijn_relative.max()),
            "fisher_rel_max": float(tr.fisher_relative.max()),
            "j_strictly_decreasing": bool(np.all(np.diff(j) < 0)),
            "phi_monotone": ly.monotone,
            "phi_final": float(phi[-1]),
            "trace_bound_min_margin": float(tr.trace_bound_margins.min()),
        }
        ok &= checks["debruijn_rel_max"] <= 0.02
        ok &= checks["fisher_rel_max"] <= 0.05
        ok &= checks["j_strictly_decreasing"]
        ok &= checks["phi_monotone"]
        ok &= checks["phi_final"] <= 0.02
        ok &= checks["trace_bound_min_margin"] >= -heatflow.TRACE_BOUND_SLACK
        summary.append((name, checks["debruijn_rel_max"], checks["fisher_rel_max"],
                        checks["phi_final"], checks["trace_bound_min_margin"]))
        rows = []
        for i, t in enumerate(tr.times):
            db = tr.debruijn_residuals[i - 1] if i > 0 else 0.0
            fi = tr.fisher_dissipation_residuals[i - 1] if i > 0 else 0.0
            s = tr.states[i]
            rows.append((float(t), s.H, s.J, s.Phi, float(db), float(fi)))
        files[f"flow_{name}.csv"] = _csv("t,H,J,Phi,debruijn_resid,fisher_resid", rows)
    files["flow_summary.csv"] = _csv(
        "density,debruijn_rel_max,fisher_rel_max,phi_final,trace_bound_min_margin", summary
    )
    details = {name: vals for name, *vals in summary}
    return ok, details, files


def criterion_scale_invariance(seed: int):
    """The potential is unchanged under coordinate rescaling, and its
    defining first-order PDE holds at random (H, J, N) points."""
    tight = estimators.EstimatorBudget(quad_rel_tol=1e-12)
    targets = {
        "unit_gaussian": GaussianComponent([0.0], [[1.0]]),
        "diag_gaussian_2d": GaussianComponent([0.0, 0.0], np.diag([1.0, 4.0])),
        "gaussian_3d": GaussianComponent([0.5, -0.5, 0.0], np.diag([1.0, 2.0, 0.5])),
        "bimodal": corpus.mixture_1d((0.5, -3.0, 1.0), (0.5, 3.0, 1.0)),
        "skewed": corpus.mixture_1d((0.7, 0.0, 1.0), (0.3, 2.5, 2.0)),
    }
    ok = True
    rows = []
    max_analytic = 0.0
    for name, d in targets.items():
        phi0 = estimators.info_state(d, tight).Phi
        for a in (0.1, 0.5, 3.0):
            phi_a = estimators.info_state(rescale(d, a), tight).Phi
            gap = abs(phi_a - phi0)
            max_analytic = max(max_analytic, gap)
            ok &= gap <= 1e-9
            rows.append((name, float(a), "analytic", gap))

    grid_targets = {
        "bimodal": (targets["bimodal"], 12.0),
        "skewed": (targets["skewed"], 16.0),
    }
    max_grid = 0.0
    for name, (mix, extent) in grid_targets.items():
        base = discretize(mix, GridSpec((extent,), (256,)))
        phi0 = estimators.info_state(base).Phi
        for a in (0.1, 0.5, 3.0):
            # re-discretize the pushforward on the scaled box
            re_spec = GridSpec((a * extent,), (256,))
            phi_a = estimators.info_state(discretize(rescale(mix, a), re_spec)).Phi
            gap = abs(phi_a - phi0)
            max_grid = max(max_grid, gap)
            ok &= gap <= 1e-2
            rows.append((name, float(a), "grid", gap))

    rng = np.random.default_rng(seed)
    max_pde = 0.0
    for _ in range(20):
        h = float(rng.uniform(-1.0, 4.0))
        j = float(np.exp(rng.uniform(np.log(1e-2), np.log(1e2))))
        dim = int(rng.integers(1, 4))
        resid = abs(estimators.gauge_pde_residual(h, j, dim, fd_step=1e-6))
        max_pde = max(max_pde, resid)
        ok &= resid <= 1e-6
    details = {
        "max_analytic_gap": max_analytic,
        "max_grid_gap": max_grid,
        "max_pde_residual": max_pde,
    }
    files = {"scale_invariance.csv": _csv("density,a,route,phi_gap", rows)}
    return ok, details, files


def criterion_landscape_law(seed: int):
    """The potential counts effective wells: log-count law within 0.1,
    unit slope within 0.05, asymptotic route within 0.05 of the direct
    one, and quadratic suppression of the curvature correction."""
    beta, delta, eps = 200.0, 0.01, 0.01
    phis, lognlms = [], []
    reports = []
    ok = True
    budget = estimators.EstimatorBudget(mc_seed=seed)
    for n_wells in (2, 4, 8, 16):
        land, spec = corpus.cosine_wells(n_wells, beta=beta)
        rep = landscape.complexity_report(land, spec, delta=delta, epsilon=eps,
                                          budget=budget)
        ok &= abs(rep.phi_mixture - rep.log_nlm) <= 0.1
        ok &= abs(rep.phi_mixture - rep.phi_direct) <= 0.05
        ok &= rep.separation_ok
        phis.append(rep.phi_mixture)
        lognlms.append(rep.log_nlm)
        reports.append({
            "n_wells": n_wells,
            "n_lm": rep.n_lm,
            "phi_mixture": rep.phi_mixture,
            "phi_direct": rep.phi_direct,
            "log_nlm": rep.log_nlm,
            "weight_entropy": rep.weight_entropy,
            "curvature_correction": rep.curvature_correction,
            "series_residual": rep.series_residual,
            "error_budget": rep.error_budget,
            "grid_points": int(spec.points[0]),
            "extent": float(spec.extent[0]),
        })
    slope = float(np.polyfit(lognlms, phis, 1)[0])
    ok &= abs(slope - 1.0) <= 0.05

    # unequal-Hessian control: doubling beta must shrink the correction >= 3x
    def correction(b: float) -> float:
        modes = landscape.ModeSet((
            landscape.Mode(np.array([0.0]), 0.0, np.array([[5.0]])),
            landscape.Mode(np.array([50.0]), 0.0, np.array([[20.0]])),
        ))
        return abs(landscape.phi_mixture_asymptotic(modes, b, delta).curvature_correction)

    c1, c2 = correction(beta), correction(2.0 * beta)
    suppression = c1 / c2
    ok &= suppression >= 3.0

    details = {"slope": slope, "curvature_suppression": suppression}
    payload = {
        "beta": beta, "delta": delta, "epsilon": eps, "seed": seed,
        "slope": slope, "curvature_suppression": suppression,
        "reports": reports,
    }
    files = {"landscape_reports.json": json.dumps(payload, indent=2, sort_keys=True) + "\n"}
    return ok, details, files


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

SUITE_CONFIG_KEYS = {"version", "seed", "n_datasets", "sweep_seeds", "check_determinism"}


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _run_criteria(config: dict):
    seed = int(config["seed"])
    n_datasets = int(config.get("n_datasets", 2000))
    sweep_seeds = int(config.get("sweep_seeds", corpus.SWEEP_SEEDS))
    runners = [
        (1, lambda: criterion_gaussian_null()),
        (2, lambda: criterion_conservation_analytic(_sub_seed(seed, 0))),
        (3, lambda: criterion_conservation_grid(_sub_seed(seed, 1), n_datasets)),
        (4, lambda: criterion_spectral_identification()),
        (5, lambda: criterion_robustness(_sub_seed(seed, 2), sweep_seeds)),
        (6, lambda: criterion_heat_flow()),
        (7, lambda: criterion_scale_invariance(_sub_seed(seed, 3))),
        (8, lambda: criterion_landscape_law(_sub_seed(seed, 4))),
    ]
    results = []
    all_files = {}
    for number, fn in runners:
        t0 = time.perf_counter()
        ok, details, files = fn()
        elapsed = time.perf_counter() - t0
        results.append(CriterionResult(number, CRITERION_NAMES[number], bool(ok),
                                       details, elapsed))
        all_files.update(files)
    return results, all_files


def _write_files(out_dir: Path, files: dict, preamble: str, chash: str, seed: int):
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        if name.endswith(".csv"):
            content = preamble + content
        elif name.endswith(".json"):
            obj = json.loads(content)
            obj.setdefault("config_sha256", chash)
            obj.setdefault("master_seed", seed)
            content = json.dumps(obj, indent=2, sort_keys=True) + "\n"
        (out_dir / name).write_text(content)


def run_suite(config: dict, out_dir, check_determinism: bool = None):
    """Run the full acceptance corpus and write its reports.

    Returns the list of criterion results (including the determinism
    criterion when enabled).  Exit semantics are left to the caller.
    """
    out_dir = Path(out_dir)
    chash = config_hash(config)
    seed = int(config["seed"])
    preamble = f"# config_sha256={chash} seed={seed}\n"
    if check_determinism is None:
        check_determinism = bool(config.get("check_determinism", True))

    t_start = time.perf_counter()
    results, files = _run_criteria(config)
    _write_files(out_dir, files, preamble, chash, seed)

    if check_determinism:
        t0 = time.perf_counter()
        _, replay_files = _run_criteria(config)
        replay_dir = out_dir / "replay"
        _write_files(replay_dir, replay_files, preamble, chash, seed)
        mismatched = sorted(
            name for name in files
            if (out_dir / name).read_bytes() != (replay_dir / name).read_bytes()
        )
        results.append(CriterionResult(
            9, CRITERION_NAMES[9], not mismatched,
            {"files_compared": len(files), "mismatched": mismatched},
            time.perf_counter() - t0,
        ))

    summary = {
        "version": 1,
        "config_sha256": chash,
        "seed": seed,
        "all_passed": all(r.passed and r.runtime_ok for r in results),
        "criteria": [
            {"number": r.number, "name": r.name, "passed": r.passed,
             "runtime_ok": r.runtime_ok, "details": r.details}
            for r in results
        ],
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    metadata = {
        "wall_time_seconds": time.perf_counter() - t_start,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "runtimes": {r.name: r.runtime_seconds for r in results},
    }
    (out_dir / "run_metadata.json").write_text(json.dumps(metadata, indent=2) + "\n")
    return results
