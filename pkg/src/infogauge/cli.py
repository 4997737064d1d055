"""Experiment runner: every audit and experiment as a reproducible command.

Usage::

    infogauge <command> --config cfg.json [--out DIR] [--seed N]
                        [--format csv|json|both]

Commands: ``info`` (density report), ``conserve`` (conservation audits),
``spectral`` (projection table, tail-variance profile, robustness sweep),
``heatflow`` (flow trace), ``landscape`` (complexity report), ``suite``
(the full acceptance corpus).

Configs are JSON with a ``version`` field; unknown keys are rejected.
Stochastic commands require an explicit seed (config or ``--seed``).  All
data files embed the config hash and seed; identical config and seed give
byte-identical outputs, with timestamps confined to ``run_metadata.json``.
Exit status: 0 on success, 1 when a declared contract fails, 2 on an
invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bayes, corpus, estimators, heatflow, landscape, spectral, suite
from .density import GridSpec, density_from_dict, discretize, load_density
from .errors import ConfigInvalid, ContractFailed, InfoGaugeError


def _require_keys(obj: dict, allowed: set, required: set, context: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigInvalid(f"{context}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigInvalid(f"{context}: missing keys {sorted(missing)}")


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    if not isinstance(config, dict) or config.get("version") != 1:
        raise ConfigInvalid('config must be a JSON object with "version": 1')
    return config


def _budget(config: dict, seed) -> estimators.EstimatorBudget:
    obj = dict(config.get("budget", {}))
    if seed is not None:
        obj.setdefault("mc_seed", int(seed))
    try:
        return estimators.EstimatorBudget.from_dict(obj)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"budget: {exc}") from exc


def _density(config: dict, base_dir: Path):
    obj = config["density"]
    if "path" in obj:
        return load_density(Path(base_dir) / obj["path"])
    return density_from_dict(obj, base_dir=base_dir)


def _grid_density(config: dict, base_dir: Path, context: str):
    """Density for grid-based commands; analytic inputs are discretized
    onto the config's grid."""
    d = _density(config, base_dir)
    if hasattr(d, "spec"):
        return d
    if "grid" not in config:
        raise ConfigInvalid(f"{context}: analytic density needs a grid to discretize onto")
    return discretize(d, _grid_spec(config["grid"]))


def _grid_spec(obj: dict) -> GridSpec:
    _require_keys(obj, {"extent", "points"}, {"extent", "points"}, "grid")
    return GridSpec(tuple(obj["extent"]), tuple(obj["points"]))


def _seed_of(config: dict, override, context: str) -> int:
    seed = override if override is not None else config.get("seed")
    if seed is None:
        raise ConfigInvalid(f"{context}: a seed is required (config or --seed)")
    return int(seed)


def _float_cols(rows):
    return [[float(v) for v in row] for row in rows]


class _Reporter:
    """Writes the data files of one command with deterministic content."""

    def __init__(self, out_dir: Path, config: dict, seed, fmt: str):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.hash = suite.config_hash(config)
        self.seed = seed
        self.fmt = fmt
        self.t0 = time.perf_counter()

    def table(self, name: str, header: list, rows: list):
        if self.fmt in ("csv", "both"):
            preamble = f"# config_sha256={self.hash} seed={self.seed}"
            text = suite._csv(",".join(header), rows, preamble=preamble)
            (self.out / f"{name}.csv").write_text(text)
        if self.fmt in ("json", "both"):
            payload = {"config_sha256": self.hash, "seed": self.seed,
                       "columns": header, "rows": rows}
            (self.out / f"{name}.json").write_text(
                json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def report(self, name: str, payload: dict):
        payload = {"config_sha256": self.hash, "seed": self.seed, **payload}
        (self.out / f"{name}.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n")

    def finish(self):
        meta = {
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            "wall_time_seconds": time.perf_counter() - self.t0,
        }
        (self.out / "run_metadata.json").write_text(json.dumps(meta, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _cmd_info(config: dict, rep: _Reporter, base_dir: Path, seed):
    _require_keys(config, {"version", "density", "budget", "seed"}, {"density"}, "info")
    budget = _budget(config, seed)
    state = estimators.info_state(_density(config, base_dir), budget)
    rep.report("info_state", {
        "H": state.H, "J": state.J, "Phi": state.Phi,
        "entropy_power": state.entropy_power,
        "resolution_scale": state.resolution_scale,
        "dim": state.dim,
        "h_std_error": state.h_std_error, "j_std_error": state.j_std_error,
    })
    return 0


def _cmd_conserve(config: dict, rep: _Reporter, base_dir: Path, seed):
    _require_keys(
        config,
        {"version", "model", "seed", "grid", "n_datasets", "run_grid_audits", "budget"},
        {"model"}, "conserve",
    )
    seed = _seed_of(config, seed, "conserve")
    obj = config["model"]
    model = bayes.load_model(Path(base_dir) / obj["path"]) if "path" in obj \
        else bayes.model_from_dict(obj)
    grid = _grid_spec(config.get("grid", {"extent": [8.0], "points": [256]}))

    re = bayes.entropy_conservation_audit(model)
    rf = bayes.fisher_conservation_audit(model)
    prob = bayes.conjugate_grid_problem(model, grid)
    rng = np.random.default_rng(seed)
    pw = bayes.pointwise_identity_residual(prob, prob.sample_dataset(rng))

    rows = [
        ("pointwise", pw.max_residual, 0.0, pw.max_residual, 0.0, 1),
        ("entropy", re.lhs, re.rhs, re.residual, re.mc_std_error, re.samples_used),
        ("fisher", rf.lhs, rf.rhs, rf.residual, rf.mc_std_error, rf.samples_used),
    ]
    reports = {"pointwise_max_residual": pw.max_residual,
               "pointwise_floored_points": pw.n_floored,
               "entropy_residual": re.residual, "fisher_residual": rf.residual}

    if config.get("run_grid_audits", False):
        n = int(config.get("n_datasets", 2000))
        rge = bayes.entropy_conservation_audit_grid(prob, n, seed)
        rgf = bayes.fisher_conservation_audit(prob, n, seed + 1)
        rows.append(("entropy_grid", rge.lhs, rge.rhs, rge.residual,
                     rge.mc_std_error, rge.samples_used))
        rows.append(("fisher_grid", rgf.lhs, rgf.rhs, rgf.residual,
                     rgf.mc_std_error, rgf.samples_used))
        for r in (rge, rgf):
            if not r.within_mc(3.0, bayes.DISCRETIZATION_ALLOWANCE):
                raise ContractFailed(f"grid {r.identity} audit outside 3 sigma")

    rep.table("conservation", ["identity", "lhs", "rhs", "residual",
                               "mc_std_error", "samples"], rows)
    rep.report("conserve", reports)
    if not (re.within(1e-10) and rf.within(1e-10)):
        raise ContractFailed("analytic conservation residual above 1e-10")
    if not pw.max_residual <= 1e-8:
        raise ContractFailed("pointwise identity residual above 1e-8")
    return 0


def _cmd_spectral(config: dict, rep: _Reporter, base_dir: Path, seed):
    _require_keys(
        config,
        {"version", "seed", "density", "grid", "orders", "cutoffs", "alpha",
         "amplitude", "n_seeds", "profile_sigma", "budget"},
        set(), "spectral",
    )
    seed = _seed_of(config, seed, "spectral")
    d = _grid_density(config, base_dir, "spectral") if "density" in config \
        else corpus.sweep_base_density()
    orders = tuple(config.get("orders", corpus.SWEEP_ORDERS))
    cutoffs = tuple(config.get("cutoffs", corpus.SWEEP_CUTOFFS))
    alpha = float(config.get("alpha", corpus.SWEEP_ALPHA))
    amplitude = float(config.get("amplitude", corpus.SWEEP_AMPLITUDE))
    n_seeds = int(config.get("n_seeds", corpus.SWEEP_SEEDS))

    h = estimators.entropy(d).value
    grad_form, lap_form = estimators.grid_fisher_forms(d)
    proj_rows = []
    for m in orders:
        stat = spectral.projected_statistic(d, spectral.SpectralFilter(m))
        proj_rows.append((m, stat))
    rep.table("projections", ["m", "statistic"], proj_rows)

    sigma = float(config.get("profile_sigma", 1.0))
    k = np.linspace(0.05, 5.0, 256)
    prof_rows = []
    for m in orders:
        prof = spectral.tail_variance_profile(alpha, sigma, m, k)
        prof_rows.append((m, prof.peak_k, prof.analytic_peak()))
    rep.table("tail_variance_peaks", ["m", "peak_k", "analytic_peak"], prof_rows)

    sweep = spectral.robustness_sweep(d, alpha, amplitude, cutoffs, orders,
                                      seed=seed, n_seeds=n_seeds)
    rep.table("sweep_rows", ["m", "cutoff", "seed", "statistic"],
              [(int(r["order"]), float(r["cutoff"]), int(r["seed"]), float(r["statistic"]))
               for r in sweep.rows])
    rep.table("sweep_summary", ["m", "cutoff", "mean", "variance"],
              [(m, c, sweep.means[(m, c)], sweep.variances[(m, c)])
               for m in orders for c in cutoffs])
    rep.report("spectral", {
        "entropy": h, "fisher_gradient": grad_form, "fisher_laplacian": lap_form,
        "sensitivity": {str(m): sweep.sensitivity[m] for m in orders},
    })

    m_stats = dict(proj_rows)
    if 0 in m_stats and abs(m_stats[0] - h) > 1e-9:
        raise ContractFailed("order-0 projection does not match entropy")
    if 1 in m_stats and abs(m_stats[1] - lap_form) > 1e-9:
        raise ContractFailed("order-1 projection does not match Laplacian Fisher")
    return 0


def _cmd_heatflow(config: dict, rep: _Reporter, base_dir: Path, seed):
    _require_keys(
        config,
        {"version", "seed", "density", "grid", "times", "budget"},
        {"density", "times"}, "heatflow",
    )
    d = _grid_density(config, base_dir, "heatflow")
    tobj = dict(config["times"])
    _require_keys(tobj, {"t_min", "t_final", "ratio"}, {"t_min", "t_final"}, "times")
    times = heatflow.geometric_times(float(tobj["t_min"]), float(tobj["t_final"]),
                                     float(tobj.get("ratio", 1.04)))
    trace = heatflow.flow_trace(d, times)
    rows = []
    for i, t in enumerate(times):
        db = trace.debruijn_residuals[i - 1] if i > 0 else 0.0
        fi = trace.fisher_dissipation_residuals[i - 1] if i > 0 else 0.0
        s = trace.states[i]
        rows.append((float(t), s.H, s.J, s.Phi, float(db), float(fi)))
    rep.table("flow_trace", ["t", "H", "J", "Phi", "debruijn_resid", "fisher_resid"], rows)
    ly = heatflow.lyapunov_check(trace)
    j = np.array([s.J for s in trace.states])
    rep.report("heatflow", {
        "lyapunov_monotone": ly.monotone,
        "max_phi_violation": ly.max_violation,
        "j_strictly_decreasing": bool(np.all(np.diff(j) < 0)),
        "phi_final": trace.states[-1].Phi,
        "trace_bound_min_margin": float(trace.trace_bound_margins.min()),
    })
    if not ly.monotone:
        raise ContractFailed("potential not monotone along the flow")
    if not np.all(np.diff(j) < 0):
        raise ContractFailed("Fisher trace not strictly decreasing along the flow")
    return 0


def _cmd_landscape(config: dict, rep: _Reporter, base_dir: Path, seed):
    _require_keys(
        config,
        {"version", "seed", "landscape", "grid", "delta", "epsilon", "beta", "budget"},
        {"landscape", "grid", "delta", "epsilon"}, "landscape",
    )
    seed = _seed_of(config, seed, "landscape")
    land = landscape.landscape_from_dict(config["landscape"])
    spec = _grid_spec(config["grid"])
    budget = _budget(config, seed)
    report = landscape.complexity_report(
        land, spec, delta=float(config["delta"]), epsilon=float(config["epsilon"]),
        beta=float(config["beta"]) if "beta" in config else None, budget=budget,
    )
    rep.report("landscape", {
        "phi_mixture": report.phi_mixture,
        "phi_direct": report.phi_direct,
        "log_nlm": report.log_nlm,
        "n_lm": report.n_lm,
        "weight_entropy": report.weight_entropy,
        "curvature_correction": report.curvature_correction,
        "series_residual": report.series_residual,
        "error_budget": report.error_budget,
        "separation_ok": report.separation_ok,
        "minima": [
            {"location": [float(v) for v in m.location], "energy": m.energy,
             "weight": float(w)}
            for m, w in zip(report.modes.minima, report.modes.weights)
        ],
        "grid": {"extent": list(spec.extent), "points": list(spec.points)},
    })
    return 0


def _cmd_suite(config: dict, rep: _Reporter, base_dir: Path, seed):
    _require_keys(config, suite.SUITE_CONFIG_KEYS, set(), "suite")
    cfg = dict(config)
    cfg["seed"] = _seed_of(config, seed, "suite")
    results = suite.run_suite(cfg, rep.out)
    for r in results:
        print(r.line())
    failed = [r for r in results if not (r.passed and r.runtime_ok)]
    if failed:
        first = failed[0]
        raise ContractFailed(
            f"criterion {first.number} ({first.name}) failed: {first.details}"
        )
    return 0


COMMANDS = {
    "info": _cmd_info,
    "conserve": _cmd_conserve,
    "spectral": _cmd_spectral,
    "heatflow": _cmd_heatflow,
    "landscape": _cmd_landscape,
    "suite": _cmd_suite,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="infogauge",
        description="Information diagnostics of probability densities: "
                    "conservation audits, spectral projections, smoothing "
                    "flows, and landscape complexity.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--format", choices=["csv", "json", "both"], default="csv",
                        dest="fmt", help="table output format")
    args = parser.parse_args(argv)

    try:
        config = _load_config(args.config)
        seed = args.seed if args.seed is not None else config.get("seed")
        rep = _Reporter(Path(args.out), config, seed, args.fmt)
        status = COMMANDS[args.command](config, rep, Path(args.config).parent, args.seed)
        rep.finish()
        return status
    except ConfigInvalid as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return 2
    except ContractFailed as exc:
        print(f"contract failed: {exc}", file=sys.stderr)
        return 1
    except InfoGaugeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
