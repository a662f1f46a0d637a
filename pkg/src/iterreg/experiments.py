"""Experiment harness: noisy-run diagnostics at desk scale, CSV + SVG outputs.

Every experiment is deterministic given its spec: replicate noise seeds are
derived from the base seed through numpy SeedSequence spawn keys, runs are
sequential, and output files are written once at the end.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baseline import lambda_grid, lasso_path
from .bias import L1, Nuclear
from .errors import BoundViolation, ContractViolation
from .linop import DenseOperator, Grad2D, MaskOperator
from .metrics import BoundInputs, stability_feas_bound, stability_gap_bound, weighted_v
from .pdsolver import CSV_VERSION, certify, initial_state, make_config, run, step
from .problems import add_noise, gen_matcomp, gen_sparse, load_problem, save_problem, tv_reformulate
from .stopping import oracle_stop
from .svgplot import line_chart

__all__ = [
    "ExperimentSpec",
    "child_seed",
    "run_semiconv",
    "run_matcomp",
    "run_stoptime",
    "run_bounds",
    "run_pathcmp",
    "run_tvdemo",
    "run_solve",
    "run_certify",
]


@dataclass
class ExperimentSpec:
    """Common experiment parameters; problem-specific ones live in ``problem``."""

    name: str
    out_dir: Path
    seed: int = 0
    eps: float = 0.99
    max_iter: int = 5000
    record_every: int = 1
    deltas: tuple = ()
    replicates: int = 10
    problem: dict = field(default_factory=dict)

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        if self.replicates < 1:
            raise ContractViolation(f"replicates must be >= 1, got {self.replicates}")
        if any(d < 0 for d in self.deltas):
            raise ContractViolation(f"noise levels must be nonnegative, got {self.deltas}")


def child_seed(base, *key):
    """Stable derived seed for replicate streams (SeedSequence spawn keys)."""
    ss = np.random.SeedSequence(entropy=int(base), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1)[0])


def write_csv(path, columns, rows):
    """Write rows (iterables) under a header line and the schema version tag."""
    with open(path, "w", newline="") as fh:
        fh.write(CSV_VERSION + "\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v)
                             for v in row])


def _sparse_problem(spec):
    params = {"n": 200, "p": 500, "s": 75, "corr": 0.2, "y_norm": 20.0}
    params.update(spec.problem)
    return gen_sparse(seed=spec.seed, **params)


def _matcomp_problem(spec):
    params = {"d": 20, "r": 5, "obs_frac_denom": 5, "y_norm": 20.0}
    params.update(spec.problem)
    return gen_matcomp(seed=spec.seed, **params)


def _distance_curves(spec, prob, J, noise_support=None, cert_kwargs=None):
    """Shared semiconvergence machinery: noisy runs against a clean certificate."""
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    cert = certify(prob.X, J, prob.y, cfg=make_config(prob.X, max_iter=500_000),
                   check_every=100, **(cert_kwargs or {}))
    cfg = make_config(prob.X, epsilon=spec.eps, max_iter=spec.max_iter,
                      record_every=spec.record_every)
    curve_rows, summary_rows, svg_series, svg_marks = [], [], [], []
    per_delta = {}
    for di, delta in enumerate(spec.deltas):
        mins = []
        for rep in range(spec.replicates):
            noisy = add_noise(prob, delta, child_seed(spec.seed, di, rep), support=noise_support)
            log = run(prob.X, J, noisy.y_delta, cfg, reference=cert)
            ks = log.ks()
            dist = log.column("dist_ref")
            dist_avg = log.column("dist_avg_ref")
            k_star, d_star = oracle_stop(log)
            first, last = float(dist[0]), float(dist[-1])
            arg = int(np.argmin(dist))
            interior = bool(0 < arg < len(dist) - 1
                            and d_star <= 0.99 * first and d_star <= 0.99 * last)
            margin = min(first, last) / d_star - 1.0 if d_star > 0 else np.inf
            mins.append(d_star)
            curve_rows.extend(
                (delta, rep, int(k), float(d), float(da))
                for k, d, da in zip(ks, dist, dist_avg))
            summary_rows.append((delta, rep, k_star, d_star, first, last,
                                 int(interior), float(margin)))
            if rep == 0:
                svg_series.append((f"delta={delta:g}", ks.astype(float), dist))
                svg_marks.append((f"k*={k_star}", float(k_star), float(d_star)))
        per_delta[delta] = {
            "mean_min_dist": float(np.mean(mins)),
            "interior": [bool(r[6]) for r in summary_rows if r[0] == delta],
            "k_star": [int(r[2]) for r in summary_rows if r[0] == delta],
            "margins": [float(r[7]) for r in summary_rows if r[0] == delta],
        }
    name = spec.name
    write_csv(spec.out_dir / f"{name}_curves.csv",
              ("delta", "replicate", "k", "dist", "dist_avg"), curve_rows)
    write_csv(spec.out_dir / f"{name}_summary.csv",
              ("delta", "replicate", "k_star", "dist_star", "dist_first",
               "dist_last", "interior", "margin"), summary_rows)
    line_chart(spec.out_dir / f"{name}.svg", svg_series, markers=svg_marks,
               title="distance to the clean solution along noisy runs",
               xlabel="iteration", ylabel="distance", logy=True)
    return {
        "certificate": {"feas_res": cert.feas_res, "subgrad_res": cert.subgrad_res},
        "per_delta": per_delta,
        "all_interior": all(bool(r[6]) for r in summary_rows),
        "mean_min_by_delta": [per_delta[d]["mean_min_dist"] for d in spec.deltas],
    }


def run_semiconv(spec):
    """Distance-to-reference curves for noisy sparse-recovery runs."""
    if not spec.deltas:
        spec.deltas = (0.6, 1.2, 2.4)
    prob = _sparse_problem(spec)
    return _distance_curves(spec, prob, L1())


def run_matcomp(spec):
    """Semiconvergence for nuclear-norm completion; noise lives on the mask.

    Off-mask noise components are annihilated by the masking adjoint and
    cannot influence any iterate, so the perturbation is drawn on the
    observed entries only.
    """
    if not spec.deltas:
        spec.deltas = (2.0, 4.0, 8.0)
    prob = _matcomp_problem(spec)
    d = prob.params["d"]
    assert isinstance(prob.X, MaskOperator)
    return _distance_curves(spec, prob, Nuclear(d, d), noise_support=prob.X.gain)


def run_stoptime(spec):
    """Oracle stopping time versus noise level, with a straight-line fit."""
    if not spec.deltas:
        spec.deltas = tuple(np.linspace(0.1, 6.0, 20))
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    prob = _sparse_problem(spec)
    J = L1()
    cert = certify(prob.X, J, prob.y, cfg=make_config(prob.X, max_iter=500_000),
                   check_every=100)
    cfg = make_config(prob.X, epsilon=spec.eps, max_iter=spec.max_iter,
                      record_every=spec.record_every)
    raw_rows, sum_rows = [], []
    mean_inv = []
    mean_k = []
    for di, delta in enumerate(spec.deltas):
        ks, ds = [], []
        for rep in range(spec.replicates):
            noisy = add_noise(prob, delta, child_seed(spec.seed, di, rep))
            log = run(prob.X, J, noisy.y_delta, cfg, reference=cert)
            k_star, d_star = oracle_stop(log)
            ks.append(k_star)
            ds.append(d_star)
            raw_rows.append((delta, rep, k_star, d_star))
        inv = [1.0 / k for k in ks]
        mean_inv.append(float(np.mean(inv)))
        mean_k.append(float(np.mean(ks)))
        sum_rows.append((delta, float(np.mean(ks)), float(np.mean(inv)),
                         float(np.std(inv))))
    deltas = np.asarray(spec.deltas, dtype=float)
    inv = np.asarray(mean_inv)
    if len(deltas) >= 2:
        design = np.vstack([deltas, np.ones_like(deltas)]).T
        (slope, intercept), *_ = np.linalg.lstsq(design, inv, rcond=None)
        pearson = float(np.corrcoef(deltas, inv)[0, 1])
        rel_intercept = float(abs(intercept) / (abs(slope) * (deltas[-1] - deltas[0])))
        fit = {"slope": float(slope), "intercept": float(intercept),
               "pearson_r": pearson, "rel_intercept": rel_intercept}
        fit_rows = [(fit["slope"], fit["intercept"], fit["pearson_r"], fit["rel_intercept"])]
        fit_line = slope * deltas + intercept
    else:
        fit = {"slope": None, "intercept": None, "pearson_r": None, "rel_intercept": None}
        fit_rows = [(None, None, None, None)]
        fit_line = None
    write_csv(spec.out_dir / "stoptime_raw.csv",
              ("delta", "replicate", "k_star", "dist_star"), raw_rows)
    write_csv(spec.out_dir / "stoptime_summary.csv",
              ("delta", "mean_kstar", "mean_inv_kstar", "std_inv_kstar"), sum_rows)
    write_csv(spec.out_dir / "stoptime_fit.csv",
              ("slope", "intercept", "pearson_r", "rel_intercept"), fit_rows)
    series = [("mean 1/k*", deltas, inv)]
    if fit_line is not None:
        series.append(("least-squares fit", deltas, fit_line))
    line_chart(spec.out_dir / "stoptime.svg", series,
               title="inverse oracle stopping time vs noise level",
               xlabel="delta", ylabel="mean 1/k*")
    return {"fit": fit, "mean_inv_kstar": mean_inv, "mean_kstar": mean_k,
            "deltas": list(map(float, deltas))}


def run_bounds(spec, eps_list=(0.25, 0.5, 0.9)):
    """Measured averaged-iterate gap and residual against their upper bounds.

    Writes one CSV per (epsilon, delta, replicate) and raises BoundViolation
    if any measurement exceeds its bound by more than 1e-8 relative.
    """
    if not spec.deltas:
        spec.deltas = (0.0,)
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    prob = _sparse_problem(spec)
    J = L1()
    cert = certify(prob.X, J, prob.y, cfg=make_config(prob.X, max_iter=500_000),
                   check_every=100)
    violations = 0
    worst_gap_ratio = worst_feas_ratio = -np.inf
    for eps in eps_list:
        cfg = make_config(prob.X, epsilon=eps, max_iter=spec.max_iter,
                          record_every=spec.record_every)
        v0 = weighted_v(-cert.w_star, -cert.theta_star, cfg.tau, cfg.sigma)
        for di, delta in enumerate(spec.deltas):
            for rep in range(spec.replicates):
                noisy = add_noise(prob, delta, child_seed(spec.seed, di, rep))
                log = run(prob.X, J, noisy.y_delta, cfg, reference=cert)
                b = BoundInputs(v0=v0, sigma=cfg.sigma, epsilon=eps, delta=delta)
                rows = []
                for row in log.rows:
                    if row.k < 1:
                        continue
                    gb = stability_gap_bound(row.k, b)
                    fb = stability_feas_bound(row.k, b)
                    feas_sq = row.res_avg_clean ** 2
                    gap_ok = row.gap_avg <= gb * (1.0 + 1e-8)
                    feas_ok = feas_sq <= fb * (1.0 + 1e-8)
                    if gb > 0:
                        worst_gap_ratio = max(worst_gap_ratio, row.gap_avg / gb)
                    if fb > 0:
                        worst_feas_ratio = max(worst_feas_ratio, feas_sq / fb)
                    violations += (not gap_ok) + (not feas_ok)
                    rows.append((row.k, row.gap_avg, gb, feas_sq, fb,
                                 int(gap_ok), int(feas_ok)))
                write_csv(spec.out_dir / f"bounds_eps{eps:g}_delta{delta:g}_rep{rep}.csv",
                          ("k", "gap_meas", "gap_bound", "feas_sq_meas",
                           "feas_bound", "gap_ok", "feas_ok"), rows)
    summary = {"violations": violations,
               "worst_gap_ratio": float(worst_gap_ratio),
               "worst_feas_ratio": float(worst_feas_ratio)}
    (spec.out_dir / "bounds_summary.json").write_text(json.dumps(summary, indent=2))
    if violations:
        raise BoundViolation(
            f"{violations} bound violations beyond 1e-8 relative; see {spec.out_dir}")
    return summary


def run_pathcmp(spec):
    """Held-out error along the penalty path versus along the iteration path.

    A single noisy instance is split into folds by rows; for each fold the
    explicit-penalty path (warm-started) and the iteration path are scored on
    the held-out rows, then averaged across folds.
    """
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    params = {"n": 400, "p": 800, "s": 120, "corr": 0.2, "y_norm": 20.0,
              "delta": 4.0, "folds": 4, "grid_count": 100, "grid_span": 3.0,
              "lasso_tol": 1e-4, "lasso_max_iter": 3000, "cp_iters": 1000}
    params.update(spec.problem)
    prob = gen_sparse(n=params["n"], p=params["p"], s=params["s"], corr=params["corr"],
                      y_norm=params["y_norm"], seed=spec.seed)
    noisy = add_noise(prob, params["delta"], child_seed(spec.seed, 17))
    y_obs = noisy.y_delta
    Xm = prob.X.matrix
    rng = np.random.default_rng(child_seed(spec.seed, 23))
    perm = rng.permutation(params["n"])
    folds = np.array_split(perm, params["folds"])
    J = L1()

    lasso_mse = np.zeros((params["folds"], params["grid_count"]))
    lasso_iters = np.zeros(params["grid_count"])
    cp_mse = np.zeros((params["folds"], params["cp_iters"] + 1))
    grid = None
    for f, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(perm, test_idx)
        X_tr = DenseOperator(Xm[train_idx])
        y_tr = y_obs[train_idx]
        X_te, y_te = Xm[test_idx], y_obs[test_idx]
        grid = lambda_grid(X_tr, y_tr, count=params["grid_count"],
                           span_decades=params["grid_span"])
        path = lasso_path(X_tr, y_tr, grid, tol=params["lasso_tol"],
                          max_iter=params["lasso_max_iter"])
        lasso_mse[f] = [float(np.mean((X_te @ w - y_te) ** 2)) for w in path.solutions]
        lasso_iters += np.asarray(path.inner_iters, dtype=float)
        path.write_csv(spec.out_dir / f"pathcmp_lasso_fold{f}.csv")

        cfg = make_config(X_tr, epsilon=spec.eps, max_iter=params["cp_iters"])
        state = initial_state(X_tr)
        cp_mse[f, 0] = float(np.mean((X_te @ state.w - y_te) ** 2))
        for k in range(1, params["cp_iters"] + 1):
            state = step(state, X_tr, J, y_tr, cfg)
            cp_mse[f, k] = float(np.mean((X_te @ state.w - y_te) ** 2))
    lasso_iters /= params["folds"]
    lasso_mean = lasso_mse.mean(axis=0)
    cp_mean = cp_mse.mean(axis=0)

    t_best = int(np.argmin(lasso_mean))
    k_best = int(np.argmin(cp_mean))
    cum_iters = float(np.cumsum(lasso_iters)[t_best])
    summary = {
        "best_lasso_mse": float(lasso_mean[t_best]),
        "best_lasso_index": t_best,
        "best_lasso_lambda": float(grid[t_best]),
        "lasso_cum_iters_to_best": cum_iters,
        "best_cp_mse": float(cp_mean[k_best]),
        "best_cp_k": k_best,
        "mse_ratio": float(cp_mean[k_best] / lasso_mean[t_best]),
        "iter_ratio": float(k_best / cum_iters),
        "lasso_end_mse": float(lasso_mean[-1]),
        "cp_end_mse": float(cp_mean[-1]),
        "zero_mse": float(np.mean(y_obs ** 2)),
    }
    fold_cols = [f"mse_fold{f}" for f in range(params["folds"])]
    write_csv(spec.out_dir / "pathcmp_lasso.csv",
              ("index", "lambda", "mse_mean", *fold_cols, "inner_iters_mean"),
              [(t, grid[t], float(lasso_mean[t]), *[float(v) for v in lasso_mse[:, t]],
                float(lasso_iters[t])) for t in range(params["grid_count"])])
    write_csv(spec.out_dir / "pathcmp_cp.csv",
              ("k", "mse_mean", *fold_cols),
              [(k, float(cp_mean[k]), *[float(v) for v in cp_mse[:, k]])
               for k in range(params["cp_iters"] + 1)])
    write_csv(spec.out_dir / "pathcmp_summary.csv",
              tuple(summary.keys()), [tuple(summary.values())])
    line_chart(spec.out_dir / "pathcmp_lasso.svg",
               [("held-out MSE", np.asarray(grid), lasso_mean)],
               markers=[(f"best={lasso_mean[t_best]:.3f}", grid[t_best], lasso_mean[t_best])],
               title="penalty path: held-out MSE", xlabel="lambda", ylabel="MSE", logx=True)
    line_chart(spec.out_dir / "pathcmp_cp.svg",
               [("held-out MSE", np.arange(params["cp_iters"] + 1, dtype=float), cp_mean)],
               markers=[(f"best={cp_mean[k_best]:.3f}", float(k_best), cp_mean[k_best])],
               title="iteration path: held-out MSE", xlabel="iteration", ylabel="MSE")
    return summary


def run_tvdemo(spec):
    """Total-variation inpainting of a piecewise-constant image via the lifted form."""
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    params = {"p1": 8, "p2": 8, "obs_frac": 0.6, "feas_tol": 1e-8, "subgrad_tol": 1e-6}
    params.update(spec.problem)
    p1, p2 = params["p1"], params["p2"]
    image = np.zeros((p1, p2))
    image[: p1 // 2, : p2 // 2] = 1.0
    image[p1 // 2:, p2 // 2:] = 2.0
    rng = np.random.default_rng(child_seed(spec.seed, 29))
    n_obs = max(1, int(round(params["obs_frac"] * p1 * p2)))
    flat = rng.choice(p1 * p2, size=n_obs, replace=False)
    mask = MaskOperator((p1, p2), [(int(f) // p2, int(f) % p2) for f in flat])
    y = mask.apply(image.ravel())
    lifted, bias, y_lifted = tv_reformulate(mask, y, p1, p2)
    cert = certify(lifted, bias, y_lifted,
                   cfg=make_config(lifted, max_iter=spec.max_iter or 200_000),
                   feas_tol=params["feas_tol"] * max(1.0, float(np.linalg.norm(y_lifted))),
                   subgrad_tol=params["subgrad_tol"], check_every=200)
    w_img = cert.w_star[: p1 * p2]
    u_grad = cert.w_star[p1 * p2:]
    grad_res = float(np.linalg.norm(Grad2D(p1, p2).apply(w_img) - u_grad))
    obs_res = float(np.linalg.norm(mask.apply(w_img) - y))
    rec_err = float(np.linalg.norm(w_img - image.ravel()))
    np.savetxt(spec.out_dir / "tv_solution.csv", w_img.reshape(p1, p2), delimiter=",")
    write_csv(spec.out_dir / "tv_summary.csv",
              ("grad_residual", "obs_residual", "recovery_error", "tv_value"),
              [(grad_res, obs_res, rec_err, float(bias(cert.w_star)))])
    summary = {"grad_residual": grad_res, "obs_residual": obs_res,
               "recovery_error": rec_err}
    return summary


def run_solve(spec):
    """Plain solve of a generated or loaded problem; writes the iterate log."""
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    prob, J = _problem_for_cli(spec)
    if spec.deltas:
        prob = add_noise(prob, spec.deltas[0], child_seed(spec.seed, 41),
                         support=prob.X.gain if isinstance(prob.X, MaskOperator) else None)
    cfg = make_config(prob.X, epsilon=spec.eps, max_iter=spec.max_iter,
                      record_every=spec.record_every)
    log = run(prob.X, J, prob.y_delta, cfg)
    log.write_csv(spec.out_dir / "log.csv")
    save_problem(prob, spec.out_dir / "problem")
    final = log.rows[-1]
    return {"final_res_noisy": final.res_noisy, "final_j": final.j_val,
            "iterations": final.k}


def run_certify(spec):
    """Certify the clean problem and write the pair plus residuals."""
    spec.out_dir.mkdir(parents=True, exist_ok=True)
    prob, J = _problem_for_cli(spec)
    cert = certify(prob.X, J, prob.y, cfg=make_config(prob.X, max_iter=spec.max_iter or 500_000),
                   check_every=100)
    np.savetxt(spec.out_dir / "cert_w.csv", cert.w_star, delimiter=",")
    np.savetxt(spec.out_dir / "cert_theta.csv", cert.theta_star, delimiter=",")
    meta = {"feas_res": cert.feas_res, "subgrad_res": cert.subgrad_res}
    (spec.out_dir / "cert_meta.json").write_text(json.dumps(meta, indent=2))
    return meta


def _problem_for_cli(spec):
    kind = spec.problem.get("kind", "sparse")
    if "load" in spec.problem:
        prob = load_problem(spec.problem["load"])
        kind = prob.kind
    elif kind == "sparse":
        prob = _sparse_problem(_strip(spec, ("n", "p", "s", "corr", "y_norm")))
    elif kind == "matcomp":
        prob = _matcomp_problem(_strip(spec, ("d", "r", "obs_frac_denom", "y_norm")))
    else:
        raise ContractViolation(f"unknown problem kind {kind!r}")
    if kind == "matcomp":
        d = prob.params["d"]
        return prob, Nuclear(d, d)
    return prob, L1()


def _strip(spec, keys):
    sub = ExperimentSpec(name=spec.name, out_dir=spec.out_dir, seed=spec.seed,
                         eps=spec.eps, max_iter=spec.max_iter,
                         record_every=spec.record_every, deltas=spec.deltas,
                         replicates=spec.replicates,
                         problem={k: v for k, v in spec.problem.items() if k in keys})
    return sub
