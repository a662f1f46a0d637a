"""Primal-dual iteration for min J(w) subject to X w = y, with diagnostics.

The update, from (w_k, theta_k, theta_{k-1}):

    w_{k+1}     = prox_{tau J}( w_k - tau * X^T (2 theta_k - theta_{k-1}) )
    theta_{k+1} = theta_k + sigma * (X w_{k+1} - y_obs)

with w_0 and theta_0 = theta_{-1} given (all zero by default) and step sizes
constrained by sigma * tau * ||X||^2 <= epsilon < 1. Running averages over
w_1..w_k and theta_1..theta_k are maintained alongside, since the rate and
stability guarantees attach to the averaged iterates.

``run`` records per-iteration diagnostics into an :class:`IterateLog`;
``certify`` drives the iteration on clean data until the pair satisfies the
saddle-point conditions (feasibility plus subgradient inclusion) at tight
tolerances, producing the reference used by all gap and distance metrics.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import CertificationFailure, ContractViolation, NumericalFailure
from .linop import as_vector

__all__ = [
    "SolverConfig",
    "make_config",
    "PdState",
    "initial_state",
    "step",
    "run",
    "certify",
    "SaddleCertificate",
    "LogRow",
    "IterateLog",
    "CSV_VERSION",
]

CSV_VERSION = "# iterreg-csv v1"


@dataclass(frozen=True)
class SolverConfig:
    """Step sizes and iteration budget for one solver run.

    ``seed`` is reserved for future randomized variants; the iteration itself
    is deterministic. Use :func:`make_config` to derive valid step sizes from
    an operator.
    """

    epsilon: float
    tau: float
    sigma: float
    max_iter: int
    seed: int = 0
    record_every: int = 1

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ContractViolation(f"epsilon must lie in (0,1), got {self.epsilon}")
        if self.tau <= 0 or self.sigma <= 0:
            raise ContractViolation(f"step sizes must be positive, got tau={self.tau}, sigma={self.sigma}")
        if self.max_iter < 0:
            raise ContractViolation(f"max_iter must be nonnegative, got {self.max_iter}")
        if self.record_every < 1:
            raise ContractViolation(f"record_every must be >= 1, got {self.record_every}")


def make_config(X, epsilon=0.99, max_iter=5000, record_every=1, seed=0, tau=None, sigma=None):
    """Build a SolverConfig whose steps satisfy sigma*tau*||X||^2 <= epsilon.

    The norm estimate is inflated by 1.01 so that power-iteration
    underestimation cannot break the step-size condition. By default the
    symmetric choice tau = sigma = sqrt(epsilon)/nu is used; passing one of
    tau/sigma derives the other from the equality sigma*tau*nu^2 = epsilon.
    """
    nu = 1.01 * X.norm_est()
    if nu == 0.0:
        raise ContractViolation("cannot pick step sizes for the zero operator")
    if tau is None and sigma is None:
        tau = sigma = np.sqrt(epsilon) / nu
    elif tau is None:
        tau = epsilon / (nu * nu * sigma)
    elif sigma is None:
        sigma = epsilon / (nu * nu * tau)
    cfg = SolverConfig(epsilon=float(epsilon), tau=float(tau), sigma=float(sigma),
                       max_iter=int(max_iter), seed=int(seed), record_every=int(record_every))
    validate_config(cfg, X)
    return cfg


def validate_config(cfg, X):
    """Check sigma*tau*(1.01*||X||)^2 <= epsilon, with float slack."""
    nu = 1.01 * X.norm_est()
    if cfg.sigma * cfg.tau * nu * nu > cfg.epsilon * (1.0 + 1e-9):
        raise ContractViolation(
            f"step sizes violate sigma*tau*||X||^2 <= epsilon: "
            f"{cfg.sigma * cfg.tau * nu * nu:.6g} > {cfg.epsilon}")


@dataclass
class PdState:
    """One primal-dual iterate plus running sums for the averaged iterates."""

    w: np.ndarray
    theta: np.ndarray
    theta_prev: np.ndarray
    k: int
    w_sum: np.ndarray
    theta_sum: np.ndarray
    xw: np.ndarray
    xw_sum: np.ndarray

    @property
    def w_avg(self):
        return self.w.copy() if self.k == 0 else self.w_sum / self.k

    @property
    def theta_avg(self):
        return self.theta.copy() if self.k == 0 else self.theta_sum / self.k

    @property
    def xw_avg(self):
        return self.xw.copy() if self.k == 0 else self.xw_sum / self.k


def initial_state(X, w0=None, theta0=None):
    """State at k = 0; defaults to the all-zero initialization."""
    w0 = np.zeros(X.in_dim) if w0 is None else as_vector(w0, X.in_dim, "w0").copy()
    theta0 = np.zeros(X.out_dim) if theta0 is None else as_vector(theta0, X.out_dim, "theta0").copy()
    xw = X.apply(w0)
    return PdState(w=w0, theta=theta0.copy(), theta_prev=theta0.copy(), k=0,
                   w_sum=np.zeros_like(w0), theta_sum=np.zeros_like(theta0),
                   xw=xw, xw_sum=np.zeros_like(theta0))


def step(state, X, J, y_obs, cfg):
    """One full primal-dual update; returns a new state with k incremented."""
    w_new = J.prox(cfg.tau, state.w - cfg.tau * X.adjoint(2.0 * state.theta - state.theta_prev))
    xw_new = X.apply(w_new)
    theta_new = state.theta + cfg.sigma * (xw_new - y_obs)
    if not (np.all(np.isfinite(w_new)) and np.all(np.isfinite(theta_new))):
        raise NumericalFailure(f"non-finite iterate at iteration {state.k + 1}")
    return PdState(
        w=w_new, theta=theta_new, theta_prev=state.theta, k=state.k + 1,
        w_sum=state.w_sum + w_new, theta_sum=state.theta_sum + theta_new,
        xw=xw_new, xw_sum=state.xw_sum + xw_new)


@dataclass(frozen=True)
class SaddleCertificate:
    """A numerically certified saddle pair for the clean problem (X, J, y).

    ``w_star`` interpolates the clean data up to ``feas_res`` and
    ``-X^T theta_star`` is a subgradient of J at ``w_star`` up to
    ``subgrad_res`` (measured as a prox fixed-point residual). The clean data
    vector is kept so noisy runs can report distances and gaps against the
    noiseless problem.
    """

    w_star: np.ndarray
    theta_star: np.ndarray
    feas_res: float
    subgrad_res: float
    y: np.ndarray


LOG_COLUMNS = ("k", "res_clean", "res_noisy", "j_val", "dist_ref", "gap",
               "bregman", "res_avg_clean", "dist_avg_ref", "gap_avg")


@dataclass(frozen=True)
class LogRow:
    k: int
    res_clean: float
    res_noisy: float
    j_val: float
    dist_ref: float | None = None
    gap: float | None = None
    bregman: float | None = None
    res_avg_clean: float | None = None
    dist_avg_ref: float | None = None
    gap_avg: float | None = None


@dataclass
class IterateLog:
    """Recorded diagnostics, strictly increasing in k."""

    rows: list = field(default_factory=list)

    def append(self, row):
        if self.rows and row.k <= self.rows[-1].k:
            raise ContractViolation(f"log rows must increase in k, got {row.k} after {self.rows[-1].k}")
        self.rows.append(row)

    def column(self, name):
        """Column as a float array; missing values become NaN."""
        if name not in LOG_COLUMNS:
            raise ContractViolation(f"unknown log column {name!r}")
        return np.array([np.nan if getattr(r, name) is None else getattr(r, name)
                         for r in self.rows], dtype=float)

    def ks(self):
        return np.array([r.k for r in self.rows], dtype=int)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(CSV_VERSION + "\n")
            writer = csv.writer(fh)
            writer.writerow(LOG_COLUMNS)
            for r in self.rows:
                row = []
                for c in LOG_COLUMNS:
                    v = getattr(r, c)
                    row.append("" if v is None else (v if c == "k" else repr(v)))
                writer.writerow(row)

    @classmethod
    def read_csv(cls, path):
        log = cls()
        with open(path, newline="") as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
        reader = csv.DictReader(lines)
        for rec in reader:
            vals = {c: (None if rec[c] == "" else float(rec[c])) for c in LOG_COLUMNS if c != "k"}
            log.append(LogRow(k=int(rec["k"]), **vals))
        return log

    def __len__(self):
        return len(self.rows)


class _Recorder:
    """Builds log rows; gap/bregman columns are raw Lagrangian differences."""

    def __init__(self, X, J, y_obs, reference):
        self.X, self.J, self.y_obs = X, J, y_obs
        self.ref = reference
        if reference is not None:
            self.y_clean = reference.y
            self.j_star = J(reference.w_star)
            self.r_star = X.apply(reference.w_star) - self.y_clean
            self.g_ref = -X.adjoint(reference.theta_star)
        else:
            self.y_clean = y_obs

    def row(self, state):
        xw = state.xw
        j_val = self.J(state.w)
        res_noisy = float(np.linalg.norm(xw - self.y_obs))
        res_clean = float(np.linalg.norm(xw - self.y_clean))
        if self.ref is None:
            return LogRow(k=state.k, res_clean=res_clean, res_noisy=res_noisy, j_val=j_val)
        ref = self.ref
        w_avg, theta_avg, xw_avg = state.w_avg, state.theta_avg, state.xw_avg
        gap = (j_val + ref.theta_star @ (xw - self.y_clean)
               - self.j_star - state.theta @ self.r_star)
        gap_avg = (self.J(w_avg) + ref.theta_star @ (xw_avg - self.y_clean)
                   - self.j_star - theta_avg @ self.r_star)
        breg = j_val - self.j_star - self.g_ref @ (state.w - ref.w_star)
        return LogRow(
            k=state.k, res_clean=res_clean, res_noisy=res_noisy, j_val=j_val,
            dist_ref=float(np.linalg.norm(state.w - ref.w_star)),
            gap=float(gap), bregman=float(breg),
            res_avg_clean=float(np.linalg.norm(xw_avg - self.y_clean)),
            dist_avg_ref=float(np.linalg.norm(w_avg - ref.w_star)),
            gap_avg=float(gap_avg))


def run(X, J, y_obs, cfg, reference=None, w0=None, theta0=None):
    """Execute the iteration on ``y_obs`` and return the diagnostic log.

    Diagnostics are recorded at k = 0, every ``cfg.record_every`` iterations,
    and at the final iteration. When ``reference`` is given, distance, gap and
    Bregman columns are computed against the certificate and the clean data it
    carries; the gap columns store the plain Lagrangian difference without
    clamping.
    """
    y_obs = as_vector(y_obs, X.out_dim, "y_obs")
    validate_config(cfg, X)
    rec = _Recorder(X, J, y_obs, reference)
    state = initial_state(X, w0=w0, theta0=theta0)
    log = IterateLog()
    log.append(rec.row(state))
    for k in range(1, cfg.max_iter + 1):
        state = step(state, X, J, y_obs, cfg)
        if k % cfg.record_every == 0 or k == cfg.max_iter:
            log.append(rec.row(state))
    return log


def subgradient_residual(X, J, w, theta):
    """Prox fixed-point residual of -X^T theta as a subgradient of J at w."""
    g = -X.adjoint(theta)
    return float(np.linalg.norm(J.prox(1.0, w + g) - w))


def certify(X, J, y, cfg=None, feas_tol=None, subgrad_tol=1e-6, max_iter=None,
            check_every=50):
    """Run on clean data until the saddle conditions hold; return the pair.

    Defaults: feas_tol = 1e-9 * max(1, ||y||), subgrad_tol = 1e-6. Raises
    :class:`CertificationFailure` with the best residuals achieved if the
    tolerances are not reached within the iteration budget.
    """
    y = as_vector(y, X.out_dim, "y")
    if cfg is None:
        cfg = make_config(X, max_iter=200_000)
    if max_iter is None:
        max_iter = cfg.max_iter
    if feas_tol is None:
        feas_tol = 1e-9 * max(1.0, float(np.linalg.norm(y)))
    validate_config(cfg, X)

    state = initial_state(X)
    best_feas, best_sub = np.inf, np.inf
    for k in range(1, max_iter + 1):
        state = step(state, X, J, y, cfg)
        if k % check_every == 0 or k == max_iter:
            feas = float(np.linalg.norm(state.xw - y))
            sub = subgradient_residual(X, J, state.w, state.theta)
            if feas < best_feas:
                best_feas = feas
            if sub < best_sub:
                best_sub = sub
            if feas <= feas_tol and sub <= subgrad_tol:
                return SaddleCertificate(
                    w_star=state.w.copy(), theta_star=state.theta.copy(),
                    feas_res=feas, subgrad_res=sub, y=y.copy())
    raise CertificationFailure(
        f"no certificate within {max_iter} iterations: best feasibility "
        f"{best_feas:.3e} (tol {feas_tol:.3e}), best subgradient residual "
        f"{best_sub:.3e} (tol {subgrad_tol:.3e})",
        feas_res=best_feas, subgrad_res=best_sub)
