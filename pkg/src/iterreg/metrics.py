"""Lagrangian, duality gap, Bregman divergence, and checkable error bounds.

All quantities here are taken with respect to the clean data y; a
:class:`~iterreg.pdsolver.SaddleCertificate` stands in for the exact saddle
point wherever one is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bias import L1
from .errors import AssumptionViolated, CertificateInvalid, ContractViolation

__all__ = [
    "lagrangian",
    "gap",
    "bregman",
    "gap_equals_bregman_check",
    "weighted_v",
    "BoundInputs",
    "stability_gap_bound",
    "stability_feas_bound",
    "NormBoundData",
    "norm_bound_data",
    "norm_bound",
]


def lagrangian(w, theta, X, J, y):
    """L(w, theta) = J(w) + <theta, X w - y>."""
    w = np.asarray(w, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return float(J(w) + theta @ (X.apply(w) - y))


def gap(w, theta, cert, X, J, y):
    """Duality gap L(w, theta*) - L(w*, theta) against a certificate.

    Tiny negative values (within 1e-10 * (1 + |L(w*, theta*)|), the inevitable
    footprint of a numerical certificate) are clamped to 0; anything more
    negative means the certificate is not a saddle point and raises.
    """
    val = lagrangian(w, cert.theta_star, X, J, y) - lagrangian(cert.w_star, theta, X, J, y)
    if val >= 0.0:
        return val
    l_star = lagrangian(cert.w_star, cert.theta_star, X, J, y)
    clamp = 1e-10 * (1.0 + abs(l_star))
    if val > -clamp:
        return 0.0
    raise CertificateInvalid(
        f"gap {val:.6e} is negative beyond the clamp {clamp:.3e}; "
        "the certificate does not behave like a saddle point")


def bregman(J, w, w_ref, g_ref, check_tol=1e-6):
    """D_J(w, w_ref) for the subgradient g_ref of J at w_ref.

    Raises if g_ref fails the subgradient check at ``check_tol``. The result
    is clamped to 0 when within 1e-10-scale noise below zero.
    """
    w = np.asarray(w, dtype=float)
    w_ref = np.asarray(w_ref, dtype=float)
    g_ref = np.asarray(g_ref, dtype=float)
    if not J.subgradient_check(w_ref, g_ref, check_tol):
        raise ContractViolation("g_ref is not a subgradient of J at w_ref")
    jw, jr = J(w), J(w_ref)
    val = jw - jr - g_ref @ (w - w_ref)
    if val >= 0.0:
        return float(val)
    clamp = 1e-10 * (1.0 + abs(jw) + abs(jr))
    if val > -clamp:
        return 0.0
    raise ContractViolation(
        f"Bregman divergence {val:.6e} negative beyond clamp; g_ref is not a subgradient")


def gap_equals_bregman_check(w, cert, X, J, y, tol=1e-10):
    """Check that the theta-free gap equals the Bregman divergence at w.

    The dual argument of the gap only contributes <theta, y - X w*> = 0, so it
    is dropped; what remains must coincide with D_J(w, w*) taken at the
    subgradient -X^T theta*.
    """
    w = np.asarray(w, dtype=float)
    lhs = J(w) + cert.theta_star @ (X.apply(w) - y) - J(cert.w_star)
    g_ref = -X.adjoint(cert.theta_star)
    rhs = J(w) - J(cert.w_star) - g_ref @ (w - cert.w_star)
    return bool(abs(lhs - rhs) <= tol)


def weighted_v(w, theta, tau, sigma):
    """V(z) = ||w||^2 / (2 tau) + ||theta||^2 / (2 sigma)."""
    if tau <= 0 or sigma <= 0:
        raise ContractViolation(f"tau and sigma must be positive, got {tau}, {sigma}")
    w = np.asarray(w, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return float(np.dot(w, w) / (2.0 * tau) + np.dot(theta, theta) / (2.0 * sigma))


@dataclass(frozen=True)
class BoundInputs:
    """Ingredients of the stability bounds: V(z0 - z*), sigma, epsilon, delta."""

    v0: float
    sigma: float
    epsilon: float
    delta: float

    def __post_init__(self):
        if self.v0 < 0 or self.delta < 0:
            raise ContractViolation("v0 and delta must be nonnegative")
        if self.sigma <= 0:
            raise ContractViolation("sigma must be positive")
        if not (0.0 < self.epsilon < 1.0):
            raise ContractViolation(f"epsilon must lie in (0,1), got {self.epsilon}")


def stability_gap_bound(k, b):
    """(sqrt(V0) + sqrt(2 sigma) * delta * k)^2 / k; equals V0/k when delta=0."""
    if k < 1:
        raise ContractViolation(f"bound needs k >= 1, got {k}")
    return float((np.sqrt(b.v0) + np.sqrt(2.0 * b.sigma) * b.delta * k) ** 2 / k)


def stability_feas_bound(k, b):
    """Upper bound on ||X w_avg^k - y||^2 under noise level delta."""
    if k < 1:
        raise ContractViolation(f"bound needs k >= 1, got {k}")
    eps, sig, d = b.epsilon, b.sigma, b.delta
    lead = 2.0 * (1.0 + eps) / (sig * eps * (1.0 - eps))
    inner = (np.sqrt(2.0 * sig * b.v0) * d
             + sig * eps / (1.0 - eps) * d * d
             + 2.0 * sig * d * d * k
             + b.v0 / k)
    return float(lead * inner)


@dataclass(frozen=True)
class NormBoundData:
    """Active set and conditioning data for the sparse-recovery norm bound."""

    gamma_set: np.ndarray
    m: float
    xg_pinv_norm: float
    x_norm: float


def norm_bound_data(X, cert, active_tol=1e-6):
    """Extract the active column set and conditioning constants from a certificate.

    Columns j with |<X_j, theta*>| >= 1 - active_tol form the active set; the
    maximum correlation off the active set must stay below 1, and the active
    submatrix must be injective. Requires an l1 certificate (dual feasibility
    |X^T theta*|_inf <= 1).
    """
    corr = np.abs(X.adjoint(cert.theta_star))
    if corr.size and float(corr.max()) > 1.0 + active_tol:
        raise CertificateInvalid(
            f"|X^T theta*| reaches {corr.max():.6f} > 1; not dual feasible for l1")
    gamma = np.flatnonzero(corr >= 1.0 - active_tol)
    comp = np.flatnonzero(corr < 1.0 - active_tol)
    m = float(corr[comp].max()) if comp.size else 0.0
    if m >= 1.0 - active_tol:
        raise AssumptionViolated(f"off-support correlation {m:.6f} is not bounded away from 1")

    full = X.as_matrix()
    x_norm = float(np.linalg.svd(full, compute_uv=False)[0]) if full.size else 0.0
    if gamma.size == 0:
        return NormBoundData(gamma_set=gamma, m=m, xg_pinv_norm=0.0, x_norm=x_norm)
    sub = full[:, gamma]
    svals = np.linalg.svd(sub, compute_uv=False)
    if svals[-1] <= 1e-12 * svals[0]:
        raise AssumptionViolated(
            f"active submatrix is rank-deficient (sigma_min={svals[-1]:.3e})")
    return NormBoundData(gamma_set=gamma, m=m,
                         xg_pinv_norm=float(1.0 / svals[-1]), x_norm=x_norm)


def norm_bound(w, cert, bound_data, X, J, y):
    """Norm-distance bound for l1: residual term plus weighted Bregman term."""
    if not isinstance(J, L1):
        raise ContractViolation("the norm bound applies to the l1 bias only")
    w = np.asarray(w, dtype=float)
    res = float(np.linalg.norm(X.apply(w) - y))
    g_ref = -X.adjoint(cert.theta_star)
    d = J(w) - J(cert.w_star) - g_ref @ (w - cert.w_star)
    d = max(float(d), 0.0)
    return (bound_data.xg_pinv_norm * res
            + (1.0 + bound_data.xg_pinv_norm * bound_data.x_norm) / (1.0 - bound_data.m) * d)
