"""Convex bias functionals with closed-form proximal maps.

Each bias J is proper, convex, lower semicontinuous with J(0) = 0, and knows
how to evaluate itself, compute prox_{tau J}, and check approximate
subgradients. Biases are immutable; all methods are pure.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation

__all__ = ["Bias", "L1", "SqL2", "Nuclear", "Zero", "BlockBias", "soft_threshold"]


def soft_threshold(v, t):
    """Componentwise shrinkage; entries with |v_i| <= t map to 0."""
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _check_tau(tau):
    if tau < 0:
        raise ContractViolation(f"prox scale must be nonnegative, got {tau}")


class Bias:
    """Base class for convex bias functionals."""

    def __call__(self, w):
        raise NotImplementedError

    def prox(self, tau, v):
        """argmin_w 0.5*||w - v||^2 + tau*J(w)."""
        raise NotImplementedError

    def subgradient_check(self, w, g, tol=1e-8):
        """True iff g is within tol of the subdifferential of J at w."""
        raise NotImplementedError


class L1(Bias):
    """J(w) = sum_i |w_i|; prox is componentwise soft-thresholding."""

    def __call__(self, w):
        return float(np.sum(np.abs(w)))

    def prox(self, tau, v):
        _check_tau(tau)
        v = np.asarray(v, dtype=float)
        if tau == 0:
            return v.copy()
        return soft_threshold(v, tau)

    def subgradient_check(self, w, g, tol=1e-8):
        w = np.asarray(w, dtype=float)
        g = np.asarray(g, dtype=float)
        if w.shape != g.shape:
            raise ContractViolation("subgradient_check: shape mismatch")
        if np.any(np.abs(g) > 1.0 + tol):
            return False
        active = np.abs(w) > tol
        return bool(np.all(np.abs(g[active] - np.sign(w[active])) <= tol))

    def __repr__(self):
        return "L1()"


class SqL2(Bias):
    """J(w) = scale * ||w||^2; prox_{tau J}(v) = v / (1 + 2*scale*tau).

    The default scale 1/2 makes the prox the plain 1/(1+tau) contraction.
    """

    def __init__(self, scale=0.5):
        if scale <= 0:
            raise ContractViolation(f"sq_l2 scale must be positive, got {scale}")
        self.scale = float(scale)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        return float(self.scale * np.dot(w, w))

    def prox(self, tau, v):
        _check_tau(tau)
        v = np.asarray(v, dtype=float)
        return v / (1.0 + 2.0 * self.scale * tau)

    def subgradient_check(self, w, g, tol=1e-8):
        w = np.asarray(w, dtype=float)
        g = np.asarray(g, dtype=float)
        if w.shape != g.shape:
            raise ContractViolation("subgradient_check: shape mismatch")
        return bool(np.linalg.norm(g - 2.0 * self.scale * w) <= tol)

    def __repr__(self):
        return f"SqL2(scale={self.scale})"


class Nuclear(Bias):
    """Nuclear norm of the p1 x p2 reshaping; prox is singular-value shrinkage."""

    def __init__(self, p1, p2):
        self.p1, self.p2 = int(p1), int(p2)
        if self.p1 <= 0 or self.p2 <= 0:
            raise ContractViolation(f"nuclear shape must be positive, got {(p1, p2)}")

    def _as_matrix(self, w):
        w = np.asarray(w, dtype=float)
        if w.size != self.p1 * self.p2:
            raise ContractViolation(
                f"nuclear bias expects length {self.p1 * self.p2}, got {w.size}")
        return w.reshape(self.p1, self.p2)

    def __call__(self, w):
        return float(np.sum(np.linalg.svd(self._as_matrix(w), compute_uv=False)))

    def prox(self, tau, v):
        _check_tau(tau)
        V = self._as_matrix(v)
        if tau == 0:
            return V.ravel().copy()
        U, s, Vt = np.linalg.svd(V, full_matrices=False)
        return ((U * np.maximum(s - tau, 0.0)) @ Vt).ravel()

    def subgradient_check(self, w, g, tol=1e-8):
        w = np.asarray(w, dtype=float)
        g = np.asarray(g, dtype=float)
        if w.shape != g.shape:
            raise ContractViolation("subgradient_check: shape mismatch")
        return bool(np.linalg.norm(self.prox(1.0, w + g) - w) <= tol)

    def __repr__(self):
        return f"Nuclear({self.p1}, {self.p2})"


class Zero(Bias):
    """Identically-zero bias; prox is the identity, subgradient is {0}."""

    def __call__(self, w):
        return 0.0

    def prox(self, tau, v):
        _check_tau(tau)
        return np.asarray(v, dtype=float).copy()

    def subgradient_check(self, w, g, tol=1e-8):
        return bool(np.linalg.norm(np.asarray(g, dtype=float)) <= tol)

    def __repr__(self):
        return "Zero()"


class BlockBias(Bias):
    """Sum of biases on contiguous index ranges tiling the whole vector.

    Built from (bias, start, stop) triples with start of each range equal to
    the stop of the previous one.
    """

    def __init__(self, parts):
        parts = [(b, int(s), int(e)) for (b, s, e) in parts]
        if not parts:
            raise ContractViolation("block bias needs at least one part")
        expected = 0
        for b, s, e in parts:
            if not isinstance(b, Bias):
                raise ContractViolation("block bias parts must contain Bias instances")
            if s != expected or e <= s:
                raise ContractViolation(f"block ranges must tile [0, dim); bad range ({s},{e})")
            expected = e
        self.parts = tuple(parts)
        self.dim = expected

    def _split_check(self, v, what):
        v = np.asarray(v, dtype=float)
        if v.size != self.dim:
            raise ContractViolation(f"{what}: expected length {self.dim}, got {v.size}")
        return v

    def __call__(self, w):
        w = self._split_check(w, "block eval")
        return float(sum(b(w[s:e]) for b, s, e in self.parts))

    def prox(self, tau, v):
        _check_tau(tau)
        v = self._split_check(v, "block prox")
        return np.concatenate([b.prox(tau, v[s:e]) for b, s, e in self.parts])

    def subgradient_check(self, w, g, tol=1e-8):
        w = self._split_check(w, "block subgradient_check")
        g = self._split_check(g, "block subgradient_check")
        return all(b.subgradient_check(w[s:e], g[s:e], tol) for b, s, e in self.parts)

    def __repr__(self):
        return f"BlockBias({list(self.parts)!r})"
