"""Early-stopping rules: a-priori budget, discrepancy principle, empirical oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContractViolation, RuleInapplicable

__all__ = ["StopRule", "budget_stop", "discrepancy_stop", "oracle_stop"]


def budget_stop(c, delta):
    """A-priori budget ceil(c / delta) for noise level delta > 0."""
    if c <= 0:
        raise ContractViolation(f"budget constant must be positive, got {c}")
    if delta < 0:
        raise ContractViolation(f"noise level must be nonnegative, got {delta}")
    if delta == 0:
        raise RuleInapplicable("the budget rule needs delta > 0")
    return int(math.ceil(c / delta))


def discrepancy_stop(log, tau_d, delta):
    """First recorded k whose noisy residual falls below tau_d * delta, or None."""
    if tau_d < 1.0:
        raise ContractViolation(f"discrepancy factor must be >= 1, got {tau_d}")
    if delta < 0:
        raise ContractViolation(f"noise level must be nonnegative, got {delta}")
    for row in log.rows:
        if row.res_noisy is not None and row.res_noisy <= tau_d * delta:
            return row.k
    return None


def oracle_stop(log):
    """Recorded k minimizing the distance to the reference, with that distance.

    Ties break toward the smaller k. Requires the log to carry the
    distance-to-reference column.
    """
    best_k, best_d = None, None
    for row in log.rows:
        if row.dist_ref is None:
            continue
        if best_d is None or row.dist_ref < best_d:
            best_k, best_d = row.k, row.dist_ref
    if best_k is None:
        raise ContractViolation("oracle stopping needs the dist_ref column")
    return best_k, best_d


@dataclass(frozen=True)
class StopRule:
    """A stopping rule tag: budget(c), discrepancy(tau_d), or oracle."""

    kind: str
    c: float = 0.0
    tau_d: float = 1.1

    def __post_init__(self):
        if self.kind not in ("budget", "discrepancy", "oracle"):
            raise ContractViolation(f"unknown stop rule {self.kind!r}")
        if self.kind == "budget" and self.c <= 0:
            raise ContractViolation("budget rule needs c > 0")
        if self.kind == "discrepancy" and self.tau_d < 1.0:
            raise ContractViolation("discrepancy rule needs tau_d >= 1")

    @classmethod
    def budget(cls, c):
        return cls(kind="budget", c=c)

    @classmethod
    def discrepancy(cls, tau_d=1.1):
        return cls(kind="discrepancy", tau_d=tau_d)

    @classmethod
    def oracle(cls):
        return cls(kind="oracle")

    def stop_index(self, log, delta):
        """Apply the rule to a recorded log; returns a k or None."""
        if self.kind == "budget":
            return budget_stop(self.c, delta)
        if self.kind == "discrepancy":
            return discrepancy_stop(log, self.tau_d, delta)
        return oracle_stop(log)[0]
