"""Single-threshold stopping rules.

A threshold policy attempts the first option whose observed value is at
least ``tau``; after a rejection it keeps going with the same threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import Instance, ParamOutOfRange

TIE_TOL = 1e-12


@dataclass(frozen=True)
class ThresholdPolicy:
    tau: float

    def __post_init__(self):
        if not self.tau >= 0:
            raise ParamOutOfRange(f"threshold {self.tau!r} must be nonnegative")

    def attempts(self, value: float) -> bool:
        return value >= self.tau


def threshold_value(instance: Instance, tau: float) -> float:
    """Expected payoff of the single-threshold policy ``tau``.

    ``tau = math.inf`` never attempts and is worth 0.
    """
    policy = ThresholdPolicy(tau)
    cont = 0.0
    for o in reversed(instance.options):
        cont = sum(
            a.mass * (a.accept * a.value + (1.0 - a.accept) * cont if policy.attempts(a.value) else cont)
            for a in o.atoms
        )
    return cont


def threshold_candidates(instance: Instance) -> list[float]:
    """0 plus every distinct atom value, ascending.

    The payoff is piecewise constant in ``tau`` between consecutive support
    values, so these points cover every achievable payoff.
    """
    return sorted({0.0} | {a.value for o in instance.options for a in o.atoms})


def best_threshold(instance: Instance) -> tuple[float, float]:
    """Best ``(tau, value)`` over the candidate set; ties go to the smallest tau."""
    best_tau, best_val = math.nan, -math.inf
    for tau in threshold_candidates(instance):
        val = threshold_value(instance, tau)
        if val > best_val + TIE_TOL:
            best_tau, best_val = tau, val
    return best_tau, best_val
