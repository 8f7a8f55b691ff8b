"""Simulation estimates of the three agents' values.

Runs are drawn in fixed blocks of :data:`BLOCK` samples; block ``b`` uses
its own stream seeded by ``(seed, b)``. A run therefore depends only on
``(seed, sample index)``, and blocks may be evaluated in any order or in
parallel without changing the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .engine import dp_continuations
from .model import Instance, ParamOutOfRange

BLOCK = 1 << 16
# attempting is weakly dominant at a tie; absorb rounding in the comparison
TIE_TOL = 1e-9


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    samples: int
    seed: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {"mean": self.mean, "stderr": self.stderr, "samples": self.samples, "seed": self.seed}

    def covers(self, exact: float, k: float = 3.0, tol: float = 1e-9) -> bool:
        return abs(self.mean - exact) <= k * self.stderr + tol


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    tau: float | None = None

    KINDS = ("dp-optimal", "va-optimal", "fixed-threshold")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParamOutOfRange(f"unknown policy {self.kind!r}; expected one of {self.KINDS}")
        if self.kind == "fixed-threshold" and not (self.tau is not None and self.tau >= 0):
            raise ParamOutOfRange("fixed-threshold needs tau >= 0")


DP_OPTIMAL = PolicySpec("dp-optimal")
VA_OPTIMAL = PolicySpec("va-optimal")


def threshold(tau: float) -> PolicySpec:
    return PolicySpec("fixed-threshold", tau)


class _Sampler:
    def __init__(self, instance: Instance):
        self.n = len(instance)
        self.values = [np.array([a.value for a in o.atoms]) for o in instance.options]
        self.accepts = [np.array([a.accept for a in o.atoms]) for o in instance.options]
        self.cdfs = []
        for o in instance.options:
            c = np.cumsum([a.mass for a in o.atoms])
            c[-1] = 1.0
            self.cdfs.append(c)

    def draw(self, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values ``x``, conditional acceptance ``q`` and acceptance bits, each (size, n)."""
        u_val = rng.random((size, self.n))
        u_acc = rng.random((size, self.n))
        x = np.empty((size, self.n))
        q = np.empty((size, self.n))
        for i in range(self.n):
            idx = np.searchsorted(self.cdfs[i], u_val[:, i], side="right")
            idx = np.minimum(idx, len(self.cdfs[i]) - 1)
            x[:, i] = self.values[i][idx]
            q[:, i] = self.accepts[i][idx]
        return x, q, u_acc < q


def _run_blocks(instance: Instance, n_samples: int, seed: int, payoff_fn) -> Estimate:
    if n_samples < 1:
        raise ParamOutOfRange(f"n_samples = {n_samples!r} must be >= 1")
    sampler = _Sampler(instance)
    # pooled mean and sum of squared deviations, merged block by block
    count, mean, m2 = 0, 0.0, 0.0
    for b, start in enumerate(range(0, n_samples, BLOCK)):
        size = min(BLOCK, n_samples - start)
        rng = np.random.default_rng([seed, b])
        pay = payoff_fn(*sampler.draw(rng, size))
        b_mean = float(pay.mean())
        b_m2 = float(np.sum((pay - b_mean) ** 2))
        delta = b_mean - mean
        total = count + size
        mean += delta * size / total
        m2 += b_m2 + delta * delta * count * size / total
        count = total
    stderr = math.sqrt(m2 / (count - 1) / count) if count > 1 else 0.0
    return Estimate(mean, stderr, n_samples, seed)


def _first_success(attempt: np.ndarray, accepted: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Payoff of the first step that is both attempted and accepted."""
    hit = attempt & accepted
    any_hit = hit.any(axis=1)
    first = hit.argmax(axis=1)
    return np.where(any_hit, x[np.arange(len(x)), first], 0.0)


def simulate_policy(instance: Instance, policy: PolicySpec, n_samples: int, seed: int) -> Estimate:
    """Estimate the expected payoff of ``policy`` from ``n_samples`` runs."""
    if policy.kind == "dp-optimal":
        conts = np.array(dp_continuations(instance))

        def payoff(x, q, accepted):
            # accept*x + (1-accept)*c >= c  <=>  x >= c whenever accept > 0
            return _first_success(x >= conts - TIE_TOL, accepted, x)

    elif policy.kind == "va-optimal":

        def payoff(x, q, accepted):
            n = x.shape[1]
            later = np.zeros_like(x)  # value of continuing after step i, per run
            v = np.zeros(x.shape[0])
            for i in reversed(range(n)):
                later[:, i] = v
                v = v + q[:, i] * np.maximum(x[:, i] - v, 0.0)
            return _first_success(x >= later - TIE_TOL, accepted, x)

    else:
        tau = policy.tau

        def payoff(x, q, accepted):
            return _first_success(x >= tau, accepted, x)

    return _run_blocks(instance, n_samples, seed, payoff)


def estimate_prophet(instance: Instance, n_samples: int, seed: int) -> Estimate:
    """Estimate ``E[max_i A_i X_i]``."""

    def payoff(x, q, accepted):
        return np.max(np.where(accepted, x, 0.0), axis=1)

    return _run_blocks(instance, n_samples, seed, payoff)
