"""Exact values of the decision maker, the value-aware decision maker and the prophet.

``dp_value`` runs the backward recurrence directly on the joint law.
``va_value`` and ``opt_value`` enumerate every realization of the value
vector (the product of the option supports) and evaluate a closed form per
realization. The enumeration is vectorized in fixed-size blocks and summed
block by block in a fixed order, so results are bitwise reproducible.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import (
    ClassicAtom,
    ClassicInstance,
    ClassicOption,
    EnumerationTooLarge,
    EvalReport,
    Instance,
)

DEFAULT_CAP = 10**7
_BLOCK = 1 << 16


@dataclass(frozen=True)
class ValueTuple:
    """One realization ``(x_1, ..., x_n)`` with its probability and the
    conditional acceptance probabilities ``q_i = P[A_i = 1 | X_i = x_i]``."""

    values: tuple[float, ...]
    accepts: tuple[float, ...]
    mass: float = 1.0

    def __post_init__(self):
        if len(self.values) != len(self.accepts):
            raise ValueError("values and accepts differ in length")


# -- classical instances --------------------------------------------------------


def product_transform(instance: Instance) -> ClassicInstance:
    """Law of ``Z_i = X_i * A_i`` for every option."""
    opts = []
    for o in instance.options:
        atoms = []
        for a in o.atoms:
            atoms.append(ClassicAtom(a.value, a.mass * a.accept))
            atoms.append(ClassicAtom(0.0, a.mass * (1.0 - a.accept)))
        opts.append(ClassicOption(tuple(atoms)))
    return ClassicInstance(tuple(opts), name=instance.name)


def on_value(classic: ClassicInstance) -> float:
    """Optimal online value of a classical instance (backward induction)."""
    cont = 0.0
    for o in reversed(classic.options):
        cont = sum(a.mass * max(a.value, cont) for a in o.atoms)
    return cont


def classic_opt_value(classic: ClassicInstance) -> float:
    """``E[max_i Z_i]`` from the marginal tails.

    Uses ``E[max] = sum_k (t_k - t_{k-1}) P[max >= t_k]`` over the joint
    support, with ``P[max >= t] = 1 - prod_i (1 - P[Z_i >= t])`` evaluated
    through ``log1p``/``expm1`` so tiny tail masses keep full relative precision.
    """
    support = sorted({a.value for o in classic.options for a in o.atoms})
    total, prev = 0.0, 0.0
    for t in support:
        if t > 0:
            log_none = 0.0
            for o in classic.options:
                tail = math.fsum(a.mass for a in o.atoms if a.value >= t)
                log_none += math.log1p(-tail) if tail < 1.0 else -math.inf
            total += (t - prev) * -math.expm1(log_none)
        prev = t
    return total


# -- the decision maker ------------------------------------------------------------


def dp_value(instance: Instance) -> float:
    cont = 0.0
    for o in reversed(instance.options):
        cont = sum(
            a.mass * max(a.accept * a.value + (1.0 - a.accept) * cont, cont) for a in o.atoms
        )
    return cont


def dp_continuations(instance: Instance) -> list[float]:
    """``[DP_2, ..., DP_{n+1}]``: the value of continuing after each step."""
    conts = [0.0]
    for o in reversed(instance.options[1:]):
        c = conts[-1]
        conts.append(sum(a.mass * max(a.accept * a.value + (1.0 - a.accept) * c, c) for a in o.atoms))
    return conts[::-1]


# -- per-realization closed forms --------------------------------------------------


def va_tuple_value(tup: ValueTuple) -> float:
    """Best online value when the values are known and acceptances are not."""
    v = 0.0
    for x, q in zip(reversed(tup.values), reversed(tup.accepts)):
        v += q * max(x - v, 0.0)
    return v


def opt_tuple_value(tup: ValueTuple) -> float:
    """``E[max_i x_i B_i]`` for independent ``B_i ~ Ber(q_i)``."""
    order = sorted(range(len(tup.values)), key=lambda i: (-tup.values[i], i))
    total, none_yet = 0.0, 1.0
    for i in order:
        total += tup.values[i] * tup.accepts[i] * none_yet
        none_yet *= 1.0 - tup.accepts[i]
    return total


def enumeration_size(instance: Instance) -> int:
    return math.prod(instance.support_sizes)


def value_tuples(instance: Instance, cap: int = DEFAULT_CAP) -> Iterator[ValueTuple]:
    """Every value realization in mixed-radix order (last option fastest)."""
    size = enumeration_size(instance)
    if size > cap:
        raise EnumerationTooLarge(size, cap)
    for combo in itertools.product(*(o.atoms for o in instance.options)):
        yield ValueTuple(
            tuple(a.value for a in combo),
            tuple(a.accept for a in combo),
            math.prod(a.mass for a in combo),
        )


def _blocks(instance: Instance, cap: int):
    """Yield ``(x, q, w)`` arrays of shape (T, n), (T, n), (T,) per block."""
    sizes = instance.support_sizes
    total = math.prod(sizes)
    if total > cap:
        raise EnumerationTooLarge(total, cap)
    vals = [np.array([a.value for a in o.atoms]) for o in instance.options]
    accs = [np.array([a.accept for a in o.atoms]) for o in instance.options]
    masses = [np.array([a.mass for a in o.atoms]) for o in instance.options]
    n = len(sizes)
    for start in range(0, total, _BLOCK):
        rem = np.arange(start, min(total, start + _BLOCK))
        x = np.empty((rem.size, n))
        q = np.empty((rem.size, n))
        w = np.ones(rem.size)
        for i in reversed(range(n)):
            rem, d = np.divmod(rem, sizes[i])
            x[:, i] = vals[i][d]
            q[:, i] = accs[i][d]
            w *= masses[i][d]
        yield x, q, w


def va_block(x: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Vectorized :func:`va_tuple_value` over the rows of ``x``."""
    v = np.zeros(x.shape[0])
    for i in reversed(range(x.shape[1])):
        v += q[:, i] * np.maximum(x[:, i] - v, 0.0)
    return v


def opt_block(x: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Vectorized :func:`opt_tuple_value` over the rows of ``x``."""
    order = np.argsort(-x, axis=1, kind="stable")
    xs = np.take_along_axis(x, order, axis=1)
    qs = np.take_along_axis(q, order, axis=1)
    survive = np.cumprod(1.0 - qs, axis=1)
    none_before = np.hstack([np.ones((x.shape[0], 1)), survive[:, :-1]])
    return np.sum(xs * qs * none_before, axis=1)


def va_value(instance: Instance, cap: int = DEFAULT_CAP) -> float:
    total = 0.0
    for x, q, w in _blocks(instance, cap):
        total += float(w @ va_block(x, q))
    return total


def opt_value(instance: Instance, cap: int = DEFAULT_CAP) -> float:
    total = 0.0
    for x, q, w in _blocks(instance, cap):
        total += float(w @ opt_block(x, q))
    return total


def opt_brute(instance: Instance, cap: int = DEFAULT_CAP) -> float:
    """Reference prophet value: sum over every (value atom, acceptance bit) outcome."""
    size = math.prod(2 * s for s in instance.support_sizes)
    if size > cap:
        raise EnumerationTooLarge(size, cap)
    per_option = []
    for o in instance.options:
        outcomes = []
        for a in o.atoms:
            outcomes.append((a.value, True, a.mass * a.accept))
            outcomes.append((a.value, False, a.mass * (1.0 - a.accept)))
        per_option.append(outcomes)
    total = 0.0
    for combo in itertools.product(*per_option):
        prob = 1.0
        best = 0.0
        for value, accepted, pr in combo:
            prob *= pr
            if accepted and value > best:
                best = value
        total += prob * best
    return total


def _ratio(num: float, den: float) -> float | None:
    return num / den if den > 0 else None


def evaluate(instance: Instance, cap: int = DEFAULT_CAP) -> EvalReport:
    dp = dp_value(instance)
    va = va_value(instance, cap)
    opt = opt_value(instance, cap)
    alpha, beta, gamma = _ratio(dp, va), _ratio(va, opt), _ratio(dp, opt)
    flags = tuple(
        f"{name}_undefined"
        for name, r in (("alpha", alpha), ("beta", beta), ("gamma", gamma))
        if r is None
    )
    return EvalReport(dp, va, opt, alpha, beta, gamma, flags)

