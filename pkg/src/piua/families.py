"""Instance families: the worked examples, the tight constructions, a
correlated-acceptance family, and seeded random instances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .bernoulli import tight_beta_instance
from .model import Atom, Instance, OptionSpec, ParamOutOfRange, TOL


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise ParamOutOfRange(msg)


def _sure_one() -> OptionSpec:
    return OptionSpec.deterministic(1.0)


def example_size2(v: float, p: float, a: float) -> Instance:
    """Sure 1, then ``v * Ber(p)`` accepted independently with probability ``a``."""
    _need(v >= 1, f"v = {v!r} must be >= 1")
    _need(0 < p <= 1 and 0 < a <= 1, f"p = {p!r}, a = {a!r} must lie in (0, 1]")
    return Instance((_sure_one(), OptionSpec.scaled_bernoulli(v, p, a)), name=f"size2(v={v:g},p={p:g},a={a:g})")


def size2_closed_forms(v: float, p: float, a: float) -> tuple[float, float, float]:
    """``(DP, VA, OPT)`` of :func:`example_size2` in closed form."""
    return max(1.0, v * p * a), max(1.0, 1.0 - p + v * p * a), 1.0 - p * a + v * p * a


def counterexample_alpha_beta(p: float, a: float) -> Instance:
    """Sure 1, then ``Ber(p) / (a p)`` accepted with probability ``a``.

    DP = 1, VA = 2 - p, OPT = 2 - a p; ``p -> 0`` drives alpha to 1/2 and
    ``p = 1, a -> 0`` drives beta to 1/2.
    """
    _need(0 < p <= 1 and 0 < a <= 1, f"p = {p!r}, a = {a!r} must lie in (0, 1]")
    return Instance(
        (_sure_one(), OptionSpec.scaled_bernoulli(1.0 / (a * p), p, a)),
        name=f"counterexample(p={p:g},a={a:g})",
    )


def end_of_hopes(n: int, p: float, eps: float, p_l: float) -> Instance:
    """``n`` sure 1s each accepted w.p. ``p``, then a long shot
    ``Ber(eps) / (eps p_l)`` accepted w.p. ``p_l``."""
    _need(isinstance(n, (int, np.integer)) and n >= 1, f"n = {n!r} must be a positive integer")
    for name, x in (("p", p), ("eps", eps), ("p_L", p_l)):
        _need(0 < x < 1, f"{name} = {x!r} must lie in (0, 1)")
    ones = tuple(OptionSpec.deterministic(1.0, accept=p) for _ in range(n))
    shot = OptionSpec.scaled_bernoulli(1.0 / (eps * p_l), eps, p_l)
    return Instance(ones + (shot,), name=f"end-of-hopes(n={n},p={p:g},eps={eps:g},p_L={p_l:g})")


def nonmono_fig(p: float) -> Instance:
    """Sure 1, then ``10 * Ber(1/2)`` accepted w.p. ``p``."""
    _need(0 <= p <= 1, f"p = {p!r} must lie in [0, 1]")
    return Instance((_sure_one(), OptionSpec.scaled_bernoulli(10.0, 0.5, p)), name=f"nonmono(p={p:g})")


def nonmono_closed_forms(p: float) -> tuple[float, float, float]:
    """``(DP, VA, OPT)`` of :func:`nonmono_fig`, from the two-step recurrences."""
    return max(1.0, 5.0 * p), 0.5 + 0.5 * max(1.0, 10.0 * p), 1.0 + 4.5 * p


def random_instance(seed: int, n: int, max_support: int) -> Instance:
    """Seeded random instance.

    Support sizes uniform on ``1..max_support``, values uniform on [0, 10],
    masses from a flat Dirichlet, acceptances uniform on [0, 1].
    """
    _need(n >= 1 and max_support >= 1, "n and max_support must be >= 1")
    rng = np.random.default_rng(seed)
    opts = []
    for _ in range(n):
        k = int(rng.integers(1, max_support + 1))
        values = rng.uniform(0.0, 10.0, size=k)
        masses = rng.dirichlet(np.ones(k))
        accepts = rng.uniform(0.0, 1.0, size=k)
        opts.append(OptionSpec(tuple(Atom(float(v), float(m), float(a)) for v, m, a in zip(values, masses, accepts))))
    return Instance(tuple(opts), name=f"random(seed={seed},n={n},k<={max_support})")


def random_corpus(count: int, max_n: int, max_support: int, base_seed: int = 0) -> list[Instance]:
    """``count`` random instances; instance ``i`` has ``n = 1 + i % max_n``."""
    return [random_instance(base_seed + i, 1 + i % max_n, max_support) for i in range(count)]


def with_min_accept(instance: Instance, p: float) -> Instance:
    """Raise every acceptance probability below ``p`` to ``p``."""
    return Instance(
        tuple(OptionSpec(tuple(Atom(a.value, a.mass, max(a.accept, p)) for a in o.atoms)) for o in instance.options),
        name=instance.name,
    )


# -- correlated acceptances ------------------------------------------------------------


@dataclass(frozen=True)
class CorrelatedScenarioInstance:
    """Deterministic values with a joint law over acceptance vectors."""

    values: tuple[float, ...]
    scenarios: tuple[tuple[float, tuple[int, ...]], ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals or any(not (math.isfinite(v) and v >= 0) for v in vals):
            raise ParamOutOfRange("values must be a nonempty list of finite nonnegative numbers")
        scen = tuple((float(pr), tuple(int(b) for b in bits)) for pr, bits in self.scenarios)
        if any(len(bits) != len(vals) for _, bits in scen):
            raise ParamOutOfRange("every acceptance vector needs one bit per value")
        if any(b not in (0, 1) for _, bits in scen for b in bits):
            raise ParamOutOfRange("acceptance bits must be 0 or 1")
        if any(pr < 0 for pr, _ in scen) or abs(math.fsum(pr for pr, _ in scen) - 1.0) > TOL:
            raise ParamOutOfRange("scenario probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "scenarios", scen)

    def to_dict(self) -> dict[str, Any]:
        return {
            "values": list(self.values),
            "scenarios": [{"prob": pr, "accept_bits": list(bits)} for pr, bits in self.scenarios],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CorrelatedScenarioInstance":
        return cls(
            tuple(data["values"]),
            tuple((s["prob"], tuple(s["accept_bits"])) for s in data["scenarios"]),
        )


def hill_family(n: int, p: float) -> CorrelatedScenarioInstance:
    """Values ``p**-(i-1)``; with probability ``p**j - p**(j+1)`` exactly the
    first ``j + 1`` options accept (``j < n - 1``), otherwise all of them."""
    _need(isinstance(n, (int, np.integer)) and n >= 2, f"n = {n!r} must be an integer >= 2")
    _need(0 < p < 1, f"p = {p!r} must lie in (0, 1)")
    values = tuple(p ** -(i) for i in range(n))
    scenarios = [(p**j - p ** (j + 1), (1,) * (j + 1) + (0,) * (n - j - 1)) for j in range(n - 1)]
    scenarios.append((p ** (n - 1), (1,) * n))
    return CorrelatedScenarioInstance(values, tuple(scenarios))


def scenario_opt(inst: CorrelatedScenarioInstance) -> float:
    total = 0.0
    for pr, bits in inst.scenarios:
        total += pr * max((v for v, b in zip(inst.values, bits) if b), default=0.0)
    return total


def attempt_from_index(inst: CorrelatedScenarioInstance, k: int) -> float:
    """Skip options before ``k`` (0-based), then attempt every one."""
    total = 0.0
    for pr, bits in inst.scenarios:
        first = next((i for i in range(k, len(bits)) if bits[i]), None)
        if first is not None:
            total += pr * inst.values[first]
    return total


def hill_eval(inst: CorrelatedScenarioInstance) -> tuple[float, float, float]:
    """``(restricted online value, prophet value, ratio)``.

    The online value is the best "attempt everything from index k on"
    policy; :func:`scenario_dp_brute` certifies that nothing better exists
    on the Hill family.
    """
    dp = max(attempt_from_index(inst, k) for k in range(len(inst.values)))
    opt = scenario_opt(inst)
    return dp, opt, dp / opt


def scenario_dp_brute(inst: CorrelatedScenarioInstance) -> float:
    """Optimal online value over all history-dependent policies.

    Values are known upfront, so the only information is which earlier
    attempts were rejected. ``W(i, S)`` is the unnormalized continuation
    value at step ``i`` after rejections at the index set ``S``; summing
    scenario weights instead of conditioning keeps comparisons exact.
    """
    n = len(inst.values)
    scen = inst.scenarios
    memo: dict[tuple[int, frozenset[int]], float] = {}

    def consistent(bits: Sequence[int], rejected: frozenset[int]) -> bool:
        return all(bits[j] == 0 for j in rejected)

    def w(i: int, rejected: frozenset[int]) -> float:
        if i == n:
            return 0.0
        key = (i, rejected)
        if key not in memo:
            skip = w(i + 1, rejected)
            win = sum(pr for pr, bits in scen if bits[i] == 1 and consistent(bits, rejected))
            attempt = win * inst.values[i] + w(i + 1, rejected | {i})
            memo[key] = max(skip, attempt)
        return memo[key]

    return w(0, frozenset())


FAMILIES = {
    "size2": (example_size2, ("v", "p", "a")),
    "counterexample": (counterexample_alpha_beta, ("p", "a")),
    "end-of-hopes": (end_of_hopes, ("n", "p", "eps", "p_l")),
    "nonmono": (nonmono_fig, ("p",)),
    "tight-beta": (tight_beta_instance, ("p",)),
    "hill": (hill_family, ("n", "p")),
    "random": (random_instance, ("seed", "n", "max_support")),
}

