import numpy as np
import pytest

from piua.bernoulli import tight_beta_instance
from piua.engine import dp_continuations, dp_value, opt_value, va_value
from piua.families import example_size2, random_instance
from piua.model import Instance, OptionSpec, ParamOutOfRange
from piua.montecarlo import (
    BLOCK,
    DP_OPTIMAL,
    VA_OPTIMAL,
    Estimate,
    PolicySpec,
    _Sampler,
    estimate_prophet,
    simulate_policy,
    threshold,
)
from piua.policies import threshold_value


def scalar_payoffs(instance, policy, x, q, accepted):
    """Walk each run step by step; the reference for the vectorized payoffs."""
    n = len(instance)
    conts = dp_continuations(instance)
    out = []
    for row in range(x.shape[0]):
        got = 0.0
        for i in range(n):
            if policy == "prophet":
                continue
            if policy.kind == "dp-optimal":
                go = x[row, i] >= conts[i] - 1e-9
            elif policy.kind == "va-optimal":
                v = 0.0
                for j in reversed(range(i + 1, n)):
                    v += q[row, j] * max(x[row, j] - v, 0.0)
                go = x[row, i] >= v - 1e-9
            else:
                go = x[row, i] >= policy.tau
            if go and accepted[row, i]:
                got = x[row, i]
                break
        if policy == "prophet":
            got = max([x[row, i] for i in range(n) if accepted[row, i]], default=0.0)
        out.append(got)
    return np.array(out)


@pytest.mark.parametrize("policy", [DP_OPTIMAL, VA_OPTIMAL, threshold(3.0), "prophet"])
def test_vectorized_payoffs_match_scalar_walk(policy):
    inst = random_instance(5, 4, 3)
    size = 2000
    draws = _Sampler(inst).draw(np.random.default_rng([9, 0]), size)
    ref = scalar_payoffs(inst, policy, *draws)
    if policy == "prophet":
        est = estimate_prophet(inst, size, 9)
    else:
        est = simulate_policy(inst, policy, size, 9)
    assert est.mean == pytest.approx(ref.mean(), abs=1e-12)
    assert est.stderr == pytest.approx(ref.std(ddof=1) / np.sqrt(size), rel=1e-9)


def test_sampler_marginals():
    inst = example_size2(2, 0.3, 0.6)
    x, q, acc = _Sampler(inst).draw(np.random.default_rng(0), 200_000)
    assert np.all(x[:, 0] == 1.0) and np.all(acc[:, 0])
    assert np.mean(x[:, 1] == 2.0) == pytest.approx(0.3, abs=0.005)
    assert np.mean(acc[x[:, 1] == 2.0, 1]) == pytest.approx(0.6, abs=0.01)


def test_examples_at_one_million():
    inst = example_size2(100, 0.1, 0.1)
    dp = simulate_policy(inst, DP_OPTIMAL, 10**6, 42)
    va = simulate_policy(inst, VA_OPTIMAL, 10**6, 42)
    assert dp.covers(1.0) and va.covers(1.9)
    assert estimate_prophet(example_size2(2, 0.5, 0.5), 10**6, 42).covers(1.25)
    assert estimate_prophet(tight_beta_instance(0.5), 10**6, 42).covers(1.5)


def test_deterministic_option():
    inst = Instance((OptionSpec.deterministic(4.0),))
    for pol in (DP_OPTIMAL, VA_OPTIMAL, threshold(4.0)):
        est = simulate_policy(inst, pol, 1000, 1)
        assert est.mean == 4.0 and est.stderr == 0.0


def test_never_accepting_instance():
    inst = Instance((OptionSpec.deterministic(3.0, accept=0.0), OptionSpec.of((1, 0.5, 0.0), (2, 0.5, 0.0))))
    est = estimate_prophet(inst, 5000, 3)
    assert est.mean == 0.0 and est.stderr == 0.0


def test_reproducible():
    inst = random_instance(8, 3, 3)
    a = simulate_policy(inst, VA_OPTIMAL, BLOCK + 777, 5)
    b = simulate_policy(inst, VA_OPTIMAL, BLOCK + 777, 5)
    assert a == b
    assert a != simulate_policy(inst, VA_OPTIMAL, BLOCK + 777, 6)


def test_block_merge_matches_pooled_statistics():
    inst = random_instance(12, 3, 3)
    total = 2 * BLOCK + 100
    sampler = _Sampler(inst)
    pays = []
    for b, size in enumerate((BLOCK, BLOCK, 100)):
        draws = sampler.draw(np.random.default_rng([7, b]), size)
        pays.append(np.max(np.where(draws[2], draws[0], 0.0), axis=1))
    pooled = np.concatenate(pays)
    est = estimate_prophet(inst, total, 7)
    assert est.mean == pytest.approx(pooled.mean(), rel=1e-12)
    assert est.stderr == pytest.approx(pooled.std(ddof=1) / np.sqrt(total), rel=1e-9)


@pytest.mark.parametrize("seed", range(3))
def test_random_instances_agree_with_engine(seed):
    inst = random_instance(100 + seed, 4, 3)
    n = 200_000
    assert simulate_policy(inst, DP_OPTIMAL, n, seed).covers(dp_value(inst), k=4)
    assert simulate_policy(inst, VA_OPTIMAL, n, seed).covers(va_value(inst), k=4)
    assert estimate_prophet(inst, n, seed).covers(opt_value(inst), k=4)
    assert simulate_policy(inst, threshold(5.0), n, seed).covers(threshold_value(inst, 5.0), k=4)


def test_dp_policy_does_not_beat_dp_value():
    inst = example_size2(10, 0.1, 0.1)
    est = simulate_policy(inst, DP_OPTIMAL, 10**6, 3)
    assert est.mean <= dp_value(inst) + 3 * est.stderr + 1e-9


def test_invalid_inputs():
    inst = Instance((OptionSpec.deterministic(1.0),))
    with pytest.raises(ParamOutOfRange):
        simulate_policy(inst, DP_OPTIMAL, 0, 1)
    with pytest.raises(ParamOutOfRange):
        estimate_prophet(inst, 0, 1)
    with pytest.raises(ParamOutOfRange):
        PolicySpec("greedy")
    with pytest.raises(ParamOutOfRange):
        threshold(-1.0)
    with pytest.raises(ParamOutOfRange):
        PolicySpec("fixed-threshold")


def test_estimate_json_and_covers():
    e = Estimate(1.0, 0.1, 100, 4)
    assert e.to_dict() == {"mean": 1.0, "stderr": 0.1, "samples": 100, "seed": 4}
    assert e.covers(1.29) and not e.covers(1.31)
    assert Estimate(2.0, 0.0, 10).covers(2.0 + 1e-12)
