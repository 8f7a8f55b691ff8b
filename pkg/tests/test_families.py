import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from piua.engine import evaluate, opt_brute, opt_value
from piua.families import (
    FAMILIES,
    CorrelatedScenarioInstance,
    attempt_from_index,
    counterexample_alpha_beta,
    end_of_hopes,
    example_size2,
    hill_eval,
    hill_family,
    nonmono_closed_forms,
    nonmono_fig,
    random_corpus,
    random_instance,
    scenario_dp_brute,
    scenario_opt,
    size2_closed_forms,
    with_min_accept,
)
from piua.model import Instance, OptionSpec, ParamOutOfRange, validate


def test_size2_examples():
    r = evaluate(example_size2(2, 0.5, 0.5))
    assert (r.dp, r.va, r.opt) == pytest.approx((1, 1, 1.25))
    r = evaluate(example_size2(100, 0.1, 0.1))
    assert (r.dp, r.va, r.opt) == pytest.approx((1, 1.9, 1.99))
    r = evaluate(example_size2(4, 1, 1))
    assert r.dp == 4


def test_size2_closed_forms_grid():
    for v, p, a in itertools.product(np.linspace(1, 50, 10), np.linspace(0.1, 1, 10), np.linspace(0.1, 1, 10)):
        r = evaluate(example_size2(v, p, a))
        assert (r.dp, r.va, r.opt) == pytest.approx(size2_closed_forms(v, p, a), abs=1e-9)


def test_size2_domain():
    for args in [(0.5, 0.5, 0.5), (2, 0, 0.5), (2, 0.5, 1.5)]:
        with pytest.raises(ParamOutOfRange):
            example_size2(*args)


def test_counterexample_examples():
    assert evaluate(counterexample_alpha_beta(0.01, 1)).alpha == pytest.approx(1 / 1.99)
    assert evaluate(counterexample_alpha_beta(1, 0.01)).beta == pytest.approx(1 / 1.99)
    r = evaluate(counterexample_alpha_beta(1, 1))
    assert (r.alpha, r.beta, r.gamma) == pytest.approx((1, 1, 1))


def test_counterexample_grid():
    for p, a in itertools.product(np.linspace(0.05, 1, 12), np.linspace(0.05, 1, 12)):
        r = evaluate(counterexample_alpha_beta(p, a))
        assert abs(r.alpha - 1 / (2 - p)) <= 1e-9
        assert abs(r.beta - (2 - p) / (2 - a * p)) <= 1e-9


def test_end_of_hopes_n20():
    inst = end_of_hopes(20, 0.3, 1e-3, 0.5)
    r = evaluate(inst)
    assert r.dp == pytest.approx(1.0, abs=1e-9)
    assert abs(r.alpha - 0.5) <= 0.01 and abs(r.beta - 1) <= 0.01
    # two atoms per option keep the bit enumeration at 2**42
    small = Instance(inst.options[-4:])
    assert opt_brute(small) == pytest.approx(opt_value(small), abs=1e-9)


def test_end_of_hopes_trivial():
    with pytest.raises(ParamOutOfRange):
        end_of_hopes(1, 1.0, 0.5, 0.5)
    assert evaluate(end_of_hopes(1, 0.999999, 0.5, 0.5)).dp == pytest.approx(1.0, abs=1e-5)
    with pytest.raises(ParamOutOfRange):
        end_of_hopes(0, 0.3, 0.1, 0.5)


def end_of_hopes_values(n, p, eps, p_l):
    """Hand-derived values of the end-of-hopes instance.

    The long shot is worth ``1/eps`` in expectation once realized, which
    beats every sure 1; unrealized, the agents collect a 1 unless all ``n``
    attempts are rejected. The online agent is indifferent all the way.
    """
    hit = 1 - (1 - p) ** n
    return 1.0, 1 + (1 - eps) * hit, 1 + (1 - eps * p_l) * hit


@pytest.mark.parametrize("n", [1, 5, 20])
def test_end_of_hopes_closed_forms(n):
    args = (n, 0.3, 1e-3, 0.5)
    r = evaluate(end_of_hopes(*args))
    dp, va, opt = end_of_hopes_values(*args)
    assert r.opt == pytest.approx(opt, abs=1e-9)
    assert r.va == pytest.approx(va, abs=1e-9)
    assert r.dp == pytest.approx(dp, abs=1e-9)


@pytest.mark.parametrize("p, alpha", [(0.05, 1.0), (0.2, 2 / 3), (1.0, 10 / 11)])
def test_nonmono_points(p, alpha):
    r = evaluate(nonmono_fig(p))
    assert r.alpha == pytest.approx(alpha, abs=1e-12)
    assert (r.dp, r.va, r.opt) == pytest.approx(nonmono_closed_forms(p), abs=1e-12)


def test_nonmono_interior_minimum():
    grid = [round(0.01 * k, 2) for k in range(101)]
    alphas = [evaluate(nonmono_fig(p)).alpha for p in grid]
    k = int(np.argmin(alphas))
    assert 0 < k < 100
    assert alphas[k] < alphas[0] - 1e-6 and alphas[k] < alphas[-1] - 1e-6


def test_hill_family_n2():
    h = hill_family(2, 0.5)
    assert h.values == (1.0, 2.0)
    assert h.scenarios == ((0.5, (1, 0)), (0.5, (1, 1)))


@given(st.integers(2, 40), st.floats(0.01, 0.99))
def test_hill_telescopes(n, p):
    h = hill_family(n, p)
    assert abs(math.fsum(pr for pr, _ in h.scenarios) - 1) <= 1e-12
    assert all(len(bits) == n for _, bits in h.scenarios)
    assert scenario_opt(h) == pytest.approx(1 + (n - 1) * (1 - p), abs=1e-9)


def test_hill_eval_examples():
    dp, opt, ratio = hill_eval(hill_family(10, 0.5))
    assert (dp, opt, ratio) == pytest.approx((1, 5.5, 1 / 5.5), abs=1e-9)
    for p in (0.1, 0.5, 0.9):
        assert hill_eval(hill_family(2, p))[2] == pytest.approx(1 / (2 - p), abs=1e-9)
    ratio = hill_eval(hill_family(100, 0.5))[2]
    assert abs(ratio * 100 * 0.5 - 1) <= 0.02


def test_hill_every_start_worth_one():
    h = hill_family(8, 0.3)
    for k in range(8):
        assert attempt_from_index(h, k) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_hill_restricted_policies_are_optimal(n, p):
    h = hill_family(n, p)
    assert abs(scenario_dp_brute(h) - hill_eval(h)[0]) <= 1e-9


def test_scenario_brute_uses_history():
    inst = CorrelatedScenarioInstance((1.0, 1.0), ((0.5, (1, 0)), (0.5, (0, 1))))
    assert scenario_dp_brute(inst) == pytest.approx(1.0)
    assert max(attempt_from_index(inst, k) for k in range(2)) == pytest.approx(1.0)
    # a rejection at step 0 reveals that step 2 will accept, so step 1 is skipped
    inst = CorrelatedScenarioInstance((1.0, 1.0, 5.0), ((0.5, (1, 1, 0)), (0.5, (0, 1, 1))))
    assert scenario_dp_brute(inst) == pytest.approx(3.0)
    assert max(attempt_from_index(inst, k) for k in range(3)) == pytest.approx(2.5)


def test_scenario_validation_and_json():
    with pytest.raises(ParamOutOfRange):
        CorrelatedScenarioInstance((1.0,), ((0.5, (1,)),))
    with pytest.raises(ParamOutOfRange):
        CorrelatedScenarioInstance((1.0, 2.0), ((1.0, (1,)),))
    with pytest.raises(ParamOutOfRange):
        CorrelatedScenarioInstance((1.0,), ((1.0, (2,)),))
    h = hill_family(3, 0.5)
    assert CorrelatedScenarioInstance.from_dict(h.to_dict()) == h
    for bad in [(1, 0.5), (2, 0.0), (2, 1.0)]:
        with pytest.raises(ParamOutOfRange):
            hill_family(*bad)


def test_random_instance_determinism():
    assert random_instance(1, 3, 3) == random_instance(1, 3, 3)
    assert random_instance(1, 3, 3) != random_instance(2, 3, 3)
    inst = random_instance(7, 4, 2)
    assert len(inst) == 4 and max(inst.support_sizes) <= 2
    assert evaluate(inst).gamma >= 0.5


def test_random_corpus_shapes():
    corpus = random_corpus(12, 6, 4)
    assert [len(i) for i in corpus] == [1, 2, 3, 4, 5, 6] * 2


def test_with_min_accept():
    inst = with_min_accept(random_instance(3, 4, 3), 0.5)
    assert inst.min_accept >= 0.5


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_generators_produce_valid_output(name):
    fn, params = FAMILIES[name]
    defaults = {"v": 3.0, "p": 0.4, "a": 0.6, "n": 4, "eps": 0.01, "p_l": 0.5, "seed": 3, "max_support": 3}
    out = fn(**{k: defaults[k] for k in params})
    if isinstance(out, Instance):
        assert validate(out) == out
    else:
        assert isinstance(out, CorrelatedScenarioInstance)


def test_nonmono_domain():
    assert nonmono_fig(0.0).options[1].acceptance_prob == 0.0
    with pytest.raises(ParamOutOfRange):
        nonmono_fig(1.5)
    assert isinstance(nonmono_fig(1.0).options[1], OptionSpec)
