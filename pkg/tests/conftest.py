import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from piua.model import Atom, Instance, OptionSpec, SBInstance, SBPair

settings.register_profile(
    "default", max_examples=60, deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("stress", max_examples=600, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

values = st.floats(min_value=0.0, max_value=50.0, allow_nan=False, allow_infinity=False)
probs = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def options(draw, max_support=4, min_accept=0.0):
    k = draw(st.integers(1, max_support))
    vals = draw(st.lists(values, min_size=k, max_size=k))
    weights = draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k))
    accepts = draw(st.lists(st.floats(min_accept, 1.0), min_size=k, max_size=k))
    total = sum(weights)
    return OptionSpec(tuple(Atom(v, w / total, a) for v, w, a in zip(vals, weights, accepts)))


@st.composite
def instances(draw, max_n=4, max_support=3, min_accept=0.0):
    n = draw(st.integers(1, max_n))
    return Instance(tuple(draw(options(max_support, min_accept)) for _ in range(n)))


@st.composite
def sb_instances(draw, max_n=6, min_p=0.01):
    n = draw(st.integers(1, max_n))
    lams = draw(st.lists(st.floats(0.0, 20.0), min_size=n, max_size=n))
    ps = draw(st.lists(st.floats(min_p, 1.0), min_size=n, max_size=n))
    return SBInstance(tuple(SBPair(lam, p) for lam, p in zip(lams, ps)))


def random_sb(rng: np.random.Generator, n: int) -> SBInstance:
    return SBInstance.from_lists(rng.uniform(0, 10, n).tolist(), rng.uniform(0.01, 1.0, n).tolist())


# -- acceptance report -----------------------------------------------------------------


_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, title = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _ACCEPTANCE[number] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[number]
        line = f"[{status}] {number:>2}. {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
