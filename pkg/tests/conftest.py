import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from bo_measures.fourier import random_field

settings.register_profile(
    "default", max_examples=25, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(0, 2 ** 32 - 1)
sizes = st.sampled_from([1, 2, 3, 5, 8, 13, 16, 32])


@st.composite
def fields(draw, sizes=sizes):
    """Random FourierField with unit-disk coefficients."""
    return random_field(draw(sizes), np.random.default_rng(draw(seeds)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if rep.when == "call" and "criterion" in props:
                lines.append((props["criterion"], outcome, props["title"], props["detail"]))
    if lines:
        terminalreporter.section("acceptance criteria")
        for number, outcome, title, detail in sorted(lines):
            mark = "PASS" if outcome == "passed" else "FAIL"
            terminalreporter.write_line(f"[{mark}] {number:2d}. {title}: {detail}")
