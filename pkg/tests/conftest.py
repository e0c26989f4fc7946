import math

import numpy as np
from hypothesis import settings
from hypothesis import strategies as st

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def halfspace_points(draw, n=2):
    lateral = [draw(st.floats(-20, 20)) for _ in range(n - 1)]
    height = 10 ** draw(st.floats(-3, 2))
    return np.array(lateral + [height])


@st.composite
def disk_points(draw):
    r = 1 - 10 ** draw(st.floats(-5, 0))
    t = draw(st.floats(0, 2 * math.pi))
    return np.array([r * math.cos(t), r * math.sin(t)])


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
