import math

import numpy as np
import pytest
from hypothesis import settings

from dnchoreo.spectral import FourierCurve

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


def random_curve(rng, K_max=16, T=2 * math.pi, decay=1.0, zero_mean=True):
    """Band-limited real curve with geometrically decaying random coefficients."""
    modes = {}
    for k in range(1, K_max + 1):
        modes[k] = (rng.standard_normal(2) + 1j * rng.standard_normal(2)) * math.exp(-decay * k / 4)
    curve = FourierCurve.from_modes(T, K_max, modes)
    if not zero_mean:
        c = np.array(curve.coeffs)
        c[K_max] = rng.standard_normal(2)
        curve = FourierCurve(T, c)
    return curve


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None:
        return
    ran = {int(r.nodeid.split("criterion_")[1][:2])
           for key in ("passed", "failed", "error")
           for r in terminalreporter.stats.get(key, [])
           if "test_acceptance.py::test_criterion_" in getattr(r, "nodeid", "")}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ran):
        line = mod.RESULTS.get(num, f"FAIL  criterion {num:2d}: raised before completing (see failure above)")
        terminalreporter.write_line(line)
