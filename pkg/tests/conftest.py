import math

import numpy as np
import pytest

from thomsonwp.dynamics import ElectronConfig, simulate_electron
from thomsonwp.laser import BeamConfig


@pytest.fixture(scope="session")
def focus_beam():
    return BeamConfig(model="focused_pulsed", wavelength_nm=800, peak_intensity_W_cm2=1e19,
                      fwhm_fs=35, waist_over_lambda=3)


@pytest.fixture(scope="session")
def focus_trajectory(focus_beam):
    return simulate_electron(focus_beam, ElectronConfig())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)




ACCEPTANCE_DETAILS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_DETAILS] = {}


@pytest.fixture
def criterion(request):
    """Record a one-line measurement for the acceptance summary, keyed by the test."""
    details = request.config.stash[ACCEPTANCE_DETAILS]

    def record(text):
        details[request.node.nodeid] = text
        print(text)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    details = config.stash.get(ACCEPTANCE_DETAILS, {})
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance.py" not in rep.nodeid or rep.when != "call" and outcome == "passed":
                continue
            name = rep.nodeid.split("::")[-1]
            if not name.startswith("test_criterion_"):
                continue
            rows.append((name, "PASS" if outcome == "passed" else "FAIL",
                         details.get(rep.nodeid, "")))
    if not rows:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, status, text in sorted(set(rows)):
        num = int(name.split("_")[2])
        terminalreporter.write_line(f"criterion {num:2d} {status}  {name[18:]}: {text}")
