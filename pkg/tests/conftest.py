"""Shared fixtures: the expensive theory-curve cache and a reference
synthetic campaign, built once per session."""

import numpy as np
import pytest

from casimirlab import assemble
from casimirlab.analysis import analyze_campaign
from casimirlab.config import RunConfig
from casimirlab.synth import generate_scans

# Pass/fail lines emitted by the acceptance module; printed in the
# terminal summary so every run shows one line per criterion.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def default_cfg():
    return RunConfig()


@pytest.fixture(scope="session")
def drude_model(default_cfg):
    return assemble.dielectric_model(default_cfg, force_drude=True)


@pytest.fixture(scope="session")
def drude_params(default_cfg, drude_model):
    return assemble.theory_params(default_cfg, drude_model)


@pytest.fixture(scope="session")
def drude_curve(default_cfg, drude_params):
    return assemble.theory_curve(default_cfg, drude_params)


@pytest.fixture(scope="session")
def e_cfg(default_cfg):
    return assemble.electrostatic_config(default_cfg)


@pytest.fixture(scope="session")
def truth(default_cfg):
    return assemble.synth_truth(default_cfg)


@pytest.fixture(scope="session")
def campaign(truth, drude_curve, e_cfg):
    """(grounded scans, applied-voltage scans) at the default 27-scan truth."""
    return generate_scans(truth, drude_curve, e_cfg)


@pytest.fixture(scope="session")
def campaign_results(campaign, drude_curve, e_cfg, truth):
    grounded, voltage_scans = campaign
    results, mean_curve, std = analyze_campaign(
        voltage_scans, grounded, drude_curve, e_cfg, truth.cap_offset_nm)
    return results, mean_curve, std
