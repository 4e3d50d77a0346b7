import importlib.resources

import numpy as np
import pytest

from twofluid.io import parse_case
from twofluid.state import EosParams, Primitive

CASE_DIR = importlib.resources.files("twofluid") / "cases"

# stiffened gas / liquid pair used by the shock-tube cases
TOUMI_EOS = EosParams(K1=1.4, K2=2.8, p_inf1=0.0, p_inf2=8.5e8)


def shipped_case(name, **model_changes):
    case = parse_case(CASE_DIR / f"{name}.case")
    if model_changes:
        case = case.replace(model=case.model.replace(**model_changes))
    return case


def random_states(rng, n, eos=TOUMI_EOS, p_lo=5.0):
    """Admissible primitive states spread over a wide range."""
    alpha1 = rng.uniform(0.02, 0.98, n)
    rho1 = 10.0 ** rng.uniform(-0.5, 2.5, n)
    rho2 = 10.0 ** rng.uniform(2.5, 3.2, n)
    v1 = rng.uniform(-150.0, 150.0, n)
    v2 = rng.uniform(-30.0, 30.0, n)
    p = 10.0 ** rng.uniform(p_lo, 8.0, n)
    return Primitive(alpha1, rho1, rho2, v1, v2, p)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


@pytest.fixture
def eos():
    return TOUMI_EOS


# acceptance criteria report: label -> (passed, detail), filled by test_acceptance
ACCEPTANCE = {}


def record(label, passed, detail):
    ok, text = ACCEPTANCE.get(label, (True, ""))
    ACCEPTANCE[label] = (ok and bool(passed), f"{text}; {detail}" if text else detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{label} {'PASS' if ok else 'FAIL'}  {detail}")
