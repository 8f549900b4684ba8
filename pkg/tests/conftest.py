from pathlib import Path

import numpy as np
import pytest

from soficmat.formats import parse_matrix

DATA = Path(__file__).parent / "data"
DEFAULT_SEED = 20240101


def pytest_addoption(parser):
    parser.addoption("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized tests")


@pytest.fixture
def seed(request):
    return request.config.getoption("--seed")


@pytest.fixture
def rng(seed):
    return np.random.default_rng(seed)


def load(name):
    return parse_matrix((DATA / f"{name}.mat").read_text())


@pytest.fixture
def corpus():
    return {p.stem: parse_matrix(p.read_text()) for p in sorted(DATA.glob("*.mat"))}


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
