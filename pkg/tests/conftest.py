import json
from pathlib import Path

import numpy as np
import pytest

ORACLE_FILE = Path(__file__).with_name("oracles.json")


@pytest.fixture(scope="session")
def oracle():
    """Frozen reference values from tests/generate_oracles.py."""
    return json.loads(ORACLE_FILE.read_text(encoding="utf-8"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
