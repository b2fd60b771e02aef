from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qmrgen.archgraph import parse_arch  # noqa: E402
from qmrgen.circuit import parse_circuit  # noqa: E402
from qmrgen.problems import gen_arch, load_builtin  # noqa: E402

INSTANCES = Path(__file__).resolve().parent.parent / "instances"

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")


@pytest.fixture(scope="session")
def nisqmr():
    return load_builtin("nisqmr")


@pytest.fixture(scope="session")
def nisq_ve():
    return load_builtin("nisq_ve")


@pytest.fixture(scope="session")
def scmr():
    return load_builtin("scmr")


@pytest.fixture
def line4():
    return parse_arch(gen_arch("line", 4))


@pytest.fixture
def grid3():
    return parse_arch(gen_arch("grid", 3, 3))


@pytest.fixture
def cycle_circuit():
    return parse_circuit("cx 0 1\ncx 2 3\ncx 1 3\ncx 0 2")


@pytest.fixture
def two_cx_circuit():
    return parse_circuit("cx 0 1\ncx 3 2")
