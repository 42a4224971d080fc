import sys

import pytest

from hetero_orch import kernels
from hetero_orch.catalog import table1_catalog


@pytest.fixture
def table1():
    return table1_catalog()


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    impl = kernels.available_backends()[request.param]
    monkeypatch.setattr(kernels, "exact_search", impl.exact_search)
    monkeypatch.setattr(kernels, "fluid_serve", impl.fluid_serve)
    return request.param


def pytest_terminal_summary(terminalreporter):
    module = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    RESULTS = getattr(module, "RESULTS", None)
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        ok, line = RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {line}")
