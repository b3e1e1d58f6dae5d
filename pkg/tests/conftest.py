import numpy as np
import pytest

from voreal import _backend

ACCEPTANCE_LINES: list[str] = []

BACKENDS = [_backend.python_kernels]
if _backend.compiled_kernels is not None:
    BACKENDS.insert(0, _backend.compiled_kernels)


@pytest.fixture(params=BACKENDS, ids=lambda k: k.__name__.rsplit(".", 1)[-1])
def kernels(request, monkeypatch):
    """Run a test once per kernel implementation, routed through the public API."""
    k = request.param
    for name in ("nearest_sites", "cell_areas_2d", "grouped_hull_areas_2d"):
        monkeypatch.setattr(_backend, name, getattr(k, name))
    return k


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_report():
    def emit(criterion: str, passed: bool, detail: str = ""):
        ACCEPTANCE_LINES.append(f"{criterion}: {'PASS' if passed else 'FAIL'}  {detail}")
    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
