import numpy as np
import pytest
from hypothesis import settings

from newshawkes import _pycore

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

try:
    from newshawkes import _core
except ImportError:  # extension not built
    _core = None

BACKENDS = [_pycore] + ([_core] if _core is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance summary ------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion."""
    def _record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
