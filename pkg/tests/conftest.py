import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("default")

FS = 60.0


@pytest.fixture
def t400():
    return np.arange(400) / FS


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Context-manager factory that records one PASS/FAIL line per acceptance criterion."""
    from contextlib import contextmanager

    def plain(v):
        if isinstance(v, dict):
            return {k: plain(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return type(v)(plain(x) for x in v)
        return v.item() if isinstance(v, np.generic) else v

    @contextmanager
    def record(number, title):
        details = {}
        try:
            yield details
        except BaseException:
            line = f"criterion {number:2d} FAIL  {title}  {plain(details)}"
            ACCEPTANCE_LINES.append(line)
            print(line)
            raise
        line = f"criterion {number:2d} PASS  {title}  {plain(details)}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
