import numpy as np
import pytest

# the 5x8 measurement matrix used as a running group-testing example
PRINTED_MATRIX = np.array([
    [0, 0, 1, 1, 0, 1, 1, 0],
    [1, 0, 1, 0, 0, 1, 0, 1],
    [0, 1, 0, 1, 0, 1, 0, 0],
    [0, 0, 0, 0, 1, 0, 1, 1],
    [1, 0, 1, 0, 1, 1, 1, 0],
], dtype=np.uint8)


@pytest.fixture
def printed_matrix():
    return PRINTED_MATRIX.copy()


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


# -- acceptance summary: one line per criterion, printed after the run

_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): numbered acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    num, title = mark.args
    ok = call.excinfo is None
    _ACCEPTANCE[num] = ("PASS" if ok else "FAIL", title, call.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        status, title, dur = _ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {status}  {title}  ({dur:.1f} s)")
