import pytest

from singpoints.linalg import RngStream

# criterion number -> (passed, summary line); filled by the acceptance tests
_ACCEPTANCE: dict[int, list] = {}


@pytest.fixture
def rng():
    return RngStream(20240607)


@pytest.fixture
def record(request):
    """Attach a one-line summary to the acceptance criterion of the running test."""
    marker = request.node.get_closest_marker("acceptance")
    num = marker.args[0]

    def _record(text: str):
        _ACCEPTANCE.setdefault(num, [None, "", 0.0])[1] = text

    return _record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call":
        return
    entry = _ACCEPTANCE.setdefault(marker.args[0], [None, "", 0.0])
    entry[0] = rep.passed
    entry[2] = rep.duration
    if not entry[1]:
        entry[1] = item.name


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        passed, text, dt = _ACCEPTANCE[num]
        flag = "PASS" if passed else "FAIL"
        tr.write_line(f"[{flag}] criterion {num:2d} ({dt:6.1f}s): {text}")
