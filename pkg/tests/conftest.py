import pytest

from bdm.numerics import RngStream

_CRITERIA = []


@pytest.fixture
def rng():
    return RngStream(0, 0)


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    props = dict(report.user_properties)
    if "criterion" in props:
        _CRITERIA.append((props["criterion"], report.outcome, report.duration, props.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, outcome, secs, detail in sorted(_CRITERIA):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {label:<44s} {secs:7.2f}s  {detail}")
