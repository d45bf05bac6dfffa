import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number): acceptance criterion checked by this test")


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None and (report.when == "call" or report.outcome != "passed"):
        number = marker.args[0]
        detail = dict(item.user_properties).get("detail", "")
        passed = report.outcome == "passed"
        previous = _CRITERIA.get(number)
        if previous is None or previous[0]:
            _CRITERIA[number] = (passed, detail)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        word = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {word}  {detail}".rstrip())
