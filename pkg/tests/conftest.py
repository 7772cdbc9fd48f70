import pytest

# criterion number -> [title, passed, failed, notes]
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and report.passed):
        return
    n, title = mark.args
    row = _CRITERIA.setdefault(n, [title, 0, 0, []])
    if report.passed:
        row[1] += 1
    elif not report.skipped:
        row[2] += 1
    row[3].extend(f"{k}={v}" for k, v in item.user_properties if report.when == "call")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, ok, bad, notes = _CRITERIA[n]
        status = "PASS" if bad == 0 and ok > 0 else "FAIL"
        line = f"{status} criterion {n}: {title} ({ok} passed, {bad} failed)"
        if notes:
            line += " [" + "; ".join(notes) + "]"
        terminalreporter.write_line(line)
