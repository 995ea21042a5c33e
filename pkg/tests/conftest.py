import pytest

_CRITERIA: dict[int, list[str]] = {}
_LABELS: dict[int, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number = mark.args[0]
        _LABELS[number] = mark.args[1] if len(mark.args) > 1 else ""
        _CRITERIA.setdefault(number, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        label, results = _LABELS[number], _CRITERIA[number]
        ok = all(outcome == "passed" for outcome in results)
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {label} ({len(results)} checks)")
