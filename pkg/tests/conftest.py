"""Collects ``criterion`` markers and prints one PASS/FAIL line per criterion."""

import pytest

_titles: dict[int, str] = {}
_failed: dict[int, bool] = {}
_owner: dict[str, int] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        num, title = mark.args
        _titles[num] = title
        _failed.setdefault(num, False)
        _owner[item.nodeid] = num


def pytest_runtest_logreport(report):
    num = _owner.get(report.nodeid)
    if num is not None and (report.failed or (report.when == "call" and report.skipped)):
        _failed[num] = True


def pytest_terminal_summary(terminalreporter):
    if not _titles:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_titles):
        tr.write_line(f"{'FAIL' if _failed[num] else 'PASS'}  #{num:<2d} {_titles[num]}")


@pytest.fixture(scope="session")
def cache():
    return {}
