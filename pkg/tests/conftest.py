import pytest

from butson.fixtures import w19 as _w19
from butson.petrescu import extract_blocks


@pytest.fixture(scope="session")
def w19():
    return _w19()


@pytest.fixture(scope="session")
def w19_blocks(w19):
    return extract_blocks(w19, 6)


# -- acceptance summary ------------------------------------------------------

_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        num, title = mark.args
        _ACCEPTANCE[num] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        title, status = _ACCEPTANCE[num]
        terminalreporter.write_line(f"[{status}] {num}. {title}")
