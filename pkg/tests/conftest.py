import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

HERE = Path(__file__).parent
GRAMMARS = HERE / "grammars"
sys.path.insert(0, str(HERE))

settings.register_profile("default", deadline=None, max_examples=1000,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
settings.register_profile("quick", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or report.failed:
        prev = _criteria.get(number)
        passed = report.passed and (prev is None or prev[1])
        _criteria[number] = (title, passed, report.duration + (prev[2] if prev else 0.0))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, passed, seconds = _criteria[number]
        terminalreporter.write_line("criterion %d %s  %-58s %7.1fs"
                                    % (number, "PASS" if passed else "FAIL", title, seconds))


@pytest.fixture
def grammar_path():
    return lambda name: GRAMMARS / name


@pytest.fixture(scope="session")
def json_grammar():
    from permlr import load_grammar
    return load_grammar(GRAMMARS / "json.g")


@pytest.fixture(scope="session")
def expr_grammar():
    from permlr import load_grammar
    return load_grammar(GRAMMARS / "expr.g")
