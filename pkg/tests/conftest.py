import pytest

from ibrdiff.scenarios import StudyConfig, run_matrix


@pytest.fixture(scope="session")
def default_study():
    return StudyConfig()


@pytest.fixture(scope="session")
def default_results(default_study):
    return run_matrix(default_study)


ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance criterion's outcome for the terminal summary."""
    state = {}

    def record(number, name):
        state["key"] = (number, name)
        ACCEPTANCE[(number, name)] = "FAIL"
    yield record
    rep = getattr(request.node, "rep_call", None)
    if "key" in state and rep is not None and rep.passed:
        ACCEPTANCE[state["key"]] = "PASS"


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, name), status in sorted(ACCEPTANCE.items(), key=lambda kv: (kv[0][0] == 0, kv[0][0])):
        label = f"{number:>2}" if number else " -"
        terminalreporter.write_line(f"[{status}] {label} {name}")
