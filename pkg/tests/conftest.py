import numpy as np
import pytest

_acceptance = []
_notes = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_note():
    """Append a line to the acceptance section of the terminal summary."""
    return _notes.append


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        name = report.nodeid.split("::test_criterion_", 1)[1]
        _acceptance.append((name, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_acceptance, key=lambda x: int(x[0].split("_", 1)[0])):
        num, label = name.split("_", 1)
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {int(num):>2} {label.replace('_', ' '):<40} {verdict}")
    for line in _notes:
        terminalreporter.write_line(line)
