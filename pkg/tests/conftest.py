import hypothesis
import pytest

from fdbandit.core import ArmStatistics, BanditInstance

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile("ci")


def stats_from(mean_pulls):
    """``[(mean, pulls), ...]`` -> list of ArmStatistics."""
    return [ArmStatistics(n, m * n) for m, n in mean_pulls]


@pytest.fixture
def two_arm():
    return BanditInstance.gaussian([0.9, 0.6], 0.5)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
