import pytest

from rotwalk import SimConfig, StopRule, TrajectoryColumns, derive_stream, run_trajectory

# Pass/fail lines recorded by the acceptance tests, echoed at the end of the
# run so they are visible whether or not the tests pass.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.line(line)


@pytest.fixture(scope="session")
def medium_run():
    """One 50k-event default-parameter trajectory shared across test files."""
    config = SimConfig(seed=424242, stop=StopRule(max_events=50_000))
    cols = TrajectoryColumns(capacity=50_001)
    summary = run_trajectory(config, derive_stream(config.seed, 0), cols)
    return config, cols, summary
