import pytest

from robustcbp.replication import ReplicationSetup, run_replicates

ACCEPTANCE_LINES = []


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def replication_200():
    """200 surviving trajectories of the contaminated geometric generator."""
    return run_replicates(ReplicationSetup(checkpoints=(15, 30, 45), kinds=("HD",)),
                          seed=20240601, target_survivors=200)
