import sys
from pathlib import Path

import pytest

from docforge.synth import FIXTURE_DIR, write_fixture_tree

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))

# filled in by test_acceptance, printed once at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def bundled():
    return FIXTURE_DIR


@pytest.fixture(scope="session")
def fixture_tree(tmp_path_factory):
    """A freshly generated 4-repo groundtruth root and archive."""
    gt_root, archive_root, repos = write_fixture_tree(tmp_path_factory.mktemp("tree"), n_repos=4)
    return gt_root, archive_root, repos


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
