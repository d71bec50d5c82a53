import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def table_224_rows():
    """Value table for k=d=2, b=4 scaled by 221, rows l=0..4."""
    return [
        [0, 16, 37, 63, 93, 125, 157, 189, 221],
        [48, 59, 75, 97, 125, 157, 189, 221],
        [101, 107, 117, 133, 157, 189, 221],
        [159, 161, 165, 173, 189, 221],
        [221, 221, 221, 221, 221],
    ]
