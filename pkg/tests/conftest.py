import os

import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record ``(number, description, passed, detail)`` for the summary table."""

    def record(number, description, passed, detail=""):
        ACCEPTANCE[number] = (description, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        description, passed, detail = ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {number}: {description}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
