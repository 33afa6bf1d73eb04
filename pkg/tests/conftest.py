import contextlib
import time
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from mldegree.core import parse_document

settings.register_profile(
    "repo", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow], max_examples=60
)
settings.load_profile("repo")

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# criterion number -> (passed, detail)
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record a PASS/FAIL line for an acceptance criterion around the enclosed checks."""
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE[number] = (False, f"{title} ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})")
        raise
    ACCEPTANCE[number] = (True, f"{title} ({time.perf_counter() - start:.1f}s)")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def example_doc():
    return parse_document((FIXTURES / "quartic_cubic.json").read_text())


@pytest.fixture(scope="session")
def example_system(example_doc):
    return example_doc.system
