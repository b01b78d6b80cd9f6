import pytest

from synthcard.config import load_config
from synthcard.pipeline import generate, prepare

# criterion number -> (title, passed, detail), filled in by the acceptance tests
ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def small_run():
    """A quick 30-consumer, 35-year configuration."""
    return load_config(overrides={"consumers": 30, "seed": 11})


@pytest.fixture(scope="session")
def small_prep(small_run):
    return prepare(small_run)


@pytest.fixture(scope="session")
def small_dataset(small_run, small_prep, tmp_path_factory):
    out = tmp_path_factory.mktemp("small_dataset")
    manifest = generate(small_run, out, prep=small_prep)
    return out, manifest


@pytest.fixture
def record():
    def _record(number: int, title: str, passed: bool, detail: str = ""):
        ACCEPTANCE[number] = (title, bool(passed), detail)
        assert passed, f"criterion {number} ({title}) failed: {detail}"
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
