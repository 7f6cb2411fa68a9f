import numpy as np
import pytest
from hypothesis import settings

from hccalab.curve import load_curve
from hccalab.gf2m import FieldId

settings.register_profile("repro", derandomize=True, deadline=None, max_examples=200)
settings.load_profile("repro")


@pytest.fixture
def rng():
    return np.random.default_rng(20181203)


@pytest.fixture(params=list(FieldId), ids=lambda f: f.name)
def field(request):
    return request.param


@pytest.fixture(params=["B233", "B283"])
def curve(request):
    return load_curve(request.param)


# --- acceptance reporting: one PASS/FAIL line per criterion ------------------

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Context manager factory: ``with criterion(3, "ladder") as c: ...; c.detail = "..."``."""
    log = request.config.stash[_ACCEPTANCE]

    class _Check:
        def __init__(self, number, title):
            self.number, self.title, self.detail = number, title, ""

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            status = "PASS" if exc_type is None else "FAIL"
            why = self.detail if exc_type is None else f"{exc_type.__name__}: {exc}"
            line = f"criterion {self.number} {status}: {self.title}" + (f" ({why})" if why else "")
            log.append(line)
            print(line)
            return False

    return _Check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
