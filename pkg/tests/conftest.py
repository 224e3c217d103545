import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, print_blob=True)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def acceptance():
    """Record one verdict line per criterion: ``acceptance(tag, ok, detail)``."""
    def record(tag: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE[tag] = (bool(ok), detail)
        print(f"{tag} {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(_ACCEPTANCE, key=lambda t: int(t[2:])):
        ok, detail = _ACCEPTANCE[tag]
        terminalreporter.write_line(f"{tag} {'PASS' if ok else 'FAIL'} {detail}")
