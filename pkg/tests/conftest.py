import numpy as np
import pytest

from fratio.montecarlo import RandomStream


@pytest.fixture
def stream():
    return RandomStream(20240607, 0)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Recorder for acceptance outcomes: ``record(number, part, ok, detail)``."""
    store = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number: int, part: str, ok: bool, detail: str) -> None:
        store.setdefault(number, []).append((part, bool(ok), detail))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_ACCEPTANCE, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(store):
        parts = store[number]
        ok = all(p[1] for p in parts)
        failed = [f"{name}: {detail}" for name, good, detail in parts if not good]
        shown = failed if failed else [f"{name}: {detail}" for name, _, detail in parts]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if ok else 'FAIL'} ({len(parts)} checks) " + "; ".join(shown))
