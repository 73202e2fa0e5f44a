from __future__ import annotations

import numpy as np
import pytest

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    """Record one acceptance criterion: ``criterion(n, ok, detail)``; a failed part sticks."""
    def record(n: int, ok: bool, detail: str) -> bool:
        prev_ok, prev = _CRITERIA.get(n, (True, ""))
        _CRITERIA[n] = (prev_ok and bool(ok), f"{prev}; {detail}" if prev else detail)
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}")
