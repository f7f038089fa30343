from __future__ import annotations

import numpy as np
import pytest

from uepfb.channel import Channel


@pytest.fixture(scope="session")
def bsc001() -> Channel:
    return Channel.bsc(0.01)


@pytest.fixture(scope="session")
def bsc005() -> Channel:
    return Channel.bsc(0.05)


@pytest.fixture(scope="session")
def bsc01() -> Channel:
    return Channel.bsc(0.1)


@pytest.fixture(scope="session")
def ternary() -> Channel:
    return Channel(np.array([[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.25, 0.25, 0.5]]))


def write_channel(path, w: Channel):
    import json

    path.write_text(json.dumps(w.to_json()))
    return path


# acceptance criteria report one line each at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
