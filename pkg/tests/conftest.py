from __future__ import annotations

import contextlib

import pytest

_ACCEPTANCE: dict[int, tuple[bool, str, str]] = {}


class _Recorder:
    def __init__(self):
        self.detail = ""

    @contextlib.contextmanager
    def __call__(self, number: int, title: str):
        self.detail = ""
        try:
            yield self
        except BaseException as exc:
            msg = str(exc).strip().splitlines()
            _ACCEPTANCE[number] = (False, title, self.detail or (msg[0] if msg else type(exc).__name__))
            print(f"FAIL criterion {number}: {title}: {_ACCEPTANCE[number][2]}")
            raise
        _ACCEPTANCE[number] = (True, title, self.detail)
        print(f"PASS criterion {number}: {title}: {self.detail}")


@pytest.fixture
def criterion():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, title, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}: {detail}")
