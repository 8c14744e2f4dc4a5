import contextlib
import time

import pytest

_LINES = []


class _Criterion:
    def __init__(self, tag, limit_s):
        self.tag, self.limit_s = tag, limit_s
        self.details = []
        self.ok = True

    def check(self, ok, detail):
        self.details.append(detail)
        self.ok &= bool(ok)


@pytest.fixture
def criterion():
    """Time a block, record one PASS/FAIL line, then fail the test if needed."""

    @contextlib.contextmanager
    def run(tag, limit_s):
        c = _Criterion(tag, limit_s)
        t0 = time.perf_counter()
        try:
            yield c
        except Exception as exc:
            c.check(False, f"error: {exc!r}")
        elapsed = time.perf_counter() - t0
        c.check(elapsed < limit_s, f"{elapsed:.1f}s (limit {limit_s:g}s)")
        line = f"{'PASS' if c.ok else 'FAIL'} {tag}: " + "; ".join(c.details)
        _LINES.append(line)
        print(line)
        assert c.ok, line

    return run


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
