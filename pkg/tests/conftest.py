import pytest

_ACCEPTANCE: list[tuple[str, bool, str]] = []


class _Report:
    def __call__(self, name: str, ok: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((name, bool(ok), detail))
        return bool(ok)


@pytest.fixture
def report():
    """Record one acceptance line; the terminal summary prints all of them."""
    return _Report()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
