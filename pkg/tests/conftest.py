import pytest

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}
N_CRITERIA = 10


class AcceptanceLog:
    """Records one pass/fail line per acceptance criterion."""

    def check(self, number: int, title: str, ok: bool, detail: str):
        _ACCEPTANCE[number] = (title, bool(ok), detail)
        print(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, f"criterion {number} ({title}) failed: {detail}"


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, N_CRITERIA + 1):
        if k in _ACCEPTANCE:
            title, ok, detail = _ACCEPTANCE[k]
            terminalreporter.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d} FAIL  not evaluated (test errored or was deselected)")
