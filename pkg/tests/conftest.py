"""Shared pytest hooks: acceptance criteria report their verdicts here."""

VERDICTS = {}


def record_verdict(number: int, ok: bool, detail: str) -> None:
    VERDICTS[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        ok, detail = VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
