import pytest

from discrete_electrostatics import families as fam

# (criterion number, verdict, detail) rows filled by test_acceptance
ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append((number, ok, detail))
    print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}")


STANDARD_PRESETS = [
    fam.charlier(1.0, 3),
    fam.charlier(5.0, 6),
    fam.krawtchouk(0.3, 10, 4),
    fam.meixner(1.5, 0.3, 4),
    fam.hahn(1.0, 2.0, 12, 5),
    fam.dual_hahn(1.0, 2.0, 8, 3),
    fam.racah(8, 12.0, 1.0, 1.0, 3),
]


@pytest.fixture(params=STANDARD_PRESETS, ids=lambda s: s.label())
def preset(request):
    return request.param
