import pytest

from gaborapprox import FrameParams


@pytest.fixture
def p1():
    return FrameParams(1.0, 1)


@pytest.fixture(params=[1.0, 4.0], ids=["k1", "k4"])
def pk(request):
    return FrameParams(request.param, 1)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance(request, capsys):
    """Record and print one PASS/FAIL line, then assert the criterion."""

    def report(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print(f"\n    {line}")
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
