import pytest

from trigprod.numerics import PrecisionCfg

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def p113():
    return PrecisionCfg(113)


@pytest.fixture(scope="session")
def p256():
    return PrecisionCfg(256)


@pytest.fixture(params=[113, 256], ids=lambda b: f"P{b}")
def prec(request):
    return PrecisionCfg(request.param)


@pytest.fixture
def criterion():
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
