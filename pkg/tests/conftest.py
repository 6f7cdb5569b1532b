import numpy as np
import pytest

from mg1split import MG1Model


def pytest_addoption(parser):
    parser.addoption(
        "--full", action="store_true", default=False, help="run the long-running benchmark rows"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--full"):
        return
    skip = pytest.mark.skip(reason="long-running; pass --full to run")
    for item in items:
        if "full" in item.keywords:
            item.add_marker(skip)


def scalar_model(a_m1, a0, a1):
    return MG1Model(tuple(np.array([[x]]) for x in (a_m1, a0, a1)))


@pytest.fixture
def recurrent_scalar():
    # 0.3 x^2 - 0.7 x + 0.4 = 0, roots 1 and 4/3
    return scalar_model(0.4, 0.3, 0.3)


@pytest.fixture
def transient_scalar():
    # 0.4 x^2 - 0.7 x + 0.3 = 0, roots 0.75 and 1
    return scalar_model(0.3, 0.3, 0.4)


_LINES = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance verdict; prints it and fails the test on FAIL."""
    lines = request.config.stash.setdefault(_LINES, [])

    def record(number, title, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:>2}: {title}" + (f" [{detail}]" if detail else "")
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
