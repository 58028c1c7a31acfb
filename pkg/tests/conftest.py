import pytest
from hypothesis import settings

from mlar import corpus

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fig2():
    return corpus.fig2_frame()


@pytest.fixture(scope="session")
def buttons2():
    return corpus.button_lattice(2)


@pytest.fixture(scope="session")
def decisions1():
    return corpus.pruned_subframe(1)


@pytest.fixture(scope="session")
def decisions2():
    return corpus.pruned_subframe(2)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
