import pytest

from levysmooth.levy_model import LevyModel, StableMeasure, make_qweight


@pytest.fixture(scope="session")
def truncated():
    """TruncatedStable(alpha=1.5, K=1, d=1)."""
    return LevyModel(StableMeasure(1.5, 1, K=1.0))


@pytest.fixture(scope="session")
def cauchy():
    return LevyModel(StableMeasure(1.0, 1))


@pytest.fixture(scope="session")
def q_beta1(truncated):
    return make_qweight(truncated.measure, "beta_power", beta=1.0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
