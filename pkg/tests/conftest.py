import numpy as np
import pytest

from invset.synthesis import TemplateSpec, benchmark_problem, solve


def _solved(kind, **kw):
    result = solve(benchmark_problem(TemplateSpec(kind, **kw)))
    assert result.template is not None, f"{kind} {kw}: {result.status}"
    return result


@pytest.fixture(scope="session")
def ellipsoid_result():
    return _solved("ellipsoid")


@pytest.fixture(scope="session")
def baseline_result():
    return _solved("baseline")


@pytest.fixture(scope="session")
def polyset2_result():
    return _solved("polyset", degree=2)


@pytest.fixture(scope="session")
def polyset4_result():
    return _solved("polyset", degree=4)


@pytest.fixture(scope="session")
def polyset6_result():
    return _solved("polyset", degree=6)


@pytest.fixture(scope="session")
def polyset10_result():
    return _solved("polyset", degree=10)


@pytest.fixture(scope="session")
def polyset20_result():
    return _solved("polyset", degree=20)


@pytest.fixture(scope="session")
def piecewise43_result():
    return _solved("piecewise", m1=4, m2=3)


@pytest.fixture(scope="session")
def piecewise85_result():
    return _solved("piecewise", m1=8, m2=5)


@pytest.fixture
def rng():
    return np.random.default_rng(20250821)
