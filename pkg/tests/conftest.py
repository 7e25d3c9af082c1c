import pytest

from ferrostat.explore import ExperimentSetup, pin_parameters
from ferrostat.model import P0, TF_SAT_REPLETE
from ferrostat.simulate import cutoff_experiment
from ferrostat.steady import steady_state
from ferrostat.stl import EvalEnvironment, build_iron_spec


@pytest.fixture(scope="session")
def p0_pinned():
    return pin_parameters(P0)


@pytest.fixture(scope="session")
def p0_steady():
    return steady_state(P0, TF_SAT_REPLETE)


@pytest.fixture(scope="session")
def p0_trace(p0_steady):
    """The 48 h cutoff trace at the published parameter set."""
    return cutoff_experiment(P0, p0_steady.state)


@pytest.fixture(scope="session")
def pinned_trace(p0_pinned):
    """The 48 h cutoff trace at the pinned parameter set."""
    init = steady_state(p0_pinned, TF_SAT_REPLETE).state
    return cutoff_experiment(p0_pinned, init)


@pytest.fixture(scope="session")
def iron_spec():
    return build_iron_spec()


@pytest.fixture(scope="session")
def pinned_env(pinned_trace, p0_pinned):
    return EvalEnvironment(pinned_trace, p0_pinned.bindings())


@pytest.fixture(scope="session")
def setup_default():
    return ExperimentSetup()
