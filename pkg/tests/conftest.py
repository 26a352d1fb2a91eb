import numpy as np
import pytest

from scenval.scenario import ScenarioSet
from scenval.synthetic import GeneratorSpec, as_scenario_set, generate


def ar1_set(n_scenarios, scenario_len=96, phi=0.8, seed=0, sigma=1.0, dt=0.25, label="ar1"):
    ts = generate(GeneratorSpec("ar1", n_scenarios * scenario_len, seed,
                                {"phi": phi, "sigma": sigma}, dt))
    return as_scenario_set(ts, scenario_len, label)[0]


@pytest.fixture
def small_set():
    return ScenarioSet([[1.0, 2.0], [3.0, 4.0]], 0.25, "small")


@pytest.fixture
def day_set():
    """30 days of 15-minute AR(1) scenarios."""
    return ar1_set(30, seed=11)


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)
