import pytest

from spinmem.config import RunConfig
from spinmem.main import result_cache, tuned_setup

MEANS_ONLY = {"integrator": {"mode": "means_only"}}


@pytest.fixture()
def reference_config(config) -> RunConfig:
    return RunConfig()


@pytest.fixture()
def homogeneous_config(config) -> RunConfig:
    return RunConfig({"discretization": {"coupling": {"homogeneous": True}}})


@pytest.fixture()
def means_only_config(config) -> RunConfig:
    return RunConfig(MEANS_ONLY)


@pytest.fixture()
def means_only_setup(means_only_config, workspace):
    """Tuned reference setup integrating first moments only."""
    return tuned_setup(
        means_only_config,
        result_cache(workspace),
        means_only_config["protocol"]["t_mem_s"],
    )
