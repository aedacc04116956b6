import math
from pathlib import Path

import numpy as np
import pytest
from pytest_mock import MockerFixture

from spinmem.config import Config
from spinmem.model import TWO_PI, EnsembleModel, PhysicalParams
from spinmem.workspace import Workspace


@pytest.fixture()
def workspace_root(tmp_path: Path) -> Path:
    return tmp_path / "runs/reference"


@pytest.fixture()
def workspace(workspace_root: Path) -> Workspace:
    return Workspace(workspace_root, restrict_to_workspace=True)


@pytest.fixture()
def config(mocker: MockerFixture, workspace: Workspace) -> Config:
    config = Config()

    # Do a little setup and teardown since the config object is a singleton
    mocker.patch.multiple(
        config,
        debug_mode=False,
        workers=1,
        cache_dir=workspace.cache_dir,
        cache_dir_from_env=False,
        log_dir=workspace.root / "logs",
        output_path=workspace.root,
    )
    yield config


@pytest.fixture()
def params() -> PhysicalParams:
    return PhysicalParams.reference()


@pytest.fixture()
def resonant_model(params: PhysicalParams) -> EnsembleModel:
    """Every spin on resonance with the mean coupling."""
    return EnsembleModel.from_arrays(params, [params.g_bar], [0.0], [params.n_total])


@pytest.fixture()
def three_spin_model() -> EnsembleModel:
    """Three single spins, detuned by -1, 0, +1 MHz, sharing gens equally."""
    params = PhysicalParams.reference(n_total=3.0, gens=TWO_PI * 1e6)
    g = params.gens / math.sqrt(3.0)
    deltas = TWO_PI * 1e6 * np.array([-1.0, 0.0, 1.0])
    return EnsembleModel.from_arrays(params, g, deltas, 1.0)
