from pathlib import Path

import pytest

from dualbath.bath import BathParams

CONFIG_DIR = Path(__file__).resolve().parents[1] / "demos" / "configs"


@pytest.fixture
def fig2_bath():
    """Boson bath of the steady-state parameter set."""
    return BathParams(kappa1=0.05, kappa2=0.0, kappa3=0.0, omega_c=2.0, beta=2.0)


@pytest.fixture
def mqs_bath():
    """Ensemble-bath parameter set for superposition generation."""
    return BathParams(kappa1=0.0, kappa2=0.0, kappa3=0.5, omega_c=1.0, beta=100.0)


@pytest.fixture
def config_dir():
    return CONFIG_DIR
