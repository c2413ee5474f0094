"""
Shared fixtures for the CovertLink test suite
"""

import numpy as np
import pytest

from config.numerics_config import FAULT_ENV_VAR, MAX_DIM_ENV_VAR
from src.numerics.covertlimits import ChannelParams
from src.numerics.fockspace import TruncationPolicy
from src.simulation.sim_config import SimConfig


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Tests never inherit the fault switch or a dimension override from the shell"""
    monkeypatch.delenv(FAULT_ENV_VAR, raising=False)
    monkeypatch.delenv(MAX_DIM_ENV_VAR, raising=False)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def channel():
    """eta = 1/2, one environment photon per mode (nT = 1/2)"""
    return ChannelParams(eta=0.5, nbar_B=1.0)


@pytest.fixture
def tight_policy():
    return TruncationPolicy(target_trace_deficit=1e-13)


@pytest.fixture
def small_config(channel):
    """Cheap experiment: tau ~ 0.155, about 150 occupied modes per trial"""
    return SimConfig(
        channel=channel,
        n_modes=1000,
        delta_qre=0.04,
        nbar_S_per_selected_mode=0.1,
        trials=20,
        master_seed=7,
    )
