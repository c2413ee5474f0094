"""
Simulation Configuration for CovertLink
SimConfig documents, loaded from JSON or YAML
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from config.numerics_config import SIMULATION_CONFIG
from src.numerics.constellations import Constellation
from src.numerics.covertlimits import ChannelParams, sparsification_tau
from src.numerics.errors import ConfigurationRejectedError, InvalidParameterError

logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64

_REQUIRED_KEYS = ('channel', 'n_modes', 'delta_qre', 'nbar_S_per_selected_mode')
_OPTIONAL_KEYS = ('constellation', 'trials', 'master_seed', 'workers', 'tau_override')


@dataclass(frozen=True)
class SimConfig:
    """
    One Monte Carlo experiment

    The sparsification fraction is derived from the covert budget unless tau_override is set;
    an override deliberately bypasses the budget (used to study detectable operating points).
    """
    channel: ChannelParams
    n_modes: int
    delta_qre: float
    nbar_S_per_selected_mode: float
    constellation: Constellation = field(default_factory=lambda: Constellation.qpsk(1.0))
    trials: int = SIMULATION_CONFIG['default_trials']
    master_seed: int = 0
    workers: int = SIMULATION_CONFIG['default_workers']
    tau_override: Optional[float] = None

    def __post_init__(self):
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise InvalidParameterError(f"n_modes must be a positive integer, got {self.n_modes}")
        object.__setattr__(self, 'n_modes', int(self.n_modes))
        if self.delta_qre <= 0:
            raise InvalidParameterError(f"delta_qre must be positive, got {self.delta_qre}")
        if self.nbar_S_per_selected_mode < 0:
            raise InvalidParameterError(
                f"nbar_S_per_selected_mode must be non-negative, got {self.nbar_S_per_selected_mode}")
        if self.nbar_S_per_selected_mode == 0 and self.tau_override is None:
            raise ConfigurationRejectedError("nbar_S_per_selected_mode = 0 needs an explicit tau_override")
        if self.trials < 1:
            raise InvalidParameterError(f"trials must be at least 1, got {self.trials}")
        if not (0 <= self.master_seed < SEED_LIMIT):
            raise InvalidParameterError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        if self.workers < 1:
            raise InvalidParameterError(f"workers must be at least 1, got {self.workers}")
        if self.tau_override is not None and not (0.0 <= self.tau_override <= 1.0):
            raise InvalidParameterError(f"tau_override must lie in [0, 1], got {self.tau_override}")
        if self.tau_override is None:
            # BudgetNotBindingError when the covert budget would need tau > 1
            self.tau

    @property
    def tau(self) -> float:
        """Sparsification fraction; raises BudgetNotBindingError when the budget does not bind"""
        if self.tau_override is not None:
            return self.tau_override
        return sparsification_tau(self.nbar_S_per_selected_mode, self.channel, self.delta_qre, self.n_modes)

    @property
    def transmit_constellation(self) -> Constellation:
        """Alice's alphabet at the configured per-selected-mode energy"""
        return self.constellation.scaled_to(self.nbar_S_per_selected_mode)

    def with_modes(self, n_modes: int) -> "SimConfig":
        return replace(self, n_modes=n_modes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'channel': {'eta': self.channel.eta, 'nbar_B': self.channel.nbar_B},
            'n_modes': self.n_modes,
            'delta_qre': self.delta_qre,
            'nbar_S_per_selected_mode': self.nbar_S_per_selected_mode,
            'constellation': self.constellation.to_dict(),
            'trials': self.trials,
            'master_seed': self.master_seed,
            'workers': self.workers,
            'tau_override': self.tau_override,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SimConfig":
        if not isinstance(data, dict):
            raise ConfigurationRejectedError(f"Simulation config must be a mapping, got {type(data).__name__}")
        missing = [key for key in _REQUIRED_KEYS if key not in data]
        if missing:
            raise ConfigurationRejectedError(f"Simulation config is missing: {', '.join(missing)}")
        unknown = sorted(set(data) - set(_REQUIRED_KEYS) - set(_OPTIONAL_KEYS))
        if unknown:
            raise ConfigurationRejectedError(f"Unknown simulation config keys: {', '.join(unknown)}")

        channel = data['channel']
        kwargs = {
            'channel': ChannelParams(eta=float(channel['eta']), nbar_B=float(channel['nbar_B'])),
            'n_modes': _as_count(data['n_modes'], 'n_modes'),
            'delta_qre': float(data['delta_qre']),
            'nbar_S_per_selected_mode': float(data['nbar_S_per_selected_mode']),
        }
        if 'constellation' in data:
            kwargs['constellation'] = Constellation.from_dict(data['constellation'])
        for key in ('trials', 'master_seed', 'workers'):
            if data.get(key) is not None:
                kwargs[key] = _as_count(data[key], key)
        if data.get('tau_override') is not None:
            kwargs['tau_override'] = float(data['tau_override'])
        return cls(**kwargs)


def _as_count(value: Any, name: str) -> int:
    """Integers written as 1e5 in documents are accepted when exact"""
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    if not math.isfinite(number) or number != int(number):
        raise InvalidParameterError(f"{name} must be an integer, got {value}")
    return int(number)


def load_sim_config(config_file: Union[str, Path]) -> SimConfig:
    """Load a SimConfig from a YAML or JSON file"""
    path = Path(config_file)
    if not path.exists():
        raise ConfigurationRejectedError(f"Simulation config not found: {path}")

    try:
        with open(path, 'r') as f:
            if path.suffix in ('.yaml', '.yml'):
                data = yaml.safe_load(f)
            elif path.suffix == '.json':
                data = json.load(f)
            else:
                raise ConfigurationRejectedError(f"Unsupported config file format: {path}")
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigurationRejectedError(f"Could not parse {path}: {e}") from e

    logger.debug(f"Loaded simulation config from {path}")
    return SimConfig.from_dict(data)
