#!/usr/bin/env python3
"""
Configuration management for Wehrl stability sweeps
"""

import copy
import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional

from .constants import (ASYMMETRY_SAMPLES, CONFIG_FILE, DEFAULT_RULE_DEGREE, DEFAULT_SAMPLES, DEFAULT_SEED,
                        DEFAULT_WORKERS, default_omega_tilde)
from .errors import ConfigError
from .functionals import parse_phi

logger = logging.getLogger(__name__)

# List of all boolean configuration fields
BOOLEAN_FIELDS = [
    'asymmetry',
]

GENERATORS = ('gaussian', 'near_kernel', 'kernel', 'file')

DEFAULT_CONFIG: Dict[str, Dict[str, Any]] = {
    'problem': {
        'd': 2,
        'N': 6,
        'phi': ['xlogx', 'power:2', 'hinge:0.3', 'hinge:0.7'],
        'omegas': [0.1],
        'omega_tilde': None,
    },
    'sampling': {
        'seed': DEFAULT_SEED,
        'samples': DEFAULT_SAMPLES,
        'rule_degree': DEFAULT_RULE_DEGREE,
        'workers': DEFAULT_WORKERS,
        'asymmetry_samples': ASYMMETRY_SAMPLES,
        'audit_samples': 10_000_000,
    },
    'sweep': {
        'generator': 'gaussian',
        'count': 20,
        'eps_min': 0.01,
        'eps_max': 0.5,
        'poly_file': None,
        'random_regions': 2,
        'state_rank': 2,
        'asymmetry': True,
        'eps': [0.025, 0.05, 0.1, 0.2],
        'fock_degrees': [64, 256],
        'area': 1.0,
    },
}


def normalize_boolean(value: Any) -> bool:
    """Normalize a value to a proper boolean (True/False)

    Handles:
    - Python/JSON booleans
    - Strings ("true", "false", "1", "0", "yes", "no", "on", "off")
    - Integers (1, 0)

    Args:
        value: Value to normalize

    Returns:
        bool: Normalized boolean value
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        return value.lower() in ('true', '1', 'yes', 'on')
    if isinstance(value, (int, float)):
        return bool(value)
    return False


@dataclass
class SweepConfig:
    """Fully resolved sweep configuration"""

    d: int = 2
    N: int = 6
    phi: List[str] = field(default_factory=lambda: list(DEFAULT_CONFIG['problem']['phi']))
    omegas: List[float] = field(default_factory=lambda: [0.1])
    omega_tilde: Optional[float] = None
    seed: int = DEFAULT_SEED
    samples: int = DEFAULT_SAMPLES
    rule_degree: int = DEFAULT_RULE_DEGREE
    workers: int = DEFAULT_WORKERS
    asymmetry_samples: int = ASYMMETRY_SAMPLES
    audit_samples: int = 10_000_000
    generator: str = 'gaussian'
    count: int = 20
    eps_min: float = 0.01
    eps_max: float = 0.5
    poly_file: Optional[str] = None
    random_regions: int = 2
    state_rank: int = 2
    asymmetry: bool = True
    eps: List[float] = field(default_factory=lambda: [0.025, 0.05, 0.1, 0.2])
    fock_degrees: List[int] = field(default_factory=lambda: [64, 256])
    area: float = 1.0

    @property
    def resolved_omega_tilde(self) -> float:
        return default_omega_tilde(self.d) if self.omega_tilde is None else float(self.omega_tilde)

    def with_overrides(self, **changes: Any) -> 'SweepConfig':
        """Copy with the non-None overrides applied, validated"""
        updated = replace(self, **{k: v for k, v in changes.items() if v is not None})
        updated.validate()
        return updated

    def to_dict(self) -> Dict[str, Any]:
        """Sectioned form (the on-disk layout) with omega_tilde resolved"""
        flat = asdict(self)
        flat['omega_tilde'] = self.resolved_omega_tilde
        return {section: {key: flat[key] for key in keys} for section, keys in DEFAULT_CONFIG.items()}

    def validate(self) -> None:
        """Check ranges and grids

        Raises:
            ConfigError: Naming the offending field
        """
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError(f"{self.d} out of range (must be an integer >= 1)", 'problem.d')
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"{self.N} out of range (must be an integer >= 1)", 'problem.N')
        if not self.phi:
            raise ConfigError("grid is empty", 'problem.phi')
        for text in self.phi:
            parse_phi(text)
        omega_tilde = self.resolved_omega_tilde
        if not 0.0 < omega_tilde <= 1.0:
            raise ConfigError(f"{omega_tilde} out of range (must be in (0, 1])", 'problem.omega_tilde')
        if not self.omegas:
            raise ConfigError("grid is empty", 'problem.omegas')
        for omega in self.omegas:
            if not 0.0 < omega < 1.0:
                raise ConfigError(f"{omega} out of range (must be in (0, 1))", 'problem.omegas')
        for name in ('samples', 'rule_degree', 'workers', 'asymmetry_samples', 'audit_samples', 'count'):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError(f"{value} out of range (must be an integer >= 1)", name)
        if self.generator not in GENERATORS:
            raise ConfigError(f"'{self.generator}' is not one of {', '.join(GENERATORS)}", 'sweep.generator')
        if self.generator == 'file' and not self.poly_file:
            raise ConfigError("required when generator is 'file'", 'sweep.poly_file')
        if not 0.0 < self.eps_min <= self.eps_max <= 1.0:
            raise ConfigError(f"[{self.eps_min}, {self.eps_max}] out of range (must satisfy 0 < min <= max <= 1)",
                              'sweep.eps_min')
        if not self.eps or any(not 0.0 <= e <= 1.0 for e in self.eps):
            raise ConfigError("values must lie in [0, 1] and the grid must be non-empty", 'sweep.eps')
        if not self.fock_degrees or any(b <= a for a, b in zip(self.fock_degrees, self.fock_degrees[1:])):
            raise ConfigError("must be a non-empty increasing list", 'sweep.fock_degrees')
        if not self.area > 0:
            raise ConfigError(f"{self.area} out of range (must be > 0)", 'sweep.area')
        if self.random_regions < 0 or self.state_rank < 1:
            raise ConfigError("random_regions must be >= 0 and state_rank >= 1", 'sweep')

    def validate_stability(self) -> None:
        """Stability sweeps additionally need every omega below omega_tilde"""
        omega_tilde = self.resolved_omega_tilde
        for omega in self.omegas:
            if not omega < omega_tilde:
                raise ConfigError(f"{omega} out of range (must be in (0, omega_tilde={omega_tilde}))",
                                  'problem.omegas')


class ConfigManager:
    """Manages configuration file save/load operations"""

    def __init__(self, config_file: str = CONFIG_FILE):
        self.config_file = config_file

    def merge(self, data: Dict[str, Any], default_config: Optional[Dict[str, Dict[str, Any]]] = None
              ) -> SweepConfig:
        """Merge sectioned data over a copy of the defaults and validate

        Raises:
            ConfigError: For unknown sections/keys or invalid values
        """
        result = copy.deepcopy(default_config if default_config is not None else DEFAULT_CONFIG)
        if not isinstance(data, dict):
            raise ConfigError("top level must be a JSON object", 'config')
        for section, values in data.items():
            if section not in result:
                raise ConfigError("unknown section", section)
            if not isinstance(values, dict):
                raise ConfigError("section must be a JSON object", section)
            for key, value in values.items():
                if key not in result[section]:
                    raise ConfigError("unknown key", f"{section}.{key}")
                if key in BOOLEAN_FIELDS:
                    value = normalize_boolean(value)
                result[section][key] = value
        flat: Dict[str, Any] = {}
        for values in result.values():
            flat.update(values)
        try:
            config = SweepConfig(**flat)
        except TypeError as e:
            raise ConfigError(str(e), 'config') from e
        config.validate()
        return config

    def load_config(self, default_config: Optional[Dict[str, Dict[str, Any]]] = None) -> SweepConfig:
        """Load configuration from file, falling back to defaults when the file is missing

        Args:
            default_config: Sectioned defaults to merge over

        Returns:
            Validated SweepConfig
        """
        data: Dict[str, Any] = {}
        if os.path.exists(self.config_file):
            try:
                with open(self.config_file, 'r') as f:
                    data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigError(f"invalid JSON ({e})", os.path.basename(self.config_file)) from e
            logger.debug(f"Loaded sweep config from {self.config_file}")
        else:
            logger.info(f"No config file at {self.config_file}; using defaults")
        return self.merge(data, default_config)

    def save_config(self, config: SweepConfig) -> bool:
        """Save the fully resolved configuration to file

        Returns:
            True if save succeeded, False otherwise
        """
        try:
            with open(self.config_file, 'w') as f:
                json.dump(config.to_dict(), f, indent=2)
            return True
        except OSError as e:
            logger.warning(f"Could not save config to {self.config_file}: {e}")
            return False
