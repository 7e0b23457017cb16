"""
Run configuration: a flat `key = value` file overlaid with command-line flags.

Example file:

    # example instance
    mu = 0.3333333333333333
    p = 0.5
    c0 = 0.6666666666666666
    c1 = 1
    c2 = 1.5
    n_paths = 100000
    offsets = -0.1, -0.05, 0, 0.05, 0.1
"""

import argparse
import os
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Tuple

import config
from utils.decision_engine import ESTIMATORS
from utils.errors import ConfigError
from utils.model import Parameters
from utils.simulation import SimConfig


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> Tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_int(text: str) -> int:
    return int(text.strip())


CONFIG_KEYS: Dict[str, Callable[[str], object]] = {
    "mu": float,
    "p": float,
    "c0": float,
    "c1": float,
    "c2": float,
    "dt": float,
    "t_max": float,
    "m_stop": float,
    "seed": _parse_int,
    "scheme": str.strip,
    "n_paths": _parse_int,
    "estimator": str.strip,
    "offsets": _parse_floats,
    "workers": _parse_int,
    "use_tail": _parse_bool,
    "constrained": _parse_bool,
    "x_min": float,
    "x_max": float,
    "x_n": _parse_int,
    "grid_size": _parse_int,
    "tol": float,
    "path_index": _parse_int,
}

DEFAULTS = {
    "mu": config.MU,
    "p": config.P,
    "c0": config.C0,
    "c1": config.C1,
    "c2": config.C2,
    "dt": config.DT,
    "t_max": None,
    "m_stop": config.M_STOP,
    "seed": config.SEED,
    "scheme": config.SCHEME,
    "n_paths": config.N_PATHS,
    "estimator": config.ESTIMATOR,
    "offsets": config.OFFSETS,
    "workers": 1,
    "use_tail": True,
    "constrained": False,
    "x_min": config.X_MIN,
    "x_max": config.X_MAX,
    "x_n": config.X_N,
    "grid_size": config.PROPERTY_GRID,
    "tol": config.PROPERTY_TOL,
    "path_index": 0,
}


@dataclass(frozen=True)
class RunConfig:
    params: Parameters
    sim: SimConfig
    n_paths: int
    estimator: str
    offsets: Tuple[float, ...]
    workers: int
    use_tail: bool
    constrained: bool
    x_min: float
    x_max: float
    x_n: int
    grid_size: int
    tol: float
    path_index: int

    def __post_init__(self) -> None:
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"estimator must be one of {ESTIMATORS}, got {self.estimator!r}")
        if self.n_paths < 1:
            raise ConfigError(f"n_paths must be positive, got {self.n_paths}")
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        if not self.offsets:
            raise ConfigError("offsets must not be empty")
        if self.x_n < 2 or not -1.0 <= self.x_min < self.x_max <= 1.0:
            raise ConfigError(f"value grid needs -1 <= x_min < x_max <= 1 and x_n >= 2, "
                              f"got ({self.x_min}, {self.x_max}, {self.x_n})")
        if self.grid_size < 100:
            raise ConfigError(f"grid_size must be at least 100, got {self.grid_size}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.path_index < 0:
            raise ConfigError(f"path_index must be non-negative, got {self.path_index}")

    def to_dict(self) -> dict:
        """Flat echo of every resolved key except workers."""
        return {
            "mu": self.params.mu,
            "p": self.params.p,
            "c0": self.params.c0,
            "c1": self.params.c1,
            "c2": self.params.c2,
            "dt": self.sim.dt,
            "t_max": self.sim.t_max,
            "m_stop": self.sim.m_stop,
            "seed": self.sim.seed,
            "scheme": self.sim.scheme,
            "n_paths": self.n_paths,
            "estimator": self.estimator,
            "offsets": list(self.offsets),
            "use_tail": self.use_tail,
            "constrained": self.constrained,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "x_n": self.x_n,
            "grid_size": self.grid_size,
            "tol": self.tol,
            "path_index": self.path_index,
        }


def read_config_file(file_path: str) -> Dict[str, str]:
    """
    Read `key = value` lines; blank lines and `#` comments are ignored.

    Raises:
        ConfigError: If the file is missing, a line is malformed or a key repeats
    """
    if not os.path.exists(file_path):
        raise ConfigError(f"Config file not found: {file_path}")

    entries: Dict[str, str] = {}
    with open(file_path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            content = line.split("#", 1)[0].strip()
            if not content:
                continue
            if "=" not in content:
                raise ConfigError(f"{file_path}:{number}: expected 'key = value', got {content!r}")
            key, value = (part.strip() for part in content.split("=", 1))
            if key in entries:
                raise ConfigError(f"{file_path}:{number}: duplicate key {key!r}")
            entries[key] = value
    return entries


def _parse_values(raw: Mapping[str, str]) -> Dict[str, object]:
    unknown = sorted(set(raw) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"Unknown config key(s): {', '.join(unknown)}. Known keys: {', '.join(CONFIG_KEYS)}")
    parsed = {}
    for key, text in raw.items():
        try:
            parsed[key] = CONFIG_KEYS[key](text)
        except ValueError as e:
            raise ConfigError(f"Invalid value for {key!r}: {text!r} ({e})") from e
    return parsed


def load_config(file_path: Optional[str] = None, overrides: Optional[Mapping[str, str]] = None,
                environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    Build a RunConfig from defaults, a config file and overrides, in that order.

    Args:
        file_path: Config file; defaults to the path in $SEQTEST_CONFIG if set
        overrides: Raw string values from command-line flags
        environ: Environment to look the default path up in

    Raises:
        ConfigError: On unknown keys or unparsable values
        InvalidInstanceError: If the resolved values violate an invariant
    """
    environ = os.environ if environ is None else environ
    file_path = file_path or environ.get(config.CONFIG_ENV_VAR) or None

    raw: Dict[str, str] = {}
    if file_path:
        raw.update(read_config_file(file_path))
    raw.update(overrides or {})

    values = dict(DEFAULTS)
    values.update(_parse_values(raw))

    params = Parameters(mu=values["mu"], p=values["p"], c0=values["c0"], c1=values["c1"], c2=values["c2"])
    sim = SimConfig.for_instance(params, dt=values["dt"], t_max=values["t_max"], m_stop=values["m_stop"],
                                 seed=values["seed"], scheme=values["scheme"])
    return RunConfig(
        params=params,
        sim=sim,
        n_paths=values["n_paths"],
        estimator=values["estimator"],
        offsets=tuple(values["offsets"]),
        workers=values["workers"],
        use_tail=values["use_tail"],
        constrained=values["constrained"],
        x_min=values["x_min"],
        x_max=values["x_max"],
        x_n=values["x_n"],
        grid_size=values["grid_size"],
        tol=values["tol"],
        path_index=values["path_index"],
    )


def add_config_arguments(parser: argparse.ArgumentParser) -> None:
    """Add --config and one override flag per config key."""
    parser.add_argument("--config", default=None,
                        help=f"Config file (default: ${config.CONFIG_ENV_VAR})")
    for key in CONFIG_KEYS:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar="VALUE",
                            help=f"Override '{key}'")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {key: getattr(args, key) for key in CONFIG_KEYS if getattr(args, key, None) is not None}
    return load_config(args.config, overrides)
