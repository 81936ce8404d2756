"""Simulator tunables from Django settings and per-run model parameter files.

A run file uses dotenv syntax::

    # three-qubit gate, non-resonant
    n_qubits=3
    omega=0.1
    delta=1.0
    g_data=1.1,0.9
    kappa=0.01
    gamma=0.001
    gamma_A_s=0.002

It is parsed by django-environ against a private mapping, so loading a file
never touches ``os.environ``.
"""

from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Any, Dict, Optional, Union

import environ
from django.conf import settings

from .exceptions import ConfigError, SimulatorError
from .hamiltonian import ModelParams

logger = logging.getLogger(__name__)

SIMULATOR_DEFAULTS: Dict[str, Any] = {
    "MAX_SUBSPACE_STATES": 4096,
    "DENSE_DIM_LIMIT": 64,
    "KRYLOV_DIM": 30,
    "KRYLOV_TOLERANCE": 1e-10,
    "DEFAULT_SAMPLES": 400,
    "RWA_WARN_RATIO": 0.2,
    "TRUTH_TABLE_MIN_FIDELITY": 0.98,
    "TRUTH_TABLE_MAX_PHASE_ERROR": 0.05,
    "RECORD_RUNS": True,
    "OUTPUT_DIR": "output",
}

MODEL_KEYS = {"n_qubits", "omega", "delta", "g_data", "g_central", "kappa", "gamma", "n_max"}
GAMMA_OVERRIDE = re.compile(r"^gamma_(?P<site>[0-9]+|A)_(?P<level>[gsf])$")


def simulator_settings() -> Dict[str, Any]:
    return {**SIMULATOR_DEFAULTS, **getattr(settings, "SIMULATOR", {})}


def propagation_options() -> Dict[str, Any]:
    """Keyword arguments for ``propagate_state`` / ``propagate_density``."""
    conf = simulator_settings()
    return {
        "dense_dim_limit": int(conf["DENSE_DIM_LIMIT"]),
        "krylov_dim": int(conf["KRYLOV_DIM"]),
        "tolerance": float(conf["KRYLOV_TOLERANCE"]),
    }


def _private_env() -> type:
    return type("RunConfigEnv", (environ.Env,), {"ENVIRON": {}})


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Parse a run file into ModelParams keyword arguments."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")

    env_class = _private_env()
    env_class.read_env(str(path), parse_comments=True)
    raw = env_class.ENVIRON
    env = env_class()

    unknown = sorted(key for key in raw if key not in MODEL_KEYS and not GAMMA_OVERRIDE.match(key))
    if unknown:
        raise ConfigError(f"unknown keys in {path.name}: {', '.join(unknown)}")

    values: Dict[str, Any] = {}
    try:
        if "n_qubits" in raw:
            values["n_qubits"] = env.int("n_qubits")
        if "n_max" in raw:
            values["n_max"] = env.int("n_max")
        for key in ("omega", "delta", "g_central", "gamma"):
            if key in raw:
                values[key] = env.float(key)
        for key in ("g_data", "kappa"):
            if key in raw:
                values[key] = tuple(env.list(key, cast=float))
        overrides = []
        for key in raw:
            match = GAMMA_OVERRIDE.match(key)
            if match:
                overrides.append((f"{match['site']}_{match['level']}", env.float(key)))
        if overrides:
            values["gamma_overrides"] = tuple(overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value in {path.name}: {exc}") from exc
    return values


def load_model_params(path: Optional[Union[str, Path]] = None, **overrides: Any) -> ModelParams:
    """File values first, then every non-None override on top."""
    values: Dict[str, Any] = read_config_file(path) if path else {}
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("g_data", "kappa") and not isinstance(value, (tuple, list)):
            value = (value,)
        values[key] = value
    try:
        params = ModelParams(**values)
        params.hamiltonian_spec()
        params.decoherence()
    except SimulatorError as exc:
        raise ConfigError(str(exc)) from exc
    except TypeError as exc:
        raise ConfigError(f"unsupported parameter: {exc}") from exc
    logger.debug("model parameters resolved", extra={"source": str(path or "defaults")})
    return params
