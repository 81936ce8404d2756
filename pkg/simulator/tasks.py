"""Celery tasks for single sweep points.

Payloads are plain JSON: ``ModelParams.as_dict()``, a regime name, an
optional list of ``[re, im]`` input amplitudes and the target gate phase.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np
from celery import shared_task

from .experiments import decoherent_gate_fidelity, gate_fidelity
from .gates import InputState
from .hamiltonian import ModelParams

logger = logging.getLogger(__name__)


def _input_state(n_qubits: int, amplitudes: Optional[List[List[float]]]) -> Optional[InputState]:
    if amplitudes is None:
        return None
    return InputState(n_qubits, np.array([complex(re, im) for re, im in amplitudes]))


@shared_task(name="simulator.gate_fidelity_point")
def gate_fidelity_point(params: Dict[str, Any], regime: str, amplitudes=None, phase: float = math.pi) -> float:
    model = ModelParams.from_dict(params)
    fidelity = gate_fidelity(model, regime, _input_state(model.n_qubits, amplitudes), phase)
    logger.debug("gate point", extra={"regime": regime, "g_data": params.get("g_data"), "fidelity": fidelity})
    return fidelity


@shared_task(name="simulator.decoherent_fidelity_point")
def decoherent_fidelity_point(
    params: Dict[str, Any], regime: str, amplitudes=None, phase: float = math.pi
) -> float:
    model = ModelParams.from_dict(params)
    fidelity = decoherent_gate_fidelity(model, regime, _input_state(model.n_qubits, amplitudes), phase)
    logger.debug(
        "decoherent point",
        extra={"regime": regime, "kappa": params.get("kappa"), "gamma": params.get("gamma"), "fidelity": fidelity},
    )
    return fidelity
