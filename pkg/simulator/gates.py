"""Target phase gate, computational encoding and state fidelities."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from .dynamics import DensityMatrix, StateVector
from .exceptions import BasisMismatchError, GateSpecError
from .hilbert import BasisState, OperatorMatrix, QuditLevel, SubspaceBasis, SystemLayout

DATA_LOGICAL = (QuditLevel.F, QuditLevel.G)
CENTRAL_LOGICAL = (QuditLevel.F, QuditLevel.S)

NORMALIZATION_TOLERANCE = 1e-12


def wrap_phase(phase: float) -> float:
    """Map an angle into (-pi, pi]."""
    return math.pi - (math.pi - phase) % (2.0 * math.pi)


def phase_error(phase: float, target: float) -> float:
    return abs(wrap_phase(phase - target))


class ComputationalEncoding:
    """Data qubits use {f=0, g=1}; qudit A uses {f=0, s=1}.

    States are ordered lexicographically over sites 1..N-1, A, so the flagged
    state g...g s_A comes last.
    """

    def __init__(self, layout: SystemLayout) -> None:
        self.layout = layout

    @cached_property
    def states(self) -> Tuple[BasisState, ...]:
        sites = [DATA_LOGICAL] * self.layout.n_data + [CENTRAL_LOGICAL]
        vacuum = (0,) * self.layout.n_modes
        return tuple(BasisState(levels, vacuum) for levels in itertools.product(*sites))

    @property
    def flagged(self) -> BasisState:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.states)

    def bits(self, state: BasisState) -> str:
        logical = [DATA_LOGICAL] * self.layout.n_data + [CENTRAL_LOGICAL]
        try:
            return "".join(str(levels.index(level)) for levels, level in zip(logical, state.levels))
        except ValueError as exc:
            raise GateSpecError(f"{state.label()} is not a computational state") from exc

    def positions(self, basis: SubspaceBasis) -> List[int]:
        """Basis positions of the computational states, full or qudit-only basis."""
        positions = []
        for state in self.states:
            position = basis.index.get(state)
            if position is None:
                position = basis.index.get(state.qudit_part())
            if position is None:
                raise GateSpecError(f"computational state {state.label()} missing from the basis")
            positions.append(position)
        return positions


@dataclass(frozen=True)
class GateSpec:
    n_qubits: int
    delta: float = math.pi

    def __post_init__(self) -> None:
        if self.n_qubits < 2:
            raise GateSpecError(f"a phase gate needs n_qubits >= 2, got {self.n_qubits}")
        if not -math.pi < self.delta <= math.pi:
            raise GateSpecError(f"gate phase {self.delta} outside (-pi, pi]")

    @classmethod
    def from_phase(cls, n_qubits: int, phase: float) -> "GateSpec":
        return cls(n_qubits, wrap_phase(phase))

    def encoding(self, layout: Optional[SystemLayout] = None) -> ComputationalEncoding:
        layout = layout or SystemLayout(self.n_qubits)
        if layout.n_qubits != self.n_qubits:
            raise GateSpecError(f"{self.n_qubits}-qubit gate on a {layout.n_qubits}-qubit layout")
        return ComputationalEncoding(layout)

    @property
    def flagged_state(self) -> BasisState:
        return self.encoding().flagged


def _layout_of(basis: SubspaceBasis, n_qubits: int) -> SystemLayout:
    if basis.layout is not None:
        return basis.layout
    return SystemLayout(n_qubits)


def target_unitary(spec: GateSpec, basis: SubspaceBasis) -> OperatorMatrix:
    encoding = spec.encoding(_layout_of(basis, spec.n_qubits))
    flagged = encoding.positions(basis)[-1]
    diagonal = np.ones(len(basis), dtype=complex)
    diagonal[flagged] = np.exp(1j * spec.delta)
    real = abs(math.sin(spec.delta)) < 1e-15
    return OperatorMatrix(basis, sp.diags(diagonal, format="csr"), real, "U_p")


@dataclass(frozen=True, eq=False)
class InputState:
    """Amplitudes over the computational states, in encoding order."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.shape != (2**self.n_qubits,):
            raise GateSpecError(f"expected {2 ** self.n_qubits} amplitudes, got {amplitudes.shape[0]}")
        total = float(np.sum(np.abs(amplitudes) ** 2))
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise GateSpecError(f"input state has squared norm {total:.15f}")
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def from_labels(cls, n_qubits: int, amplitudes: Mapping[str, complex]) -> "InputState":
        encoding = ComputationalEncoding(SystemLayout(n_qubits))
        lookup = {state.qudit_part().label(): i for i, state in enumerate(encoding.states)}
        vector = np.zeros(len(encoding), dtype=complex)
        for label, amplitude in amplitudes.items():
            key = BasisState.from_label(label).qudit_part().label()
            if key not in lookup:
                raise GateSpecError(f"{label!r} is not a computational state")
            vector[lookup[key]] = amplitude
        return cls(n_qubits, vector)

    @classmethod
    def ladder_three_qubit(cls) -> "InputState":
        return cls.from_labels(
            3,
            {
                "f1 f2 fA": 1 / 6,
                "f1 g2 fA": math.sqrt(2) / 6,
                "f1 f2 sA": math.sqrt(3) / 6,
                "f1 g2 sA": 1 / 3,
                "g1 f2 fA": math.sqrt(5) / 6,
                "g1 g2 fA": math.sqrt(6) / 6,
                "g1 f2 sA": math.sqrt(7) / 6,
                "g1 g2 sA": math.sqrt(2) / 3,
            },
        )

    @classmethod
    def uniform(cls, n_qubits: int) -> "InputState":
        return cls(n_qubits, np.full(2**n_qubits, 2 ** (-n_qubits / 2), dtype=complex))

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "InputState":
        vector = np.zeros(2**n_qubits, dtype=complex)
        vector[index] = 1.0
        return cls(n_qubits, vector)

    def as_vector(self, basis: SubspaceBasis) -> np.ndarray:
        encoding = ComputationalEncoding(_layout_of(basis, self.n_qubits))
        vector = np.zeros(len(basis), dtype=complex)
        vector[encoding.positions(basis)] = self.amplitudes
        return vector

    def as_state(self, basis: SubspaceBasis) -> StateVector:
        return StateVector(basis, self.as_vector(basis))

    def by_label(self) -> Dict[str, complex]:
        encoding = ComputationalEncoding(SystemLayout(self.n_qubits))
        return {
            state.qudit_part().label(): complex(amp)
            for state, amp in zip(encoding.states, self.amplitudes)
        }


def _ideal_image(spec: GateSpec, input_state: InputState, basis: SubspaceBasis) -> np.ndarray:
    if input_state.n_qubits != spec.n_qubits:
        raise GateSpecError("input state and gate disagree on the number of qubits")
    return target_unitary(spec, basis).matrix @ input_state.as_vector(basis)


def pure_fidelity(final: StateVector, input_state: InputState, spec: GateSpec) -> float:
    """|<psi(tau)| U_p |Psi(0)>|^2, with no global-phase forgiveness."""
    ideal = _ideal_image(spec, input_state, final.basis)
    return float(abs(np.vdot(final.amplitudes, ideal)) ** 2)


def partial_trace_modes(rho: DensityMatrix) -> DensityMatrix:
    """Trace out the resonators; qudit configurations keep first-appearance order."""
    qudit_states: Dict[BasisState, int] = {}
    sectors: Dict[Tuple[int, ...], List[Tuple[int, int]]] = {}
    for full, state in enumerate(rho.basis.states):
        reduced = state.qudit_part()
        position = qudit_states.setdefault(reduced, len(qudit_states))
        sectors.setdefault(state.photons, []).append((position, full))

    size = len(qudit_states)
    matrix = np.zeros((size, size), dtype=complex)
    for members in sectors.values():
        reduced_idx = [position for position, _ in members]
        full_idx = [full for _, full in members]
        matrix[np.ix_(reduced_idx, reduced_idx)] += rho.matrix[np.ix_(full_idx, full_idx)]
    return DensityMatrix(SubspaceBasis(tuple(qudit_states)), matrix)


def mixed_fidelity(rho_reduced: DensityMatrix, input_state: InputState, spec: GateSpec) -> float:
    """<Psi(0)| U_p^dagger rho' U_p |Psi(0)> on the qudit-only density matrix."""
    if any(state.photons for state in rho_reduced.basis.states):
        rho_reduced = partial_trace_modes(rho_reduced)
    ideal = _ideal_image(spec, input_state, rho_reduced.basis)
    return float(np.vdot(ideal, rho_reduced.matrix @ ideal).real)


def return_amplitude(final: StateVector, state: BasisState) -> complex:
    return final.amplitude(state)


def acquired_phase(final: StateVector, state: BasisState) -> float:
    amplitude = return_amplitude(final, state)
    if abs(amplitude) == 0.0:
        raise BasisMismatchError(f"no amplitude left on {state.label()}")
    return float(np.angle(amplitude))
