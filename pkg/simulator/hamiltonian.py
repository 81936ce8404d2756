"""Drive, coupling and dissipation operators of the star-coupled qudit array.

Frequencies are in units of the reference coupling g and times in 1/g.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .exceptions import LayoutError, ParameterError
from .hilbert import (
    Dyad,
    ModeShift,
    OperatorMatrix,
    OperatorTerm,
    QuditLevel,
    SubspaceBasis,
    SystemLayout,
    build_operator,
)

logger = logging.getLogger(__name__)

RELAXATION_TARGETS = (QuditLevel.G, QuditLevel.S, QuditLevel.F)


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class PulseParams:
    omega: float
    delta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega", _finite("omega", self.omega))
        object.__setattr__(self, "delta", _finite("delta", self.delta))
        if self.omega < 0:
            raise ParameterError(f"omega must be >= 0, got {self.omega}")

    @property
    def resonant(self) -> bool:
        return self.delta == 0.0


@dataclass(frozen=True)
class Couplings:
    g_data: Tuple[float, ...]
    g_central: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "g_data", tuple(_finite("g_data", value) for value in self.g_data)
        )
        object.__setattr__(self, "g_central", _finite("g_central", self.g_central))

    @classmethod
    def uniform(cls, layout: SystemLayout, g: float = 1.0) -> "Couplings":
        return cls((g,) * layout.n_data, g)

    def with_mismatch(self, deltas: Sequence[float]) -> "Couplings":
        """Shift data couplings g_i -> g_i + dg_i; g_A is left alone."""
        if len(deltas) != len(self.g_data):
            raise ParameterError(
                f"expected {len(self.g_data)} coupling offsets, got {len(deltas)}"
            )
        return Couplings(
            tuple(g + dg for g, dg in zip(self.g_data, deltas)), self.g_central
        )

    def check(self, layout: SystemLayout) -> None:
        if len(self.g_data) != layout.n_data:
            raise LayoutError(
                f"{len(self.g_data)} data couplings for {layout.n_data} data qudits"
            )


@dataclass(frozen=True)
class DecoherenceParams:
    """Photon loss per mode and relaxation |e> -> |n> per qudit."""

    kappa: Tuple[float, ...]
    gamma: Mapping[Tuple[int, QuditLevel], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kappa", tuple(_finite("kappa", k) for k in self.kappa))
        rates: Dict[Tuple[int, QuditLevel], float] = {}
        for (qudit, level), rate in dict(self.gamma).items():
            level = QuditLevel.parse(level)
            if level not in RELAXATION_TARGETS:
                raise ParameterError(f"relaxation target must be g, s or f, got {level.label}")
            rates[(int(qudit), level)] = _finite("gamma", rate)
        object.__setattr__(self, "gamma", rates)
        negative = [k for k in self.kappa if k < 0] + [g for g in rates.values() if g < 0]
        if negative:
            raise ParameterError(f"decay rates must be >= 0, got {negative[0]}")

    @classmethod
    def uniform(cls, layout: SystemLayout, kappa: float = 0.0, gamma: float = 0.0) -> "DecoherenceParams":
        return cls(
            (kappa,) * layout.n_modes,
            {(q, level): gamma for q in range(layout.n_qubits) for level in RELAXATION_TARGETS},
        )

    def rate(self, qudit: int, level: QuditLevel) -> float:
        return self.gamma.get((qudit, level), 0.0)

    @property
    def is_dissipative(self) -> bool:
        return any(k > 0 for k in self.kappa) or any(g > 0 for g in self.gamma.values())

    def check(self, layout: SystemLayout) -> None:
        if len(self.kappa) != layout.n_modes:
            raise LayoutError(f"{len(self.kappa)} photon decay rates for {layout.n_modes} modes")
        for qudit, _level in self.gamma:
            if not 0 <= qudit < layout.n_qubits:
                raise LayoutError(f"relaxation rate for unknown qudit index {qudit}")


@dataclass(frozen=True)
class HamiltonianSpec:
    layout: SystemLayout
    pulse: PulseParams
    couplings: Couplings

    def __post_init__(self) -> None:
        self.couplings.check(self.layout)

    @classmethod
    def ideal(cls, n_qubits: int, omega: float, delta: float, *, n_max: int = 1) -> "HamiltonianSpec":
        layout = SystemLayout(n_qubits, n_max)
        return cls(layout, PulseParams(omega, delta), Couplings.uniform(layout))


@dataclass(frozen=True)
class ModelParams:
    """Flat parameter bundle as read from a run config file."""

    n_qubits: int = 3
    omega: float = 0.1
    delta: float = 1.0
    g_data: Optional[Tuple[float, ...]] = None
    g_central: float = 1.0
    kappa: Tuple[float, ...] = (0.0,)
    gamma: float = 0.0
    gamma_overrides: Tuple[Tuple[str, float], ...] = ()
    n_max: int = 1

    def __post_init__(self) -> None:
        if self.g_data is not None:
            object.__setattr__(self, "g_data", tuple(float(g) for g in self.g_data))
        object.__setattr__(self, "kappa", tuple(float(k) for k in self.kappa))
        object.__setattr__(
            self,
            "gamma_overrides",
            tuple(sorted((str(key), float(rate)) for key, rate in self.gamma_overrides)),
        )

    def layout(self) -> SystemLayout:
        return SystemLayout(self.n_qubits, self.n_max)

    def couplings(self) -> Couplings:
        layout = self.layout()
        g_data = self.g_data or (self.g_central,)
        return Couplings(_broadcast("g_data", g_data, layout.n_data), self.g_central)

    def hamiltonian_spec(self) -> HamiltonianSpec:
        return HamiltonianSpec(self.layout(), PulseParams(self.omega, self.delta), self.couplings())

    def decoherence(self) -> DecoherenceParams:
        layout = self.layout()
        rates = {
            (q, level): self.gamma for q in range(layout.n_qubits) for level in RELAXATION_TARGETS
        }
        for key, rate in self.gamma_overrides:
            site, _, level = key.partition("_")
            rates[(layout.qudit_index(site), QuditLevel.parse(level))] = rate
        params = DecoherenceParams(_broadcast("kappa", self.kappa, layout.n_modes), rates)
        params.check(layout)
        return params

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "ModelParams":
        """Inverse of ``as_dict``; used for task payloads."""
        data = dict(data)
        data["g_data"] = tuple(data["g_data"]) if data.get("g_data") is not None else None
        data["kappa"] = tuple(data.get("kappa", (0.0,)))
        data["gamma_overrides"] = tuple(dict(data.get("gamma_overrides") or {}).items())
        return cls(**data)

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> Dict[str, object]:
        return {
            "n_qubits": self.n_qubits,
            "omega": self.omega,
            "delta": self.delta,
            "g_data": list(self.couplings().g_data),
            "g_central": self.g_central,
            "kappa": list(_broadcast("kappa", self.kappa, self.n_qubits - 1)),
            "gamma": self.gamma,
            "gamma_overrides": dict(self.gamma_overrides),
            "n_max": self.n_max,
        }


def _broadcast(name: str, values: Sequence[float], size: int) -> Tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if len(values) == 1:
        return values * size
    if len(values) != size:
        raise LayoutError(f"{name} needs 1 or {size} values, got {len(values)}")
    return values


# ---------------------------------------------------------------------------
# Generator sets
# ---------------------------------------------------------------------------


def h1_terms(spec: HamiltonianSpec) -> List[OperatorTerm]:
    layout, pulse = spec.layout, spec.pulse
    terms = [
        OperatorTerm((Dyad(q, QuditLevel.E, QuditLevel.E),), pulse.delta)
        for q in range(layout.n_qubits)
    ]
    terms.append(
        OperatorTerm(
            (Dyad(layout.central, QuditLevel.S, QuditLevel.E),),
            pulse.omega,
            hermitian_conjugate=True,
        )
    )
    return terms


def h2_terms(spec: HamiltonianSpec) -> List[OperatorTerm]:
    layout, couplings = spec.layout, spec.couplings
    terms = [
        OperatorTerm(
            (ModeShift(i, raising=True), Dyad(i, QuditLevel.G, QuditLevel.E)),
            couplings.g_data[i],
            hermitian_conjugate=True,
        )
        for i in range(layout.n_modes)
    ]
    terms.extend(
        OperatorTerm(
            (ModeShift(i, raising=True), Dyad(layout.central, QuditLevel.G, QuditLevel.E)),
            couplings.g_central,
            hermitian_conjugate=True,
        )
        for i in range(layout.n_modes)
    )
    return terms


def hamiltonian_terms(spec: HamiltonianSpec) -> List[OperatorTerm]:
    return h1_terms(spec) + h2_terms(spec)


class JumpTerm(NamedTuple):
    name: str
    rate: float
    term: OperatorTerm


def jump_terms(params: DecoherenceParams, layout: SystemLayout) -> List[JumpTerm]:
    """Mode channels first, then qudits 1..N-1, A with targets g, s, f."""
    params.check(layout)
    channels = [
        JumpTerm(f"a_{i + 1}", params.kappa[i], OperatorTerm((ModeShift(i, raising=False),)))
        for i in range(layout.n_modes)
    ]
    for qudit in range(layout.n_qubits):
        site = layout.site_name(qudit)
        for level in RELAXATION_TARGETS:
            channels.append(
                JumpTerm(
                    f"sigma_{level.label}_{site}",
                    params.rate(qudit, level),
                    OperatorTerm((Dyad(qudit, level, QuditLevel.E),)),
                )
            )
    return channels


def closure_generators(
    spec: HamiltonianSpec, decoherence: Optional[DecoherenceParams] = None
) -> List[OperatorTerm]:
    terms = hamiltonian_terms(spec)
    if decoherence is not None:
        terms.extend(channel.term for channel in jump_terms(decoherence, spec.layout))
    return terms


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


class JumpChannel(NamedTuple):
    rate: float
    operator: OperatorMatrix


def build_H1(spec: HamiltonianSpec, basis: SubspaceBasis) -> OperatorMatrix:
    return build_operator(h1_terms(spec), basis, name="H1")


def build_H2(spec: HamiltonianSpec, basis: SubspaceBasis) -> OperatorMatrix:
    return build_operator(h2_terms(spec), basis, name="H2")


def build_hamiltonian(spec: HamiltonianSpec, basis: SubspaceBasis) -> OperatorMatrix:
    return build_operator(hamiltonian_terms(spec), basis, name="H")


def build_jump_operators(
    params: DecoherenceParams, layout: SystemLayout, basis: SubspaceBasis
) -> List[JumpChannel]:
    return [
        JumpChannel(channel.rate, build_operator([channel.term], basis, name=channel.name))
        for channel in jump_terms(params, layout)
    ]


def swapped_spec(spec: HamiltonianSpec, i: int, j: int) -> HamiltonianSpec:
    """Same model with data qudits ``i`` and ``j`` (and their resonators) exchanged."""
    g_data = list(spec.couplings.g_data)
    g_data[i], g_data[j] = g_data[j], g_data[i]
    return replace(spec, couplings=Couplings(tuple(g_data), spec.couplings.g_central))


# ---------------------------------------------------------------------------
# Units
# ---------------------------------------------------------------------------


def to_nanoseconds(gt: float, g_mhz: float) -> float:
    """Convert dimensionless gt to ns for g = 2*pi*g_mhz MHz."""
    if g_mhz <= 0:
        raise ParameterError(f"g_mhz must be positive, got {g_mhz}")
    return gt / (2.0 * math.pi * g_mhz) * 1e3


def rate_from_lifetime(lifetime_us: float, g_mhz: float) -> float:
    """Rate in units of g for a lifetime given in microseconds."""
    if lifetime_us <= 0 or g_mhz <= 0:
        raise ParameterError("lifetime and g_mhz must be positive")
    return 1.0 / (2.0 * math.pi * g_mhz * lifetime_us)
