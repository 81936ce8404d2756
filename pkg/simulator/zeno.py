"""Spectral analysis of the coupling Hamiltonian and the Zeno-limited drive.

The coupling Hamiltonian H2 splits every invariant subspace into eigenbranches.
When g >> Omega the drive H1 only acts inside the zero-energy branch holding
the seed, which leaves a one-state model (spectator sectors) or a two-state
model (the g...g s_A sector: seed plus one dark state).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .exceptions import NonHermitianError, ParameterError, ResonantRegimeError, ZenoError
from .hamiltonian import HamiltonianSpec, PulseParams, build_H1, build_H2, hamiltonian_terms
from .hilbert import BasisState, OperatorMatrix, QuditLevel, SubspaceBasis, enumerate_reachable

logger = logging.getLogger(__name__)

GROUPING_TOLERANCE = 1e-9
HERMITIAN_TOLERANCE = 1e-12
RWA_WARN_RATIO = 0.2

NONRESONANT = "nonresonant"
RESONANT = "resonant"


class SpectralBranch(NamedTuple):
    value: float
    multiplicity: int
    projector: OperatorMatrix


@dataclass(frozen=True, eq=False)
class ZenoSubspace:
    basis: SubspaceBasis
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    branches: Tuple[SpectralBranch, ...]

    @property
    def eigenprojectors(self) -> List[OperatorMatrix]:
        return [branch.projector for branch in self.branches]

    @property
    def dark_branch(self) -> Optional[SpectralBranch]:
        for branch in self.branches:
            if abs(branch.value) <= GROUPING_TOLERANCE:
                return branch
        return None

    @property
    def dark_projector(self) -> OperatorMatrix:
        branch = self.dark_branch
        if branch is not None:
            return branch.projector
        size = len(self.basis)
        return OperatorMatrix(self.basis, sp.csr_matrix((size, size), dtype=complex), True, "P[0]")

    def branch_for(self, value: float) -> SpectralBranch:
        for branch in self.branches:
            if abs(branch.value - value) <= 1e-6:
                return branch
        raise ZenoError(f"no eigenbranch at {value:.6g}")


@dataclass(frozen=True, eq=False)
class EffectiveModel:
    """Drive restricted to the zero-energy branch of H2."""

    labels: Tuple[str, ...]
    kets: np.ndarray
    hamiltonian: np.ndarray
    regime: str

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def coupling(self) -> float:
        """Seed-to-dark matrix element, 0 for a decoupled seed."""
        return float(self.hamiltonian[1, 0].real) if self.dim == 2 else 0.0

    def evolve(self, t: float) -> np.ndarray:
        """Seed evolved for time ``t``, as amplitudes over ``labels``."""
        start = np.zeros(self.dim, dtype=complex)
        start[0] = 1.0
        return la.expm(-1j * self.hamiltonian * t) @ start


def _as_dense_projector(basis: SubspaceBasis, vectors: np.ndarray, value: float) -> OperatorMatrix:
    projector = vectors @ vectors.conj().T
    projector[np.abs(projector) < 1e-15] = 0.0
    return OperatorMatrix(basis, sp.csr_matrix(projector), True, f"P[{value:.6g}]")


def diagonalize_H2(basis: SubspaceBasis, h2: OperatorMatrix) -> ZenoSubspace:
    if h2.basis != basis:
        raise ZenoError("H2 was built on a different basis")
    if h2.hermiticity_error() > HERMITIAN_TOLERANCE:
        raise NonHermitianError(f"{h2.name or 'operator'} is not Hermitian")

    values, vectors = la.eigh(h2.toarray())
    branches: List[SpectralBranch] = []
    start = 0
    for stop in range(1, len(values) + 1):
        if stop < len(values) and values[stop] - values[start] <= GROUPING_TOLERANCE:
            continue
        block = vectors[:, start:stop]
        value = float(np.mean(values[start:stop]))
        if abs(value) <= GROUPING_TOLERANCE:
            value = 0.0
        branches.append(SpectralBranch(value, stop - start, _as_dense_projector(basis, block, value)))
        start = stop

    logger.debug(
        "diagonalized H2",
        extra={"size": len(basis), "branches": len(branches)},
    )
    return ZenoSubspace(basis, values, vectors, tuple(branches))


def sector_basis(spec: HamiltonianSpec, seed: BasisState, **kwargs) -> SubspaceBasis:
    return enumerate_reachable(spec.layout, [seed], hamiltonian_terms(spec), **kwargs)


def effective_hamiltonian(
    zeno: ZenoSubspace,
    pulse: PulseParams,
    seed: BasisState,
    *,
    rwa_warn_ratio: float = RWA_WARN_RATIO,
) -> EffectiveModel:
    basis = zeno.basis
    if basis.layout is None:
        raise ZenoError("Zeno basis has no layout")
    if pulse.omega > rwa_warn_ratio:
        logger.warning(
            "drive strength outside the Zeno limit",
            extra={"omega": pulse.omega, "ratio": rwa_warn_ratio},
        )

    seed_ket = basis.vector(seed)
    dark = zeno.dark_projector.toarray()
    if np.linalg.norm(dark @ seed_ket - seed_ket) > 1e-9:
        raise ZenoError(f"{seed.label()} is not in the zero-energy branch of H2")

    spec = HamiltonianSpec.ideal(basis.layout.n_qubits, pulse.omega, pulse.delta, n_max=basis.layout.n_max)
    h1 = build_H1(spec, basis).toarray()
    regime = RESONANT if pulse.resonant else NONRESONANT

    # Structural direction of the drive, so Omega = 0 still names the dark state.
    unit = HamiltonianSpec.ideal(basis.layout.n_qubits, 1.0, 0.0, n_max=basis.layout.n_max)
    drive = dark @ (build_H1(unit, basis).toarray() @ seed_ket)
    drive -= np.vdot(seed_ket, drive) * seed_ket
    strength = np.linalg.norm(drive)
    if strength <= 1e-12:
        energy = np.real(np.vdot(seed_ket, h1 @ seed_ket))
        return EffectiveModel((seed.label(),), seed_ket[:, None], np.array([[energy]], dtype=complex), regime)

    dark_ket = -drive / strength
    kets = np.column_stack([seed_ket, dark_ket])
    matrix = kets.conj().T @ h1 @ kets
    matrix = (matrix + matrix.conj().T) / 2
    return EffectiveModel((seed.label(), "dark"), kets, matrix, regime)


def effective_phase_rate(
    pulse: PulseParams, n_qubits: int, *, warn_ratio: float = RWA_WARN_RATIO
) -> float:
    if pulse.resonant:
        raise ResonantRegimeError(
            "no dispersive phase at zero detuning; use resonant_gate_time for the Rabi cycle"
        )
    if pulse.omega and abs(pulse.omega / pulse.delta) > warn_ratio:
        logger.warning(
            "detuning too small for adiabatic elimination",
            extra={"omega": pulse.omega, "delta": pulse.delta},
        )
    return pulse.omega**2 / (n_qubits * pulse.delta)


def resonant_gate_time(pulse: PulseParams, n_qubits: int) -> float:
    if pulse.omega <= 0:
        raise ParameterError("a Rabi cycle needs omega > 0")
    return math.sqrt(n_qubits) * math.pi / pulse.omega


def nonresonant_gate_time(pulse: PulseParams, n_qubits: int, phase: float = math.pi) -> float:
    if pulse.omega <= 0:
        raise ParameterError("a dispersive phase needs omega > 0")
    return phase / effective_phase_rate(pulse, n_qubits)


# ---------------------------------------------------------------------------
# Closed-form eigenvectors of the three-qubit sectors
# ---------------------------------------------------------------------------

_SQ2 = math.sqrt(2.0)
_SQ3 = math.sqrt(3.0)
_SQ5 = math.sqrt(5.0)
_GOLD = (1.0 + _SQ5) / 2.0
_GOLD_CONJ = (1.0 - _SQ5) / 2.0


class AnalyticEigenvector(NamedTuple):
    name: str
    value: float
    coefficients: Mapping[str, float]


def _scaled(norm: float, coefficients: Mapping[str, float]) -> Dict[str, float]:
    return {label: norm * value for label, value in coefficients.items()}


ANALYTIC_EIGENVECTORS: Dict[str, Tuple[AnalyticEigenvector, ...]] = {
    "f1 f2 sA": (
        AnalyticEigenvector("phi1", -_SQ2, _scaled(0.5, {
            "f1 f2 eA | 0 0": -_SQ2, "f1 f2 gA | 1 0": 1.0, "f1 f2 gA | 0 1": 1.0,
        })),
        AnalyticEigenvector("phi2", _SQ2, _scaled(0.5, {
            "f1 f2 eA | 0 0": _SQ2, "f1 f2 gA | 1 0": 1.0, "f1 f2 gA | 0 1": 1.0,
        })),
        AnalyticEigenvector("phi3", 0.0, _scaled(1.0 / _SQ2, {
            "f1 f2 gA | 1 0": -1.0, "f1 f2 gA | 0 1": 1.0,
        })),
    ),
    "f1 g2 sA": (
        AnalyticEigenvector("phi1'", -_GOLD, _scaled(1.0 / math.sqrt(5.0 + _SQ5), {
            "f1 g2 eA | 0 0": _GOLD, "f1 g2 gA | 1 0": -1.0,
            "f1 g2 gA | 0 1": -_GOLD, "f1 e2 gA | 0 0": 1.0,
        })),
        AnalyticEigenvector("phi2'", _GOLD, _scaled(1.0 / math.sqrt(5.0 + _SQ5), {
            "f1 g2 eA | 0 0": _GOLD, "f1 g2 gA | 1 0": 1.0,
            "f1 g2 gA | 0 1": _GOLD, "f1 e2 gA | 0 0": 1.0,
        })),
        AnalyticEigenvector("phi3'", _GOLD_CONJ, _scaled(1.0 / math.sqrt(5.0 - _SQ5), {
            "f1 g2 eA | 0 0": _GOLD_CONJ, "f1 g2 gA | 1 0": 1.0,
            "f1 g2 gA | 0 1": _GOLD_CONJ, "f1 e2 gA | 0 0": 1.0,
        })),
        AnalyticEigenvector("phi4'", -_GOLD_CONJ, _scaled(1.0 / math.sqrt(5.0 - _SQ5), {
            "f1 g2 eA | 0 0": _GOLD_CONJ, "f1 g2 gA | 1 0": -1.0,
            "f1 g2 gA | 0 1": -_GOLD_CONJ, "f1 e2 gA | 0 0": 1.0,
        })),
    ),
    "g1 g2 sA": (
        AnalyticEigenvector("phi1''", -_SQ3, _scaled(1.0 / (2.0 * _SQ3), {
            "g1 g2 eA | 0 0": 2.0, "g1 g2 gA | 1 0": -_SQ3, "e1 g2 gA | 0 0": 1.0,
            "g1 g2 gA | 0 1": -_SQ3, "g1 e2 gA | 0 0": 1.0,
        })),
        AnalyticEigenvector("phi2''", _SQ3, _scaled(1.0 / (2.0 * _SQ3), {
            "g1 g2 eA | 0 0": 2.0, "g1 g2 gA | 1 0": _SQ3, "e1 g2 gA | 0 0": 1.0,
            "g1 g2 gA | 0 1": _SQ3, "g1 e2 gA | 0 0": 1.0,
        })),
        AnalyticEigenvector("phi3''", -1.0, _scaled(0.5, {
            "g1 g2 gA | 1 0": 1.0, "e1 g2 gA | 0 0": -1.0,
            "g1 g2 gA | 0 1": -1.0, "g1 e2 gA | 0 0": 1.0,
        })),
        AnalyticEigenvector("phi4''", 1.0, _scaled(0.5, {
            "g1 g2 gA | 1 0": -1.0, "e1 g2 gA | 0 0": -1.0,
            "g1 g2 gA | 0 1": 1.0, "g1 e2 gA | 0 0": 1.0,
        })),
        AnalyticEigenvector("phi5''", 0.0, _scaled(1.0 / _SQ3, {
            "g1 g2 eA | 0 0": -1.0, "e1 g2 gA | 0 0": 1.0, "g1 e2 gA | 0 0": 1.0,
        })),
    ),
}

ANALYTIC_SPECTRA: Dict[str, Tuple[float, ...]] = {
    "f1 f2 sA": (-_SQ2, 0.0, 0.0, _SQ2),
    "f1 g2 sA": (-_GOLD, _GOLD_CONJ, 0.0, -_GOLD_CONJ, _GOLD),
    "g1 g2 sA": (-_SQ3, -1.0, 0.0, 0.0, 1.0, _SQ3),
}


def branch_weight_constants() -> Tuple[float, float]:
    """(N+^2 + N+'^2, N-^2 + N-'^2) for the f1 g2 sA sector; both equal 1/2."""
    n_plus = math.sqrt(5.0 + _SQ5) / (2.0 * _SQ5)
    n_minus = math.sqrt(5.0 - _SQ5) / (2.0 * _SQ5)
    n_plus_p = (1.0 - _SQ5) * math.sqrt(5.0 + _SQ5) / (4.0 * _SQ5)
    n_minus_p = (1.0 + _SQ5) * math.sqrt(5.0 - _SQ5) / (4.0 * _SQ5)
    return n_plus**2 + n_plus_p**2, n_minus**2 + n_minus_p**2


def analytic_eigensystem(name: str, basis: SubspaceBasis) -> List[Tuple[str, float, np.ndarray]]:
    try:
        vectors = ANALYTIC_EIGENVECTORS[name]
    except KeyError as exc:
        raise ZenoError(f"no closed-form eigenvectors for sector {name!r}") from exc
    system = []
    for vector in vectors:
        ket = np.zeros(len(basis), dtype=complex)
        for label, coefficient in vector.coefficients.items():
            ket[basis.position(BasisState.from_label(label))] = coefficient
        system.append((vector.name, vector.value, ket))
    return system


def eigen_residual(h2: OperatorMatrix, value: float, ket: np.ndarray) -> float:
    return float(np.linalg.norm(h2.matrix @ ket - value * ket))


def branch_energies(zeno: ZenoSubspace, h1: OperatorMatrix) -> List[Tuple[float, float]]:
    """Mean drive energy Tr(P H1 P) / m on every eigenbranch of H2."""
    dense = h1.toarray()
    energies = []
    for branch in zeno.branches:
        projector = branch.projector.toarray()
        energy = np.trace(projector @ dense @ projector).real / branch.multiplicity
        energies.append((branch.value, float(energy)))
    return energies


def leakage(states: Union[np.ndarray, Sequence, object], model: EffectiveModel) -> np.ndarray:
    """1 - population in the effective plane, per state (rows of ``states``)."""
    amplitudes = np.asarray(getattr(states, "amplitudes", states), dtype=complex)
    if amplitudes.ndim == 1:
        amplitudes = amplitudes[None, :]
    overlaps = amplitudes @ model.kets.conj()
    return 1.0 - np.sum(np.abs(overlaps) ** 2, axis=1)


def zeno_check(
    n_qubits: int = 3,
    *,
    omega: float = 0.1,
    delta: float = 1.0,
    rwa_warn_ratio: float = RWA_WARN_RATIO,
) -> List[Dict[str, object]]:
    """One row per spectator/flagged sector: spectra, residuals and drive coupling."""
    spec = HamiltonianSpec.ideal(n_qubits, omega, delta)
    layout = spec.layout
    F, G, S = QuditLevel.F, QuditLevel.G, QuditLevel.S
    candidates = [
        layout.state([F] * layout.n_data + [S]),
        layout.state([F] * (layout.n_data - 1) + [G, S]),
        layout.state([G] * layout.n_data + [S]),
    ]
    seeds = list(dict.fromkeys(candidates))

    rows = []
    for seed in seeds:
        basis = sector_basis(spec, seed)
        h2 = build_H2(spec, basis)
        zeno = diagonalize_H2(basis, h2)
        model = effective_hamiltonian(zeno, spec.pulse, seed, rwa_warn_ratio=rwa_warn_ratio)
        name = seed.qudit_part().label()
        analytic = ANALYTIC_SPECTRA.get(name) if n_qubits == 3 else None
        flagged = all(level is G for level in seed.levels[:-1])

        projector_residual = eigen_residual_max = float("nan")
        if analytic is not None:
            system = analytic_eigensystem(name, basis)
            eigen_residual_max = max(eigen_residual(h2, value, ket) for _n, value, ket in system)
            projector_residual = max(
                float(np.linalg.norm(zeno.branch_for(value).projector.toarray() @ ket - ket))
                for _n, value, ket in system
            )
        completeness = sum(branch.projector.toarray() for branch in zeno.branches)
        rows.append(
            {
                "subspace": name,
                "dim": len(basis),
                "analytic_eigenvalues": " ".join(f"{v:.12g}" for v in analytic) if analytic else "",
                "numeric_eigenvalues": " ".join(f"{v:.12g}" for v in zeno.eigenvalues),
                "max_eigenvalue_error": (
                    float(np.max(np.abs(np.asarray(analytic) - zeno.eigenvalues)))
                    if analytic else float("nan")
                ),
                "projector_residual": projector_residual,
                "eigen_residual": eigen_residual_max,
                "completeness_error": float(np.max(np.abs(completeness - np.eye(len(basis))))),
                "effective_dim": model.dim,
                "effective_coupling": model.coupling,
                "expected_coupling": -omega / math.sqrt(n_qubits) if flagged else 0.0,
            }
        )
    logger.info("zeno check finished", extra={"n_qubits": n_qubits, "sectors": len(rows)})
    return rows
