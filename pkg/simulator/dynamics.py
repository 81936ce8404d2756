"""Schrodinger and Lindblad propagation on a reachable subspace.

Both equations are solved as ``v(t) = exp(t G) v(0)`` with a time-independent
generator G: ``-iH`` for state vectors, the vectorized Liouvillian for density
matrices. Small generators get cached dense step propagators; large ones use
an adaptive Arnoldi approximation of the exponential action.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import scipy.linalg as la
import scipy.sparse as sp

from .exceptions import BasisMismatchError, IntegratorError, NonHermitianError, ParameterError
from .hamiltonian import JumpChannel, to_nanoseconds
from .hilbert import BasisState, OperatorMatrix, SubspaceBasis

logger = logging.getLogger(__name__)

DENSE_DIM_LIMIT = 64
KRYLOV_DIM = 30
KRYLOV_TOLERANCE = 1e-10
DEFAULT_SAMPLES = 400

NORM_TOLERANCE = 1e-6
TRACE_TOLERANCE = 1e-5
POSITIVITY_TOLERANCE = 1e-5
MAX_KRYLOV_SUBSTEPS = 200_000


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------


def _check_same_basis(a: SubspaceBasis, b: SubspaceBasis) -> None:
    if a is not b and a != b:
        raise BasisMismatchError("objects live on different bases")


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: SubspaceBasis
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.shape != (len(self.basis),):
            raise BasisMismatchError(
                f"{amplitudes.shape[0]} amplitudes for a basis of {len(self.basis)} states"
            )
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def basis_state(cls, basis: SubspaceBasis, state: BasisState) -> "StateVector":
        return cls(basis, basis.vector(state))

    @classmethod
    def from_mapping(cls, basis: SubspaceBasis, amplitudes: Mapping[BasisState, complex]) -> "StateVector":
        vector = np.zeros(len(basis), dtype=complex)
        for state, amplitude in amplitudes.items():
            vector[basis.position(state)] += amplitude
        return cls(basis, vector)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, state: BasisState) -> complex:
        return complex(self.amplitudes[self.basis.position(state)])

    def population(self, state: BasisState) -> float:
        return abs(self.amplitude(state)) ** 2


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    basis: SubspaceBasis
    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=complex)
        size = len(self.basis)
        if matrix.shape != (size, size):
            raise BasisMismatchError(f"density matrix shape {matrix.shape} for {size} states")
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityMatrix":
        return cls(psi.basis, np.outer(psi.amplitudes, psi.amplitudes.conj()))

    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T))) if self.matrix.size else 0.0

    def min_eigenvalue(self) -> float:
        return float(la.eigvalsh((self.matrix + self.matrix.conj().T) / 2)[0])

    def symmetrized(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, (self.matrix + self.matrix.conj().T) / 2)

    def population(self, state: BasisState) -> float:
        position = self.basis.position(state)
        return float(self.matrix[position, position].real)


def overlap(a: StateVector, b: StateVector) -> complex:
    _check_same_basis(a.basis, b.basis)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(op: OperatorMatrix, state: Union[StateVector, DensityMatrix]) -> complex:
    _check_same_basis(op.basis, state.basis)
    if isinstance(state, DensityMatrix):
        return complex((op.matrix @ state.matrix).trace())
    return complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))


# ---------------------------------------------------------------------------
# Sampled output
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Sampled observables; ``amp(...)`` columns are complex, the rest real or complex scalars."""

    times: np.ndarray
    columns: Dict[str, np.ndarray]

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ParameterError("sample times must be strictly increasing")
        object.__setattr__(self, "times", times)
        for name, values in self.columns.items():
            if len(values) != times.size:
                raise ParameterError(f"column {name} has {len(values)} samples, expected {times.size}")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def amplitude(self, state: Union[BasisState, str]) -> np.ndarray:
        label = state if isinstance(state, str) else state.label()
        return self.columns[f"amp({label})"]

    def population(self, state: Union[BasisState, str]) -> np.ndarray:
        label = state if isinstance(state, str) else state.label()
        if f"pop({label})" in self.columns:
            return self.columns[f"pop({label})"]
        return np.abs(self.amplitude(label)) ** 2

    def at(self, name: str, t: float):
        """Value of column ``name`` at the sample nearest to ``t``."""
        return self.columns[name][int(np.argmin(np.abs(self.times - t)))]

    def to_frame(self, g_mhz: Optional[float] = None) -> pd.DataFrame:
        data: Dict[str, np.ndarray] = {"gt": self.times}
        if g_mhz is not None:
            data["t_ns"] = np.array([to_nanoseconds(t, g_mhz) for t in self.times])
        scalars: Dict[str, np.ndarray] = {}
        for name, values in self.columns.items():
            if name.startswith("amp("):
                label = name[4:-1]
                data[f"re({label})"] = np.real(values)
                data[f"im({label})"] = np.imag(values)
            elif np.iscomplexobj(values) and np.max(np.abs(np.imag(values)), initial=0.0) > 1e-12:
                scalars[f"re({name})"] = np.real(values)
                scalars[f"im({name})"] = np.imag(values)
            else:
                scalars[name] = np.real(values)
        data.update(scalars)
        return pd.DataFrame(data)


def sample_times(t: float, sample_every: Optional[float] = None, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    if t < 0 or not math.isfinite(t):
        raise ParameterError(f"propagation time must be finite and >= 0, got {t}")
    if t == 0:
        return np.zeros(1)
    if sample_every is not None:
        if sample_every <= 0:
            raise ParameterError(f"sample_every must be positive, got {sample_every}")
        count = max(1, int(math.ceil(t / sample_every - 1e-9)))
        grid = np.arange(count, dtype=float) * sample_every
        return np.append(grid[grid < t - 1e-12], t)
    if samples < 2:
        raise ParameterError(f"need at least 2 samples, got {samples}")
    return np.linspace(0.0, t, samples)


# ---------------------------------------------------------------------------
# Exponential action
# ---------------------------------------------------------------------------


def krylov_expm_action(
    matvec: Callable[[np.ndarray], np.ndarray],
    vector: np.ndarray,
    t: float,
    *,
    krylov_dim: int = KRYLOV_DIM,
    tolerance: float = KRYLOV_TOLERANCE,
) -> np.ndarray:
    """exp(t A) v for a linear map A given as ``matvec``.

    Arnoldi projection onto an m-dimensional Krylov space with adaptive
    substeps; the local error estimate is
    ``beta * h * h[m, m-1] * |e_m^T exp(h H_m) e_1|``.
    """

    result = np.array(vector, dtype=complex, copy=True)
    size = result.size
    if t == 0 or not np.any(result):
        return result

    m = max(1, min(krylov_dim, size))
    elapsed = 0.0
    step = t
    substeps = rejections = 0

    while elapsed < t * (1 - 1e-15):
        beta = np.linalg.norm(result)
        if beta == 0.0:
            return result
        basis = np.zeros((size, m + 1), dtype=complex)
        hessenberg = np.zeros((m + 1, m), dtype=complex)
        basis[:, 0] = result / beta
        dim = m
        breakdown = False
        for j in range(m):
            w = np.asarray(matvec(basis[:, j]), dtype=complex)
            for i in range(j + 1):
                hessenberg[i, j] = np.vdot(basis[:, i], w)
                w = w - hessenberg[i, j] * basis[:, i]
            residual = np.linalg.norm(w)
            scale = max(1.0, np.linalg.norm(hessenberg[: j + 1, j]))
            if residual <= 1e-13 * scale:
                breakdown = True
                dim = j + 1
                break
            hessenberg[j + 1, j] = residual
            basis[:, j + 1] = w / residual

        projected = hessenberg[:dim, :dim]
        h = min(step, t - elapsed)
        while True:
            small = la.expm(h * projected)
            if breakdown:
                error = 0.0
            else:
                error = beta * h * abs(hessenberg[dim, dim - 1]) * abs(small[dim - 1, 0])
            if error <= tolerance or h <= t * 1e-12:
                break
            rejections += 1
            h *= max(0.1, 0.9 * (tolerance / error) ** (1.0 / (dim + 1)))

        result = beta * (basis[:, :dim] @ small[:, 0])
        elapsed += h
        substeps += 1
        if substeps > MAX_KRYLOV_SUBSTEPS:
            raise IntegratorError(f"Krylov propagation needed more than {MAX_KRYLOV_SUBSTEPS} substeps")
        growth = 5.0 if error == 0.0 else min(5.0, 0.9 * (tolerance / error) ** (1.0 / (dim + 1)))
        step = h * max(1.0, growth)

    if rejections:
        logger.debug(
            "krylov step shrunk",
            extra={"substeps": substeps, "rejections": rejections, "dim": size},
        )
    return result


class _DenseStepper:
    def __init__(self, generator: sp.spmatrix) -> None:
        self._generator = generator.toarray()
        self._steps: Dict[float, np.ndarray] = {}

    def advance(self, vector: np.ndarray, dt: float) -> np.ndarray:
        key = round(dt, 12)
        step = self._steps.get(key)
        if step is None:
            step = la.expm(self._generator * dt)
            self._steps[key] = step
        return step @ vector


class _KrylovStepper:
    def __init__(self, generator: sp.spmatrix, krylov_dim: int, tolerance: float) -> None:
        self._generator = generator.tocsr()
        self._krylov_dim = krylov_dim
        self._tolerance = tolerance

    def advance(self, vector: np.ndarray, dt: float) -> np.ndarray:
        return krylov_expm_action(
            self._generator.dot,
            vector,
            dt,
            krylov_dim=self._krylov_dim,
            tolerance=self._tolerance,
        )


def _stepper(
    generator: sp.spmatrix, *, dense_dim_limit: int, krylov_dim: int, tolerance: float
):
    if generator.shape[0] <= dense_dim_limit:
        return _DenseStepper(generator)
    return _KrylovStepper(generator, krylov_dim, tolerance)


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

Observable = Callable[[np.ndarray], complex]


def propagate_state(
    H: OperatorMatrix,
    psi0: StateVector,
    t: float,
    sample_every: Optional[float] = None,
    *,
    samples: int = DEFAULT_SAMPLES,
    tracked: Optional[Sequence[BasisState]] = None,
    observables: Optional[Mapping[str, Observable]] = None,
    dense_dim_limit: int = DENSE_DIM_LIMIT,
    krylov_dim: int = KRYLOV_DIM,
    tolerance: float = KRYLOV_TOLERANCE,
) -> Tuple[TimeSeries, StateVector]:
    """psi(t) = exp(-iHt) psi0, sampled on ``sample_times(t, sample_every, samples)``.

    ``tracked`` defaults to the basis states populated in ``psi0``; each
    observable receives the amplitude vector at every sample.
    """

    _check_same_basis(H.basis, psi0.basis)
    if H.hermiticity_error() > 1e-12:
        raise NonHermitianError(f"{H.name or 'Hamiltonian'} is not Hermitian")

    times = sample_times(t, sample_every, samples)
    if tracked is None:
        tracked = [state for state, amp in zip(psi0.basis.states, psi0.amplitudes) if abs(amp) > 0]
    positions = [(state.label(), psi0.basis.position(state)) for state in tracked]
    observables = dict(observables or {})

    stepper = _stepper(
        (-1j) * H.matrix, dense_dim_limit=dense_dim_limit, krylov_dim=krylov_dim, tolerance=tolerance
    )
    initial_norm = psi0.norm()
    vector = psi0.amplitudes.copy()
    records: Dict[str, List[complex]] = {f"amp({label})": [] for label, _ in positions}
    records.update({name: [] for name in observables})
    records["norm"] = []

    for k, time in enumerate(times):
        if k:
            vector = stepper.advance(vector, time - times[k - 1])
        norm = float(np.linalg.norm(vector))
        if abs(norm - initial_norm) > NORM_TOLERANCE:
            raise IntegratorError(f"norm drifted to {norm:.9f} at gt={time:.6g}")
        for label, position in positions:
            records[f"amp({label})"].append(vector[position])
        for name, observable in observables.items():
            records[name].append(observable(vector))
        records["norm"].append(norm)

    logger.debug(
        "state propagated",
        extra={"dim": len(psi0.basis), "t": t, "samples": len(times)},
    )
    columns = {name: np.asarray(values) for name, values in records.items()}
    return TimeSeries(times, columns), StateVector(psi0.basis, vector)


def liouvillian(H: OperatorMatrix, jumps: Sequence[JumpChannel]) -> sp.csr_matrix:
    """Generator of d vec(rho)/dt for row-major vec, so vec(A rho B) = (A kron B^T) vec(rho)."""
    size = H.dim
    identity = sp.identity(size, dtype=complex, format="csr")
    generator = -1j * (sp.kron(H.matrix, identity) - sp.kron(identity, H.matrix.T))
    for rate, operator in jumps:
        _check_same_basis(H.basis, operator.basis)
        if rate == 0:
            continue
        c = operator.matrix
        cdc = (c.conj().T @ c).tocsr()
        generator = generator + rate * (
            sp.kron(c, c.conj()) - 0.5 * sp.kron(cdc, identity) - 0.5 * sp.kron(identity, cdc.T)
        )
    return generator.tocsr()


def propagate_density(
    H: OperatorMatrix,
    jumps: Sequence[JumpChannel],
    rho0: DensityMatrix,
    t: float,
    sample_every: Optional[float] = None,
    *,
    samples: int = DEFAULT_SAMPLES,
    tracked: Optional[Sequence[BasisState]] = None,
    observables: Optional[Mapping[str, Callable[[np.ndarray], complex]]] = None,
    dense_dim_limit: int = DENSE_DIM_LIMIT,
    krylov_dim: int = KRYLOV_DIM,
    tolerance: float = KRYLOV_TOLERANCE,
) -> Tuple[TimeSeries, DensityMatrix]:
    _check_same_basis(H.basis, rho0.basis)
    if H.hermiticity_error() > 1e-12:
        raise NonHermitianError(f"{H.name or 'Hamiltonian'} is not Hermitian")

    size = len(rho0.basis)
    times = sample_times(t, sample_every, samples)
    if tracked is None:
        diagonal = np.real(np.diag(rho0.matrix))
        tracked = [state for state, p in zip(rho0.basis.states, diagonal) if p > 0]
    positions = [(state.label(), rho0.basis.position(state)) for state in tracked]
    observables = dict(observables or {})

    stepper = _stepper(
        liouvillian(H, jumps), dense_dim_limit=dense_dim_limit, krylov_dim=krylov_dim, tolerance=tolerance
    )
    initial_trace = rho0.trace()
    vector = rho0.matrix.reshape(-1).copy()
    records: Dict[str, List[complex]] = {f"pop({label})": [] for label, _ in positions}
    records.update({name: [] for name in observables})
    records["trace"] = []

    for k, time in enumerate(times):
        if k:
            vector = stepper.advance(vector, time - times[k - 1])
        rho = vector.reshape(size, size)
        rho = (rho + rho.conj().T) / 2
        vector = rho.reshape(-1).copy()
        trace = float(np.trace(rho).real)
        if abs(trace - initial_trace) > TRACE_TOLERANCE:
            raise IntegratorError(f"trace drifted to {trace:.9f} at gt={time:.6g}")
        lowest = float(la.eigvalsh(rho)[0])
        if lowest < -POSITIVITY_TOLERANCE:
            raise IntegratorError(f"density matrix eigenvalue {lowest:.3g} at gt={time:.6g}")
        for label, position in positions:
            records[f"pop({label})"].append(rho[position, position].real)
        for name, observable in observables.items():
            records[name].append(observable(rho))
        records["trace"].append(trace)

    logger.debug(
        "density propagated",
        extra={"dim": size, "channels": sum(1 for rate, _ in jumps if rate), "t": t, "samples": len(times)},
    )
    columns = {name: np.asarray(values) for name, values in records.items()}
    return TimeSeries(times, columns), DensityMatrix(rho0.basis, vector.reshape(size, size))
