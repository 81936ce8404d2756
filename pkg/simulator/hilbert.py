"""Product basis states, reachable-subspace closures and sparse operators.

Tensor-factor order is fixed everywhere: qudit 1 .. qudit N-1, qudit A, then
mode 1 .. mode N-1. Labels follow the same order, e.g. ``"f1 f2 sA | 0 0"``.

Excitation counting: one for each qudit in |e>, one when qudit A sits in |s>,
plus every photon. The model never names this quantity; the convention is
read off the level patterns that appear together in the closed subspaces,
and it is the one the Hamiltonians conserve.
"""

from __future__ import annotations

import logging
from collections import Counter, deque
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .exceptions import BasisMismatchError, CapacityError, ClosureViolationError, LayoutError

logger = logging.getLogger(__name__)

DEFAULT_MAX_STATES = 4096
ZERO_TOLERANCE = 1e-15


class QuditLevel(IntEnum):
    F = 0
    S = 1
    G = 2
    E = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value: Union["QuditLevel", int, str]) -> "QuditLevel":
        if isinstance(value, QuditLevel):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        try:
            return cls[str(value).strip().upper()]
        except KeyError as exc:
            raise LayoutError(f"unknown qudit level {value!r}") from exc


@dataclass(frozen=True)
class SystemLayout:
    """N-1 data qudits in N-1 resonators, plus the central qudit A."""

    n_qubits: int
    n_max: int = 1

    def __post_init__(self) -> None:
        if int(self.n_qubits) < 2:
            raise LayoutError(f"n_qubits must be >= 2, got {self.n_qubits}")
        if int(self.n_max) < 1:
            raise LayoutError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def n_data(self) -> int:
        return self.n_qubits - 1

    @property
    def n_modes(self) -> int:
        return self.n_qubits - 1

    @property
    def central(self) -> int:
        """Position of qudit A in ``BasisState.levels``."""
        return self.n_qubits - 1

    def site_name(self, qudit: int) -> str:
        return "A" if qudit == self.central else str(qudit + 1)

    def qudit_index(self, name: Union[str, int]) -> int:
        """Map a site name (``"1"`` .. ``"N-1"`` or ``"A"``) to its 0-based index."""
        text = str(name).strip()
        if text.upper() == "A":
            return self.central
        try:
            number = int(text)
        except ValueError as exc:
            raise LayoutError(f"unknown qudit site {name!r}") from exc
        if not 1 <= number <= self.n_data:
            raise LayoutError(f"data qudit {number} outside 1..{self.n_data}")
        return number - 1

    def state(
        self,
        levels: Sequence[Union[QuditLevel, str]],
        photons: Optional[Sequence[int]] = None,
    ) -> "BasisState":
        built = BasisState(tuple(levels), tuple(photons or (0,) * self.n_modes))
        built.check(self)
        return built


@dataclass(frozen=True)
class BasisState:
    """One level per qudit and one photon number per resonator.

    A state with an empty ``photons`` tuple is a qudit-only configuration, as
    found in bases of reduced density matrices.
    """

    levels: Tuple[QuditLevel, ...]
    photons: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "levels", tuple(QuditLevel.parse(lvl) for lvl in self.levels))
        object.__setattr__(self, "photons", tuple(int(n) for n in self.photons))
        if any(n < 0 for n in self.photons):
            raise LayoutError(f"negative photon number in {self.photons}")

    @property
    def n_qubits(self) -> int:
        return len(self.levels)

    @property
    def central_level(self) -> QuditLevel:
        return self.levels[-1]

    def check(self, layout: SystemLayout) -> None:
        if len(self.levels) != layout.n_qubits:
            raise LayoutError(
                f"state has {len(self.levels)} qudits, layout expects {layout.n_qubits}"
            )
        if len(self.photons) != layout.n_modes:
            raise LayoutError(
                f"state has {len(self.photons)} modes, layout expects {layout.n_modes}"
            )
        if any(n > layout.n_max for n in self.photons):
            raise LayoutError(f"photon number above n_max={layout.n_max} in {self.label()}")

    def with_level(self, qudit: int, level: QuditLevel) -> "BasisState":
        levels = list(self.levels)
        levels[qudit] = level
        return BasisState(tuple(levels), self.photons)

    def with_photons(self, mode: int, count: int) -> "BasisState":
        photons = list(self.photons)
        photons[mode] = count
        return BasisState(self.levels, tuple(photons))

    def qudit_part(self) -> "BasisState":
        return BasisState(self.levels, ())

    def permuted(self, mapping: Mapping[int, int]) -> "BasisState":
        """Move data qudit ``i`` (and its resonator) to position ``mapping[i]``."""
        levels = list(self.levels)
        photons = list(self.photons)
        for source, target in mapping.items():
            levels[target] = self.levels[source]
            if self.photons:
                photons[target] = self.photons[source]
        return BasisState(tuple(levels), tuple(photons))

    def label(self) -> str:
        names = [f"{lvl.label}{i + 1}" for i, lvl in enumerate(self.levels[:-1])]
        names.append(f"{self.levels[-1].label}A")
        qudits = " ".join(names)
        if not self.photons:
            return qudits
        return f"{qudits} | {' '.join(str(n) for n in self.photons)}"

    @classmethod
    def from_label(cls, text: str) -> "BasisState":
        qudit_part, _, photon_part = text.partition("|")
        tokens = qudit_part.split()
        if len(tokens) < 2:
            raise LayoutError(f"cannot parse basis label {text!r}")
        levels = []
        for position, token in enumerate(tokens):
            expected = "A" if position == len(tokens) - 1 else str(position + 1)
            if token[1:] != expected:
                raise LayoutError(f"site {token!r} out of order in {text!r}")
            levels.append(QuditLevel.parse(token[0]))
        photons = tuple(int(n) for n in photon_part.split())
        return cls(tuple(levels), photons)

    def __str__(self) -> str:
        return self.label()


def excitation_number(state: BasisState) -> int:
    count = sum(1 for level in state.levels if level is QuditLevel.E)
    if state.central_level is QuditLevel.S:
        count += 1
    return count + sum(state.photons)


# ---------------------------------------------------------------------------
# Operator terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Dyad:
    """|ket><bra| acting on one qudit."""

    qudit: int
    ket: QuditLevel
    bra: QuditLevel

    @property
    def site(self) -> Tuple[str, int]:
        return ("q", self.qudit)

    def apply(self, state: BasisState, n_max: int) -> Optional[Tuple[float, BasisState]]:
        if state.levels[self.qudit] is not self.bra:
            return None
        return 1.0, state.with_level(self.qudit, self.ket)

    def dagger(self) -> "Dyad":
        return Dyad(self.qudit, self.bra, self.ket)

    def describe(self) -> str:
        return f"|{self.ket.label}><{self.bra.label}|_{self.qudit}"


@dataclass(frozen=True)
class ModeShift:
    """Photon raising (a^dagger) or lowering (a) on one resonator."""

    mode: int
    raising: bool

    @property
    def site(self) -> Tuple[str, int]:
        return ("m", self.mode)

    def apply(self, state: BasisState, n_max: int) -> Optional[Tuple[float, BasisState]]:
        count = state.photons[self.mode]
        if self.raising:
            if count + 1 > n_max:
                return None
            return float(np.sqrt(count + 1)), state.with_photons(self.mode, count + 1)
        if count == 0:
            return None
        return float(np.sqrt(count)), state.with_photons(self.mode, count - 1)

    def dagger(self) -> "ModeShift":
        return ModeShift(self.mode, not self.raising)

    def describe(self) -> str:
        return f"a{'+' if self.raising else ''}_{self.mode}"


SiteAction = Union[Dyad, ModeShift]


@dataclass(frozen=True)
class OperatorTerm:
    """``amplitude * (product of site actions)``, optionally ``+ h.c.``."""

    actions: Tuple[SiteAction, ...]
    amplitude: complex = 1.0
    hermitian_conjugate: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        sites = [action.site for action in self.actions]
        if len(sites) != len(set(sites)):
            raise LayoutError(f"term touches a site twice: {self.describe()}")

    def apply(self, state: BasisState, n_max: int) -> Optional[Tuple[complex, BasisState]]:
        amplitude = self.amplitude
        current = state
        for action in reversed(self.actions):
            hit = action.apply(current, n_max)
            if hit is None:
                return None
            factor, current = hit
            amplitude *= factor
        return amplitude, current

    def dagger(self) -> "OperatorTerm":
        return OperatorTerm(
            tuple(action.dagger() for action in reversed(self.actions)),
            self.amplitude.conjugate(),
        )

    def expand(self) -> Tuple["OperatorTerm", ...]:
        bare = replace(self, hermitian_conjugate=False)
        if not self.hermitian_conjugate:
            return (bare,)
        return bare, bare.dagger()

    def canonical_key(self) -> Tuple:
        actions = tuple(sorted(self.actions, key=lambda action: action.site))
        return actions, round(self.amplitude.real, 14), round(self.amplitude.imag, 14)

    def describe(self) -> str:
        body = " ".join(action.describe() for action in self.actions) or "1"
        suffix = " + h.c." if self.hermitian_conjugate else ""
        return f"({self.amplitude:.6g}) {body}{suffix}"


def identity_term() -> OperatorTerm:
    return OperatorTerm(())


def expand_terms(terms: Iterable[OperatorTerm]) -> List[OperatorTerm]:
    expanded: List[OperatorTerm] = []
    for term in terms:
        expanded.extend(term.expand())
    return expanded


def is_conjugation_closed(terms: Sequence[OperatorTerm]) -> bool:
    """True when the multiset of (expanded) terms equals its own adjoint."""
    keys = Counter(term.canonical_key() for term in terms)
    adjoint = Counter(term.dagger().canonical_key() for term in terms)
    return keys == adjoint


# ---------------------------------------------------------------------------
# Bases and matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubspaceBasis:
    states: Tuple[BasisState, ...]
    layout: Optional[SystemLayout] = None
    index: Dict[BasisState, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        index: Dict[BasisState, int] = {}
        for position, state in enumerate(self.states):
            if state in index:
                raise LayoutError(f"duplicate basis state {state.label()}")
            index[state] = position
        object.__setattr__(self, "index", index)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[BasisState]:
        return iter(self.states)

    def __getitem__(self, position: int) -> BasisState:
        return self.states[position]

    def __contains__(self, state: object) -> bool:
        return state in self.index

    @property
    def n_max(self) -> int:
        if self.layout is not None:
            return self.layout.n_max
        return max([1] + [max(state.photons, default=0) for state in self.states])

    def position(self, state: BasisState) -> int:
        try:
            return self.index[state]
        except KeyError as exc:
            raise BasisMismatchError(f"{state.label()} is not in the basis") from exc

    def labels(self) -> List[str]:
        return [state.label() for state in self.states]

    def vector(self, state: BasisState) -> np.ndarray:
        ket = np.zeros(len(self), dtype=complex)
        ket[self.position(state)] = 1.0
        return ket


@dataclass(frozen=True)
class OperatorMatrix:
    basis: SubspaceBasis
    matrix: sp.csr_matrix
    hermitian: bool = False
    name: str = ""

    @property
    def dim(self) -> int:
        return len(self.basis)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.matrix.conj().T.tocsr(), self.hermitian, self.name)

    def hermiticity_error(self) -> float:
        difference = (self.matrix - self.matrix.conj().T).tocsr()
        return float(np.max(np.abs(difference.data))) if difference.nnz else 0.0

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if other.basis != self.basis:
            raise BasisMismatchError("cannot add operators on different bases")
        return OperatorMatrix(
            self.basis,
            (self.matrix + other.matrix).tocsr(),
            self.hermitian and other.hermitian,
            "+".join(name for name in (self.name, other.name) if name),
        )


def enumerate_reachable(
    layout: SystemLayout,
    seeds: Sequence[BasisState],
    generators: Sequence[OperatorTerm],
    *,
    max_states: int = DEFAULT_MAX_STATES,
) -> SubspaceBasis:
    """Breadth-first closure of ``seeds`` under ``generators``.

    Reachability is structural: a term with zero amplitude still connects
    states, so a parameter sweep sees the same basis at every grid point.
    """

    terms = expand_terms(generators)
    order: List[BasisState] = []
    seen: Dict[BasisState, int] = {}
    queue: deque = deque()

    for seed in seeds:
        seed.check(layout)
        if seed not in seen:
            seen[seed] = len(order)
            order.append(seed)
            queue.append(seed)

    while queue:
        state = queue.popleft()
        for term in terms:
            hit = term.apply(state, layout.n_max)
            if hit is None:
                continue
            image = hit[1]
            if image in seen:
                continue
            if len(order) >= max_states:
                raise CapacityError(
                    f"reachable subspace exceeds {max_states} states "
                    f"(seeds: {', '.join(s.label() for s in seeds[:3])})"
                )
            seen[image] = len(order)
            order.append(image)
            queue.append(image)

    logger.debug(
        "reachable subspace enumerated",
        extra={"n_qubits": layout.n_qubits, "seeds": len(seeds), "size": len(order)},
    )
    return SubspaceBasis(tuple(order), layout)


def build_operator(
    terms: Sequence[OperatorTerm], basis: SubspaceBasis, *, name: str = ""
) -> OperatorMatrix:
    expanded = expand_terms(terms)
    n_max = basis.n_max
    rows: List[int] = []
    cols: List[int] = []
    data: List[complex] = []
    for col, state in enumerate(basis.states):
        for term in expanded:
            hit = term.apply(state, n_max)
            if hit is None:
                continue
            amplitude, image = hit
            row = basis.index.get(image)
            if row is None:
                raise ClosureViolationError(
                    f"{term.describe()} maps {state.label()} to {image.label()} outside the basis"
                )
            rows.append(row)
            cols.append(col)
            data.append(amplitude)

    size = len(basis)
    matrix = sp.coo_matrix(
        (np.asarray(data, dtype=complex), (np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))),
        shape=(size, size),
    ).tocsr()
    matrix.sum_duplicates()
    matrix.data[np.abs(matrix.data) < ZERO_TOLERANCE] = 0.0
    matrix.eliminate_zeros()
    return OperatorMatrix(basis, matrix, is_conjugation_closed(expanded), name)


def number_operator(basis: SubspaceBasis) -> OperatorMatrix:
    counts = np.array([excitation_number(state) for state in basis.states], dtype=complex)
    return OperatorMatrix(basis, sp.diags(counts, format="csr"), True, "N_exc")


def commutator_norm(a: OperatorMatrix, b: OperatorMatrix) -> float:
    if a.basis != b.basis:
        raise BasisMismatchError("commutator of operators on different bases")
    commutator = (a.matrix @ b.matrix - b.matrix @ a.matrix).tocsr()
    return float(np.max(np.abs(commutator.data))) if commutator.nnz else 0.0


def permutation_operator(
    source: SubspaceBasis, target: SubspaceBasis, mapping: Mapping[int, int]
) -> sp.csr_matrix:
    """Sparse P with P|s> = |s permuted>, from ``source`` into ``target``."""
    rows = [target.position(state.permuted(mapping)) for state in source.states]
    cols = list(range(len(source)))
    return sp.csr_matrix(
        (np.ones(len(rows), dtype=complex), (rows, cols)), shape=(len(target), len(source))
    )
