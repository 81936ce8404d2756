"""Exception hierarchy shared by the numerical modules and the CLI."""


class SimulatorError(Exception):
    """Base class for every error raised by the simulator package."""


class LayoutError(SimulatorError, ValueError):
    """A layout, basis state or site reference is inconsistent."""


class ParameterError(SimulatorError, ValueError):
    """A physical parameter is out of its admissible range."""


class CapacityError(SimulatorError):
    """A reachable-subspace closure grew beyond the configured cap."""


class ClosureViolationError(SimulatorError):
    """An operator term maps a basis state outside the basis."""


class NonHermitianError(SimulatorError):
    """A Hermitian operator was required."""


class BasisMismatchError(SimulatorError):
    """Two objects live on different bases, or a state is missing from one."""


class ZenoError(SimulatorError):
    """The seed state does not lie in the zero-eigenvalue block of H2."""


class ResonantRegimeError(SimulatorError):
    """A dispersive-regime quantity was requested at zero detuning."""


class IntegratorError(SimulatorError):
    """Time propagation drifted beyond its conservation tolerances."""


class GateSpecError(SimulatorError, ValueError):
    """Gate definition or computational encoding is invalid."""


class ConfigError(SimulatorError):
    """A run configuration file or override could not be resolved."""
