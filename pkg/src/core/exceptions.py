"""
Exception hierarchy shared by every stage of the toolkit.

Input problems (bad models, bad configuration) are kept apart from
resource limits and internal consistency failures so the command-line
runner can map them to distinct exit statuses and error kinds.
"""

from typing import List, Sequence


class PsniError(Exception):
    """Base class for all toolkit errors."""


class InputError(PsniError):
    """The model or the configuration is not acceptable."""


class ResourceError(PsniError):
    """A limit was hit or the chain has no unique steady state."""


class InternalError(PsniError):
    """A consistency check of the toolkit itself failed."""


class MixedRateSum(InputError, ArithmeticError):
    """Attempt to add a finite rate to a passive one."""

    def __init__(self, left, right):
        self.left = left
        self.right = right
        super().__init__(f"cannot add finite and passive rates ({left} + {right})")


class UndefinedConstant(InputError):
    """A constant is referenced but never defined."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"undefined constant: {name}")


class ModelParseError(InputError, ValueError):
    """Raised by load_model when the source holds error diagnostics."""

    def __init__(self, diagnostics: Sequence):
        self.diagnostics = list(diagnostics)
        lines = [str(d) for d in self.diagnostics]
        super().__init__("model rejected:\n" + "\n".join(lines))


class ConfigError(InputError, ValueError):
    """Invalid run configuration or configuration file."""


class PassiveRateReachable(InputError):
    """A passive rate survives in the derivation graph; no CTMC exists."""

    def __init__(self, state: int, action: str):
        self.state = state
        self.action = action
        super().__init__(
            f"passive rate reachable: state {state} performs '{action}' at an unspecified rate"
        )


class StateSpaceExceeded(ResourceError):
    """Exploration found more states than allowed."""

    def __init__(self, limit: int):
        self.limit = limit
        super().__init__(f"state space exceeds the limit of {limit} states")


class NotIrreducible(ResourceError):
    """The chain has more than one closed communicating class."""

    def __init__(self, terminal_components: List[List[int]]):
        self.terminal_components = terminal_components
        rendered = "; ".join("{" + ", ".join(map(str, c)) + "}" for c in terminal_components)
        super().__init__(f"chain is not irreducible; terminal components: {rendered}")


class SingularSystem(InternalError):
    """The balance equations could not be solved."""


class SolverDidNotConverge(ResourceError):
    """The iterative solver exhausted its iteration budget."""


class PartitionUnstable(InternalError):
    """The stability post-check rejected a computed partition."""


class MethodDisagreement(InternalError):
    """The two PSNI characterisations returned different answers."""
