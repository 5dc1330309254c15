"""Exception hierarchy shared across the package."""


class CausalKitError(Exception):
    """Base class for all errors raised by this package."""


class SpaceError(CausalKitError):
    """Malformed coordinate space, measure, or kernel."""


class OutcomeCapError(SpaceError):
    """Outcome count exceeds the configured bound."""


class MissingKernelError(CausalKitError):
    """A causal space has no kernel for a requested coordinate subset."""


class InvalidMechanismError(CausalKitError):
    """An intervention mechanism fails the causal-mechanism axioms."""


class CyclicSCMError(CausalKitError):
    """Structural equations contain a dependency cycle."""


class NullAtomError(CausalKitError):
    """Conditioning on an atom of probability zero."""

    def __init__(self, message: str, atoms=()):
        super().__init__(message)
        self.atoms = tuple(atoms)


class NotSurjectiveError(CausalKitError):
    """A map required to be surjective is not."""


class NotAdmissibleError(CausalKitError):
    """A deterministic map is not admissible for the given index map."""


class WellDefinednessError(CausalKitError):
    """Pushforward kernel values disagree across a fiber."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class SingularConditioningError(CausalKitError):
    """Conditioning block of a Gaussian covariance is singular."""


class SpecError(CausalKitError):
    """Malformed input file or inline spec."""


class InstanceTooLargeError(CausalKitError):
    """Instance exceeds the size bound of an exhaustive check."""
