"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for every error raised by this package."""


class EmptyOperandError(ToolkitError):
    """An operation received an empty set where a non-empty one is required."""


class CapExceededError(ToolkitError):
    """An enumeration would exceed its configured cap; nothing is approximated."""


class DanglingEdgeError(ToolkitError):
    """A graph edge endpoint is not a member of the supplied vertex set."""


class NonPositiveElementError(ToolkitError):
    """Prime-exponent machinery requires strictly positive integers."""


class FactorBoundError(ToolkitError):
    """Trial division hit the prime ceiling without certifying the cofactor."""


class EmptyGraphError(ToolkitError):
    """A graph operation received a graph with no edges."""


class BasePointError(ToolkitError):
    """A requested base point is absent from the relevant projection."""


class StructureError(ToolkitError):
    """A structural precondition (coprimality, subset, cover multiplicity,
    power-of-p shape, orthogonality) does not hold."""


class EmptySurvivorError(ToolkitError):
    """A refinement step emptied one side; the configured constants are too
    aggressive for this instance."""


class DomainGuardError(ToolkitError):
    """A formula was evaluated outside its guarded domain."""


class EmptyFeasibleRegionError(ToolkitError):
    """No grid point satisfies the parameter constraints."""


class PrecisionError(ToolkitError):
    """An exact radical comparison stayed undecided at maximum precision."""
