"""Exception types shared across the package."""


class SymschedError(Exception):
    """Base class for all package errors."""


class StructureMismatch(SymschedError):
    """Element does not structurally belong to the group it was used with."""


class CapExceeded(SymschedError):
    """An enumeration would exceed the configured cap."""


class OracleCapExceeded(SymschedError):
    """The brute-force oracle search space exceeds its cap."""


class NotAHomomorphism(SymschedError):
    """Generator images violate a relation; carries a witness pair."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotInGroup(SymschedError):
    """Element is not expressible over the recorded generator words."""


class NotASubgroup(SymschedError):
    """Claimed subgroup is not closed inside, or not contained in, its parent."""


class NotTransitive(SymschedError):
    """Operation requires a transitive action."""


class NoSolution(SymschedError):
    """Structural failure while solving for equivariant maps."""


class NonUniformFiber(SymschedError):
    """Preimage law does not apply: target size does not divide source size."""


class InvalidHierarchy(SymschedError):
    """Memory hierarchy level sizes do not nest."""


class WindowOverflow(SymschedError):
    """A lattice translation left the finite window."""


class UnroutableMove(SymschedError):
    """A placement delta cannot be routed on the machine."""


class ConditionViolated(SymschedError):
    """A schedule-parameter identity failed; message names the identity."""


class ParameterInfeasible(SymschedError):
    """Preset parameters violate a stated precondition."""


class Divisibility(ParameterInfeasible):
    """A required divisibility constraint failed."""


class MemoryBudget(ParameterInfeasible):
    """Per-node memory budget is below what the schedule needs."""


class SizeCap(SymschedError):
    """Instance too large to materialize."""


class MachineMismatch(SymschedError):
    """Two artifacts refer to different machines."""


class ParseError(SymschedError):
    """Malformed serialized input."""


class NotPrime(SymschedError):
    """Operation requires a prime modulus."""
