"""Exception hierarchy.

Every failure raised by the library derives from :class:`TreeRamseyError`;
``PreconditionError`` marks inputs that violate an operation's contract,
``ConstructionFailed`` marks a constructive step that could not reach its
bound (usually a sign that the instance does not satisfy the hypotheses).
"""


class TreeRamseyError(Exception):
    pass


class PreconditionError(TreeRamseyError, ValueError):
    pass


class IntraClassEdge(PreconditionError):
    pass


class DuplicateEdge(PreconditionError):
    pass


class IndexOutOfRange(PreconditionError):
    pass


class EmptySide(PreconditionError):
    pass


class OverlappingSets(PreconditionError):
    pass


class UnbalancedClasses(PreconditionError):
    pass


class BadArguments(PreconditionError):
    pass


class HypothesisViolated(PreconditionError):
    pass


class SizeHypothesisViolated(PreconditionError):
    pass


class OddComponent(PreconditionError):
    pass


class TooLarge(PreconditionError):
    pass


class TooFewVertices(PreconditionError):
    pass


class TargetTooSmall(PreconditionError):
    pass


class Infeasible(PreconditionError):
    pass


class NotFound(TreeRamseyError):
    pass


class ConstructionFailed(TreeRamseyError):
    pass


class WalkConditionViolated(TreeRamseyError):
    def __init__(self, x, y, message=None):
        self.pair = (x, y)
        super().__init__(message or f"no walk of matching parity for tree vertices {x}, {y}")


class AssignmentFailure(TreeRamseyError):
    pass


class CapacityExceeded(TreeRamseyError):
    pass


class TooManyIrregularPairs(TreeRamseyError):
    pass


class NoTypicalVertex(TreeRamseyError):
    def __init__(self, message, state=None):
        self.state = state or {}
        super().__init__(message)
