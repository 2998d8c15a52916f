"""Exception hierarchy.

Two families: `NLBoxError` for bad input (domain / validation, CLI exit 1)
and `InvariantError` for internal consistency failures (CLI exit 2).
"""


class NLBoxError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


class DomainError(NLBoxError):
    pass


class NormalizationError(NLBoxError):
    pass


class NegativeEntry(NLBoxError):
    pass


class SignalingBox(NLBoxError):
    pass


# wiring
class CausalityViolation(NLBoxError):
    pass


class ResourceMismatch(NLBoxError):
    pass


class SignalingResource(NLBoxError):
    pass


class WeightSumError(NLBoxError):
    pass


class ArityMismatch(NLBoxError):
    pass


class MalformedWiring(NLBoxError):
    pass


# search
class SpaceTooLarge(NLBoxError):
    pass


# quantum
class DimensionBudget(NLBoxError):
    pass


class NotProjector(NLBoxError):
    pass


class NotComplementary(NLBoxError):
    pass


class InvalidState(NLBoxError):
    pass


class DegenerateEigenvector(InvariantError):
    pass


class OptimizerDivergence(InvariantError):
    pass


class CounterexampleFound(InvariantError):
    pass
