"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class ThingcError(Exception):
    """Base class for every error raised by thingc."""


class ModelError(ThingcError, ValueError):
    """A construction call violated a static-model invariant."""


class EmptyName(ModelError):
    pass


class DuplicateName(ModelError):
    pass


class UnknownElement(ModelError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class DuplicateStageKind(ModelError):
    pass


class EmitOnNonCreate(ModelError):
    pass


class IllegalFlow(ModelError):
    def __init__(self, message: str, rule: str = "IllegalFlow") -> None:
        super().__init__(message)
        self.rule = rule


class IllegalTriggerTarget(ModelError):
    pass


class DuplicateStorageName(ModelError):
    pass


class InvalidAnnotation(ModelError):
    pass


class RegionError(ThingcError, ValueError):
    pass


class EmptyRegion(RegionError):
    pass


class DisconnectedRegion(RegionError):
    def __init__(self, message: str, components: list[frozenset[str]]) -> None:
        super().__init__(message)
        self.components = components


class DisconnectedComposite(DisconnectedRegion):
    pass


class ForeignRegion(RegionError):
    pass


class EventError(ThingcError, ValueError):
    pass


class NegativeDuration(EventError):
    pass


class NonzeroGenericDuration(EventError):
    pass


class CyclicBehavior(EventError):
    def __init__(self, message: str, cycle: list[str]) -> None:
        super().__init__(message)
        self.cycle = cycle


class UnknownEvent(EventError):
    pass


class EvaluationError(ThingcError):
    """Raised when an expression cannot be evaluated."""

    def __init__(self, message: str, stage: str | None = None) -> None:
        super().__init__(message)
        self.stage = stage

    def __str__(self) -> str:
        base = super().__str__()
        return f"{base} (at {self.stage})" if self.stage else base


class UnboundName(EvaluationError):
    pass


class TypeMismatch(EvaluationError):
    pass


class IndexOutOfRange(EvaluationError):
    pass


class LimitExceeded(ThingcError):
    """The run hit a simulation limit; ``trace`` holds what was produced."""

    def __init__(self, which: str, trace) -> None:
        super().__init__(f"simulation limit exceeded: {which}")
        self.which = which
        self.trace = trace


class InvalidSpec(ThingcError, ValueError):
    pass


class UnknownFormat(ThingcError, ValueError):
    pass
