import typing as t


class GraphLabError(Exception):
    exit_code = 4
    trajectory: t.Any = None


class ConfigError(GraphLabError):
    exit_code = 2


class InvalidKind(ConfigError):
    pass


class ParseError(ConfigError):
    def __init__(self, message: str, line: t.Optional[int] = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FileParseError(ParseError):
    pass


class EmptyInput(ParseError):
    pass


class ModelPreconditionError(GraphLabError):
    exit_code = 3

    def __init__(self, message: str, t: t.Optional[int] = None) -> None:
        self.message = message
        self.t = t
        super().__init__(message if t is None else f"step {t}: {message}")

    def at_step(self, t: int) -> "ModelPreconditionError":
        annotated = type(self)(self.message, t)
        annotated.trajectory = self.trajectory
        return annotated


class AllWeightsZero(ModelPreconditionError):
    pass


class InsufficientEligibleNodes(ModelPreconditionError):
    pass


class EmptyAfterFilter(GraphLabError):
    exit_code = 3


class InternalInconsistency(GraphLabError):
    exit_code = 4


class BoundViolation(InternalInconsistency):
    def __init__(self, t: int, delta: float, lower: float, upper: float) -> None:
        self.t = t
        self.delta = delta
        self.lower = lower
        self.upper = upper
        super().__init__(f"increment at step {t} is {delta!r}, outside [{lower!r}, {upper!r}]")

    def __reduce__(self) -> t.Any:
        return (type(self), (self.t, self.delta, self.lower, self.upper), self.__dict__)


class GraphError(GraphLabError):
    exit_code = 4


class UnknownNode(GraphError):
    pass


class DuplicateNode(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class UnknownEdge(GraphError):
    pass


class EmptyGraph(GraphError):
    pass


class DegenerateProbability(GraphLabError):
    exit_code = 4


class EstimatorError(GraphLabError):
    reason = "invalid"


class KOutOfRange(EstimatorError):
    reason = "k_out_of_range"


class DegenerateDenominator(EstimatorError):
    reason = "degenerate_denominator"


class NonpositiveUH(EstimatorError):
    reason = "nonpositive_uh"


class ReplicaFailure(GraphLabError):
    def __init__(self, failures: t.Dict[int, BaseException], outcomes: t.Sequence[t.Any] = ()) -> None:
        self.failures = failures
        self.outcomes = list(outcomes)
        codes = [getattr(e, "exit_code", 4) for e in failures.values()]
        self.exit_code = max(codes) if codes else 4
        listed = ", ".join(f"replica {r}: {e}" for r, e in sorted(failures.items()))
        super().__init__(f"{len(failures)} replica(s) failed ({listed})")
