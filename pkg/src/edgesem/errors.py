"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line interface:
2 for identifiability failures, 3 for parse/validation failures and 4 for
numerical failures.
"""


class EdgeSemError(Exception):
    exit_code = 1


class ValidationError(EdgeSemError):
    exit_code = 3


class ParseError(ValidationError):
    pass


class InvalidGraph(ValidationError):
    pass


class CycleDetected(InvalidGraph):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("directed cycle: " + " -> ".join(self.cycle))


class DuplicateEdge(InvalidGraph):
    pass


class UnknownVertex(ValidationError):
    def __init__(self, vertices):
        self.vertices = sorted(vertices)
        super().__init__("unknown vertex: " + ", ".join(map(repr, self.vertices)))


class VertexNotInSubset(ValidationError):
    pass


class NotADescendant(ValidationError):
    pass


class NoSuchEdge(ValidationError):
    pass


class EdgeExists(ValidationError):
    pass


class WouldCreateCycle(ValidationError):
    pass


class LabelMismatch(ValidationError):
    pass


class TooFewRows(ValidationError):
    pass


class WrongDimension(ValidationError):
    pass


class PlanInvalid(ValidationError):
    pass


class NumericalError(EdgeSemError):
    exit_code = 4


class NotPositiveDefinite(NumericalError):
    pass


class SingularConditioningBlock(NumericalError):
    pass


class TrekExplosion(NumericalError):
    pass


class GenerationFailed(NumericalError):
    pass


class NotIdentifiable(EdgeSemError):
    exit_code = 2

    def __init__(self, report):
        self.report = report
        super().__init__(report.summary())


class NoPlanFound(EdgeSemError):
    exit_code = 2

    def __init__(self, prefix):
        self.prefix = list(prefix)
        steps = ", ".join(s.edge_string for s in self.prefix) or "none"
        super().__init__(f"no complete removal plan; longest prefix: {steps}")
