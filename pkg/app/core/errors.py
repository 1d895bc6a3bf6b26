from typing import Optional


class PercLabError(ValueError):
    """Base class for every error raised by the library"""


# Graph core
class GraphError(PercLabError):
    pass


class SelfLoopError(GraphError):
    def __init__(self, vertex: int):
        super().__init__(f"self-loop at vertex {vertex}")
        self.vertex = vertex


class DuplicateEdgeError(GraphError):
    def __init__(self, u: int, v: int):
        super().__init__(f"duplicate edge ({u}, {v})")
        self.edge = (u, v)


class VertexOutOfRangeError(GraphError):
    def __init__(self, vertex: int, n: int):
        super().__init__(f"endpoint {vertex} out of range for n={n}")
        self.vertex = vertex
        self.n = n


class EdgeListFormatError(GraphError):
    pass


class ComponentNotConnectedError(GraphError):
    pass


# Generators
class GeneratorError(PercLabError):
    pass


class InvalidGeneratorParameterError(GeneratorError):
    pass


class RestartBudgetExhaustedError(GeneratorError):
    def __init__(self, attempts: int):
        super().__init__(f"no simple graph found after {attempts} attempts")
        self.attempts = attempts


# Spectral
class SpectralError(PercLabError):
    pass


class NonRegularGraphError(SpectralError):
    pass


# Percolation and peeling
class PercolationError(PercLabError):
    pass


class InvalidProbabilityError(PercolationError):
    pass


class TraceFormatError(PercolationError):
    pass


# Expansion
class ExpansionError(PercLabError):
    pass


class ExpansionTooLargeError(ExpansionError):
    pass


class NoAdmissibleSubsetError(ExpansionError):
    pass


# Trees
class TreeError(PercLabError):
    pass


class BalancedSubtreePreconditionError(TreeError):
    pass


# Experiment configuration
class ConfigError(PercLabError):
    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


class UnknownConfigKeyError(ConfigError):
    pass


class MalformedConfigValueError(ConfigError):
    pass


class MissingConfigKeyError(ConfigError):
    pass


class UnknownPresetError(ConfigError):
    pass
