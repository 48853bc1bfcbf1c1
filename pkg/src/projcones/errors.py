"""Exception hierarchy shared by all modules."""


class ProjconesError(Exception):
    """Base class; the CLI maps these to exit code 3."""


class DomainError(ProjconesError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class DegenerateInputError(ProjconesError, ValueError):
    pass


class ResourceError(ProjconesError, RuntimeError):
    pass


class SingularPairError(ProjconesError, ValueError):
    def __init__(self, pairs):
        self.pairs = list(pairs)
        shown = ", ".join(f"({i},{j})" for i, j in self.pairs[:10])
        more = "" if len(self.pairs) <= 10 else f" ... {len(self.pairs)} total"
        super().__init__(f"coincident points at indices {shown}{more}")


class ScaleWindowError(ProjconesError, ValueError):
    pass


class PreconditionError(ProjconesError, ValueError):
    pass


class BranchError(ProjconesError, ValueError):
    """Inputs belong to a different branch of a case analysis."""


class CoverageError(ProjconesError, RuntimeError):
    pass


class InsufficientDataError(ProjconesError, ValueError):
    pass


class NoLineError(BranchError):
    """Two planes are parallel, so they do not meet in a line."""


class ConfigError(ValueError):
    """Invalid scenario configuration; the CLI maps it to exit code 2."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class ScenarioError(ProjconesError):
    """A module error raised while running a named scenario."""

    def __init__(self, scenario: str, error: Exception):
        self.scenario = scenario
        self.error = error
        super().__init__(f"scenario {scenario}: {type(error).__name__}: {error}")
