"""Exception families.  Each family maps to a distinct CLI exit code."""


class ThinFilmError(Exception):
    exit_code = 1


# configuration ------------------------------------------------------------

class ConfigError(ThinFilmError):
    exit_code = 2


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None, path=None):
        self.line = line
        self.column = column
        self.path = path
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
            if column is not None:
                loc += f":{column}"
        super().__init__(f"{loc}: {message}" if loc else message)


class ValidationError(ConfigError):
    """Carries every problem found, as (field_path, message) pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"{p}: {m}" for p, m in self.errors]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))


# geometry -----------------------------------------------------------------

class GeometryError(ThinFilmError):
    exit_code = 3


class DegenerateChart(GeometryError):
    pass


class NumericalInconsistency(GeometryError):
    pass


class SingularJacobian(GeometryError):
    pass


# gap ----------------------------------------------------------------------

class GapError(ThinFilmError):
    exit_code = 4


class GapTooSmall(GapError):
    pass


class GapCollapse(GapError):
    pass


# linear solves ------------------------------------------------------------

class SolverError(ThinFilmError):
    exit_code = 5


class SingularSystem(SolverError):
    pass


class NoConvergence(SolverError):
    def __init__(self, iterations, residual, message=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(message or
                         f"no convergence after {iterations} iterations "
                         f"(relative residual {residual:.3e})")


# time stepping ------------------------------------------------------------

class TimeSteppingError(ThinFilmError):
    exit_code = 6


class CflViolation(TimeSteppingError):
    pass


class BlowUp(TimeSteppingError):
    pass
