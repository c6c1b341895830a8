"""Exception taxonomy and warning categories.

The CLI maps exceptions to exit codes through ``exit_code``:
usage errors exit 1, domain errors 2, resource errors 3, convergence
failures 4.
"""


class DisagreeKitError(Exception):
    exit_code = 2


class UsageError(DisagreeKitError):
    """Bad command line or sweep configuration."""

    exit_code = 1


class DomainError(DisagreeKitError):
    """Input violates a mathematical precondition (bipartite, disconnected,
    nonpositive weight, out-of-range parameter, ...)."""

    exit_code = 2


class ParseError(DomainError):
    """Malformed edge-list input; carries the offending line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class DuplicateEdgeError(DomainError):
    pass


class ResourceError(DisagreeKitError):
    """Instance too large for the requested (dense) code path."""

    exit_code = 3


class ConvergenceError(DisagreeKitError):
    """Iterative solver or sampler failed to reach its tolerance."""

    exit_code = 4

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NearBipartiteWarning(UserWarning):
    """Spectrum has an eigenvalue so close to -1 that 1/(1-lambda^2) blows up."""


class CostWarning(UserWarning):
    """Derived sampling parameters imply an unusually expensive run."""
