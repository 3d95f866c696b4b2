"""Exception hierarchy.

The CLI maps these onto exit codes: hypothesis failures exit 2, resource and
search failures exit 3, everything else exits 1.
"""


class TowerforgeError(Exception):
    exit_code = 1


class DomainError(TowerforgeError, ValueError):
    """Input outside the mathematical domain of an operation."""


class ModelError(DomainError):
    """Malformed residue-field model (e.g. a reducible defining polynomial)."""


class ResourceError(TowerforgeError):
    """A configured bound (discriminant cap, height bound, ...) was exceeded."""

    exit_code = 3


class SearchFailure(ResourceError):
    """A prime scan ran out of range without finding a hit."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


class HypothesisFailure(TowerforgeError):
    """A theorem hypothesis does not hold for the input; the run is refused."""

    exit_code = 2


class PreconditionError(HypothesisFailure):
    pass


class InternalInconsistency(TowerforgeError):
    """Something a theorem guarantees did not happen: a bug or a violated precondition."""

    exit_code = 4
