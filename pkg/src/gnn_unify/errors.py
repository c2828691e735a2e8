"""Exception types shared across the package."""

__all__ = [
    "GnnUnifyError",
    "InvalidEdge",
    "ShapeError",
    "ConfigError",
    "SolverError",
    "NotPositiveDefinite",
    "DatasetError",
    "BundleError",
    "TrainingDiverged",
]


class GnnUnifyError(Exception):
    """Base class for all errors raised by this package."""


class InvalidEdge(GnnUnifyError):
    """An input edge is out of range or is a self-edge."""


class ShapeError(GnnUnifyError):
    """Array dimensions or sparse structure do not match the contract."""


class ConfigError(GnnUnifyError):
    """A configuration value is outside its valid range or combination."""


class SolverError(GnnUnifyError):
    """A linear solve failed to converge and no fallback applies."""


class NotPositiveDefinite(GnnUnifyError):
    """A matrix expected to be SPD failed its Cholesky factorization."""


class DatasetError(GnnUnifyError):
    """Dataset contents violate an invariant (splits, labels, indices)."""


class BundleError(GnnUnifyError):
    """An on-disk graph bundle is missing files or fails validation."""


class TrainingDiverged(GnnUnifyError):
    """Training produced a non-finite loss."""
