"""Mertens-function verification workbench."""

from ._core import (
    CapabilityError,
    CrossCheckError,
    DomainError,
    PreconditionError,
    RangeError,
    Workbench,
    __version__,
    lambda2,
    lambda_iteration,
    run_cli,
    sieve,
)

__all__ = [
    "CapabilityError",
    "CrossCheckError",
    "DomainError",
    "PreconditionError",
    "RangeError",
    "Workbench",
    "__version__",
    "lambda2",
    "lambda_iteration",
    "run_cli",
    "sieve",
]
