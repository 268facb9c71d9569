"""Python bindings for the pricing loss library."""

from ._pricing_losses import (
    DomainError,
    MatError,
    conditional_variance,
    corrupted_loss,
    oracle_suite,
    push_forward,
    reweight_matrix,
    transfer_matrix,
    valuation_loss,
)

__all__ = [
    "DomainError",
    "MatError",
    "conditional_variance",
    "corrupted_loss",
    "oracle_suite",
    "push_forward",
    "reweight_matrix",
    "transfer_matrix",
    "valuation_loss",
]
