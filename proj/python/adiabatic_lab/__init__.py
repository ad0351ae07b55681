"""Adiabatic transition probabilities, complex crossings and superadiabatic bases."""

from ._core import (
    DomainError,
    Model,
    NumericalError,
    __version__,
    asymptotic_estimate,
    catalog,
    defaults,
    find_crossings,
    fit_decay_rate,
    geometric_prefactor,
    loop_integral,
    model,
    optimal_truncation,
    parameter_defaults,
    propagate,
    run,
    superadiabatic_transition,
    transition_probability,
    validate,
)

__all__ = [
    "DomainError",
    "Model",
    "NumericalError",
    "__version__",
    "asymptotic_estimate",
    "catalog",
    "defaults",
    "find_crossings",
    "fit_decay_rate",
    "geometric_prefactor",
    "loop_integral",
    "model",
    "optimal_truncation",
    "parameter_defaults",
    "propagate",
    "run",
    "superadiabatic_transition",
    "transition_probability",
    "validate",
]
