"""Spectra, eigenvalue curves and perturbation bounds for the Klein-Gordon quadratic eigenproblem."""

from .errors import (
    CholeskyFailure,
    ConditionViolated,
    DefinitenessEmpty,
    KGError,
    PositivityFailure,
)
from .pencil import OperatorPair, definiteness_interval, spectrum, spectrum_general

__all__ = [
    "CholeskyFailure",
    "ConditionViolated",
    "DefinitenessEmpty",
    "KGError",
    "OperatorPair",
    "PositivityFailure",
    "definiteness_interval",
    "spectrum",
    "spectrum_general",
]
