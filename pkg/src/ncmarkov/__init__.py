"""Repeated interactions with vacuum vectors.

The transfer series of a model is checked against a dense simulation of the
interaction chain, and the induced Markov chain is diagnosed."""

__version__ = "0.1.0"

from .config import DEFAULT, Tolerances
from .errors import GuardError, InvalidModelError, ModelFormatError, ShapeError
from .markov import DiagnosticsReport, diagnose
from .model import (
    Colligation,
    InteractionModel,
    ReducedColligation,
    colligation_of,
    generate,
    load_model,
    save_model,
    validate,
)
from .scattering import record_distribution, scattering_axioms_check
from .transfer import TransferSeries, series

__all__ = [
    "__version__",
    "DEFAULT",
    "Tolerances",
    "GuardError",
    "InvalidModelError",
    "ModelFormatError",
    "ShapeError",
    "DiagnosticsReport",
    "diagnose",
    "Colligation",
    "InteractionModel",
    "ReducedColligation",
    "colligation_of",
    "generate",
    "load_model",
    "save_model",
    "validate",
    "record_distribution",
    "scattering_axioms_check",
    "TransferSeries",
    "series",
]
