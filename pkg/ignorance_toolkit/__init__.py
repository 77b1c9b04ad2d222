"""Ignorance toolkit package."""

from .config import Config, ConfigDict, PartialConfigDict, is_config_key
from .errors import (
    BudgetExceededError,
    FixtureError,
    FormulaSyntaxError,
    IgnoranceToolkitError,
    ModelFileError,
    ProofScriptError,
)
from .formula import Formula, Fragment, parse, render
from .logger import Logger, LogLevel, get_logger
from .model import NeighborhoodFrame, NeighborhoodModel, Property, has_property, supplementation
from .semantics import Verdict, class_valid, frame_valid, model_valid, satisfies, truth_set

__all__ = [
    "BudgetExceededError",
    "Config",
    "ConfigDict",
    "FixtureError",
    "Formula",
    "FormulaSyntaxError",
    "Fragment",
    "IgnoranceToolkitError",
    "LogLevel",
    "Logger",
    "ModelFileError",
    "NeighborhoodFrame",
    "NeighborhoodModel",
    "PartialConfigDict",
    "ProofScriptError",
    "Property",
    "Verdict",
    "class_valid",
    "frame_valid",
    "get_logger",
    "has_property",
    "is_config_key",
    "model_valid",
    "parse",
    "render",
    "satisfies",
    "supplementation",
    "truth_set",
]
