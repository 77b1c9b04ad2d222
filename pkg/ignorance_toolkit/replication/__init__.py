"""Fixture catalog and the claim suite built on it."""

from .catalog import (
    FIXTURES,
    Fixture,
    export_fixture,
    get_fixture,
    load_frame_fixture,
    load_model_fixture,
)
from .claims import Claim, ClaimOutcome, SuiteOptions
from .suite import SuiteReport, build_claims, run_claim_suite, select_claims

__all__ = [
    "FIXTURES",
    "Claim",
    "ClaimOutcome",
    "Fixture",
    "SuiteOptions",
    "SuiteReport",
    "build_claims",
    "export_fixture",
    "get_fixture",
    "load_frame_fixture",
    "load_model_fixture",
    "run_claim_suite",
    "select_claims",
]
