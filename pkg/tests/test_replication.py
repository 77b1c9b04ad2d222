import json
from collections.abc import Generator
from pathlib import Path

import pytest

from ignorance_toolkit.config import Config
from ignorance_toolkit.errors import FixtureError
from ignorance_toolkit.formula import parse
from ignorance_toolkit.model import NeighborhoodFrame, NeighborhoodModel
from ignorance_toolkit.modelfile import dumps, loads
from ignorance_toolkit.replication import (
    FIXTURES,
    SuiteOptions,
    SuiteReport,
    build_claims,
    export_fixture,
    get_fixture,
    load_frame_fixture,
    load_model_fixture,
    run_claim_suite,
    select_claims,
)
from ignorance_toolkit.replication.catalog import FixtureKind, normalize_id
from ignorance_toolkit.semantics import satisfies


@pytest.fixture(scope="module")
def full_report() -> SuiteReport:
    return run_claim_suite(SuiteOptions(seed=1729, definability_samples=20_000))


@pytest.fixture
def fresh_config() -> Generator[None, None, None]:
    Config._instance = None
    Config._initialized = False
    yield
    Config._instance = None
    Config._initialized = False


# --------------------------------------------------------------------------
# Fixture catalog
# --------------------------------------------------------------------------


@pytest.mark.parametrize("fixture_id", sorted(FIXTURES))
def test_shipped_files_are_canonical(fixture_id: str) -> None:
    fixture = get_fixture(fixture_id)
    text = fixture.text()
    assert export_fixture(fixture_id) == text
    assert dumps(loads(text)) == text


@pytest.mark.parametrize("fixture_id", sorted(FIXTURES))
def test_fixture_kinds_and_points(fixture_id: str) -> None:
    fixture = get_fixture(fixture_id)
    loaded = fixture.load()
    if fixture.kind is FixtureKind.MODEL:
        assert isinstance(loaded, NeighborhoodModel)
        states = loaded.frame.states
    else:
        assert isinstance(loaded, NeighborhoodFrame)
        states = loaded.states
    assert set(fixture.points) <= set(states)


def test_fixture_ids_normalize() -> None:
    assert normalize_id(" p6.m′ ") == "P6.M'"
    assert get_fixture("P6.M’") is FIXTURES["P6.M'"]
    assert get_fixture("p14.f1").id == "P14.F1"
    with pytest.raises(FixtureError, match="Unknown fixture"):
        get_fixture("P99.M")


def test_model_loader_rejects_frames() -> None:
    with pytest.raises(FixtureError, match="is a frame, not a model"):
        load_model_fixture("P16.F")
    assert load_frame_fixture("P6.M") == load_model_fixture("P6.M").frame


def test_remark_pair_shares_a_file() -> None:
    assert FIXTURES["R1.M'"].filename == FIXTURES["P3.M'"].filename
    assert load_model_fixture("R1.M'") == load_model_fixture("P3.M'")


def test_first_model_pair() -> None:
    m, m2 = load_model_fixture("P1.M"), load_model_fixture("P1.M'")
    bullet = parse("bullet p")
    assert satisfies(m, "s", bullet)
    assert not satisfies(m2, "s'", bullet)


def test_export_writes_file(tmp_path: Path) -> None:
    target = tmp_path / "out" / "p6.json"
    text = export_fixture("P6.M'", target)
    assert target.read_text(encoding="utf-8") == text
    assert json.loads(text)["valuation"] == {"p": ["t'"]}


# --------------------------------------------------------------------------
# Claims
# --------------------------------------------------------------------------


def test_claim_ids_are_unique_and_sorted() -> None:
    ids = [claim.claim_id for claim in build_claims()]
    assert ids == sorted(ids)
    assert len(ids) == len(set(ids))


def test_select_claims() -> None:
    claims = build_claims()
    p6 = select_claims(claims, ["p6"])
    assert p6
    assert all(c.group == "P6" for c in p6)
    assert [c.claim_id for c in select_claims(claims, ["NEG.E4"])] == ["NEG.E4"]
    assert {c.claim_id for c in select_claims(claims, ["SND"])} == {
        f"SND.{name}" for name in ("E", "Ec", "EN", "K", "M", "R")
    }
    assert select_claims(claims, []) == claims
    assert select_claims(claims, ["nothing"]) == []


def test_single_claim_outcome() -> None:
    (claim,) = select_claims(build_claims(), ["P6.morphism.swapped"])
    outcome = claim.check()
    assert outcome.passed
    assert outcome.detail == "not a morphism"
    data = outcome.to_dict()
    assert "elapsed_ms" not in data
    assert "elapsed_ms" in outcome.to_dict(timings=True)


def test_full_suite_passes(full_report: SuiteReport) -> None:
    failures = [o for o in full_report.outcomes if not o.passed]
    assert failures == [], [(o.claim_id, o.detail) for o in failures]
    assert full_report.ok
    assert full_report.passed == len(build_claims())


def test_text_report(full_report: SuiteReport) -> None:
    text = full_report.to_text(timings=False)
    assert text.startswith("[COR]\n")
    assert "  PASS P6.distinguishable: " in text
    assert text.endswith(f"{full_report.passed}/{full_report.passed} claims passed\n")
    assert " ms)" not in text


def test_json_report_is_deterministic_across_jobs() -> None:
    inline = run_claim_suite(SuiteOptions(jobs=1, seed=1729), only=("P6", "SND"))
    pooled = run_claim_suite(SuiteOptions(jobs=2, seed=1729), only=("P6", "SND"))
    assert inline.to_json() == pooled.to_json()
    data = json.loads(inline.to_json())
    assert data["summary"]["failed"] == 0
    assert data["summary"]["exhaustive_definability"] is False
    assert all("elapsed_ms" not in claim for claim in data["claims"])


@pytest.mark.usefixtures("fresh_config")
def test_definability_claim_budget_covers_its_sample() -> None:
    Config({"frame_budget": 1000})
    (claim,) = select_claims(build_claims(), ["P13.definability"])
    outcome = claim.check(SuiteOptions(seed=7, definability_samples=5000))
    assert outcome.passed, outcome.detail
    assert outcome.detail.startswith("5260 frames (sampled sizes 3, seed 7)")


@pytest.mark.slow
@pytest.mark.usefixtures("fresh_config")
def test_definability_claim_default_sample() -> None:
    (claim,) = select_claims(build_claims(), ["P13.definability"])
    outcome = claim.check(SuiteOptions(seed=1729))
    assert outcome.passed, outcome.detail
    assert outcome.detail == "1000260 frames (sampled sizes 3, seed 1729), 0 disagreements"
