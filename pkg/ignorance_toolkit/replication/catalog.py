"""Catalog of the shipped model and frame fixtures."""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from functools import cache
from importlib.resources import files
from os import PathLike
from pathlib import Path
from typing import Final

from ..errors import FixtureError
from ..logger import get_logger
from ..model import NeighborhoodFrame, NeighborhoodModel
from ..modelfile import dumps, loads

logger = get_logger(__name__)


class FixtureKind(StrEnum):
    MODEL = "model"
    FRAME = "frame"


@dataclass(frozen=True, slots=True)
class Fixture:
    id: str
    filename: str
    kind: FixtureKind
    points: tuple[str, ...]
    description: str = ""

    def text(self) -> str:
        """Raw contents of the shipped file."""
        return _read(self.filename)

    def load(self) -> NeighborhoodModel | NeighborhoodFrame:
        return _load(self.filename)


def _read(filename: str) -> str:
    resource = files("ignorance_toolkit").joinpath("fixtures", filename)
    if not resource.is_file():
        raise FixtureError(f"Fixture file {filename} is missing")
    return resource.read_text(encoding="utf-8")


@cache
def _load(filename: str) -> NeighborhoodModel | NeighborhoodFrame:
    logger.debug("Loading fixture file %s", filename)
    return loads(_read(filename), source=filename)


def _model(fid: str, filename: str, point: str, description: str = "") -> Fixture:
    return Fixture(fid, filename, FixtureKind.MODEL, (point,), description)


def _frame(fid: str, filename: str, points: tuple[str, ...], description: str = "") -> Fixture:
    return Fixture(fid, filename, FixtureKind.FRAME, points, description)


FIXTURES: Final[dict[str, Fixture]] = {
    f.id: f
    for f in (
        _model("P1.M", "p1_m.json", "s", "∇-indistinguishable from P1.M' on (r),(i),(s),(d)"),
        _model("P1.M'", "p1_m_prime.json", "s'"),
        _model("P2.M", "p2_m.json", "s", "∇-indistinguishable from P2.M' on (n),(b)"),
        _model("P2.M'", "p2_m_prime.json", "s'"),
        _model("P3.M", "p3_m.json", "s", "∇-indistinguishable from P3.M' on (4),(5)"),
        _model("P3.M'", "p3_m_prime.json", "s'"),
        _model("R1.M", "r1_m.json", "s", "agrees with R1.M' on {∇,•}, □⊥ separates"),
        _model("R1.M'", "p3_m_prime.json", "s'"),
        _model("P6.M", "p6_m.json", "s", "•-indistinguishable from P6.M' on six conditions"),
        _model("P6.M'", "p6_m_prime.json", "s'"),
        _model("P7.M", "p7_m.json", "s", "•-indistinguishable from P7.M' on (4)"),
        _model("P7.M'", "p7_m_prime.json", "s'"),
        _model("P8.M", "p8_m.json", "s", "•-indistinguishable from P8.M' on (5)"),
        _model("P8.M'", "p8_m_prime.json", "s'"),
        _model("P12.M", "p12_m.json", "s", "agrees with P12.M' on {∇,•}, □p separates"),
        _model("P12.M'", "p12_m_prime.json", "s'"),
        _frame("P14.F1", "p14_f1.json", ("s1",), "has (d),(t), lacks (c)"),
        _frame("P14.F2", "p14_f2.json", ("s2",), "has (c),(r),(i),(b), lacks (d),(t)"),
        _frame("P14.F3", "p14_f3.json", ("s3", "t3"), "lacks (r),(i),(b)"),
        _frame("P15.F", "p15_f.json", ("s", "t"), "has (s),(4)"),
        _frame("P15.F'", "p15_f_prime.json", ("s'", "t'"), "lacks (s),(4)"),
        _frame("P16.F", "p16_f.json", ("s", "t"), "has (5)"),
        _frame("P16.F'", "p16_f_prime.json", ("s'", "t'"), "lacks (5)"),
    )
}


def normalize_id(text: str) -> str:
    """Canonical spelling of a fixture id: upper-case prefix, ASCII prime."""
    cleaned = text.strip().replace("′", "'").replace("’", "'")
    prefix, dot, rest = cleaned.partition(".")
    return f"{prefix.upper()}{dot}{rest.upper()}" if dot else cleaned.upper()


def get_fixture(fixture_id: str) -> Fixture:
    """Look up a fixture; ``′`` is accepted for the prime.

    Raises:
        FixtureError: for unknown ids
    """
    key = normalize_id(fixture_id)
    if key not in FIXTURES:
        raise FixtureError(
            f"Unknown fixture {fixture_id!r}; available: {', '.join(sorted(FIXTURES))}"
        )
    return FIXTURES[key]


def load_model_fixture(fixture_id: str) -> NeighborhoodModel:
    loaded = get_fixture(fixture_id).load()
    if not isinstance(loaded, NeighborhoodModel):
        raise FixtureError(f"{fixture_id} is a frame, not a model")
    return loaded


def load_frame_fixture(fixture_id: str) -> NeighborhoodFrame:
    """The frame of a fixture; a model fixture yields its underlying frame."""
    loaded = get_fixture(fixture_id).load()
    return loaded.frame if isinstance(loaded, NeighborhoodModel) else loaded


def export_fixture(fixture_id: str, output: PathLike[str] | str | None = None) -> str:
    """Serialize a fixture in the model file format, optionally writing it to ``output``.

    Raises:
        FixtureError: for unknown ids
    """
    text = dumps(get_fixture(fixture_id).load())
    if output is not None:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info("Exported %s to %s", normalize_id(fixture_id), path)
    return text
