"""JSON codec for model and frame files.

A model document looks like::

    {"states": ["s", "t"],
     "neighborhoods": {"s": [["t"], ["s", "t"]], "t": []},
     "valuation": {"p": ["s"]}}

A frame document is the same without ``"valuation"``. Output is canonical:
sorted keys, neighborhoods in bitmask order and state lists in frame order, so
an exported document re-imports and re-exports byte-identically.
"""

from __future__ import annotations

import json
from os import PathLike
from pathlib import Path
from typing import Any, TypedDict

from .errors import ModelFileError
from .logger import get_logger
from .model import NeighborhoodFrame, NeighborhoodModel
from .utils import members

logger = get_logger(__name__)

_FRAME_KEYS = frozenset({"states", "neighborhoods"})
_MODEL_KEYS = _FRAME_KEYS | {"valuation"}


class FrameDocument(TypedDict):
    states: list[str]
    neighborhoods: dict[str, list[list[str]]]


class ModelDocument(FrameDocument, total=False):
    valuation: dict[str, list[str]]


def _string_list(value: Any, what: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ModelFileError(f"{what} must be a list of state labels")
    return value


def parse_document(data: Any) -> NeighborhoodFrame | NeighborhoodModel:
    """Validate a decoded JSON document and build the frame or model it describes.

    Raises:
        ModelFileError: on unknown keys, bad labels or duplicate neighborhoods
    """
    if not isinstance(data, dict):
        raise ModelFileError("Model file must contain a JSON object")
    unknown = set(data) - _MODEL_KEYS
    if unknown:
        raise ModelFileError(f"Unknown key(s): {', '.join(sorted(unknown))}")
    missing = _FRAME_KEYS - set(data)
    if missing:
        raise ModelFileError(f"Missing key(s): {', '.join(sorted(missing))}")

    states = _string_list(data["states"], "'states'")
    raw_neighborhoods = data["neighborhoods"]
    if not isinstance(raw_neighborhoods, dict):
        raise ModelFileError("'neighborhoods' must map state labels to lists of sets")
    neighborhoods: dict[str, list[list[str]]] = {}
    for state, sets in raw_neighborhoods.items():
        if not isinstance(sets, list):
            raise ModelFileError(f"Neighborhoods of {state!r} must be a list")
        neighborhoods[state] = [_string_list(x, f"A neighborhood of {state!r}") for x in sets]

    try:
        frame = NeighborhoodFrame.from_labels(states, neighborhoods)
    except ValueError as exc:
        raise ModelFileError(str(exc)) from exc

    if "valuation" not in data:
        return frame

    raw_valuation = data["valuation"]
    if not isinstance(raw_valuation, dict):
        raise ModelFileError("'valuation' must map atoms to lists of states")
    valuation = {
        atom: _string_list(labels, f"Valuation of {atom!r}")
        for atom, labels in raw_valuation.items()
    }
    try:
        return NeighborhoodModel.from_labels(frame, valuation)
    except ValueError as exc:
        raise ModelFileError(str(exc)) from exc


def loads(text: str, *, source: str = "<string>") -> NeighborhoodFrame | NeighborhoodModel:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"Invalid JSON in {source}: {exc.msg}") from exc
    return parse_document(data)


def load(path: PathLike[str] | str) -> NeighborhoodFrame | NeighborhoodModel:
    """Read a model or frame file.

    Raises:
        ModelFileError: if the file is missing, unreadable or malformed
    """
    file = Path(path)
    try:
        text = file.read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelFileError(f"Cannot read {file}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise ModelFileError(f"{file} is not valid UTF-8 (byte {exc.start})") from exc
    logger.debug("Loading model file %s", file)
    return loads(text, source=str(file))


def load_model(path: PathLike[str] | str) -> NeighborhoodModel:
    """Read a model; a frame file yields the model with the empty valuation."""
    loaded = load(path)
    if isinstance(loaded, NeighborhoodFrame):
        return NeighborhoodModel(loaded)
    return loaded


def load_frame(path: PathLike[str] | str) -> NeighborhoodFrame:
    """Read a frame; the valuation of a model file is ignored."""
    loaded = load(path)
    return loaded.frame if isinstance(loaded, NeighborhoodModel) else loaded


def to_document(obj: NeighborhoodFrame | NeighborhoodModel) -> ModelDocument:
    frame = obj.frame if isinstance(obj, NeighborhoodModel) else obj
    document: ModelDocument = {
        "states": list(frame.states),
        "neighborhoods": {
            state: [list(frame.labels(x)) for x in members(mask)]
            for state, mask in zip(frame.states, frame.masks, strict=True)
        },
    }
    if isinstance(obj, NeighborhoodModel):
        document["valuation"] = {atom: list(frame.labels(x)) for atom, x in obj.valuation}
    return document


def dumps(obj: NeighborhoodFrame | NeighborhoodModel) -> str:
    """Serialize to the canonical text form (trailing newline included)."""
    return json.dumps(to_document(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def dump(obj: NeighborhoodFrame | NeighborhoodModel, path: PathLike[str] | str) -> Path:
    file = Path(path)
    file.parent.mkdir(parents=True, exist_ok=True)
    file.write_text(dumps(obj), encoding="utf-8")
    logger.debug("Wrote %s", file)
    return file
