import json
from pathlib import Path

import pytest

from ignorance_toolkit.errors import ModelFileError
from ignorance_toolkit.model import NeighborhoodFrame, NeighborhoodModel
from ignorance_toolkit.modelfile import (
    dump,
    dumps,
    load,
    load_frame,
    load_model,
    loads,
    parse_document,
    to_document,
)

MODEL_DOC = {
    "states": ["s", "t"],
    "neighborhoods": {"s": [["s", "t"], ["t"]], "t": []},
    "valuation": {"p": ["s"]},
}


def test_parse_model_document() -> None:
    model = parse_document(MODEL_DOC)
    assert isinstance(model, NeighborhoodModel)
    assert model.frame.neighborhood("s") == (0b10, 0b11)
    assert model.value("p") == 1


def test_parse_frame_document() -> None:
    frame = parse_document({"states": ["s"], "neighborhoods": {"s": [[]]}})
    assert isinstance(frame, NeighborhoodFrame)
    assert frame.masks == (1,)


def test_canonical_output() -> None:
    text = dumps(parse_document(MODEL_DOC))
    assert text.endswith("}\n")
    data = json.loads(text)
    # neighborhoods come out in bitmask order
    assert data["neighborhoods"]["s"] == [["t"], ["s", "t"]]
    assert list(data) == sorted(data)
    assert dumps(loads(text)) == text


def test_to_document_frame_has_no_valuation() -> None:
    frame = NeighborhoodFrame.from_labels(["s"], {"s": [["s"]]})
    assert to_document(frame) == {"states": ["s"], "neighborhoods": {"s": [["s"]]}}


def test_state_lists_follow_frame_order() -> None:
    model = parse_document(
        {
            "states": ["b", "a"],
            "neighborhoods": {"b": [["a", "b"]]},
            "valuation": {"p": ["a", "b"]},
        }
    )
    doc = to_document(model)
    assert doc["neighborhoods"]["b"] == [["b", "a"]]
    assert doc["valuation"] == {"p": ["b", "a"]}


@pytest.mark.parametrize(
    ("document", "message"),
    [
        ([], "JSON object"),
        ({"states": ["s"], "neighborhoods": {}, "extra": 1}, "Unknown key"),
        ({"states": ["s"]}, "Missing key"),
        ({"states": "s", "neighborhoods": {}}, "list of state labels"),
        ({"states": ["s"], "neighborhoods": []}, "must map state labels"),
        ({"states": ["s"], "neighborhoods": {"s": "x"}}, "must be a list"),
        ({"states": ["s"], "neighborhoods": {"t": []}}, "Unknown state"),
        ({"states": ["s"], "neighborhoods": {"s": [["u"]]}}, "Unknown state"),
        ({"states": ["s"], "neighborhoods": {"s": [["s"], ["s"]]}}, "Duplicate"),
        ({"states": ["s"], "neighborhoods": {}, "valuation": {"P": []}}, "Invalid atom"),
        ({"states": ["s"], "neighborhoods": {}, "valuation": {"p": ["t"]}}, "Unknown state"),
        ({"states": ["s"], "neighborhoods": {}, "valuation": []}, "must map atoms"),
    ],
)
def test_malformed_documents(document: object, message: str) -> None:
    with pytest.raises(ModelFileError, match=message):
        parse_document(document)


def test_invalid_json() -> None:
    with pytest.raises(ModelFileError, match="Invalid JSON in inline"):
        loads("{", source="inline")


def test_file_round_trip(tmp_path: Path) -> None:
    model = parse_document(MODEL_DOC)
    path = dump(model, tmp_path / "nested" / "model.json")
    assert path.is_file()
    assert load(path) == model
    assert load_frame(path) == model.frame
    assert load_model(path) == model


def test_load_model_from_frame_file(tmp_path: Path) -> None:
    frame = NeighborhoodFrame.from_labels(["s"], {"s": [["s"]]})
    path = dump(frame, tmp_path / "frame.json")
    model = load_model(path)
    assert model.frame == frame
    assert model.valuation == ()


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(ModelFileError, match="Cannot read"):
        load(tmp_path / "nope.json")


def test_non_utf8_file(tmp_path: Path) -> None:
    path = tmp_path / "latin1.json"
    path.write_bytes(b'{"states": ["\xff"]}')
    with pytest.raises(ModelFileError, match=r"not valid UTF-8 \(byte 13\)"):
        load(path)
