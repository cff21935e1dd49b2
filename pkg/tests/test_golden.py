import pathlib

import pytest

from arborify.dsl import parse_any, print_any
from arborify.serialize import from_json, to_json

FILES = sorted((pathlib.Path(__file__).parent / "golden").glob("*.arb"))


def test_corpus_size():
    assert len(FILES) == 50


@pytest.mark.parametrize("path", FILES, ids=lambda p: p.stem)
def test_golden_roundtrip(path):
    text = path.read_text(encoding="utf-8")
    x = parse_any(text)
    assert print_any(x) == text
    assert from_json(to_json(x)) == x
