import json

import pytest

from arborify.dsl import parse_tree, parse_word
from arborify.serialize import SCHEMA, SchemaError, from_json, from_json_obj, to_dot, to_json, to_json_obj


def tree():
    return parse_tree("2 I[t1,0]((1))#a I[t1,1]((1))#b I[t2,1]((3); I[t1,0]((1)) I[t1,0]((1)) I[t1,1]((5)))\npair2: (#a, #b)")


def word():
    return parse_word("-i S[0 (1,1); 0^ (1,0)#x1; 1 (1,0)#x2; 1 (1,1)] S[0 (0,1); 0 (1,0)#x3; 1^ (1,0)#x4]\n"
                      "pair1: (#x1, #x4)\npair2: (#x2, #x3)")


@pytest.mark.parametrize("make", [tree, word])
def test_json_roundtrip(make):
    x = make()
    text = to_json(x)
    assert json.loads(text)["schema"] == SCHEMA
    y = from_json(text)
    assert y == x and to_json(y) == text


def test_schema_errors():
    obj = to_json_obj(tree())
    bad = dict(obj, schema="other/v9")
    with pytest.raises(SchemaError):
        from_json_obj(bad)
    with pytest.raises(Exception):
        from_json("{not json")


def test_dangling_leaf_id():
    obj = to_json_obj(tree())
    obj["terms"][0]["tree"]["pairs"]["class2"][0][1] = 999
    with pytest.raises(SchemaError):
        from_json_obj(obj)


def test_dot_output():
    dot = to_dot(tree())
    assert dot.startswith("digraph") and dot.count("subgraph cluster_") == 1
    assert "dashed" in dot
    hat_tree = parse_tree("Ihat[t1,0]((1))#a I[t1,0]((1))#b\npair1: (#a, #b)")
    assert to_dot(hat_tree).count('class="hat"') == 1
    assert "subgraph cluster_" in to_dot(word())
