import pytest
from hypothesis import given, strategies as st

from arborify.coeff import ExactCoeff
from arborify.common import KirchhoffError
from arborify.dsl import DslError, detect_kind, parse_any, parse_tree, parse_word, print_any, print_tree, print_word
from arborify.trees import DecoratedTree, TreePoly, leaf, planted


def test_tree_roundtrip_and_canonical_order():
    a = parse_tree("I[t1,1]((1)) I[t1,0]((1))")
    b = parse_tree("I[t1,0]((1)) I[t1,1]((1))")
    assert a == b and print_tree(a) == print_tree(b)


def test_t2_nodes_and_kirchhoff():
    p = parse_tree("I[t2,0]((3); I[t1,0]((2)) I[t1,0]((2)) I[t1,1]((1)))")
    (pt, c), = list(p)
    assert pt.tree.branches[0].freq == (3,)
    with pytest.raises(DslError) as e:
        parse_tree("I[t2,0]((4); I[t1,0]((2)) I[t1,0]((2)) I[t1,1]((1)))")
    assert str(e.value).startswith("1:1:")


def test_placeholder_frequency_and_bindings():
    text = "let k = (2)\nI[t2,0](_; I[t1,0](k) I[t1,0](k) I[t1,1]((1)))"
    (pt, _), = list(parse_tree(text))
    assert pt.tree.branches[0].freq == (3,)


def test_coefficients_and_sums():
    p = parse_tree("3/2 I[t1,0]((1)) - i I[t1,0]((2)) + (1/2+3i) mu^2 I[t1,0]((3))")
    coeffs = sorted(str(c) for _, c in p)
    assert coeffs == sorted(["3/2", "-i", "(1/2+3i) mu^2"])


def test_distributes_products():
    p = parse_tree("(I[t1,0]((1)) + I[t1,0]((2))) I[t1,0]((3))")
    assert len(p) == 2


def test_pairs():
    p = parse_tree("I[t1,0]((1))#a I[t1,1]((1))#b\npair2: (#a, #b)")
    (pt, _), = list(p)
    assert len(pt.pairing) == 1
    with pytest.raises(DslError):
        parse_tree("I[t1,0]((1))#a I[t1,1]((1))#b\npair2: (#a, #zz)")


def test_words():
    text = "-i S[0 (1,1); 0^ (1,0)#x1; 1 (1,0)#x2; 1 (1,1)] S[0 (0,1); 0 (1,0)#x3; 1^ (1,0)#x4]\npair1: (#x1, #x4)\npair2: (#x2, #x3)"
    w = parse_word(text)
    assert print_word(w) == text + "\n"
    assert detect_kind(text) == "word"


def test_comments_and_spans():
    assert parse_tree("// a comment\nI[t1,0]((1)) // trailing\n") == parse_tree("I[t1,0]((1))")
    with pytest.raises(DslError) as e:
        parse_tree("I[t1,0]((1))\n  I[t3,0]((1))")
    assert e.value.span is not None and e.value.span.line == 2
    with pytest.raises(DslError):
        parse_tree("I[t1,0]((1)) $")


def test_zero_and_unit():
    assert print_any(TreePoly.zero()) == "0\n"
    assert print_any(parse_tree("1")) == "1\n"


freqs = st.tuples(st.integers(-4, 4))


@st.composite
def planted_trees(draw, depth=2):
    if depth == 0 or draw(st.booleans()):
        return leaf(draw(freqs), draw(st.integers(0, 1)))
    kids = draw(st.lists(planted_trees(depth=depth - 1), min_size=1, max_size=3))
    return planted(draw(st.integers(0, 1)), kids)


@given(st.lists(planted_trees(), min_size=1, max_size=3), st.integers(-3, 3), st.integers(-3, 3))
def test_roundtrip_property(branches, re, im):
    if re == 0 and im == 0:
        re = 1
    p = TreePoly.single(DecoratedTree(tuple(branches)), ExactCoeff(re, im))
    text = print_any(p)
    q = parse_any(text)
    assert q == p and print_any(q) == text
