import numpy as np
import pytest

from arborify.arborification import arborify, arborify_cp, coproduct, is_letter_tree
from arborify.coeff import ExactCoeff
from arborify.common import Model
from arborify.evaluation import EvalParams, eval_tree, eval_wordpoly
from arborify.generators import random_nls_tree, random_shape_tree, random_wave_tree
from arborify.trees import DecoratedTree, TreePoly, leaf, linear_extensions, planted
from arborify.words import WordPoly


def test_unit_and_leaves():
    assert arborify(DecoratedTree(()), Model.NLS) == WordPoly.unit()
    t = DecoratedTree.of(leaf((1,)), leaf((2,), 1))
    (w, c), = list(arborify(t, Model.NLS))
    assert len(w) == 1 and c == ExactCoeff.one()
    assert is_letter_tree(t)


def test_single_t2_edge_coefficients():
    for q, expected in ((0, ExactCoeff(0, 1)), (1, ExactCoeff(0, -1))):
        t = DecoratedTree.of(planted(q, [leaf((1,)), leaf((1,)), leaf((1,), 1)]))
        (w, c), = list(arborify(t, Model.NLS))
        assert c == expected and len(w) == 2
    t = DecoratedTree.of(planted(0, [leaf((1, 0, 0)), leaf((0, 1, 0)), leaf((0, 0, 1))]))
    (w, c), = list(arborify(t, Model.WAVE))
    assert c == ExactCoeff.one()
    child = w.letters[0].slots
    assert any(s.hat and s.freq == (-1, -1, -1) for s in child)


def test_term_count_is_linear_extensions():
    t = DecoratedTree.of(planted(0, [leaf((1,))]), planted(0, [planted(0, [leaf((1,))])]))
    p = arborify(t, Model.WAVE)
    assert sum(c.re for _, c in p) == linear_extensions(t).count == 3


def test_linearity():
    a = DecoratedTree.of(planted(0, [leaf((1,))]))
    b = DecoratedTree.of(leaf((2,)))
    poly = TreePoly.single(a, 2) + TreePoly.single(b, ExactCoeff(0, 1))
    assert arborify(poly, Model.WAVE) == arborify(a, Model.WAVE).scale(2) + arborify(b, Model.WAVE).scale(ExactCoeff(0, 1))


def test_wave_rejects_conjugate_edges():
    with pytest.raises(Exception):
        arborify(DecoratedTree.of(planted(1, [leaf((1,))])), Model.WAVE)


@pytest.mark.parametrize("seed", range(5))
def test_recursive_equals_coproduct(seed):
    rng = np.random.default_rng(seed)
    for model in (Model.NLS, Model.WAVE):
        pt = random_shape_tree(rng, model, max_nodes=8)
        assert arborify(pt, model) == arborify_cp(pt, model)


def test_coproduct_has_trivial_cuts():
    t = DecoratedTree.of(planted(0, [leaf((1,)), leaf((1,)), leaf((1,), 1)]))
    cuts = coproduct(t, Model.NLS)
    assert len(cuts) >= 2


@pytest.mark.parametrize("seed", range(3))
def test_theorem_small(seed):
    rng = np.random.default_rng(100 + seed)
    pt = random_nls_tree(rng, 1, max_t2=2)
    p = EvalParams(t=0.7, d=1, quad_order=32)
    assert abs(eval_tree(pt, p, Model.NLS) - eval_wordpoly(arborify(pt, Model.NLS), p, Model.NLS)) < 1e-10
    wt = random_wave_tree(rng, 3, 2, 2)
    p = EvalParams(t=0.7, d=3, N=2, quad_order=32)
    assert abs(eval_tree(wt, p, Model.WAVE) - eval_wordpoly(arborify(wt, Model.WAVE), p, Model.WAVE)) < 1e-10
