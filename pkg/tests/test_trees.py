import pytest

from arborify.common import DecorationError, KirchhoffError, Model, PairingError
from arborify.trees import (
    DecoratedTree,
    PairedTree,
    Planted,
    T1,
    T2,
    TreePoly,
    canonical_pairing,
    double_factorial_odd,
    graft,
    leaf,
    leaf_automorphisms,
    linear_extensions,
    planted,
    tree_product,
    validate_pairing,
    wick_pairings,
)


def test_kirchhoff_derived_and_checked():
    p = planted(0, [leaf((2,)), leaf((2,)), leaf((1,), 1)])
    assert p.freq == (3,)
    assert planted(1, [leaf((2,))]).freq == (-2,)
    with pytest.raises(KirchhoffError):
        Planted(T2(0), (4,), (leaf((2,)), leaf((1,))))


def test_decoration_rules():
    with pytest.raises(DecorationError):
        Planted(T1(0), (1,), (leaf((1,)),))
    with pytest.raises(DecorationError):
        Planted(T2(0), (1,), ())
    assert graft(T2(0), (5,), DecoratedTree.of(leaf((1,)))).is_zero()


def test_children_are_canonical():
    a = planted(0, [leaf((1,)), leaf((2,), 1)])
    b = planted(0, [leaf((2,), 1), leaf((1,))])
    assert a == b and hash(a) == hash(b)
    assert DecoratedTree.of(a, leaf((0,))) == DecoratedTree.of(leaf((0,)), a)
    assert tree_product(DecoratedTree.of(a), DecoratedTree.of(leaf((0,)))).n_nodes == a.n_nodes + 2


def test_linear_extensions_counts():
    chain = DecoratedTree.of(planted(0, [planted(0, [leaf((1,))])]))
    assert linear_extensions(chain).count == 1
    forks = DecoratedTree.of(planted(0, [leaf((1,))]), planted(0, [leaf((1,))]), planted(0, [leaf((1,))]))
    assert linear_extensions(forks).count == 6
    le = linear_extensions(forks)
    assert all(order[-1] == () for order in le.orders)


def test_wick_counts():
    for n in range(1, 6):
        assert len(wick_pairings([((0,), 0)] * (2 * n))) == double_factorial_odd(n)


def test_pairing_validity():
    good = PairedTree.from_labels(DecoratedTree.of(leaf((1,), label="a"), leaf((1,), 1, label="b")),
                                  class2=[("a", "b")])
    validate_pairing(good.tree, good.pairing, Model.NLS)
    with pytest.raises(PairingError):
        PairedTree.from_labels(DecoratedTree.of(leaf((1,), label="a"), leaf((2,), 1, label="b")),
                               class2=[("a", "b")]).validate(Model.NLS)


def test_pairings_canonical_under_automorphisms():
    t = DecoratedTree.of(leaf((1,), label="a"), leaf((1,), label="b"), leaf((1,), 1, label="c"))
    p1 = PairedTree.from_labels(t, class2=[("a", "c")])
    p2 = PairedTree.from_labels(t, class2=[("b", "c")])
    assert p1 == p2
    assert leaf_automorphisms(t) is not None
    assert canonical_pairing(p1.tree, p1.pairing) == p1.pairing


def test_treepoly_algebra():
    a = TreePoly.single(DecoratedTree.of(leaf((1,))))
    b = TreePoly.single(DecoratedTree.of(leaf((2,))), 2)
    assert a + b + (-b) == a
    assert (a * b) == (b * a)
    assert len(a * b) == 1
    assert (a + (-a)).is_zero()
