"""The arborification map from paired trees to words, by recursion and via the coproduct."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Hashable, Iterator, Sequence

from .coeff import ExactCoeff
from .common import Model, fneg
from .trees import (
    DecoratedTree,
    EdgeKind,
    PairedTree,
    Planted,
    T1,
    TreePoly,
    tree_product,
)
from .words import Slot, Word, WordPoly

RawLetter = list[tuple[Slot, Hashable]]
RawWord = list[RawLetter]
RawTerms = list[tuple[ExactCoeff, RawWord]]


@dataclass(frozen=True)
class _Split:
    """How a t2 edge with conj ``q`` and frequency ``k`` splits in a given model."""

    coeff: ExactCoeff
    child: Slot
    parent: Slot


def _split(model: Model, q: int, k: tuple[int, ...]) -> _Split:
    if model is Model.NLS:
        return _Split(ExactCoeff.i_power(1) * (-1) ** q, Slot(1 - q, True, k), Slot(q, True, k))
    if q:
        raise ValueError("wave trees carry conj = 0 only")
    return _Split(ExactCoeff.one(), Slot(0, True, fneg(k)), Slot(0, False, k))


def _raw_shuffle(a: RawTerms, b: RawTerms) -> RawTerms:
    out: RawTerms = []
    for ca, wa in a:
        for cb, wb in b:
            n = len(wa) + len(wb)
            for pos in itertools.combinations(range(n), len(wa)):
                it_a, it_b = iter(wa), iter(wb)
                ps = set(pos)
                out.append((ca * cb, [next(it_a) if j in ps else next(it_b) for j in range(n)]))
    return out


def _leaf_slot(p: Planted) -> Slot:
    return Slot(p.decor.conj, p.decor.hat, p.freq)


class _Ctx:
    """Fresh split handles and the class-1 pairs they generate."""

    def __init__(self) -> None:
        self.counter = itertools.count()
        self.split_pairs: dict[Hashable, Hashable] = {}

    def fresh(self) -> tuple[Hashable, Hashable]:
        h = next(self.counter)
        c, p = ("S", h, "c"), ("S", h, "p")
        self.split_pairs[c] = p
        return c, p


def _labelled(pt: PairedTree) -> tuple[DecoratedTree, list[tuple[Hashable, Hashable]]]:
    lt = pt.labelled()
    lt = DecoratedTree(tuple(b.relabel(lambda lf: ("L", lf.label)) for b in lt.branches))
    pairs = [(("L", a), ("L", b)) for _, (a, b) in pt.pairing.pairs()]
    return lt, pairs


def _finish(terms: RawTerms, pairs: list[tuple[Hashable, Hashable]], ctx: _Ctx) -> WordPoly:
    out = WordPoly()
    for c, letters in terms:
        present = {h for lt in letters for _, h in lt}
        prs = list(pairs) + [(a, b) for a, b in ctx.split_pairs.items() if a in present]
        out.add_term(Word.from_handles(letters, prs), c)
    return out


# -- recursive definition ----------------------------------------------------------


def _arb_rec(branches: Sequence[Planted], extra: RawLetter, model: Model, ctx: _Ctx) -> RawTerms:
    root: RawLetter = list(extra)
    coeff = ExactCoeff.one()
    factors: list[RawTerms] = []
    for c in branches:
        if c.is_leaf:
            root.append((_leaf_slot(c), c.label))
            continue
        sp = _split(model, c.decor.conj, c.freq)
        hc, hp = ctx.fresh()
        root.append((sp.parent, hp))
        coeff = coeff * sp.coeff
        factors.append(_arb_rec(c.children, [(sp.child, hc)], model, ctx))
    acc: RawTerms = [(coeff, [])]
    for f in factors:
        acc = _raw_shuffle(acc, f)
    return [(c, w + [root]) for c, w in acc]


def arborify(t: PairedTree | DecoratedTree | TreePoly, model: Model | str) -> WordPoly:
    """Arborification by structural recursion on the root's branches."""
    model = Model.parse(model)
    if isinstance(t, TreePoly):
        out = WordPoly()
        for pt, c in t:
            out = out + arborify(pt, model).scale(c)
        return out
    pt = t if isinstance(t, PairedTree) else PairedTree(t)
    _check_model(pt.tree, model)
    lt, pairs = _labelled(pt)
    if lt.is_unit:
        return WordPoly.unit()
    ctx = _Ctx()
    return _finish(_arb_rec(lt.branches, [], model, ctx), pairs, ctx)


def arborify_forest(trees: Sequence[PairedTree | DecoratedTree], model: Model | str) -> WordPoly:
    """Forests map to the shuffle of the images of their trees."""
    out = WordPoly.unit()
    for t in trees:
        out = out.shuffle(arborify(t, model))
    return out


def _check_model(t: DecoratedTree, model: Model) -> None:
    if not t.models_ok(model):
        raise ValueError("wave trees carry conj = 0 only")


# -- coproduct ------------------------------------------------------------------


@dataclass(frozen=True)
class CutTerm:
    """One summand ``coeff * left (x) right`` of the coproduct."""

    left: tuple[DecoratedTree, ...]
    right: DecoratedTree
    coeff: ExactCoeff

    @property
    def right_is_letter(self) -> bool:
        return bool(self.right.branches) and all(b.is_leaf for b in self.right.branches)


_PlantedCut = tuple[tuple[DecoratedTree, ...], Planted, ExactCoeff]


def _cut_planted(p: Planted, model: Model, ctx: _Ctx) -> list[_PlantedCut]:
    if p.is_leaf:
        return [((), p, ExactCoeff.one())]
    out: list[_PlantedCut] = []
    for left, branches, c in _cut_branches(p.children, model, ctx):
        out.append((left, Planted(p.decor, p.freq, branches), c))
    sp = _split(model, p.decor.conj, p.freq)
    hc, hp = ctx.fresh()
    child_leaf = Planted(T1(sp.child.conj, True), sp.child.freq, (), hc)
    parent_leaf = Planted(T1(sp.parent.conj, sp.parent.hat), sp.parent.freq, (), hp)
    out.append(((DecoratedTree((child_leaf,) + p.children),), parent_leaf, sp.coeff))
    return out


def _cut_branches(branches: Sequence[Planted], model: Model, ctx: _Ctx) -> Iterator[tuple[tuple[DecoratedTree, ...], tuple[Planted, ...], ExactCoeff]]:
    per = [_cut_planted(b, model, ctx) for b in branches]
    for combo in itertools.product(*per):
        left = tuple(tr for lf, _, _ in combo for tr in lf)
        right = tuple(r for _, r, _ in combo)
        c = ExactCoeff.one()
        for _, _, cc in combo:
            c = c * cc
        yield left, right, c


def _coproduct(t: DecoratedTree, model: Model, ctx: _Ctx) -> list[CutTerm]:
    return [CutTerm(left, DecoratedTree(right), c) for left, right, c in _cut_branches(t.branches, model, ctx)]


def coproduct(t: DecoratedTree | PairedTree, model: Model | str) -> list[CutTerm]:
    """Full expansion of the coproduct; split leaves are labelled ``("S", n, side)``."""
    model = Model.parse(model)
    tree = t.tree if isinstance(t, PairedTree) else t
    _check_model(tree, model)
    return _coproduct(tree, model, _Ctx())


def _arb_cp(t: DecoratedTree, model: Model, ctx: _Ctx) -> RawTerms:
    if t.is_unit:
        return [(ExactCoeff.one(), [])]
    out: RawTerms = []
    for term in _coproduct(t, model, ctx):
        if not term.right_is_letter:
            continue
        letter: RawLetter = [(_leaf_slot(b), b.label) for b in term.right.branches]
        acc: RawTerms = [(term.coeff, [])]
        for tr in term.left:
            acc = _raw_shuffle(acc, _arb_cp(tr, model, ctx))
        out.extend((c, w + [letter]) for c, w in acc)
    return out


def arborify_cp(t: PairedTree | DecoratedTree, model: Model | str) -> WordPoly:
    """Arborification as M_c (a (x) P_A) Delta, with P_A the projection onto letters."""
    model = Model.parse(model)
    pt = t if isinstance(t, PairedTree) else PairedTree(t)
    _check_model(pt.tree, model)
    lt, pairs = _labelled(pt)
    ctx = _Ctx()
    return _finish(_arb_cp(lt, model, ctx), pairs, ctx)


def is_letter_tree(t: DecoratedTree) -> bool:
    return all(b.is_leaf and b.decor.kind is EdgeKind.T1 for b in t.branches)


__all__ = [
    "CutTerm",
    "arborify",
    "arborify_cp",
    "arborify_forest",
    "coproduct",
    "is_letter_tree",
    "tree_product",
]
