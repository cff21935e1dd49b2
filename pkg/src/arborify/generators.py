"""Seeded random instances: paired trees for both models and words for the algebra checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import Freq, Model, fneg, norm2
from .trees import DecoratedTree, PairedTree, Planted, T1, T2, kirchhoff_freq
from .words import Letter, Slot, Word

MAX_TRIES = 10_000


@dataclass
class _Node:
    conj: int
    children: list["_Node"] | None = None
    label: int | None = None
    freq: Freq | None = None
    hat: bool = False

    def leaves(self) -> list["_Node"]:
        if self.children is None:
            return [self]
        return [lf for c in self.children for lf in c.leaves()]


def _grow(rng: np.random.Generator, roots: list[_Node], n_t2: int, child_conjs) -> None:
    """Expand ``n_t2`` random leaves into t2 nodes with children conj given by ``child_conjs(c)``."""
    for _ in range(n_t2):
        leaves = [lf for r in roots for lf in r.leaves()]
        lf = leaves[rng.integers(len(leaves))]
        lf.children = [_Node(c) for c in child_conjs(lf.conj)]


def _build(n: _Node) -> Planted:
    if n.children is None:
        return Planted(T1(n.conj, n.hat), n.freq, (), n.label)
    kids = tuple(_build(c) for c in n.children)
    return Planted(T2(n.conj), kirchhoff_freq(T2(n.conj), kids), kids)


def _inner_freqs(p: Planted) -> list[Freq]:
    if p.is_leaf:
        return []
    return [p.freq] + [f for c in p.children for f in _inner_freqs(c)]


def _ball_point(rng: np.random.Generator, d: int, r: int) -> Freq:
    while True:
        k = tuple(int(x) for x in rng.integers(-r, r + 1, size=d))
        if norm2(k) <= r * r:
            return k


def random_nls_tree(rng: np.random.Generator, d: int, max_t2: int = 3, kmax: int = 3) -> PairedTree:
    """Fully paired cubic NLS tree: root branches conj (0, 1), each t2 node has children (c, c, 1-c).

    Leaves are matched conj 0 against conj 1 with equal frequencies; instances whose inner
    frequencies leave the ball of radius ``kmax`` are rejected.
    """
    for _ in range(MAX_TRIES):
        roots = [_Node(0), _Node(1)]
        _grow(rng, roots, int(rng.integers(1, max_t2 + 1)), lambda c: (c, c, 1 - c))
        leaves = [lf for r in roots for lf in r.leaves()]
        zeros = [lf for lf in leaves if lf.conj == 0]
        ones = [lf for lf in leaves if lf.conj == 1]
        perm = rng.permutation(len(ones))
        pairs = []
        for j, (a, b) in enumerate(zip(zeros, (ones[p] for p in perm))):
            a.freq = b.freq = _ball_point(rng, d, kmax)
            a.label, b.label = 2 * j, 2 * j + 1
            pairs.append((2 * j, 2 * j + 1))
        branches = tuple(_build(r) for r in roots)
        if all(norm2(f) <= kmax * kmax for b in branches for f in _inner_freqs(b)):
            return _strip(PairedTree.from_labels(DecoratedTree(branches), class2=pairs))
    raise RuntimeError("rejection sampling did not find an admissible NLS tree")


def random_wave_tree(rng: np.random.Generator, d: int = 3, max_t2: int = 3, N: int = 3) -> PairedTree:
    """Fully paired cubic wave tree with two root branches; pairs carry opposite frequencies.

    Instances with any node frequency outside the cutoff ball are rejected, so the
    evaluation is never trivially zero.
    """
    for _ in range(MAX_TRIES):
        roots = [_Node(0), _Node(0)]
        _grow(rng, roots, int(rng.integers(1, max_t2 + 1)), lambda c: (0, 0, 0))
        leaves = [lf for r in roots for lf in r.leaves()]
        order = rng.permutation(len(leaves))
        pairs = []
        for j in range(0, len(leaves), 2):
            a, b = leaves[order[j]], leaves[order[j + 1]]
            a.freq = _ball_point(rng, d, N)
            b.freq = fneg(a.freq)
            a.label, b.label = j, j + 1
            pairs.append((j, j + 1))
        branches = tuple(_build(r) for r in roots)
        if all(norm2(f) <= N * N for b in branches for f in _inner_freqs(b)):
            return _strip(PairedTree.from_labels(DecoratedTree(branches), class2=pairs))
    raise RuntimeError("rejection sampling did not find an admissible wave tree")


def random_shape_tree(rng: np.random.Generator, model: Model, max_nodes: int = 8, d: int = 1) -> PairedTree:
    """Random tree with at most ``max_nodes`` vertices (root included) and a random partial pairing.

    Inner arities are 1 to 3 and conj bits are random (zero for the wave model); this is
    meant for purely combinatorial checks, so pairs are not filtered by model validity.
    """
    wave = Model.parse(model) is Model.WAVE

    def conj() -> int:
        return 0 if wave else int(rng.integers(2))

    roots = [_Node(conj()) for _ in range(int(rng.integers(1, 4)))]
    nodes = 1 + len(roots)
    while nodes < max_nodes and rng.random() < 0.8:
        room = max_nodes - nodes
        arity = int(rng.integers(1, min(3, room) + 1))
        leaves = [lf for r in roots for lf in r.leaves()]
        lf = leaves[rng.integers(len(leaves))]
        lf.children = [_Node(conj()) for _ in range(arity)]
        nodes += arity
    leaves = [lf for r in roots for lf in r.leaves()]
    for j, lf in enumerate(leaves):
        lf.freq = tuple(int(x) for x in rng.integers(-2, 3, size=d))
        lf.label = j
    order = [int(x) for x in rng.permutation(len(leaves))]
    n_pairs = int(rng.integers(0, len(leaves) // 2 + 1))
    class1, class2 = [], []
    for j in range(n_pairs):
        a, b = order[2 * j], order[2 * j + 1]
        if rng.random() < 0.3:
            leaves[a].hat = True
            class1.append((a, b))
        else:
            class2.append((a, b))
    branches = tuple(_build(r) for r in roots)
    return _strip(PairedTree.from_labels(DecoratedTree(branches), class2=class2, class1=class1))


def _strip(pt: PairedTree) -> PairedTree:
    t = DecoratedTree(tuple(b.relabel(lambda lf: None) for b in pt.tree.branches))
    return PairedTree(t, pt.pairing)


def random_letter(rng: np.random.Generator, alphabet: int = 6, d: int = 1) -> Letter:
    """A one-slot letter drawn from a small alphabet (repeats are likely on purpose)."""
    k = int(rng.integers(alphabet))
    return Letter((Slot(k % 2, False, (k,) + (0,) * (d - 1)),))


def random_word(rng: np.random.Generator, max_len: int = 4, alphabet: int = 6) -> Word:
    n = int(rng.integers(0, max_len + 1))
    return Word(tuple(random_letter(rng, alphabet) for _ in range(n)))


def distinct_letters(n: int, offset: int = 0) -> list[Letter]:
    return [Letter((Slot(0, False, (offset + j,)),)) for j in range(n)]

