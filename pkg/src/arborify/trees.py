"""Decorated rooted non-planar trees, pairings and tree polynomials."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property
from typing import Any, Hashable, Iterable, Iterator, Mapping, Sequence

from .coeff import ExactCoeff, Number
from .common import (
    DecorationError,
    Freq,
    KirchhoffError,
    Model,
    PairingError,
    ResourceError,
    conj_sign,
    fsum,
)


class EdgeKind(IntEnum):
    T1 = 1
    T2 = 2

    def __str__(self) -> str:
        return f"t{int(self)}"


@dataclass(frozen=True, order=True)
class EdgeDecoration:
    kind: EdgeKind
    conj: int = 0
    hat: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EdgeKind(self.kind))
        if self.conj not in (0, 1):
            raise DecorationError(f"conj bit must be 0 or 1, got {self.conj!r}")
        if self.hat and self.kind is EdgeKind.T2:
            raise DecorationError("hat flag is only allowed on t1 edges")
        object.__setattr__(self, "hat", bool(self.hat))


def T1(conj: int = 0, hat: bool = False) -> EdgeDecoration:
    return EdgeDecoration(EdgeKind.T1, conj, hat)


def T2(conj: int = 0) -> EdgeDecoration:
    return EdgeDecoration(EdgeKind.T2, conj, False)


def kirchhoff_freq(decor: EdgeDecoration, children: Sequence["Planted"]) -> Freq:
    """Frequency forced on a node by (-1)^c(e_u) f(u) = sum_e (-1)^c(e) f(v)."""
    d = len(children[0].freq)
    s = fsum(((conj_sign(c.decor.conj), c.freq) for c in children), d)
    return tuple(conj_sign(decor.conj) * x for x in s)


@dataclass(frozen=True)
class Planted:
    """An edge together with the subtree hanging below it.

    Leaves are planted nodes without children. Children are kept sorted by
    :attr:`key`, so structural equality is canonical equality. ``label`` is a
    handle for bookkeeping (pairings, provenance); it is ignored by equality.
    """

    decor: EdgeDecoration
    freq: Freq
    children: tuple["Planted", ...] = ()
    label: Any = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "freq", tuple(int(x) for x in self.freq))
        kids = tuple(sorted(self.children, key=lambda c: c.key))
        object.__setattr__(self, "children", kids)
        if kids:
            if self.decor.kind is not EdgeKind.T2:
                raise DecorationError("an edge above an inner node must have kind t2")
            if any(len(c.freq) != len(self.freq) for c in kids):
                raise ValueError("frequency dimension mismatch inside tree")
            expected = kirchhoff_freq(self.decor, kids)
            if expected != self.freq:
                raise KirchhoffError(f"node frequency {self.freq} violates Kirchhoff relation (expected {expected})")
        elif self.decor.kind is not EdgeKind.T1:
            raise DecorationError("an edge to a leaf must have kind t1")

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @cached_property
    def key(self) -> tuple:
        d = self.decor
        return (int(d.kind), d.conj, d.hat, not self.is_leaf, tuple(c.key for c in self.children), self.freq)

    def leaves(self) -> Iterator["Planted"]:
        if self.is_leaf:
            yield self
        else:
            for c in self.children:
                yield from c.leaves()

    @cached_property
    def n_leaves(self) -> int:
        return sum(1 for _ in self.leaves())

    @cached_property
    def n_nodes(self) -> int:
        return 1 + sum(c.n_nodes for c in self.children)

    def relabel(self, fn) -> "Planted":
        """Copy with each leaf label replaced by ``fn(leaf)``."""
        if self.is_leaf:
            return Planted(self.decor, self.freq, (), fn(self))
        return Planted(self.decor, self.freq, tuple(c.relabel(fn) for c in self.children), self.label)


def leaf(f: Sequence[int], conj: int = 0, hat: bool = False, label: Any = None) -> Planted:
    return Planted(T1(conj, hat), tuple(f), (), label)


def planted(conj: int, children: Iterable[Planted], f: Sequence[int] | None = None) -> Planted:
    """Inner node reached by a t2 edge; the frequency is derived unless given."""
    kids = tuple(children)
    if not kids:
        raise DecorationError("a t2 edge needs a non-empty subtree")
    decor = T2(conj)
    fr = kirchhoff_freq(decor, kids) if f is None else tuple(f)
    return Planted(decor, fr, kids)


@dataclass(frozen=True)
class DecoratedTree:
    """A rooted tree given by the planted branches at its (undecorated) root.

    The empty tree is the unit of the tree product.
    """

    branches: tuple[Planted, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "branches", tuple(sorted(self.branches, key=lambda c: c.key)))
        dims = {len(b.freq) for b in self.branches}
        if len(dims) > 1:
            raise ValueError("frequency dimension mismatch inside tree")

    @classmethod
    def of(cls, *branches: Planted) -> "DecoratedTree":
        return cls(tuple(branches))

    @property
    def is_unit(self) -> bool:
        return not self.branches

    @cached_property
    def key(self) -> tuple:
        return tuple(b.key for b in self.branches)

    @property
    def dim(self) -> int | None:
        return len(self.branches[0].freq) if self.branches else None

    def leaves(self) -> list[Planted]:
        """Leaves in DFS order of the canonical form; list index is the leaf id."""
        return [lf for b in self.branches for lf in b.leaves()]

    def leaf_labels(self) -> list[Any]:
        return [lf.label for lf in self.leaves()]

    @property
    def n_nodes(self) -> int:
        return 1 + sum(b.n_nodes for b in self.branches)

    def inner_nodes(self) -> list[tuple[int, ...]]:
        """Paths of inner nodes (root is ``()``), in DFS preorder."""
        out: list[tuple[int, ...]] = [()]

        def walk(p: Planted, path: tuple[int, ...]) -> None:
            if p.is_leaf:
                return
            out.append(path)
            for j, c in enumerate(p.children):
                walk(c, path + (j,))

        for j, b in enumerate(self.branches):
            walk(b, (j,))
        return out

    def t2_edges(self) -> int:
        return len(self.inner_nodes()) - 1

    def models_ok(self, model: Model) -> bool:
        if Model.parse(model) is Model.WAVE:
            return all(_all_conj0(b) for b in self.branches)
        return True


def _all_conj0(p: Planted) -> bool:
    return p.decor.conj == 0 and all(_all_conj0(c) for c in p.children)


UNIT = DecoratedTree()


def tree_product(t1: DecoratedTree, t2: DecoratedTree) -> DecoratedTree:
    """Merge the roots of two trees."""
    return DecoratedTree(t1.branches + t2.branches)


@dataclass
class RawNode:
    """Mutable, planar input form of a planted subtree (used for validation).

    ``freq`` may be ``None`` on inner nodes, in which case it is derived.
    """

    decor: EdgeDecoration
    freq: Freq | None = None
    children: list["RawNode"] = field(default_factory=list)
    label: Any = None


def canonicalize(raw: Sequence[RawNode] | DecoratedTree) -> DecoratedTree:
    """Validating construction: raises on Kirchhoff or decoration errors."""
    if isinstance(raw, DecoratedTree):
        return DecoratedTree(tuple(_recanon(b) for b in raw.branches))

    def build(r: RawNode) -> Planted:
        kids = tuple(build(c) for c in r.children)
        if kids:
            fr = kirchhoff_freq(r.decor, kids) if r.freq is None else tuple(r.freq)
            return Planted(r.decor, fr, kids, r.label)
        if r.freq is None:
            raise ValueError("leaf without frequency")
        return Planted(r.decor, tuple(r.freq), (), r.label)

    return DecoratedTree(tuple(build(r) for r in raw))


def _recanon(p: Planted) -> Planted:
    return Planted(p.decor, p.freq, tuple(_recanon(c) for c in p.children), p.label)


# -- pairings -----------------------------------------------------------------

Pair = tuple[int, int]


def _norm_pair(p: Sequence[int]) -> Pair:
    a, b = int(p[0]), int(p[1])
    if a == b:
        raise PairingError(f"a leaf cannot be paired with itself: {p}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Pairing:
    """Disjoint unordered pairs of leaf ids, split into class 1 (hat) and class 2."""

    class1: frozenset[Pair] = frozenset()
    class2: frozenset[Pair] = frozenset()

    def __post_init__(self) -> None:
        c1 = frozenset(_norm_pair(p) for p in self.class1)
        c2 = frozenset(_norm_pair(p) for p in self.class2)
        object.__setattr__(self, "class1", c1)
        object.__setattr__(self, "class2", c2)
        seen: set[int] = set()
        for a, b in sorted(c1 | c2):
            if a in seen or b in seen or (a, b) in c1 and (a, b) in c2:
                raise PairingError(f"pairs are not disjoint at ({a}, {b})")
            seen.update((a, b))

    @classmethod
    def of(cls, class2: Iterable[Sequence[int]] = (), class1: Iterable[Sequence[int]] = ()) -> "Pairing":
        return cls(frozenset(map(tuple, class1)), frozenset(map(tuple, class2)))  # type: ignore[arg-type]

    def pairs(self) -> list[tuple[int, Pair]]:
        """Sorted ``(class, pair)`` list."""
        return sorted([(1, p) for p in self.class1] + [(2, p) for p in self.class2], key=lambda x: (x[1], x[0]))

    def paired_ids(self) -> set[int]:
        return {x for p in self.class1 | self.class2 for x in p}

    def partner(self) -> dict[int, tuple[int, int]]:
        """Map leaf id to ``(partner id, class)``."""
        out: dict[int, tuple[int, int]] = {}
        for cls_, (a, b) in self.pairs():
            out[a] = (b, cls_)
            out[b] = (a, cls_)
        return out

    def relabel(self, mapping: Mapping[int, int]) -> "Pairing":
        return Pairing(
            frozenset((mapping[a], mapping[b]) for a, b in self.class1),
            frozenset((mapping[a], mapping[b]) for a, b in self.class2),
        )

    def __len__(self) -> int:
        return len(self.class1) + len(self.class2)


EMPTY_PAIRING = Pairing()


def pair_is_valid(model: Model, a: tuple[Freq, int], b: tuple[Freq, int]) -> bool:
    """NLS: equal frequency and opposite conj; wave: opposite frequencies."""
    (fa, ca), (fb, cb) = a, b
    if Model.parse(model) is Model.NLS:
        return fa == fb and ca != cb
    return all(x + y == 0 for x, y in zip(fa, fb))


def validate_pairing(tree: DecoratedTree, pairing: Pairing, model: Model, *, full: bool = False) -> None:
    """Raise :class:`PairingError` if ``pairing`` is not admissible on ``tree``."""
    lvs = tree.leaves()
    n = len(lvs)
    for cls_, (a, b) in pairing.pairs():
        if not (0 <= a < n and 0 <= b < n):
            raise PairingError(f"dangling leaf id in pair ({a}, {b})")
        la, lb = lvs[a], lvs[b]
        if not pair_is_valid(model, (la.freq, la.decor.conj), (lb.freq, lb.decor.conj)):
            raise PairingError(f"pair ({a}, {b}) is not valid for the {Model.parse(model).value} model")
        hats = la.decor.hat + lb.decor.hat
        if Model.parse(model) is Model.NLS:
            ok = hats == (2 if cls_ == 1 else 0)
        else:
            ok = hats == (1 if cls_ == 1 else 0)
        if not ok:
            raise PairingError(f"pair ({a}, {b}) has class {cls_} but hat flags do not match")
    if full and len(pairing.paired_ids()) != n:
        raise PairingError("pairing does not cover every leaf")


def wick_pairings(
    leaves: Sequence[tuple[Freq, int]],
    model: Model | None = None,
    partial: bool = False,
) -> list[Pairing]:
    """All (class-2) pairings of ``leaves``, filtered by model validity if a model is given.

    With ``partial`` the matchings on every even-size subset are listed, including the
    empty one. Order is lexicographic on the sorted pair lists.
    """
    n = len(leaves)
    ok = (lambda i, j: True) if model is None else (lambda i, j: pair_is_valid(model, leaves[i], leaves[j]))

    def matchings(ids: tuple[int, ...]) -> Iterator[list[Pair]]:
        if not ids:
            yield []
            return
        first, rest = ids[0], ids[1:]
        for j, other in enumerate(rest):
            if ok(first, other):
                for m in matchings(rest[:j] + rest[j + 1 :]):
                    yield [(first, other)] + m

    results: list[list[Pair]] = []
    if partial:
        for size in range(0, n + 1, 2):
            for subset in itertools.combinations(range(n), size):
                results.extend(matchings(subset))
    elif n % 2 == 0:
        results.extend(matchings(tuple(range(n))))
    results.sort()
    return [Pairing(frozenset(), frozenset(m)) for m in results]


def double_factorial_odd(n: int) -> int:
    """(2n-1)!!"""
    return math.prod(range(1, 2 * n, 2))


# -- automorphisms and paired trees -----------------------------------------

_AUT_LIMIT = 40320


def leaf_automorphisms(tree: DecoratedTree, limit: int = _AUT_LIMIT) -> list[tuple[int, ...]] | None:
    """Leaf permutations induced by swapping identical sibling subtrees.

    Returns ``None`` if the group is larger than ``limit``.
    """

    def group(children: Sequence[Planted]) -> list[tuple[int, ...]] | None:
        sizes = [c.n_leaves for c in children]
        offsets = [sum(sizes[:j]) for j in range(len(children))]
        sub = []
        total = 1
        for c in children:
            g = group(c.children) if not c.is_leaf else [(0,)]
            if g is None:
                return None
            sub.append(g)
            total *= len(g)
        runs: list[list[int]] = []
        for j, c in enumerate(children):
            if runs and children[runs[-1][0]] == c:
                runs[-1].append(j)
            else:
                runs.append([j])
        for r in runs:
            total *= math.factorial(len(r))
        if total > limit:
            return None
        out = []
        for inner in itertools.product(*sub):
            for arrangement in itertools.product(*(itertools.permutations(r) for r in runs)):
                target = {}
                for r, perm in zip(runs, arrangement):
                    target.update(zip(r, perm))
                perm_ids: list[int] = [0] * sum(sizes)
                for j in range(len(children)):
                    dst = target[j]
                    for loc, img in enumerate(inner[j]):
                        perm_ids[offsets[j] + loc] = offsets[dst] + img
                out.append(tuple(perm_ids))
        return out

    return group(tree.branches)


def canonical_pairing(tree: DecoratedTree, pairing: Pairing) -> Pairing:
    """Lexicographically least image of ``pairing`` under the tree's leaf automorphisms."""
    if not len(pairing):
        return pairing
    perms = leaf_automorphisms(tree)
    if not perms:
        return pairing
    best = None
    for perm in perms:
        cand = pairing.relabel(dict(enumerate(perm)))
        k = cand.pairs()
        if best is None or k < best[0]:
            best = (k, cand)
    assert best is not None
    return best[1]


@dataclass(frozen=True)
class PairedTree:
    """A decorated tree together with a (possibly partial) pairing of its leaves."""

    tree: DecoratedTree
    pairing: Pairing = EMPTY_PAIRING

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairing", canonical_pairing(self.tree, self.pairing))

    @classmethod
    def from_labels(cls, tree: DecoratedTree, class2: Iterable[tuple[Hashable, Hashable]] = (),
                    class1: Iterable[tuple[Hashable, Hashable]] = ()) -> "PairedTree":
        """Build a pairing from leaf labels instead of ids."""
        ids = {}
        for j, lab in enumerate(tree.leaf_labels()):
            if lab is not None:
                if lab in ids:
                    raise PairingError(f"duplicate leaf label {lab!r}")
                ids[lab] = j

        def look(lab: Hashable) -> int:
            if lab not in ids:
                raise PairingError(f"unknown leaf label {lab!r}")
            return ids[lab]

        return cls(tree, Pairing(frozenset((look(a), look(b)) for a, b in class1),
                                 frozenset((look(a), look(b)) for a, b in class2)))

    def validate(self, model: Model, full: bool = False) -> None:
        validate_pairing(self.tree, self.pairing, model, full=full)

    def labelled(self) -> DecoratedTree:
        """Copy of the tree whose leaf labels are the leaf ids."""
        counter = itertools.count()
        ids = {id(lf): next(counter) for lf in self.tree.leaves()}
        return DecoratedTree(tuple(b.relabel(lambda lf: ids[id(lf)]) for b in self.tree.branches))


def paired_product(a: PairedTree, b: PairedTree) -> PairedTree:
    """Tree product carrying both pairings along."""
    la = a.labelled()
    lb = b.labelled()
    na = len(la.leaves())
    lb = DecoratedTree(tuple(br.relabel(lambda lf: lf.label + na) for br in lb.branches))
    prod = tree_product(la, lb)
    pos = {lab: j for j, lab in enumerate(prod.leaf_labels())}
    mapping_a = {j: pos[j] for j in range(na)}
    mapping_b = {j: pos[j + na] for j in range(len(lb.leaves()))}
    pa = a.pairing.relabel(mapping_a)
    pb = b.pairing.relabel(mapping_b)
    return PairedTree(prod, Pairing(pa.class1 | pb.class1, pa.class2 | pb.class2))


# -- polynomials -------------------------------------------------------------


class TreePoly:
    """Finite linear combination of paired trees with exact coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[PairedTree, ExactCoeff] | None = None) -> None:
        self.terms: dict[PairedTree, ExactCoeff] = {}
        for k, c in (terms or {}).items():
            self._add(k, ExactCoeff.coerce(c))

    def _add(self, k: PairedTree, c: ExactCoeff) -> None:
        new = self.terms.get(k, ExactCoeff()) + c
        if new.is_zero():
            self.terms.pop(k, None)
        else:
            self.terms[k] = new

    @classmethod
    def single(cls, t: DecoratedTree | PairedTree, c: Number = 1) -> "TreePoly":
        pt = t if isinstance(t, PairedTree) else PairedTree(t)
        return cls({pt: ExactCoeff.coerce(c)})

    @classmethod
    def zero(cls) -> "TreePoly":
        return cls()

    def is_zero(self) -> bool:
        return not self.terms

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, TreePoly) and self.terms == other.terms

    def __add__(self, other: "TreePoly") -> "TreePoly":
        out = TreePoly(self.terms)
        for k, c in other.terms.items():
            out._add(k, c)
        return out

    def scale(self, c: Number) -> "TreePoly":
        cc = ExactCoeff.coerce(c)
        return TreePoly({k: v * cc for k, v in self.terms.items()})

    def __neg__(self) -> "TreePoly":
        return self.scale(-1)

    def __mul__(self, other: "TreePoly") -> "TreePoly":
        out = TreePoly()
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                out._add(paired_product(ka, kb), ca * cb)
        return out

    def sorted_terms(self) -> list[tuple[PairedTree, ExactCoeff]]:
        return sorted(self.terms.items(), key=lambda kv: (kv[0].tree.key, kv[0].pairing.pairs()))

    def __repr__(self) -> str:
        return f"TreePoly({len(self.terms)} terms)"


def graft(decor: EdgeDecoration, f: Sequence[int], children: DecoratedTree = UNIT) -> TreePoly:
    """The symbolic operation I_o(lambda_k .): plant ``children`` below a new edge.

    Returns the zero polynomial when ``f`` violates the Kirchhoff relation.
    """
    if decor.hat and decor.kind is EdgeKind.T2:
        raise DecorationError("hat flag is only allowed on t1 edges")
    try:
        p = Planted(decor, tuple(f), children.branches)
    except KirchhoffError:
        return TreePoly.zero()
    return TreePoly.single(DecoratedTree((p,)))


# -- linear extensions -------------------------------------------------------


@dataclass(frozen=True)
class LinearExtensions:
    count: int
    orders: list[tuple[tuple[int, ...], ...]]


MAX_EXTENSION_NODES = 10


def linear_extensions(tree: DecoratedTree) -> LinearExtensions:
    """Total orders of inner nodes (paths) in which every node precedes its parent.

    The root ``()`` is always last.
    """
    nodes = tree.inner_nodes()
    if len(nodes) > MAX_EXTENSION_NODES:
        raise ResourceError(f"{len(nodes)} inner nodes exceed the guard of {MAX_EXTENSION_NODES}")
    kids: dict[tuple[int, ...], list[tuple[int, ...]]] = {n: [] for n in nodes}
    for n in nodes:
        if n:
            kids[n[:-1]].append(n)
    pending = {n: len(kids[n]) for n in nodes}
    orders: list[tuple[tuple[int, ...], ...]] = []

    def rec(prefix: list[tuple[int, ...]], ready: list[tuple[int, ...]]) -> None:
        if not ready:
            if len(prefix) == len(nodes):
                orders.append(tuple(prefix))
            return
        for j, n in enumerate(ready):
            rest = ready[:j] + ready[j + 1 :]
            freed = []
            if n:
                parent = n[:-1]
                pending[parent] -= 1
                if pending[parent] == 0:
                    freed.append(parent)
            rec(prefix + [n], rest + freed)
            if n:
                pending[n[:-1]] += 1

    rec([], sorted(n for n in nodes if not kids[n]))
    return LinearExtensions(len(orders), orders)
