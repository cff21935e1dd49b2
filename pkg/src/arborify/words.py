"""Star letters, paired words, word polynomials, the shuffle product and colour swaps."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

from .coeff import ExactCoeff, Number
from .common import Freq, Model, PairingError, conj_sign, fsum
from .trees import Pairing


@dataclass(frozen=True, order=True)
class Slot:
    """A terminal edge of a letter."""

    conj: int
    hat: bool
    freq: Freq

    def __post_init__(self) -> None:
        if self.conj not in (0, 1):
            raise ValueError(f"conj bit must be 0 or 1, got {self.conj!r}")
        object.__setattr__(self, "hat", bool(self.hat))
        object.__setattr__(self, "freq", tuple(int(x) for x in self.freq))

    def with_hat(self, hat: bool) -> "Slot":
        return Slot(self.conj, hat, self.freq)


def S(f: Sequence[int], conj: int = 0, hat: bool = False) -> Slot:
    return Slot(conj, hat, tuple(f))


@dataclass(frozen=True)
class Letter:
    """A one-level star; slots are stored sorted by (conj, hat, freq)."""

    slots: tuple[Slot, ...]
    green_node: bool = False
    tag: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots", tuple(sorted(self.slots)))

    @property
    def arity(self) -> int:
        return len(self.slots)

    def untagged(self) -> "Letter":
        return Letter(self.slots, self.green_node, None)

    def with_tag(self, tag: str | None) -> "Letter":
        return Letter(self.slots, self.green_node, tag)

    def sort_key(self) -> tuple:
        return (self.slots, self.green_node, self.tag or "")


Endpoint = tuple[int, Slot]
WordPair = tuple[Endpoint, Endpoint]


def _endpoint_key(e: Endpoint) -> tuple:
    return (e[0], e[1])


@dataclass(frozen=True)
class Word:
    """A sequence of letters (time order) with a pairing of their slots.

    Pairs are stored as sorted endpoint pairs ``((pos, slot), (pos, slot))``; since
    equal slots inside one letter are interchangeable this is a canonical form.
    The class of a pair is read off the hat flags: it is class 1 iff an end is hat.
    """

    letters: tuple[Letter, ...] = ()
    pairs: tuple[WordPair, ...] = ()

    def __post_init__(self) -> None:
        norm = []
        for a, b in self.pairs:
            a, b = (int(a[0]), a[1]), (int(b[0]), b[1])
            norm.append((a, b) if _endpoint_key(a) <= _endpoint_key(b) else (b, a))
        norm.sort(key=lambda p: (_endpoint_key(p[0]), _endpoint_key(p[1])))
        object.__setattr__(self, "pairs", tuple(norm))
        object.__setattr__(self, "letters", tuple(self.letters))
        used: Counter = Counter()
        for a, b in norm:
            used[a] += 1
            used[b] += 1
        for (pos, slot), n in used.items():
            if not 0 <= pos < len(self.letters):
                raise PairingError(f"pair endpoint refers to missing letter {pos}")
            if self.letters[pos].slots.count(slot) < n:
                raise PairingError(f"letter {pos} has fewer than {n} slots {slot}")

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_handles(
        cls,
        letters: Sequence[Sequence[tuple[Slot, Hashable]]],
        pairs: Iterable[tuple[Hashable, Hashable]] = (),
        green_nodes: Sequence[bool] | None = None,
        tags: Sequence[str | None] | None = None,
    ) -> "Word":
        """Build from letters whose slots carry unique handles, paired by handle."""
        where: dict[Hashable, Endpoint] = {}
        for pos, lt in enumerate(letters):
            for slot, h in lt:
                if h in where:
                    raise PairingError(f"duplicate slot handle {h!r}")
                where[h] = (pos, slot)
        wp = []
        for a, b in pairs:
            if a not in where or b not in where:
                raise PairingError(f"dangling pair ({a!r}, {b!r})")
            wp.append((where[a], where[b]))
        gn = green_nodes or [False] * len(letters)
        tg = tags or [None] * len(letters)
        lts = tuple(Letter(tuple(s for s, _ in lt), g, t) for lt, g, t in zip(letters, gn, tg))
        return cls(lts, tuple(wp))

    @classmethod
    def of(cls, *letters: Letter) -> "Word":
        return cls(tuple(letters), ())

    # -- views ------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.letters)

    def explicit(self) -> tuple[list[list[Slot]], list[tuple[int, tuple[int, int], tuple[int, int]]]]:
        """Letters as slot lists and pairs as ``(class, (pos, idx), (pos, idx))``."""
        lts = [list(lt.slots) for lt in self.letters]
        used = [[False] * len(lt) for lt in lts]

        def take(e: Endpoint) -> tuple[int, int]:
            pos, slot = e
            for j, s in enumerate(lts[pos]):
                if s == slot and not used[pos][j]:
                    used[pos][j] = True
                    return (pos, j)
            raise AssertionError("inconsistent word pairing")

        out = []
        for a, b in self.pairs:
            ea, eb = take(a), take(b)
            cls_ = 1 if (a[1].hat or b[1].hat) else 2
            out.append((cls_, ea, eb))
        return lts, out

    def handles(self) -> tuple[list[list[tuple[Slot, tuple[int, int]]]], list[tuple[tuple[int, int], tuple[int, int]]]]:
        """Letters with ``(pos, idx)`` handles plus the pairs over those handles."""
        lts, prs = self.explicit()
        hl = [[(s, (p, j)) for j, s in enumerate(lt)] for p, lt in enumerate(lts)]
        return hl, [(a, b) for _, a, b in prs]

    def flat_ids(self) -> dict[tuple[int, int], int]:
        out = {}
        n = 0
        for p, lt in enumerate(self.letters):
            for j in range(lt.arity):
                out[(p, j)] = n
                n += 1
        return out

    def flat_pairing(self) -> Pairing:
        """Pairing over word-local slot ids (slots numbered letter by letter)."""
        ids = self.flat_ids()
        _, prs = self.explicit()
        c1 = frozenset((ids[a], ids[b]) for c, a, b in prs if c == 1)
        c2 = frozenset((ids[a], ids[b]) for c, a, b in prs if c == 2)
        return Pairing(c1, c2)

    def sort_key(self) -> tuple:
        return (len(self.letters), tuple(lt.sort_key() for lt in self.letters), self.pairs)

    def untagged(self) -> "Word":
        return self.map_letters(lambda lt: lt.untagged())

    def map_letters(self, fn) -> "Word":
        """Apply a slot-preserving map to every letter (pairs are kept)."""
        new = tuple(fn(lt) for lt in self.letters)
        for a, b in zip(self.letters, new):
            if a.slots != b.slots:
                raise ValueError("map_letters must not change slots")
        return Word(new, self.pairs)


EMPTY_WORD = Word()


def _interleave(u: Word, v: Word, upos: Sequence[int]) -> Word:
    """Word whose letters at positions ``upos`` come from ``u`` and the rest from ``v``."""
    n = len(u) + len(v)
    uset = set(upos)
    vpos = [p for p in range(n) if p not in uset]
    letters: list[Letter | None] = [None] * n
    for j, p in enumerate(upos):
        letters[p] = u.letters[j]
    for j, p in enumerate(vpos):
        letters[p] = v.letters[j]
    pairs = [((upos[a[0]], a[1]), (upos[b[0]], b[1])) for a, b in u.pairs]
    pairs += [((vpos[a[0]], a[1]), (vpos[b[0]], b[1])) for a, b in v.pairs]
    return Word(tuple(letters), tuple(pairs))  # type: ignore[arg-type]


def concat(u: Word, v: Word) -> Word:
    return _interleave(u, v, range(len(u)))


def shuffle(u: Word, v: Word) -> "WordPoly":
    """Sum over all order-preserving interleavings of ``u`` and ``v``."""
    out = WordPoly()
    n = len(u) + len(v)
    for upos in itertools.combinations(range(n), len(u)):
        out.add_term(_interleave(u, v, upos), ExactCoeff.one())
    return out


def shuffle_before_last(w: Word, u: Word) -> "WordPoly":
    """Shuffle ``u`` into every letter of ``w`` except the last one, which stays last."""
    if not len(w):
        raise ValueError("empty word has no last letter")
    out = WordPoly()
    n = len(w) + len(u)
    for upos in itertools.combinations(range(n - 1), len(u)):
        wpos = [p for p in range(n) if p not in set(upos)]
        out.add_term(_interleave(w, u, wpos), ExactCoeff.one())
    return out


class WordPoly:
    """Finite linear combination of words with exact coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Word, Number] | None = None) -> None:
        self.terms: dict[Word, ExactCoeff] = {}
        for w, c in (terms or {}).items():
            self.add_term(w, ExactCoeff.coerce(c))

    def add_term(self, w: Word, c: ExactCoeff) -> None:
        new = self.terms.get(w, ExactCoeff()) + c
        if new.is_zero():
            self.terms.pop(w, None)
        else:
            self.terms[w] = new

    @classmethod
    def single(cls, w: Word, c: Number = 1) -> "WordPoly":
        return cls({w: ExactCoeff.coerce(c)})

    @classmethod
    def unit(cls) -> "WordPoly":
        return cls.single(EMPTY_WORD)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, WordPoly) and self.terms == other.terms

    def __add__(self, other: "WordPoly") -> "WordPoly":
        out = WordPoly(self.terms)
        for w, c in other.terms.items():
            out.add_term(w, c)
        return out

    def __sub__(self, other: "WordPoly") -> "WordPoly":
        return self + (-other)

    def scale(self, c: Number) -> "WordPoly":
        cc = ExactCoeff.coerce(c)
        return WordPoly({w: v * cc for w, v in self.terms.items()})

    def __neg__(self) -> "WordPoly":
        return self.scale(-1)

    def shuffle(self, other: "WordPoly") -> "WordPoly":
        out = WordPoly()
        for u, cu in self.terms.items():
            for v, cv in other.terms.items():
                for w, c in shuffle(u, v).terms.items():
                    out.add_term(w, c * cu * cv)
        return out

    def concat(self, other: "WordPoly") -> "WordPoly":
        out = WordPoly()
        for u, cu in self.terms.items():
            for v, cv in other.terms.items():
                out.add_term(concat(u, v), cu * cv)
        return out

    def map_words(self, fn) -> "WordPoly":
        out = WordPoly()
        for w, c in self.terms.items():
            out.add_term(fn(w), c)
        return out

    def sorted_terms(self) -> list[tuple[Word, ExactCoeff]]:
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def __repr__(self) -> str:
        return f"WordPoly({len(self.terms)} terms)"


# -- colour swap -----------------------------------------------------------------


def swap_green(w: Word, k: Freq, l: Freq) -> Word:
    """The colour switch psi_{k,l}: exchange hat flags between slots decorated k and l.

    For ``k != l`` the slots of each frequency must share one hat flag; the two flags
    are exchanged. For ``k == l`` the slots must be half hat and half plain (one class-1
    and one class-2 family), and all flags are flipped; if they are uniform nothing
    changes. Pairs stay attached to the same slots, so their classes follow the hats.
    """
    k, l = tuple(k), tuple(l)
    hl, prs = w.handles()
    at_k = [(p, j) for p, lt in enumerate(hl) for j, (s, _) in enumerate(lt) if s.freq == k]
    at_l = [(p, j) for p, lt in enumerate(hl) for j, (s, _) in enumerate(lt) if s.freq == l]
    if not at_k or not at_l:
        raise ValueError(f"word has no slot with frequency {k if not at_k else l}")
    flip: set[tuple[int, int]] = set()
    if k != l:
        hk = {hl[p][j][0].hat for p, j in at_k}
        hl_ = {hl[p][j][0].hat for p, j in at_l}
        if len(hk) != 1 or len(hl_) != 1:
            raise ValueError("colour swap is ambiguous: mixed hat flags at one frequency")
        if hk != hl_:
            flip = set(at_k) | set(at_l)
    else:
        n_hat = sum(hl[p][j][0].hat for p, j in at_k)
        if n_hat not in (0, len(at_k)):
            if 2 * n_hat != len(at_k):
                raise ValueError("colour swap is ambiguous: unbalanced hat flags")
            flip = set(at_k)
    new = [
        [(s.with_hat(not s.hat) if (p, j) in flip else s, h) for j, (s, h) in enumerate(lt)]
        for p, lt in enumerate(hl)
    ]
    return Word.from_handles(
        new, prs, [lt.green_node for lt in w.letters], [lt.tag for lt in w.letters]
    )


# -- validation ---------------------------------------------------------------

NLS_ARITIES = {1, 3, 4}
WAVE_ARITIES = {2, 4}
WAVE_WIDE_ARITIES = {2, 4, 6, 8}


def validate_word(w: Word, model: Model, *, check_arity: bool = True, allow_wide_letters: bool = False) -> None:
    """Raise :class:`PairingError` / :class:`ValueError` if ``w`` is not admissible."""
    model = Model.parse(model)
    for pos, lt in enumerate(w.letters):
        if lt.green_node and model is Model.NLS:
            raise ValueError("green nodes only exist in the wave model")
        if not lt.slots:
            continue
        if model is Model.WAVE and any(s.conj for s in lt.slots):
            raise ValueError("wave letters carry conj = 0 only")
        if check_arity:
            allowed = NLS_ARITIES if model is Model.NLS else (WAVE_WIDE_ARITIES if allow_wide_letters else WAVE_ARITIES)
            if lt.arity not in allowed:
                raise ValueError(f"letter {pos} has arity {lt.arity}, allowed {sorted(allowed)}")
            if lt.arity >= 4:
                d = len(lt.slots[0].freq)
                if model is Model.NLS:
                    total = fsum(((conj_sign(s.conj), s.freq) for s in lt.slots), d)
                else:
                    total = fsum(((1, s.freq) for s in lt.slots), d)
                if any(total):
                    raise ValueError(f"letter {pos} has nonzero signed frequency sum {total}")
    for a, b in w.pairs:
        sa, sb = a[1], b[1]
        hats = sa.hat + sb.hat
        if model is Model.NLS:
            if sa.freq != sb.freq or sa.conj == sb.conj:
                raise PairingError(f"NLS pair {a}-{b} needs equal frequency and opposite conj")
            if hats == 1:
                raise PairingError(f"NLS pair {a}-{b} mixes a hat and a plain slot")
        else:
            if any(x + y for x, y in zip(sa.freq, sb.freq)):
                raise PairingError(f"wave pair {a}-{b} needs opposite frequencies")
            if hats == 2:
                raise PairingError(f"wave pair {a}-{b} has two green ends")


def letter_tags(w: Word) -> list[str | None]:
    return [lt.tag for lt in w.letters]


def tag_letters(p: WordPoly, tags: Mapping[Letter, str]) -> WordPoly:
    """Tag letters whose untagged content appears in ``tags``."""

    def fn(w: Word) -> Word:
        return w.map_letters(lambda lt: lt.with_tag(tags.get(lt.untagged(), lt.tag)))

    return p.map_words(fn)


def contains_order(w: Word, order: Sequence[str]) -> bool:
    """True if the tags in ``order`` occur in ``w`` as a subsequence in that order."""
    it = iter(letter_tags(w))
    return all(any(t == o for t in it) for o in order)
