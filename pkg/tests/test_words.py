import math

import numpy as np
import pytest

from arborify.common import Model
from arborify.generators import distinct_letters, random_word
from arborify.words import (
    Letter,
    S,
    Slot,
    Word,
    WordPoly,
    concat,
    contains_order,
    shuffle,
    shuffle_before_last,
    swap_green,
    validate_word,
)


def test_shuffle_counts_distinct_letters():
    ls = distinct_letters(5)
    p = shuffle(Word(tuple(ls[:2])), Word(tuple(ls[2:])))
    assert len(p) == math.comb(5, 2)


def test_shuffle_multiplicities():
    a = Letter((S((1,)),))
    p = shuffle(Word.of(a), Word.of(a))
    ((w, c),) = list(p)
    assert len(w) == 2 and c.re == 2


def test_unit_and_concat():
    rng = np.random.default_rng(1)
    u = WordPoly.single(random_word(rng, 4))
    assert u.shuffle(WordPoly.unit()) == u
    w = Word(tuple(distinct_letters(3)))
    assert concat(Word(w.letters[:1]), Word(w.letters[1:])) == w


def test_shuffle_before_last_keeps_last_letter():
    ls = distinct_letters(4)
    w = Word(tuple(ls[:3]))
    p = shuffle_before_last(w, Word.of(ls[3]))
    assert len(p) == 3
    assert all(x.letters[-1] == ls[2] for x, _ in p)


def test_contains_order():
    ls = [lt.with_tag(t) for lt, t in zip(distinct_letters(3), ("a", "b", "c"))]
    w = Word((ls[1], ls[0], ls[2]))
    assert contains_order(w, ("a", "c"))
    assert not contains_order(w, ("a", "b"))


def test_swap_green_exchanges_hats():
    w = Word.of(Letter((S((1,), 0, True), S((2,), 1))))
    s = swap_green(w, (1,), (2,))
    slots = s.letters[0].slots
    assert {(x.freq, x.hat) for x in slots} == {((1,), False), ((2,), True)}
    assert swap_green(s, (1,), (2,)) == w
    with pytest.raises(ValueError):
        swap_green(w, (1,), (9,))


def test_validate_word_arity():
    ok = Word.of(Letter((S((1,)), S((1,)), S((1,), 1))))
    validate_word(ok, Model.NLS)
    with pytest.raises(Exception):
        validate_word(Word.of(Letter((S((1,)), S((1,))))), Model.NLS)


def test_slot_hat_toggle():
    s = Slot(0, False, (1,))
    assert s.with_hat(True).hat and not s.hat
