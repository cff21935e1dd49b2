import math

import pytest

from arborify.cancellation import (
    cancel_family1,
    cancel_family2,
    cancel_family3,
    frak_c_closed,
    frak_c_N,
    gamma_N,
    gamma_factorization_residual,
    ibp,
    ibp_positions,
    lattice_ball,
    two_letter_word,
    wave_T1_word,
)
from arborify.common import Model
from arborify.evaluation import EvalParams, eval_word, eval_wordpoly
from arborify.words import Letter, Slot, Word, contains_order


def test_family1():
    r = cancel_family1(sweep_L=(10, 30, 100))
    assert abs(r.exact_sum) < 1e-12
    assert r.word_identity and r.sweep_decreasing


def test_family2_plain_and_with_context():
    r = cancel_family2()
    assert len(r.residual) == 2 and r.forbidden_free and r.matches_expected
    ctx = Word.of(Letter((Slot(0, False, (2,)), Slot(1, False, (2,)), Slot(0, False, (5,)))))
    r = cancel_family2(u=ctx)
    assert r.forbidden_free and r.matches_expected
    assert len(r.residual) == 8


def test_family3_single_monomial():
    r = cancel_family3()
    assert len(r.residual) == 1 and r.forbidden_free
    (w, c), = list(r.residual)
    assert c.re == 0 and c.im == -1
    assert not contains_order(w, ("a1", "a2", "a3"))
    assert r.extra["letter_images"] == {"b1": "a2", "b2": "a1", "b3": "a3"}


def test_ibp_on_first_word():
    w = wave_T1_word((1, 0, 0), (0, 1, 1), (1, -1, 0))
    assert 0 in ibp_positions(w)
    r = ibp(w, 0)
    assert len(r.relocated) == 3
    assert all(c.re == -1 for _, c in r.relocated)
    p = EvalParams(t=1.0, d=3, N=3, quad_order=48)
    assert abs(eval_word(w, p, Model.WAVE) - eval_wordpoly(r.total(), p, Model.WAVE)) < 1e-10


def test_lattice_ball():
    assert len(lattice_ball(0)) == 1
    assert len(lattice_ball(1)) == 7
    assert len(lattice_ball(2)) == 33


def test_gamma():
    assert gamma_N((0, 0, 0), 0) == 1.0
    assert gamma_N((1, 0, 0), 1) == pytest.approx(gamma_N((0, -1, 0), 1), abs=1e-15)
    assert gamma_factorization_residual((1, 0, 0), 1, EvalParams(d=3, quad_order=24)) < 1e-10
    assert len(two_letter_word((0, 0, 1))) == 2


def analytic_c0(t):
    return -2 * math.cos(t) * (3 * t * math.sin(t) / 8 + (math.cos(t) - math.cos(3 * t)) / 32)


@pytest.mark.parametrize("t", [0.5, 1.0, 1.7])
def test_c0_closed_form(t):
    assert abs(frak_c_closed(0, t) - analytic_c0(t)) < 1e-12


def test_c0_pipeline():
    r = frak_c_N(0, 1.0)
    assert r.difference < 1e-10
    assert r.first_display_residual < 1e-10
