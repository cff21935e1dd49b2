import math

import numpy as np
import pytest

from arborify.common import Model
from arborify.evaluation import (
    EvalParams,
    bracket,
    checked,
    eval_tree,
    eval_word,
    gauss_rule,
    mc_wick_check,
    nested_integral,
    nls_kernel_split_check,
    wave_cov,
    wave_cov_fd_error,
    wave_dcov,
)
from arborify.trees import DecoratedTree, PairedTree, leaf, planted
from arborify.words import EMPTY_WORD


def paired(*branches, pairs):
    return PairedTree.from_labels(DecoratedTree.of(*branches), class2=pairs)


def test_gauss_rule_integrates_polynomials():
    for panels in (1, 3):
        x, w = gauss_rule(8, panels)
        assert abs(w.sum() - 1) < 1e-14
        assert abs((w * x**7).sum() - 1 / 8) < 1e-14


def test_nested_integral_simplex_volumes():
    for n in range(1, 5):
        vol = nested_integral(list(range(-1, n - 1)), 2.0, lambda ts: np.ones_like(ts[-1]), order=8)
        assert abs(vol - 2.0**n / math.factorial(n)) < 1e-12
    # two independent times below the root give t^2
    assert abs(nested_integral([-1, -1], 1.5, lambda ts: ts[0] * 0 + 1, order=8) - 1.5**2) < 1e-12


def test_nested_integral_oscillatory():
    v = nested_integral([-1], 1.0, lambda ts: np.exp(1j * ts[0]))
    assert abs(v - (np.exp(1j) - 1) / 1j) < 1e-14
    with pytest.raises(ValueError):
        nested_integral([0], 1.0, lambda ts: ts[0])


def test_two_leaf_tree_is_weight():
    p = EvalParams(t=1.0, d=1)
    t = paired(leaf((1,), label="a"), leaf((1,), 1, label="b"), pairs=[("a", "b")])
    assert abs(eval_tree(t, p, Model.NLS) - p.w((1,))) < 1e-15


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_resonant_t2_tree_grows_linearly(t):
    p = EvalParams(t=t, d=1)
    tree = paired(planted(0, [leaf((1,), label="a"), leaf((2,), label="b"), leaf((2,), 1, label="c")]),
                  leaf((1,), 1, label="d"), pairs=[("a", "d"), ("b", "c")])
    assert abs(eval_tree(tree, p, Model.NLS) - 1j * t * p.w((1,)) * p.w((2,))) < 1e-13


def test_empty_word_is_one():
    assert eval_word(EMPTY_WORD, EvalParams(), Model.NLS) == 1


def test_kernels():
    assert nls_kernel_split_check((1, 2), 0.3, 1.1) < 1e-15
    n = (1, 0, 2)
    b = bracket(n)
    assert b == math.sqrt(6)
    assert abs(wave_cov(n, 0.7, 0.7) - 1 / 6) < 1e-15
    h = 1e-6
    fd = (wave_cov(n, 0.5, 0.2 + h) - wave_cov(n, 0.5, 0.2 - h)) / (2 * h)
    assert abs(fd - wave_dcov(n, 0.2, 0.5)) < 1e-8
    e1, e2 = wave_cov_fd_error(n, 1.0, 0.1, 1e-2), wave_cov_fd_error(n, 1.0, 0.1, 5e-3)
    assert 3.5 < e1 / e2 < 4.5


def test_params_validation():
    with pytest.raises(ValueError):
        EvalParams(t=0)
    with pytest.raises(ValueError):
        EvalParams(weight="nope")
    with pytest.raises(ValueError):
        EvalParams(weight="table", weight_table={}).w((1,))
    p = EvalParams(L=2.0, phase_2pi=True)
    assert abs(p.omega((2,)) - (2 * math.pi) ** 2) < 1e-12
    assert EvalParams(N=2).in_cutoff((1, 1, 0)) and not EvalParams(N=1).in_cutoff((1, 1, 0))


def test_checked_converges():
    p = EvalParams(t=1.0)
    cv = checked(lambda order, panels: nested_integral([-1], 1.0, lambda ts: np.exp(5j * ts[0]), order, panels), p)
    assert cv.converged and abs(cv.value - cv.coarse) < 1e-9


def test_monte_carlo_two_leaves():
    r = mc_wick_check(DecoratedTree.of(leaf((1,)), leaf((1,), 1)), EvalParams(seed=3), samples=4000)
    assert r.z < 4
