"""Named verification checks run by the command line and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .arborification import arborify
from .cancellation import (
    cancel_family1,
    cancel_family2,
    cancel_family3,
    frak_c_N,
    gamma_N,
    gamma_factorization_residual,
    ibp,
    ibp_positions,
    lattice_ball,
    wave_T1_word,
)
from .common import Model
from .evaluation import (
    EvalParams,
    eval_tree,
    eval_word,
    eval_wordpoly,
    mc_wick_check,
    nls_kernel_split_check,
    wave_cov_fd_error,
)
from .generators import random_nls_tree, random_wave_tree
from .trees import DecoratedTree, double_factorial_odd, leaf, planted, wick_pairings
from .words import Letter, Slot, Word


@dataclass
class Check:
    name: str
    status: str  # pass, fail or warn
    residual: float
    tol: float
    detail: str = ""
    data: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status,
            "residual": _num(self.residual),
            "tol": self.tol,
            "detail": self.detail,
            "data": {k: _num(v) for k, v in sorted(self.data.items())},
        }


def _num(x: Any) -> Any:
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def _status(ok: bool, warn: bool = False) -> str:
    if not ok:
        return "fail"
    return "warn" if warn else "pass"


def _rel(a: complex, b: complex) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


# -- theorems ------------------------------------------------------------------------


def theorem_nls(trials: int = 20, tol: float = 1e-8, seed: int = 0, quad: int = 64, **_: Any) -> list[Check]:
    """Pi T against Pi^A a(T) for seeded random fully paired NLS trees (d in {1, 2}, |k| <= 3)."""
    rng = np.random.default_rng(seed)
    out = []
    for j in range(trials):
        d = int(rng.integers(1, 3))
        pt = random_nls_tree(rng, d)
        p = EvalParams(t=1.0, d=d, L=1.0, mu=1.0, quad_order=quad)
        a = eval_tree(pt, p, Model.NLS)
        b = eval_wordpoly(arborify(pt, Model.NLS), p, Model.NLS)
        coarse = eval_tree(pt, p, Model.NLS, order=max(2, quad // 2))
        r = _rel(a, b)
        out.append(Check(f"theorem-nls[{j}]", _status(r <= tol, _rel(a, coarse) > tol), r, tol,
                         f"d={d} t2_edges={pt.tree.t2_edges()}", {"tree": a, "words": b}))
    return out


def theorem_wave(trials: int = 20, tol: float = 1e-8, seed: int = 0, quad: int = 64, N: int = 3, **_: Any) -> list[Check]:
    """Pi T against Pi^A a(T) for seeded random fully paired wave trees (d = 3, cutoff N)."""
    rng = np.random.default_rng(seed)
    out = []
    for j in range(trials):
        pt = random_wave_tree(rng, 3, 3, N)
        p = EvalParams(t=1.0, d=3, N=N, quad_order=quad)
        a = eval_tree(pt, p, Model.WAVE)
        b = eval_wordpoly(arborify(pt, Model.WAVE), p, Model.WAVE)
        coarse = eval_tree(pt, p, Model.WAVE, order=max(2, quad // 2))
        r = _rel(a, b)
        out.append(Check(f"theorem-wave[{j}]", _status(r <= tol, _rel(a, coarse) > tol), r, tol,
                         f"t2_edges={pt.tree.t2_edges()}", {"tree": a, "words": b}))
    return out


# -- kernels and Wick -------------------------------------------------------------------


FD_STEPS = (1e-2, 5e-3, 2.5e-3)


def covariance(trials: int = 100, tol: float = 1e-13, seed: int = 0, **_: Any) -> list[Check]:
    """Kernel split identity at random (k, s, t) and second-order central differences of the wave covariance."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        d = int(rng.integers(1, 4))
        k = tuple(int(x) for x in rng.integers(-3, 4, size=d))
        s, t = sorted(rng.uniform(0, 2, size=2))
        worst = max(worst, nls_kernel_split_check(k, float(s), float(t)))
    split = Check("covariance-split", _status(worst <= tol), worst, tol, f"{trials} random (k, s, t)")
    ratios = []
    while len(ratios) < 20:
        n = tuple(int(x) for x in rng.integers(-2, 3, size=3))
        t, tp = (float(x) for x in rng.uniform(0, 2, size=2))
        b = math.sqrt(1 + sum(x * x for x in n))
        # the leading error term carries sin((t - t') <n>); skip points where it nearly vanishes
        if abs(math.sin((t - tp) * b)) < 0.2:
            continue
        errs = [wave_cov_fd_error(n, t, tp, h) for h in FD_STEPS]
        ratios += [errs[0] / errs[1], errs[1] / errs[2]]
    lo, hi = min(ratios), max(ratios)
    ok = 3.5 <= lo and hi <= 4.5
    fd = Check("covariance-fd-order", _status(ok), max(abs(lo - 4), abs(hi - 4)), 0.5,
               f"error ratios under halving in [{lo:.4f}, {hi:.4f}]", {"min_ratio": lo, "max_ratio": hi})
    return [split, fd]


def wick_2leaf() -> DecoratedTree:
    return DecoratedTree.of(leaf((1,)), leaf((1,), 1))


def wick_4leaf() -> DecoratedTree:
    """Four leaves at one frequency, one of them through a t2 edge, so two pairings contribute."""
    return DecoratedTree.of(planted(0, [leaf((1,)), leaf((1,), 1), leaf((1,))]), leaf((1,), 1))


def wick(trials: int = 10_000, tol: float = 3.0, seed: int = 0, **_: Any) -> list[Check]:
    """Unfiltered pairing counts and Monte Carlo moments at ``trials`` samples (z-score bound ``tol``)."""
    out = []
    bad = []
    for n in range(1, 6):
        got = len(wick_pairings([((0,), 0)] * (2 * n)))
        if got != double_factorial_odd(n):
            bad.append(n)
    out.append(Check("wick-count", _status(not bad), float(len(bad)), 0.0, "(2n-1)!! for n <= 5"))
    p = EvalParams(t=1.0, d=1, seed=seed)
    for name, tree in (("wick-mc-2leaf", wick_2leaf()), ("wick-mc-4leaf", wick_4leaf())):
        r = mc_wick_check(tree, p, samples=trials)
        out.append(Check(name, _status(r.z <= tol), r.z, tol, f"{r.samples} samples",
                         {"mean": r.mean, "expected": r.expected, "stderr": r.stderr}))
    return out


# -- cancellations ----------------------------------------------------------------------------


def family1(tol: float = 1e-9, **_: Any) -> list[Check]:
    r = cancel_family1()
    return [
        Check("family1-exact", _status(abs(r.exact_sum) <= tol), abs(r.exact_sum), tol,
              "Pi(T5) + Pi(T6) with l1 = k1", {"T5": r.exact_parts[0], "T6": r.exact_parts[1]}),
        Check("family1-words", _status(r.word_identity), 0.0 if r.word_identity else 1.0, 0.0,
              "a(T5) + psi(a(T6)) = 0"),
        Check("family1-sweep", _status(r.sweep_decreasing), 0.0 if r.sweep_decreasing else 1.0, 0.0,
              "|sum| decreasing in L", {"L": [L for L, _ in r.sweep], "abs_sum": [v for _, v in r.sweep]}),
    ]


def _context_letter() -> Word:
    return Word.of(Letter((Slot(0, False, (2,)), Slot(1, False, (2,)), Slot(0, False, (5,)))))


def family2(**_: Any) -> list[Check]:
    out = []
    for name, u in (("family2", Word()), ("family2-context", _context_letter())):
        r = cancel_family2(u=u)
        ok = r.forbidden_free and r.matches_expected and r.extra["ordered_cancel"]
        out.append(Check(name, _status(ok), 0.0 if ok else 1.0, 0.0,
                         f"{len(r.residual)} surviving monomials", {"terms": len(r.residual)}))
    return out


def family3(**_: Any) -> list[Check]:
    r = cancel_family3()
    images = r.extra["letter_images"] == {"b1": "a2", "b2": "a1", "b3": "a3"}
    ok = r.forbidden_free and r.matches_expected and len(r.residual) == 1 and images
    return [Check("family3", _status(ok), 0.0 if ok else 1.0, 0.0, "single monomial -i a2 a1 a3 tail",
                  {"terms": len(r.residual)})]


def ibp_check(trials: int = 5, tol: float = 1e-8, seed: int = 0, quad: int = 64, **_: Any) -> list[Check]:
    """eval(w) against the sum of the integration by parts terms."""
    rng = np.random.default_rng(seed)
    p = EvalParams(t=1.0, d=3, N=3, quad_order=quad)
    cases = [("ibp-T1", wave_T1_word((1, 0, 0), (0, 1, 1), (1, -1, 0)), 0)]
    while len(cases) < trials + 1:
        pt = random_wave_tree(rng, 3, 3, 3)
        terms = arborify(pt, Model.WAVE).sorted_terms()
        w = terms[int(rng.integers(len(terms)))][0]
        pos_list = ibp_positions(w)
        if pos_list:
            cases.append((f"ibp-random[{len(cases) - 1}]", w, pos_list[int(rng.integers(len(pos_list)))]))
    out = []
    for name, w, pos in cases:
        a = eval_word(w, p, Model.WAVE)
        b = eval_wordpoly(ibp(w, pos).total(), p, Model.WAVE)
        r = _rel(a, b)
        out.append(Check(name, _status(r <= tol), r, tol, f"position {pos}", {"word": a, "parts": b}))
    return out


def frak_c(tol: float = 1e-7, N: int | None = None, t: float = 1.0, quad: int = 64, **_: Any) -> list[Check]:
    out = []
    for n in ([0, 1] if N is None else [N]):
        r = frak_c_N(n, t, EvalParams(d=3, quad_order=quad))
        out.append(Check(f"frak-c[N={n}]", _status(r.difference <= tol), r.difference, tol,
                         "word pipeline against closed form",
                         {"pipeline": r.pipeline, "closed": r.closed,
                          "t2_shortcut": r.t2_shortcut_residual, "first_display": r.first_display_residual}))
    g0 = gamma_N((0, 0, 0), 0)
    out.append(Check("gamma-0", _status(g0 == 1.0), abs(g0 - 1.0), 0.0, "Gamma_0(0) = 1"))
    worst = 0.0
    for n in range(0, 3 if N is None else min(N, 2) + 1):
        for k3 in _factorization_points(n):
            worst = max(worst, gamma_factorization_residual(k3, n, EvalParams(d=3, quad_order=32)))
    out.append(Check("gamma-factorization", _status(worst <= 1e-10), worst, 1e-10,
                     "sum over k1, k2 of the merged word = Gamma_N(k3) times the two-letter word"))
    return out


def _factorization_points(n: int) -> list[tuple[int, ...]]:
    """All |k3| <= n up to the cubic symmetry group, which leaves both sides invariant."""
    reps = {tuple(sorted(abs(x) for x in k)) for k in lattice_ball(n, 3)}
    return sorted(reps)


CHECKS: dict[str, Callable[..., list[Check]]] = {
    "theorem-nls": theorem_nls,
    "theorem-wave": theorem_wave,
    "covariance": covariance,
    "wick": wick,
    "family1": family1,
    "family2": family2,
    "family3": family3,
    "ibp": ibp_check,
    "frak-c": frak_c,
}
