"""Numeric evaluation of paired trees and words for the NLS and wave models."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .coeff import ExactCoeff
from .common import ArborifyError, Freq, Model, PairingError, ResourceError, norm2
from .trees import DecoratedTree, PairedTree, Pairing, Planted, validate_pairing, wick_pairings
from .words import Word, WordPoly

Eta = Callable[[Freq], complex] | Mapping[Freq, complex]

_GRID_LIMIT = 1 << 20


@dataclass(frozen=True)
class EvalParams:
    t: float = 1.0
    d: int = 1
    L: float = 1.0
    mu: float = 1.0
    weight: str = "gaussian"
    weight_table: Mapping[Freq, float] | None = field(default=None, hash=False, compare=False)
    N: int | None = None
    quad_order: int = 64
    seed: int = 0
    phase_2pi: bool = False
    panels: int = 1

    def __post_init__(self) -> None:
        if not self.t > 0:
            raise ValueError("t must be positive")
        if self.quad_order < 2:
            raise ValueError("quad_order must be at least 2")
        if self.L <= 0:
            raise ValueError("L must be positive")
        if self.weight not in ("gaussian", "rational", "table"):
            raise ValueError(f"unknown weight {self.weight!r}")

    def with_(self, **kw) -> "EvalParams":
        return replace(self, **kw)

    # -- NLS ingredients --
    def omega(self, k: Freq) -> float:
        """The phase frequency k^2 = |k/L|^2 (times (2 pi)^2 with ``phase_2pi``)."""
        s = norm2(k) / self.L**2
        return s * (2 * math.pi) ** 2 if self.phase_2pi else s

    def w(self, k: Freq) -> float:
        if self.weight == "table":
            if self.weight_table is None or tuple(k) not in self.weight_table:
                raise ValueError(f"weight table has no entry for {k}")
            v = float(self.weight_table[tuple(k)])
        else:
            r2 = norm2(k) / self.L**2
            v = math.exp(-r2) if self.weight == "gaussian" else 1.0 / (1.0 + r2) ** 2
        if not v > 0:
            raise ValueError("weight must be strictly positive")
        return v

    # -- wave ingredients --
    def in_cutoff(self, n: Freq) -> bool:
        return self.N is None or norm2(n) <= self.N**2


def bracket(n: Freq) -> float:
    """<n> = (1 + |n|^2)^(1/2)."""
    return math.sqrt(1.0 + norm2(n))


# -- kernels -------------------------------------------------------------------


def nls_kernel_split_check(k: Freq, s: float, t: float, params: EvalParams | None = None) -> float:
    """Residual of e^{i(s-t)k^2} = E(xi_k(t) conj(xi_k(s))) with E|eta|^2 = 1 substituted."""
    om = (params or EvalParams()).omega(tuple(k))
    lhs = np.exp(1j * (s - t) * om)
    rhs = np.exp(-1j * t * om) * np.conj(np.exp(-1j * s * om))
    return float(abs(lhs - rhs))


def wave_cov(n: Freq, t: float | np.ndarray, tp: float | np.ndarray) -> float | np.ndarray:
    """E(v_n(t) v_{-n}(t')) = cos((t - t') <n>) / <n>^2."""
    b = bracket(n)
    return np.cos((np.asarray(t) - np.asarray(tp)) * b) / b**2


def wave_dcov(n: Freq, t_green: float | np.ndarray, t_other: float | np.ndarray) -> float | np.ndarray:
    """Derivative of the covariance in the green end's time: sin((t_o - t_g) <n>) / <n>."""
    b = bracket(n)
    return np.sin((np.asarray(t_other) - np.asarray(t_green)) * b) / b


def wave_cov_fd_error(n: Freq, t: float, tp: float, h: float) -> float:
    """|central difference of wave_cov in t - analytic derivative|."""
    fd = (wave_cov(n, t + h, tp) - wave_cov(n, t - h, tp)) / (2 * h)
    exact = -np.sin((t - tp) * bracket(n)) / bracket(n)
    return float(abs(fd - exact))


# -- quadrature ----------------------------------------------------------------


@lru_cache(maxsize=64)
def gauss_rule(order: int, panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for p in range(panels):
        a = p / panels
        xs.append(a + (x + 1) / (2 * panels))
        ws.append(w / (2 * panels))
    return np.concatenate(xs), np.concatenate(ws)


def nested_integral(
    parents: Sequence[int],
    t: float,
    integrand: Callable[[list], np.ndarray],
    order: int = 64,
    panels: int = 1,
) -> complex:
    """Integrate over {0 < t_j < t_{parents[j]}} with t_{-1} = t.

    ``parents[j] < j`` is required. ``integrand`` receives the list of time arrays
    (broadcast together) and returns the integrand values.
    """
    for j, p in enumerate(parents):
        if p >= j:
            raise ValueError("parents must precede their children")
    x, w = gauss_rule(order, panels)
    return complex(_nested(list(parents), t, x, w, integrand, []))


def _nested(parents, t, x, w, f, fixed):
    m = len(parents)
    k = len(fixed)
    free = m - k
    if free == 0:
        return complex(np.sum(f(list(fixed))))
    q = len(x)
    if q**free > _GRID_LIMIT:
        p = parents[k]
        total = 0j
        for xi, wi in zip(x, w):
            top = t if p < 0 else fixed[p]
            total += top * wi * _nested(parents, t, x, w, f, fixed + [top * xi])
        return total
    times = list(fixed)
    weight = np.ones(1)
    for j in range(k, m):
        shape = [1] * free
        shape[j - k] = q
        xj = x.reshape(shape)
        wj = w.reshape(shape)
        p = parents[j]
        top = t if p < 0 else times[p]
        times.append(top * xj)
        weight = weight * top * wj
    vals = f(times)
    return complex(np.sum(np.broadcast_to(vals * weight, (q,) * free)))


# -- trees -------------------------------------------------------------------------


@dataclass
class _TreeLayout:
    parents: list[int]
    nodes: list[Planted]
    leaf_node: list[int]


def _layout(tree: DecoratedTree) -> _TreeLayout:
    parents: list[int] = []
    nodes: list[Planted] = []
    leaf_node: list[int] = []

    def walk(p: Planted, parent: int) -> None:
        if p.is_leaf:
            leaf_node.append(parent)
            return
        parents.append(parent)
        nodes.append(p)
        me = len(nodes) - 1
        for c in p.children:
            walk(c, me)

    for b in tree.branches:
        walk(b, -1)
    return _TreeLayout(parents, nodes, leaf_node)


def _eta_value(eta: Eta | None, k: Freq) -> complex:
    if eta is None:
        raise PairingError("unpaired leaf requires eta values (Monte Carlo mode)")
    return complex(eta(k) if callable(eta) else eta[k])


def _nls_xi(params: EvalParams, k: Freq, conj: int, hat: bool, tt, eta: Eta | None):
    om = params.omega(k)
    amp = (1.0 if hat else math.sqrt(params.w(k))) * _eta_value(eta, k)
    if conj:
        return np.exp(1j * om * tt) * np.conj(amp)
    return np.exp(-1j * om * tt) * amp


def _nls_pair(params: EvalParams, k: Freq, ca: int, ta, tb, hat: bool):
    """E(xi^ca_k(ta) xi^cb_k(tb)) for opposite conj bits."""
    t0, t1 = (ta, tb) if ca == 0 else (tb, ta)
    v = np.exp(-1j * params.omega(k) * (t0 - t1))
    return v if hat else v * params.w(k)


def eval_tree(
    t: PairedTree | DecoratedTree,
    params: EvalParams,
    model: Model | str,
    eta: Eta | None = None,
    pairing: Pairing | None = None,
    order: int | None = None,
    panels: int | None = None,
) -> complex:
    """Pi (NLS) or Pi_N (wave) of a paired tree by nested quadrature over the tree order."""
    model = Model.parse(model)
    pt = t if isinstance(t, PairedTree) else PairedTree(t, pairing or Pairing())
    if pairing is not None and isinstance(t, PairedTree):
        pt = PairedTree(t.tree, pairing)
    tree = pt.tree
    validate_pairing(tree, pt.pairing, model)
    lay = _layout(tree)
    leaves = tree.leaves()
    partner = pt.pairing.partner()
    T = params.t

    if model is Model.WAVE:
        if len(partner) != len(leaves):
            raise PairingError("wave evaluation needs every leaf paired")
        for p in lay.nodes + leaves:
            if not params.in_cutoff(p.freq):
                return 0j
    elif eta is None and len(partner) != len(leaves):
        raise PairingError("unpaired leaf in deterministic mode")

    def time_of(times, node: int):
        return T if node < 0 else times[node]

    def integrand(times):
        val = np.ones(1, dtype=complex)
        for j, (node, par) in enumerate(zip(lay.nodes, lay.parents)):
            tc, tp = times[j], time_of(times, par)
            if model is Model.NLS:
                sgn = -1 if node.decor.conj else 1
                val = val * (sgn * 1j * params.mu**2) * np.exp(sgn * 1j * (tc - tp) * params.omega(node.freq))
            else:
                b = bracket(node.freq)
                val = val * np.sin((tp - tc) * b) / b
        for a, lf in enumerate(leaves):
            ta = time_of(times, lay.leaf_node[a])
            if a in partner:
                b_id, _ = partner[a]
                if b_id < a:
                    continue
                lb = leaves[b_id]
                tb = time_of(times, lay.leaf_node[b_id])
                val = val * _pair_kernel(params, model, lf.freq, lf.decor.conj, lf.decor.hat, ta, lb.decor.hat, tb)
            else:
                val = val * _nls_xi(params, lf.freq, lf.decor.conj, lf.decor.hat, ta, eta)
        return val

    return nested_integral(lay.parents, T, integrand, order or params.quad_order, panels or params.panels)


def _pair_kernel(params: EvalParams, model: Model, k: Freq, ca: int, hat_a: bool, ta, hat_b: bool, tb):
    if model is Model.NLS:
        return _nls_pair(params, k, ca, ta, tb, hat_a and hat_b)
    if hat_a:
        return wave_dcov(k, ta, tb)
    if hat_b:
        return wave_dcov(k, tb, ta)
    return wave_cov(k, ta, tb)


# -- words ----------------------------------------------------------------------


def eval_word(
    w: Word,
    params: EvalParams,
    model: Model | str,
    eta: Eta | None = None,
    order: int | None = None,
    panels: int | None = None,
) -> complex:
    """Pi^A of a word: nested integral over 0 < t_1 < ... < t_n = t."""
    model = Model.parse(model)
    if not len(w):
        return 1 + 0j
    lts, prs = w.explicit()
    T = params.t
    timed = [p for p, lt in enumerate(w.letters) if not lt.green_node]
    if not timed or timed[-1] != len(w) - 1:
        raise ArborifyError("the last letter of a word must carry the final time")
    if any(lt.green_node for lt in w.letters) and model is Model.NLS:
        raise ArborifyError("green nodes only exist in the wave model")
    # variable j <-> letter timed[-2 - j]; its parent is the next timed letter
    var_of = {}
    parents: list[int] = []
    for j, pos in enumerate(reversed(timed[:-1])):
        var_of[pos] = j
        parents.append(j - 1)
    paired = {e for _, a, b in prs for e in (a, b)}
    unpaired = [(p, j) for p, lt in enumerate(lts) for j in range(len(lt)) if (p, j) not in paired]
    if unpaired and (model is Model.WAVE or eta is None):
        raise PairingError("unpaired slot in deterministic mode")
    if model is Model.WAVE:
        if not all(params.in_cutoff(s.freq) for lt in lts for s in lt):
            return 0j
    for cls_, a, b in prs:
        sa, sb = lts[a[0]][a[1]], lts[b[0]][b[1]]
        if model is Model.NLS and (sa.freq != sb.freq or sa.conj == sb.conj):
            raise PairingError("NLS pair needs equal frequency and opposite conj")
        if model is Model.WAVE and any(x + y for x, y in zip(sa.freq, sb.freq)):
            raise PairingError("wave pair needs opposite frequencies")

    def time_of(times, pos: int):
        if w.letters[pos].green_node:
            return 0.0
        if pos == timed[-1]:
            return T
        return times[var_of[pos]]

    def integrand(times):
        val = np.ones(1, dtype=complex)
        for cls_, a, b in prs:
            sa, sb = lts[a[0]][a[1]], lts[b[0]][b[1]]
            val = val * _pair_kernel(params, model, sa.freq, sa.conj, sa.hat, time_of(times, a[0]), sb.hat, time_of(times, b[0]))
        for p, j in unpaired:
            s = lts[p][j]
            val = val * _nls_xi(params, s.freq, s.conj, s.hat, time_of(times, p), eta)
        return val

    val = nested_integral(parents, T, integrand, order or params.quad_order, panels or params.panels)
    if model is Model.NLS:
        val *= params.mu ** (2 * len(w) - 2)
    return val


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ARBORIFY_THREADS", "1")))
    except ValueError:
        return 1


def eval_wordpoly(
    p: WordPoly,
    params: EvalParams,
    model: Model | str,
    eta: Eta | None = None,
    order: int | None = None,
    panels: int | None = None,
) -> complex:
    """Linear extension of :func:`eval_word`; summed in a fixed order."""
    terms = p.sorted_terms()
    if not terms:
        return 0j

    def one(term):
        w, c = term
        return c.to_complex(params.mu) * eval_word(w, params, model, eta, order, panels)

    n = _threads()
    if n > 1 and len(terms) > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            vals = list(ex.map(one, terms))
    else:
        vals = [one(t) for t in terms]
    total = 0j
    for v in vals:
        total += v
    return total


# -- self-consistency -------------------------------------------------------------


@dataclass(frozen=True)
class CheckedValue:
    value: complex
    coarse: complex
    panels: int
    converged: bool


def checked(fn: Callable[..., complex], params: EvalParams, tol: float = 1e-9, max_panels: int = 8) -> CheckedValue:
    """Compare order q/2 against order q; refine by panel bisection until they agree."""
    panels = params.panels
    fine = fn(order=params.quad_order, panels=panels)
    coarse = fn(order=max(2, params.quad_order // 2), panels=panels)
    while abs(fine - coarse) > tol * (1 + abs(fine)) and panels < max_panels:
        panels *= 2
        coarse = fine
        fine = fn(order=params.quad_order, panels=panels)
    return CheckedValue(fine, coarse, panels, abs(fine - coarse) <= tol * (1 + abs(fine)))


# -- Monte Carlo -----------------------------------------------------------------


@dataclass(frozen=True)
class McResult:
    mean: complex
    expected: complex
    stderr: float
    z: float
    samples: int


def complex_normal(rng: np.random.Generator, size: int) -> np.ndarray:
    """Centred complex Gaussian with independent N(0, 1/2) parts, so E|eta|^2 = 1."""
    s = math.sqrt(0.5)
    return rng.normal(0.0, s, size) + 1j * rng.normal(0.0, s, size)


def mc_wick_check(tree: DecoratedTree, params: EvalParams, samples: int = 10_000) -> McResult:
    """Monte Carlo moment of Pi(tree) with sampled eta against the Wick sum of paired evaluations.

    The eta factors do not depend on time, so Pi(tree)(eta) is the deterministic integral
    with eta = 1 times the product of the leaf eta factors.
    """
    leaves = tree.leaves()
    base = eval_tree(PairedTree(tree), params, Model.NLS, eta=lambda k: 1.0)
    rng = np.random.default_rng(params.seed)
    draws = {k: complex_normal(rng, samples) for k in sorted({lf.freq for lf in leaves})}
    prod = np.ones(samples, dtype=complex)
    for lf in leaves:
        e = draws[lf.freq]
        prod = prod * (np.conj(e) if lf.decor.conj else e)
    vals = base * prod
    mean = complex(vals.mean())
    expected = 0j
    info = [(lf.freq, lf.decor.conj) for lf in leaves]
    for pr in wick_pairings(info, Model.NLS):
        pairs = sorted(pr.class2)
        hats = [leaves[a].decor.hat + leaves[b].decor.hat for a, b in pairs]
        if any(h == 1 for h in hats):
            continue
        c1 = frozenset(p for p, h in zip(pairs, hats) if h == 2)
        c2 = frozenset(p for p, h in zip(pairs, hats) if h == 0)
        expected += eval_tree(PairedTree(tree, Pairing(c1, c2)), params, Model.NLS)
    se = math.sqrt((vals.real.var(ddof=1) + vals.imag.var(ddof=1)) / samples)
    diff = abs(mean - expected)
    z = 0.0 if diff == 0 else (diff / se if se > 0 else math.inf)
    return McResult(mean, expected, se, z, samples)


def coeff_value(c: ExactCoeff, params: EvalParams) -> complex:
    return c.to_complex(params.mu)
