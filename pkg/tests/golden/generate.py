"""Regenerate the golden ``.arb`` corpus: ``python3 tests/golden/generate.py``.

The files are committed; the round-trip test only reads them. Rerun this script after an
intentional change of the canonical text format and review the diff.
"""

from __future__ import annotations

import pathlib

import numpy as np

from arborify.arborification import arborify
from arborify.cancellation import (
    cancel_family2,
    cancel_family3,
    family2_trees,
    family3_trees,
    ibp,
    tree_T5,
    tree_T6,
    two_letter_word,
    wave_T1,
    wave_T1_word,
    wave_T2,
)
from arborify.coeff import ExactCoeff
from arborify.common import Model
from arborify.dsl import print_tree, print_word
from arborify.generators import random_nls_tree, random_shape_tree, random_wave_tree, random_word
from arborify.trees import DecoratedTree, PairedTree, TreePoly, leaf, planted
from arborify.words import WordPoly, shuffle

HERE = pathlib.Path(__file__).parent


def corpus() -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []

    def tree(name, x):
        out.append((name, print_tree(x)))

    def word(name, x):
        out.append((name, print_word(x)))

    t4 = DecoratedTree.of(planted(0, [leaf((1,), 1), leaf((2,)), leaf((2,))]))
    tree("t4", t4)
    word("t4_words", arborify(t4, Model.NLS))
    t5 = tree_T5((1, 0), (0, 1), (1, 1), (1, 1))
    t6 = tree_T6((1, 0), (0, 1), (1, 1), (1, 1))
    tree("t5", t5)
    tree("t6", t6)
    tree("t5_plus_t6", TreePoly.single(t5) + TreePoly.single(t6))
    t7 = PairedTree.from_labels(
        DecoratedTree.of(leaf((0, 1)), leaf((1, 0), hat=True, label="a"),
                         planted(1, [leaf((1, 1)), leaf((1, 1), 1), leaf((1, 0), 1, True, label="b")])),
        class1=[("a", "b")],
    )
    tree("t7_green", t7)
    word("t5_words", arborify(t5, Model.NLS))
    word("t6_words", arborify(t6, Model.NLS))
    f2a, f2b, _ = family2_trees()
    tree("family2_tree1", f2a)
    tree("family2_tree2", f2b)
    word("family2_words1", arborify(f2a, Model.NLS))
    word("family2_residual", cancel_family2().residual)
    f3a, f3b = family3_trees()
    tree("family3_tree1", f3a)
    tree("family3_tree2", f3b)
    word("family3_words2", arborify(f3b, Model.NLS))
    w1 = wave_T1((1, 0, 0), (0, 1, 0), (0, 0, 1))
    tree("wave_t1", w1)
    tree("wave_t2", wave_T2((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    word("wave_t1_word", wave_T1_word((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    word("wave_t2_words", arborify(wave_T2((1, 0, 0), (0, 1, 0), (0, 0, 1)), Model.WAVE))
    res = ibp(wave_T1_word((1, 0, 0), (0, 1, 1), (1, -1, 0)), 0)
    word("ibp_relocated", res.relocated)
    word("ibp_upper_wide_letter", res.upper_boundary)
    word("ibp_lower_green_node", res.lower_boundary)
    word("two_letter_word", two_letter_word((1, 0, 0)))
    tree("unit_tree", TreePoly.single(DecoratedTree()))
    word("unit_word", WordPoly.unit())
    tree("zero_tree", TreePoly())
    tree("coeffs", TreePoly({PairedTree(DecoratedTree.of(leaf((1,)))): ExactCoeff(1, -3),
                             PairedTree(DecoratedTree.of(leaf((2,), 1))): ExactCoeff(-3, 0, 1),
                             PairedTree(DecoratedTree.of(leaf((3,)), leaf((3,)))): ExactCoeff(0, "5/2")}))
    rng = np.random.default_rng(2024)
    for j in range(6):
        tree(f"random_nls_{j}", random_nls_tree(rng, 1 + j % 2))
    for j in range(4):
        tree(f"random_wave_{j}", random_wave_tree(rng, 3, 2, 3))
    for j in range(6):
        tree(f"random_shape_{j}", random_shape_tree(rng, Model.NLS if j % 2 else Model.WAVE, 8, 1 + j % 3))
    for j in range(3):
        word(f"random_shuffle_{j}", shuffle(random_word(rng, 3), random_word(rng, 2)))
    word("random_nls_words", arborify(random_nls_tree(rng, 2, 2), Model.NLS))
    word("family3_residual_tagged", cancel_family3().residual)
    word("ibp_total", res.total())
    tree("random_shape_d2_nls", random_shape_tree(rng, Model.NLS, 8, 2))
    return out


def main() -> None:
    items = corpus()
    for old in HERE.glob("*.arb"):
        old.unlink()
    for j, (name, text) in enumerate(items, 1):
        (HERE / f"{j:03d}_{name}.arb").write_text(text, encoding="utf-8")
    print(f"wrote {len(items)} files")


if __name__ == "__main__":
    main()
