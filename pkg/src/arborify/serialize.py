"""JSON (schema ``arborify/v1``) and Graphviz DOT output for trees and words."""

from __future__ import annotations

import json
from typing import Any

from .coeff import ExactCoeff
from .common import ArborifyError
from .dsl import format_freq
from .trees import DecoratedTree, EdgeDecoration, EdgeKind, PairedTree, Pairing, Planted, TreePoly
from .words import Letter, Slot, Word, WordPoly

SCHEMA = "arborify/v1"

# DOT styling: hat (green) leaves are filled green, t2 edges blue, t1 edges brown,
# conjugated edges dotted; pairings are dashed grey lines.
HAT_FILL = "palegreen"
T1_COLOR = "saddlebrown"
T2_COLOR = "blue"
CONJ_STYLE = "dotted"
PAIR_COLOR = "gray40"


class SchemaError(ArborifyError):
    """JSON document does not follow the expected schema."""


# -- coefficients ----------------------------------------------------------------------


def _coeff_json(c: ExactCoeff) -> dict[str, Any]:
    return {"re": str(c.re), "im": str(c.im), "mu_exp": c.mu_exp}


def _coeff_from(d: dict[str, Any]) -> ExactCoeff:
    try:
        return ExactCoeff(d["re"], d["im"], int(d.get("mu_exp", 0)))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as e:
        raise SchemaError(f"malformed coefficient {d!r}") from e


# -- trees --------------------------------------------------------------------------------


def _planted_json(p: Planted) -> dict[str, Any]:
    d = p.decor
    out: dict[str, Any] = {"edge": str(d.kind), "conj": d.conj, "freq": list(p.freq)}
    if p.is_leaf:
        out["hat"] = d.hat
        out["id"] = p.label
    else:
        out["children"] = [_planted_json(c) for c in p.children]
    return out


def _paired_tree_json(pt: PairedTree) -> dict[str, Any]:
    lt = pt.labelled()
    return {
        "branches": [_planted_json(b) for b in lt.branches],
        "pairs": {
            "class1": sorted([list(p) for p in pt.pairing.class1]),
            "class2": sorted([list(p) for p in pt.pairing.class2]),
        },
    }


def _planted_from(d: dict[str, Any]) -> Planted:
    try:
        kind = {"t1": EdgeKind.T1, "t2": EdgeKind.T2}[d["edge"]]
        decor = EdgeDecoration(kind, int(d["conj"]), bool(d.get("hat", False)))
        kids = tuple(_planted_from(c) for c in d.get("children", ()))
        return Planted(decor, tuple(d["freq"]), kids, d.get("id"))
    except (KeyError, TypeError) as e:
        raise SchemaError(f"malformed tree node {d!r}") from e


def _paired_tree_from(d: dict[str, Any]) -> PairedTree:
    tree = DecoratedTree(tuple(_planted_from(b) for b in d.get("branches", ())))
    ids = tree.leaf_labels()
    if sorted(ids, key=lambda x: (x is None, x if isinstance(x, int) else -1)) != list(range(len(ids))):
        raise SchemaError("leaf ids must be 0..n-1 in depth-first order")
    pairs = d.get("pairs", {})
    for cls in ("class1", "class2"):
        for p in pairs.get(cls, ()):
            if len(p) != 2 or any(not isinstance(x, int) or x not in ids for x in p):
                raise SchemaError(f"dangling pairing ids {p!r}")
    return PairedTree(_unlabelled(tree), _pairing_from(tree, pairs))


def _unlabelled(t: DecoratedTree) -> DecoratedTree:
    return DecoratedTree(tuple(b.relabel(lambda lf: None) for b in t.branches))


def _pairing_from(tree: DecoratedTree, pairs: dict[str, Any]) -> Pairing:
    pos = {lab: j for j, lab in enumerate(tree.leaf_labels())}
    return Pairing(
        frozenset((pos[a], pos[b]) for a, b in pairs.get("class1", ())),
        frozenset((pos[a], pos[b]) for a, b in pairs.get("class2", ())),
    )


# -- words ----------------------------------------------------------------------------


def _word_json(w: Word) -> dict[str, Any]:
    lts, prs = w.explicit()
    ids = w.flat_ids()
    letters = []
    for pos, lt in enumerate(w.letters):
        slots = [
            {"id": ids[(pos, j)], "conj": s.conj, "hat": s.hat, "freq": list(s.freq)}
            for j, s in enumerate(lts[pos])
        ]
        letters.append({"green_node": lt.green_node, "tag": lt.tag, "slots": slots})
    return {
        "letters": letters,
        "pairs": {
            "class1": sorted([ids[a], ids[b]] for c, a, b in prs if c == 1),
            "class2": sorted([ids[a], ids[b]] for c, a, b in prs if c == 2),
        },
    }


def _word_from(d: dict[str, Any]) -> Word:
    try:
        hl, seen = [], set()
        for lt in d["letters"]:
            row = []
            for s in lt["slots"]:
                if s["id"] in seen:
                    raise SchemaError(f"duplicate slot id {s['id']!r}")
                seen.add(s["id"])
                row.append((Slot(int(s["conj"]), bool(s["hat"]), tuple(s["freq"])), s["id"]))
            hl.append(row)
        hat = {h: s.hat for row in hl for s, h in row}
        prs = []
        for cls in ("class1", "class2"):
            for p in d.get("pairs", {}).get(cls, ()):
                if len(p) != 2 or any(x not in seen for x in p):
                    raise SchemaError(f"dangling pairing ids {p!r}")
                if (cls == "class1") != (hat[p[0]] or hat[p[1]]):
                    raise SchemaError(f"pair {p!r} is listed as {cls} but its hat flags disagree")
                prs.append(tuple(p))
        return Word.from_handles(
            hl, prs, [bool(lt.get("green_node", False)) for lt in d["letters"]], [lt.get("tag") for lt in d["letters"]]
        )
    except (KeyError, TypeError) as e:
        raise SchemaError(f"malformed word {d!r}") from e


# -- documents ----------------------------------------------------------------------------


def to_json_obj(x: TreePoly | PairedTree | DecoratedTree | WordPoly | Word) -> dict[str, Any]:
    if isinstance(x, (Word, WordPoly)):
        poly = x if isinstance(x, WordPoly) else WordPoly.single(x)
        terms = [{"coeff": _coeff_json(c), "word": _word_json(w)} for w, c in poly.sorted_terms()]
        return {"schema": SCHEMA, "kind": "wordpoly", "terms": terms}
    poly = x if isinstance(x, TreePoly) else TreePoly.single(x)
    terms = [{"coeff": _coeff_json(c), "tree": _paired_tree_json(pt)} for pt, c in poly.sorted_terms()]
    return {"schema": SCHEMA, "kind": "treepoly", "terms": terms}


def to_json(x, indent: int | None = 2) -> str:
    return json.dumps(to_json_obj(x), indent=indent, sort_keys=True) + "\n"


def from_json_obj(d: dict[str, Any]) -> TreePoly | WordPoly:
    if not isinstance(d, dict) or d.get("schema") != SCHEMA:
        got = d.get("schema") if isinstance(d, dict) else None
        raise SchemaError(f"unsupported schema {got!r}; expected {SCHEMA!r}")
    kind = d.get("kind")
    if kind == "wordpoly":
        wp = WordPoly()
        for t in d.get("terms", ()):
            wp.add_term(_word_from(t["word"]), _coeff_from(t["coeff"]))
        return wp
    if kind == "treepoly":
        tp = TreePoly()
        for t in d.get("terms", ()):
            tp = tp + TreePoly({_paired_tree_from(t["tree"]): _coeff_from(t["coeff"])})
        return tp
    raise SchemaError(f"unknown document kind {kind!r}")


def from_json(text: str) -> TreePoly | WordPoly:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e}") from e
    return from_json_obj(d)


# -- DOT -----------------------------------------------------------------------------------


def _edge_attrs(kind: EdgeKind, conj: int) -> str:
    color = T2_COLOR if kind is EdgeKind.T2 else T1_COLOR
    style = f", style={CONJ_STYLE}" if conj else ""
    return f"color={color}{style}"


def _leaf_attrs(hat: bool, label: str) -> str:
    fill = f', style=filled, fillcolor={HAT_FILL}, class="hat"' if hat else ""
    return f'shape=circle, label="{label}"{fill}'


def _tree_dot(pt: PairedTree, name: str) -> list[str]:
    lines = [f"  subgraph cluster_{name} {{", '    label="";']
    counter = iter(range(10**9))
    leaf_node: dict[int, str] = {}
    root = f"{name}_n{next(counter)}"
    lines.append(f'    {root} [shape=point, label=""];')

    def walk(p: Planted, parent: str) -> None:
        me = f"{name}_n{next(counter)}"
        if p.is_leaf:
            leaf_node[p.label] = me
            lines.append(f"    {me} [{_leaf_attrs(p.decor.hat, format_freq(p.freq))}];")
        else:
            lines.append(f'    {me} [shape=point, label="", xlabel="{format_freq(p.freq)}"];')
            for c in p.children:
                walk(c, me)
        lines.append(f"    {parent} -> {me} [dir=back, {_edge_attrs(p.decor.kind, p.decor.conj)}];")

    for b in pt.labelled().branches:
        walk(b, root)
    for cls, (a, b) in pt.pairing.pairs():
        lines.append(
            f'    {leaf_node[a]} -> {leaf_node[b]} [dir=none, style=dashed, color={PAIR_COLOR}, constraint=false, label="p{cls}"];'
        )
    lines.append("  }")
    return lines


def _word_dot(w: Word, name: str) -> list[str]:
    lines = [f"  subgraph cluster_{name} {{", '    label="";']
    lts, prs = w.explicit()
    node = {}
    for pos, (lt, slots) in enumerate(zip(w.letters, lts)):
        center = f"{name}_l{pos}"
        shape = "doublecircle" if lt.green_node else "point"
        tag = lt.tag or ""
        lines.append(f'    {center} [shape={shape}, label="", xlabel="{tag}"];')
        for j, s in enumerate(slots):
            me = f"{name}_l{pos}_s{j}"
            node[(pos, j)] = me
            lines.append(f"    {me} [{_leaf_attrs(s.hat, format_freq(s.freq))}];")
            lines.append(f"    {center} -> {me} [dir=none, {_edge_attrs(EdgeKind.T2, s.conj)}];")
    for cls, a, b in prs:
        lines.append(
            f'    {node[a]} -> {node[b]} [dir=none, style=dashed, color={PAIR_COLOR}, constraint=false, label="p{cls}"];'
        )
    lines.append("  }")
    return lines


def to_dot(x: TreePoly | PairedTree | DecoratedTree | WordPoly | Word | Letter) -> str:
    """One cluster per tree or word term of ``x``."""
    lines = ["digraph arborify {", "  rankdir=BT;"]
    if isinstance(x, Letter):
        x = Word.of(x)
    if isinstance(x, (Word, WordPoly)):
        poly = x if isinstance(x, WordPoly) else WordPoly.single(x)
        for j, (w, _) in enumerate(poly.sorted_terms()):
            lines += _word_dot(w, f"w{j}")
    else:
        tp = x if isinstance(x, TreePoly) else TreePoly.single(x)
        for j, (pt, _) in enumerate(tp.sorted_terms()):
            lines += _tree_dot(pt, f"t{j}")
    lines.append("}")
    return "\n".join(lines) + "\n"


__all__ = ["SCHEMA", "SchemaError", "from_json", "from_json_obj", "to_dot", "to_json", "to_json_obj"]
