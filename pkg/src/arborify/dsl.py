"""Text syntax for tree and word polynomials (``.arb`` files).

A file holds optional frequency bindings, one expression and pairing stanzas::

    // family one, first tree
    let k1 = (1,0)
    I[t1,0]((0,1)) I[t1,0](k1)#a I[t2,1]((1,0); I[t1,0]((1,1)) I[t1,1]((1,1)) I[t1,1](k1)#b)
    pair2: (#a, #b)

Trees: ``I[t1,c](freq)`` and ``Ihat[t1,c](freq)`` are leaves, ``I[t2,c](freq; factors)`` is
an inner edge (``_`` lets the frequency be inferred). Juxtaposition is the tree product.
Words: ``S[0 (1,0); 1^ (2,0)#h]#tag`` is a letter with slots ``conj [^] freq [#handle]``;
``S@0[...]`` marks a green node. ``1`` is the unit. Terms are joined with ``+`` or ``-``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Sequence

from .coeff import ExactCoeff, format_coeff
from .common import ArborifyError, DecorationError, Freq, KirchhoffError, PairingError
from .trees import DecoratedTree, EdgeDecoration, EdgeKind, PairedTree, Planted, TreePoly, kirchhoff_freq
from .words import Letter, Slot, Word, WordPoly


@dataclass(frozen=True)
class SourceSpan:
    begin: int
    end: int
    line: int
    column: int

    def __post_init__(self) -> None:
        if self.begin > self.end:
            raise ValueError("span begin must not exceed end")


class DslError(ArborifyError):
    """Syntax or semantic error located in the source text."""

    def __init__(self, message: str, span: SourceSpan | None = None) -> None:
        self.message = message
        self.span = span
        where = f"{span.line}:{span.column}: " if span else ""
        super().__init__(where + message)


# -- lexer ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<comment>//[^\n]*)|(?P<nl>\n)|(?P<int>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<punct>[\[\](),;+\-/#^@:=])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # int, ident, punct, nl, eof
    text: str
    span: SourceSpan


def tokenize(text: str) -> list[Token]:
    data = text.encode("utf-8")
    out: list[Token] = []
    pos, line, col = 0, 1, 1
    # byte offsets follow the utf-8 encoding; character scanning is on the str
    byte = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            span = SourceSpan(byte, byte + len(text[pos].encode("utf-8")), line, col)
            raise DslError(f"unexpected character {text[pos]!r}", span)
        s = m.group()
        nbytes = len(s.encode("utf-8"))
        span = SourceSpan(byte, byte + nbytes, line, col)
        kind = m.lastgroup
        if kind in ("int", "ident", "punct"):
            out.append(Token(kind, s, span))
        elif kind == "nl":
            out.append(Token("nl", s, span))
        pos = m.end()
        byte += nbytes
        if kind == "nl":
            line, col = line + 1, 1
        else:
            col += len(s)
    out.append(Token("eof", "", SourceSpan(len(data), len(data), line, col)))
    return out


# -- parser core ---------------------------------------------------------------------

Value = int | Freq
_STANZAS = {"let", "pair1", "pair2"}


Alternatives = list[tuple[ExactCoeff, list]]  # coefficient times a list of factors


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = tokenize(text)
        self.i = 0
        self.env: dict[str, Value] = {}
        self.pairs: dict[int, list[tuple[str, str, SourceSpan]]] = {1: [], 2: []}

    # token helpers
    def peek(self, skip_nl: bool = False) -> Token:
        j = self.i
        if skip_nl:
            while self.toks[j].kind == "nl":
                j += 1
        return self.toks[j]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("punct", "ident") and t.text == text

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text or t.kind not in ("punct", "ident"):
            raise DslError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.span)
        return t

    def skip_nl(self) -> None:
        while self.peek().kind == "nl":
            self.i += 1

    def expr_nl(self) -> None:
        """Inside an expression a line break continues unless a stanza or the end follows."""
        t = self.peek(skip_nl=True)
        if t.kind == "eof" or (t.kind == "ident" and t.text in _STANZAS):
            return
        self.skip_nl()

    def error(self, msg: str, tok: Token | None = None) -> DslError:
        tok = tok or self.peek()
        return DslError(msg, tok.span)

    # statements
    def parse_file(self, atom: Callable[[], Alternatives], starts: Callable[[], bool]):
        expr = None
        expr_tok = None
        while True:
            self.skip_nl()
            t = self.peek()
            if t.kind == "eof":
                break
            if t.kind == "ident" and t.text == "let":
                self.parse_let()
            elif t.kind == "ident" and t.text in ("pair1", "pair2") and self.toks[self.i + 1].text == ":":
                self.parse_pairs()
            else:
                if expr is not None:
                    raise self.error("only one expression is allowed per file")
                expr_tok = t
                expr = self.parse_expr(atom, starts)
                if self.peek().kind not in ("nl", "eof"):
                    raise self.error(f"unexpected {self.peek().text!r}")
        if expr is None:
            raise DslError("no expression found", self.peek().span)
        return expr, expr_tok

    def parse_let(self) -> None:
        self.expect("let")
        name = self.next()
        if name.kind != "ident":
            raise DslError("expected a name after 'let'", name.span)
        self.expect("=")
        self.env[name.text] = self.parse_fexpr()
        if self.peek().kind not in ("nl", "eof"):
            raise self.error("expected end of line after binding")

    def parse_pairs(self) -> None:
        cls = 1 if self.next().text == "pair1" else 2
        self.expect(":")
        while self.at("("):
            start = self.next()
            a = self.parse_tag()
            self.expect(",")
            b = self.parse_tag()
            self.expect(")")
            self.pairs[cls].append((a, b, start.span))
        if self.peek().kind not in ("nl", "eof"):
            raise self.error("expected '(#a, #b)' or end of line in pairing stanza")

    def parse_tag(self) -> str:
        self.expect("#")
        t = self.next()
        if t.kind not in ("ident", "int"):
            raise DslError("expected a tag name after '#'", t.span)
        return t.text

    def opt_tag(self) -> tuple[str, SourceSpan] | None:
        if self.at("#"):
            span = self.peek().span
            return self.parse_tag(), span
        return None

    # frequency expressions
    def parse_fexpr(self) -> Value:
        sign = 1
        if self.at("-"):
            self.next()
            sign = -1
        acc = _scale(self.parse_fatom(), sign)
        while self.at("+") or self.at("-"):
            op = self.next()
            rhs = self.parse_fatom()
            acc = _vadd(acc, _scale(rhs, 1 if op.text == "+" else -1), op.span)
        return acc

    def parse_fatom(self) -> Value:
        t = self.next()
        if t.kind == "int":
            return int(t.text)
        if t.kind == "ident":
            if t.text not in self.env:
                raise DslError(f"unbound frequency name {t.text!r}", t.span)
            return self.env[t.text]
        if t.text == "(":
            items = [self.parse_fexpr()]
            while self.at(","):
                self.next()
                items.append(self.parse_fexpr())
            self.expect(")")
            if len(items) == 1 and isinstance(items[0], tuple):
                return items[0]
            if any(isinstance(x, tuple) for x in items):
                raise DslError("frequency components must be integers", t.span)
            return tuple(items)  # type: ignore[arg-type]
        raise DslError(f"expected a frequency, found {t.text or 'end of input'!r}", t.span)

    def parse_freq(self) -> Freq:
        v = self.parse_fatom()
        return (v,) if isinstance(v, int) else v

    # coefficients
    def try_coeff(self) -> ExactCoeff | None:
        start = self.i
        c = self._coeff_body()
        if c is None:
            self.i = start
            return None
        if self.at("mu"):
            self.next()
            self.expect("^")
            t = self.next()
            if t.kind != "int" or int(t.text) % 2:
                raise DslError("powers of mu must be even integers", t.span)
            c = c * ExactCoeff(1, 0, int(t.text) // 2)
        return c

    def _coeff_body(self) -> ExactCoeff | None:
        if self.at("mu"):
            return ExactCoeff.one()
        if self.at("("):
            start = self.i
            self.next()
            re_ = self._rational(signed=True)
            if re_ is not None and (self.at("+") or self.at("-")):
                sgn = 1 if self.next().text == "+" else -1
                im = self._rational(signed=False) or Fraction(1)
                if self.at("i"):
                    self.next()
                    if self.at(")"):
                        self.next()
                        return ExactCoeff(re_, sgn * im)
            self.i = start
            return None
        neg = False
        if self.at("-"):
            self.next()
            neg = True
        q = self._rational(signed=False)
        imag = False
        if self.at("i"):
            self.next()
            imag = True
        if q is None and not imag:
            if neg:
                return ExactCoeff(-1)
            return None
        q = Fraction(1) if q is None else q
        q = -q if neg else q
        return ExactCoeff(0, q) if imag else ExactCoeff(q)

    def _rational(self, signed: bool) -> Fraction | None:
        start = self.i
        sgn = 1
        if signed and self.at("-"):
            self.next()
            sgn = -1
        t = self.peek()
        if t.kind != "int":
            self.i = start
            return None
        self.next()
        q = Fraction(int(t.text))
        if self.at("/"):
            self.next()
            d = self.next()
            if d.kind != "int" or int(d.text) == 0:
                raise DslError("expected a nonzero denominator", d.span)
            q /= int(d.text)
        return sgn * q

    # expressions
    def parse_expr(self, atom: Callable[[], Alternatives], starts: Callable[[], bool]) -> Alternatives:
        out: Alternatives = []
        sign = 1
        if self.at("-"):
            self.next()
            sign = -1
        while True:
            for c, fs in self.parse_term(atom, starts):
                out.append((c * sign, fs))
            self.expr_nl()
            if self.at("+") or self.at("-"):
                sign = 1 if self.next().text == "+" else -1
                self.expr_nl()
                continue
            return out

    def parse_term(self, atom, starts) -> Alternatives:
        tok = self.peek()
        c = self.try_coeff()
        alts: Alternatives = [(c or ExactCoeff.one(), [])]
        n = 0
        while True:
            if self.at("(") and not self._paren_is_coeff():
                self.next()
                self.skip_nl()
                inner = self.parse_expr(atom, starts)
                self.skip_nl()
                self.expect(")")
            elif starts():
                inner = atom()
            else:
                break
            alts = [(ca * cb, fa + fb) for ca, fa in alts for cb, fb in inner]
            n += 1
        if c is None and n == 0:
            raise self.error(f"expected a term, found {tok.text or 'end of input'!r}", tok)
        return alts

    def _paren_is_coeff(self) -> bool:
        start = self.i
        ok = self._coeff_body() is not None
        self.i = start
        return ok


def _scale(v: Value, s: int) -> Value:
    return s * v if isinstance(v, int) else tuple(s * x for x in v)


def _vadd(a: Value, b: Value, span: SourceSpan) -> Value:
    if isinstance(a, int) and isinstance(b, int):
        return a + b
    a = (a,) if isinstance(a, int) else a
    b = (b,) if isinstance(b, int) else b
    if len(a) != len(b):
        raise DslError(f"dimension mismatch: {a} vs {b}", span)
    return tuple(x + y for x, y in zip(a, b))


# -- trees ------------------------------------------------------------------------------


def _tree_atom(p: _Parser) -> Callable[[], Alternatives]:
    def atom() -> Alternatives:
        head = p.next()
        hat = head.text == "Ihat"
        p.expect("[")
        kt = p.next()
        if kt.text not in ("t1", "t2"):
            raise DslError(f"edge kind must be t1 or t2, found {kt.text!r}", kt.span)
        p.expect(",")
        ct = p.next()
        if ct.text not in ("0", "1"):
            raise DslError(f"conj must be 0 or 1, found {ct.text!r}", ct.span)
        p.expect("]")
        p.expect("(")
        try:
            decor = EdgeDecoration(EdgeKind.T1 if kt.text == "t1" else EdgeKind.T2, int(ct.text), hat)
        except DecorationError as e:
            raise DslError(str(e), head.span) from None
        f: Freq | None
        if p.at("_"):
            p.next()
            f = None
        else:
            f = p.parse_freq()
        kids: Alternatives = [(ExactCoeff.one(), [])]
        if p.at(";"):
            p.next()
            p.skip_nl()
            n = 0
            while not p.at(")"):
                if p.at("(") and not p._paren_is_coeff():
                    p.next()
                    p.skip_nl()
                    inner = p.parse_expr(atom, starts)
                    p.skip_nl()
                    p.expect(")")
                elif starts():
                    inner = atom()
                else:
                    raise p.error(f"expected a subtree, found {p.peek().text!r}")
                kids = [(ca * cb, fa + fb) for ca, fa in kids for cb, fb in inner]
                n += 1
                p.skip_nl()
            if n == 0:
                raise p.error("expected at least one subtree after ';'")
        end = p.expect(")")
        tag = p.opt_tag()
        span = SourceSpan(head.span.begin, end.span.end, head.span.line, head.span.column)
        if decor.kind is EdgeKind.T1:
            if kids != [(ExactCoeff.one(), [])]:
                raise DslError("a t1 edge cannot carry subtrees", span)
            if f is None:
                raise DslError("a leaf needs an explicit frequency", span)
            return [(ExactCoeff.one(), [Planted(decor, f, (), tag[0] if tag else None)])]
        if kids == [(ExactCoeff.one(), [])]:
            raise DslError("a t2 edge needs subtrees", span)
        if tag:
            raise DslError("tags are only allowed on leaves", tag[1])
        out: Alternatives = []
        for c, children in kids:
            try:
                fr = kirchhoff_freq(decor, children) if f is None else f
                out.append((c, [Planted(decor, fr, tuple(children))]))
            except (KirchhoffError, DecorationError, ValueError) as e:
                raise DslError(f"invalid node: {e}", span) from None
        return out

    def starts() -> bool:
        return p.at("I") or p.at("Ihat")

    return atom, starts  # type: ignore[return-value]


def _tree_tags(branches: Sequence[Planted]) -> list[Hashable]:
    return [lf.label for b in branches for lf in b.leaves() if lf.label is not None]


def _resolve_pairs(p: _Parser, tags_of_term: list[Hashable]) -> tuple[list, list]:
    present = set(tags_of_term)
    if len(present) != len(tags_of_term):
        dup = next(t for t in tags_of_term if tags_of_term.count(t) > 1)
        raise DslError(f"tag #{dup} occurs twice in one term")
    out: dict[int, list] = {1: [], 2: []}
    for cls in (1, 2):
        for a, b, span in p.pairs[cls]:
            if a in present and b in present:
                out[cls].append((a, b))
            elif a in present or b in present:
                missing = b if a in present else a
                raise DslError(f"unknown tag #{missing} (its partner is in another term)", span)
    return out[1], out[2]


def _check_all_pairs_used(p: _Parser, used: set[tuple[str, str]]) -> None:
    for cls in (1, 2):
        for a, b, span in p.pairs[cls]:
            if (a, b) not in used:
                raise DslError(f"unknown tag in pair (#{a}, #{b})", span)


def parse_tree(text: str) -> TreePoly:
    """Parse a tree polynomial with its pairings; nodes are Kirchhoff-checked."""
    p = _Parser(text)
    atom, starts = _tree_atom(p)
    alts, tok = p.parse_file(atom, starts)
    out = TreePoly()
    used: set[tuple[str, str]] = set()
    for c, branches in alts:
        t = DecoratedTree(tuple(branches))
        c1, c2 = _resolve_pairs(p, _tree_tags(branches))
        used.update(c1)
        used.update(c2)
        try:
            pt = PairedTree.from_labels(t, class2=c2, class1=c1)
        except PairingError as e:
            raise DslError(str(e), tok.span) from None
        out = out + TreePoly({_strip_labels(pt): c})
    _check_all_pairs_used(p, used)
    return out


def _strip_labels(pt: PairedTree) -> PairedTree:
    t = DecoratedTree(tuple(b.relabel(lambda lf: None) for b in pt.tree.branches))
    return PairedTree(t, pt.pairing)


# -- tree printer ---------------------------------------------------------------------------


def format_freq(f: Freq) -> str:
    return "(" + ",".join(str(x) for x in f) + ")"


def _print_planted(p: Planted, tag_of: dict[int, str]) -> str:
    d = p.decor
    head = f"{'Ihat' if d.hat else 'I'}[{d.kind},{d.conj}]"
    if p.is_leaf:
        tag = tag_of.get(p.label)
        return f"{head}({format_freq(p.freq)})" + (f"#{tag}" if tag else "")
    kids = " ".join(_print_planted(c, tag_of) for c in p.children)
    return f"{head}({format_freq(p.freq)}; {kids})"


def _term_text(c: ExactCoeff, body: str) -> str:
    if not body:
        return format_coeff(c)
    if c == ExactCoeff.one():
        return body
    if c == ExactCoeff(-1):
        return "-1 " + body
    return f"{format_coeff(c)} {body}"


def _join_terms(terms: list[str]) -> str:
    return " + ".join(terms) if terms else "0"


def print_tree(t: TreePoly | PairedTree | DecoratedTree) -> str:
    """Canonical text: terms in canonical order, paired leaves tagged ``#x1, #x2, ...``."""
    poly = _as_treepoly(t)
    counter = itertools.count(1)
    terms, pairs = [], {1: [], 2: []}
    for pt, c in poly.sorted_terms():
        lt = pt.labelled()
        tag_of: dict[int, str] = {}
        for lid in sorted(pt.pairing.paired_ids()):
            tag_of[lid] = f"x{next(counter)}"
        for cls, (a, b) in pt.pairing.pairs():
            pairs[cls].append((tag_of[a], tag_of[b]))
        body = " ".join(_print_planted(b, tag_of) for b in lt.branches)
        terms.append(_term_text(c, body))
    return _with_stanzas(_join_terms(terms), pairs)


def _with_stanzas(expr: str, pairs: dict[int, list[tuple[str, str]]]) -> str:
    lines = [expr]
    for cls in (1, 2):
        if pairs[cls]:
            ps = sorted(pairs[cls], key=lambda ab: (_tag_num(ab[0]), _tag_num(ab[1])))
            lines.append(f"pair{cls}: " + " ".join(f"(#{a}, #{b})" for a, b in ps))
    return "\n".join(lines) + "\n"


def _tag_num(tag: str) -> int:
    return int(tag[1:])


def _as_treepoly(t) -> TreePoly:
    if isinstance(t, TreePoly):
        return t
    return TreePoly.single(t)


# -- words -------------------------------------------------------------------------------


@dataclass
class _RawLetter:
    slots: list[tuple[Slot, str | None, SourceSpan]]
    green: bool
    tag: str | None


def _word_atom(p: _Parser):
    def atom() -> Alternatives:
        head = p.expect("S")
        green = False
        if p.at("@"):
            p.next()
            z = p.next()
            if z.text != "0":
                raise DslError("only '@0' (time pinned at 0) is supported", z.span)
            green = True
        p.expect("[")
        slots = []
        while True:
            ct = p.next()
            if ct.text not in ("0", "1"):
                raise DslError(f"slot conj must be 0 or 1, found {ct.text!r}", ct.span)
            hat = False
            if p.at("^"):
                p.next()
                hat = True
            f = p.parse_freq()
            tag = p.opt_tag()
            slots.append((Slot(int(ct.text), hat, f), tag[0] if tag else None, ct.span))
            if p.at(";"):
                p.next()
                continue
            break
        p.expect("]")
        ltag = p.opt_tag()
        if len({len(s.freq) for s, _, _ in slots}) > 1:
            raise DslError("slot frequency dimensions differ", head.span)
        return [(ExactCoeff.one(), [_RawLetter(slots, green, ltag[0] if ltag else None)])]

    def starts() -> bool:
        return p.at("S")

    return atom, starts


def parse_word(text: str) -> WordPoly:
    """Parse a word polynomial; pair stanzas refer to slot handles."""
    p = _Parser(text)
    atom, starts = _word_atom(p)
    alts, tok = p.parse_file(atom, starts)
    out = WordPoly()
    used: set[tuple[str, str]] = set()
    for c, letters in alts:
        handles = [h for lt in letters for _, h, _ in lt.slots if h is not None]
        c1, c2 = _resolve_pairs(p, handles)
        used.update(c1)
        used.update(c2)
        counter = itertools.count()
        hl, hat_of = [], {}
        for lt in letters:
            row = []
            for s, h, _ in lt.slots:
                key = h if h is not None else ("anon", next(counter))
                hat_of[key] = s.hat
                row.append((s, key))
            hl.append(row)
        for a, b in c1:
            if not (hat_of[a] or hat_of[b]):
                raise DslError(f"pair1 (#{a}, #{b}) needs a hat end", tok.span)
        for a, b in c2:
            if hat_of[a] or hat_of[b]:
                raise DslError(f"pair2 (#{a}, #{b}) cannot have a hat end", tok.span)
        try:
            w = Word.from_handles(hl, c1 + c2, [lt.green for lt in letters], [lt.tag for lt in letters])
        except PairingError as e:
            raise DslError(str(e), tok.span) from None
        out.add_term(w, c)
    _check_all_pairs_used(p, used)
    return out


def _print_letter(lt: Letter, slots: list[Slot], tags: dict[int, str]) -> str:
    parts = []
    for j, s in enumerate(slots):
        t = tags.get(j)
        parts.append(f"{s.conj}{'^' if s.hat else ''} {format_freq(s.freq)}" + (f"#{t}" if t else ""))
    head = "S@0" if lt.green_node else "S"
    return f"{head}[{'; '.join(parts)}]" + (f"#{lt.tag}" if lt.tag else "")


def print_word(w: WordPoly | Word) -> str:
    """Canonical text of a word polynomial; paired slots are tagged ``#x1, #x2, ...``."""
    poly = w if isinstance(w, WordPoly) else WordPoly.single(w)
    counter = itertools.count(1)
    terms, pairs = [], {1: [], 2: []}
    for word, c in poly.sorted_terms():
        lts, prs = word.explicit()
        ends = sorted({e for _, a, b in prs for e in (a, b)})
        name = {e: f"x{next(counter)}" for e in ends}
        for cls, a, b in prs:
            pairs[cls].append((name[a], name[b]))
        body = " ".join(
            _print_letter(lt, lts[pos], {j: name[(pos, j)] for j in range(len(lts[pos])) if (pos, j) in name})
            for pos, lt in enumerate(word.letters)
        )
        terms.append(_term_text(c, body))
    return _with_stanzas(_join_terms(terms), pairs)


# -- dispatch -------------------------------------------------------------------------------


def detect_kind(text: str) -> str:
    """``'tree'`` or ``'word'`` by the first edge or letter literal in the expression."""
    for tok in tokenize(text):
        if tok.kind == "ident" and tok.text in ("I", "Ihat"):
            return "tree"
        if tok.kind == "ident" and tok.text == "S":
            return "word"
    return "tree"


def parse_any(text: str) -> TreePoly | WordPoly:
    return parse_tree(text) if detect_kind(text) == "tree" else parse_word(text)


def print_any(x) -> str:
    return print_word(x) if isinstance(x, (Word, WordPoly)) else print_tree(x)


__all__ = [
    "DslError",
    "SourceSpan",
    "detect_kind",
    "format_freq",
    "parse_any",
    "parse_tree",
    "parse_word",
    "print_any",
    "print_tree",
    "print_word",
    "tokenize",
]
