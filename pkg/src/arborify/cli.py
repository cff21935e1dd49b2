"""Command line entry point: ``arborify {parse,arborify,shuffle,eval,verify,render}``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Any, Sequence

import numpy as np

from . import __version__
from .arborification import arborify, arborify_cp
from .common import ArborifyError, Model
from .dsl import detect_kind, parse_any, parse_tree, parse_word, print_any
from .evaluation import EvalParams, checked, complex_normal, eval_tree, eval_wordpoly
from .serialize import to_dot, to_json_obj
from .trees import TreePoly, validate_pairing
from .verify import CHECKS, Check
from .words import WordPoly, validate_word

REPORT_SCHEMA = "arborify-report/v1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_STRICT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--json", action="store_true", help="print a machine-readable report")
    p.add_argument("--strict", action="store_true", help="treat numeric warnings as errors (exit 3)")
    p.add_argument("--timing", action="store_true", help="include wall time in the report")


def _input(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", nargs="?", help=".arb file ('-' for stdin)")
    p.add_argument("-e", "--expr", help="inline expression instead of a file")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="arborify", description="Decorated trees, words and arborification.")
    ap.add_argument("--version", action="version", version=f"arborify {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("parse", help="parse and print in canonical form")
    _input(p)
    p.add_argument("--model", choices=["nls", "wave"], help="also validate pairings and letters for this model")
    p.add_argument("--allow-wide-letters", action="store_true", help="accept merged wave letters of arity 6 and 8")
    _common(p)

    p = sub.add_parser("arborify", help="map a tree polynomial to words")
    _input(p)
    p.add_argument("--model", choices=["nls", "wave"], required=True)
    p.add_argument("--via", choices=["recursive", "coproduct", "both"], default="recursive")
    _common(p)

    p = sub.add_parser("shuffle", help="shuffle product of two word polynomials")
    p.add_argument("files", nargs="*", help="two .arb word files")
    p.add_argument("-e", "--expr", action="append", default=[], help="inline word expression (twice)")
    _common(p)

    p = sub.add_parser("eval", help="evaluate a tree or word polynomial")
    _input(p)
    p.add_argument("--model", choices=["nls", "wave"], required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--L", type=float, default=1.0)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--quad", type=int, default=64)
    p.add_argument("--seed", type=int, default=0, help="seed for the eta draws of unpaired leaves")
    p.add_argument("--weight", choices=["gaussian", "rational"], default="gaussian")
    p.add_argument("--tol", type=float, default=1e-9, help="quadrature self-consistency tolerance")
    p.add_argument("--phase-2pi", action="store_true", help="use (2 pi k / L)^2 as the phase frequency")
    _common(p)

    p = sub.add_parser("verify", help="run named checks")
    p.add_argument("checks", nargs="+", choices=sorted(CHECKS) + ["all"])
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quad", type=int, default=64)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--t", type=float, default=1.0)
    _common(p)

    p = sub.add_parser("render", help="export diagrams")
    _input(p)
    p.add_argument("--dot", action="store_true", required=True, help="Graphviz DOT output")
    _common(p)
    return ap


def _read(args: argparse.Namespace) -> str:
    if args.expr is not None:
        return args.expr
    if args.file is None:
        raise UsageError("give an input file or -e EXPR")
    if args.file == "-":
        return sys.stdin.read()
    try:
        with open(args.file, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {args.file}: {e.strerror}") from None


def _eta(seed: int):
    """Deterministic eta per frequency: draws keyed by the frequency and the seed."""
    cache: dict[tuple[int, ...], complex] = {}

    def eta(k):
        k = tuple(k)
        if k not in cache:
            rng = np.random.default_rng([seed & 0xFFFFFFFF] + [x & 0xFFFFFFFF for x in k] + [len(k)])
            cache[k] = complex(complex_normal(rng, 1)[0])
        return cache[k]

    return eta


def _result_text(x) -> str:
    return print_any(x)


# -- commands -------------------------------------------------------------------------


def cmd_parse(args) -> tuple[list[Check], dict[str, Any], str]:
    x = parse_any(_read(args))
    if args.model:
        model = Model.parse(args.model)
        if isinstance(x, WordPoly):
            for w, _ in x:
                validate_word(w, model, allow_wide_letters=args.allow_wide_letters)
        else:
            for pt, _ in x:
                validate_pairing(pt.tree, pt.pairing, model)
                if not pt.tree.models_ok(model):
                    raise ArborifyError("wave trees carry conj = 0 only")
    return [], {"result": to_json_obj(x)}, _result_text(x)


def cmd_arborify(args) -> tuple[list[Check], dict[str, Any], str]:
    tp = parse_tree(_read(args))
    model = Model.parse(args.model)
    rec = cp = None
    if args.via in ("recursive", "both"):
        rec = arborify(tp, model)
    if args.via in ("coproduct", "both"):
        cp = WordPoly()
        for pt, c in tp:
            cp = cp + arborify_cp(pt, model).scale(c)
    checks = []
    if args.via == "both":
        same = rec == cp
        checks.append(Check("recursive-vs-coproduct", "pass" if same else "fail", 0.0 if same else 1.0, 0.0))
    outs = [p for p in (rec, cp) if p is not None]
    text = "".join(_result_text(p) for p in outs)
    return checks, {"result": [to_json_obj(p) for p in outs]}, text


def cmd_shuffle(args) -> tuple[list[Check], dict[str, Any], str]:
    texts = list(args.expr)
    for f in args.files:
        try:
            with open(f, encoding="utf-8") as fh:
                texts.append(fh.read())
        except OSError as e:
            raise UsageError(f"cannot read {f}: {e.strerror}") from None
    if len(texts) != 2:
        raise UsageError("shuffle needs exactly two word inputs")
    a, b = (parse_word(t) for t in texts)
    r = a.shuffle(b)
    return [], {"result": to_json_obj(r)}, _result_text(r)


def cmd_eval(args) -> tuple[list[Check], dict[str, Any], str]:
    text = _read(args)
    model = Model.parse(args.model)
    params = EvalParams(t=args.t, d=1, L=args.L, mu=args.mu, N=args.N, quad_order=args.quad,
                        seed=args.seed, weight=args.weight, phase_2pi=args.phase_2pi)
    eta = _eta(args.seed)
    if detect_kind(text) == "tree":
        tp: TreePoly = parse_tree(text)

        def fn(order, panels):
            total = 0j
            for pt, c in tp.sorted_terms():
                total += c.to_complex(params.mu) * eval_tree(pt, params, model, eta=eta, order=order, panels=panels)
            return total
    else:
        wp = parse_word(text)

        def fn(order, panels):
            return eval_wordpoly(wp, params, model, eta=eta, order=order, panels=panels)

    cv = checked(fn, params, tol=args.tol)
    resid = abs(cv.value - cv.coarse)
    chk = Check("quadrature", "pass" if cv.converged else "warn", resid, args.tol, f"panels={cv.panels}")
    v = cv.value
    return [chk], {"value": {"re": v.real, "im": v.imag}}, f"{v.real:.17g} {v.imag:+.17g}i\n"


def cmd_verify(args) -> tuple[list[Check], dict[str, Any], str]:
    names = sorted(CHECKS) if "all" in args.checks else list(dict.fromkeys(args.checks))
    checks: list[Check] = []
    for name in names:
        kw: dict[str, Any] = {"seed": args.seed, "quad": args.quad, "t": args.t}
        if args.trials is not None:
            kw["trials"] = args.trials
        if args.tol is not None:
            kw["tol"] = args.tol
        if args.N is not None:
            kw["N"] = args.N
        checks.extend(CHECKS[name](**kw))
    return checks, {}, ""


def cmd_render(args) -> tuple[list[Check], dict[str, Any], str]:
    x = parse_any(_read(args))
    dot = to_dot(x)
    return [], {"dot": dot}, dot


COMMANDS = {
    "parse": cmd_parse,
    "arborify": cmd_arborify,
    "shuffle": cmd_shuffle,
    "eval": cmd_eval,
    "verify": cmd_verify,
    "render": cmd_render,
}


def _table(checks: list[Check]) -> str:
    if not checks:
        return ""
    w = max(len(c.name) for c in checks)
    lines = [f"{c.status.upper():4}  {c.name:<{w}}  residual={c.residual:.3e}  tol={c.tol:.1e}  {c.detail}".rstrip()
             for c in checks]
    n_pass = sum(c.status != "fail" for c in checks)
    lines.append(f"{n_pass}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
        start = time.perf_counter()
        checks, extra, text = COMMANDS[args.command](args)
        elapsed = time.perf_counter() - start
    except UsageError as e:
        print(f"arborify: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ArborifyError, ValueError) as e:
        print(f"arborify: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    failed = any(c.status == "fail" for c in checks)
    warned = any(c.status == "warn" for c in checks)
    code = EXIT_FAIL if failed else (EXIT_STRICT if warned and args.strict else EXIT_OK)
    if args.json:
        report = {
            "schema": REPORT_SCHEMA,
            "command": argv,
            "seed": getattr(args, "seed", None),
            "checks": [c.to_json() for c in checks],
            "exit_code": code,
            **extra,
        }
        if args.timing:
            report["wall_time_s"] = elapsed
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
        sys.stdout.write(_table(checks))
        if args.timing:
            sys.stdout.write(f"wall time: {elapsed:.3f} s\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
