"""Command-line front end: ``rv <query> --model game.json ...``.

Exit status: 0 for "yes", 1 for "no", 2 for usage or validation errors,
3 when an automaton or product exceeds the state cap.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import rverify
from .automata import DEFAULT_MAX_STATES, AutomatonTooLarge, dpw_to_hoa, ltl_to_dpw
from .io import load_model, load_profile
from .ltl import LtlSyntaxError, parse_ltl
from .model import ModelError, validate_model

EXIT_YES, EXIT_NO, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3

# witness fields shown without --witness
_BRIEF = ("winners", "deviator", "coalition", "player")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rv", description="Rational verification for concurrent stochastic games.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text, *, phi=False, profile=False, mode=False, model=True):
        sp = sub.add_parser(name, help=help_text)
        if model:
            sp.add_argument("--model", required=True, help="game model (JSON)")
        if phi:
            sp.add_argument("--phi", required=True, help="LTL property")
        if profile:
            sp.add_argument("--profile", required=True, help="strategy profile (JSON)")
        if mode:
            sp.add_argument("--mode", choices=("as", "nz"), default="as",
                            help="property must hold almost surely (as) or with positive probability (nz)")
        sp.add_argument("--witness", action="store_true", help="include full witness detail")
        sp.add_argument("--max-dpw-states", type=int, default=DEFAULT_MAX_STATES, metavar="N",
                        help="cap on automaton and product states")
        sp.add_argument("--format", choices=("json", "text"), default="json")
        return sp

    add("validate", "check a model file")
    add("membership", "is the profile a Nash equilibrium?", profile=True)
    add("e-nash", "does some equilibrium satisfy the property?", phi=True, mode=True)
    add("a-nash", "do all equilibria satisfy the property?", phi=True, mode=True)
    add("non-emptiness", "does any equilibrium exist?")
    add("e-core", "does some core profile satisfy the property?", phi=True, mode=True)
    add("a-core", "do all core profiles satisfy the property?", phi=True, mode=True)
    add("core-membership", "is the profile in the core?", profile=True)
    bd = add("beneficial-deviation", "is the deviation beneficial for the coalition?", profile=True)
    bd.add_argument("--coalition", required=True, help="comma-separated player names")
    bd.add_argument("--deviation", required=True, help="strategies of the coalition (JSON)")
    add("compile-dpw", "print the parity automaton of a formula in HOA format", phi=True, model=False)
    return p


def _render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))
    lines = [f"answer: {doc['answer']}"]
    for key in sorted(doc.get("witness", {})):
        value = doc["witness"][key]
        if isinstance(value, list):
            value = ", ".join(map(str, value)) or "(none)"
        lines.append(f"{key}: {value}")
    for d in doc.get("diagnostics", []):
        lines.append(f"diagnostic: {d}")
    return "\n".join(lines)


def _run(args) -> tuple[dict, int]:
    cap = args.max_dpw_states
    if args.command == "compile-dpw":
        hoa = dpw_to_hoa(ltl_to_dpw(parse_ltl(args.phi), cap), name=args.phi)
        return {"hoa": hoa}, EXIT_YES
    g = load_model(args.model)
    if args.command == "validate":
        problems = validate_model(g)
        return {"answer": "yes" if not problems else "no", "diagnostics": problems}, (EXIT_YES if not problems else EXIT_USAGE)
    phi = parse_ltl(args.phi) if getattr(args, "phi", None) else None
    if args.command == "membership":
        v = rverify.membership(g, load_profile(args.profile), cap)
    elif args.command == "e-nash":
        v = rverify.e_nash(g, phi, args.mode, cap)
    elif args.command == "a-nash":
        v = rverify.a_nash(g, phi, args.mode, cap)
    elif args.command == "non-emptiness":
        v = rverify.non_emptiness(g, cap)
    elif args.command == "e-core":
        v = rverify.e_core(g, phi, args.mode, cap)
    elif args.command == "a-core":
        v = rverify.a_core(g, phi, args.mode, cap)
    elif args.command == "core-membership":
        v = rverify.core_membership(g, load_profile(args.profile), cap)
    elif args.command == "beneficial-deviation":
        coalition = [c.strip() for c in args.coalition.split(",") if c.strip()]
        v = rverify.beneficial_deviation(g, load_profile(args.profile), coalition, load_profile(args.deviation), cap)
    else:  # pragma: no cover - argparse rejects unknown commands
        raise ModelError(f"unknown command {args.command}")
    doc = v.to_dict()
    if not args.witness:
        doc["witness"] = {k: x for k, x in doc["witness"].items() if k in _BRIEF}
    return doc, EXIT_YES if v.answer else EXIT_NO


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc, code = _run(args)
    except AutomatonTooLarge as e:
        print(f"rv: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ModelError, LtlSyntaxError) as e:
        print(f"rv: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if "hoa" in doc:
        sys.stdout.write(doc["hoa"])
    else:
        print(_render(doc, args.format))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
