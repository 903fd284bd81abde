"""Command-line interface: ``spinelab <command> ...``.

Output is JSON with sorted keys on stdout (DOT with ``--dot``).  Domain
errors exit with status 1 and a JSON diagnostic; usage errors exit with 2.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from typing import List, Optional

from . import dsl
from . import eftheory as ef
from .analyst import TrivialGroup, check_equiv, propose_augment, verify_augment
from .group_model import before_all
from .multiorder import (
    LEFT, RIGHT, MultiOrderError, augment_witness, augmentable, bounded, convex_hull, cuts,
    left_hull, right_hull, selected_order,
)
from .presentation import PresentationError
from .spine import (
    KINDS, DivisibleElement, apply_map, is_point, points_at, sort_name, spine_items, spines,
)

DOMAIN_ERRORS = (PresentationError, dsl.DslSyntaxError, MultiOrderError, TrivialGroup,
                 ef.RankError, DivisibleElement, ValueError)


def _primes(text: Optional[str]) -> tuple:
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise PresentationError("primes", f"malformed prime list {text!r}") from None


def load_schema(name: str) -> dict:
    return json.loads(resources.files("spinelab").joinpath("schemas", f"{name}.json").read_text())


def _load_json(path: str) -> dict:
    import jsonschema

    with open(path) as fh:
        doc = json.load(fh)
    kind = str(doc.get("schema", "")).split("/")[1:2]
    if not kind:
        raise PresentationError("schema", "JSON input needs a 'schema' field")
    try:
        jsonschema.validate(doc, load_schema(kind[0]))
    except (jsonschema.ValidationError, FileNotFoundError) as e:
        raise PresentationError("schema", str(e).splitlines()[0]) from None
    return doc


def _group(args, text: Optional[str]):
    if text is None and args.json_file:
        return dsl.group_from_json(_load_json(args.json_file)).with_universe(_primes(args.primes))
    if text is None:
        raise PresentationError("argument", "a group is required")
    return dsl.parse_group(text, _primes(args.primes))


def _multiorder(args, text: Optional[str]):
    if text is None and args.json_file:
        return dsl.multiorder_from_json(_load_json(args.json_file))
    if text is None:
        raise PresentationError("argument", "a multi-order is required")
    return dsl.parse_multiorder(text)


def _emit(obj) -> None:
    sys.stdout.write(dsl.dumps(obj) + "\n")


# ---------------------------------------------------------------- commands

def cmd_parse(args) -> int:
    G = _group(args, args.group)
    out = {"group": dsl.group_json(G)}
    if args.element:
        out["element"] = dsl.element_json(dsl.parse_element(args.element, G))
    _emit(out)
    return 0


def _spine_points(G):
    rows = []
    for kind, c in spine_items(G):
        ell = points_at(G, c)
        if ell:
            rows.append({"cut": str(c), "family": kind,
                         "points": [dsl.point_text(p) for p in sorted(ell)]})
    return rows


def cmd_spine(args) -> int:
    G = _group(args, args.group)
    M = spines(G)
    if args.plot:
        from .plotting import plot_multiorder
        plot_multiorder(M, args.plot, dsl.serialize_group(G))
    if args.dot:
        sys.stdout.write(dsl.multiorder_dot(M))
        return 0
    initial = {}
    for p in G.primes:
        for k in KINDS:
            initial[sort_name(G, k, p)] = is_point(G, before_all(G), k, p)
    out = {"group": dsl.serialize_group(G), "spine": dsl.multiorder_json(M),
           "points": _spine_points(G), "initial_point_is_G": initial,
           "degenerate": G.trivial}
    if args.plot:
        out["plot"] = args.plot
    _emit(out)
    return 0


def cmd_eval(args) -> int:
    from .analyst import predicate_rows
    G = _group(args, args.group)
    g = dsl.parse_element(args.element, G)
    maps = {}
    for p in G.primes:
        for k in KINDS:
            try:
                maps[sort_name(G, k, p)] = str(apply_map(G, k, g, p).cut)
            except DivisibleElement:
                maps[sort_name(G, k, p)] = None
    _emit({"group": dsl.serialize_group(G), "element": dsl.serialize_element(g),
           "maps": maps, "predicates": {name: v for name, v in predicate_rows(G, g)}})
    return 0


def cmd_equiv(args) -> int:
    n = args.rank
    if args.multiorder:
        M, N = dsl.parse_multiorder(args.left), dsl.parse_multiorder(args.right)
        w = ef.distinguish(M, N, n)
        verdict = "equivalent_at_rank_n" if w is None else "distinguished"
        _emit({"verdict": verdict, "rank": n,
               "witness": None if w is None else w.to_json()})
        return 0
    G, G2 = _group(args, args.left), _group(args, args.right)
    res = check_equiv(G, G2, n)
    _emit({"verdict": res.verdict, "rank": n, "left": dsl.serialize_group(G),
           "right": dsl.serialize_group(G2),
           "witness": None if res.witness is None else res.witness.to_json()})
    return 0


def cmd_hulls(args) -> int:
    B = _multiorder(args, args.word)
    A = dsl.parse_selection(args.selection, B)
    out = {}
    for name, fn in (("convex", convex_hull), ("left", left_hull), ("right", right_hull)):
        sel = fn(B, A)
        out[name] = {"selection": dsl.selection_json(B, sel),
                     "order": dsl.multiorder_text(selected_order(B, sel))}
    out["selected"] = dsl.multiorder_text(selected_order(B, A))
    _emit(out)
    return 0


def cmd_cuts(args) -> int:
    A = _multiorder(args, args.word)
    rows = [{"cut": c.where, "satisfiable": c.satisfiable, "realized": c.realized,
             "unbounded_left_of": list(c.unbounded_left_of),
             "unbounded_right_of": list(c.unbounded_right_of)} for c in cuts(A)]
    out = {"word": dsl.multiorder_text(A), "cuts": rows}
    if not A.empty:
        out["bounded"] = {s: {"left": bounded(A, s, LEFT), "right": bounded(A, s, RIGHT)}
                          for s in A.sorts}
        out["augmentable"] = {side: augmentable(A, side) for side in (LEFT, RIGHT)}
        out["augment_witness"] = {side: dsl.multiorder_text(augment_witness(A, side))
                                  for side in (LEFT, RIGHT) if augmentable(A, side)}
    _emit(out)
    return 0


def report_json(r) -> dict:
    return {
        "schema": f"spinelab/augment_report/{dsl.SCHEMA_VERSION}",
        "side": r.side,
        "required_divisibility": {"primes": sorted(r.required_divisibility.primes),
                                  "all_primes": r.required_divisibility.all_primes,
                                  "outside_universe": r.required_divisibility.generic},
        "candidate": dsl.serialize_group(r.candidate),
        "rank_checked": r.rank_checked,
        "spine_verdict": {"verdict": r.spine_verdict, "reason": r.spine_reason,
                          "witness": None if r.witness is None else r.witness.to_json()},
        "divisibility": {"ok": r.divisibility_ok, "failing_primes": list(r.divisibility_failures)},
        "element_sampling": {"checks": len(r.element_sampling),
                             "disagreements": [list(x) for x in r.element_sampling
                                               if x[2] != x[3]]},
        "overall": r.overall,
    }


def cmd_augment(args) -> int:
    G = _group(args, args.group)
    H = dsl.parse_group(args.candidate, _primes(args.primes)) if args.candidate \
        else propose_augment(G)
    side = "infinitesimal" if args.infinitesimal else "infinite"
    r = verify_augment(H, G, args.rank, grid=args.grid, side=side)
    _emit(report_json(r))
    return 0


def cmd_examples(args) -> int:
    from .golden import run
    rows = run()
    bad = 0
    for group, name, got, want, ok in rows:
        bad += not ok
        line = f"{'PASS' if ok else 'FAIL'}  {group}: {name}"
        if not ok:
            line += f" (got {got!r}, expected {want!r})"
        sys.stderr.write(line + "\n")
    _emit({"cases": len(rows), "failures": bad})
    return 1 if bad else 0


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--primes", help="prime universe, e.g. 2,3")
    common.add_argument("--rank", "-n", type=int, default=2, help="quantifier rank")
    common.add_argument("--dot", action="store_true", help="emit DOT instead of JSON")
    common.add_argument("--json-file", help="read the main input from a JSON document")
    common.add_argument("--grid", type=int, default=2, help="element sampling bound")

    p = argparse.ArgumentParser(prog="spinelab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("parse", parents=[common], help="validate a group (and element)")
    s.add_argument("group", nargs="?")
    s.add_argument("--element")
    s.set_defaults(fn=cmd_parse)

    s = sub.add_parser("spine", parents=[common], help="spines of a group")
    s.add_argument("group", nargs="?")
    s.add_argument("--plot", metavar="FILE", help="also render the spine to an image file")
    s.set_defaults(fn=cmd_spine)

    s = sub.add_parser("eval", parents=[common], help="spine maps and predicates of an element")
    s.add_argument("group", nargs="?")
    s.add_argument("element")
    s.set_defaults(fn=cmd_eval)

    s = sub.add_parser("equiv", parents=[common], help="rank-n comparison of spines")
    s.add_argument("left")
    s.add_argument("right")
    s.add_argument("--multiorder", action="store_true", help="arguments are multi-order words")
    s.set_defaults(fn=cmd_equiv)

    s = sub.add_parser("hulls", parents=[common], help="hulls of a selection in a word")
    s.add_argument("word", nargs="?")
    s.add_argument("selection")
    s.set_defaults(fn=cmd_hulls)

    s = sub.add_parser("cuts", parents=[common], help="gaps of a word and their satisfiability")
    s.add_argument("word", nargs="?")
    s.set_defaults(fn=cmd_cuts)

    s = sub.add_parser("augment", parents=[common], help="propose and verify an infinite augment")
    s.add_argument("group", nargs="?")
    s.add_argument("--candidate", help="candidate group H (default: the proposal)")
    s.add_argument("--infinitesimal", action="store_true", help="append H instead of prepending")
    s.set_defaults(fn=cmd_augment)

    s = sub.add_parser("examples", parents=[common], help="replay the worked examples")
    s.set_defaults(fn=cmd_examples)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except DOMAIN_ERRORS as e:
        diag = {"error": type(e).__name__, "message": str(e)}
        for attr in ("offset", "rule"):
            if hasattr(e, attr):
                diag[attr] = getattr(e, attr)
        _emit(diag)
        return 1


if __name__ == "__main__":
    sys.exit(main())
