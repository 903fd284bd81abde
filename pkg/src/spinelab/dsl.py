"""Text and JSON formats for groups, elements, multi-orders and selections.

The grammar is documented in ``docs/grammar.ebnf``.  Syntax errors carry the
character offset at which parsing failed; semantic errors carry a rule name.
"""
from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .multiorder import (
    FIN, OMEGA as MO_OMEGA, OMEGA_STAR as MO_OMEGA_STAR, ColouredMultiOrder,
    MultiOrderError, Point, SegmentSelection, SubstructureSelection, WordSegment,
)
from .presentation import (
    FINITE, OMEGA, OMEGA_STAR, BlockProfile, Coord, ElementLiteral,
    GroupPresentation, PresentationError, Segment, check_element, is_prime,
)

SCHEMA_VERSION = "v1"
MAX_PRIME = 10 ** 6  # prime literals are checked by trial division


class DslSyntaxError(ValueError):
    def __init__(self, offset: int, message: str, text: str = ""):
        super().__init__(f"syntax error at offset {offset}: {message}")
        self.offset = offset
        self.message = message
        self.text = text


# ----------------------------------------------------------------- lexer

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<sym>[\[\](){},:/+\-]))")


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.toks: List[Tuple[str, str, int]] = []
        i = 0
        while True:
            m = _TOKEN.match(text, i)
            if not m:
                rest = text[i:]
                if rest.strip() == "":
                    break
                j = i + len(rest) - len(rest.lstrip())
                raise DslSyntaxError(j, f"unexpected character {text[j]!r}", text)
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind), m.start(kind)))
            i = m.end()
        self.end = len(text)
        self.i = 0

    def peek(self) -> Optional[Tuple[str, str, int]]:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def offset(self) -> int:
        t = self.peek()
        return t[2] if t else self.end

    def next(self, what: str = "token") -> Tuple[str, str, int]:
        t = self.peek()
        if t is None:
            raise DslSyntaxError(self.end, f"unexpected end of input, expected {what}", self.text)
        self.i += 1
        return t

    def expect(self, value: str) -> Tuple[str, str, int]:
        t = self.peek()
        if t is None or t[1] != value:
            found = "end of input" if t is None else repr(t[1])
            raise DslSyntaxError(self.offset(), f"expected {value!r}, found {found}", self.text)
        self.i += 1
        return t

    def accept(self, value: str) -> bool:
        t = self.peek()
        if t is not None and t[1] == value:
            self.i += 1
            return True
        return False

    def done(self) -> None:
        if self.peek() is not None:
            raise DslSyntaxError(self.offset(), f"trailing input {self.peek()[1]!r}", self.text)

    def int(self) -> int:
        t = self.next("an integer")
        if t[0] != "num":
            raise DslSyntaxError(t[2], f"expected an integer, found {t[1]!r}", self.text)
        return int(t[1])


# ---------------------------------------------------------------- groups

def _prime_set(lx: _Lexer) -> frozenset:
    lx.expect("{")
    out = set()
    if not lx.accept("}"):
        while True:
            off = lx.offset()
            p = lx.int()
            if p > MAX_PRIME:
                raise PresentationError("prime", f"{p} at offset {off} exceeds {MAX_PRIME}")
            if not is_prime(p):
                raise PresentationError("prime", f"{p} at offset {off} is not prime")
            out.add(p)
            if lx.accept("}"):
                break
            lx.expect(",")
    return frozenset(out)


def _atom(lx: _Lexer) -> BlockProfile:
    t = lx.next("a block atom")
    if t[1] == "Z":
        return BlockProfile(1, frozenset(), True)
    if t[1] == "Q":
        return BlockProfile(1, frozenset(), False)
    if t[1] == "Zloc":
        return BlockProfile(1, _prime_set(lx), False)
    if t[1] == "Block":
        lx.expect("{")
        rank = lx.int()
        lx.expect(",")
        primes = _prime_set(lx)
        integral = discrete = False
        while lx.accept(","):
            f = lx.next("a block flag")
            if f[1] == "nondiv":
                integral = True
            elif f[1] == "discrete":
                discrete = True
            else:
                raise DslSyntaxError(f[2], f"unknown block flag {f[1]!r}", lx.text)
        lx.expect("}")
        if discrete and rank != 1:
            raise PresentationError("discrete-rank", "a discrete block has rank 1")
        if rank not in (1, 2):
            raise PresentationError("block-rank", f"rank must be 1 or 2, got {rank}")
        return BlockProfile(rank, primes, integral or discrete)
    raise DslSyntaxError(t[2], f"expected a block atom, found {t[1]!r}", lx.text)


def _group(lx: _Lexer) -> List[Segment]:
    t = lx.peek()
    if t is None:
        raise DslSyntaxError(lx.end, "unexpected end of input, expected a group", lx.text)
    if t[1] == "lex":
        lx.next()
        lx.expect("[")
        segs: List[Segment] = []
        if not lx.accept("]"):
            while True:
                segs.extend(_group(lx))
                if lx.accept("]"):
                    break
                lx.expect(",")
        return segs
    if t[1] == "rep":
        lx.next()
        lx.expect("(")
        o = lx.next("omega, omegaStar or a length")
        if o[1] == "omega":
            order, length = OMEGA, None
        elif o[1] == "omegaStar":
            order, length = OMEGA_STAR, None
        elif o[0] == "num":
            order, length = FINITE, int(o[1])
            if length < 1:
                raise PresentationError("finite-length", "finite repetitions need length >= 1")
        else:
            raise DslSyntaxError(o[2], f"expected omega, omegaStar or a length, found {o[1]!r}",
                                 lx.text)
        lx.expect(",")
        nxt = lx.peek()
        if nxt is not None and nxt[1] in ("lex", "rep"):
            raise PresentationError("rep-atom", "rep takes a block atom, not a compound group")
        block = _atom(lx)
        lx.expect(")")
        return [Segment(order, block, length)]
    return [Segment(FINITE, _atom(lx), 1)]


def parse_group(text: str, universe: Iterable[int] = ()) -> GroupPresentation:
    lx = _Lexer(text)
    segs = _group(lx)
    lx.done()
    return GroupPresentation.of(segs, universe)


def block_text(b: BlockProfile) -> str:
    if b.integral and b.rank == 1:
        return "Z"
    if not b.integral and b.rank == 1:
        return "Zloc{" + ",".join(map(str, sorted(b.nondiv))) + "}" if b.nondiv else "Q"
    primes = "{" + ",".join(map(str, sorted(b.nondiv))) + "}"
    return f"Block{{{b.rank},{primes}{',nondiv' if b.integral else ''}}}"


def segment_text(seg: Segment) -> str:
    a = block_text(seg.block)
    if seg.order == OMEGA:
        return f"rep(omega,{a})"
    if seg.order == OMEGA_STAR:
        return f"rep(omegaStar,{a})"
    return a if seg.length == 1 else f"rep({seg.length},{a})"


def serialize_group(G: GroupPresentation) -> str:
    if G.n_segments == 1:
        return segment_text(G.segments[0])
    return "lex[" + ",".join(segment_text(s) for s in G.segments) + "]"


# -------------------------------------------------------------- elements

_COORD = re.compile(
    r"^\s*(?P<a>[+-]?\d+(?:/\d+)?(?!\s*r2))?\s*(?:(?P<bs>[+-])?\s*(?P<b>\d+(?:/\d+)?)?\s*r2)?\s*$")


def parse_coord(text: str) -> Coord:
    """``3``, ``-1/2``, ``1r2``, ``3+1/2r2``, ``-r2``."""
    m = _COORD.match(text)
    if not m or (m.group("a") is None and "r2" not in text):
        raise DslSyntaxError(0, f"malformed coordinate {text!r}", text)
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    b = Fraction(0)
    if "r2" in text:
        b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
        if m.group("bs") == "-":
            b = -b
    return Coord(a, b)


def coord_text(c: Coord) -> str:
    if c.b == 0:
        return str(c.a)
    b = f"{c.b}r2"
    if c.a == 0:
        return b
    return f"{c.a}{'' if c.b < 0 else '+'}{b}"


def _split_top(body: str, offset: int) -> List[Tuple[str, int]]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(body):
        if ch in "({[":
            depth += 1
        elif ch in ")}]":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append((body[start:i], offset + start))
            start = i + 1
    parts.append((body[start:], offset + start))
    return parts


def _coord_at(text: str, off: int) -> Coord:
    try:
        return parse_coord(text)
    except DslSyntaxError as e:
        raise DslSyntaxError(off, e.message) from None


def parse_element(text: str, G: GroupPresentation) -> ElementLiteral:
    s = text.strip()
    lead = len(text) - len(text.lstrip())
    if s.startswith("(") and s.endswith(")"):
        if not G.is_finite:
            raise PresentationError("tuple-literal", "tuple literals need a finite presentation")
        body = s[1:-1]
        items = [] if body.strip() == "" else _split_top(body, lead + 1)
        positions = list(G.positions())
        if len(items) != len(positions):
            raise PresentationError(
                "arity", f"expected {len(positions)} coordinates, got {len(items)}")
        g = ElementLiteral.of({p: _coord_at(t, o) for p, (t, o) in zip(positions, items)})
        return check_element(G, g)
    if s.startswith("{") and s.endswith("}"):
        body = s[1:-1]
        coords: Dict[Tuple[int, int], Coord] = {}
        if body.strip():
            for item, off in _split_top(body, lead + 1):
                if ":" not in item:
                    raise DslSyntaxError(off, "expected key: coordinate", text)
                key, val = item.rsplit(":", 1) if item.count(":") > 1 else item.split(":", 1)
                pos = _key(key.strip(), G, off)
                if pos in coords:
                    raise PresentationError("duplicate-key", f"position {pos} given twice")
                coords[pos] = _coord_at(val, off + len(key) + 1)
        return check_element(G, ElementLiteral.of(coords))
    raise DslSyntaxError(lead, "an element is a tuple (..) or a map {..}", text)


def _key(key: str, G: GroupPresentation, off: int) -> Tuple[int, int]:
    m = re.fullmatch(r"(-?\d+):(-?\d+)", key)
    if m:
        return (int(m.group(1)), int(m.group(2)))
    if not re.fullmatch(r"-?\d+", key):
        raise DslSyntaxError(off, f"malformed position key {key!r}")
    k = int(key)
    if G.is_finite:
        positions = list(G.positions())
        if not 0 <= k < len(positions):
            raise PresentationError("position", f"flat index {k} is outside the presentation")
        return positions[k]
    if G.n_segments == 1:
        return (0, k)
    raise PresentationError("position-key", "use seg:off keys for multi-segment infinite groups")


def serialize_element(g: ElementLiteral) -> str:
    return "{" + ", ".join(f"{s}:{o}: {coord_text(c)}" for (s, o), c in g.support) + "}"


# ------------------------------------------------------------ multi-orders

_POINT = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_+*]*)\s*(?:\[([^\]]*)\])?\s*$")


def _parse_letter(body: str, off: int) -> frozenset:
    pts = []
    for item, o in _split_top(body, off):
        m = _POINT.match(item)
        if not m:
            raise DslSyntaxError(o, f"malformed point {item.strip()!r}")
        cols = frozenset(c.strip() for c in (m.group(2) or "").split(",") if c.strip())
        pts.append(Point(m.group(1), cols))
    letter = frozenset(pts)
    if len({p.sort for p in letter}) != len(letter):
        raise PresentationError("cluster-sort", "a cluster letter holds at most one point per sort")
    return letter


def parse_multiorder(text: str, sorts: Optional[Sequence[str]] = None,
                     colours: Optional[Sequence[str]] = None) -> ColouredMultiOrder:
    """Whitespace-separated letters ``{a, b[red]}``; a letter followed by
    ``^w`` or ``^w*`` is an omega or omega* repetition; ``empty`` is the empty word."""
    word: List[WordSegment] = []
    run: List[frozenset] = []
    i, n = 0, len(text)
    if text.strip() == "empty":
        i = n
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        if text[i] != "{":
            raise DslSyntaxError(i, f"expected '{{', found {text[i]!r}", text)
        j = text.find("}", i)
        if j < 0:
            raise DslSyntaxError(n, "unterminated letter", text)
        if not text[i + 1:j].strip():
            raise PresentationError("empty-letter", f"empty cluster letter at offset {i}")
        ell = _parse_letter(text[i + 1:j], i + 1)
        i = j + 1
        if text.startswith("^w*", i):
            kind, i = MO_OMEGA_STAR, i + 3
        elif text.startswith("^w", i):
            kind, i = MO_OMEGA, i + 2
        else:
            run.append(ell)
            continue
        if run:
            word.append(WordSegment(FIN, tuple(run)))
            run = []
        word.append(WordSegment(kind, (ell,)))
    if run:
        word.append(WordSegment(FIN, tuple(run)))
    used_sorts = sorted({p.sort for seg in word for ell in seg.letters for p in ell})
    used_cols = sorted({c for seg in word for ell in seg.letters for p in ell for c in p.colours})
    try:
        return ColouredMultiOrder(tuple(sorts) if sorts is not None else tuple(used_sorts),
                                  tuple(colours) if colours is not None else tuple(used_cols),
                                  tuple(word))
    except MultiOrderError as e:
        raise PresentationError("vocabulary", str(e)) from None


def point_text(p: Point) -> str:
    return p.sort + (f"[{','.join(sorted(p.colours))}]" if p.colours else "")


def letter_text(ell: frozenset) -> str:
    return "{" + ",".join(point_text(p) for p in sorted(ell)) + "}"


def multiorder_text(M: ColouredMultiOrder) -> str:
    out = []
    for seg in M.word:
        if seg.kind == FIN:
            out.extend(letter_text(ell) for ell in seg.letters)
        else:
            out.append(letter_text(seg.letter) + ("^w" if seg.kind == MO_OMEGA else "^w*"))
    return " ".join(out) if out else "empty"


def parse_selection(text: str, B: ColouredMultiOrder) -> SubstructureSelection:
    """Comma-separated ``seg:off`` (whole letter) or ``seg:tail`` items;
    ``seg:off:sort`` selects a single point of the letter."""
    explicit: Dict[int, Dict[int, set]] = {s: {} for s in range(len(B.word))}
    tails: Dict[int, frozenset] = {}
    for item, off in _split_top(text, 0) if text.strip() else []:
        parts = item.strip().split(":")
        if len(parts) not in (2, 3) or not re.fullmatch(r"\d+", parts[0]):
            raise DslSyntaxError(off, f"malformed selection item {item.strip()!r}", text)
        s = int(parts[0])
        if s >= len(B.word):
            raise PresentationError("position", f"segment {s} is outside the word")
        seg = B.word[s]
        if parts[1] == "tail":
            if seg.kind == FIN:
                raise PresentationError("tail", "finite segments have no tail")
            pick = seg.letter if len(parts) == 2 else frozenset(
                p for p in seg.letter if p.sort == parts[2])
            tails[s] = tails.get(s, frozenset()) | pick
            continue
        if not re.fullmatch(r"-?\d+", parts[1]):
            raise DslSyntaxError(off, f"malformed offset {parts[1]!r}", text)
        o = int(parts[1])
        if not seg.has_offset(o):
            raise PresentationError("position", f"offset {o} is outside segment {s}")
        ell = seg.at(o)
        pick = ell if len(parts) == 2 else frozenset(p for p in ell if p.sort == parts[2])
        if not pick:
            raise PresentationError("selection", f"no point of sort {parts[2]!r} at {s}:{o}")
        explicit[s].setdefault(o, set()).update(pick)
    segs = []
    for s, seg in enumerate(B.word):
        picks = explicit[s]
        if seg.kind == FIN:
            ex = tuple(frozenset(picks.get(i, ())) for i in range(len(seg.letters)))
        elif seg.kind == MO_OMEGA:
            k = max(picks, default=-1) + 1
            ex = tuple(frozenset(picks.get(i, ())) for i in range(k))
        else:
            k = -min(picks, default=0)
            ex = tuple(frozenset(picks.get(i, ())) for i in range(-k, 0))
        segs.append(SegmentSelection(ex, tails.get(s, frozenset())))
    return SubstructureSelection(tuple(segs))


def selection_json(B: ColouredMultiOrder, A: SubstructureSelection) -> list:
    out = []
    for seg, sel in zip(B.word, A.segments):
        out.append({"explicit": [[point_text(p) for p in sorted(x)] for x in sel.explicit],
                    "tail": [point_text(p) for p in sorted(sel.tail)]})
    return out


# ------------------------------------------------------------------- JSON

def block_json(b: BlockProfile) -> dict:
    return {"rank": b.rank, "nondiv": sorted(b.nondiv), "integral": b.integral,
            "discrete": b.discrete, "tail_flag": b.tail_flag}


def group_json(G: GroupPresentation) -> dict:
    return {
        "schema": f"spinelab/group/{SCHEMA_VERSION}",
        "text": serialize_group(G),
        "universe": sorted(G.universe),
        "segments": [{"order": s.order, "length": s.length, "block": block_json(s.block)}
                     for s in G.segments],
    }


def group_from_json(d: dict) -> GroupPresentation:
    segs = []
    for s in d["segments"]:
        b = s["block"]
        segs.append(Segment(s["order"], BlockProfile(b["rank"], frozenset(b["nondiv"]),
                                                     b["integral"]), s.get("length")))
    return GroupPresentation.of(segs, d.get("universe", ()))


def element_json(g: ElementLiteral) -> dict:
    return {"schema": f"spinelab/element/{SCHEMA_VERSION}",
            "support": [{"segment": s, "offset": o, "a": str(c.a), "b": str(c.b)}
                        for (s, o), c in g.support]}


def element_from_json(d: dict) -> ElementLiteral:
    return ElementLiteral.of({(e["segment"], e["offset"]): Coord(Fraction(e["a"]), Fraction(e["b"]))
                              for e in d["support"]})


def _letter_json(ell: frozenset) -> list:
    return [{"sort": p.sort, "colours": sorted(p.colours)} for p in sorted(ell)]


def multiorder_json(M: ColouredMultiOrder) -> dict:
    return {
        "schema": f"spinelab/multiorder/{SCHEMA_VERSION}",
        "text": multiorder_text(M),
        "sorts": list(M.sorts),
        "colours": list(M.colours),
        "word": [{"kind": seg.kind, "letters": [_letter_json(ell) for ell in seg.letters]}
                 for seg in M.word],
    }


def multiorder_from_json(d: dict) -> ColouredMultiOrder:
    word = tuple(WordSegment(seg["kind"], tuple(
        frozenset(Point(p["sort"], frozenset(p["colours"])) for p in ell)
        for ell in seg["letters"])) for seg in d["word"])
    return ColouredMultiOrder(tuple(d["sorts"]), tuple(d["colours"]), word)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def serialize_multiorder(M: ColouredMultiOrder, fmt: str = "json") -> str:
    if fmt == "json":
        return dumps(multiorder_json(M))
    if fmt == "dot":
        return multiorder_dot(M)
    raise ValueError(f"unknown format {fmt!r}")


def multiorder_dot(M: ColouredMultiOrder, name: str = "spine") -> str:
    """One node per point; points of a cluster share a rank; edges follow the word."""
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=box];"]
    prev: Optional[str] = None
    k = 0
    for s, seg in enumerate(M.word):
        mark = {FIN: "", MO_OMEGA: "^w", MO_OMEGA_STAR: "^w*"}[seg.kind]
        for i, ell in enumerate(seg.letters):
            ids = []
            for p in sorted(ell):
                nid = f"n{k}"
                k += 1
                ids.append(nid)
                label = point_text(p) + mark
                lines.append(f'  {nid} [label="{label}"];')
            lines.append("  { rank=same; " + " ".join(ids) + "; }")
            if prev is not None:
                lines.append(f"  {prev} -> {ids[0]};")
            prev = ids[0]
    lines.append("}")
    return "\n".join(lines) + "\n"
