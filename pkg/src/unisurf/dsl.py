"""Text format for Kirby inputs, labelled diagrams and move scripts.

The grammar is in ``docs/grammar.md``.  :func:`parse` returns a
:class:`Document` or raises :class:`DSLError` carrying every positioned
error found; :func:`dump` prints the canonical form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .diagram import ANNULUS, DISK, Band, DiagramError, Event, LabelledDiagram, Piece, solve_labels
from .kirby import KirbyError, KirbyInput
from .moves import MoveRecord
from .perm import Permutation

VERSION = 1


@dataclass(frozen=True)
class SyntaxIssue:
    line: int
    column: int
    message: str
    kind: str = "syntax"  # or "invalid": well formed but rejected by the model

    def __str__(self):
        return f"{self.line}:{self.column}: {self.message}"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "line": self.line, "column": self.column, "message": self.message}


class DSLError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(map(str, self.errors)))

    @property
    def syntactic(self) -> bool:
        return any(e.kind == "syntax" for e in self.errors)


@dataclass(frozen=True)
class Document:
    kind: str  # "kirby" | "diagram" | "script"
    body: Union[KirbyInput, LabelledDiagram, tuple]
    version: int = VERSION
    one_indexed: bool = False


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>//[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<perm>(?:\([0-9 ,]*\))+)
  | (?P<arrow>->)
  | (?P<number>-?\d+)
  | (?P<sign>[+-])
  | (?P<id>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<punct>[{}\[\];=,@\#])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str):
    """Tokens with 1-based positions.  Lines after ``script {`` are raw
    tokens up to a line holding only ``}``."""
    toks, errors = [], []
    line, start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            errors.append(SyntaxIssue(line, pos - start + 1, f"unexpected character {text[pos]!r}"))
            pos += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            toks.append(Tok("nl", "\n", line, pos - start + 1))
            line, start = line + 1, m.end()
            pos = m.end()
            if len(toks) >= 3 and toks[-3].text == "script" and toks[-2].text == "{":
                while pos < len(text):
                    end = text.find("\n", pos)
                    end = len(text) if end < 0 else end
                    raw = text[pos:end]
                    if raw.strip() == "}":
                        break
                    if raw.strip():
                        toks.append(Tok("raw", raw.strip(), line, len(raw) - len(raw.lstrip()) + 1))
                    toks.append(Tok("nl", "\n", line, end - pos + 1))
                    line, start, pos = line + 1, end + 1, end + 1
            continue
        if kind not in ("ws", "comment"):
            toks.append(Tok(kind, m.group(), line, pos - start + 1))
        pos = m.end()
    toks.append(Tok("eof", "", line, pos - start + 1))
    return toks, errors


class _Fail(Exception):
    def __init__(self, tok, msg, kind="syntax"):
        self.issue = SyntaxIssue(tok.line, tok.col, msg, kind)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks, self.errors = tokenize(text)
        self.i = 0

    # token helpers; newlines only matter inside script blocks
    def peek(self, skip_nl=True):
        j = self.i
        while skip_nl and self.toks[j].kind == "nl":
            j += 1
        return self.toks[j]

    def next(self, skip_nl=True):
        while skip_nl and self.toks[self.i].kind == "nl":
            self.i += 1
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text=None, kind=None, what=None):
        t = self.next()
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = what or (repr(text) if text else kind)
            got = "end of input" if t.kind == "eof" else repr(t.text)
            raise _Fail(t, f"expected {want}, got {got}")
        return t

    def accept(self, text):
        if self.peek().text == text and self.peek().kind != "string":
            return self.next()
        return None

    def int_(self, what="integer"):
        return int(self.expect(kind="number", what=what).text)

    def recover(self, s0):
        """Skip the statement that began at token ``s0``, brackets balanced."""
        self.i = s0
        depth = 0
        is_band = self.peek().text == "band"
        while True:
            t = self.peek()
            if t.kind == "eof":
                return
            if t.kind == "punct" and t.text in "{[":
                depth += 1
            elif t.kind == "punct" and t.text in "}]":
                if depth == 0:
                    return
                depth -= 1
                self.next()
                if depth == 0 and is_band:
                    self.accept(";")
                    return
                continue
            self.next()
            if t.text == ";" and depth == 0:
                return

    # document
    def document(self) -> Document | None:
        version, one = VERSION, False
        if self.peek().text == "unisurf":
            self.next()
            t = self.expect(kind="number", what="format version")
            version = int(t.text)
            if version != VERSION:
                raise _Fail(t, f"unsupported format version {version}, expected {VERSION}")
            if self.accept("sheets"):
                self.expect("=")
                t = self.expect(kind="number", what="0 or 1")
                if t.text not in ("0", "1"):
                    raise _Fail(t, "sheets must be 0 or 1")
                one = t.text == "1"
        t = self.peek()
        if t.text == "kirby":
            doc = Document("kirby", self.kirby(), version, one)
        elif t.text == "diagram":
            doc = Document("diagram", self.diagram(one), version, one)
        elif t.text == "script":
            doc = Document("script", self.script(), version, one)
        else:
            raise _Fail(t, "expected a kirby, diagram or script block")
        t = self.peek()
        if t.kind != "eof":
            raise _Fail(t, f"unexpected {t.text!r} after the block")
        return doc

    def block_items(self, item):
        self.expect("{")
        while self.peek().text != "}":
            if self.peek().kind == "eof":
                raise _Fail(self.peek(), "unterminated block, expected '}'")
            s0 = self.i
            try:
                item()
            except _Fail as f:
                self.errors.append(f.issue)
                self.recover(s0)
                if self.i == s0:
                    self.next()
        self.expect("}")

    # kirby
    def kirby(self) -> KirbyInput | None:
        head = self.expect("kirby")
        fields = {"m": 0, "components": [], "braid": ((), head)}

        def item():
            key = self.expect(kind="id", what="m, components or braid")
            if key.text not in fields:
                raise _Fail(key, f"unknown kirby field {key.text!r}")
            self.expect("=")
            if key.text == "m":
                fields["m"] = self.int_("count of 1-handles")
            elif key.text == "components":
                fields["components"] = self.components()
            else:
                t = self.expect(kind="string", what="quoted braid word")
                fields["braid"] = (self.braid(t), t)
            self.expect(";")

        self.block_items(item)
        if self.errors:
            return None
        comps = fields["components"]
        letters, btok = fields["braid"]
        try:
            return KirbyInput(fields["m"], [c[0] for c in comps], [c[1] for c in comps], letters)
        except KirbyError as err:
            raise _Fail(btok, str(err), "invalid") from None

    def components(self):
        self.expect("[")
        out = []
        if self.accept("]"):
            return out
        while True:
            self.expect("{")
            vals = {}
            for n, key in enumerate(("strings", "framing")):
                if n:
                    self.expect(",")
                self.expect(key)
                self.expect("=")
                vals[key] = self.int_()
            self.expect("}")
            out.append((vals["strings"], vals["framing"]))
            if self.accept("]"):
                return out
            self.expect(",", what="',' or ']'")

    def braid(self, tok):
        out = []
        body = tok.text[1:-1]
        for m in re.finditer(r"\S+", body):
            w = m.group()
            col = tok.col + 1 + m.start()
            g = re.fullmatch(r"s(\d+)(\^-1)?", w)
            h = re.fullmatch(r"h(\d+)@(\d+)", w)
            if g and int(g.group(1)) >= 1:
                out.append(("s", int(g.group(1)) - 1, -1 if g.group(2) else 1))
            elif h and int(h.group(1)) >= 1:
                out.append(("h", int(h.group(1)) - 1, int(h.group(2))))
            else:
                self.errors.append(SyntaxIssue(tok.line, col, f"malformed braid letter {w!r}"))
        return tuple(out)

    # diagram
    def diagram(self, one: bool) -> LabelledDiagram | None:
        head = self.expect("diagram")
        self.expect("{")
        self.expect("degree")
        self.expect("=")
        degree = self.int_("degree")
        self.expect(";")
        if degree < 1:
            raise _Fail(head, "degree must be positive")
        pieces, bands = [], []

        def item():
            t = self.peek()
            if t.text == "piece":
                pieces.append(self.piece(degree, one))
            elif t.text == "band":
                bands.append(self.band())
            else:
                self.next()
                raise _Fail(t, f"expected piece or band, got {t.text!r}")

        while self.peek().text != "}":
            if self.peek().kind == "eof":
                raise _Fail(self.peek(), "unterminated block, expected '}'")
            s0 = self.i
            try:
                item()
            except _Fail as f:
                self.errors.append(f.issue)
                self.recover(s0)
                if self.i == s0:
                    self.next()
        self.expect("}")
        if self.errors:
            return None
        try:
            return solve_labels(degree, pieces, bands)
        except (DiagramError, ValueError) as err:
            raise _Fail(head, str(err), "invalid") from None

    def piece(self, degree, one):
        self.expect("piece")
        pid = self.expect(kind="id", what="piece id").text
        kind = self.expect(kind="id", what="disk or annulus")
        if kind.text not in (DISK, ANNULUS):
            raise _Fail(kind, f"piece kind must be disk or annulus, got {kind.text!r}")
        lt = self.expect(kind="perm", what="label in cycle notation")
        try:
            label = Permutation.parse(lt.text, degree, one_indexed=one)
        except ValueError as err:
            raise _Fail(lt, str(err)) from None
        fake = bool(self.accept("fake"))
        self.expect(";")
        return Piece(pid, kind.text, label, fake=fake)

    def band(self):
        self.expect("band")
        bid = self.expect(kind="id", what="band id").text
        start = self.expect(kind="id", what="start piece").text
        self.expect(kind="arrow", what="'->'")
        end = self.expect(kind="id", what="end piece or tongue").text
        end = None if end == "tongue" else end
        sp, ep = 0, 1
        if self.accept("@"):
            sp = self.int_()
            self.expect(",")
            ep = self.int_()
        self.expect("{")
        events = []
        while not self.accept("}"):
            events.append(self.event())
        self.accept(";")
        return Band(bid, start, end, tuple(events), (), sp, ep)

    def sign(self):
        t = self.expect(kind="sign", what="'+' or '-'")
        return 1 if t.text == "+" else -1

    def event(self):
        k = self.expect(kind="id", what="through, over or under")
        if k.text == "through":
            tgt = self.expect(kind="id", what="pierced piece or band").text
            arc = 0
            if self.accept("#"):
                arc = self.int_("arc")
            ev = Event("through", tgt, None, self.sign(), arc)
        elif k.text in ("over", "under"):
            other = self.expect(kind="id", what="crossed band").text
            cid = self.expect(kind="id", what="crossing id").text
            ev = Event(k.text, other, cid, self.sign())
        else:
            raise _Fail(k, f"unknown event {k.text!r}")
        self.expect(";")
        return ev

    # script
    def script(self):
        self.expect("script")
        self.expect("{")
        t = self.next(skip_nl=False)
        if t.kind != "nl":
            raise _Fail(t, "script records start on the next line")
        recs = []
        while self.peek().kind == "raw":
            t = self.next()
            try:
                recs.append(MoveRecord.from_line(t.text))
            except (ValueError, KeyError, TypeError) as err:
                self.errors.append(SyntaxIssue(t.line, t.col, f"bad move record: {err}"))
        self.expect("}", what="'}' closing the script")
        return tuple(recs)


def parse(text: str) -> Document:
    p = _Parser(text)
    doc = None
    try:
        doc = p.document()
    except _Fail as f:
        p.errors.append(f.issue)
    if p.errors:
        raise DSLError(sorted(set(p.errors), key=lambda e: (e.line, e.column)))
    return doc


# printing


def _perm(p: Permutation, one: bool) -> str:
    if not one:
        return str(p)
    cyc = [c for c in p.cycles() if len(c) > 1]
    return "".join("(" + " ".join(str(x + 1) for x in c) + ")" for c in cyc) or "()"


def _letter(x) -> str:
    if x[0] == "s":
        return f"s{x[1] + 1}" + ("^-1" if x[2] < 0 else "")
    return f"h{x[1] + 1}@{x[2]}"


def _event(e: Event) -> str:
    s = "+" if e.sign > 0 else "-"
    if e.kind == "through":
        arc = f" #{e.target_arc}" if e.target_arc else ""
        return f"through {e.other}{arc} {s};"
    return f"{e.kind} {e.other} {e.crossing} {s};"


def dump(doc: Document) -> str:
    head = f"unisurf {doc.version}" + (" sheets=1" if doc.one_indexed else "")
    lines = [head]
    if doc.kind == "kirby":
        k = doc.body
        comps = ", ".join(f"{{strings={s}, framing={f}}}" for s, f in zip(k.strings, k.framings))
        lines += [
            "kirby {",
            f"  m = {k.m};",
            f"  components = [{comps}];",
            f'  braid = "{" ".join(_letter(x) for x in k.braid)}";',
            "}",
        ]
    elif doc.kind == "diagram":
        D = doc.body
        lines += ["diagram {", f"  degree = {D.degree};"]
        for p in D.pieces:
            lines.append(f"  piece {p.id} {p.kind} {_perm(p.label, doc.one_indexed)}{' fake' if p.fake else ''};")
        for b in D.bands:
            pos = "" if (b.start_pos, b.end_pos) == (0, 1) else f" @{b.start_pos},{b.end_pos}"
            head = f"  band {b.id} {b.start} -> {b.end or 'tongue'}{pos} {{"
            if not b.events:
                lines.append(head + " }")
            else:
                lines.append(head)
                lines += [f"    {_event(e)}" for e in b.events]
                lines.append("  }")
        lines.append("}")
    elif doc.kind == "script":
        lines += ["script {"] + [r.to_line() for r in doc.body] + ["}"]
    else:
        raise ValueError(f"unknown document kind {doc.kind!r}")
    return "\n".join(lines) + "\n"


def canonical(text: str) -> str:
    return dump(parse(text))


def kirby_doc(k: KirbyInput) -> Document:
    return Document("kirby", k)


def diagram_doc(d: LabelledDiagram, one_indexed: bool = False) -> Document:
    return Document("diagram", d, VERSION, one_indexed)


def script_doc(records) -> Document:
    return Document("script", tuple(records))
