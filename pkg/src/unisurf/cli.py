"""Command-line driver.

Human summaries go to stdout and JSON-lines diagnostics to stderr.  Exit
status: 0 success, 1 precondition or validation failure, 2 syntax or
usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from . import dsl
from . import moves as mv
from . import pipeline as pl
from .diagram import DiagramError, surface_components, validate
from .kirby import KirbyError, normalize_framings
from .lift import LiftError, covering_connected, covering_euler_char
from .special import ConstructionError, attach_bands, build_initial_presentation, check_special
from .templates import TemplateError

OK, FAIL, USAGE = 0, 1, 2

# errors raised by the model when a precondition or invariant fails
MODEL_ERRORS = (mv.MoveError, DiagramError, LiftError, KirbyError, ConstructionError, pl.PipelineError, pl.QuotientError, TemplateError)


class Abort(Exception):
    def __init__(self, code, message=None):
        self.code = code
        self.message = message


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise Abort(USAGE, message)


class Driver:
    def __init__(self, out, err):
        self.out, self.err = out, err

    def diag(self, kind, message, level="error", **extra):
        rec = {"level": level, "kind": kind, "message": message, **extra}
        self.err.write(json.dumps(rec, sort_keys=True) + "\n")

    def fail(self, kind, message, code=FAIL, **extra):
        self.diag(kind, message, **extra)
        raise Abort(code)

    # io

    def read(self, path):
        if path == "-":
            return sys.stdin.read()
        try:
            return Path(path).read_text()
        except OSError as err:
            self.fail("io", f"cannot read {path}: {err.strerror}", USAGE, file=path)

    def write(self, path, text):
        if path in (None, "-"):
            self.out.write(text)
        else:
            Path(path).write_text(text)

    def load(self, path, *kinds):
        text = self.read(path)
        try:
            doc = dsl.parse(text)
        except dsl.DSLError as err:
            for e in err.errors:
                self.diag(e.kind, e.message, file=path, line=e.line, column=e.column)
            raise Abort(USAGE if err.syntactic else FAIL) from None
        if kinds and doc.kind not in kinds:
            self.fail("usage", f"{path} holds a {doc.kind} block, expected {' or '.join(kinds)}", USAGE, file=path)
        return doc

    def start_diagram(self, doc):
        """A diagram document as is; a Kirby input becomes its special presentation."""
        if doc.kind == "diagram":
            return doc.body
        k = normalize_framings(doc.body)
        return attach_bands(build_initial_presentation(k), k)


def _invariants(D) -> dict:
    return {
        "degree": D.degree,
        "pieces": len(D.pieces),
        "bands": len(D.bands),
        "chi": covering_euler_char(D),
        "connected": covering_connected(D),
        "components": len(surface_components(D)),
        "branching": {p.id: list(p.label.cycle_type()) for p in D.pieces},
    }


def _print_invariants(drv, inv, json_out):
    if json_out:
        drv.out.write(json.dumps(inv, sort_keys=True) + "\n")
        return
    for key in ("degree", "pieces", "bands", "chi", "connected", "components"):
        if key in inv:
            drv.out.write(f"{key} {int(inv[key]) if isinstance(inv[key], bool) else inv[key]}\n")
    for pid, ct in inv.get("branching", {}).items():
        drv.out.write(f"branching {pid} {' '.join(map(str, ct))}\n")


# commands


def cmd_check(drv, a):
    doc = drv.load(a.file, "kirby", "diagram")
    if doc.kind == "kirby":
        k = normalize_framings(doc.body)
        initial = build_initial_presentation(k)
        special = attach_bands(initial, k, check=False)
        problems = check_special(initial, special, k)
        expected = 1 - k.m + k.n
        inv = _invariants(special)
        if inv["chi"] != expected:
            problems.append(f"cover chi {inv['chi']}, expected {expected}")
        if not inv["connected"]:
            problems.append("cover is disconnected")
    else:
        special = doc.body
        problems = validate(special)
        inv = {"degree": special.degree, "pieces": len(special.pieces), "bands": len(special.bands)}
        if not problems:
            inv = _invariants(special)
    inv.pop("branching", None)
    inv["problems"] = problems
    if a.json:
        drv.out.write(json.dumps(inv, sort_keys=True) + "\n")
    else:
        drv.out.write(f"input {doc.kind}\n")
        _print_invariants(drv, inv, False)
        drv.out.write("status " + ("ok" if not problems else f"{len(problems)} problem(s)") + "\n")
    for p in problems:
        drv.diag("validation", p, file=a.file)
    return FAIL if problems else OK


def cmd_invariants(drv, a):
    doc = drv.load(a.file, "kirby", "diagram")
    _print_invariants(drv, _invariants(drv.start_diagram(doc)), a.json)
    return OK


def _param(drv, text):
    key, sep, val = text.partition("=")
    if not sep or not key:
        drv.fail("usage", f"--param expects key=value, got {text!r}", USAGE)
    try:
        return key, json.loads(val)
    except json.JSONDecodeError:
        return key, val


def cmd_move(drv, a):
    doc = drv.load(a.file, "diagram")
    params = dict(_param(drv, p) for p in a.param)
    res = mv.run_move(doc.body, a.name, a.site, params)
    drv.write(a.output, dsl.dump(dsl.diagram_doc(res.diagram, doc.one_indexed)))
    script = dsl.dump(dsl.script_doc(res.records))
    if a.script:
        drv.write(a.script, script)
    for r in res.records:
        drv.diag("record", r.to_line(), level="info")
    return OK


def _audit_tsv(u) -> str:
    rows = ["stage\tdegree\tchi\texpected\tconnected\tcomponents\tok"]
    for s in u.audit:
        rows.append(f"{s.stage}\t{s.degree}\t{s.chi}\t{s.expected}\t{int(s.connected)}\t{s.components}\t{int(s.ok)}")
    return "\n".join(rows) + "\n"


def _report(u, outdir: Path, rep):
    from . import render

    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "universal.txt").write_text(u.to_text())
    (outdir / "audit.tsv").write_text(_audit_tsv(u))
    summary = {
        "degree": u.degree,
        "grid": [u.n1, u.n2],
        "generators": {g: str(p) for g, p in sorted(u.labels.items())},
        "quotient_indices": {k: list(v) for k, v in sorted(u.quotient_indices.items())},
        "template_ok": bool(rep),
        "template_problems": list(rep.problems),
        "stages": [
            {"stage": s.stage, "degree": s.degree, "chi": s.chi, "expected": s.expected, "connected": s.connected, "components": s.components}
            for s in u.audit
        ],
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    (outdir / "start.diagram").write_text(dsl.dump(dsl.diagram_doc(u.start)))
    (outdir / "final.diagram").write_text(dsl.dump(dsl.diagram_doc(u.diagram)))
    (outdir / "pipeline.script").write_text(dsl.dump(dsl.script_doc(u.records)))
    render.save(render.audit_figure(u.audit), outdir / "audit.png")
    render.save(render.grid_figure(u.grid), outdir / "grid.png")
    render.save(render.grid_figure(u.grid), outdir / "grid.svg")
    render.save(render.diagram_figure(u.diagram), outdir / "final.png")


def cmd_pipeline(drv, a):
    doc = drv.load(a.file, "kirby")
    u = pl.end_to_end(doc.body, fine_audit=a.fine_audit)
    rep = pl.check_template(u)
    drv.write(a.output, u.to_text())
    if a.diagram:
        drv.write(a.diagram, dsl.dump(dsl.diagram_doc(u.diagram)))
    if a.script:
        drv.write(a.script, dsl.dump(dsl.script_doc(u.records)))
    if a.start:
        drv.write(a.start, dsl.dump(dsl.diagram_doc(u.start)))
    if a.report:
        _report(u, Path(a.report), rep)
    for p in rep.problems:
        drv.diag("template", p, file=a.file)
    return OK if rep else FAIL


def cmd_replay(drv, a):
    start = drv.start_diagram(drv.load(a.start, "kirby", "diagram"))
    script = drv.load(a.script, "script")
    out = pl.replay(start, script.body)
    drv.write(a.output, dsl.dump(dsl.diagram_doc(out, a.one_indexed)))
    return OK


def cmd_export_svg(drv, a):
    from . import render

    doc = drv.load(a.file, "kirby", "diagram")
    if doc.kind == "kirby" and a.view == "grid":
        fig = render.grid_figure(pl.end_to_end(doc.body).grid)
    else:
        fig = render.diagram_figure(drv.start_diagram(doc))
    if not str(a.output).endswith(".svg"):
        drv.fail("usage", "export-svg writes an .svg file", USAGE)
    render.save(fig, a.output)
    drv.out.write(f"wrote {a.output}\n")
    return OK


def cmd_sample(drv, a):
    from .sample import random_diagram

    rng = random.Random(a.seed)
    docs = []
    for _ in range(a.count):
        D = random_diagram(rng, d=a.degree, n_pieces=a.pieces, n_bands=a.bands, simple=not a.general)
        docs.append(dsl.dump(dsl.diagram_doc(D, a.one_indexed)))
    if a.count == 1:
        drv.write(a.output, docs[0])
        return OK
    outdir = Path(a.output or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    for n, text in enumerate(docs):
        (outdir / f"sample-{a.seed}-{n:04d}.diagram").write_text(text)
    drv.out.write(f"wrote {a.count} diagrams to {outdir}\n")
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgParser(prog="unisurf", description="Labelled ribbon surfaces and branched coverings of the 4-ball.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a Kirby input or a diagram and report invariants")
    p.add_argument("file")
    p.add_argument("--json", action="store_true", help="machine-readable stdout")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("invariants", help="chi, connectivity and branching indices of the cover")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_invariants)

    p = sub.add_parser("move", help="apply one move to a diagram")
    p.add_argument("name", help=", ".join(mv.MOVES))
    p.add_argument("file", nargs="?", default="-", help="diagram document (default stdin)")
    p.add_argument("--site", action="append", default=[], help="crossing, band or piece id; repeat for several")
    p.add_argument("--param", action="append", default=[], metavar="KEY=JSON")
    p.add_argument("-o", "--output", help="diagram output (default stdout)")
    p.add_argument("--script", help="write the move records here")
    p.set_defaults(fn=cmd_move)

    p = sub.add_parser("pipeline", help="Kirby input to the universal presentation")
    p.add_argument("file")
    p.add_argument("-o", "--output", help="universal presentation text (default stdout)")
    p.add_argument("--diagram", help="write the final diagram document")
    p.add_argument("--script", help="write the move script")
    p.add_argument("--start", help="write the special presentation the script starts from")
    p.add_argument("--report", metavar="DIR", help="write tables and figures to DIR")
    p.add_argument("--fine-audit", action="store_true", help="also audit after every crossing")
    p.set_defaults(fn=cmd_pipeline)

    p = sub.add_parser("replay", help="re-run a move script")
    p.add_argument("start", help="diagram document, or a Kirby input (its special presentation)")
    p.add_argument("script")
    p.add_argument("-o", "--output")
    p.add_argument("--one-indexed", action="store_true", help="print sheets from 1")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("export-svg", help="schematic SVG of a grid layout or a diagram")
    p.add_argument("file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--view", choices=("grid", "diagram"), default="grid", help="for Kirby inputs")
    p.set_defaults(fn=cmd_export_svg)

    p = sub.add_parser("sample", help="random valid diagrams")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--degree", type=int)
    p.add_argument("--pieces", type=int)
    p.add_argument("--bands", type=int)
    p.add_argument("--general", action="store_true", help="arbitrary labels, not only transpositions")
    p.add_argument("--one-indexed", action="store_true")
    p.add_argument("-o", "--output", help="file (count 1) or directory")
    p.set_defaults(fn=cmd_sample)
    return ap


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    drv = Driver(out, err)
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except Abort as e:
        drv.diag("usage", e.message)
        return e.code
    try:
        return a.fn(drv, a)
    except Abort as e:
        return e.code
    except MODEL_ERRORS as e:
        drv.diag(type(e).__name__, str(e), command=a.command)
        return FAIL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
