"""From a braided Kirby diagram to a covering over the universal surface.

Stages: framing normalization, the special presentation, symmetrization
(Moves 5 and 6), a band-free grid layout, the quotients by ``r2`` and
``r1``, and the central involution.  Every stage is audited for the
Euler characteristic and connectivity of the covering 4-manifold.

The grid layout works at the level of component census: each surface
component becomes one slot of a cell with the same label and topology.
The embedding and ribbon data are not carried over; the covering
invariants the audit checks depend only on what is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import moves as mv
from . import templates
from .diagram import ANNULUS, DISK, DiagramError, LabelledDiagram, Piece, canonical_signature, solve_labels, surface_components
from .kirby import KirbyInput, normalize_framings
from .lift import covering_connected, covering_euler_char, monodromy_of_word
from .moves import MoveError, MoveRecord, _params
from .perm import Permutation
from .special import attach_bands, build_initial_presentation


class PipelineError(RuntimeError):
    pass


class QuotientError(ValueError):
    pass


# symmetrization


def crossing_ids(diag: LabelledDiagram) -> list:
    seen = []
    for b in diag.bands:
        for e in b.events:
            if e.crossing is not None and e.crossing not in seen:
                seen.append(e.crossing)
    return seen


def symmetrize(diag: LabelledDiagram, audit=None) -> mv.MoveResult:
    """Remove every band crossing.

    Move 5 moves both labels onto fresh sheets; a crossing whose labels
    then share a sheet goes through Move 6; the resulting crossing of
    disjoint labels is pulled apart.
    """
    records = []
    for cid in crossing_ids(diag):
        for step in (mv.move5, _resolve):
            res = step(diag, cid)
            diag = res.diagram
            records += res.records
            if audit is not None:
                audit(f"{res.records[0].name} {cid}" if res.records else cid, diag)
    return mv.MoveResult(diag, records, ())


def _resolve(diag, cid):
    a, b = mv.crossing_labels(diag, cid)
    chain = mv._Chain(diag)
    if a.support() & b.support():
        chain.run(mv.move6(diag, cid))
    (ob, ok), _ = mv._crossing_sites(chain.diag, cid)
    chain.run(mv.isotopy(chain.diag, "uncross", band=ob, index=ok))
    return mv.MoveResult(chain.diag, chain.records, ())


# grid


@dataclass(frozen=True)
class Slot:
    kind: str
    label: Permutation
    source: str | None = None  # id of the component it stands for

    @property
    def fake(self) -> bool:
        return self.source is None


@dataclass(frozen=True)
class GridPresentation:
    """Toroidal ``n1 x n2`` pattern of cells, each with the template slots."""

    n1: int
    n2: int
    degree: int
    cells: tuple  # row-major; each a tuple of (slot name, Slot)

    def cell(self, r: int, c: int) -> dict:
        return dict(self.cells[(r % self.n1) * self.n2 + (c % self.n2)])

    @staticmethod
    def piece_id(slot: str, r: int, c: int) -> str:
        return f"{slot}{r}_{c}"

    def to_diagram(self) -> LabelledDiagram:
        pieces = []
        for k, cell in enumerate(self.cells):
            r, c = divmod(k, self.n2)
            for name, s in cell:
                pieces.append(Piece(self.piece_id(name, r, c), s.kind, s.label, fake=s.fake))
        return solve_labels(self.degree, pieces, [])

    def assignment(self) -> list:
        out = []
        for k, cell in enumerate(self.cells):
            r, c = divmod(k, self.n2)
            out += [[self.piece_id(name, r, c), s.source] for name, s in cell if s.source]
        return out


def grid_shape(n_cells: int) -> tuple:
    """Smallest near-square ``n1 <= n2`` with at least ``n_cells`` cells, both at least 2."""
    side = max(2, math.isqrt(n_cells - 1) + 1 if n_cells > 1 else 2)
    other = max(2, -(-n_cells // side))
    return min(side, other), max(side, other)


def _census(diag: LabelledDiagram):
    """Annulus components (by anchor) and disks, in diagram order."""
    annuli, disks = [], []
    for comp in surface_components(diag):
        pid = comp["pieces"][0]
        if comp["bands"]:
            if comp["chi"] != 0 or comp["boundary"] != 2:
                raise PipelineError(f"component of {pid} is not an annulus (chi {comp['chi']})")
            anchor = diag.band(comp["bands"][0]).start
            annuli.append(anchor)
        elif diag.piece(pid).kind == ANNULUS:
            annuli.append(pid)
        else:
            disks.append(pid)
    order = {p.id: k for k, p in enumerate(diag.pieces)}
    return sorted(annuli, key=order.get), sorted(disks, key=order.get)


def grid_layout(diag: LabelledDiagram, shape: tuple | None = None, assignment=None) -> GridPresentation:
    """Place each component of a crossing-free diagram in a grid slot.

    Annuli go to the annulus slots row-major, disks fill the disk slots;
    every other slot is fake.  ``assignment`` replays a stored placement.
    """
    if crossing_ids(diag):
        raise PipelineError("grid layout needs a diagram without band crossings")
    slots = templates.load("universal")["cell_slots"]
    annuli, disks = _census(diag)
    label_of = {pid: diag.piece(pid).label for pid in annuli + disks}
    d = diag.degree
    if assignment is None:
        a_slots = [n for n, k in slots if k == ANNULUS]
        d_slots = [n for n, k in slots if k == DISK]
        need = max(1, math.ceil(len(annuli) / len(a_slots)), math.ceil(len(disks) / len(d_slots)))
        n1, n2 = shape or grid_shape(need)
        if n1 * n2 < need:
            raise PipelineError(f"grid {n1}x{n2} is too small for {need} cells")
        assignment = []
        for k, pid in enumerate(annuli):
            r, c = divmod(k // len(a_slots), n2)
            assignment.append([GridPresentation.piece_id(a_slots[k % len(a_slots)], r, c), pid])
        for k, pid in enumerate(disks):
            r, c = divmod(k // len(d_slots), n2)
            assignment.append([GridPresentation.piece_id(d_slots[k % len(d_slots)], r, c), pid])
    else:
        n1, n2 = shape
    where = {slot: src for slot, src in assignment}
    if sorted(where.values()) != sorted(annuli + disks):
        raise PipelineError("assignment does not cover the components exactly once")
    ident = Permutation.identity(d)
    cells = []
    for r in range(n1):
        for c in range(n2):
            cell = []
            for name, kind in slots:
                src = where.get(GridPresentation.piece_id(name, r, c))
                if src is not None and (src in annuli) != (kind == ANNULUS):
                    raise PipelineError(f"{src} does not fit slot {name}")
                cell.append((name, Slot(kind, label_of[src] if src else ident, src)))
            cells.append(tuple(cell))
    return GridPresentation(n1, n2, d, tuple(cells))


# quotients


AXES = ("columns", "rows", "center")


@dataclass(frozen=True)
class QuotientDescriptor:
    """A cyclic symmetry of a band-free diagram.

    ``orbits[j][k]`` is the copy of the ``j``-th orbit lying in sector
    ``k``; ``names[j]`` is its id downstairs.  ``fixed`` names the piece
    along the fixed locus: new, or an existing fake piece outside every
    orbit.  ``enclosed`` is the word of the loop around the fixed locus
    inside one sector; its monodromy must be trivial.
    """

    axis: str
    order: int
    orbits: tuple
    fixed: str
    names: tuple = ()
    enclosed: tuple = ()

    def __post_init__(self):
        if self.axis not in AXES:
            raise QuotientError(f"unknown axis {self.axis!r}")
        if self.order < 1:
            raise QuotientError("order must be positive")
        if self.axis == "center" and self.order != 2:
            raise QuotientError("the central symmetry has order 2")

    def name(self, j: int) -> str:
        return self.names[j] if self.names else self.orbits[j][0]


def block_label(labels, d: int) -> Permutation:
    """Sheet ``k*d + i`` goes to ``k*d + labels[k](i)``."""
    img = []
    for k, lab in enumerate(labels):
        img += [k * d + lab(i) for i in range(d)]
    return Permutation(tuple(img))


def shift_label(order: int, d: int, theta: Permutation | None = None) -> Permutation:
    """Sheet ``k*d + i`` goes to ``(k+1)*d + i``, twisted by ``theta`` on the last block."""
    img = []
    for k in range(order):
        for i in range(d):
            j = theta(i) if (theta is not None and k == order - 1) else i
            img.append(((k + 1) % order) * d + j)
    return Permutation(tuple(img))


def compose_quotient(diag: LabelledDiagram, q: QuotientDescriptor) -> LabelledDiagram:
    """Compose the covering with the quotient map of ``q``; degree becomes ``order * d``."""
    if diag.bands:
        raise QuotientError("compose_quotient works on band-free diagrams")
    if q.order == 1:
        return diag
    ids = {p.id for p in diag.pieces}
    seen = []
    for orb in q.orbits:
        if len(orb) != q.order:
            raise QuotientError(f"orbit {orb} has {len(orb)} copies, order is {q.order}")
        kinds = {diag.piece(p).kind for p in orb if p in ids} if all(p in ids for p in orb) else None
        if kinds is None:
            raise QuotientError(f"orbit {orb} names a missing piece")
        if len(kinds) != 1:
            raise QuotientError(f"diagram is not symmetric: orbit {orb} mixes {sorted(kinds)}")
        seen += orb
    if len(seen) != len(set(seen)):
        raise QuotientError("a piece lies in two orbits")
    rest = ids - set(seen)
    if q.fixed in ids:
        fp = diag.piece(q.fixed)
        if not fp.fake or fp.kind != DISK:
            raise QuotientError(f"fixed locus {q.fixed} meets branch piece {q.fixed}: singular point")
        rest.discard(q.fixed)
    if rest:
        raise QuotientError(f"fixed locus meets branch pieces {sorted(rest)}: singular point")
    d = diag.degree
    theta = monodromy_of_word(diag, q.enclosed)
    if not theta.is_identity():
        raise QuotientError(f"loop around the fixed locus has monodromy {theta}, not the identity")
    pieces = []
    for j, orb in enumerate(q.orbits):
        first = diag.piece(orb[0])
        labels = [diag.piece(p).label for p in orb]
        fake = all(diag.piece(p).fake for p in orb)
        pieces.append(Piece(q.name(j), first.kind, block_label(labels, d), fake=fake))
    pieces.append(Piece(q.fixed, DISK, shift_label(q.order, d, theta)))
    return solve_labels(q.order * d, pieces, [])


def grid_quotient(g: GridPresentation, axis: str, order: int, fixed: str) -> QuotientDescriptor:
    """Rotation of the grid by ``1/order`` of a turn along ``axis``.

    A columns rotation moves cell ``(r, c)`` to ``(r, c + n2/order)``;
    the orbit of a base cell is named after it.
    """
    n = g.n2 if axis == "columns" else g.n1
    if axis not in ("columns", "rows") or order < 1 or n % order:
        raise QuotientError(f"order {order} does not divide the {axis} count {n}")
    step = n // order
    names = [x for x, _ in templates.load("universal")["cell_slots"]]
    orbits, out = [], []
    for r in range(g.n1 if axis == "columns" else step):
        for c in range(step if axis == "columns" else g.n2):
            for x in names:
                if axis == "columns":
                    orb = tuple(g.piece_id(x, r, c + k * step) for k in range(order))
                else:
                    orb = tuple(g.piece_id(x, r + k * step, c) for k in range(order))
                orbits.append(orb)
                out.append(f"{x}{r}" if (axis == "columns" and step == 1) else orb[0])
    return QuotientDescriptor(axis, order, tuple(orbits), fixed, tuple(out))


def column_quotient(g: GridPresentation) -> QuotientDescriptor:
    """``r2``: rotation by one column; one orbit per row and slot."""
    return grid_quotient(g, "columns", g.n2, "Q2")


def row_quotient(n1: int, split_ids, fake_annuli) -> QuotientDescriptor:
    """``r1``: rotation by one row, after the ``r2`` disk was split and fake annuli added."""
    names = [n for n, _ in templates.load("universal")["cell_slots"]]
    orbits = [tuple(f"{n}{r}" for r in range(n1)) for n in names]
    orbits += [tuple(split_ids), tuple(fake_annuli)]
    return QuotientDescriptor("rows", n1, tuple(orbits), "Q1", tuple(names) + ("Q2", "FA"))


def centre_quotient() -> QuotientDescriptor:
    tpl = templates.load("universal")
    pairs = tuple(tuple(p) for p in tpl["centre_pairs"])
    return QuotientDescriptor("center", 2, pairs, tpl["centre_fixed"], tuple(p[0] for p in pairs))


# stage helpers recorded for replay


def add_fakes(diag: LabelledDiagram, specs) -> LabelledDiagram:
    """Add identity-labelled pieces ``(id, kind)``."""
    ident = Permutation.identity(diag.degree)
    new = [Piece(pid, kind, ident, fake=True) for pid, kind in specs]
    clash = {p.id for p in new} & set(diag.piece_map)
    if clash:
        raise PipelineError(f"fake ids already used: {sorted(clash)}")
    return solve_labels(diag.degree, list(diag.pieces) + new, list(diag.bands))


def _rec(name, site, params, before, after):
    return MoveRecord(name, tuple(site), params, before.degree, after.degree)


def apply_pipeline_record(diag: LabelledDiagram, rec: MoveRecord) -> LabelledDiagram:
    p = dict(rec.params)
    if rec.name == "grid_layout":
        out = grid_layout(diag, (p["n1"], p["n2"]), p["assignment"]).to_diagram()
    elif rec.name == "quotient":
        q = QuotientDescriptor(
            p["axis"], p["order"], tuple(tuple(o) for o in p["orbits"]), rec.site[0], tuple(p["names"]),
            tuple((r, e) for r, e in p["enclosed"]),
        )
        out = compose_quotient(diag, q)
    elif rec.name == "add_fake":
        out = add_fakes(diag, p["pieces"])
    else:
        return mv.apply_record(diag, rec)
    if out.degree != rec.degree_after:
        raise MoveError(f"{rec.name}: replay reached degree {out.degree}, script says {rec.degree_after}")
    return out


def replay(diag: LabelledDiagram, records) -> LabelledDiagram:
    for rec in records:
        diag = apply_pipeline_record(diag, rec)
    return diag


def _quotient_record(q: QuotientDescriptor, before, after):
    params = _params(
        axis=q.axis, order=q.order, orbits=[list(o) for o in q.orbits], names=list(q.names),
        enclosed=[list(x) for x in q.enclosed],
    )
    return _rec("quotient", (q.fixed,), params, before, after)


# audit and the end-to-end run


@dataclass(frozen=True)
class StageAudit:
    stage: str
    degree: int
    chi: int
    expected: int
    connected: bool
    components: int

    @property
    def ok(self) -> bool:
        return self.chi == self.expected and self.connected


@dataclass
class UniversalPresentation:
    degree: int
    labels: dict  # generator -> Permutation
    diagram: LabelledDiagram
    n1: int
    n2: int
    audit: list = field(default_factory=list)
    records: list = field(default_factory=list)
    start: LabelledDiagram | None = None  # the special presentation the records start from
    quotient_indices: dict = field(default_factory=dict)  # "Q1"/"Q2" -> cycle type at creation
    grid: GridPresentation | None = None

    def to_text(self) -> str:
        lines = ["unisurf-universal 1", f"degree {self.degree}", f"grid {self.n1} {self.n2}"]
        for gen in sorted(self.labels):
            p = self.diagram.piece(gen)
            lines.append(f"generator {gen} {p.kind} {self.labels[gen]}")
        for a in self.audit:
            lines.append(f"stage {a.stage!r} degree {a.degree} chi {a.chi} connected {int(a.connected)} components {a.components}")
        return "\n".join(lines) + "\n"


class Auditor:
    def __init__(self, expected_chi: int, strict: bool = True):
        self.expected = expected_chi
        self.rows = []
        self.strict = strict

    def __call__(self, stage: str, diag: LabelledDiagram, expected: int | None = None):
        exp = self.expected if expected is None else expected
        row = StageAudit(stage, diag.degree, covering_euler_char(diag), exp, covering_connected(diag), len(surface_components(diag)))
        self.rows.append(row)
        if self.strict and not row.ok:
            raise PipelineError(f"stage {stage}: chi {row.chi} (expected {exp}), connected {row.connected}")
        return row


def end_to_end(k: KirbyInput, fine_audit: bool = False) -> UniversalPresentation:
    """Run every stage on ``k``; ``fine_audit`` also audits inside symmetrize."""
    chi = 1 - k.m + k.n
    audit = Auditor(chi)
    k = normalize_framings(k)
    initial = build_initial_presentation(k)
    audit("initial presentation", initial, expected=1 - k.m)
    special = attach_bands(initial, k)
    audit("attach bands", special)
    sym = symmetrize(special, audit if fine_audit else None)
    diag = sym.diagram
    records = list(sym.records)
    audit("symmetrize", diag)

    grid = grid_layout(diag)
    gdiag = grid.to_diagram()
    records.append(_rec("grid_layout", (), _params(n1=grid.n1, n2=grid.n2, assignment=grid.assignment()), diag, gdiag))
    audit("grid", gdiag)

    q2 = column_quotient(grid)
    after_r2 = compose_quotient(gdiag, q2)
    records.append(_quotient_record(q2, gdiag, after_r2))
    audit("quotient r2", after_r2)
    indices = {"Q2": after_r2.piece("Q2").label.cycle_type()}

    factors = [after_r2.piece("Q2").label] + [Permutation.identity(after_r2.degree)] * (grid.n1 - 1)
    res = mv.split(after_r2, "Q2", factors)
    split_ids = ["Q2"] + sorted((p.id for p in res.diagram.pieces if p.id.startswith("Q2_")), key=lambda s: int(s[3:]))
    records += res.records
    fake_annuli = [(f"FA{r}", ANNULUS) for r in range(grid.n1)]
    padded = add_fakes(res.diagram, fake_annuli)
    records.append(_rec("add_fake", (), _params(pieces=[list(x) for x in fake_annuli]), res.diagram, padded))
    audit("split r2 disk, fake annuli", padded)

    q1 = row_quotient(grid.n1, split_ids, [x for x, _ in fake_annuli])
    after_r1 = compose_quotient(padded, q1)
    records.append(_quotient_record(q1, padded, after_r1))
    audit("quotient r1", after_r1)
    indices["Q1"] = after_r1.piece("Q1").label.cycle_type()

    fakes = [tuple(x) for x in templates.load("universal")["centre_fakes"]]
    centred = add_fakes(after_r1, fakes)
    records.append(_rec("add_fake", (), _params(pieces=[list(x) for x in fakes]), after_r1, centred))
    audit("centre fakes", centred)

    qc = centre_quotient()
    final = compose_quotient(centred, qc)
    records.append(_quotient_record(qc, centred, final))
    audit("quotient centre", final)

    gens = templates.load("universal")["generators"]
    labels = {g: final.piece(g).label for g in gens}
    return UniversalPresentation(final.degree, labels, final, grid.n1, grid.n2, audit.rows, records, special, indices, grid)


# template check


@dataclass(frozen=True)
class TemplateReport:
    ok: bool
    problems: tuple = ()

    def __bool__(self):
        return self.ok


def template_diagram() -> LabelledDiagram:
    """The unlabelled universal surface, with identity labels in degree 1."""
    census = templates.load("universal")["census"]
    ident = Permutation.identity(1)
    pieces = [Piece(f"{kind}{j}", kind, ident) for kind in sorted(census) for j in range(census[kind])]
    return solve_labels(1, pieces, [])


def template_signature() -> str:
    tpl = templates.load("universal")
    return tpl["signature"] or canonical_signature(template_diagram())


def check_template(u) -> TemplateReport:
    """Compare the underlying surface with the stored template."""
    diag = u.diagram if isinstance(u, UniversalPresentation) else u
    tpl = templates.load("universal")
    problems = []
    census = {}
    try:
        comps = surface_components(diag)
    except DiagramError as err:
        return TemplateReport(False, (str(err),))
    for comp in comps:
        kind = {1: DISK, 0: ANNULUS}.get(comp["chi"], f"chi={comp['chi']}")
        if comp["chi"] == 0 and comp["boundary"] != 2:
            kind = f"chi=0,boundary={comp['boundary']}"
        census[kind] = census.get(kind, 0) + 1
    if census != tpl["census"]:
        problems.append(f"census {dict(sorted(census.items()))} != {tpl['census']}")
    sig = canonical_signature(diag)
    if sig != template_signature():
        problems.append(f"signature {sig[:12]} != template {template_signature()[:12]}")
    return TemplateReport(not problems, tuple(problems))
