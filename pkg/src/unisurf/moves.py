"""Covering moves as precondition-checked rewrites of labelled diagrams.

Every move returns a :class:`MoveResult`: the new diagram, the primitive
records that produced it (replayable, see :func:`apply_record`) and the
auxiliary labels the move promises (the ``rho`` of Moves 2 and 3, the
``rho_j`` of Move 4).  Moves 2 to 6 are macros over the primitives
``stabilize``, ``multi_stabilize``, ``crossing_change``, ``merge``,
``split``, ``move1`` and ``isotopy``.

Local templates are reconstructions; their version is
:data:`TEMPLATE_VERSION` and the golden files live in ``templates/``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .diagram import (
    DISK,
    Band,
    DiagramError,
    Event,
    LabelledDiagram,
    Piece,
    Through,
    solve_labels,
    validate,
)
from . import templates
from .lift import coherence_check
from .perm import Permutation, are_disjoint, conjugate, extend, product

TEMPLATE_VERSION = "provisional-1"


class MoveError(ValueError):
    """A move's precondition does not hold at the requested site."""


@dataclass(frozen=True)
class MoveRecord:
    name: str
    site: tuple = ()
    params: tuple = ()  # sorted (key, value) pairs, values JSON-friendly
    degree_before: int = 0
    degree_after: int = 0
    aux: tuple = ()  # permutations in cycle notation
    stabilizations: int = 0
    macro: bool = False  # header line of a macro; replay skips it

    def param(self, key, default=None):
        return dict(self.params).get(key, default)

    def to_line(self) -> str:
        body = {
            "site": list(self.site),
            "params": {k: v for k, v in self.params},
            "d": [self.degree_before, self.degree_after],
        }
        if self.aux:
            body["aux"] = list(self.aux)
        if self.stabilizations:
            body["stab"] = self.stabilizations
        head = ("macro " if self.macro else "") + self.name
        return head + " " + json.dumps(body, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_line(cls, line: str) -> "MoveRecord":
        parts = line.strip().split(" ", 2 if line.startswith("macro ") else 1)
        macro = parts[0] == "macro"
        if macro:
            parts = parts[1:]
        if len(parts) != 2:
            raise ValueError(f"bad move line: {line!r}")
        name, body = parts
        data = json.loads(body)
        return cls(
            name,
            tuple(data.get("site", ())),
            tuple(sorted((k, _freeze(v)) for k, v in data.get("params", {}).items())),
            data["d"][0],
            data["d"][1],
            tuple(data.get("aux", ())),
            data.get("stab", 0),
            macro,
        )


def _freeze(v):
    if isinstance(v, list):
        return tuple(_freeze(x) for x in v)
    return v


def _params(**kw) -> tuple:
    return tuple(sorted((k, _freeze(v)) for k, v in kw.items()))


@dataclass
class MoveResult:
    diagram: LabelledDiagram
    records: list = field(default_factory=list)
    aux: tuple = ()

    def __iter__(self):
        # allows ``diag, records, aux = move(...)``
        return iter((self.diagram, self.records, self.aux))


def dump_script(records) -> str:
    return "".join(r.to_line() + "\n" for r in records)


def load_script(text: str) -> list:
    return [MoveRecord.from_line(x) for x in text.splitlines() if x.strip() and not x.lstrip().startswith("#")]


# helpers


def _finish(diag: LabelledDiagram, pieces, bands, degree=None) -> LabelledDiagram:
    try:
        out = solve_labels(degree or diag.degree, pieces, bands)
    except DiagramError as err:
        raise MoveError(str(err)) from None
    bad = validate(out)
    if bad:
        raise MoveError("rewrite produced an invalid diagram: " + bad[0])
    return out


def _extended(diag: LabelledDiagram, d_new: int):
    pieces = [replace(p, label=extend(p.label, d_new)) for p in diag.pieces]
    bands = [replace(b, labels=tuple(extend(x, d_new) for x in b.labels)) for b in diag.bands]
    return pieces, bands


def _arc_label(diag: LabelledDiagram, bid: str, index: int) -> Permutation:
    """Label of the arc of band ``bid`` entering event ``index``."""
    b = diag.band(bid)
    return b.labels[b.arc_at(index)]


def _target_label(diag: LabelledDiagram, e: Event) -> Permutation:
    if e.other in diag.piece_map:
        return diag.piece_map[e.other].label
    return diag.band(e.other).labels[e.target_arc]


def _is_standalone(diag: LabelledDiagram, pid: str) -> bool:
    return not any(b.start == pid or b.end == pid for b in diag.bands)


def _require_band(diag, bid) -> Band:
    try:
        return diag.band(bid)
    except DiagramError as err:
        raise MoveError(str(err)) from None


def _require_piece(diag, pid) -> Piece:
    try:
        return diag.piece(pid)
    except DiagramError as err:
        raise MoveError(str(err)) from None


def _shift_targets(bands, bid: str, arc: int, by: int, keep_at=True):
    """Renumber piercings of band ``bid``: arcs after ``arc`` move by ``by``."""
    out = []
    for b in bands:
        evs = []
        for e in b.events:
            if e.kind == "through" and e.other == bid and (e.target_arc > arc or (e.target_arc == arc and not keep_at)):
                e = replace(e, target_arc=e.target_arc + by)
            evs.append(e)
        out.append(replace(b, events=tuple(evs)))
    return out


def _replace_band(bands, new: Band):
    return [new if b.id == new.id else b for b in bands]


def _rewrite_band(bands, bid: str, events, arc_map) -> list:
    """Swap in new events for ``bid`` and renumber every piercing of it."""
    out = []
    for b in bands:
        if b.id == bid:
            b = replace(b, events=tuple(events), labels=())
        evs = []
        for e in b.events:
            if e.kind == "through" and e.other == bid:
                new = arc_map(e.target_arc)
                if new is None:
                    raise MoveError(f"band {b.id} pierces a part of {bid} that the rewrite removes")
                e = replace(e, target_arc=new)
            evs.append(e)
        out.append(replace(b, events=tuple(evs)))
    return out


# primitives


def stabilize(diag: LabelledDiagram, i: int) -> MoveResult:
    """Add a trivial sheet ``d`` and a separate disk labelled ``(i d)``."""
    return multi_stabilize(diag, [i], _name="stabilize")


def multi_stabilize(diag: LabelledDiagram, sheets, _name="multi_stabilize") -> MoveResult:
    """Add ``l`` sheets at once.

    With distinct old sheets the new disks are merged into one labelled
    ``(i_1 d)(i_2 d+1)...``; otherwise one disk per sheet.
    """
    sheets = [int(x) for x in sheets]
    d = diag.degree
    if not sheets:
        raise MoveError("multi-stabilization needs at least one sheet")
    for j, i in enumerate(sheets):
        if not 0 <= i < d + j:
            raise MoveError(f"sheet {i} out of range for degree {d + j}")
    d_new = d + len(sheets)
    pieces, bands = _extended(diag, d_new)
    T = Permutation.transposition
    if len(set(sheets)) == len(sheets) and max(sheets) < d:
        pid = diag.fresh_id("R")
        lab = product((T(i, d + j, d_new) for j, i in enumerate(sheets)), d_new)
        pieces.append(Piece(pid, DISK, lab))
        new_ids = [pid]
    else:
        new_ids = []
        scratch = diag
        for j, i in enumerate(sheets):
            pid = scratch.fresh_id("R")
            pieces.append(Piece(pid, DISK, T(i, d + j, d_new)))
            scratch = scratch.with_parts(pieces=scratch.pieces + (Piece(pid, DISK, Permutation.identity(1)),))
            new_ids.append(pid)
    out = _finish(diag, pieces, bands, d_new)
    rec = MoveRecord(_name, tuple(new_ids), _params(sheets=sheets), d, d_new, (), len(sheets))
    return MoveResult(out, [rec], tuple(out.piece(p).label for p in new_ids))


def _crossing_sites(diag: LabelledDiagram, cid: str):
    over = under = None
    for b in diag.bands:
        for k, e in enumerate(b.events):
            if e.crossing == cid and e.kind == "over":
                over = (b.id, k)
            elif e.crossing == cid and e.kind == "under":
                under = (b.id, k)
    if over is None or under is None:
        raise MoveError(f"no crossing {cid!r}")
    return over, under


def crossing_labels(diag: LabelledDiagram, cid: str):
    """Labels of the over and under strands at a crossing."""
    (ob, ok), (ub, uk) = _crossing_sites(diag, cid)
    return _arc_label(diag, ob, ok), _arc_label(diag, ub, uk)


def crossing_change(diag: LabelledDiagram, cid: str) -> MoveResult:
    a, b = crossing_labels(diag, cid)
    if not are_disjoint(a, b):
        raise MoveError(f"crossing {cid}: labels {a} and {b} are not disjoint")
    bands = []
    for band in diag.bands:
        evs = tuple(
            replace(e, kind="under" if e.kind == "over" else "over") if e.crossing == cid and e.kind != "through" else e
            for e in band.events
        )
        bands.append(replace(band, events=evs))
    out = _finish(diag, diag.pieces, bands)
    return MoveResult(out, [MoveRecord("crossing_change", (cid,), (), diag.degree, diag.degree)])


def _runs(band: Band, family: list):
    """Positions of the through-runs of ``band`` across ``family``.

    Yields ``(start index, direction)``; raises when a member is met
    outside a complete run in fiber order.
    """
    fam = set(family)
    k, n = 0, len(family)
    evs = band.events
    while k < len(evs):
        e = evs[k]
        if e.kind == "through" and e.other in fam:
            order = family if e.sign > 0 else family[::-1]
            chunk = evs[k:k + n]
            if len(chunk) != n or any(x.kind != "through" or x.other != f or x.sign != e.sign for x, f in zip(chunk, order)):
                raise MoveError(f"band {band.id} does not cross the family in fiber order")
            yield k, e.sign
            k += n
        else:
            k += 1


def merge(diag: LabelledDiagram, family) -> MoveResult:
    """Merge a parallel family of pieces, listed in fiber order, into one."""
    family = list(family)
    if len(family) != len(set(family)):
        raise MoveError("family lists a piece twice")
    pieces = [_require_piece(diag, p) for p in family]
    if len(family) == 1:
        return MoveResult(diag, [], ())
    if len({p.kind for p in pieces}) != 1:
        raise MoveError("family mixes disks and annuli")
    for p in family:
        if not _is_standalone(diag, p):
            raise MoveError(f"piece {p} has bands attached; not a parallel family")
    sigmas = [p.label for p in pieces]
    coh = coherence_check(sigmas)
    if not coh:
        raise MoveError("labels are not coherent:\n" + coh.report())
    n = len(family)
    bands = list(diag.bands)
    for band in diag.bands:
        runs = list(_runs(band, family))
        if not runs:
            continue
        starts = {k for k, _ in runs}
        evs, arc_map, old_arc, new_arc, k = [], {}, 0, 0, 0
        while k < len(band.events):
            arc_map[old_arc] = new_arc
            if k in starts:
                sign = band.events[k].sign
                evs.append(Through(family[0], sign))
                old_arc += n
                new_arc += 1
                k += n
                continue
            e = band.events[k]
            evs.append(e)
            if e.changes_label:
                old_arc += 1
                new_arc += 1
            k += 1
        arc_map[old_arc] = new_arc
        bands = _rewrite_band(bands, band.id, evs, arc_map.get)
    merged = replace(pieces[0], label=product(sigmas, diag.degree), fake=all(p.fake for p in pieces))
    new_pieces = [merged if p.id == family[0] else p for p in diag.pieces if p.id not in family[1:]]
    out = _finish(diag, new_pieces, bands)
    return MoveResult(out, [MoveRecord("merge", tuple(family), (), diag.degree, diag.degree)])


def split(diag: LabelledDiagram, pid: str, factors) -> MoveResult:
    """Replace a piece by parallel copies labelled ``factors`` in fiber order.

    Identity factors become fake pieces.
    """
    piece = _require_piece(diag, pid)
    factors = [f if isinstance(f, Permutation) else Permutation.parse(f, diag.degree) for f in factors]
    if not factors:
        raise MoveError("split needs at least one factor")
    if any(f.degree != diag.degree for f in factors):
        raise MoveError("factor degree mismatch")
    if product(factors, diag.degree) != piece.label:
        raise MoveError(f"product of factors is not the label {piece.label} of {pid}")
    if len(factors) == 1:
        return MoveResult(diag, [], ())
    coh = coherence_check(factors)
    if not coh:
        raise MoveError("factors are not coherent:\n" + coh.report())
    if not _is_standalone(diag, pid):
        raise MoveError(f"piece {pid} has bands attached")
    n = len(factors)
    ids = [pid]
    scratch = diag
    for _ in range(n - 1):
        nid = scratch.fresh_id(pid + "_")
        ids.append(nid)
        scratch = scratch.with_parts(pieces=scratch.pieces + (Piece(nid, DISK, Permutation.identity(1)),))
    bands = list(diag.bands)
    for band in diag.bands:
        if not any(e.kind == "through" and e.other == pid for e in band.events):
            continue
        evs, arc_map, old_arc, new_arc = [], {}, 0, 0
        for e in band.events:
            arc_map[old_arc] = new_arc
            if e.kind == "through" and e.other == pid:
                order = ids if e.sign > 0 else ids[::-1]
                evs += [Through(x, e.sign) for x in order]
                old_arc += 1
                new_arc += n
                continue
            evs.append(e)
            if e.changes_label:
                old_arc += 1
                new_arc += 1
        arc_map[old_arc] = new_arc
        bands = _rewrite_band(bands, band.id, evs, arc_map.get)
    new_pieces = []
    for p in diag.pieces:
        if p.id != pid:
            new_pieces.append(p)
            continue
        for x, f in zip(ids, factors):
            new_pieces.append(Piece(x, piece.kind, f, fake=f.is_identity() or piece.fake))
    out = _finish(diag, new_pieces, bands)
    rec = MoveRecord("split", (pid,), _params(factors=[str(f) for f in factors]), diag.degree, diag.degree)
    return MoveResult(out, [rec], ())


def move1(diag: LabelledDiagram, t1: str, t2: str, pairing) -> MoveResult:
    """Join two facing tongues into one band through a cocore disk.

    ``pairing`` lists ``(j, k)`` pairs, all ``2l`` sheets distinct; the
    cocore disk gets ``lam = (j_1 k_1)...(j_l k_l)``.  The tip labels must
    satisfy ``beta = alpha^lam`` and ``alpha`` must have ``d - l`` cycles,
    so that the cocore disk cancels the new band in the Euler count.
    """
    a, b = _require_band(diag, t1), _require_band(diag, t2)
    if t1 == t2 or not (a.is_tongue and b.is_tongue):
        raise MoveError("move1 needs two distinct tongues")
    pairs = [tuple(int(x) for x in pr) for pr in pairing]
    flat = [x for pr in pairs for x in pr]
    d = diag.degree
    if not pairs or any(len(pr) != 2 for pr in pairs):
        raise MoveError("pairing must be a non-empty list of (j, k)")
    if len(set(flat)) != len(flat):
        raise MoveError(f"pairing indices are not all distinct: {flat}")
    if any(not 0 <= x < d for x in flat):
        raise MoveError("pairing index out of range")
    lam = Permutation.from_cycles(pairs, d)
    alpha, beta = a.tip_label, b.tip_label
    if conjugate(alpha, lam) != beta:
        raise MoveError(f"tip labels {alpha} and {beta} are not related by {lam}")
    if alpha.ncycles() != d - len(pairs):
        raise MoveError(f"tip label {alpha} must have d - l = {d - len(pairs)} cycles")
    if a.start == b.start and a.start_pos == b.start_pos:
        raise MoveError("tongues leave from the same point")
    cocore = diag.fresh_id("L")
    twice = {e.crossing for e in b.events if e.crossing and sum(x.crossing == e.crossing for x in b.events) == 2}
    flip = {e.crossing for e in b.events if e.crossing and e.crossing not in twice}

    def fix(e, reverse=False):
        if e.kind == "through":
            return replace(e, sign=-e.sign) if reverse else e
        if e.crossing in flip:
            e = replace(e, sign=-e.sign)
        if e.other == t2:
            e = replace(e, other=t1)
        return e

    events = [fix(e) for e in a.events] + [Through(cocore)] + [fix(e, True) for e in reversed(b.events)]
    n1, n2 = a.narcs, b.narcs
    joined = Band(t1, a.start, b.start, tuple(events), (), a.start_pos, b.start_pos)
    bands = []
    for band in diag.bands:
        if band.id == t2:
            continue
        if band.id == t1:
            bands.append(joined)
            continue
        evs = []
        for e in band.events:
            if e.kind == "through" and e.other == t2:
                e = replace(e, other=t1, target_arc=n1 + (n2 - 1 - e.target_arc))
            elif e.kind != "through":
                e = fix(e)
            evs.append(e)
        bands.append(replace(band, events=tuple(evs)))
    # piercings of t1 keep their arc numbers; fix self-references inside the joined band
    joined_evs = []
    for k, e in enumerate(joined.events):
        if e.kind == "through" and e.other == t2:
            e = replace(e, other=t1, target_arc=n1 + (n2 - 1 - e.target_arc))
        joined_evs.append(e)
    bands = [replace(x, events=tuple(joined_evs)) if x.id == t1 else x for x in bands]
    pieces = list(diag.pieces) + [Piece(cocore, DISK, lam)]
    out = _finish(diag, pieces, bands)
    rec = MoveRecord("move1", (t1, t2), _params(pairing=pairs), d, d)
    return MoveResult(out, [rec], (lam,))


# isotopies

ISOTOPIES = ("slide", "kink_insert", "kink_cancel", "translate", "uncross")


def isotopy(diag: LabelledDiagram, rewrite: str, **kw) -> MoveResult:
    """Structural rewrites that leave the covering alone.

    * ``slide(band, index, piece, reverse=False, span=0, wrap_target=False)``:
      push a finger of the band through a separate piece, enclosing the
      ``span`` events from ``index`` on (at the tip of a tongue with
      ``span=0`` the tip itself is stretched through).  With
      ``wrap_target`` the band pierced inside the finger gets a finger
      through the same piece and the piercing moves onto it;
    * ``kink_insert(band, index, sign)`` / ``kink_cancel(band, index)``;
    * ``translate(band, index, piece=None, direction=1)``: drop (or, with
      ``piece``, add) a piercing whose labels are disjoint from the band's;
    * ``uncross(band, index)``: drop the crossing at ``index`` when the two
      strands carry disjoint labels (such crossings change freely, so the
      strands can be pulled apart).
    """
    fn = {
        "slide": _slide,
        "kink_insert": _kink_insert,
        "kink_cancel": _kink_cancel,
        "translate": _translate,
        "uncross": _uncross,
    }.get(rewrite)
    if fn is None:
        raise MoveError(f"unknown isotopy {rewrite!r}")
    out = fn(diag, **kw)
    site = (kw["band"],) + ((kw["piece"],) if kw.get("piece") else ())
    params = {k: v for k, v in kw.items() if k not in ("band", "piece") and v is not None}
    rec = MoveRecord(rewrite, site, _params(**params), diag.degree, diag.degree)
    return MoveResult(out, [rec], ())


def _check_index(band: Band, index: int, upto: int):
    if not 0 <= index <= upto:
        raise MoveError(f"band {band.id}: event index {index} out of range")


def _slide(diag, band, index, piece, reverse=False, span=0, wrap_target=False, stretch=None):
    b = _require_band(diag, band)
    _require_piece(diag, piece)
    evs = list(b.events)
    if reverse:
        return _unslide(diag, b, index, piece)
    _check_index(b, index, len(evs) - span)
    if not _is_standalone(diag, piece):
        raise MoveError(f"piece {piece} has bands attached and cannot be slid over")
    if b.is_tongue and index == len(evs) and span == 0 and stretch is not False:
        new = evs + [Through(piece)]
        return _finish(diag, diag.pieces, _rewrite_band(diag.bands, band, new, lambda x: x))
    a0 = b.arc_at(index)
    inner = evs[index:index + span]
    grown = sum(e.changes_label for e in inner)
    if grown and not wrap_target:
        raise MoveError(f"band {band}: a finger may only enclose crossings unless wrap_target is set")
    new = evs[:index] + [Through(piece, 1)] + inner + [Through(piece, -1)] + evs[index + span:]
    bands = _rewrite_band(diag.bands, band, new, lambda x: x if x <= a0 else x + 1 if x <= a0 + grown else x + 2)
    if wrap_target:
        # the pierced band gets a finger through the same piece, carrying the piercing
        if span != 1 or inner[0].kind != "through" or inner[0].other not in diag.band_map:
            raise MoveError("wrap_target needs one piercing of a band inside the finger")
        tgt = diag.band(inner[0].other)
        if tgt.id == band:
            raise MoveError("wrap_target on a self-piercing")
        arc = inner[0].target_arc
        changing = [k for k, e in enumerate(tgt.events) if e.changes_label]
        pos = 0 if arc == 0 else changing[arc - 1] + 1
        tev = list(tgt.events)
        tnew = tev[:pos] + [Through(piece, 1), Through(piece, -1)] + tev[pos:]
        bands = _rewrite_band(bands, tgt.id, tnew, lambda x: x if x <= arc else x + 2)
        bands = [
            replace(x, events=tuple(replace(e, target_arc=arc + 1) if k == index + 1 else e for k, e in enumerate(x.events)))
            if x.id == band else x
            for x in bands
        ]
    return _finish(diag, diag.pieces, bands)


def _unslide(diag, b, index, piece):
    evs = list(b.events)
    _check_index(b, index, len(evs) - 1)
    last = b.narcs - 1
    if b.is_tongue and index == len(evs) - 1 and evs[index] == Through(piece):
        new = evs[:-1]
        return _finish(diag, diag.pieces, _rewrite_band(diag.bands, b.id, new, lambda x: None if x == last else x))
    if evs[index:index + 2] != [Through(piece, 1), Through(piece, -1)]:
        raise MoveError(f"band {b.id}: no finger through {piece} at {index}")
    a0 = b.arc_at(index)
    new = evs[:index] + evs[index + 2:]

    def amap(x):
        if x == a0 + 1:
            return None
        return x if x <= a0 else x - 2

    return _finish(diag, diag.pieces, _rewrite_band(diag.bands, b.id, new, amap))


def _kink_insert(diag, band, index, sign=1):
    b = _require_band(diag, band)
    _check_index(b, index, len(b.events))
    cid = diag.fresh_id("k")
    pair = [Event("over", band, cid, sign), Event("under", band, cid, sign)]
    new = list(b.events[:index]) + pair + list(b.events[index:])
    return _finish(diag, diag.pieces, _rewrite_band(diag.bands, band, new, lambda x: x))


def _kink_cancel(diag, band, index):
    b = _require_band(diag, band)
    _check_index(b, index, len(b.events) - 2)
    e1, e2 = b.events[index], b.events[index + 1]
    if e1.kind == "through" or e2.kind == "through" or e1.crossing != e2.crossing or e1.other != band:
        raise MoveError(f"band {band}: no kink at {index}")
    new = b.events[:index] + b.events[index + 2:]
    return _finish(diag, diag.pieces, _rewrite_band(diag.bands, band, new, lambda x: x))


def _translate(diag, band, index, piece=None, direction=1):
    b = _require_band(diag, band)
    evs = list(b.events)
    if piece is None:
        _check_index(b, index, len(evs) - 1)
        e = evs[index]
        if e.kind != "through":
            raise MoveError(f"band {band}: event {index} is not a piercing")
        here, rho = _arc_label(diag, band, index), _target_label(diag, e)
        if not are_disjoint(here, rho):
            raise MoveError(f"band {band}: labels {here} and {rho} are not disjoint")
        a0 = b.arc_at(index)
        new = evs[:index] + evs[index + 1:]
        return _finish(diag, diag.pieces, _rewrite_band(diag.bands, band, new, lambda x: x if x <= a0 else x - 1))
    _check_index(b, index, len(evs))
    if piece not in diag.piece_map:
        raise MoveError(f"no piece {piece!r}")
    here = b.labels[b.arc_at(index)] if index < len(evs) else b.labels[-1]
    if not are_disjoint(here, diag.piece(piece).label):
        raise MoveError(f"band {band}: labels {here} and {diag.piece(piece).label} are not disjoint")
    a0 = b.arc_at(index)
    new = evs[:index] + [Through(piece, direction)] + evs[index:]
    return _finish(diag, diag.pieces, _rewrite_band(diag.bands, band, new, lambda x: x if x <= a0 else x + 1))


def _uncross(diag, band, index):
    b = _require_band(diag, band)
    _check_index(b, index, len(b.events) - 1)
    cid = b.events[index].crossing
    if cid is None:
        raise MoveError(f"band {band}: event {index} is not a crossing")
    a, c = crossing_labels(diag, cid)
    if not are_disjoint(a, c):
        raise MoveError(f"crossing {cid}: labels {a} and {c} are not disjoint")
    bands = [replace(x, events=tuple(e for e in x.events if e.crossing != cid)) for x in diag.bands]
    return _finish(diag, diag.pieces, bands)


# macros


class _Chain:
    """Runs primitives in sequence and collects their records."""

    def __init__(self, diag: LabelledDiagram):
        self.start = diag
        self.diag = diag
        self.records = []

    def run(self, result: MoveResult) -> MoveResult:
        self.diag = result.diagram
        self.records += result.records
        return result

    def done(self, name, site, params, aux=()) -> MoveResult:
        if not self.records:
            return MoveResult(self.diag, [], tuple(aux))
        stab = sum(r.stabilizations for r in self.records if not r.macro)
        head = MoveRecord(
            name, tuple(site), params, self.start.degree, self.diag.degree, tuple(str(a) for a in aux), stab, True
        )
        return MoveResult(self.diag, [head] + self.records, tuple(aux))


def _cycle_stabilizations(chain: _Chain, sigma: Permutation) -> list:
    """Multi-stabilize once per non-trivial cycle of ``sigma`` (least element first).

    For a cycle ``(i j_1 ... j_l)`` the new disk is ``(j_1 d)...(j_l d+l-1)``.
    """
    ids = []
    for cyc in sigma.cycles():
        if len(cyc) > 1:
            res = chain.run(multi_stabilize(chain.diag, list(cyc[1:])))
            ids.append(res.records[0].site[0])
    return ids


def move2(diag: LabelledDiagram, t1: str, t2: str, sigma: Permutation | None = None) -> MoveResult:
    """Two facing tongues labelled ``sigma`` become one band through two ``rho`` disks.

    Expansion: a multi-stabilization per cycle, the tip of ``t1`` stretched
    through the new disks, Move 1 with ``lam = rho``, then the stabilization
    disks merged.  ``rho`` is returned as the only auxiliary label.
    """
    a, b = _require_band(diag, t1), _require_band(diag, t2)
    if not (a.is_tongue and b.is_tongue) or t1 == t2:
        raise MoveError("move2 needs two distinct tongues")
    if a.tip_label != b.tip_label:
        raise MoveError(f"tongue tips carry {a.tip_label} and {b.tip_label}, not one label")
    if sigma is not None and sigma != a.tip_label:
        raise MoveError(f"site is labelled {a.tip_label}, not {sigma}")
    sigma = a.tip_label
    chain = _Chain(diag)
    if sigma.is_identity():
        return chain.done("move2", (t1, t2), (), (Permutation.identity(diag.degree),))
    disks = _cycle_stabilizations(chain, sigma)
    for pid in disks:
        chain.run(isotopy(chain.diag, "slide", band=t1, index=len(chain.diag.band(t1).events), piece=pid))
    rho = product((chain.diag.piece(p).label for p in disks), chain.diag.degree)
    pairing = sorted((x, rho(x)) for x in rho.support() if x < rho(x))
    chain.run(move1(chain.diag, t1, t2, pairing))
    chain.run(merge(chain.diag, disks))
    return chain.done("move2", (t1, t2), _params(sigma=str(sigma)), (rho,))


def move3(diag: LabelledDiagram, band: str, index: int, sigma: Permutation | None = None, span: int = 0) -> MoveResult:
    """A band labelled ``sigma`` gets a finger through a new ``rho`` disk.

    ``index`` is the event before which the finger sits (``len(events)``
    for the final arc); the finger may enclose ``span`` crossings.  Inside
    the finger the label is ``sigma^rho``.
    """
    b = _require_band(diag, band)
    _check_index(b, index, len(b.events) - span)
    here = b.labels[b.arc_at(index)] if index < len(b.events) else b.labels[-1]
    if sigma is not None and sigma != here:
        raise MoveError(f"band {band} is labelled {here} there, not {sigma}")
    chain = _Chain(diag)
    if here.is_identity():
        return chain.done("move3", (band,), (), (Permutation.identity(diag.degree),))
    disks = _cycle_stabilizations(chain, here)
    for k, pid in enumerate(disks):
        chain.run(isotopy(chain.diag, "slide", band=band, index=index + k, piece=pid, span=span, stretch=False))
    rho = product((chain.diag.piece(p).label for p in disks), chain.diag.degree)
    chain.run(merge(chain.diag, disks))
    return chain.done("move3", (band,), _params(index=index, span=span, sigma=str(here)), (rho,))


def move4(diag: LabelledDiagram, band: str, index: int) -> MoveResult:
    """Ribbon intersection of simple bands rewritten through a ``rho`` disk.

    Band ``band`` (label ``tau1``) pierces another band (label ``tau2``) at
    event ``index``; afterwards both pass through a disk labelled by two
    disjoint transpositions and the far side of ``band`` carries
    ``tau3 = tau2^-1 tau1 tau2``.
    """
    b = _require_band(diag, band)
    _check_index(b, index, len(b.events) - 1)
    e = b.events[index]
    if e.kind != "through" or e.other not in diag.band_map:
        raise MoveError("move4 needs a band piercing another band")
    if e.other == band:
        raise MoveError("move4 does not handle a band piercing itself")
    tau1, tau2 = _arc_label(diag, band, index), _target_label(diag, e)
    if not (tau1.is_transposition() and tau2.is_transposition()):
        raise MoveError(f"move4 needs transpositions, got {tau1} and {tau2}")
    if tau1 == tau2:
        raise MoveError(f"move4 needs distinct transpositions, both are {tau1}")
    shared = sorted(tau1.support() & tau2.support())
    if shared:
        p = shared[0]
        q = min(tau2.support() - {p})
    else:
        p, q = min(tau1.support()), min(tau2.support())
    chain = _Chain(diag)
    res = chain.run(multi_stabilize(diag, [p, q]))
    pid = res.records[0].site[0]
    chain.run(isotopy(chain.diag, "slide", band=band, index=index, piece=pid, span=1, wrap_target=True))
    rho = chain.diag.piece(pid).label
    return chain.done("move4", (band,), _params(index=index, tau1=str(tau1), tau2=str(tau2)), (rho,))


def move5(diag: LabelledDiagram, cid: str) -> MoveResult:
    """Eight applications of Move 3 around a crossing.

    Each strand gets four nested fingers enclosing the crossing, so both
    labels at the crossing move onto fresh sheets and share at most one
    old sheet.  A positive crossing treats the over strand first, a
    negative one the under strand.
    """
    tpl = templates.load("moves")["move5"]
    (ob, ok), (ub, _) = _crossing_sites(diag, cid)
    sign = diag.band(ob).events[ok].sign
    order = [(ob, "over"), (ub, "under")]
    if tpl["positive_first" if sign > 0 else "negative_first"] == "under":
        order.reverse()
    chain = _Chain(diag)
    aux = []
    for bid, kind in order:
        for _ in range(tpl["fingers_per_strand"]):
            k = next(i for i, e in enumerate(chain.diag.band(bid).events) if e.crossing == cid and e.kind == kind)
            res = chain.run(move3(chain.diag, bid, k, span=1))
            aux += list(res.aux)
    return chain.done("move5", (cid,), _params(sign=sign), tuple(aux))


def move6(diag: LabelledDiagram, cid: str) -> MoveResult:
    """Crossing of non-disjoint labels turned into a piercing of a stabilizing disk.

    With ``s`` the least common sheet, a disk ``(s d)`` is added, the under
    strand gets a finger through it around the crossing, and the crossing,
    now between disjoint labels, is changed.
    """
    alpha, beta = crossing_labels(diag, cid)
    if alpha == beta:
        raise MoveError(f"crossing {cid}: both strands are labelled {alpha}")
    if are_disjoint(alpha, beta):
        raise MoveError(f"crossing {cid}: labels {alpha} and {beta} are disjoint, use crossing_change")
    s = min(alpha.support() & beta.support())
    d = diag.degree
    rho = Permutation.transposition(s, d, d + 1)
    if not are_disjoint(extend(alpha, d + 1), conjugate(extend(beta, d + 1), rho)):
        raise MoveError(f"crossing {cid}: template needs {alpha} disjoint from {beta} conjugated by {rho}")
    (ub, uk) = _crossing_sites(diag, cid)[1]
    chain = _Chain(diag)
    res = chain.run(stabilize(diag, s))
    pid = res.records[0].site[0]
    chain.run(isotopy(chain.diag, "slide", band=ub, index=uk, piece=pid, span=1))
    chain.run(crossing_change(chain.diag, cid))
    return chain.done("move6", (cid,), (), (rho,))


# replay

PRIMITIVES = ("stabilize", "multi_stabilize", "crossing_change", "merge", "split", "move1") + ISOTOPIES
MACROS = {"move2": move2, "move3": move3, "move4": move4, "move5": move5, "move6": move6}


def apply_record(diag: LabelledDiagram, rec: MoveRecord) -> LabelledDiagram:
    """Re-run one primitive record; macro headers are no-ops."""
    if rec.macro:
        return diag
    if diag.degree != rec.degree_before:
        raise MoveError(f"{rec.name}: script expects degree {rec.degree_before}, diagram has {diag.degree}")
    p = dict(rec.params)
    if rec.name == "stabilize":
        out = stabilize(diag, p["sheets"][0])
    elif rec.name == "multi_stabilize":
        out = multi_stabilize(diag, p["sheets"])
    elif rec.name == "crossing_change":
        out = crossing_change(diag, rec.site[0])
    elif rec.name == "merge":
        out = merge(diag, rec.site)
    elif rec.name == "split":
        out = split(diag, rec.site[0], p["factors"])
    elif rec.name == "move1":
        out = move1(diag, rec.site[0], rec.site[1], p["pairing"])
    elif rec.name in ISOTOPIES:
        kw = dict(p)
        kw["band"] = rec.site[0]
        if len(rec.site) > 1:
            kw["piece"] = rec.site[1]
        out = isotopy(diag, rec.name, **kw)
    else:
        raise MoveError(f"unknown move {rec.name!r}")
    if out.diagram.degree != rec.degree_after:
        raise MoveError(f"{rec.name}: replay reached degree {out.diagram.degree}, script says {rec.degree_after}")
    return out.diagram


def replay(diag: LabelledDiagram, records) -> LabelledDiagram:
    for rec in records:
        diag = apply_record(diag, rec)
    return diag


# moves by name, for drivers that only hold strings

MOVES = (
    "stabilize", "multi_stabilize", "crossing_change", "merge", "split",
    "move1", "move2", "move3", "move4", "move5", "move6",
) + ISOTOPIES


_PARAM_KEYS = {
    "stabilize": {"sheet"},
    "multi_stabilize": {"sheets"},
    "split": {"factors"},
    "move1": {"pairing"},
    "move2": {"sigma"},
    "move3": {"index", "sigma", "span"},
    "move4": {"index"},
    "slide": {"index", "reverse", "span", "wrap_target", "stretch"},
    "kink_insert": {"index", "sign"},
    "kink_cancel": {"index"},
    "translate": {"index", "direction"},
    "uncross": {"index"},
}


def _arity(name, site, n):
    if len(site) != n:
        raise MoveError(f"{name} takes {n} site id{'s' if n > 1 else ''}, got {len(site)}")


def run_move(diag: LabelledDiagram, name: str, site=(), params=None) -> MoveResult:
    """Apply move ``name`` at ``site`` (ids) with JSON-style ``params``.

    Permutations in ``params`` may be given in cycle notation.
    """
    p = dict(params or {})
    site = tuple(site)
    extra = set(p) - _PARAM_KEYS.get(name, set())
    if name in MOVES and extra:
        raise MoveError(f"{name} does not take parameter(s) {', '.join(sorted(extra))}")

    def perm(key):
        v = p.get(key)
        return None if v is None else Permutation.parse(v, diag.degree)

    try:
        if name == "stabilize":
            _arity(name, site, 0)
            return stabilize(diag, p["sheet"])
        if name == "multi_stabilize":
            _arity(name, site, 0)
            return multi_stabilize(diag, p["sheets"])
        if name in ("crossing_change", "move5", "move6"):
            _arity(name, site, 1)
            return {"crossing_change": crossing_change, "move5": move5, "move6": move6}[name](diag, site[0])
        if name == "merge":
            return merge(diag, list(site))
        if name == "split":
            _arity(name, site, 1)
            return split(diag, site[0], p["factors"])
        if name == "move1":
            _arity(name, site, 2)
            return move1(diag, site[0], site[1], [tuple(x) for x in p["pairing"]])
        if name == "move2":
            _arity(name, site, 2)
            return move2(diag, site[0], site[1], perm("sigma"))
        if name == "move3":
            _arity(name, site, 1)
            return move3(diag, site[0], p.get("index", 0), perm("sigma"), p.get("span", 0))
        if name == "move4":
            _arity(name, site, 1)
            return move4(diag, site[0], p.get("index", 0))
        if name in ISOTOPIES:
            if len(site) not in (1, 2):
                raise MoveError(f"{name} takes a band id and an optional piece id")
            kw = dict(p, band=site[0])
            if len(site) == 2:
                kw["piece"] = site[1]
            return isotopy(diag, name, **kw)
    except KeyError as err:
        raise MoveError(f"{name} needs parameter {err.args[0]!r}") from None
    except TypeError as err:
        raise MoveError(f"{name}: {err}") from None
    raise MoveError(f"unknown move {name!r}; known: {', '.join(MOVES)}")
