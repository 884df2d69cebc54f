"""Labelled 3-dimensional diagrams of ribbon surfaces.

A diagram is a set of pieces (disks and annuli) joined by bands.  Every
piece carries one meridian label; every band stores one label per arc,
where arcs are separated by the events that change the label:

* ``through``: the band pierces a piece or band labelled ``rho`` (a ribbon
  intersection); the label is conjugated by ``rho`` going back to front
  (``direction=+1``) and by ``rho**-1`` going front to back
  (``direction=-1``).
* ``over`` / ``under``: the band crosses another band in the picture.
  Seen from the boundary sphere a band is a pair of oppositely oriented
  edges, so passing under a whole band conjugates by ``rho`` and then by
  ``rho**-1``: crossings leave labels alone.  They still matter for the
  surface (changing one passes through a clasp), which is why
  ``crossing_change`` needs disjoint labels.

A band whose ``end`` is ``None`` is a tongue: a protrusion of its start
piece with a free tip.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

from .perm import Permutation, UnionFind, conjugate

DISK, ANNULUS = "disk", "annulus"
PIECE_CHI = {DISK: 1, ANNULUS: 0}
BACK_TO_FRONT, FRONT_TO_BACK = 1, -1


class DiagramError(ValueError):
    pass


@dataclass(frozen=True)
class Piece:
    id: str
    kind: str
    label: Permutation
    fake: bool = False
    anchor: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in PIECE_CHI:
            raise DiagramError(f"unknown piece kind {self.kind!r}")


@dataclass(frozen=True)
class Event:
    kind: str  # "over" | "under" | "through"
    other: str  # partner band for crossings, pierced target for "through"
    crossing: Optional[str] = None
    sign: int = 1  # crossing sign, or direction for "through"
    target_arc: int = 0  # arc of a pierced band

    def __post_init__(self):
        if self.kind not in ("over", "under", "through"):
            raise DiagramError(f"unknown event kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise DiagramError("sign must be +1 or -1")
        if self.kind != "through" and self.crossing is None:
            raise DiagramError("crossing events need a crossing id")

    @property
    def changes_label(self) -> bool:
        return self.kind == "through"


def Over(other, crossing, sign=1):
    return Event("over", other, crossing, sign)


def Under(other, crossing, sign=1):
    return Event("under", other, crossing, sign)


def Through(target, direction=BACK_TO_FRONT, target_arc=0):
    return Event("through", target, None, direction, target_arc)


@dataclass(frozen=True)
class Band:
    id: str
    start: str
    end: Optional[str]
    events: tuple = ()
    labels: tuple = ()
    start_pos: int = 0
    end_pos: int = 1

    @property
    def is_tongue(self) -> bool:
        return self.end is None

    @property
    def narcs(self) -> int:
        return 1 + sum(e.changes_label for e in self.events)

    def arc_at(self, index: int) -> int:
        """Arc on which event ``index`` happens (the arc entering it)."""
        return sum(e.changes_label for e in self.events[:index])

    @property
    def tip_label(self) -> Permutation:
        return self.labels[-1]


@dataclass(frozen=True)
class LabelledDiagram:
    degree: int
    pieces: tuple = ()
    bands: tuple = ()

    @cached_property
    def piece_map(self) -> dict:
        return {p.id: p for p in self.pieces}

    @cached_property
    def band_map(self) -> dict:
        return {b.id: b for b in self.bands}

    def piece(self, pid) -> Piece:
        try:
            return self.piece_map[pid]
        except KeyError:
            raise DiagramError(f"no piece {pid!r}") from None

    def band(self, bid) -> Band:
        try:
            return self.band_map[bid]
        except KeyError:
            raise DiagramError(f"no band {bid!r}") from None

    @cached_property
    def over_sites(self) -> dict:
        """crossing id -> (band id, event index) of its over strand."""
        out = {}
        for b in self.bands:
            for k, e in enumerate(b.events):
                if e.kind == "over":
                    out[e.crossing] = (b.id, k)
        return out

    def all_labels(self) -> list:
        out = [p.label for p in self.pieces]
        for b in self.bands:
            out.extend(b.labels)
        return out

    def fresh_id(self, prefix: str) -> str:
        used = set(self.piece_map) | set(self.band_map)
        used |= {e.crossing for b in self.bands for e in b.events if e.crossing}
        k = 1
        while f"{prefix}{k}" in used:
            k += 1
        return f"{prefix}{k}"

    def with_parts(self, degree=None, pieces=None, bands=None) -> "LabelledDiagram":
        return LabelledDiagram(
            self.degree if degree is None else degree,
            self.pieces if pieces is None else tuple(pieces),
            self.bands if bands is None else tuple(bands),
        )


# label transport


def _target_label(diag: LabelledDiagram, labels: dict, event: Event) -> Permutation:
    if event.other in diag.piece_map:
        return diag.piece_map[event.other].label
    if event.other in labels:
        arcs = labels[event.other]
        if not 0 <= event.target_arc < len(arcs):
            raise DiagramError(f"band {event.other} has no arc {event.target_arc}")
        return arcs[event.target_arc]
    raise DiagramError(f"pierced target {event.other!r} does not exist")


def transport(label: Permutation, rho: Permutation, event: Event) -> Permutation:
    if not event.changes_label:
        return label
    return conjugate(label, rho if event.sign > 0 else rho.inverse())


def _arc_labels(diag, labels, band) -> tuple:
    cur = diag.piece(band.start).label
    out = [cur]
    for e in band.events:
        if e.changes_label:
            cur = transport(cur, _target_label(diag, labels, e), e)
            out.append(cur)
    return tuple(out)


def solve_labels(degree: int, pieces, bands, max_rounds: int | None = None) -> LabelledDiagram:
    """Fill in arc labels by transport from the start pieces.

    Bands may pierce other bands, which makes the system cyclic, so labels
    are propagated until they stop changing.
    """
    bands = [replace(b, labels=()) for b in bands]
    diag = LabelledDiagram(degree, tuple(pieces), tuple(bands))
    labels = {b.id: (diag.piece(b.start).label,) * b.narcs for b in bands}
    rounds = max_rounds or (2 + sum(b.narcs for b in bands))
    for _ in range(rounds):
        new = {b.id: _arc_labels(diag, labels, b) for b in bands}
        if new == labels:
            break
        labels = new
    else:
        raise DiagramError("label transport did not stabilise")
    return diag.with_parts(bands=[replace(b, labels=labels[b.id]) for b in bands])


# validation


def validate(diag: LabelledDiagram) -> list:
    """All violated invariants as sorted human-readable strings."""
    v = []
    d = diag.degree
    ids = [p.id for p in diag.pieces] + [b.id for b in diag.bands]
    for x in sorted({x for x in ids if ids.count(x) > 1}):
        v.append(f"duplicate id {x}")
    for p in diag.pieces:
        if p.label.degree != d:
            v.append(f"piece {p.id}: label degree {p.label.degree} != {d}")
        elif p.fake and not p.label.is_identity():
            v.append(f"piece {p.id}: fake piece labelled {p.label}")
    overs, unders = {}, {}
    for b in diag.bands:
        for end, pos in ((b.start, b.start_pos), (b.end, b.end_pos)):
            if end is not None and end not in diag.piece_map:
                v.append(f"band {b.id}: attached to missing piece {end}")
        if b.start == b.end and b.start_pos == b.end_pos:
            v.append(f"band {b.id}: both ends at position {b.start_pos} of {b.start}")
        for k, e in enumerate(b.events):
            if e.kind == "over":
                overs.setdefault(e.crossing, []).append((b.id, k, e))
            elif e.kind == "under":
                unders.setdefault(e.crossing, []).append((b.id, k, e))
            elif e.other not in diag.piece_map and e.other not in diag.band_map:
                v.append(f"band {b.id}: event {k} pierces missing {e.other}")
    for c in sorted(set(overs) | set(unders)):
        o, u = overs.get(c, []), unders.get(c, [])
        if len(o) != 1 or len(u) != 1:
            v.append(f"crossing {c}: {len(o)} over and {len(u)} under strands")
            continue
        (ob, _, oe), (ub, _, ue) = o[0], u[0]
        if oe.other != ub or ue.other != ob or oe.sign != ue.sign:
            v.append(f"crossing {c}: over/under records disagree")
    if v:
        return sorted(v)
    labels = {b.id: b.labels for b in diag.bands}
    for b in diag.bands:
        if len(b.labels) != b.narcs:
            v.append(f"band {b.id}: {len(b.labels)} arc labels for {b.narcs} arcs")
            continue
        if any(x.degree != d for x in b.labels):
            v.append(f"band {b.id}: arc label of wrong degree")
            continue
        if b.labels[0] != diag.piece(b.start).label:
            v.append(f"band {b.id}: start label {b.labels[0]} != piece {b.start} label {diag.piece(b.start).label}")
        arc = 0
        for k, e in enumerate(b.events):
            if not e.changes_label:
                continue
            try:
                rho = _target_label(diag, labels, e)
            except DiagramError as err:
                v.append(f"band {b.id}: event {k}: {err}")
                break
            want = transport(b.labels[arc], rho, e)
            if b.labels[arc + 1] != want:
                v.append(
                    f"band {b.id}: event {k} ({e.kind} {e.crossing or e.other}) "
                    f"gives {b.labels[arc + 1]}, transport of {b.labels[arc]} by {rho} is {want}"
                )
            arc += 1
        if b.end is not None and b.labels[-1] != diag.piece(b.end).label:
            v.append(f"band {b.id}: end label {b.labels[-1]} != piece {b.end} label {diag.piece(b.end).label}")
    for comp in surface_components(diag, check=False):
        types = {diag.piece(p).label.cycle_type() for p in comp["pieces"]}
        if len(types) > 1:
            v.append(f"component {comp['pieces'][0]}: meridian cycle type not constant")
    return sorted(v)


def is_valid(diag) -> bool:
    return not validate(diag)


def meridian_label(diag: LabelledDiagram, ref) -> Permutation:
    """Label of a piece id, a band id (arc 0) or a ``(band id, arc)`` pair."""
    if isinstance(ref, tuple):
        bid, arc = ref
        arcs = diag.band(bid).labels
        if not 0 <= arc < len(arcs):
            raise DiagramError(f"band {bid} has no arc {arc}")
        return arcs[arc]
    if ref in diag.piece_map:
        return diag.piece_map[ref].label
    if ref in diag.band_map:
        return diag.band_map[ref].labels[0]
    raise DiagramError(f"no piece or band {ref!r}")


# surface topology


def surface_components(diag: LabelledDiagram, check: bool = True) -> list:
    """Connected components with Euler characteristic and boundary count.

    Each band joining two pieces is a 1-handle (chi -1); tongues do not
    change the topology.  Boundary circles are the faces of the ribbon
    graph whose rotation at a piece is the order of attachment positions.
    """
    if check:
        bad = validate(diag)
        if bad:
            raise DiagramError("invalid diagram: " + bad[0])
    uf = UnionFind(p.id for p in diag.pieces)
    attached = [b for b in diag.bands if b.end is not None]
    for b in attached:
        uf.union(b.start, b.end)
    out = []
    for group in uf.groups():
        members = set(group)
        bands = [b for b in attached if b.start in members]
        chi = sum(PIECE_CHI[diag.piece(p).kind] for p in group) - len(bands)
        circles = _boundary_circles(diag, group, bands)
        out.append({
            "pieces": tuple(group),
            "bands": tuple(sorted(b.id for b in bands)),
            "chi": chi,
            "boundary": circles,
            "orientable": (chi + circles) % 2 == 0,
            "fake": all(diag.piece(p).fake for p in group),
        })
    return out


def _boundary_circles(diag, group, bands) -> int:
    ends = {}
    for b in bands:
        ends.setdefault(b.start, []).append((b.start_pos, b.id, 0))
        ends.setdefault(b.end, []).append((b.end_pos, b.id, 1))
    nxt = {}
    for pid, lst in ends.items():
        lst.sort()
        for k, (_, bid, side) in enumerate(lst):
            _, b2, s2 = lst[(k + 1) % len(lst)]
            nxt[(bid, side)] = (b2, s2)
    faces = 0
    seen = set()
    for dart in nxt:
        if dart in seen:
            continue
        faces += 1
        x = dart
        while x not in seen:
            seen.add(x)
            bid, side = x
            x = nxt[(bid, 1 - side)]
    extra = 0
    for pid in group:
        kind = diag.piece(pid).kind
        if pid not in ends:
            extra += 1 if kind == DISK else 2
        elif kind == ANNULUS:
            extra += 1
    return faces + extra


def component_of(diag: LabelledDiagram, pid: str) -> dict:
    for comp in surface_components(diag, check=False):
        if pid in comp["pieces"]:
            return comp
    raise DiagramError(f"no piece {pid!r}")


# canonical form


def canonical_signature(diag: LabelledDiagram) -> str:
    """Renumbering-invariant text form of the unlabelled diagram.

    Colour refinement over the incidence structure (pieces, bands, event
    partners), then the sorted multiset of final colours and incidences.
    """
    nodes = {}
    for p in diag.pieces:
        nodes[("p", p.id)] = f"piece:{p.kind}"
    for b in diag.bands:
        nodes[("b", b.id)] = "tongue" if b.end is None else "band"
    edges = []  # (u, v, tag)
    rank = _position_ranks(diag)
    for b in diag.bands:
        u = ("b", b.id)
        edges.append((u, ("p", b.start), f"start@{rank[(b.id, 0)]}"))
        if b.end is not None:
            edges.append((u, ("p", b.end), f"end@{rank[(b.id, 1)]}"))
        for k, e in enumerate(b.events):
            if e.kind == "through":
                tgt = ("p", e.other) if e.other in diag.piece_map else ("b", e.other)
                edges.append((u, tgt, f"ev{k}:through:{e.sign}:{e.target_arc if tgt[0] == 'b' else 0}"))
            else:
                edges.append((u, ("b", e.other), f"ev{k}:{e.kind}:{e.sign}"))
    colour = dict(nodes)
    for _ in range(len(nodes) + 1):
        new = {}
        for n in nodes:
            out_n = sorted(f">{t}:{colour[v]}" for u, v, t in edges if u == n)
            in_n = sorted(f"<{t}:{colour[u]}" for u, v, t in edges if v == n)
            h = hashlib.sha1("|".join([colour[n]] + out_n + in_n).encode()).hexdigest()[:16]
            new[n] = h
        if len(set(new.values())) == len(set(colour.values())):
            colour = new
            break
        colour = new
    body = sorted(f"{colour[u]}-{t}->{colour[v]}" for u, v, t in edges)
    kinds = sorted(nodes.values())
    return hashlib.sha1(("\n".join(kinds + ["--"] + body)).encode()).hexdigest()


def _position_ranks(diag) -> dict:
    per_piece = {}
    for b in diag.bands:
        per_piece.setdefault(b.start, []).append((b.start_pos, b.id, 0))
        if b.end is not None:
            per_piece.setdefault(b.end, []).append((b.end_pos, b.id, 1))
    out = {}
    for lst in per_piece.values():
        for r, (_, bid, side) in enumerate(sorted(lst)):
            out[(bid, side)] = r
    return out
