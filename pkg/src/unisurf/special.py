"""Special covering presentations of braided Kirby diagrams.

Sheets are numbered ``0 .. t_n + m``.  Disks ``D1 .. D{t_n + 2m}``:

* ``D{t_{i-1}+1}`` (anchor of component ``i``) labelled ``(0 t_{i-1}+1)``;
* ``D{t_{i-1}+k}`` for ``k = 2 .. s_i`` (vertical disks) labelled
  ``(t_{i-1}+k-1  t_{i-1}+k)``;
* ``D{t_n+2j-1}``, ``D{t_n+2j}`` (1-handle ``j``) labelled ``(0 t_n+j)``.

Every string crosses all vertical disks once, right to left, in the part
of the closed braid above the braid box.
"""

from __future__ import annotations

from .diagram import DISK, Band, Event, LabelledDiagram, Piece, Through, solve_labels, validate
from .kirby import KirbyInput
from .lift import ArcPath, covering_euler_char, lift_arc, lifted_writhe
from .perm import Permutation, product


class ConstructionError(RuntimeError):
    pass


def degree_of(k: KirbyInput) -> int:
    return k.t_n + k.m + 1


def anchor_id(k: KirbyInput, i: int) -> str:
    return f"D{k.t[i] + 1}"


def vertical_disks(k: KirbyInput) -> list:
    """Ids of the vertical disks, left to right."""
    out = []
    for i in range(k.n):
        out += [f"D{k.t[i] + j}" for j in range(2, k.strings[i] + 1)]
    return out


def handle_disks(k: KirbyInput, j: int) -> tuple:
    return f"D{k.t_n + 2 * j + 1}", f"D{k.t_n + 2 * j + 2}"


def build_initial_presentation(k: KirbyInput) -> LabelledDiagram:
    d = degree_of(k)
    T = Permutation.transposition
    pieces = []
    for i in range(k.n):
        base = k.t[i]
        pieces.append(Piece(f"D{base + 1}", DISK, T(0, base + 1, d)))
        for j in range(2, k.strings[i] + 1):
            pieces.append(Piece(f"D{base + j}", DISK, T(base + j - 1, base + j, d)))
    for j in range(k.m):
        for pid in handle_disks(k, j):
            pieces.append(Piece(pid, DISK, T(0, k.t_n + j + 1, d)))
    return solve_labels(d, pieces, [])


def vertical_product(diag: LabelledDiagram, k: KirbyInput) -> Permutation:
    """Product of the vertical-disk labels in the order a string meets them."""
    return product((diag.piece(p).label for p in reversed(vertical_disks(k))), diag.degree)


def expected_pi(k: KirbyInput) -> Permutation:
    d = degree_of(k)
    return Permutation.from_cycles([list(range(k.t[i] + 1, k.t[i + 1] + 1)) for i in range(k.n)], d)


def _component_events(k: KirbyInput, i: int, partner) -> tuple:
    """Events met along the closed component ``i`` starting after its anchor arc."""
    crossing_at = {}
    for idx, over, under, eps in k.crossings():
        crossing_at[idx] = (over, under, eps)
    column = [Through(p) for p in reversed(vertical_disks(k))]
    events = []
    start = k.t[i]
    position = start
    for _ in range(k.strings[i]):
        pos = list(range(k.t_n))
        strand = position
        for idx, letter in enumerate(k.braid):
            if letter[0] == "h":
                _, j, p = letter
                if pos.index(strand) == p:
                    a, b = handle_disks(k, j)
                    events += [Through(a, 1), Through(b, -1)]
                continue
            j = letter[1]
            here = pos.index(strand)
            if here in (j, j + 1):
                over, under, eps = crossing_at[idx]
                other = under if strand == over else over
                kind = "over" if strand == over else "under"
                events.append(Event(kind, partner(k.component_of(other)), f"c{idx}", eps))
            pos[j], pos[j + 1] = pos[j + 1], pos[j]
        position = pos.index(strand)
        events += column
    if position != start:
        raise ConstructionError("closure did not return to the anchor string")
    return tuple(events)


def arc_path(k: KirbyInput, i: int) -> ArcPath:
    """The arc ``A_i``: the component minus the small arc expanded into its anchor."""
    return ArcPath(anchor_id(k, i), _component_events(k, i, lambda c: f"A{c + 1}"), anchor_id(k, i))


def attach_bands(diag: LabelledDiagram, k: KirbyInput, check: bool = True) -> LabelledDiagram:
    """Attach the band ``B_i`` along ``A_i`` for every 2-handle, checking the lifts."""
    bands = []
    for i in range(k.n):
        events = _component_events(k, i, lambda c: f"B{c + 1}")
        a = anchor_id(k, i)
        bands.append(Band(f"B{i + 1}", a, a, events))
    out = solve_labels(diag.degree, diag.pieces, bands)
    if check:
        problems = check_special(diag, out, k)
        if problems:
            raise ConstructionError("; ".join(problems))
    return out


def check_special(initial: LabelledDiagram, special: LabelledDiagram, k: KirbyInput) -> list:
    """Property checks on the band attachment; returns the failures."""
    bad = list(validate(special))
    d = initial.degree
    for i in range(k.n):
        arc = arc_path(k, i)
        anchor = arc.start
        # property 1: only the endpoints touch the anchor disk
        if any(e.kind == "through" and e.other == anchor for e in arc.events):
            bad.append(f"A{i + 1} meets its anchor disk in the interior")
        census = lift_arc(initial, arc)
        if census.arcs != d - 2 or census.n_loops != 1:
            bad.append(f"A{i + 1} lifts to {census.arcs} arcs and {census.n_loops} loops")
        else:
            loop = census.loops[0]
            if loop["lifts"] != (0, k.t[i] + 1):
                bad.append(f"loop over A{i + 1} starts in sheets {loop['lifts']}")
        w = lifted_writhe(initial, arc)
        if w != k.framings[i]:
            bad.append(f"L{i + 1} has lifted framing {w}, expected {k.framings[i]}")
    chi = covering_euler_char(special)
    if chi != 1 - k.m + k.n:
        bad.append(f"covering chi {chi} != 1 - m + n = {1 - k.m + k.n}")
    return bad
