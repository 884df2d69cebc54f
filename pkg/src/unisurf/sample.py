"""Random valid diagrams, for property tests and ``unisurf sample``."""

from __future__ import annotations

import random

from .diagram import DISK, Band, Event, LabelledDiagram, Piece, Through, solve_labels
from .perm import Permutation


def rand_transposition(rng: random.Random, d: int) -> Permutation:
    i, j = rng.sample(range(d), 2)
    return Permutation.transposition(i, j, d)


def rand_perm(rng: random.Random, d: int) -> Permutation:
    img = list(range(d))
    rng.shuffle(img)
    return Permutation(tuple(img))


def random_diagram(rng: random.Random, d=None, n_pieces=None, n_bands=None, simple=True) -> LabelledDiagram:
    """Disks joined by bands that pierce disks and earlier bands and cross each other.

    Bands are built forward; a closed band ends on a new disk carrying its
    transported label, so the result always validates.
    """
    d = d or rng.randint(3, 6)
    n_pieces = n_pieces or rng.randint(1, 4)
    n_bands = rng.randint(0, 3) if n_bands is None else n_bands
    lab = (lambda: rand_transposition(rng, d)) if simple else (lambda: rand_perm(rng, d))
    pieces = [Piece(f"P{k}", DISK, lab()) for k in range(n_pieces)]
    bands = []
    ncross = 0
    for b in range(n_bands):
        start = rng.choice(pieces)
        events = []
        for _ in range(rng.randint(0, 3)):
            r = rng.random()
            if r < 0.5:
                events.append(Through(rng.choice(pieces).id, rng.choice((1, -1))))
            elif bands and r < 0.75:
                tgt = rng.choice(bands)
                events.append(Through(tgt.id, rng.choice((1, -1)), rng.randrange(tgt.narcs)))
            elif bands:
                other = rng.choice(bands)
                ncross += 1
                cid = f"c{ncross}"
                sign = rng.choice((1, -1))
                mine, theirs = ("over", "under") if rng.random() < 0.5 else ("under", "over")
                events.append(Event(mine, other.id, cid, sign))
                oe = list(other.events)
                oe.insert(rng.randint(0, len(oe)), Event(theirs, f"B{b}", cid, sign))
                bands = [x if x.id != other.id else Band(x.id, x.start, x.end, tuple(oe), (), x.start_pos, x.end_pos) for x in bands]
        tongue = rng.random() < 0.3
        diag = solve_labels(d, pieces, bands + [Band(f"B{b}", start.id, None, tuple(events))])
        if tongue:
            bands = list(diag.bands)
            continue
        end = Piece(f"E{b}", DISK, diag.band(f"B{b}").tip_label)
        pieces.append(end)
        bands = list(diag.bands[:-1]) + [Band(f"B{b}", start.id, end.id, tuple(events))]
    return solve_labels(d, pieces, bands)
