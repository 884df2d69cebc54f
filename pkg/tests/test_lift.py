import itertools
import random

import pytest

from oracles import brute_force_lift_arc, cw_cover_of_punctured_disk
from unisurf.diagram import DISK, ANNULUS, Band, Over, Piece, Through, Under, solve_labels
from unisurf.lift import (
    ArcPath, LiftError, LoopWord, branching_indices, coherence_check,
    covering_connected, covering_euler_char, lift_arc, lifted_writhe, monodromy_of_word,
)
from unisurf.perm import Permutation

P = Permutation.parse


def disk(pid, text, d, **kw):
    return Piece(pid, DISK, P(text, d), **kw)


def test_coherence_examples():
    assert coherence_check([P("(0 1)", 2)]).coherent
    c = coherence_check([P("(0 1)", 2), P("(0 1)", 2)])
    assert not c.coherent
    assert c.certificate[0].chi == 0
    assert coherence_check([P("(0 1)", 3), P("(1 2)", 3)]).coherent
    with pytest.raises(ValueError):
        coherence_check([])


def test_multi_stabilization_disks_coherent():
    d = 4
    for picks in itertools.product(range(d), repeat=3):
        D = d + 3
        ok = all(picks[j] < d + j for j in range(3))
        if not ok:
            continue
        labels = [Permutation.transposition(i, d + j, D) for j, i in enumerate(picks)]
        assert coherence_check(labels).coherent


def test_coherence_against_cw_oracle_small():
    rng = random.Random(1)
    for _ in range(300):
        d = rng.randint(1, 5)
        n = rng.randint(1, 3)
        sig = [Permutation(tuple(rng.sample(range(d), d))) for _ in range(n)]
        assert coherence_check(sig).coherent == cw_cover_of_punctured_disk(sig)[0]


def test_certificate_report_is_stable():
    text = coherence_check([P("(0 1)", 3), P("(1 2)", 3)]).report()
    assert text == "coherent yes\norbit 0 1 2 chi 1 boundary 1"


def test_euler_char_examples():
    one = solve_labels(2, [disk("D", "(0 1)", 2)], [])
    assert covering_euler_char(one) == 1
    ann = solve_labels(2, [disk("D", "(0 1)", 2)], [Band("B", "D", "D")])
    assert covering_euler_char(ann) == 2


def test_connected():
    assert not covering_connected(solve_labels(2, [disk("D", "()", 2)], []))
    assert covering_connected(solve_labels(1, [disk("D", "()", 1)], []))


def test_monodromy_words():
    diag = solve_labels(3, [disk("A", "(0 1)", 3), disk("B", "(1 2)", 3)], [])
    assert monodromy_of_word(diag, LoopWord()).is_identity()
    w = LoopWord((("A", 1), ("B", 1), ("A", -1)))
    assert monodromy_of_word(diag, w) == P("(0 1)", 3) * P("(1 2)", 3) * P("(0 1)", 3)
    assert monodromy_of_word(diag, w + w.inverse()).is_identity()
    with pytest.raises(LiftError):
        monodromy_of_word(diag, LoopWord((("Z", 1),)))


def test_lift_trivial_arc():
    diag = solve_labels(2, [disk("D", "(0 1)", 2)], [])
    c = lift_arc(diag, ArcPath("D"))
    assert c.arcs == 0 and c.n_loops == 1
    assert c.loops[0]["sheets"] == (0, 1)


def test_lift_disjoint_piercing_unchanged():
    d = 4
    base = [disk("D", "(0 1)", d), disk("E", "(2 3)", d)]
    diag = solve_labels(d, base, [])
    plain = lift_arc(diag, ArcPath("D"))
    pierced = lift_arc(diag, ArcPath("D", (Through("E"), Through("E", -1), Through("E"))))
    assert (plain.arcs, plain.n_loops) == (pierced.arcs, pierced.n_loops) == (2, 1)


def test_lift_matches_brute_force():
    rng = random.Random(7)
    for _ in range(200):
        d = rng.randint(2, 6)
        k = rng.randint(0, 4)
        a, b = rng.sample(range(d), 2)
        pieces = [Piece("A", DISK, Permutation.transposition(a, b, d))]
        events = []
        for j in range(k):
            rho = Permutation(tuple(rng.sample(range(d), d)))
            pieces.append(Piece(f"X{j}", DISK, rho))
            events.append(Through(f"X{j}", rng.choice([1, -1])))
        diag = solve_labels(d, pieces, [])
        census = lift_arc(diag, ArcPath("A", tuple(events)))
        steps = []
        for e in events:
            rho = diag.piece(e.other).label
            r = rho if e.sign > 0 else rho.inverse()
            steps.append({x: r.images[x] for x in range(d)})
        tau = {x: pieces[0].label.images[x] for x in range(d)}
        assert (census.arcs, census.n_loops) == brute_force_lift_arc(d, tau, tau, steps)
        strands = census.arcs + sum(len(lp["lifts"]) for lp in census.loops)
        assert census.arcs + sum(len(lp["lifts"]) for lp in census.loops) >= census.arcs
        assert sum(len(lp["lifts"]) for lp in census.loops) + sum(
            1 for _ in range(0)) <= d
        assert strands <= d


def test_lift_errors():
    diag = solve_labels(3, [disk("A", "(0 1 2)", 3)], [])
    with pytest.raises(LiftError):
        lift_arc(diag, ArcPath("A"))
    with pytest.raises(LiftError):
        lift_arc(diag, ArcPath("missing"))


def test_writhe():
    diag = solve_labels(2, [disk("D", "(0 1)", 2)], [])
    assert lifted_writhe(diag, ArcPath("D")) == 0
    # a kink on a single-string arc lifts to a kink in both sheets
    kink = (Over("self", "k", 1), Under("self", "k", 1))
    assert lifted_writhe(diag, ArcPath("D", kink)) == 2
    # strands of the kink separated by a disk: only the sheet-0 lift keeps it
    d3 = solve_labels(3, [disk("D", "(0 1)", 3), disk("E", "(1 2)", 3)], [])
    for sign in (1, -1):
        ev = (Over("self", "k", sign), Through("E"), Under("self", "k", sign), Through("E"))
        assert lift_arc(d3, ArcPath("D", ev)).n_loops == 1
        assert lifted_writhe(d3, ArcPath("D", ev)) == sign


def test_branching_indices():
    diag = solve_labels(4, [disk("A", "(0 1)", 4), disk("F", "()", 4, fake=True)], [])
    assert branching_indices(diag, "A") == (2, 1, 1)
    assert branching_indices(diag, "F") == (1, 1, 1, 1)
    with pytest.raises(LiftError):
        branching_indices(diag, "Q")
