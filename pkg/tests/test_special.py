import pytest

from corpus import KIRBY_CORPUS
from oracles import brute_force_lift_arc
from unisurf.diagram import validate
from unisurf.kirby import KirbyInput, normalize_framings
from unisurf.lift import covering_connected, covering_euler_char, lift_arc, lifted_writhe
from unisurf.special import (
    ConstructionError,
    arc_path,
    attach_bands,
    build_initial_presentation,
    check_special,
    degree_of,
    expected_pi,
    vertical_product,
)


def _built(name):
    k = normalize_framings(KIRBY_CORPUS[name])
    initial = build_initial_presentation(k)
    return k, initial, attach_bands(initial, k)


def test_initial_labels_for_two_components():
    k = KirbyInput(1, (2, 1), (1, 0), (("s", 0, 1),))
    diag = build_initial_presentation(k)
    assert diag.degree == 5
    got = {p.id: str(p.label) for p in diag.pieces}
    assert got == {"D1": "(0 1)", "D2": "(1 2)", "D3": "(0 3)", "D4": "(0 4)", "D5": "(0 4)"}


@pytest.mark.parametrize("name", sorted(KIRBY_CORPUS))
def test_vertical_disks_multiply_to_block_cycles(name):
    k = normalize_framings(KIRBY_CORPUS[name])
    assert vertical_product(build_initial_presentation(k), k) == expected_pi(k)


@pytest.mark.parametrize("name", sorted(KIRBY_CORPUS))
def test_special_presentation_properties(name):
    k, initial, special = _built(name)
    assert validate(special) == []
    assert check_special(initial, special, k) == []
    assert covering_euler_char(special) == 1 - k.m + k.n
    assert covering_connected(special)
    assert len(special.pieces) == k.t_n + 2 * k.m
    assert all(p.label.is_transposition() for p in special.pieces)


@pytest.mark.parametrize("name", sorted(n for n in KIRBY_CORPUS if KIRBY_CORPUS[n].n))
def test_arc_census_matches_walk_oracle(name):
    k, initial, _ = _built(name)
    d = degree_of(k)
    for i in range(k.n):
        arc = arc_path(k, i)
        steps = []
        for e in arc.events:
            if e.kind == "through":
                lab = initial.piece(e.other).label
                lab = lab if e.sign > 0 else lab.inverse()
                steps.append({s: lab(s) for s in range(d)})
        tau = initial.piece(arc.start).label
        tau_map = {s: tau(s) for s in range(d)}
        census = lift_arc(initial, arc)
        assert brute_force_lift_arc(d, tau_map, tau_map, steps) == (census.arcs, census.n_loops)
        assert (census.arcs, census.n_loops) == (d - 2, 1)
        assert lifted_writhe(initial, arc) == k.framings[i]


def test_unframed_input_is_rejected_by_the_framing_check():
    k = KirbyInput(0, (1,), (2,), ())
    with pytest.raises(ConstructionError, match="lifted framing"):
        attach_bands(build_initial_presentation(k), k)
