import itertools
import json
import random

import pytest

from corpus import KIRBY_CORPUS
from oracles import composite_cover
from unisurf import pipeline as pl
from unisurf import templates
from unisurf.diagram import ANNULUS, DISK, Band, Piece, solve_labels
from unisurf.kirby import KirbyInput, normalize_framings
from unisurf.lift import covering_connected, covering_euler_char
from unisurf.moves import dump_script, load_script
from unisurf.perm import Permutation
from unisurf.special import attach_bands, build_initial_presentation

T = Permutation.transposition


def special(k):
    k = normalize_framings(k)
    return attach_bands(build_initial_presentation(k), k)


@pytest.mark.parametrize("n,shape", [(0, (2, 2)), (1, (2, 2)), (4, (2, 2)), (5, (2, 3)), (9, (3, 3)), (10, (3, 4)), (17, (4, 5))])
def test_grid_shape(n, shape):
    assert pl.grid_shape(n) == shape


@pytest.mark.parametrize("name", ["hopf", "trefoil", "two-comp-s21", "unknot2"])
def test_symmetrize_removes_crossings(name):
    D = special(KIRBY_CORPUS[name])
    rows = []
    res = pl.symmetrize(D, audit=lambda stage, x: rows.append(covering_euler_char(x)))
    assert pl.crossing_ids(res.diagram) == []
    assert set(rows) == {covering_euler_char(D)}
    assert covering_connected(res.diagram)


def test_grid_layout_keeps_census():
    D = pl.symmetrize(special(KIRBY_CORPUS["hopf"])).diagram
    g = pl.grid_layout(D)
    G = g.to_diagram()
    assert covering_euler_char(G) == covering_euler_char(D)
    assert not G.bands
    real = [p for p in G.pieces if not p.fake]
    assert sum(p.kind == ANNULUS for p in real) == 2
    assert all(p.label.is_identity() for p in G.pieces if p.fake)
    assert len(g.assignment()) == len(real)


def test_grid_layout_rejects_crossings():
    with pytest.raises(pl.PipelineError, match="crossings"):
        pl.grid_layout(special(KIRBY_CORPUS["trefoil"]))


# quotients


def _two_disks(a, b, d):
    return solve_labels(d, [Piece("x0", DISK, a), Piece("x1", DISK, b)], [])


def test_order_one_is_identity():
    D = _two_disks(T(0, 1, 3), T(1, 2, 3), 3)
    q = pl.QuotientDescriptor("columns", 1, (("x0",), ("x1",)), "F")
    assert pl.compose_quotient(D, q) == D


def test_equal_copies_act_blockwise():
    sigma = Permutation.parse("(0 2 1)", 3)
    D = _two_disks(sigma, sigma, 3)
    out = pl.compose_quotient(D, pl.QuotientDescriptor("center", 2, (("x0", "x1"),), "F", ("x",)))
    lab = out.piece("x").label
    for k in range(2):
        assert [lab(3 * k + i) - 3 * k for i in range(3)] == list(sigma.images)
    assert out.piece("F").label.cycle_type() == (2, 2, 2)
    assert covering_euler_char(out) == covering_euler_char(D)


def test_quotient_errors():
    D = solve_labels(3, [Piece("x0", DISK, T(0, 1, 3)), Piece("x1", ANNULUS, T(0, 1, 3)), Piece("y", DISK, T(1, 2, 3))], [])
    with pytest.raises(pl.QuotientError, match="not symmetric"):
        pl.compose_quotient(D, pl.QuotientDescriptor("columns", 2, (("x0", "x1"),), "F"))
    E = solve_labels(3, [Piece("x0", DISK, T(0, 1, 3)), Piece("x1", DISK, T(0, 1, 3)), Piece("y", DISK, T(1, 2, 3))], [])
    with pytest.raises(pl.QuotientError, match="singular point"):
        pl.compose_quotient(E, pl.QuotientDescriptor("columns", 2, (("x0", "x1"),), "F"))
    with pytest.raises(pl.QuotientError, match="singular point"):
        pl.compose_quotient(E, pl.QuotientDescriptor("columns", 2, (("x0", "x1"),), "y"))
    with pytest.raises(pl.QuotientError, match="monodromy"):
        q = pl.QuotientDescriptor("columns", 2, (("x0", "x1"), ("y", "x2")), "F", (), (("y", 1),))
        pl.compose_quotient(solve_labels(3, list(E.pieces) + [Piece("x2", DISK, T(1, 2, 3))], []), q)
    with pytest.raises(pl.QuotientError, match="order 2"):
        pl.QuotientDescriptor("center", 3, (), "F")
    with pytest.raises(pl.QuotientError, match="copies"):
        pl.compose_quotient(E, pl.QuotientDescriptor("columns", 3, (("x0", "x1"),), "F"))
    B = solve_labels(2, [Piece("a", DISK, T(0, 1, 2))], [Band("b", "a", "a", (), (), 0, 1)])
    with pytest.raises(pl.QuotientError, match="band-free"):
        pl.compose_quotient(B, pl.QuotientDescriptor("columns", 2, (), "F"))


def _random_grid(rng, n1, n2, d):
    slots = [n for n, _ in templates.load("universal")["cell_slots"]]
    kinds = dict(templates.load("universal")["cell_slots"])
    cells = {}
    pieces = []
    for r, c, s in itertools.product(range(n1), range(n2), slots):
        img = list(range(d))
        rng.shuffle(img)
        cells[(r, c, s)] = tuple(img)
        pieces.append(Piece(pl.GridPresentation.piece_id(s, r, c), kinds[s], Permutation(tuple(img))))
    return cells, solve_labels(d, pieces, [])


def _grid_stub(n1, n2, d):
    return pl.GridPresentation(n1, n2, d, ())


def test_composite_monodromy_matches_oracle():
    rng = random.Random(2024)
    checked = 0
    for n1, n2, d in itertools.product(range(1, 4), range(1, 4), range(1, 5)):
        for axis in ("columns", "rows"):
            n = n2 if axis == "columns" else n1
            for order in range(2, 4):
                if n % order:
                    continue
                for _ in range(3):
                    cells, D = _random_grid(rng, n1, n2, d)
                    q = pl.grid_quotient(_grid_stub(n1, n2, d), axis, order, "F")
                    out = pl.compose_quotient(D, q)
                    want = composite_cover(cells, n1, n2, d, axis, order)
                    for j, orb in enumerate(q.orbits):
                        r, c = (int(x) for x in orb[0][1:].split("_"))
                        assert out.piece(q.name(j)).label.images == want[(r, c, orb[0][0])]
                    assert out.piece("F").label.images == want["axis"]
                    assert covering_euler_char(out) == covering_euler_char(D)
                    checked += 1
    assert checked > 50


# end to end


@pytest.fixture(scope="module")
def runs():
    names = ["empty", "unknot0", "unknot1", "hopf", "one-handle", "handle-cancel"]
    return {n: pl.end_to_end(KIRBY_CORPUS[n]) for n in names}


def test_stage_audit(runs):
    for name, u in runs.items():
        k = KIRBY_CORPUS[name]
        assert all(a.ok for a in u.audit)
        assert {a.expected for a in u.audit[1:]} == {1 - k.m + k.n}
        assert [a.stage for a in u.audit][:3] == ["initial presentation", "attach bands", "symmetrize"]


def test_quotient_indices(runs):
    for u in runs.values():
        assert set(u.quotient_indices["Q2"]) == {u.n2}
        assert set(u.quotient_indices["Q1"]) == {u.n1}
        assert u.n2 in u.labels["Q1"].cycle_type() or u.n2 == u.n1


def test_final_template(runs):
    sigs = set()
    for u in runs.values():
        assert pl.check_template(u)
        sigs.add(pl.canonical_signature(u.diagram))
    assert len(sigs) == 1


def test_template_mismatch_on_deleted_disk(runs):
    u = runs["hopf"]
    D = u.diagram
    cut = solve_labels(D.degree, [p for p in D.pieces if p.id != "X"], [])
    rep = pl.check_template(cut)
    assert not rep and any("census" in p for p in rep.problems)


def test_template_ok_after_renaming(runs):
    D = runs["unknot0"].diagram
    renamed = solve_labels(D.degree, [Piece("z" + p.id, p.kind, p.label) for p in reversed(D.pieces)], [])
    assert pl.check_template(renamed)


def test_replay_and_text(runs):
    for name, u in runs.items():
        recs = load_script(dump_script(u.records))
        assert pl.replay(u.start, recs) == u.diagram
        assert pl.end_to_end(KIRBY_CORPUS[name]).to_text() == u.to_text()


def test_text_form(runs):
    text = runs["unknot0"].to_text()
    assert text.startswith("unisurf-universal 1\ndegree 16\ngrid 2 2\n")
    assert "generator A annulus" in text


# template data


def test_template_override(tmp_path, monkeypatch):
    src = templates.template_dir()
    for name in ("moves", "universal"):
        (tmp_path / f"{name}.json").write_text((src / f"{name}.json").read_text())
    data = json.loads((tmp_path / "moves.json").read_text())
    data["format"] = 99
    (tmp_path / "moves.json").write_text(json.dumps(data))
    monkeypatch.setenv(templates.ENV_VAR, str(tmp_path))
    templates.clear_cache()
    try:
        assert templates.load("universal")["census"] == {"annulus": 1, "disk": 4}
        with pytest.raises(templates.TemplateError, match="format 99"):
            templates.load("moves")
    finally:
        monkeypatch.delenv(templates.ENV_VAR)
        templates.clear_cache()


def test_missing_template_dir(monkeypatch, tmp_path):
    monkeypatch.setenv(templates.ENV_VAR, str(tmp_path / "nowhere"))
    templates.clear_cache()
    try:
        with pytest.raises(templates.TemplateError, match="not found"):
            templates.load("universal")
    finally:
        monkeypatch.delenv(templates.ENV_VAR)
        templates.clear_cache()


def test_empty_input_grid_is_all_fake():
    D = special(KirbyInput(0, (), (), ()))
    g = pl.grid_layout(D)
    assert g.degree == 1
    assert all(s.fake for cell in g.cells for _, s in cell)
