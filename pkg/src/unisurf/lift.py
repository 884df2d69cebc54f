"""Lifting loops and arcs to the covering, and covering invariants."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .diagram import DiagramError, LabelledDiagram, meridian_label, surface_components
from .perm import DegreeMismatch, Permutation, UnionFind, compose, orbits


class LiftError(ValueError):
    pass


# loop words


@dataclass(frozen=True)
class LoopWord:
    """Word in meridian generators: ``((ref, +-1), ...)``.

    A ref is a piece id, a band id, or a ``(band id, arc)`` pair.
    """

    letters: tuple = ()

    def inverse(self) -> "LoopWord":
        return LoopWord(tuple((r, -e) for r, e in reversed(self.letters)))

    def __add__(self, other: "LoopWord") -> "LoopWord":
        return LoopWord(self.letters + other.letters)


def monodromy_of_word(diag: LabelledDiagram, word) -> Permutation:
    letters = word.letters if isinstance(word, LoopWord) else tuple(word)
    out = Permutation.identity(diag.degree)
    for ref, exp in letters:
        if exp not in (1, -1):
            raise LiftError(f"exponent must be +-1, got {exp}")
        try:
            lab = meridian_label(diag, ref)
        except DiagramError as err:
            raise LiftError(str(err)) from None
        out = compose(out, lab if exp > 0 else lab.inverse())
    return out


# coherence


@dataclass(frozen=True)
class OrbitCertificate:
    orbit: tuple
    chi: int
    boundary: int

    @property
    def is_disk(self) -> bool:
        return self.chi == 1 and self.boundary == 1


@dataclass(frozen=True)
class Coherence:
    coherent: bool
    certificate: tuple

    def __bool__(self):
        return self.coherent

    def report(self) -> str:
        lines = [f"coherent {'yes' if self.coherent else 'no'}"]
        for c in self.certificate:
            lines.append(f"orbit {' '.join(map(str, c.orbit))} chi {c.chi} boundary {c.boundary}")
        return "\n".join(lines)


def coherence_check(sigmas) -> Coherence:
    """Decide whether the cover of an n-punctured disk is a union of disks.

    On each orbit O of the generated group, the lifted complex has |O|
    vertices, n|O| edges and one 2-cell per cycle of each generator, so
    chi(O) = |O|(1 - n) + sum_i cyc(sigma_i | O); the boundary circles are
    the cycles of the product on O.
    """
    sigmas = list(sigmas)
    if not sigmas:
        raise ValueError("coherence needs at least one permutation")
    if len({s.degree for s in sigmas}) > 1:
        raise DegreeMismatch("degree mismatch")
    n = len(sigmas)
    total = sigmas[0]
    for s in sigmas[1:]:
        total = compose(total, s)
    certs = []
    for orb in orbits(sigmas):
        chi = len(orb) * (1 - n) + sum(s.restrict(orb).ncycles() for s in sigmas)
        certs.append(OrbitCertificate(orb, chi, total.restrict(orb).ncycles()))
    return Coherence(all(c.is_disk for c in certs), tuple(certs))


# covering invariants


def covering_euler_char(diag: LabelledDiagram) -> int:
    """Riemann-Hurwitz count: d - sum over components of (d - c_F) chi(F)."""
    d = diag.degree
    chi = d
    for comp in surface_components(diag):
        c = diag.piece(comp["pieces"][0]).label.ncycles()
        chi -= (d - c) * comp["chi"]
    return chi


def covering_connected(diag: LabelledDiagram) -> bool:
    if diag.degree == 1:
        return True
    return len(orbits(diag.all_labels(), range(diag.degree))) == 1


def branching_indices(diag: LabelledDiagram, piece: str):
    try:
        return diag.piece(piece).label.cycle_type()
    except DiagramError as err:
        raise LiftError(str(err)) from None


# arc lifting


@dataclass(frozen=True)
class ArcPath:
    """Path in the complement running from one branch piece to another.

    ``events`` use the band vocabulary.  Only piercings move sheets;
    crossings are kept for the framing count.
    """

    start: str
    events: tuple = ()
    end: Optional[str] = None
    start_point: int = 0
    end_point: int = 1

    @property
    def end_piece(self) -> str:
        return self.start if self.end is None else self.end


@dataclass
class LiftCensus:
    arcs: int
    loops: list = field(default_factory=list)  # each: {"lifts": (...), "sheets": (...)}
    sheet_paths: dict = field(default_factory=dict)  # start sheet -> sheet before each event

    @property
    def n_loops(self) -> int:
        return len(self.loops)


def _sheet_action(diag: LabelledDiagram, event) -> Optional[Permutation]:
    if event.kind == "through":
        if event.other in diag.piece_map:
            rho = diag.piece_map[event.other].label
        elif event.other in diag.band_map:
            rho = diag.band_map[event.other].labels[event.target_arc]
        else:
            raise LiftError(f"arc pierces missing {event.other!r}")
        return rho if event.sign > 0 else rho.inverse()
    return None


def _anchor_transposition(diag, pid) -> Permutation:
    if pid not in diag.piece_map:
        raise LiftError(f"anchor {pid!r} is not a branch piece")
    tau = diag.piece_map[pid].label
    if not tau.is_transposition():
        raise LiftError(f"meridian {tau} at anchor {pid} is not a transposition")
    return tau


def lift_arc(diag: LabelledDiagram, arc: ArcPath) -> LiftCensus:
    d = diag.degree
    tau0 = _anchor_transposition(diag, arc.start)
    tau1 = _anchor_transposition(diag, arc.end_piece)
    paths = {}
    for s in range(d):
        cur = s
        seq = []
        for e in arc.events:
            seq.append(cur)
            act = _sheet_action(diag, e)
            if act is not None:
                cur = act(cur)
        seq.append(cur)
        paths[s] = seq
    # lifts are edges between endpoint vertices; paired sheets share a vertex
    uf = UnionFind()
    for s in range(d):
        uf.add(("lift", s))
        uf.add(("a", min(s, tau0(s))))
        uf.add(("b", min(paths[s][-1], tau1(paths[s][-1]))))
        uf.union(("lift", s), ("a", min(s, tau0(s))))
        uf.union(("lift", s), ("b", min(paths[s][-1], tau1(paths[s][-1]))))
    groups = {}
    for node in list(uf.parent):
        groups.setdefault(uf.find(node), []).append(node)
    arcs, loops = 0, []
    for members in sorted(groups.values(), key=lambda g: min(x[1] for x in g if x[0] == "lift")):
        lifts = sorted(x[1] for x in members if x[0] == "lift")
        verts = [x for x in members if x[0] != "lift"]
        if len(lifts) == len(verts):
            sheets = sorted({x for s in lifts for x in paths[s]})
            loops.append({"lifts": tuple(lifts), "sheets": tuple(sheets)})
        else:
            arcs += 1
    return LiftCensus(arcs, loops, paths)


def lifted_writhe(diag: LabelledDiagram, arc: ArcPath) -> int:
    """Signed count of self-crossings of the arc that survive on the loop.

    A crossing of the arc with itself lifts to a crossing of the loop when
    both of its passages lie on the loop in the same sheet.
    """
    census = lift_arc(diag, arc)
    if not census.loops:
        raise LiftError("the lifted arc has no loop component")
    tau0 = _anchor_transposition(diag, arc.start)
    loop = next((lp for lp in census.loops if any(tau0(s) != s for s in lp["lifts"])), census.loops[0])
    passages = {}
    for k, e in enumerate(arc.events):
        if e.kind in ("over", "under"):
            passages.setdefault(e.crossing, []).append((k, e))
    total = 0
    for cid, pair in sorted(passages.items()):
        if len(pair) != 2:
            continue
        (k1, e1), (k2, _) = pair
        for s in loop["lifts"]:
            for s2 in loop["lifts"]:
                if census.sheet_paths[s][k1] == census.sheet_paths[s2][k2]:
                    total += e1.sign
    return total
