"""Braided Kirby diagrams and framing normalization.

Strands sit at positions ``0 .. t_n - 1``.  A braid letter is either a
generator ``("s", j, eps)`` exchanging positions ``j`` and ``j + 1``
(``eps = +1``: the strand moving right passes over) or a 1-handle
passage ``("h", j, p)``: the strand at position ``p`` runs once through
the 1-handle ``j`` (both 0-based).  Component ``i`` occupies the
consecutive block of positions ``t_{i-1} .. t_i - 1`` at the bottom of
the braid.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace


class KirbyError(ValueError):
    pass


@dataclass(frozen=True)
class KirbyInput:
    m: int = 0
    strings: tuple = ()
    framings: tuple = ()
    braid: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "strings", tuple(int(s) for s in self.strings))
        object.__setattr__(self, "framings", tuple(int(f) for f in self.framings))
        object.__setattr__(self, "braid", tuple(tuple(x) for x in self.braid))
        if len(self.strings) != len(self.framings):
            raise KirbyError("one framing per component is required")
        if self.m < 0 or any(s < 1 for s in self.strings):
            raise KirbyError("string counts must be positive and m >= 0")
        t = self.t_n
        for k, letter in enumerate(self.braid):
            kind = letter[0]
            if kind == "s":
                _, j, eps = letter
                if not 0 <= j < t - 1 or eps not in (1, -1):
                    raise KirbyError(f"letter {k}: bad generator {letter}")
            elif kind == "h":
                _, j, p = letter
                if not 0 <= j < self.m or not 0 <= p < t:
                    raise KirbyError(f"letter {k}: bad 1-handle passage {letter}")
            else:
                raise KirbyError(f"letter {k}: unknown kind {kind!r}")
        perm = self.braid_permutation()
        for i in range(self.n):
            block = set(self.block(i))
            if {perm[p] for p in block} != block:
                raise KirbyError(f"component {i + 1} does not close up on its own strings")
            cyc, p = 1, perm[self.t[i]]
            while p != self.t[i]:
                cyc, p = cyc + 1, perm[p]
            if cyc != len(block):
                raise KirbyError(f"strings of component {i + 1} close into several loops")

    @property
    def n(self) -> int:
        return len(self.strings)

    @property
    def t(self) -> tuple:
        """Partial sums ``t_0 = 0, t_1, ..., t_n``."""
        out = [0]
        for s in self.strings:
            out.append(out[-1] + s)
        return tuple(out)

    @property
    def t_n(self) -> int:
        return sum(self.strings)

    def block(self, i: int) -> range:
        return range(self.t[i], self.t[i + 1])

    def component_of(self, position: int) -> int:
        for i in range(self.n):
            if position in self.block(i):
                return i
        raise KirbyError(f"position {position} outside the braid")

    def braid_permutation(self) -> dict:
        """Bottom position -> top position."""
        pos = list(range(self.t_n))  # pos[k] = strand at position k
        for letter in self.braid:
            if letter[0] == "s":
                j = letter[1]
                pos[j], pos[j + 1] = pos[j + 1], pos[j]
        return {strand: k for k, strand in enumerate(pos)}

    def crossings(self):
        """Yield ``(letter index, over strand, under strand, sign)``."""
        pos = list(range(self.t_n))
        for k, letter in enumerate(self.braid):
            if letter[0] != "s":
                continue
            _, j, eps = letter
            left, right = pos[j], pos[j + 1]
            over, under = (left, right) if eps > 0 else (right, left)
            yield k, over, under, eps
            pos[j], pos[j + 1] = right, left

    def writhe(self, i: int) -> int:
        """Blackboard framing of component ``i`` (its self-crossing signs)."""
        blk = self.block(i)
        return sum(eps for _, a, b, eps in self.crossings() if a in blk and b in blk)

    def writhes(self) -> tuple:
        return tuple(self.writhe(i) for i in range(self.n))


def _insert_strand(k: KirbyInput, i: int, p: int, kink: int, target: int) -> KirbyInput:
    """Add a kink of sign ``kink`` to component ``i`` as a new string at position ``p``.

    The new string runs behind/in front of the strands it meets; the side
    is chosen per passage so that these passages change the writhe of
    component ``i`` by as little as possible, towards ``target``.
    """
    pos = list(range(k.t_n))
    word = []
    blk = k.block(i)
    drift = 0
    for letter in k.braid:
        if letter[0] == "h":
            _, j, q = letter
            word.append(("h", j, q + 1 if q >= p else q))
            continue
        _, j, eps = letter
        a, b = pos[j], pos[j + 1]
        pos[j], pos[j + 1] = b, a
        if j + 1 < p:
            word.append(("s", j, eps))
        elif j >= p:
            word.append(("s", j + 1, eps))
        else:
            # j == p - 1: the pair straddles the new string at p
            ca, cb = a in blk, b in blk
            first = 1
            if ca != cb:
                sgn = 1 if ca else -1  # writhe change is first * sgn
                c = min((1, -1), key=lambda c: (abs(target - drift - c), abs(drift + c)))
                first = c * sgn
                drift += c
            word += [("s", j, first), ("s", j + 1, eps), ("s", j, -first)]
    word.append(("s", p - 1, kink))
    strings = list(k.strings)
    strings[i] += 1
    return KirbyInput(k.m, tuple(strings), k.framings, tuple(word))


def normalize_framings(k: KirbyInput) -> KirbyInput:
    """Insert kinks as new strings until every blackboard framing is the framing."""
    out = k
    for i in range(k.n):
        guard = 0
        while out.writhe(i) != out.framings[i]:
            guard += 1
            if guard > 4 * abs(k.framings[i] - k.writhe(i)) + 8:
                raise KirbyError(f"framing normalization of component {i + 1} does not converge")
            delta = out.framings[i] - out.writhe(i)
            kink = 1 if delta > 0 else -1
            best = None
            for p in range(out.t[i] + 1, out.t[i + 1] + 1):
                cand = _insert_strand(out, i, p, kink, delta - kink)
                rest = abs(cand.framings[i] - cand.writhe(i))
                if best is None or rest < best[0]:
                    best = (rest, cand)
            out = best[1]
    return out
