"""Permutations of the sheet set ``{0, ..., d-1}``.

Products are read left to right, like loop concatenation: ``a * b`` means
"first ``a``, then ``b``", so ``(a * b)(x) == b(a(x))``.  Text forms use
cycle notation with cycles sorted by least element, least element first,
e.g. ``(0 3)(1 4 5)``; the identity prints as ``()``.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence


class DegreeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Permutation:
    images: tuple

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a bijection of 0..{len(images) - 1}: {images}")
        if not images:
            raise ValueError("degree must be positive")
        object.__setattr__(self, "images", images)

    # construction

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(tuple(range(degree)))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], degree: int) -> "Permutation":
        images = list(range(degree))
        seen = set()
        for cyc in cycles:
            cyc = list(cyc)
            for x in cyc:
                if x in seen or not 0 <= x < degree:
                    raise ValueError(f"bad cycle {cyc} for degree {degree}")
                seen.add(x)
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                images[a] = b
        return cls(tuple(images))

    @classmethod
    def transposition(cls, i: int, j: int, degree: int) -> "Permutation":
        if i == j:
            raise ValueError("transposition needs two distinct sheets")
        return cls.from_cycles([(i, j)], degree)

    @classmethod
    def parse(cls, text: str, degree: int | None = None, one_indexed: bool = False) -> "Permutation":
        """Read cycle notation such as ``(0 3)(1 4 5)`` or ``()``.

        Without ``degree`` the smallest degree containing every listed sheet
        is used.
        """
        text = text.strip()
        if not re.fullmatch(r"(\(\s*(-?\d+(\s*,?\s*-?\d+)*)?\s*\)\s*)+", text):
            raise ValueError(f"malformed cycle notation: {text!r}")
        cycles = []
        for body in re.findall(r"\(([^)]*)\)", text):
            nums = [int(x) for x in re.split(r"[\s,]+", body.strip()) if x]
            if one_indexed:
                nums = [x - 1 for x in nums]
            if len(nums) > 1:
                cycles.append(nums)
        top = max((x for c in cycles for x in c), default=0) + 1
        if degree is None:
            degree = top
        elif top > degree:
            raise ValueError(f"sheet {top - 1} out of range for degree {degree}")
        return cls.from_cycles(cycles, degree)

    # basic access

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __pow__(self, k: int) -> "Permutation":
        base = self if k >= 0 else self.inverse()
        out = Permutation.identity(self.degree)
        for _ in range(abs(k)):
            out = compose(out, base)
        return out

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, x in enumerate(self.images):
            inv[x] = i
        return Permutation(tuple(inv))

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self.images))

    def support(self) -> frozenset:
        return frozenset(i for i, x in enumerate(self.images) if i != x)

    def is_transposition(self) -> bool:
        return len(self.support()) == 2

    def cycles(self) -> list:
        """Disjoint cycles including fixed points, sorted by least element."""
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            x = self.images[start]
            while x != start:
                cyc.append(x)
                seen[x] = True
                x = self.images[x]
            out.append(tuple(cyc))
        return out

    def cycle_type(self) -> "CycleType":
        return CycleType(len(c) for c in self.cycles())

    def ncycles(self) -> int:
        return len(self.cycles())

    def restrict(self, domain) -> "Permutation":
        """Action on an invariant subset, renumbered by sorted order."""
        dom = sorted(domain)
        pos = {x: k for k, x in enumerate(dom)}
        try:
            return Permutation(tuple(pos[self.images[x]] for x in dom))
        except KeyError:
            raise ValueError("domain is not invariant") from None

    def __str__(self) -> str:
        nontrivial = [c for c in self.cycles() if len(c) > 1]
        if not nontrivial:
            return "()"
        return "".join("(" + " ".join(map(str, c)) + ")" for c in nontrivial)

    def __repr__(self) -> str:
        return f"Permutation({self}, degree={self.degree})"


class CycleType(tuple):
    """Multiset of cycle lengths (fixed points included), stored descending."""

    def __new__(cls, lengths=()):
        lengths = sorted((int(x) for x in lengths), reverse=True)
        if any(x <= 0 for x in lengths):
            raise ValueError("cycle lengths must be positive")
        return super().__new__(cls, lengths)

    @property
    def degree(self) -> int:
        return sum(self)

    def counts(self) -> Counter:
        return Counter(self)


def _check_degrees(*perms: Permutation) -> int:
    degrees = {p.degree for p in perms}
    if len(degrees) > 1:
        raise DegreeMismatch(f"degree mismatch: {sorted(degrees)}")
    return degrees.pop()


def compose(a: Permutation, b: Permutation) -> Permutation:
    """First ``a``, then ``b``."""
    _check_degrees(a, b)
    return Permutation(tuple(b.images[x] for x in a.images))


def product(perms: Iterable[Permutation], degree: int) -> Permutation:
    out = Permutation.identity(degree)
    for p in perms:
        out = compose(out, p)
    return out


def conjugate(sigma: Permutation, rho: Permutation) -> Permutation:
    """``rho^-1 sigma rho``; it sends ``rho(x)`` to ``rho(sigma(x))``."""
    _check_degrees(sigma, rho)
    return compose(compose(rho.inverse(), sigma), rho)


def cycles(sigma: Permutation):
    return sigma.cycle_type(), sigma.cycles()


def are_disjoint(a: Permutation, b: Permutation) -> bool:
    _check_degrees(a, b)
    return not (a.support() & b.support())


def extend(sigma: Permutation, d_new: int) -> Permutation:
    if d_new < sigma.degree:
        raise ValueError(f"cannot shrink degree {sigma.degree} to {d_new}")
    return Permutation(sigma.images + tuple(range(sigma.degree, d_new)))


class UnionFind:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        # least element stays representative
        if y < x:
            x, y = y, x
        self.parent[y] = x

    def groups(self) -> list:
        out = {}
        for x in sorted(self.parent):
            out.setdefault(self.find(x), []).append(x)
        return [tuple(g) for g in out.values()]


def orbits(generators: Sequence[Permutation], domain: Iterable[int] | None = None) -> list:
    """Orbit partition of ``domain`` under the group generated by ``generators``.

    Orbits come back as sorted tuples, ordered by least element.
    """
    gens = list(generators)
    if gens:
        d = _check_degrees(*gens)
    if domain is None:
        if not gens:
            raise ValueError("need a domain when there are no generators")
        domain = range(d)
    dom = sorted(set(domain))
    uf = UnionFind(dom)
    for g in gens:
        for x in dom:
            y = g(x)
            if y not in uf.parent:
                raise ValueError(f"domain not invariant under {g}")
            uf.union(x, y)
    return uf.groups()
