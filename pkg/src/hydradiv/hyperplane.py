"""Hyperplanes dual to a_i-edges, computed inside a finite ball region.

For i >= 2 the a_i-edges of one hyperplane are the edges
(v a_0^n, a_i, +1) for n in Z: the relator square
a_i^-1 a_0 a_i a_{i-1}^-1 has its two a_i-sides one a_0 step apart on
the tail line and one a_{i-1} step apart on the head line. The class is
found here by union-find over the squares that fit inside the region;
``global_key`` gives the same answer from the normal form and is kept as an
independent cross-check.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from .cayley import BallIndex, EdgeRecord, OutsideRegion, PathRec, Square, geodesic_path
from .group import (
    Element,
    GroupPresentation,
    identity,
    mul_letter,
    mul_power,
    right_cyclic_coset,
    top_level,
)


class DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        return True


def _line_letters(d: int, i: int):
    """(tail-side letter index, head-side letter index) for the star of a height-i class."""
    if i >= 2:
        return 0, i - 1
    if d != 1:
        raise ValueError("height 0/1 hyperplanes are only supported in G_1 regions")
    return (1, 1) if i == 0 else (0, 0)


def global_key(e: EdgeRecord):
    """Region-independent label of the hyperplane dual to e."""
    e = e.positive()
    d = e.tail.d
    along, _ = _line_letters(d, e.index)
    rep, offset = right_cyclic_coset(e.tail.form, d, along)
    return (e.index, rep), offset


@dataclass
class HyperplaneClass:
    height: int
    representative: EdgeRecord
    members: list  # positive EdgeRecords ordered along the strip
    key: tuple
    partial: bool

    @property
    def member_set(self) -> frozenset:
        return frozenset((m.tail.form, m.index) for m in self.members)

    def contains(self, e: EdgeRecord) -> bool:
        e = e.positive()
        return e.index == self.height and (e.tail.form, e.index) in self.member_set

    def star(self) -> list[Square]:
        """Squares between consecutive member edges, based at the earlier head."""
        out = []
        d = self.representative.tail.d
        along, across = _line_letters(d, self.height)
        i = self.height
        for m in self.members[:-1]:
            if i >= 2:
                out.append(Square(m.head, ((i, -1), (0, 1), (i, 1), (i - 1, -1))))
            else:
                out.append(Square(m.tail, ((along, 1), (i, 1), (along, -1), (i, -1))))
        return out

    def star_vertices(self) -> set:
        out = set()
        for m in self.members:
            out.add(m.tail.form)
            out.add(m.head.form)
        return out


class HyperplaneIndex:
    """Union-find classes of every dual-able edge in a region."""

    def __init__(self, region: BallIndex):
        self.region = region
        d = region.d
        self.heights = [0, 1] if d == 1 else list(range(2, d + 1))
        self.edge_id: dict = {}
        self.edges: list = []
        table = region.table
        for f in region.forms:
            for i in self.heights:
                if mul_letter(f, d, i, 1) in table:
                    self.edge_id[(f, i)] = len(self.edges)
                    self.edges.append((f, i))
        ds = DisjointSet(len(self.edges))
        self.squares_used = 0
        for f, i in self.edges:
            along, _ = _line_letters(d, i)
            g = mul_letter(f, d, along, 1)
            other = self.edge_id.get((g, i))
            if other is None:
                continue
            # the square's far side must be in the region as well
            if mul_letter(g, d, i, 1) in table:
                ds.union(self.edge_id[(f, i)], other)
                self.squares_used += 1
        self.ds = ds
        self._classes: dict = {}
        groups: dict = {}
        for eid in range(len(self.edges)):
            groups.setdefault(ds.find(eid), []).append(eid)
        self.groups = groups

    def class_id(self, e: EdgeRecord) -> int:
        e = e.positive()
        eid = self.edge_id.get((e.tail.form, e.index))
        if eid is None:
            raise OutsideRegion(f"edge {e} not in region or not of a supported height")
        return self.ds.find(eid)

    def hyperplane(self, e: EdgeRecord) -> HyperplaneClass:
        root = self.class_id(e)
        if root not in self._classes:
            d = self.region.d
            e = e.positive()
            along, _ = _line_letters(d, e.index)
            members = []
            for eid in self.groups[root]:
                f, i = self.edges[eid]
                _, offset = right_cyclic_coset(f, d, along)
                members.append((offset, EdgeRecord(Element(d, f), i, 1)))
            members.sort(key=lambda t: t[0])
            key, _ = global_key(e)
            self._classes[root] = HyperplaneClass(
                height=e.index,
                representative=members[0][1],
                members=[m for _, m in members],
                key=key,
                partial=len(members) < 2,
            )
        return self._classes[root]

    def classes(self) -> list[HyperplaneClass]:
        return [self.hyperplane(EdgeRecord(Element(self.region.d, self.edges[root][0]), self.edges[root][1], 1))
                for root in sorted(self.groups)]


_INDEX_CACHE: dict = {}


def index_for(region: BallIndex) -> HyperplaneIndex:
    key = id(region)
    hit = _INDEX_CACHE.get(key)
    if hit is None or hit.region is not region:
        hit = HyperplaneIndex(region)
        _INDEX_CACHE.clear()
        _INDEX_CACHE[key] = hit
    return hit


def dual_hyperplane(e: EdgeRecord, region: BallIndex) -> HyperplaneClass:
    d = region.d
    if e.index < 2 and d != 1:
        raise ValueError("height 0/1 edges have no supported dual class outside G_1")
    return index_for(region).hyperplane(e)


def crossing_count(H: HyperplaneClass, p: PathRec) -> int:
    members = H.member_set
    return sum(1 for e in p.edges() if e.index == H.height and (e.positive().tail.form, e.index) in members)


def crossing_sequence(p: PathRec, region: BallIndex) -> list[tuple[HyperplaneClass, int]]:
    """Dual classes of the traversed edges, in order, with the step index."""
    idx = index_for(region)
    out = []
    for pos, e in enumerate(p.edges()):
        if e.index in idx.heights:
            out.append((idx.hyperplane(e), pos))
    return out


def _component(start, region: BallIndex, forbidden: frozenset, height: int, level: int):
    d = region.d
    table = region.table
    letters = [(i, s) for i, s in GroupPresentation(d).letters() if i <= level]
    seen = {start}
    queue = deque([start])
    while queue:
        g = queue.popleft()
        for i, s in letters:
            h = mul_letter(g, d, i, s)
            if h in seen or h not in table:
                continue
            if i == height:
                tail = g if s == 1 else h
                if (tail, i) in forbidden:
                    continue
            seen.add(h)
            queue.append(h)
    return seen


def separates(H: HyperplaneClass, u: Element, v: Element, region: BallIndex, level: int | None = None) -> bool:
    """Does every region path from u to v inside the level-``level`` complex cross H?

    ``level`` defaults to the height of H; paths are restricted to letters of
    index at most ``level``.
    """
    if level is None:
        level = H.height
    if u.form not in region.table or v.form not in region.table:
        raise OutsideRegion("endpoint outside region")
    if top_level(_translate(u, v), region.d) > level:
        raise ValueError("u and v lie in different vertex complexes of that level")
    reach = _component(u.form, region, H.member_set, H.height, level)
    if v.form in reach:
        return False
    everything = _component(u.form, region, frozenset(), H.height, level)
    if v.form not in everything:
        raise OutsideRegion("u and v are disconnected in the region")
    return True


def _translate(u: Element, v: Element):
    from .group import invert, multiply

    return multiply(invert(u), v).form


def traces(H: HyperplaneClass) -> tuple[PathRec, PathRec]:
    """Tail-side and head-side boundary lines of the star, from the first member on.

    For i >= 2 the tail side is labeled a_0 (smooth) and the head side a_{i-1}
    (rugged). In G_1 both sides use the same label.
    """
    d = H.representative.tail.d
    along, across = _line_letters(d, H.height)
    n = len(H.members) - 1
    first = H.members[0]
    smooth = PathRec(first.tail, ((along, 1),) * n)
    rugged = PathRec(first.head, ((across, 1),) * n)
    return smooth, rugged


def random_region_path(u: Element, length: int, region: BallIndex, rng: random.Random) -> PathRec:
    """A random walk from u that never leaves the region."""
    d = region.d
    letters = GroupPresentation(d).letters()
    g = u.form
    out = []
    for _ in range(length):
        options = [(i, s) for i, s in letters if mul_letter(g, d, i, s) in region.table]
        i, s = rng.choice(options)
        g = mul_letter(g, d, i, s)
        out.append((i, s))
    return PathRec(u, tuple(out))


def splice_squares(p: PathRec, region: BallIndex, rng: random.Random, count: int = 3) -> PathRec:
    """A path homotopic to p: square boundaries inserted at random vertices, kept inside the region."""
    from .cayley import squares_at

    letters = list(p.letters)
    for _ in range(count):
        pos = rng.randrange(len(letters) + 1)
        v = PathRec(p.start, tuple(letters[:pos])).end
        sq = rng.choice(squares_at(v))
        word = sq.word if rng.random() < 0.5 else tuple((i, -s) for i, s in reversed(sq.word))
        if all(f in region.table for f in PathRec(v, word).forms()):
            letters[pos:pos] = word
    return PathRec(p.start, tuple(letters))


def parity_agrees(p1: PathRec, p2: PathRec, region: BallIndex) -> bool:
    """Same-endpoint paths cross every class the same number of times mod 2."""
    if p1.start != p2.start or p1.end != p2.end:
        raise ValueError("paths must share endpoints")
    counts: dict = {}
    for path, sign in ((p1, 1), (p2, -1)):
        for H, _ in crossing_sequence(path, region):
            counts[H.key] = counts.get(H.key, 0) + sign
    return all(c % 2 == 0 for c in counts.values())


def star_edges_met(H: HyperplaneClass, p: PathRec) -> int:
    """Number of member edges of H that p traverses."""
    return crossing_count(H, p)


__all__ = [
    "DisjointSet",
    "HyperplaneClass",
    "HyperplaneIndex",
    "crossing_count",
    "crossing_sequence",
    "dual_hyperplane",
    "geodesic_path",
    "global_key",
    "parity_agrees",
    "random_region_path",
    "separates",
    "splice_squares",
    "star_edges_met",
    "traces",
]
