"""The 1-skeleton of the square complex: neighbors, balls, squares, geodesics.

Vertices are group elements; the edge labelled a_i from v goes to v * a_i.
Distances are word-metric distances, which are left-invariant, so a ball
around the identity answers distance queries between any pair of vertices.
"""

from __future__ import annotations

import hashlib
import os
import struct
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .group import (
    Element,
    GroupPresentation,
    Letter,
    Word,
    coset_key,
    decode_raw,
    encode,
    encode_raw,
    identity,
    invert_word,
    mul_letter,
    mul_word,
    right_cyclic_coset,
    spell,
    top_level,
)

CACHE_MAGIC = b"HYDB"
CACHE_VERSION = 1
CACHE_ENV = "HYDRADIV_CACHE"
MAX_IDS = 2**32 - 1


class BudgetExceeded(RuntimeError):
    """Exploration hit its vertex cap; no partial region is returned."""

    def __init__(self, message: str, reached_radius: int, count: int):
        super().__init__(message)
        self.reached_radius = reached_radius
        self.count = count


class OutsideRegion(ValueError):
    pass


@dataclass(frozen=True)
class EdgeRecord:
    tail: Element
    index: int
    direction: int

    @property
    def height(self) -> int:
        return self.index

    @property
    def head(self) -> Element:
        return Element(self.tail.d, mul_letter(self.tail.form, self.tail.d, self.index, self.direction))

    def positive(self) -> "EdgeRecord":
        """The same geometric edge, oriented along +a_index."""
        if self.direction == 1:
            return self
        return EdgeRecord(self.head, self.index, 1)

    def reversed(self) -> "EdgeRecord":
        return EdgeRecord(self.head, self.index, -self.direction)


@dataclass(frozen=True)
class PathRec:
    start: Element
    letters: Word = ()

    def __len__(self):
        return len(self.letters)

    def forms(self) -> list:
        d = self.start.d
        g = self.start.form
        out = [g]
        for i, s in self.letters:
            g = mul_letter(g, d, i, s)
            out.append(g)
        return out

    def vertices(self) -> list[Element]:
        d = self.start.d
        return [Element(d, f) for f in self.forms()]

    @property
    def end(self) -> Element:
        return Element(self.start.d, mul_word(self.start.form, self.start.d, self.letters))

    def edges(self) -> list[EdgeRecord]:
        vs = self.vertices()
        return [EdgeRecord(v, i, s) for v, (i, s) in zip(vs, self.letters)]

    def reversed(self) -> "PathRec":
        return PathRec(self.end, invert_word(self.letters))

    def __add__(self, other: "PathRec") -> "PathRec":
        if other.start != self.end:
            raise ValueError("paths do not concatenate")
        return PathRec(self.start, self.letters + other.letters)

    def extend(self, letters: Iterable[Letter]) -> "PathRec":
        return PathRec(self.start, self.letters + tuple(letters))


@dataclass(frozen=True)
class Square:
    """A 2-cell: base vertex and boundary word read from it."""
    base: Element
    word: Word

    def vertices(self) -> list[Element]:
        return PathRec(self.base, self.word).vertices()[:4]


def neighbors(v: Element) -> list[tuple[EdgeRecord, Element]]:
    d = v.d
    out = []
    for i, s in GroupPresentation(d).letters():
        out.append((EdgeRecord(v, i, s), Element(d, mul_letter(v.form, d, i, s))))
    return out


def squares_at(v: Element) -> list[Square]:
    """Commuting squares with v at each corner, plus one HNN square per i based at v."""
    d = v.d
    out = []
    for s0 in (1, -1):
        for s1 in (1, -1):
            out.append(Square(v, ((0, s0), (1, s1), (0, -s0), (1, -s1))))
    for i in range(2, d + 1):
        out.append(Square(v, ((i, -1), (0, 1), (i, 1), (i - 1, -1))))
    return out


def vertex_complex_member(v: Element, k: int, center: Element | None = None) -> bool:
    """Is v in the k-vertex complex through ``center`` (default: the identity)?"""
    if not 1 <= k <= v.d:
        raise ValueError(f"level {k} out of range 1..{v.d}")
    g = v.form
    if center is not None:
        g = mul_word(identity(v.d), v.d, invert_word(spell(center.form, v.d)) + spell(g, v.d))
    return top_level(g, v.d) <= k


class BallIndex:
    """Immutable BFS ball B(center, R) with exact distances and compact ids.

    Ids follow (distance, canonical encoding) order.
    """

    def __init__(self, d: int, center: Element, radius: int, forms: list, layer_starts: list[int]):
        self.d = d
        self.center = center
        self.radius = radius
        self.forms = forms
        self.layer_starts = layer_starts  # layer r occupies ids [layer_starts[r], layer_starts[r+1])
        self.table = {f: i for i, f in enumerate(forms)}
        dist = np.empty(len(forms), dtype=np.int32)
        for r in range(radius + 1):
            dist[layer_starts[r]:layer_starts[r + 1]] = r
        self.dist = dist
        self._adjacency = None
        self._coset_nearest: dict = {}
        self._cyclic_nearest: dict = {}

    def __len__(self):
        return len(self.forms)

    def __contains__(self, v) -> bool:
        return _form(v) in self.table

    def id_of(self, v) -> int | None:
        return self.table.get(_form(v))

    def element(self, vid: int) -> Element:
        return Element(self.d, self.forms[vid])

    def distance(self, v) -> int | None:
        """d(center, v), or None when v lies outside the ball."""
        i = self.table.get(_form(v))
        return None if i is None else int(self.dist[i])

    def pair_distance(self, u, v) -> int | None:
        """d(u, v) through left-invariance: d(center, center * u^-1 * v)."""
        d = self.d
        w = invert_word(spell(_form(u), d)) + spell(_form(v), d)
        g = mul_word(self.center.form, d, w)
        return self.distance(g)

    def sphere_ids(self, r: int) -> range:
        if not 0 <= r <= self.radius:
            return range(0)
        return range(self.layer_starts[r], self.layer_starts[r + 1])

    def sphere(self, r: int) -> list[Element]:
        return [self.element(i) for i in self.sphere_ids(r)]

    def sphere_sizes(self) -> list[int]:
        return [self.layer_starts[r + 1] - self.layer_starts[r] for r in range(self.radius + 1)]

    @property
    def adjacency(self) -> np.ndarray:
        """(N, 2(d+1)) array of neighbor ids in letter order, -1 outside the ball."""
        if self._adjacency is None:
            letters = GroupPresentation(self.d).letters()
            adj = np.full((len(self.forms), len(letters)), -1, dtype=np.int64)
            table = self.table
            d = self.d
            for vid, f in enumerate(self.forms):
                for c, (i, s) in enumerate(letters):
                    j = table.get(mul_letter(f, d, i, s))
                    if j is not None:
                        adj[vid, c] = j
            self._adjacency = adj
        return self._adjacency

    def nearest_in_coset(self, v, level: int):
        """Ball vertex of the level-vertex complex through v closest to the center.

        Returns (form, distance) or None when that complex misses the ball.
        """
        if level not in self._coset_nearest:
            idx = {}
            for f in self.forms:
                idx.setdefault(coset_key(f, self.d, level), f)
            self._coset_nearest[level] = idx
        f = self._coset_nearest[level].get(coset_key(_form(v), self.d, level))
        return None if f is None else (f, self.distance(f))

    def nearest_on_line(self, v, i: int):
        """Ball vertex of the a_i-line through v closest to the center, or None.

        Returns (form, distance, offset) with form = v * a_i^offset.
        """
        if i not in self._cyclic_nearest:
            idx = {}
            for f in self.forms:
                rep, c = right_cyclic_coset(f, self.d, i)
                idx.setdefault(rep, (f, c))
            self._cyclic_nearest[i] = idx
        rep, c = right_cyclic_coset(_form(v), self.d, i)
        hit = self._cyclic_nearest[i].get(rep)
        if hit is None:
            return None
        f, cf = hit
        return f, self.distance(f), cf - c

    def to_bytes(self) -> bytes:
        """Versioned cache image: header then encodings sorted bytewise with distances."""
        center = encode(self.center)
        out = bytearray(CACHE_MAGIC)
        out += struct.pack("<BII", CACHE_VERSION, self.d, self.radius)
        out += struct.pack("<I", len(center)) + center
        out += struct.pack("<Q", len(self.forms))
        body = sorted((encode_raw(f, self.d), int(self.dist[i])) for i, f in enumerate(self.forms))
        for enc, r in body:
            out += struct.pack("<HI", len(enc), r) + enc
        return bytes(out)

    @classmethod
    def from_bytes(cls, buf: bytes) -> "BallIndex":
        from .group import decode

        if buf[:4] != CACHE_MAGIC:
            raise ValueError("not a ball cache file")
        version, d, radius = struct.unpack_from("<BII", buf, 4)
        if version != CACHE_VERSION:
            raise ValueError(f"unsupported ball cache version {version}")
        pos = 4 + struct.calcsize("<BII")
        (clen,) = struct.unpack_from("<I", buf, pos)
        pos += 4
        center = decode(buf[pos:pos + clen])
        pos += clen
        (count,) = struct.unpack_from("<Q", buf, pos)
        pos += 8
        rows = []
        for _ in range(count):
            n, r = struct.unpack_from("<HI", buf, pos)
            pos += 6
            enc = buf[pos:pos + n]
            pos += n
            rows.append((r, enc))
        rows.sort()
        forms = [decode_raw(enc, d)[0] for _, enc in rows]
        starts = [0] * (radius + 2)
        for r, _ in rows:
            starts[r + 1] += 1
        for r in range(1, radius + 2):
            starts[r] += starts[r - 1]
        return cls(d, center, radius, forms, starts)


def _form(v):
    return v.form if isinstance(v, Element) else v


def ball(center: Element, R: int, budget: int | None = None, cache: str | os.PathLike | None = None) -> BallIndex:
    """Breadth-first closure of radius R around ``center``.

    ``budget`` caps the vertex count; exceeding it raises BudgetExceeded.
    With ``cache`` (a directory) the result is read from / written to disk.
    """
    if R < 0:
        raise ValueError("radius must be >= 0")
    if cache is None and os.environ.get(CACHE_ENV):
        cache = os.environ[CACHE_ENV]
    path = None
    if cache is not None:
        key = hashlib.sha256(encode(center) + struct.pack("<I", R)).hexdigest()[:24]
        path = Path(cache) / f"ball_d{center.d}_R{R}_{key}.bin"
        if path.exists():
            return BallIndex.from_bytes(path.read_bytes())
    result = _bfs_ball(center, R, budget)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(result.to_bytes())
        tmp.replace(path)
    return result


def _bfs_ball(center: Element, R: int, budget: int | None) -> BallIndex:
    d = center.d
    letters = GroupPresentation(d).letters()
    cap = min(budget, MAX_IDS) if budget is not None else MAX_IDS
    seen = {center.form}
    layer = [center.form]
    forms = [center.form]
    starts = [0, 1]
    for r in range(1, R + 1):
        new = []
        for g in layer:
            for i, s in letters:
                h = mul_letter(g, d, i, s)
                if h not in seen:
                    seen.add(h)
                    new.append(h)
            if len(seen) > cap:
                raise BudgetExceeded(f"ball exceeded {cap} vertices at radius {r}", r - 1, len(seen))
        new.sort(key=lambda f: encode_raw(f, d))
        forms.extend(new)
        starts.append(len(forms))
        layer = new
    return BallIndex(d, center, R, forms, starts)


def path_inside(p: PathRec, B: BallIndex) -> bool:
    return all(f in B.table for f in p.forms())


def is_geodesic(p: PathRec, B: BallIndex) -> bool:
    """Does the path realize the word-metric distance between its endpoints?"""
    if not path_inside(p, B):
        raise OutsideRegion("path leaves the ball region")
    n = len(p.letters)
    dist = B.pair_distance(p.start, p.end)
    if dist is None:
        if n <= B.radius:
            raise AssertionError("pair distance missing for a short path")
        raise OutsideRegion("endpoint distance exceeds the ball radius")
    return dist == n


def extend_geodesic(p: PathRec, B: BallIndex) -> Letter | None:
    """A letter keeping p geodesic, or None if no extension stays inside B."""
    d = p.start.d
    end = p.end.form
    n = len(p.letters)
    for i, s in GroupPresentation(d).letters():
        nxt = mul_letter(end, d, i, s)
        if nxt not in B.table:
            continue
        dist = B.pair_distance(p.start.form, nxt)
        if dist == n + 1:
            return (i, s)
    return None


def geodesic_path(u: Element, v: Element, B: BallIndex) -> PathRec:
    """A geodesic from u to v found by descending distances in a ball centred at the identity-translate."""
    d = u.d
    target = B.pair_distance(u, v)
    if target is None:
        raise OutsideRegion("endpoints farther apart than the ball radius")
    letters = []
    cur = u.form
    remaining = target
    for _ in range(target):
        for i, s in GroupPresentation(d).letters():
            nxt = mul_letter(cur, d, i, s)
            if B.pair_distance(nxt, v.form) == remaining - 1:
                letters.append((i, s))
                cur = nxt
                remaining -= 1
                break
    return PathRec(u, tuple(letters))


def ball_sizes(B: BallIndex) -> list[int]:
    return [B.layer_starts[r + 1] for r in range(B.radius + 1)]
