"""Predicates for structured paths that may enter B(O, r) in controlled ways.

Vocabulary:

* positive segment: every letter traversed in the positive direction.
* k-segment: letters all a_k with one sign.
* raising k-ray: a k-segment followed by a positive path whose heights never
  decrease and are all >= k + 1 (not both parts empty).
* raising k-line: ubar_1 s u_2 where s is a k-segment (possibly a point) and
  u_1, u_2 are positive raising (k+1)-rays, i.e. positive with non-decreasing
  heights >= k + 1. ubar_1 is u_1 reversed.
* legal shortcut: a geodesic inside the (closed-at-the-ends) ball that is a
  raising k-line for some k >= 1 whose k-segment lies in the level-k complex
  through O.
* almost detour path: every maximal excursion into the open ball is a legal
  shortcut.

Geodesic checks read distances off a ball around O, so the region must be
large enough to see the distance between the ends of each excursion.
"""

from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass, field

from .cayley import BallIndex, PathRec
from .group import Element, GroupPresentation, cyclic_exponent, invert, multiply, top_level


class IncompleteRegion(ValueError):
    """The region is too small to decide a geodesic check."""


def is_positive_segment(p: PathRec) -> bool:
    return all(s == 1 for _, s in p.letters)


def is_segment(letters, k: int) -> bool:
    return all(i == k for i, _ in letters) and len({s for _, s in letters}) <= 1


def _positive_raising(letters, k: int) -> bool:
    """Positive, heights non-decreasing and all >= k."""
    last = k
    for i, s in letters:
        if s != 1 or i < last:
            return False
        last = i
    return True


def raising_split(letters, k: int) -> int | None:
    """Split index of letters = (k-segment)(positive raising ray of heights >= k+1)."""
    if not letters:
        return None
    n = 0
    if letters[0][0] == k:
        sign = letters[0][1]
        while n < len(letters) and letters[n] == (k, sign):
            n += 1
    if not _positive_raising(letters[n:], k + 1):
        return None
    return n


def is_raising_ray(p: PathRec, dlevel: int) -> int | None:
    """Index where the dlevel-segment ends, or None if p is not a raising ray."""
    return raising_split(p.letters, dlevel)


def raising_line_parts(letters, k: int):
    """(len ubar_1, len segment) if letters = ubar_1 s u_2 for level k, else None."""
    n = 0
    last = None
    # ubar_1: negative letters, heights >= k+1, non-increasing
    while n < len(letters):
        i, s = letters[n]
        if s != -1 or i < k + 1 or (last is not None and i > last):
            break
        last = i
        n += 1
    m = n
    if m < len(letters) and letters[m][0] == k:
        sign = letters[m][1]
        while m < len(letters) and letters[m] == (k, sign):
            m += 1
    if not _positive_raising(letters[m:], k + 1):
        return None
    return n, m - n


def _vertex_in_complex(v, O: Element, k: int) -> bool:
    d = O.d
    return top_level(multiply(invert(O), Element(d, v)).form, d) <= k


def _distance(region: BallIndex, u, v, length: int) -> int:
    dist = region.pair_distance(u, v)
    if dist is None:
        if length <= region.radius:
            return region.radius + 1
        raise IncompleteRegion("region radius too small for this geodesic check")
    return dist


def _check_region(region: BallIndex, O: Element, r: int):
    if region.center != O:
        raise ValueError("region must be centred at O")
    if region.radius < r:
        raise IncompleteRegion(f"region radius {region.radius} < r = {r}")


def legal_level(p: PathRec, O: Element, r: int, region: BallIndex) -> int | None:
    """Smallest k making p an O-legal shortcut, or None."""
    _check_region(region, O, r)
    forms = p.forms()
    inner = forms[1:-1] if len(forms) > 2 else []
    for f in inner:
        dist = region.distance(f)
        if dist is None or dist >= r:
            return None
    for f in (forms[0], forms[-1]):
        dist = region.distance(f)
        if dist is None or dist > r:
            return None
    if all(region.distance(f) >= r for f in forms):
        return None
    if _distance(region, forms[0], forms[-1], len(p)) != len(p):
        return None
    for k in range(1, O.d + 1):
        parts = raising_line_parts(p.letters, k)
        if parts is None:
            continue
        if _segment_in_complex(forms, parts, O, k, complete=True):
            return k
    return None


def _segment_in_complex(forms, parts, O: Element, k: int, complete: bool) -> bool:
    """The k-segment's vertices lie in the level-k complex through O.

    With ``complete`` False the path may still be inside u_1 bar, in which
    case the segment is not placed yet and the check passes.
    """
    start, seglen = parts
    if not complete and start == len(forms) - 1:
        return True
    return all(_vertex_in_complex(forms[j], O, k) for j in range(start, start + seglen + 1))


def is_legal_shortcut(p: PathRec, O: Element, r: int, region: BallIndex) -> bool:
    return legal_level(p, O, r, region) is not None


def shortcut_components(p: PathRec, O: Element, r: int, region: BallIndex) -> list[tuple[int, int]]:
    """(first, last) vertex indices of each excursion into the open ball, with its bounding vertices."""
    forms = p.forms()
    inside = []
    for f in forms:
        dist = region.distance(f)
        inside.append(dist is not None and dist < r)
    out = []
    n = 0
    while n < len(forms):
        if not inside[n]:
            n += 1
            continue
        a = n
        while n < len(forms) and inside[n]:
            n += 1
        out.append((max(a - 1, 0), min(n, len(forms) - 1)))
    return out


def _sub(p: PathRec, a: int, b: int) -> PathRec:
    return PathRec(p.vertices()[a], p.letters[a:b])


def is_almost_detour(p: PathRec, O: Element, r: int, region: BallIndex) -> bool:
    _check_region(region, O, r)
    return all(is_legal_shortcut(_sub(p, a, b), O, r, region)
               for a, b in shortcut_components(p, O, r, region))


def is_geodesic_path(p: PathRec, region: BallIndex) -> bool:
    if not p.letters:
        return True
    return _distance(region, p.start.form, p.end.form, len(p)) == len(p)


@dataclass
class PathClassification:
    positive_segment: bool
    segment_level: int | None
    raising_ray_level: int | None
    raising_ray_split: int | None
    raising_line_level: int | None
    geodesic: bool | None
    shortcut: bool
    legal_shortcut_level: int | None
    almost_detour: bool
    shortcuts: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def classify(p: PathRec, O: Element, r: int, region: BallIndex) -> PathClassification:
    d = O.d
    seg = None
    if p.letters and is_segment(p.letters, p.letters[0][0]):
        seg = p.letters[0][0]
    ray_level = ray_split = None
    line_level = None
    for k in range(0, d + 1):
        split = raising_split(p.letters, k)
        if split is not None and ray_level is None:
            ray_level, ray_split = k, split
        if line_level is None and k >= 1 and p.letters and raising_line_parts(p.letters, k) is not None:
            line_level = k
    try:
        geo = is_geodesic_path(p, region)
    except IncompleteRegion:
        geo = None
    dists = [region.distance(f) for f in p.forms()]
    ends_ok = all(x is not None and x <= r for x in (dists[0], dists[-1]))
    shortcut = (bool(geo) and ends_ok and all(x is not None and x < r for x in dists[1:-1])
                and any(x is not None and x < r for x in dists))
    legal = None
    try:
        legal = legal_level(p, O, r, region)
    except IncompleteRegion:
        pass
    comps = shortcut_components(p, O, r, region)
    try:
        almost = is_almost_detour(p, O, r, region)
    except IncompleteRegion:
        almost = False
    return PathClassification(
        positive_segment=is_positive_segment(p),
        segment_level=seg,
        raising_ray_level=ray_level,
        raising_ray_split=ray_split,
        raising_line_level=line_level,
        geodesic=geo,
        shortcut=shortcut,
        legal_shortcut_level=legal,
        almost_detour=almost,
        shortcuts=[list(c) for c in comps],
    )


# exhaustive search for short almost detour paths over the basic corner
#
# An open excursion is summarised by its entry vertex, its length, and for every
# level k the state of the raising-line parse: ("bar", last height) while
# reading u_1 bar, ("seg", sign) inside the k-segment, ("up", last height) in u_2.

def _advance(parse, letter, here, O: Element, k: int):
    """Parse state after reading ``letter`` from vertex ``here``, or None."""
    i, s = letter
    phase, val = parse
    if phase == "bar":
        if s == -1 and i >= k + 1 and (val is None or i <= val):
            return ("bar", i)
        if i == k or (s == 1 and i >= k + 1):
            if not _vertex_in_complex(here, O, k):
                return None
            return ("seg", s) if i == k else ("up", i)
        return None
    if phase == "seg":
        if i == k and s == val:
            return parse
        if s == 1 and i >= k + 1:
            return ("up", i)
        return None
    if s == 1 and i >= val:
        return ("up", i)
    return None


def _closes(parse, here, O: Element, k: int) -> bool:
    # ending while still in u_1 bar puts a one-point segment at the end vertex
    return parse[0] != "bar" or _vertex_in_complex(here, O, k)


@dataclass
class _Shortcut:
    letters: tuple
    through_origin: bool
    low: bool  # uses a letter of height below the corner height


def excursions_from(u, O: Element, r: int, region: BallIndex):
    """All legal excursions that leave u (a sphere vertex) into the open ball.

    Returns (closed, open_): ``closed`` maps each exit vertex to the shortest
    legal shortcut u -> exit, kept separately for shortcuts that avoid O or
    use only letters of height >= d ("clean") and for all shortcuts;
    ``open_`` lists (inside vertex, letters) for every prefix that can still
    be completed into a legal shortcut.
    """
    from .group import mul_letter

    d = O.d
    letters = GroupPresentation(d).letters()
    origin = O.form
    closed: dict = {}
    open_: list = []
    stack = [(u, (), tuple(("bar", None) for _ in range(d)), False, False)]
    while stack:
        f, word, parses, seen_origin, low = stack.pop()
        for letter in letters:
            g = mul_letter(f, d, *letter)
            dist = region.distance(g)
            steps = len(word) + 1
            if _distance(region, u, g, steps) != steps:
                continue
            new = tuple(None if p is None else _advance(p, letter, f, O, k)
                        for k, p in zip(range(1, d + 1), parses))
            w = word + (letter,)
            lo = low or letter[0] < d
            if dist is not None and dist < r:
                if all(p is None for p in new):
                    continue
                so = seen_origin or g == origin
                open_.append((g, w))
                stack.append((g, w, new, so, lo))
            else:
                if not any(p is not None and _closes(p, g, O, k) for k, p in zip(range(1, d + 1), new)):
                    continue
                if not word:
                    continue  # an edge that never enters the ball
                sc = _Shortcut(w, seen_origin, lo)
                best = closed.setdefault(g, {})
                for kind in ("all", "clean"):
                    if kind == "clean" and sc.through_origin and sc.low:
                        continue
                    cur = best.get(kind)
                    if cur is None or (len(w), w) < (len(cur.letters), cur.letters):
                        best[kind] = sc
    return closed, open_


def minimal_almost_detour(r: int, max_length: int, d: int = 2, region: BallIndex | None = None,
                          budget: int = 10**7):
    """Shortest almost (O, r)-detour path over the basic d-corner at O = identity.

    Walks start at P = a_d^j (j >= r) and stop on the first arrival at a_0^k
    (k >= 1). Every excursion into the open ball must be a legal shortcut;
    one still open on arrival must be a prefix of one. A shortcut with an end
    at P that contains O may not use letters of height below d.

    Outside the ball the walk uses ordinary edges; each legal shortcut is one
    weighted edge between sphere vertices. Reversing a legal shortcut gives a
    legal shortcut, so the graph is undirected and a bidirectional Dijkstra
    applies. Any path from a_d^j to a_0^k has length >= j + k (count letters
    in the abelianisation), so only j < max_length matter.
    Returns (length, letters) or (None, None).
    """
    import heapq

    from .cayley import ball as make_ball
    from .group import identity_element, mul_letter, power

    O = identity_element(d)
    if region is None:
        region = make_ball(O, 2 * r + 2)
    if region.radius < 2 * r:
        raise IncompleteRegion("region radius must be at least 2r")
    letters = GroupPresentation(d).letters()
    cache: dict = {}

    def sc(u):
        if u not in cache:
            cache[u] = excursions_from(u, O, r, region)
        return cache[u]

    def outside(f):
        dist = region.distance(f)
        return dist is None or dist >= r

    def neighbours(f, start):
        for letter in letters:
            g = mul_letter(f, d, *letter)
            if outside(g):
                yield g, (letter,)
        if region.distance(f) == r:
            for g, kinds in sc(f)[0].items():
                kind = "clean" if (f == start or g == start) else "all"
                hit = kinds.get(kind)
                if hit is not None:
                    yield g, hit.letters

    # backward seeds: a_0^k outside the ball, or open excursions that reach a_0^k inside it
    targets = {}
    for k in range(1, max_length + 1):
        q = power(d, 0, k)
        if outside(q):
            targets[q] = (0, ())
    for u in region.sphere_ids(r):
        f = region.forms[u]
        for g, w in sc(f)[1]:
            c = cyclic_exponent(g, d, 0)
            if c is not None and c >= 1:
                cur = targets.get(f)
                if cur is None or (len(w), w) < (cur[0], cur[1]):
                    targets[f] = (len(w), w)

    best = None
    for j in range(r, max_length):
        if best is not None and j + 1 >= best[0]:
            break
        start = power(d, d, j)
        res = _bidi_dijkstra(start, targets, lambda f: neighbours(f, start), max_length, budget)
        if res is not None and (best is None or res[0] < best[0]):
            best = res
    if best is None:
        return None, None
    return best


def _bidi_dijkstra(start, targets: dict, neighbours, limit: int, budget: int):
    import heapq
    from itertools import count

    tick = count()
    dist = ({start: 0}, {t: c for t, (c, _) in targets.items()})
    parent = ({start: None}, {t: None for t in targets})
    heaps = ([(0, next(tick), start)], [(c, next(tick), t) for t, (c, _) in targets.items()])
    heapq.heapify(heaps[1])
    done = (set(), set())
    best = None
    meet = None
    if start in dist[1]:
        best, meet = dist[1][start], start
    while heaps[0] and heaps[1]:
        top = heaps[0][0][0] + heaps[1][0][0]
        if best is not None and top >= best:
            break
        if top > limit:
            break
        side = 0 if heaps[0][0][0] <= heaps[1][0][0] else 1
        c, _, f = heapq.heappop(heaps[side])
        if f in done[side] or c > dist[side][f]:
            continue
        done[side].add(f)
        for g, w in neighbours(f):
            nc = c + len(w)
            if nc < dist[side].get(g, nc + 1):
                dist[side][g] = nc
                parent[side][g] = (f, w)
                heapq.heappush(heaps[side], (nc, next(tick), g))
                o = dist[1 - side].get(g)
                if o is not None and (best is None or nc + o < best):
                    best, meet = nc + o, g
        if len(dist[0]) + len(dist[1]) > budget:
            raise RuntimeError("almost detour search exceeded its budget")
    if best is None or best > limit:
        return None
    fwd = []
    g = meet
    while parent[0][g] is not None:
        g, w = parent[0][g]
        fwd.append(w)
    out = [x for w in reversed(fwd) for x in w]
    g = meet
    while parent[1][g] is not None:
        h, w = parent[1][g]
        # backward edges were walked from h to g; the path goes g -> h
        out.extend((i, -s) for i, s in reversed(w))
        g = h
    out.extend(targets[g][1])
    return best, tuple(out)
