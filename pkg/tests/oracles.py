"""Independent reference computations used to freeze expected values.

None of these share search code with the package: the grid oracle works on
integer coordinates, the naive ball uses only words and the Britton test, and
the detour oracle is a plain one-directional BFS over its own ball.
"""

from __future__ import annotations

from collections import deque

from hydradiv.group import (
    GroupPresentation,
    britton_reduces_to_identity,
    identity,
    invert_word,
    mul_letter,
)

STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def grid_detour(p, q, r):
    """Shortest lattice path p -> q in Z^2 through points with |x| + |y| >= r."""
    box = max(abs(p[0]) + abs(p[1]), abs(q[0]) + abs(q[1])) + r + 3
    seen = {p: 0}
    todo = deque([p])
    while todo:
        x, y = todo.popleft()
        if (x, y) == q:
            return seen[q]
        for dx, dy in STEPS:
            n = (x + dx, y + dy)
            if abs(n[0]) > box or abs(n[1]) > box or abs(n[0]) + abs(n[1]) < r or n in seen:
                continue
            seen[n] = seen[(x, y)] + 1
            todo.append(n)
    return None


def grid_mu(r):
    """Largest detour over all unordered pairs of the radius-r diamond."""
    sphere = [(x, y) for x in range(-r, r + 1) for y in range(-r, r + 1) if abs(x) + abs(y) == r]
    best = 0
    for a in range(len(sphere)):
        for b in range(a + 1, len(sphere)):
            best = max(best, grid_detour(sphere[a], sphere[b], r))
    return best


def _abelian(w, d):
    return (sum(s for i, s in w if i < d), sum(s for i, s in w if i == d))


def naive_sphere_sizes(d, R):
    """Sphere sizes by word enumeration, deduplicated with the Britton test."""
    letters = GroupPresentation(d).letters()
    buckets: dict = {(0, 0): [()]}
    layer = [()]
    sizes = [1]
    for _ in range(R):
        nxt = []
        for w in layer:
            for x in letters:
                c = w + (x,)
                key = _abelian(c, d)
                reps = buckets.setdefault(key, [])
                if any(britton_reduces_to_identity(c + invert_word(v), d) for v in reps):
                    continue
                reps.append(c)
                nxt.append(c)
        sizes.append(len(nxt))
        layer = nxt
    return sizes


def bfs_detour(d, p, q, r, limit=10**6):
    """Shortest p -> q path through vertices at distance >= r from the identity.

    Forms are raw normal forms; the forbidden set comes from a separate BFS.
    """
    letters = GroupPresentation(d).letters()
    inner = {identity(d)}
    frontier = [identity(d)]
    for _ in range(r - 1):
        nxt = []
        for f in frontier:
            for x in letters:
                g = mul_letter(f, d, *x)
                if g not in inner:
                    inner.add(g)
                    nxt.append(g)
        frontier = nxt
    if r == 0:
        inner = set()
    seen = {p: 0}
    todo = deque([p])
    while todo:
        f = todo.popleft()
        if f == q:
            return seen[f]
        for x in letters:
            g = mul_letter(f, d, *x)
            if g in inner or g in seen:
                continue
            seen[g] = seen[f] + 1
            if len(seen) > limit:
                raise RuntimeError("oracle limit reached")
            todo.append(g)
    return None


def _inner_ball(d, r):
    letters = GroupPresentation(d).letters()
    inner = {identity(d)} if r >= 1 else set()
    frontier = list(inner)
    for _ in range(r - 1):
        nxt = []
        for f in frontier:
            for x in letters:
                g = mul_letter(f, d, *x)
                if g not in inner:
                    inner.add(g)
                    nxt.append(g)
        frontier = nxt
    return inner


def _depth_bfs(d, start, inner, depth):
    letters = GroupPresentation(d).letters()
    seen = {start: 0}
    frontier = [start]
    for k in range(1, depth + 1):
        nxt = []
        for f in frontier:
            for x in letters:
                g = mul_letter(f, d, *x)
                if g not in inner and g not in seen:
                    seen[g] = k
                    nxt.append(g)
        frontier = nxt
    return seen


def split_detour(d, p, q, r, total):
    """Shortest avoiding path of length <= total, from two depth-limited BFS trees.

    Every path of length n <= total has a vertex at distance <= total // 2 from p
    and <= total - total // 2 from q, so the minimum over the overlap is exact.
    """
    inner = _inner_ball(d, r)
    a = _depth_bfs(d, p, inner, total // 2)
    b = _depth_bfs(d, q, inner, total - total // 2)
    best = min((a[x] + b[x] for x in a.keys() & b.keys()), default=None)
    return best


def p_table(dmax, rmax):
    """Bottom-up table of the lower-bound recurrence at integer radii."""
    t = {1: {r: r - 1 for r in range(0, rmax + 1)}}
    for d in range(2, dmax + 1):
        t[d] = {r: sum(t[d - 1][r - j] for j in range(1, r)) for r in range(0, rmax + 1)}
    return t


def brute_almost_detour(r, max_length, region):
    """Shortest almost detour over the d=2 basic corner by letter-by-letter BFS.

    State: (vertex, start, open excursion letters or None, entry vertex). A
    closed excursion is accepted iff is_legal_shortcut holds and, when it
    touches the start and passes through O, it uses no letter below a_2.
    """
    from hydradiv.cayley import PathRec
    from hydradiv.checkers import is_legal_shortcut, raising_line_parts
    from hydradiv.group import Element, cyclic_exponent, power, subgroup_level

    d = 2
    O = region.center
    letters = GroupPresentation(d).letters()
    origin = identity(d)

    def dist(f):
        x = region.distance(f)
        return x if x is not None else region.radius + 1

    def accept(entry, word, start):
        p = PathRec(Element(d, entry), word)
        if not is_legal_shortcut(p, O, r, region):
            return False
        forms = p.forms()
        if start in (forms[0], forms[-1]) and origin in forms:
            return all(i >= d for i, _ in word)
        return True

    def prefix_ok(entry, word):
        forms = PathRec(Element(d, entry), word).forms()
        if region.pair_distance(entry, forms[-1]) != len(word):
            return False
        for k in range(1, d + 1):
            parts = raising_line_parts(word, k)
            if parts is None:
                continue
            a, n = parts
            if a == len(word) and n == 0:
                return True  # still inside u_1 bar, segment not placed yet
            if all(subgroup_level(Element(d, f)) <= k for f in forms[a:a + n + 1]):
                return True
        return False

    level = set()
    for j in range(r, max_length + 1):
        s = power(d, d, j)
        level.add((s, s, None, None))
    for n in range(0, max_length + 1):
        nxt = set()
        for f, start, exc, entry in level:
            c = cyclic_exponent(f, d, 0)
            if n >= 1 and c is not None and c >= 1:
                if exc is None:
                    return n
                if prefix_ok(entry, exc):
                    # an open excursion on arrival must be a prefix of a legal shortcut
                    return n
            if n == max_length:
                continue
            for x in letters:
                g = mul_letter(f, d, *x)
                inside = dist(g) < r
                if exc is None:
                    if inside:
                        nxt.add((g, start, (x,), f))
                    else:
                        nxt.add((g, start, None, None))
                else:
                    w = exc + (x,)
                    if not prefix_ok(entry, w):
                        continue
                    if inside:
                        nxt.add((g, start, w, entry))
                    elif accept(entry, w, start):
                        nxt.add((g, start, None, None))
        level = nxt
    return None
