"""Explicit detour paths around B(O, r), built level by level.

The construction follows the tree of vertex complexes. Inside a level-k
complex the normal form of x^-1 y lists the a_k-strips a path from x to y
must cross. Each crossing edge can slide along its strip, so for each strip
we pick the nearest slide on either side that keeps both ends of the
crossing edge outside the open ball, then connect consecutive crossings
inside the level-(k-1) complexes in between. Level 1 complexes are planes,
where the ball shows up as an l1-diamond around the gate of O and the path
goes radially out to the diamond, around it, and back in.

Every returned path is checked vertex by vertex against the ball.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .cayley import BallIndex, OutsideRegion, PathRec
from .divergence import eval_q_comb
from .group import (
    Element,
    GroupPresentation,
    descend,
    identity,
    identity_element,
    invert,
    invert_word,
    multiply,
    mul_letter,
    mul_power,
    mul_word,
    power,
    right_cyclic_coset,
    spell,
    top_level,
)
from .hyperplane import HyperplaneClass, traces


class BuildError(RuntimeError):
    """A construction step could not find its witness."""

    def __init__(self, step: str, message: str):
        super().__init__(f"{step}: {message}")
        self.step = step


@dataclass
class CornerSpec:
    O: Element
    r: int
    P: Element | None = None
    Q: Element | None = None

    def __post_init__(self):
        d = self.O.d
        if self.P is None:
            self.P = multiply(self.O, Element(d, power(d, d, self.r)))
        if self.Q is None:
            self.Q = multiply(self.O, Element(d, power(d, 0, self.r)))


class _Context:
    def __init__(self, ball_r: BallIndex, r: int):
        if ball_r.radius < r:
            raise ValueError(f"ball radius {ball_r.radius} is smaller than r={r}")
        self.B = ball_r
        self.r = r
        self.d = ball_r.d
        self.memo: dict = {}

    def ok(self, form) -> bool:
        dist = self.B.distance(form)
        return dist is None or dist >= self.r

    def free(self, form, level: int) -> bool:
        """No vertex of the level complex through ``form`` is inside the open ball."""
        hit = self.B.nearest_in_coset(form, level)
        return hit is None or hit[1] >= self.r


def _relative(a, b, d: int):
    return multiply(invert(Element(d, a)), Element(d, b)).form


def _staircase(start, goal, first_axis: int):
    (x, y), (gx, gy) = start, goal
    pts = [(x, y)]
    order = (0, 1) if first_axis == 0 else (1, 0)
    for axis in order:
        while (x, y)[axis] != (gx, gy)[axis]:
            if axis == 0:
                x += 1 if gx > x else -1
            else:
                y += 1 if gy > y else -1
            pts.append((x, y))
    return pts


def _ring(rho: int) -> list:
    """Closed walk around the l1-diamond of radius rho, counterclockwise from (rho, 0).

    Even positions have norm rho, odd positions norm rho + 1.
    """
    diamond = []
    for k in range(rho):
        diamond.append((rho - k, k))
    for k in range(rho):
        diamond.append((-k, rho - k))
    for k in range(rho):
        diamond.append((-rho + k, -k))
    for k in range(rho):
        diamond.append((k, -rho + k))
    out = []
    for n, (a, b) in enumerate(diamond):
        a2, b2 = diamond[(n + 1) % len(diamond)]
        out.append((a, b))
        out.append((a2, b) if abs(a2) + abs(b) == rho + 1 else (a, b2))
    return out


def _entries(pt, rho: int) -> list:
    """Diamond points reachable from pt by steps that shrink the norm."""
    x, y = pt
    sx = 1 if x >= 0 else -1
    sy = 1 if y >= 0 else -1
    a = min(abs(x), rho)
    b = min(abs(y), rho)
    out = [(sx * a, sy * (rho - a)), (sx * (rho - b), sy * b)]
    return list(dict.fromkeys(out))


def _radial(pt, entry) -> list:
    """Monotone walk from pt to entry; every step lowers the norm by one."""
    return _staircase(pt, entry, 0)


def _plane_candidates(p, q, rho: int) -> list:
    out = [_staircase(p, q, 0), _staircase(p, q, 1)]
    if rho <= 0:
        return out
    ring = _ring(rho)
    where = {pt: n for n, pt in enumerate(ring) if n % 2 == 0}
    size = len(ring)
    for ep in _entries(p, rho):
        for eq in _entries(q, rho):
            i, j = where[ep], where[eq]
            ccw = [ring[(i + k) % size] for k in range((j - i) % size + 1)]
            cw = [ring[(i - k) % size] for k in range((i - j) % size + 1)]
            for arc in (ccw, cw):
                out.append(_radial(p, ep)[:-1] + arc + _radial(q, eq)[::-1][1:])
    return out


def _plane_letters(pts) -> tuple:
    out = []
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x1 != x0:
            out.append((0, x1 - x0))
        else:
            out.append((1, y1 - y0))
    return tuple(out)


def _walk_ok(ctx: _Context, start, letters) -> bool:
    g = start
    d = ctx.d
    if not ctx.ok(g):
        return False
    for i, s in letters:
        g = mul_letter(g, d, i, s)
        if not ctx.ok(g):
            return False
    return True


def _plane_bfs(ctx: _Context, x, y, limit: int) -> tuple:
    """Fallback: BFS inside the plane through x using the true ball distances."""
    d = ctx.d
    letters = [(i, s) for i, s in GroupPresentation(d).letters() if i <= 1]
    prev = {x: None}
    queue = deque([x])
    while queue:
        g = queue.popleft()
        if g == y:
            break
        for i, s in letters:
            h = mul_letter(g, d, i, s)
            if h not in prev and ctx.ok(h):
                prev[h] = (g, (i, s))
                queue.append(h)
                if len(prev) > limit:
                    raise BuildError("plane", "fallback search exhausted")
    if y not in prev:
        raise BuildError("plane", "endpoints disconnected in the plane")
    out = []
    g = y
    while prev[g] is not None:
        g, letter = prev[g]
        out.append(letter)
    return tuple(reversed(out))


def _plane_path(ctx: _Context, x, y) -> tuple:
    d = ctx.d
    if x == y:
        return ()
    rel = descend(_relative(x, y, d), d, 1)
    hit = ctx.B.nearest_in_coset(x, 1)
    if hit is None or hit[1] >= ctx.r:
        m, n = rel
        return ((0, 1 if m > 0 else -1),) * abs(m) + ((1, 1 if n > 0 else -1),) * abs(n)
    gate, delta = hit
    rho = ctx.r - delta
    p = descend(_relative(gate, x, d), d, 1)
    q = descend(_relative(gate, y, d), d, 1)
    best = None
    for pts in _plane_candidates(p, q, rho):
        letters = _plane_letters(pts)
        if best is not None and len(letters) >= len(best):
            continue
        if _walk_ok(ctx, x, letters):
            best = letters
    if best is None:
        span = abs(p[0]) + abs(p[1]) + abs(q[0]) + abs(q[1]) + 2 * rho + 2
        best = _plane_bfs(ctx, x, y, 4 * span * span + 64)
    return best


def _slide(ctx: _Context, tail, head, along: int, across: int, bound: int):
    """Offsets t >= 0 and t <= 0 nearest 0 with tail*along^t and head*across^t outside the open ball."""
    d = ctx.d
    out = []
    for sign in (1, -1):
        for t in range(bound + 1):
            off = sign * t
            if ctx.ok(mul_power(tail, d, along, off)) and ctx.ok(mul_power(head, d, across, off)):
                out.append(off)
                break
        else:
            raise BuildError("strip", "no crossing edge outside the ball within the search bound")
    return list(dict.fromkeys(out))


def _connect(ctx: _Context, k: int, x, y) -> tuple:
    """Letters of a path from x to y inside the level-k complex through x, avoiding the open ball."""
    key = (k, x, y)
    hit = ctx.memo.get(key)
    if hit is not None:
        return hit
    d = ctx.d
    rel = _relative(x, y, d)
    k = min(k, top_level(rel, d))
    if x == y:
        out = ()
    elif ctx.free(x, k):
        out = spell(descend(rel, d, k), k) if k < d else spell(rel, d)
    elif k == 1:
        out = _plane_path(ctx, x, y)
    else:
        out = _connect_level(ctx, k, x, y, descend(rel, d, k))
    ctx.memo[key] = out
    return out


def _connect_level(ctx: _Context, k: int, x, y, form) -> tuple:
    d = ctx.d
    low = k - 1
    bound = 4 * ctx.r + 4 * len(spell(form, k)) + 8
    # straight crossings read off the normal form
    cur = x
    tails, heads, signs = [], [], []
    for j in range(1, len(form), 2):
        cur = mul_word(cur, d, spell(form[j - 1], low))
        tails.append(cur)
        signs.append(form[j])
        cur = mul_letter(cur, d, k, form[j])
        heads.append(cur)
    options = []
    for tail, head, e in zip(tails, heads, signs):
        along, across = (0, low) if e == 1 else (low, 0)
        offs = _slide(ctx, tail, head, along, across, bound)
        options.append([(mul_power(tail, d, along, t), mul_power(head, d, across, t)) for t in offs])
    # dynamic programme over the slide choices
    layer = {}
    for c, (tl, hd) in enumerate(options[0]):
        seg = _connect(ctx, low, x, tl)
        layer[c] = (len(seg) + 1, (seg, ((k, signs[0]),)))
    for j in range(1, len(options)):
        new = {}
        for c, (tl, hd) in enumerate(options[j]):
            best = None
            for pc, (cost, parts) in layer.items():
                seg = _connect(ctx, low, options[j - 1][pc][1], tl)
                total = cost + len(seg) + 1
                if best is None or total < best[0]:
                    best = (total, parts + (seg, ((k, signs[j]),)))
            new[c] = best
        layer = new
    best = None
    for pc, (cost, parts) in layer.items():
        seg = _connect(ctx, low, options[-1][pc][1], y)
        total = cost + len(seg)
        if best is None or total < best[0]:
            best = (total, parts + (seg,))
    return tuple(letter for part in best[1] for letter in part)


def plane_detour(E: Element, P: Element, Q: Element, O: Element, r: int, ball_r: BallIndex) -> PathRec:
    """Detour from P to Q inside the plane (level-1 complex) through E."""
    d = P.d
    for v in (P, Q):
        if top_level(_relative(E.form, v.form, d), d) > 1:
            raise ValueError("E does not contain both endpoints")
    _check_center(ball_r, O)
    ctx = _Context(ball_r, r)
    for v in (P, Q):
        if not ctx.ok(v.form):
            raise ValueError("endpoint inside the open ball")
    path = PathRec(P, _plane_path(ctx, P.form, Q.form))
    _assert_avoids(path, ctx, "plane")
    return path


def strip_detour(H: HyperplaneClass, Qs: Element, O: Element, r: int, ball_r: BallIndex,
                 target: str | None = None) -> PathRec:
    """From Qs on one trace of star(H) to the other trace, ending at distance >= r.

    Walk along Qs's trace away from the nearest point to O until the opposite
    vertex is outside the open ball, cross the strip, then walk back while the
    next vertex stays outside.
    """
    _check_center(ball_r, O)
    ctx = _Context(ball_r, r)
    d = ctx.d
    smooth, rugged = traces(H)
    lines = {"smooth": (smooth.start.form, _trace_letter(H, 0)),
             "rugged": (rugged.start.form, _trace_letter(H, 1))}
    side = None
    for name, (base, letter) in lines.items():
        if right_cyclic_coset(Qs.form, d, letter)[0] == right_cyclic_coset(base, d, letter)[0]:
            side = name
            break
    if side is None:
        raise ValueError("Qs is not on a trace of H")
    if target is None:
        target = "rugged" if side == "smooth" else "smooth"
    if not ctx.ok(Qs.form):
        raise ValueError("Qs is inside the open ball")
    if target == side:
        return PathRec(Qs, ())
    _, along = lines[side]
    _, across = lines[target]
    if ctx.B.nearest_on_line(lines[target][0], across) is None:
        raise BuildError("strip", "target trace is farther than r from O")
    i = H.height
    cross = (i, 1) if side == "smooth" else (i, -1)
    near = ctx.B.nearest_on_line(Qs.form, along)
    step = 1
    if near is not None and near[2] > 0:
        step = -1
    out = []
    g = Qs.form
    for _ in range(2 * r + 4):
        partner = mul_letter(g, d, *cross)
        if ctx.ok(partner):
            break
        g = mul_letter(g, d, along, step)
        out.append((along, step))
    else:
        raise BuildError("strip", "no crossing found within 2r + 4 steps")
    out.append(cross)
    g = mul_letter(g, d, *cross)
    back = len(out) - 1
    for _ in range(back):
        if ctx.B.distance(g) == r:
            break
        nxt = mul_letter(g, d, across, -step)
        if not ctx.ok(nxt):
            break
        g = nxt
        out.append((across, -step))
    path = PathRec(Qs, tuple(out))
    _assert_avoids(path, ctx, "strip")
    return path


def _trace_letter(H: HyperplaneClass, side: int) -> int:
    if H.height >= 2:
        return 0 if side == 0 else H.height - 1
    return 1 if H.height == 0 else 0


def _check_center(ball_r: BallIndex, O: Element):
    if ball_r.center != O:
        raise ValueError("ball_r must be centred at O")


def _assert_avoids(path: PathRec, ctx: _Context, step: str):
    for f in path.forms():
        if not ctx.ok(f):
            raise BuildError(step, "constructed path enters the open ball")


def build_detour(spec: CornerSpec, ball_r: BallIndex) -> PathRec:
    """A verified (O, r)-detour path from spec.P to spec.Q."""
    _check_center(ball_r, spec.O)
    ctx = _Context(ball_r, spec.r)
    P, Q = spec.P, spec.Q
    for v in (P, Q):
        if not ctx.ok(v.form):
            raise ValueError("endpoint inside the open ball")
    d = ctx.d
    path = PathRec(P, _connect(ctx, d, P.form, Q.form))
    if path.end != Q:
        raise BuildError("assemble", "path does not end at Q")
    _assert_avoids(path, ctx, "assemble")
    return path


def verification_report(path: PathRec, spec: CornerSpec, ball_r: BallIndex) -> dict:
    ctx = _Context(ball_r, spec.r)
    inside = [n for n, f in enumerate(path.forms()) if not ctx.ok(f)]
    bound = eval_q_comb(spec.O.d, spec.r)
    return {
        "length": len(path),
        "starts_at_P": path.start == spec.P,
        "ends_at_Q": path.end == spec.Q,
        "vertices_inside_ball": inside,
        "avoids_ball": not inside,
        "q_comb_bound": int(bound) if bound.denominator == 1 else float(bound),
        "within_bound": len(path) <= bound,
    }
