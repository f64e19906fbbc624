"""Detour distances around a ball, bound polynomials, and growth tables.

A detour path for (O, r) may only use vertices at distance >= r from O.
Two search modes are offered:

* uncapped: bidirectional BFS in the complement of the open ball. Every
  path of length L between P and Q stays inside B(O, max(|P|, |Q|) + L), so a
  completed search is exact; the reported cap is that radius.
* capped: BFS restricted to an explicit ball B(O, R_cap). The answer is exact
  when max(|P|, |Q|) + L <= R_cap; ``adaptive`` doubles the cap until then.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from .cayley import BallIndex, BudgetExceeded, PathRec, ball
from .group import (
    Element,
    GroupPresentation,
    identity,
    identity_element,
    invert,
    multiply,
    mul_letter,
    power,
    spell,
)

DEFAULT_BUDGET = 10**7


@lru_cache(maxsize=32)
def origin_ball(d: int, R: int) -> BallIndex:
    """Ball around the identity, shared by every query at that (d, R)."""
    return ball(identity_element(d), R)


@dataclass
class DetourResult:
    r: int
    P: Element
    Q: Element
    length: int | None
    path: PathRec | None
    R_cap: int | None
    certified: bool
    explored: int = 0
    mode: str = "uncapped"
    lower: int | None = None  # proven lower bound on the detour length

    @property
    def found(self) -> bool:
        return self.length is not None


def _norm_bound(g, d: int, r: int) -> int:
    """|g| if g is within distance r of the identity, else an upper bound (spelled length)."""
    B = origin_ball(d, r)
    dist = B.distance(g)
    return dist if dist is not None else len(spell(g, d))


def _bidirectional(d: int, start, goal, blocked: Callable, budget: int):
    """Shortest unblocked path, lexicographically least letter sequence among ties.

    Returns (length, letters, explored). Raises BudgetExceeded.
    """
    letters = GroupPresentation(d).letters()
    if start == goal:
        return 0, (), 1
    dist = ({start: 0}, {goal: 0})
    layers = ([[start]], [[goal]])
    found = None
    while found is None:
        side = 0 if len(layers[0][-1]) <= len(layers[1][-1]) else 1
        mine, other = dist[side], dist[1 - side]
        depth = len(layers[side])
        new = []
        best = None
        for g in layers[side][-1]:
            for i, s in letters:
                h = mul_letter(g, d, i, s)
                if h in mine or blocked(h):
                    continue
                mine[h] = depth
                new.append(h)
                o = other.get(h)
                if o is not None and (best is None or depth + o < best):
                    best = depth + o
        if not new:
            return None, None, len(dist[0]) + len(dist[1])
        layers[side].append(new)
        explored = len(dist[0]) + len(dist[1])
        if best is not None:
            found = best
        elif explored > budget:
            reached = len(layers[0]) + len(layers[1]) - 2
            raise BudgetExceeded(f"detour search exceeded {budget} vertices", reached, explored)
    L = found
    dist_p, dist_q = dist
    layers_p = layers[0]
    s = min(len(layers_p) - 1, L)
    good = [set() for _ in range(s + 1)]
    good[s] = {x for x in layers_p[s] if dist_q.get(x) == L - s}
    for k in range(s - 1, -1, -1):
        nxt = good[k + 1]
        good[k] = {x for x in layers_p[k] if any(mul_letter(x, d, i, sg) in nxt for i, sg in letters)}
    out = []
    cur = start
    for k in range(s):
        for i, sg in letters:
            h = mul_letter(cur, d, i, sg)
            if h in good[k + 1]:
                out.append((i, sg))
                cur = h
                break
    for j in range(s, L):
        for i, sg in letters:
            h = mul_letter(cur, d, i, sg)
            if dist_q.get(h) == L - j - 1:
                out.append((i, sg))
                cur = h
                break
    assert cur == goal and len(out) == L
    return L, tuple(out), len(dist_p) + len(dist_q)


def detour_distance(O: Element, r: int, P: Element, Q: Element, R_cap: int | None = None,
                    budget: int = DEFAULT_BUDGET, adaptive: bool = False) -> DetourResult:
    """Shortest path from P to Q through vertices at distance >= r from O."""
    d = O.d
    if r < 0:
        raise ValueError("r must be >= 0")
    inv = invert(O)
    p0 = multiply(inv, P).form
    q0 = multiply(inv, Q).form
    forbidden = origin_ball(d, r - 1).table if r >= 1 else {}
    if p0 in forbidden or q0 in forbidden:
        raise ValueError("endpoint inside the open ball B(O, r)")
    far = max(_norm_bound(p0, d, r), _norm_bound(q0, d, r))

    def finish(L, letters, cap, certified, explored, mode, lower=None):
        path = None if L is None else PathRec(P, letters)
        if certified:
            lower = L
        return DetourResult(r, P, Q, L, path, cap, certified, explored, mode, lower)

    if R_cap is None and not adaptive:
        try:
            L, letters, explored = _bidirectional(d, p0, q0, forbidden.__contains__, budget)
        except BudgetExceeded as exc:
            # both searches finished their layers without meeting
            return finish(None, None, None, False, exc.count, "uncapped", exc.reached_radius + 1)
        if L is None:
            return finish(None, None, None, False, explored, "uncapped")
        return finish(L, letters, far + L, True, explored, "uncapped")

    cap = R_cap if R_cap is not None else far + 2
    best = None
    while True:
        try:
            region = ball(identity_element(d), cap, budget=budget)
        except BudgetExceeded as exc:
            if best is not None:
                return best
            return finish(None, None, cap, False, exc.count, "capped")
        if p0 not in region.table or q0 not in region.table:
            if not adaptive:
                raise ValueError("endpoint outside B(O, R_cap)")
        else:
            table = region.table
            L, letters, explored = _bidirectional(
                d, p0, q0, lambda h: h in forbidden or h not in table, budget)
            if L is not None:
                certified = far + L <= cap
                best = finish(L, letters, cap, certified, explored, "capped")
                if certified or not adaptive:
                    return best
            elif not adaptive:
                return finish(None, None, cap, False, explored, "capped")
        cap = max(2 * cap, far + (best.length if best is not None else 0))


def corner_endpoints(d: int, r: int, O: Element | None = None) -> tuple[Element, Element]:
    """P = O a_d^r and Q = O a_0^r."""
    if O is None:
        O = identity_element(d)
    P = Element(d, multiply(O, Element(d, power(d, d, r))).form)
    Q = Element(d, multiply(O, Element(d, power(d, 0, r))).form)
    return P, Q


def corner_divergence(d: int, r: int, budget: int = DEFAULT_BUDGET) -> DetourResult:
    if r < 1:
        raise ValueError("r must be >= 1")
    O = identity_element(d)
    P, Q = corner_endpoints(d, r)
    return detour_distance(O, r, P, Q, budget=budget)


def verify_detour(res: DetourResult, O: Element) -> bool:
    """Endpoints and avoidance of the open ball, vertex by vertex."""
    if res.path is None:
        return False
    p = res.path
    if p.start != res.P or p.end != res.Q or len(p) != res.length:
        return False
    d = O.d
    inv = invert(O)
    B = origin_ball(d, res.r)
    for v in p.vertices():
        dist = B.distance(multiply(inv, v).form)
        if dist is not None and dist < res.r:
            return False
    return True


# bound polynomials

def _frac(r) -> Fraction:
    return r if isinstance(r, Fraction) else Fraction(r)


@lru_cache(maxsize=None)
def _p(d: int, r: Fraction) -> Fraction:
    if d == 1:
        return r - 1
    n = math.floor(r)
    return sum((_p(d - 1, r - j) for j in range(1, n)), Fraction(0))


def eval_p(d: int, r) -> Fraction:
    """Lower-bound polynomial: p_1(r) = r - 1, p_d(r) = sum_{j=1}^{floor(r)-1} p_{d-1}(r - j)."""
    if d < 1:
        raise ValueError("d must be >= 1")
    return _p(d, _frac(r))


def eval_q(d: int, r) -> float:
    """Upper bound with the piecewise-Euclidean base case (2 + pi) r."""
    r = float(r)
    q = (2 + math.pi) * r
    for _ in range(d - 1):
        q = (2 * r + 3) * q + (2 * r + 2) * (2 * r + 1)
    return q


def eval_q_comb(d: int, r) -> Fraction:
    """Upper bound in the word metric: base case 6r, same recurrence."""
    if d < 1:
        raise ValueError("d must be >= 1")
    r = _frac(r)
    q = 6 * r
    for _ in range(d - 1):
        q = (2 * r + 3) * q + (2 * r + 2) * (2 * r + 1)
    return q


def _num(x):
    """Integers print as integers, other rationals as reduced fractions."""
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


# growth tables

@dataclass
class GrowthRow:
    d: int
    r: int
    pair: str
    length: int | None
    certified: bool
    p_d: Fraction
    q_d_comb: Fraction
    R_cap: int | None

    def csv_fields(self) -> list:
        return [self.d, self.r, self.pair, "" if self.length is None else self.length,
                "true" if self.certified else "false", _num(self.p_d), _num(self.q_d_comb),
                "" if self.R_cap is None else self.R_cap]


CSV_COLUMNS = ["d", "r", "pair", "length", "certified", "p_d", "q_d_comb", "R_cap"]


@dataclass
class GrowthTable:
    d: int
    pairs: str
    rows: list = field(default_factory=list)
    policy: str = "sampled lower estimate"

    def add(self, row: GrowthRow):
        self.rows.append(row)
        self.rows.sort(key=lambda x: x.r)

    def certified_rows(self) -> list:
        return [x for x in self.rows if x.certified and x.length is not None]

    def values(self) -> dict:
        return {x.r: x.length for x in self.certified_rows()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in self.rows:
            w.writerow(row.csv_fields())
        return buf.getvalue()


def _row(d, r, pair, res: DetourResult) -> GrowthRow:
    return GrowthRow(d, r, pair, res.length, res.certified, eval_p(d, r), eval_q_comb(d, r), res.R_cap)


def sphere_pairs(O: Element, r: int, policy: str, sample_count: int = 0, seed: int = 0) -> list:
    """Endpoint pairs on S(O, r) labelled for the CSV.

    ``corner``: the basic corner only. ``antipodal``: (a_i^r, a_i^-r) for each i.
    ``sample``: corner, antipodal, and ``sample_count`` random sphere pairs.
    ``exhaustive``: every unordered pair of sphere vertices.
    """
    d = O.d
    P, Q = corner_endpoints(d, r, O)
    corner = [("corner", P, Q)]
    antipodal = []
    for i in range(d + 1):
        a = multiply(O, Element(d, power(d, i, r)))
        b = multiply(O, Element(d, power(d, i, -r)))
        antipodal.append((f"antipodal{i}", a, b))
    if policy == "corner":
        return corner
    if policy == "antipodal":
        return antipodal
    B = ball(O, r)
    sphere = B.sphere(r)
    if policy == "exhaustive":
        return [(f"pair{a}-{b}", sphere[a], sphere[b]) for a, b in combinations(range(len(sphere)), 2)]
    if policy == "sample":
        rng = random.Random(seed)
        extra = []
        for k in range(sample_count):
            a, b = rng.sample(range(len(sphere)), 2)
            extra.append((f"sample{k}", sphere[a], sphere[b]))
        return corner + antipodal + extra
    raise ValueError(f"unknown pair policy {policy!r}")


def mu_sample(O: Element, r: int, sample_count: int = 0, budget: int = DEFAULT_BUDGET,
              policy: str = "sample", seed: int = 0):
    """Largest detour length over the chosen sphere pairs: a sampled lower estimate of mu(r).

    Returns (row, per-pair results). The row is certified only when every pair is.
    """
    d = O.d
    results = []
    for label, a, b in sphere_pairs(O, r, policy, sample_count, seed):
        results.append((label, detour_distance(O, r, a, b, budget=budget)))
    found = [(label, res) for label, res in results if res.found]
    if not found:
        row = GrowthRow(d, r, policy, None, False, eval_p(d, r), eval_q_comb(d, r), None)
        return row, results
    label, top = max(found, key=lambda t: t[1].length)
    row = GrowthRow(d, r, policy, top.length, all(res.certified for _, res in results),
                    eval_p(d, r), eval_q_comb(d, r), max(res.R_cap for _, res in found))
    return row, results


# readouts

def estimate_degree(t: GrowthTable) -> float:
    """Least-squares slope of log(value) against log(r) on certified positive rows."""
    pts = [(x.r, x.length) for x in t.certified_rows() if x.length > 0 and x.r > 0]
    if len(pts) < 4:
        raise ValueError("need at least 4 certified rows with positive values")
    rs = np.log([p[0] for p in pts])
    vs = np.log([p[1] for p in pts])
    slope, _ = np.polyfit(rs, vs, 1)
    return float(slope)


def _as_lookup(t) -> dict:
    if isinstance(t, GrowthTable):
        return t.values()
    return dict(t)


def dominates(f, g, box: Iterable[int] = range(0, 5)):
    """Search small integers with f(x) <= A g(Bx + C) + Dx + E on the table range.

    Returns (A, B, C, D, E) or None (inconclusive on finite data). A and B are
    at least 1. ``f`` and ``g`` are growth tables or {r: value} mappings.
    """
    fv = _as_lookup(f)
    gv = _as_lookup(g)
    box = list(box)
    positive = [b for b in box if b >= 1]
    xs = sorted(fv)
    if not xs:
        return None
    for A in positive:
        for B in positive:
            for C in box:
                if any(B * x + C not in gv for x in xs):
                    continue
                for D in box:
                    for E in box:
                        if all(fv[x] <= A * gv[B * x + C] + D * x + E for x in xs):
                            return (A, B, C, D, E)
    return None
