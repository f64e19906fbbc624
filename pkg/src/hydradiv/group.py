"""Exact algebra for the hydra groups

    G_d = < a_0, ..., a_d | a_0 a_1 = a_1 a_0,  a_i^-1 a_0 a_i = a_{i-1}  (2 <= i <= d) >.

G_1 is Z^2 and G_k is the HNN extension of G_{k-1} with stable letter a_k
conjugating <a_0> onto <a_{k-1}>.

Elements are stored as nested tuples in HNN normal form:

* level 1: ``(m, n)`` meaning a_0^m a_1^n;
* level k >= 2: ``(h_0, e_1, h_1, ..., e_p, h_p)`` with every ``h_j`` a
  level-(k-1) element and ``e_j`` in {+1, -1} the exponent of a_k.

Every factor except the last one is a fixed right-coset representative, so
structural equality of tuples is equality in the group.  For ``h`` followed
by ``a_k`` the representative of ``h<a_0>`` is used (the base pair gets
``m = 0``); for ``h`` followed by ``a_k^-1`` the representative of
``h<a_{k-1}>`` is the unique coset element with the fewest level-(k-1)
stable letters (for k-1 = 1 it is the pair with ``n = 0``).
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

Letter = tuple[int, int]  # (generator index, +1/-1)
Word = tuple[Letter, ...]

ENCODING_VERSION = 1


class InvalidWordError(ValueError):
    pass


class LevelMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class GroupPresentation:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"height must be >= 1, got {self.d}")

    @property
    def generators(self) -> list[str]:
        return [f"a{i}" for i in range(self.d + 1)]

    @property
    def relators(self) -> list[Word]:
        rels: list[Word] = [((0, 1), (1, 1), (0, -1), (1, -1))]
        for i in range(2, self.d + 1):
            rels.append(((i, -1), (0, 1), (i, 1), (i - 1, -1)))
        return rels

    def letters(self) -> list[Letter]:
        """All 2(d+1) letters in the fixed neighbor order a0, a0^-1, a1, ..."""
        return [(i, s) for i in range(self.d + 1) for s in (1, -1)]

    def check_word(self, w: Iterable[Letter]) -> Word:
        w = tuple(w)
        for i, s in w:
            if not (0 <= i <= self.d) or s not in (1, -1):
                raise InvalidWordError(f"letter {(i, s)} invalid for G_{self.d}")
        return w


# ---------------------------------------------------------------------------
# normal form arithmetic on raw nested tuples

@lru_cache(maxsize=None)
def identity(level: int):
    if level == 1:
        return (0, 0)
    return (identity(level - 1),)


def _strip(h, k: int, i: int):
    """Split ``h = rep * a_i^c`` with ``rep`` the fixed representative of h<a_i>.

    Only ``i == 0`` or ``i == k`` (the top generator of level k) occur.
    """
    if k == 1:
        m, n = h
        if i == 0:
            return (0, n), m
        return (m, 0), n
    if i == 0:
        rep, c = _strip(h[-1], k - 1, 0)
        return h[:-1] + (rep,), c
    # i == k: walk along the a_k-coset in the direction that cancels stable letters
    c = 0
    if _pinches(h, k, 1):
        while _pinches(h, k, 1):
            h = mul_letter(h, k, k, 1)
            c -= 1
    else:
        while _pinches(h, k, -1):
            h = mul_letter(h, k, k, -1)
            c += 1
    return h, c


def _pinches(h, k: int, s: int) -> bool:
    """Would right-multiplying the level-k element h by a_k^s cancel a stable letter?"""
    if len(h) == 1 or h[-2] != -s:
        return False
    target = 0 if s == 1 else k - 1
    return _strip(h[-1], k - 1, target)[0] == identity(k - 1)


def mul_letter(g, k: int, i: int, s: int):
    """Right-multiply the level-k element g by a_i^s (i <= k)."""
    if k == 1:
        m, n = g
        return (m + s, n) if i == 0 else (m, n + s)
    if i < k:
        return g[:-1] + (mul_letter(g[-1], k - 1, i, s),)
    low = k - 1
    if s == 1:
        rep, c = _strip(g[-1], low, 0)
        if len(g) > 1 and g[-2] == -1 and rep == identity(low):
            # a_k^-1 a_0^c a_k = a_{k-1}^c
            return g[:-3] + (mul_power(g[-3], low, low, c),)
        return g[:-1] + (rep, 1, power(low, low, c))
    rep, c = _strip(g[-1], low, low)
    if len(g) > 1 and g[-2] == 1 and rep == identity(low):
        # a_k a_{k-1}^c a_k^-1 = a_0^c
        return g[:-3] + (mul_power(g[-3], low, 0, c),)
    return g[:-1] + (rep, -1, power(low, 0, c))


def mul_power(g, k: int, i: int, c: int):
    if c == 0:
        return g
    if k == 1:
        m, n = g
        return (m + c, n) if i == 0 else (m, n + c)
    if i < k:
        return g[:-1] + (mul_power(g[-1], k - 1, i, c),)
    s = 1 if c > 0 else -1
    for _ in range(abs(c)):
        g = mul_letter(g, k, k, s)
    return g


@lru_cache(maxsize=4096)
def power(k: int, i: int, c: int):
    """Normal form of a_i^c at level k."""
    return mul_power(identity(k), k, i, c)


def mul_word(g, k: int, w: Iterable[Letter]):
    for i, s in w:
        g = mul_letter(g, k, i, s)
    return g


def spell(g, k: int) -> Word:
    """A word representing the level-k element g (the normal form read left to right)."""
    out: list[Letter] = []
    _spell(g, k, out)
    return tuple(out)


def _spell(g, k, out):
    if k == 1:
        m, n = g
        out.extend([(0, 1 if m > 0 else -1)] * abs(m))
        out.extend([(1, 1 if n > 0 else -1)] * abs(n))
        return
    _spell(g[0], k - 1, out)
    for j in range(1, len(g), 2):
        out.append((k, g[j]))
        _spell(g[j + 1], k - 1, out)


def invert_word(w: Sequence[Letter]) -> Word:
    return tuple((i, -s) for i, s in reversed(w))


def top_level(g, k: int) -> int:
    """Smallest level containing g (levels 0 and 1 both report 1)."""
    while k > 1 and len(g) == 1:
        g = g[0]
        k -= 1
    return k


def descend(g, k: int, target: int):
    """View a level-k element lying in G_target as a level-target element."""
    while k > target:
        if len(g) != 1:
            raise LevelMismatchError(f"element does not lie in G_{target}")
        g = g[0]
        k -= 1
    return g


def lift(g, k: int, target: int):
    while k < target:
        g = (g,)
        k += 1
    return g


def coset_key(g, k: int, level: int):
    """Key identifying the left coset g G_level (level < k)."""
    if k == level:
        return ()
    if k - 1 == level:
        return g[:-1]
    return g[:-1] + (coset_key(g[-1], k - 1, level),)


def right_cyclic_coset(g, k: int, i: int):
    """Split ``g = rep * a_i^c`` with rep a fixed representative of g<a_i>, any i <= k."""
    if k == 1:
        m, n = g
        return ((0, n), m) if i == 0 else ((m, 0), n)
    if i == k:
        return _strip(g, k, k)
    rep, c = right_cyclic_coset(g[-1], k - 1, i)
    return g[:-1] + (rep,), c


def cyclic_exponent(g, k: int, i: int):
    """Return n with g = a_i^n, or None."""
    if k == 1:
        m, n = g
        if i == 0:
            return m if n == 0 else None
        if i == 1:
            return n if m == 0 else None
        return None
    if i > k:
        return None
    if i == k:
        n = 0
        sign = 0
        for j in range(0, len(g), 2):
            if g[j] != identity(k - 1):
                return None
        for j in range(1, len(g), 2):
            if sign and g[j] != sign:
                return None
            sign = g[j]
            n += g[j]
        return n
    if len(g) != 1:
        return None
    return cyclic_exponent(g[0], k - 1, i)


# ---------------------------------------------------------------------------
# byte encoding

def _zigzag(n: int) -> int:
    return 2 * n if n >= 0 else -2 * n - 1


def _unzigzag(z: int) -> int:
    return z // 2 if z % 2 == 0 else -(z + 1) // 2


def _varint(n: int, out: bytearray):
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            out.append(b | 0x80)
        else:
            out.append(b)
            return


def _read_varint(buf, pos):
    shift = 0
    n = 0
    while True:
        b = buf[pos]
        pos += 1
        n |= (b & 0x7F) << shift
        if not b & 0x80:
            return n, pos
        shift += 7


def _encode(g, k, out):
    if k == 1:
        _varint(_zigzag(g[0]), out)
        _varint(_zigzag(g[1]), out)
        return
    p = len(g) // 2
    _varint(p, out)
    _encode(g[0], k - 1, out)
    for j in range(1, len(g), 2):
        out.append(0 if g[j] == 1 else 1)
        _encode(g[j + 1], k - 1, out)


def _decode(buf, pos, k):
    if k == 1:
        z1, pos = _read_varint(buf, pos)
        z2, pos = _read_varint(buf, pos)
        return (_unzigzag(z1), _unzigzag(z2)), pos
    p, pos = _read_varint(buf, pos)
    h, pos = _decode(buf, pos, k - 1)
    parts = [h]
    for _ in range(p):
        e = 1 if buf[pos] == 0 else -1
        pos += 1
        h, pos = _decode(buf, pos, k - 1)
        parts.append(e)
        parts.append(h)
    return tuple(parts), pos


def encode_raw(g, k: int) -> bytes:
    """Prefix-free body encoding (no header); used as interning/sort key."""
    out = bytearray()
    _encode(g, k, out)
    return bytes(out)


def decode_raw(buf: bytes, k: int, pos: int = 0):
    return _decode(buf, pos, k)


# ---------------------------------------------------------------------------
# public element type

class Element:
    """A canonical element of G_d.  Immutable, hashable, compared structurally."""

    __slots__ = ("d", "form", "_hash")

    def __init__(self, d: int, form):
        self.d = d
        self.form = form
        self._hash = hash((d, form))

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.d == other.d and self.form == other.form

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Element(d={self.d}, {format_word(spell(self.form, self.d)) or '1'})"

    def __mul__(self, other: "Element") -> "Element":
        return multiply(self, other)

    def word(self) -> Word:
        return spell(self.form, self.d)

    def encode(self) -> bytes:
        return encode(self)

    def times(self, w: Iterable[Letter]) -> "Element":
        return Element(self.d, mul_word(self.form, self.d, w))


def identity_element(d: int) -> Element:
    return Element(d, identity(d))


def canonicalize(w: Iterable[Letter], d: int) -> Element:
    w = GroupPresentation(d).check_word(w)
    return Element(d, mul_word(identity(d), d, w))


def multiply(g: Element, h: Element) -> Element:
    if g.d != h.d:
        raise LevelMismatchError(f"cannot multiply elements of G_{g.d} and G_{h.d}")
    return Element(g.d, mul_word(g.form, g.d, spell(h.form, h.d)))


def invert(g: Element) -> Element:
    return Element(g.d, mul_word(identity(g.d), g.d, invert_word(spell(g.form, g.d))))


def subgroup_level(g: Element) -> int:
    return top_level(g.form, g.d)


def in_cyclic(g: Element, i: int):
    """Exponent n with g = a_i^n, or None when g is not a power of a_i."""
    if not 0 <= i <= g.d:
        raise InvalidWordError(f"generator index {i} invalid for G_{g.d}")
    return cyclic_exponent(g.form, g.d, i)


def encode(g: Element) -> bytes:
    """Stable byte encoding: version byte, height, then the recursive body."""
    out = bytearray([ENCODING_VERSION])
    _varint(g.d, out)
    _encode(g.form, g.d, out)
    return bytes(out)


def decode(buf: bytes) -> Element:
    if not buf or buf[0] != ENCODING_VERSION:
        raise ValueError("unsupported element encoding version")
    d, pos = _read_varint(buf, 1)
    form, pos = _decode(buf, pos, d)
    if pos != len(buf):
        raise ValueError("trailing bytes after element encoding")
    return Element(d, form)


# ---------------------------------------------------------------------------
# independent word-problem oracle (works on words only, never on normal forms)

def _abelian_exponent(w: Sequence[Letter], k: int, i: int) -> int:
    """Exponent n such that w could equal a_i^n in G_k, read off the abelianization.

    For k >= 2 the abelianization of G_k is Z^2 = <a_0 = ... = a_{k-1}> x <a_k>;
    for k = 1 it is G_1 itself.
    """
    if k == 1:
        return sum(s for j, s in w if j == i)
    if i == k:
        return sum(s for j, s in w if j == k)
    return sum(s for j, s in w if j < k)


def _is_power(w: Sequence[Letter], k: int, i: int):
    n = _abelian_exponent(w, k, i)
    if britton_reduces_to_identity(tuple(w) + ((i, -1 if n > 0 else 1),) * abs(n), k):
        return n
    return None


def britton_reduces_to_identity(w: Sequence[Letter], k: int) -> bool:
    """Decide w == 1 in G_k by Britton reduction of the word."""
    w = list(w)
    if k == 1:
        return sum(s for i, s in w if i == 0) == 0 and sum(s for i, s in w if i == 1) == 0
    changed = True
    while changed:
        changed = False
        stable = [pos for pos, (i, _) in enumerate(w) if i == k]
        for a, b in zip(stable, stable[1:]):
            sa, sb = w[a][1], w[b][1]
            if sa == sb:
                continue
            inner = w[a + 1:b]
            if sa == -1:
                n = _is_power(inner, k - 1, 0)
                if n is None:
                    continue
                repl = [(k - 1, 1 if n > 0 else -1)] * abs(n)
            else:
                n = _is_power(inner, k - 1, k - 1)
                if n is None:
                    continue
                repl = [(0, 1 if n > 0 else -1)] * abs(n)
            w = w[:a] + repl + w[b + 1:]
            changed = True
            break
    if any(i == k for i, _ in w):
        return False
    return britton_reduces_to_identity(w, k - 1)


def britton_identity_test(w: Iterable[Letter], P: GroupPresentation) -> bool:
    return britton_reduces_to_identity(P.check_word(w), P.d)


# ---------------------------------------------------------------------------
# word parsing / formatting

_TOKEN = re.compile(r"([aA])_?(\d+)(?:\^\(?([+-]?\d+)\)?)?")


def parse_word(text: str, d: int | None = None) -> Word:
    """Parse ``"a2^-1 a0^3 a2"`` (``A2`` is shorthand for ``a2^-1``)."""
    text = text.strip()
    if text in ("", "1", "e"):
        return ()
    out: list[Letter] = []
    pos = 0
    for m in _TOKEN.finditer(text):
        gap = text[pos:m.start()]
        if gap.strip(" *.,"):
            raise InvalidWordError(f"cannot parse {gap!r} in {text!r}")
        pos = m.end()
        idx = int(m.group(2))
        exp = int(m.group(3)) if m.group(3) else 1
        if m.group(1) == "A":
            exp = -exp
        out.extend([(idx, 1 if exp > 0 else -1)] * abs(exp))
    if text[pos:].strip(" *.,"):
        raise InvalidWordError(f"cannot parse {text[pos:]!r} in {text!r}")
    if d is not None:
        GroupPresentation(d).check_word(out)
    return tuple(out)


def format_word(w: Sequence[Letter]) -> str:
    parts = []
    j = 0
    while j < len(w):
        i, s = w[j]
        run = 1
        while j + run < len(w) and w[j + run] == (i, s):
            run += 1
        e = run * s
        parts.append(f"a{i}" if e == 1 else f"a{i}^{e}")
        j += run
    return " ".join(parts)


def random_word(d: int, length: int, rng: random.Random) -> Word:
    letters = GroupPresentation(d).letters()
    return tuple(rng.choice(letters) for _ in range(length))
