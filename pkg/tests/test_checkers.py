import random

import pytest

from hydradiv.cayley import PathRec, ball
from hydradiv.checkers import (
    IncompleteRegion,
    classify,
    is_almost_detour,
    is_geodesic_path,
    is_legal_shortcut,
    is_positive_segment,
    is_raising_ray,
    is_segment,
    legal_level,
    minimal_almost_detour,
    raising_line_parts,
    shortcut_components,
)
from hydradiv.divergence import corner_divergence, detour_distance, eval_p, origin_ball
from hydradiv.group import Element, canonicalize, identity_element, in_cyclic, parse_word, power

from oracles import brute_almost_detour

# shortest almost detours over the d=2 corner; r <= 2 agree with the letter-by-letter oracle
ALMOST = {1: 2, 2: 5, 3: 11}


def w(text, d=4):
    return parse_word(text, d)


def path(start, text, d=2):
    return PathRec(canonicalize(parse_word(start, d), d), parse_word(text, d))


def test_positive_segment():
    e = identity_element(4)
    assert is_positive_segment(PathRec(e, w("a2 a3")))
    assert not is_positive_segment(PathRec(e, w("a2 a0^-1")))
    assert is_positive_segment(PathRec(e, ()))
    assert is_segment(w("A2 A2"), 2) and not is_segment(w("a2 A2"), 2) and not is_segment(w("a2 a3"), 2)


def test_raising_rays():
    e = identity_element(4)
    assert is_raising_ray(PathRec(e, w("a2 a2 a3 a4")), 2) == 2
    assert is_raising_ray(PathRec(e, w("a3 a2")), 2) is None
    assert is_raising_ray(PathRec(e, w("A2")), 2) == 1
    assert is_raising_ray(PathRec(e, w("a3 a3 a4")), 2) == 0
    assert is_raising_ray(PathRec(e, w("a3 A4")), 2) is None
    assert is_raising_ray(PathRec(e, ()), 2) is None


def test_raising_line_parts():
    assert raising_line_parts(w("A4 A3 a1 a1 a3 a4"), 1) == (2, 2)
    assert raising_line_parts(w("A3 A4"), 1) is None  # u_1 bar must be non-increasing
    assert raising_line_parts(w("A2 a2"), 1) == (1, 0)
    assert raising_line_parts(w("a1 A1"), 1) is None
    assert raising_line_parts((), 2) == (0, 0)


def test_a1_segment_through_origin_is_legal():
    O = identity_element(1)
    B = origin_ball(1, 4)
    p = PathRec(Element(1, (0, -2)), ((1, 1),) * 4)
    assert legal_level(p, O, 2, B) == 1


def test_a0_segment_is_not_a_raising_line():
    O = identity_element(1)
    B = origin_ball(1, 4)
    p = PathRec(Element(1, (-2, 0)), ((0, 1),) * 4)
    assert not is_legal_shortcut(p, O, 2, B)


def test_leaving_the_ball_is_not_a_shortcut():
    O = identity_element(2)
    B = origin_ball(2, 6)
    assert is_legal_shortcut(path("a2^-3", "a2^6"), O, 3, B)
    # interior vertices a2^-2 and a2^2 sit on the sphere of radius 2
    assert not is_legal_shortcut(path("a2^-3", "a2^6"), O, 2, B)
    # an end beyond the sphere
    assert not is_legal_shortcut(path("a2^-2", "a2^5"), O, 2, B)


def test_line_with_a2_edges_is_legal():
    O = identity_element(2)
    B = origin_ball(2, 6)
    p = path("a2", "A2 a1 a2")
    assert is_geodesic_path(p, B)
    assert legal_level(p, O, 3, B) == 1
    # the same shape whose a_1 segment misses the plane through O is not legal
    q = path("a2 a2", "A2 a1 a2")
    assert not is_legal_shortcut(q, O, 3, B)


def test_almost_detour_examples():
    O = identity_element(2)
    B = origin_ball(2, 8)
    res = corner_divergence(2, 2)
    assert is_almost_detour(res.path, O, 2, B) and shortcut_components(res.path, O, 2, B) == []
    # a legal a_2 segment through O spliced onto a genuine detour
    first = path("a2^2", "a2^-4")
    rest = detour_distance(O, 2, first.end, Element(2, power(2, 0, 2))).path
    spliced = first + rest
    assert shortcut_components(spliced, O, 2, B) == [(0, 4)]
    assert is_almost_detour(spliced, O, 2, B)
    wiggle = path("a2^2", "A2 A2 a1 A1 A2 A2")
    assert not is_almost_detour(wiggle + rest, O, 2, B)


def test_region_checks():
    O = identity_element(2)
    with pytest.raises(IncompleteRegion):
        legal_level(path("a2", "A2"), O, 3, origin_ball(2, 2))
    with pytest.raises(ValueError):
        is_almost_detour(path("a2", "A2"), O, 1, ball(canonicalize(w("a0", 2), 2), 3))
    with pytest.raises(IncompleteRegion):
        is_geodesic_path(path("", "a2^5"), origin_ball(2, 3))


def test_classification_flags_are_consistent():
    O = identity_element(2)
    r = 3
    B = origin_ball(2, 8)
    rng = random.Random(17)
    letters = [(i, s) for i in range(3) for s in (1, -1)]
    legal_seen = shortcut_seen = 0
    for _ in range(3000):
        start = B.element(rng.randrange(B.layer_starts[2], B.layer_starts[4]))
        p = PathRec(start, tuple(rng.choice(letters) for _ in range(rng.randint(1, 5))))
        c = classify(p, O, r, B)
        dists = [B.distance(f) for f in p.forms()]
        if c.legal_shortcut_level is not None:
            legal_seen += 1
            assert c.shortcut and c.geodesic and c.raising_line_level is not None
            assert c.raising_line_level <= c.legal_shortcut_level
        if c.shortcut:
            shortcut_seen += 1
            assert all(x < r for x in dists[1:-1]) and min(dists) < r
        if c.almost_detour and any(x < r for x in dists):
            assert c.shortcuts
        assert c.to_dict()["positive_segment"] == all(s == 1 for _, s in p.letters)
    assert legal_seen > 0 and shortcut_seen > legal_seen


@pytest.mark.parametrize("r", [1, 2, 3])
def test_minimal_almost_detour(r):
    n, letters = minimal_almost_detour(r, r * (r + 1))
    assert n == ALMOST[r] == len(letters)
    assert n >= eval_p(2, r)
    # the search enters at P = a_2^r; the result is an almost detour ending on the a_0 ray
    p = PathRec(Element(2, power(2, 2, r)), letters)
    assert in_cyclic(p.end, 0) >= 1
    assert is_almost_detour(p, identity_element(2), r, origin_ball(2, 2 * r + 2))


@pytest.mark.parametrize("r", [1, 2])
def test_minimal_almost_detour_matches_brute_force(r):
    region = origin_ball(2, 2 * r + 2)
    assert brute_almost_detour(r, ALMOST[r], region) == ALMOST[r]
    assert brute_almost_detour(r, ALMOST[r] - 1, region) is None


def test_minimal_almost_detour_bound_too_small():
    assert minimal_almost_detour(2, 4) == (None, None)
    with pytest.raises(IncompleteRegion):
        minimal_almost_detour(2, 6, region=origin_ball(2, 3))
