import random
from collections import Counter

import pytest

from hydradiv.builder import BuildError, CornerSpec, build_detour, plane_detour, strip_detour, verification_report
from hydradiv.cayley import EdgeRecord, PathRec, ball
from hydradiv.divergence import detour_distance, eval_q_comb, origin_ball
from hydradiv.group import Element, canonicalize, identity_element, in_cyclic, parse_word
from hydradiv.hyperplane import dual_hyperplane, global_key

from oracles import grid_detour

# exact corner detours frozen in test_divergence
D2_CORNER = {1: 2, 2: 6, 3: 12, 4: 20}


def canon(text, d=2):
    return canonicalize(parse_word(text, d), d)


def avoids(path, O, r):
    B = origin_ball(O.d, r)
    return all(B.distance(f) is None or B.distance(f) >= r for f in path.forms())


def first_strip(d=2, R=6):
    return dual_hyperplane(EdgeRecord(identity_element(d), 2, 1), origin_ball(d, R))


# strip crossings

def test_strip_from_rugged_side():
    O = identity_element(2)
    H = first_strip()
    Qs = canon("a2 a1^2")  # = a0^2 a2, on the rugged trace at distance 3
    assert origin_ball(2, 6).distance(Qs) == 3
    p = strip_detour(H, Qs, O, 3, origin_ball(2, 3))
    assert len(p) <= 7
    assert avoids(p, O, 3)
    end = p.end
    assert origin_ball(2, 6).distance(end) >= 3
    # the end lies on the smooth trace, the a_0 line through the identity
    assert in_cyclic(end, 0) is not None
    assert len(p) >= detour_distance(O, 3, Qs, end).length


def test_strip_already_on_target_side():
    O = identity_element(2)
    H = first_strip()
    Qs = canon("a0^4")
    assert strip_detour(H, Qs, O, 3, origin_ball(2, 3), target="smooth") == PathRec(Qs, ())


def test_strip_radius_one():
    O = identity_element(2)
    H = first_strip()
    for Qs in (canon("a2"), canon("a0")):
        p = strip_detour(H, Qs, O, 1, origin_ball(2, 1))
        assert len(p) <= 3 and avoids(p, O, 1)


@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_strip_length_bound(r):
    O = identity_element(2)
    H = first_strip(R=2 * r + 2)
    B = origin_ball(2, r)
    big = origin_ball(2, 2 * r + 2)
    for n in range(-2 * r, 2 * r + 1):
        for Qs in (canon(f"a0^{n}" if n else ""), canon(f"a2 a1^{n}" if n else "a2")):
            dist = big.distance(Qs)
            if dist < r or dist > r + 1:
                continue
            p = strip_detour(H, Qs, O, r, B)
            assert len(p) <= 2 * r + 1
            assert avoids(p, O, r)


def test_strip_rejects_bad_start():
    O = identity_element(2)
    H = first_strip()
    with pytest.raises(ValueError):
        strip_detour(H, canon("a1"), O, 1, origin_ball(2, 1))
    with pytest.raises(ValueError):
        strip_detour(H, identity_element(2), O, 1, origin_ball(2, 1))


# planes

@pytest.mark.parametrize("r", range(1, 9))
def test_plane_detour_g1(r):
    O = identity_element(1)
    B = origin_ball(1, r)
    P, Q = Element(1, (r, 0)), Element(1, (0, r))
    p = plane_detour(O, P, Q, O, r, B)
    assert len(p) == 2 * r == grid_detour((r, 0), (0, r), r)
    assert p.end == Q and avoids(p, O, r)
    a = plane_detour(O, P, Element(1, (-r, 0)), O, r, B)
    assert len(a) == 4 * r == grid_detour((r, 0), (-r, 0), r) <= 6 * r
    assert plane_detour(O, P, P, O, r, B) == PathRec(P, ())


def test_plane_detour_random_g1_pairs_within_6r():
    rng = random.Random(12)
    O = identity_element(1)
    for _ in range(40):
        r = rng.randint(1, 7)
        B = origin_ball(1, r)
        ring = B.sphere(r)
        P, Q = rng.choice(ring), rng.choice(ring)
        p = plane_detour(O, P, Q, O, r, B)
        assert p.start == P and p.end == Q and avoids(p, O, r) and len(p) <= 6 * r


def test_plane_detour_in_a_shifted_plane():
    O = identity_element(2)
    E = canon("a2")
    B = origin_ball(2, 3)
    P, Q = canon("a2 a1^3"), canon("a2 a0^3")
    p = plane_detour(E, P, Q, O, 3, B)
    assert p.end == Q and avoids(p, O, 3) and len(p) <= 18
    assert all(i <= 1 for i, _ in p.letters)
    with pytest.raises(ValueError):
        plane_detour(E, P, canon("a0^3"), O, 3, B)


# full construction

def test_build_g1_delegates_to_plane():
    for r in range(1, 8):
        O = identity_element(1)
        p = build_detour(CornerSpec(O, r), origin_ball(1, r))
        assert len(p) == 2 * r and avoids(p, O, r)


@pytest.mark.parametrize("d,r", [(2, r) for r in range(1, 11)] + [(3, r) for r in range(1, 7)])
def test_build_corner(d, r):
    O = identity_element(d)
    B = origin_ball(d, r)
    spec = CornerSpec(O, r)
    p = build_detour(spec, B)
    rep = verification_report(p, spec, B)
    assert rep["starts_at_P"] and rep["ends_at_Q"] and rep["avoids_ball"] and rep["within_bound"]
    assert rep["vertices_inside_ball"] == []
    assert len(p) <= eval_q_comb(d, r)
    if d == 2 and r in D2_CORNER:
        assert len(p) >= D2_CORNER[r]


def test_build_sampled_sphere_pairs():
    rng = random.Random(31)
    O = identity_element(2)
    for r in (2, 3):
        B = origin_ball(2, r)
        sphere = B.sphere(r)
        for _ in range(12):
            P, Q = rng.sample(sphere, 2)
            spec = CornerSpec(O, r, P, Q)
            p = build_detour(spec, B)
            rep = verification_report(p, spec, B)
            assert rep["avoids_ball"] and rep["ends_at_Q"] and rep["within_bound"]


def test_build_off_center():
    O = canon("a2 a0^-1")
    with pytest.raises(ValueError):
        build_detour(CornerSpec(O, 3), origin_ball(2, 3))
    B = ball(O, 3)
    spec = CornerSpec(O, 3)
    p = build_detour(spec, B)
    rep = verification_report(p, spec, B)
    assert rep["avoids_ball"] and rep["ends_at_Q"] and len(p) == len(build_detour(CornerSpec(identity_element(2), 3), origin_ball(2, 3)))


def test_build_rejects_endpoint_inside():
    O = identity_element(2)
    with pytest.raises(ValueError):
        build_detour(CornerSpec(O, 3, P=canon("a2")), origin_ball(2, 3))


def key_parity(start, letters):
    counts = Counter()
    for e in PathRec(start, letters).edges():
        if e.index >= 2:
            counts[global_key(e)[0]] += 1
    return counts


@pytest.mark.parametrize("r", range(1, 6))
def test_built_path_crosses_separating_hyperplanes(r):
    O = identity_element(2)
    spec = CornerSpec(O, r)
    p = build_detour(spec, origin_ball(2, r))
    built = key_parity(p.start, p.letters)
    # any path works as a reference for parity; take the corner itself read backwards
    ref = key_parity(spec.P, tuple([(2, -1)] * r + [(0, 1)] * r))
    odd_built = {k for k, c in built.items() if c % 2}
    odd_ref = {k for k, c in ref.items() if c % 2}
    assert odd_built == odd_ref
    assert len(odd_ref) == r
    for k in odd_ref:
        assert built[k] == 1


def test_strip_names_the_failed_step():
    O = identity_element(2)
    far = canon("a2^5")
    H = dual_hyperplane(EdgeRecord(far, 2, 1), origin_ball(2, 8))
    with pytest.raises(BuildError) as info:
        strip_detour(H, far, O, 3, origin_ball(2, 3))
    assert info.value.step == "strip"
