#!/usr/bin/env python3
"""
Test script for cluster coordinates, reconstruction, mutation and find_good
"""

import math
from collections import deque

import numpy as np

from cluster import (
    EdgeClass,
    coordinates,
    edge_report,
    equivariance_defect,
    find_good,
    flip_consistency,
    is_regular,
    max_deviation,
    mutate,
    pentagon_orbit,
    quadrilateral,
    reconstruct,
    signed_coordinates,
    tagged_coordinates,
)
from errors import DegenerateInput, MutationPole, NonRegularInput, TriangulationMismatch
from framed import (
    DevelopedFramedLocalSystem,
    VerdictKind,
    degeneracy,
    flip_system,
    identity_system,
    reframe,
    relabel,
    sign_flip,
    validate,
)
from projective_geometry import INFINITY, ProjectiveMap, ProjectivePoint, cross_ratio
from surface import (
    MarkedBorderedSurface,
    PointKind,
    canonicalize,
    catalog,
    default_triangulation,
    exchange_matrix,
    flip,
    flippable,
    mutate_matrix,
    random_flips,
    self_folded,
    trivial_signing,
)

HEXAGON = MarkedBorderedSurface(0, (6,))
SPHERE4 = MarkedBorderedSurface(0, (), 4)
TORUS = MarkedBorderedSurface(1, (), 1)


def _random_coordinates(T, rng):
    return {a: complex(*rng.uniform(0.4, 2.5, 2)) for a in T.arcs}


def _points(*values):
    return [ProjectivePoint.finite(z) for z in values]


def test_reconstruct_round_trip():
    """coordinates(reconstruct(T, X)) = X, self-folded triangles included"""
    rng = np.random.default_rng(21)
    surfaces = [HEXAGON, SPHERE4, TORUS, MarkedBorderedSurface(0, (2, 1)),
                MarkedBorderedSurface(0, (1,), 1), MarkedBorderedSurface(0, (2,), 1),
                MarkedBorderedSurface(0, (4,), 1)]
    for s in surfaces:
        T = random_flips(default_triangulation(s), 8, rng)
        X = _random_coordinates(T, rng)
        back = coordinates(reconstruct(T, X))
        assert max_deviation(X, back) <= 1e-8, s.signature
        print(f"✅ round trip on {s.signature}")


def _surfaces_with_arcs():
    return [s for s in catalog() if default_triangulation(s).arcs]


def _log_uniform(T, rng, low, high):
    modulus = np.exp(rng.uniform(math.log(low), math.log(high), len(T.arcs)))
    phase = rng.uniform(-math.pi, math.pi, len(T.arcs))
    return {a: complex(r * np.exp(1j * f)) for a, r, f in zip(T.arcs, modulus, phase)}


def test_round_trip_batches():
    """100 well-conditioned tuples at 1e-12, then 100 with moduli spread over [1e-3, 1e3] at 1e-9"""
    rng = np.random.default_rng(22)
    surfaces = _surfaces_with_arcs()
    for low, high, tol in ((0.5, 2.0, 1e-12), (1e-3, 1e3, 1e-9)):
        worst = 0.0
        for n in range(100):
            T = random_flips(default_triangulation(surfaces[n % len(surfaces)]), 10, rng)
            X = _log_uniform(T, rng, low, high)
            worst = max(worst, max_deviation(X, coordinates(reconstruct(T, X))))
        assert worst <= tol, (low, high, worst)
        print(f"✅ 100 round trips with moduli in [{low}, {high}], worst {worst:.1e}")


def test_reconstruct_rejects_irregular_values():
    T = default_triangulation(HEXAGON)
    for bad in ({0: 1.0, 1: 0.0, 2: 2.0}, {0: 1.0, 1: 2.0}):
        try:
            reconstruct(T, bad)
            raise AssertionError(f"{bad} accepted")
        except NonRegularInput:
            pass
    print("✅ reconstruct needs a finite nonzero value on every arc")


def test_pentagon_orbit_swaps():
    """Five alternating mutations on the pentagon return the tuple with its labels swapped"""
    eps = exchange_matrix(default_triangulation(MarkedBorderedSurface(0, (5,))))
    orbit = pentagon_orbit({0: 2.0 + 0j, 1: 1 / 3 + 0j}, eps, 0, 1)
    assert len(orbit) == 6
    assert abs(orbit[1][0] - 0.5) <= 1e-12 and abs(orbit[1][1] - 2 / 9) <= 1e-12
    assert abs(orbit[-1][0] - 1 / 3) <= 1e-12 and abs(orbit[-1][1] - 2.0) <= 1e-12

    rng = np.random.default_rng(2)
    X = {0: complex(*rng.normal(size=2)), 1: complex(*rng.normal(size=2))}
    end = pentagon_orbit(X, eps, 0, 1)[-1]
    assert abs(end[0] - X[1]) <= 1e-10 * abs(X[1]) and abs(end[1] - X[0]) <= 1e-10 * abs(X[0])
    print("✅ pentagon relation")


def test_mutation_is_an_involution():
    rng = np.random.default_rng(3)
    T = default_triangulation(SPHERE4)
    X = _random_coordinates(T, rng)
    eps = exchange_matrix(T)
    for k in T.arcs:
        back = mutate(mutate(X, eps, k), mutate_matrix(eps, k), k)
        assert max_deviation(X, back) <= 1e-12
    print("✅ mutating twice at the same arc is the identity")


def test_mutation_poles():
    eps = exchange_matrix(default_triangulation(MarkedBorderedSurface(0, (5,))))
    try:
        mutate({0: -1.0 + 0j, 1: 2.0 + 0j}, eps, 0)
        raise AssertionError("mutation through 1 + X^-1 = 0 accepted")
    except MutationPole:
        pass
    try:
        mutate({0: 0j, 1: 2.0 + 0j}, eps, 0)
        raise AssertionError("mutation at a zero coordinate accepted")
    except NonRegularInput:
        pass
    print("✅ mutation poles are reported")


def test_flips_agree_with_mutation():
    """Coordinates after a flip are the mutated coordinates"""
    rng = np.random.default_rng(4)
    cases = [(HEXAGON, None), (TORUS, None), (SPHERE4, [4, 5])]
    for s, arcs in cases:
        T = default_triangulation(s)
        F = reconstruct(T, _random_coordinates(T, rng))
        for k in arcs if arcs is not None else T.arcs:
            assert flip_consistency(F, T, k) <= 1e-8, (s.signature, k)
    print("✅ flip_system and mutation agree")


def test_flip_walks_match_mutation():
    """50 random flips per surface; positive coordinates, steps leaving |log X| <= 5 are skipped"""
    rng = np.random.default_rng(50)
    for s in _surfaces_with_arcs():
        if not flippable(default_triangulation(s)):
            continue
        T = default_triangulation(s)
        F = reconstruct(T, {a: complex(rng.uniform(0.5, 2.0)) for a in T.arcs})
        worst, taken = 0.0, 0
        for _ in range(50):
            X = coordinates(F)
            eps = exchange_matrix(F.base)
            for k in rng.permutation(flippable(F.base)):
                k = int(k)
                try:
                    predicted = mutate(X, eps, k)
                except MutationPole:
                    continue
                if max(abs(math.log(abs(v))) for v in predicted.values()) > 5:
                    continue
                F = flip_system(F, k)
                worst = max(worst, max_deviation(predicted, coordinates(F)))
                taken += 1
                break
        assert taken > 0, s.signature
        assert worst <= 1e-10, (s.signature, worst)
        assert validate(F, 1e-8) == [], (s.signature, validate(F, 1e-8))
        print(f"✅ {taken} flips on {s.signature}, worst drift {worst:.1e}")


SELF_FOLDING = [MarkedBorderedSurface(0, (2,), 1), MarkedBorderedSurface(0, (4,), 1), SPHERE4]


def _self_folded_triangulation(s):
    """Fewest flips from the default triangulation to one with a self-folded triangle inside an arc."""
    start = default_triangulation(s)
    queue = deque([(start, ())])
    seen = {start}
    while queue:
        T, path = queue.popleft()
        inside = [sf for sf in self_folded(T) if T.is_arc(sf.loop)]
        if inside:
            return T, path, inside[0]
        for a in flippable(T):
            U = flip(T, a)
            if U not in seen:
                seen.add(U)
                queue.append((U, path + (a,)))
    raise AssertionError(f"no self-folded triangle reachable on {s.signature}")


def test_tag_rule_at_a_valency_one_puncture():
    """Flipping the sign at the enclosed puncture sends (Y_j, Y_k) to (1/Y_j, Y_j Y_k)"""
    rng = np.random.default_rng(60)
    for s in SELF_FOLDING:
        T, _, sf = _self_folded_triangulation(s)
        j, k = sf.interior, sf.loop
        F = reconstruct(T, _random_coordinates(T, rng))
        G = sign_flip(F, sf.puncture)
        yj, yk = (cross_ratio(*quadrilateral(F, a)) for a in (j, k))
        zj, zk = (cross_ratio(*quadrilateral(G, a)) for a in (j, k))
        assert abs(zj - 1 / yj) <= 1e-10 * abs(zj), s.signature
        assert abs(zk - yj * yk) <= 1e-10 * abs(zk), s.signature

        # the interior and encircling values trade places, nothing else moves
        X, Z = coordinates(F), coordinates(G)
        assert abs(Z[j] - X[k]) <= 1e-10 * abs(X[k]) and abs(Z[k] - X[j]) <= 1e-10 * abs(X[j])
        assert all(abs(Z[a] - X[a]) <= 1e-10 * abs(X[a]) for a in T.arcs if a not in (j, k))

        tau, mapping = canonicalize(T, {sf.puncture: -1})
        assert mapping == {j: k, k: j} and tau.signing[sf.puncture] == 1
        other = signed_coordinates(relabel(F, mapping), tau.triangulation, tau.signing)
        assert max_deviation(signed_coordinates(F, T, {sf.puncture: -1}), other) <= 1e-10
        print(f"✅ tag rule and both representatives agree on {s.signature}")


def test_flips_into_and_out_of_self_folded_triangles():
    rng = np.random.default_rng(61)
    for s in SELF_FOLDING:
        target, path, sf = _self_folded_triangulation(s)
        T = default_triangulation(s)
        F = reconstruct(T, _random_coordinates(T, rng))
        for a in path:
            assert flip_consistency(F, F.base, a) <= 1e-10, (s.signature, a)
            F = flip_system(F, a)
        assert F.base == target and validate(F, 1e-9) == []
        assert sf.interior not in flippable(F.base)

        assert flip_consistency(F, F.base, sf.loop) <= 1e-10, s.signature
        G = flip_system(F, sf.loop)
        assert validate(G, 1e-9) == []
        assert sf.interior in flippable(G.base)
        assert flip_consistency(G, G.base, sf.interior) <= 1e-10, s.signature
        print(f"✅ flips through a self-folded triangle on {s.signature}")


def test_mutate_rejects_unknown_arcs():
    eps = exchange_matrix(default_triangulation(MarkedBorderedSurface(0, (5,))))
    X = {0: 2.0 + 0j, 1: 0.5 + 0j}
    for values, k, unknown in ((X, 7, [7]), ({**X, 9: 1.0 + 0j}, 0, [9])):
        try:
            mutate(values, eps, k)
            raise AssertionError(f"arc {unknown} accepted")
        except TriangulationMismatch as e:
            assert e.details["arcs"] == unknown
    print("✅ mutation refuses arcs outside the exchange matrix")


def test_equivariance():
    rng = np.random.default_rng(5)
    T = default_triangulation(SPHERE4)
    F = reconstruct(T, _random_coordinates(T, rng))
    g = ProjectiveMap(0.3 + 1j, -2.0, 1.5, 0.7j)
    assert equivariance_defect(F, g, {}) <= 1e-8
    assert equivariance_defect(F, g, {0: 3, 3: 0, 1: 5, 5: 1}) <= 1e-8
    print("✅ coordinates are invariant under conjugation and follow relabelings")


def test_coordinates_check_their_base():
    T = default_triangulation(HEXAGON)
    F = reconstruct(T, {0: 1.5 + 0j, 1: 2.0 + 0j, 2: 0.5j})
    try:
        coordinates(F, flip(T, 0))
        raise AssertionError("coordinates taken on a foreign triangulation")
    except TriangulationMismatch:
        pass
    print("✅ coordinates refuse a triangulation that is not the base")


def test_signed_coordinates():
    rng = np.random.default_rng(6)
    T = default_triangulation(SPHERE4)
    F = reconstruct(T, _random_coordinates(T, rng))
    assert max_deviation(signed_coordinates(F, T, trivial_signing(T)), coordinates(F)) == 0
    signing = {0: 1, 1: -1, 2: 1, 3: -1}
    expected = coordinates(sign_flip(sign_flip(F, 1), 3))
    assert max_deviation(signed_coordinates(F, T, signing), expected) <= 1e-12
    tau, _ = canonicalize(T, signing)
    assert max_deviation(tagged_coordinates(F, tau), expected) <= 1e-12
    print("✅ signed coordinates flip the framings at punctures signed -1")


def test_find_good_on_a_polygon():
    T = default_triangulation(HEXAGON)
    F = identity_system(T, _points(0.0, 1.0, 0.0, 2j, -1.0, 3.0))
    report = edge_report(F)
    assert report[0] is EdgeClass.BAD and report[1] is EdgeClass.GOOD
    assert not is_regular(coordinates(F))
    result = find_good(F)
    assert result.flips == (0,)
    assert result.toggled == ()
    assert is_regular(result.coordinates)
    assert max_deviation(coordinates(result.system), result.coordinates) <= 1e-12
    print("✅ find_good flips the one Bad diagonal of the hexagon")


def test_find_good_on_a_four_punctured_sphere():
    T = default_triangulation(SPHERE4)
    F = identity_system(T, _points(0.0, 1.0, 0.0, 2j))
    assert not is_regular(coordinates(F))
    result = find_good(F)
    assert len(result.flips) >= 1
    assert result.toggled == ()
    assert result.tagged.signing == {p: 1 for p in range(4)}
    assert is_regular(result.coordinates)
    report = edge_report(result.system)
    assert all(report[a] is EdgeClass.GOOD for a in result.system.base.arcs)
    print(f"✅ find_good on the four-punctured sphere after flips {result.flips}")


def _merged_system(s, rng):
    """A random system in which up to three boundary framings are copied across an arc."""
    T = random_flips(default_triangulation(s), 5, rng)
    F = reconstruct(T, _random_coordinates(T, rng))
    for _ in range(int(rng.integers(0, 4))):
        t, i = T.edges[int(rng.choice(T.arcs))].slots[0]
        c = (i + 1) % 3
        if T.points[T.corner(t, c)].kind is not PointKind.BOUNDARY or T.corner(t, c) == T.corner(t, i):
            continue
        G = reframe(F, t, c, F.point(t, i))
        if degeneracy(G).kind is VerdictKind.NONE:
            F = G
    return F


def test_find_good_on_merged_framings():
    rng = np.random.default_rng(62)
    surfaces = [s for s in catalog() if s.boundary and flippable(default_triangulation(s))]
    irregular = 0
    for n in range(200):
        F = _merged_system(surfaces[n % len(surfaces)], rng)
        irregular += not is_regular(coordinates(F))
        result = find_good(F)
        assert is_regular(result.coordinates), n
        assert result.toggled == () and all(v == 1 for v in result.tagged.signing.values()), n
        report = edge_report(result.system)
        assert all(report[a] is EdgeClass.GOOD for a in result.system.base.arcs), n
    assert irregular > 0
    print(f"✅ find_good settles 200 systems, {irregular} of them irregular on their start")


def _upper_triangular_sphere(seed):
    """Every framing at infinity and every holonomy fixing it, with distinct second fixed lines."""
    rng = np.random.default_rng(seed)
    T = default_triangulation(SPHERE4)
    gluings = {}
    for a in T.arcs:
        alpha = complex(*rng.uniform(0.5, 2.0, 2))
        gluings[a] = ProjectiveMap(alpha, complex(*rng.normal(size=2)), 0.0, 1 / alpha)
    return DevelopedFramedLocalSystem(T, tuple((INFINITY,) * 3 for _ in T.triangles), gluings)


def test_find_good_flips_a_sign_when_no_flip_helps():
    F = _upper_triangular_sphere(31)
    assert validate(F, 1e-9) == []
    assert degeneracy(F).kind is VerdictKind.NONE
    assert all(c is EdgeClass.BAD for a, c in edge_report(F).items())
    result = find_good(F)
    assert result.toggled == (0,)
    assert result.tagged.signing[0] == -1
    assert is_regular(result.coordinates)
    again = signed_coordinates(result.system, result.tagged.triangulation, result.tagged.signing)
    assert max_deviation(again, result.coordinates) <= 1e-8
    print(f"✅ find_good flips the sign at puncture 0, then flips {result.flips}")


def test_find_good_rejects_degenerate_systems():
    T = default_triangulation(HEXAGON)
    F = identity_system(T, _points(0.0, 1.0, 1.0, 2j, -1.0, 3.0))
    try:
        find_good(F)
        raise AssertionError("degenerate system accepted")
    except DegenerateInput as e:
        assert e.details["verdict"] == "D1"
    print("✅ find_good refuses degenerate systems")


def main():
    """Run all tests"""
    print("🚀 Cluster coordinate tests\n")
    tests = [
        test_reconstruct_round_trip,
        test_round_trip_batches,
        test_reconstruct_rejects_irregular_values,
        test_pentagon_orbit_swaps,
        test_mutation_is_an_involution,
        test_mutation_poles,
        test_flips_agree_with_mutation,
        test_flip_walks_match_mutation,
        test_tag_rule_at_a_valency_one_puncture,
        test_flips_into_and_out_of_self_folded_triangles,
        test_mutate_rejects_unknown_arcs,
        test_equivariance,
        test_coordinates_check_their_base,
        test_signed_coordinates,
        test_find_good_on_a_polygon,
        test_find_good_on_a_four_punctured_sphere,
        test_find_good_on_merged_framings,
        test_find_good_flips_a_sign_when_no_flip_helps,
        test_find_good_rejects_degenerate_systems,
    ]
    failed = 0
    for test in tests:
        try:
            test()
        except AssertionError as e:
            failed += 1
            print(f"❌ {test.__name__}: {e}")

    print("\n" + "=" * 50)
    print(f"📊 {len(tests) - failed} passed, {failed} failed")
    print("=" * 50)
    return failed


if __name__ == "__main__":
    raise SystemExit(main())
