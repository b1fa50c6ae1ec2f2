#!/usr/bin/env python3
"""
Test script for potentials, transport, framings and planar realizations of y'' = phi y
"""

import cmath
import math

import numpy as np

from cluster import coordinates, find_good, is_regular, max_deviation
from errors import (
    ConfigError,
    DegenerateSurface,
    NoPoles,
    PathTooClose,
    RealizationRequired,
    ResonantOrApparent,
    SeedNotFound,
    TriangulationMismatch,
)
from framed import VerdictKind, degeneracy, holonomy_at, validate
from ode import (
    Anchor,
    IntegratorConfig,
    PlanarPath,
    RationalPotential,
    UserPlanar,
    analyze,
    build_framed,
    circle_loop,
    default_loop,
    find_pole,
    fit_slope,
    frame_regular,
    integrate,
    monodromy,
    period,
    polyline,
    pullback_power,
    subdominant,
    surface_of,
    wkb_sweep,
)
from projective_geometry import MapClass, ProjectiveMap, apply, classify, fixed_lines, projective_distance
from surface import MarkedBorderedSurface, default_triangulation, rank
from weber_oracle import (
    airy_log_derivative,
    airy_recessive,
    eigenvalue_pair,
    harmonic_cross_ratio,
    harmonic_period,
    weber_cross_ratio,
    weber_log_derivative,
    weber_recessive,
    weber_recessive_quadrature,
)

CFG = IntegratorConfig()
AIRY = RationalPotential((0, 1))
WEBER = RationalPotential((0, 0, 1))


def _double_pole(c):
    """c / z^2: regular poles at 0 and infinity with the same exponent."""
    return RationalPotential((c,), (0, 0, 1))


def _log_derivative(vector):
    # vectors are (y, -y')
    return -vector[1] / vector[0]


def _trace_invariant(m):
    return m.trace ** 2 / m.det


def test_pole_analysis():
    (inf,) = analyze(AIRY)
    assert inf.is_infinite and inf.order == 5
    assert np.allclose(inf.stokes_directions, [0, 2 * math.pi / 3, 4 * math.pi / 3])

    (inf,) = analyze(WEBER)
    assert inf.order == 6
    assert np.allclose(inf.stokes_directions, [0, math.pi / 2, math.pi, 3 * math.pi / 2])

    c = 2 + 1j
    zero, inf = analyze(_double_pole(c))
    assert zero.location == 0 and zero.order == 2 and abs(zero.a - c) <= 1e-12
    assert inf.is_infinite and inf.order == 2 and abs(inf.a - c) <= 1e-12
    assert abs(zero.exponent - 2j * math.pi * cmath.sqrt(1 + 4 * c)) <= 1e-12
    print("✅ pole orders, Stokes directions and exponents")


def test_surfaces_of_potentials():
    cases = [
        (AIRY, MarkedBorderedSurface(0, (3,)), 0),
        (WEBER, MarkedBorderedSurface(0, (4,)), 1),
        (RationalPotential((-1, 0, 0, 1)), MarkedBorderedSurface(0, (5,)), 2),
        (RationalPotential.from_roots([], [1, 1, 1j, 1j, -1, -1, -1j, -1j]), MarkedBorderedSurface(0, (), 4), 6),
    ]
    for phi, expected, n in cases:
        S = surface_of(phi)
        assert S == expected, (S.signature, expected.signature)
        assert rank(S) == n
    assert surface_of(RationalPotential((1,))).is_degenerate
    try:
        analyze(RationalPotential((0,)))
        raise AssertionError("zero potential analysed")
    except NoPoles:
        pass
    print("✅ surfaces of potentials")


def test_chart_at_infinity_and_pullback():
    w = 0.3 + 0.2j
    assert abs(AIRY.at_infinity().evaluate(w) - AIRY.evaluate(1 / w) / w ** 4) <= 1e-9
    c = 0.7 - 0.2j
    (zero, _) = analyze(pullback_power(_double_pole(c), 2))
    assert zero.location == 0 and abs(zero.a - 4 * c) <= 1e-12
    print("✅ chart change and pullback")


def test_config_is_validated():
    for bad in ({"rel_tol": 2.0}, {"wkb_decay_target": 5.0}, {"max_step": 0.0}):
        try:
            IntegratorConfig(**bad)
            raise AssertionError(f"{bad} accepted")
        except ConfigError:
            pass
    print("✅ integrator settings are checked")


def test_paths():
    loop = polyline([1.0, 1j, -1.0, 1.0])
    assert loop.is_closed and loop.reversed().start == loop.end
    path = PlanarPath.from_json(circle_loop(0.5, 0.25, 1.0).to_json())
    assert path.is_closed and abs(path.start - (0.5 + 0.25 * cmath.exp(1j))) <= 1e-12
    try:
        integrate(_double_pole(1.0), polyline([-1.0, 1.0]), np.eye(2))
        raise AssertionError("path through a pole accepted")
    except PathTooClose:
        pass
    print("✅ paths, closure and clearance")


def test_transport_keeps_the_wronskian():
    phi = _double_pole(2 + 1j)
    result = integrate(phi, default_loop(phi, analyze(phi)[0]), np.eye(2), CFG)
    assert result.wronskian_drift <= 1e-8
    print(f"✅ Wronskian drift {result.wronskian_drift:.1e}")


def test_eigenvalue_ratio_at_regular_poles():
    """At a double pole with z^2 phi -> a the loop eigenvalues are -exp(+-r/2)"""
    for c in (1.0, 2 + 1j, -0.3):
        phi = _double_pole(c)
        zero = analyze(phi)[0]
        M = monodromy(phi, default_loop(phi, zero), CFG)
        assert classify(M) is MapClass.SEMISIMPLE
        # M is only defined up to sign
        squares = [lam ** 2 for lam in eigenvalue_pair(c)]
        for line in fixed_lines(M):
            assert min(abs(line.eigenvalue ** 2 - s) for s in squares) <= 1e-7 * (1 + abs(line.eigenvalue) ** 2)

        lines = {}
        for sign in (1, -1):
            framing = frame_regular(phi, zero, sign, CFG)
            assert apply(M, framing.point).same_as(framing.point, 1e-7)
            lam = next(line.eigenvalue for line in fixed_lines(M) if line.point.same_as(framing.point, 1e-6))
            assert abs(lam ** 2 - cmath.exp(sign * zero.exponent)) <= 1e-6 * abs(cmath.exp(sign * zero.exponent))
            lines[sign] = framing.point
        assert not lines[1].same_as(lines[-1], 1e-6)
        print(f"✅ c = {c}: eigenvalue ratio exp(r) selects the + framing")


def test_apparent_pole_is_rejected():
    phi = _double_pole(-0.25)
    zero = analyze(phi)[0]
    assert classify(monodromy(phi, default_loop(phi, zero), CFG)) is MapClass.PARABOLIC
    try:
        frame_regular(phi, zero, 1, CFG)
        raise AssertionError("parabolic monodromy framed")
    except ResonantOrApparent:
        pass
    print("✅ resonant exponent at -1/(4 z^2) is reported")


def test_loops_crossing_the_chart_boundary():
    """The same class of loop, whether it stays near 0, circles infinity or crosses |z| = R"""
    c = 1.0
    phi = _double_pole(c)
    zero, inf = analyze(phi)
    r = zero.exponent
    expected = 4 * cmath.cosh(r / 2) ** 2
    square = polyline([1.5 + 1.5j, -1.5 + 1.5j, -1.5 - 1.5j, 1.5 - 1.5j, 1.5 + 1.5j])
    for loop in (default_loop(phi, zero), default_loop(phi, inf), square):
        M = monodromy(phi, loop, CFG)
        assert abs(_trace_invariant(M) - expected) <= 1e-7 * abs(expected)
    framing = frame_regular(phi, inf, 1, CFG)
    assert framing.point is not None
    print("✅ monodromy agrees across the switch to the chart at infinity")


def test_airy_subdominant_lines():
    (inf,) = analyze(AIRY)
    closed = airy_log_derivative()
    for k in range(3):
        omega = cmath.exp(-2j * math.pi * k / 3)
        v = subdominant(AIRY, inf, k, CFG).vector
        assert abs(_log_derivative(v) - omega * closed) <= 1e-7 * abs(closed), k
    b = 0.5 + 0.3j
    ai, aip = airy_recessive(b)
    v = subdominant(AIRY, inf, 0, CFG, base=b).vector
    assert abs(_log_derivative(v) - aip / ai) <= 1e-7 * abs(aip / ai)
    print("✅ subdominant lines of y'' = z y are the rotated Airy functions")


def test_weber_oracle():
    y, dy = weber_recessive(0.7)
    yq, dyq = weber_recessive_quadrature(0.7)
    assert abs(y - yq) <= 1e-8 * abs(y) and abs(dy - dyq) <= 1e-8 * abs(dy)
    y0, dy0 = weber_recessive_quadrature(0.0)
    assert abs(dy0 / y0 - weber_log_derivative()) <= 1e-8

    (inf,) = analyze(WEBER)
    v = subdominant(WEBER, inf, 0, CFG).vector
    assert abs(_log_derivative(v) - weber_log_derivative()) <= 1e-7
    _, _, F = build_framed(WEBER, cfg=CFG)
    X = coordinates(F)
    assert abs(X[0] - weber_cross_ratio()) <= 1e-6
    print("✅ y'' = z^2 y matches the parabolic cylinder closed forms")


def test_harmonic_oscillator_coordinate():
    hbar = 0.8
    _, _, F = build_framed(RationalPotential((-1, 0, 1)).scaled(hbar), cfg=CFG)
    X = coordinates(F)[0]
    exact = harmonic_cross_ratio(hbar)
    assert abs(abs(X) - 1) <= 1e-6
    assert min(abs(X - exact), abs(X - exact.conjugate())) <= 1e-6
    assert abs(period(RationalPotential((-1, 0, 1)), -1.0, 1.0) * 2 - harmonic_period()) <= 1e-7
    assert abs(harmonic_period() - 1j * math.pi) <= 1e-7
    print("✅ (z^2 - 1) / hbar^2 has the exact coordinate exp(i pi / hbar)")


def test_wkb_slope_is_the_period():
    rows = wkb_sweep(RationalPotential((-1, 0, 1)), [1.0, 0.5, 0.25], CFG)
    assert np.allclose([r.hbar for r in rows], [1.0, 0.5, 0.25])
    slope, _ = fit_slope(rows, 0)
    assert abs(abs(slope) - math.pi) <= 0.02 * math.pi
    assert abs(slope.real) <= 0.02 * math.pi
    print(f"✅ log X grows like {slope:.4f} / hbar")


def test_wkb_slope_at_small_hbar():
    hbars = [0.2, 0.1, 0.05]
    rows = wkb_sweep(RationalPotential((-1, 0, 1)), hbars, CFG)
    assert np.allclose(sorted(r.hbar for r in rows), sorted(hbars))
    for r in rows:
        exact = harmonic_cross_ratio(r.hbar)
        assert min(abs(r.values[0] - exact), abs(r.values[0] - exact.conjugate())) <= 1e-5, r.hbar
    slope, _ = fit_slope(rows, 0)
    assert abs(abs(slope) - math.pi) <= 0.02 * math.pi
    assert abs(slope.real) <= 0.02 * math.pi
    print(f"✅ slope {slope:.4f} from hbar in {hbars}")


def test_weber_coordinate_is_stable_under_tolerances():
    """Tightening rel_tol from 1e-8 to 1e-11 or doubling the seed decay moves X by less than 1e-6"""
    loose = coordinates(build_framed(WEBER, cfg=IntegratorConfig(rel_tol=1e-8))[2])[0]
    tight = coordinates(build_framed(WEBER, cfg=IntegratorConfig(rel_tol=1e-11, abs_tol=1e-14))[2])[0]
    assert abs(loose - tight) <= 1e-6, (loose, tight)
    assert abs(tight - weber_cross_ratio()) <= 1e-6

    deeper = IntegratorConfig(wkb_decay_target=2 * CFG.wkb_decay_target)
    X = coordinates(build_framed(WEBER, cfg=deeper)[2])[0]
    assert abs(X - tight) <= 1e-6, (X, tight)
    cubic = RationalPotential((-1, 0, 0, 1))
    base = coordinates(build_framed(cubic, cfg=CFG)[2])
    assert max_deviation(base, coordinates(build_framed(cubic, cfg=deeper)[2])) <= 1e-6
    print("✅ coordinates do not move with the integrator tolerance or the seed depth")


def test_weber_lines_rotate_with_z():
    """y(iz) solves y'' = z^2 y again, so diag(1, i) carries each subdominant line to a neighbour"""
    (inf,) = analyze(WEBER)
    lines = [subdominant(WEBER, inf, k, CFG).point for k in range(4)]
    rotate = ProjectiveMap(1.0, 0.0, 0.0, 1j)
    shift = next(s for s in (1, 3) if apply(rotate, lines[0]).same_as(lines[s], 1e-7))
    for k in range(4):
        assert apply(rotate, lines[k]).same_as(lines[(k + shift) % 4], 1e-7), k
    print(f"✅ z -> iz moves every subdominant line {shift} sectors")


def test_random_polynomials_have_good_triangulations():
    rng = np.random.default_rng(70)
    for n in range(50):
        degree = 2 + n % 5
        phi = RationalPotential(tuple(complex(*rng.normal(size=2)) for _ in range(degree)) + (1.0,))
        S, T, F = build_framed(phi, cfg=CFG)
        assert S == MarkedBorderedSurface(0, (degree + 2,)), (n, S.signature)
        verdict = degeneracy(F)
        assert verdict.kind is VerdictKind.NONE, (n, phi, verdict.kind)
        result = find_good(F)
        assert is_regular(result.coordinates), (n, phi)
    print("✅ 50 random polynomials of degree 2 to 6 are non-degenerate and reach regular coordinates")


def test_polynomial_realizations():
    S, T, F = build_framed(RationalPotential((-1, 0, 0, 1)), cfg=CFG)
    assert S == MarkedBorderedSurface(0, (5,)) and len(T.arcs) == 2
    assert is_regular(coordinates(F))
    assert degeneracy(F).kind is VerdictKind.NONE

    S, T, F = build_framed(AIRY, cfg=CFG)
    assert len(T.arcs) == 0 and coordinates(F) == {}
    try:
        build_framed(RationalPotential((1,)), cfg=CFG)
        raise AssertionError("two marked points accepted")
    except DegenerateSurface:
        pass
    try:
        build_framed(_double_pole(1.0), cfg=CFG)
        raise AssertionError("degenerate sphere accepted")
    except DegenerateSurface:
        pass
    print("✅ automatic realizations of polynomial potentials")


def _four_poles():
    """c / (z^4 - 1)^2 with the standard four-punctured sphere drawn in the plane."""
    phi = RationalPotential.from_roots([], [1, 1, 1j, 1j, -1, -1, -1j, -1j], scale=1.6 + 0.8j)
    T = default_triangulation(MarkedBorderedSurface(0, (), 4))
    anchors = {0: Anchor(1), 1: Anchor(1j), 2: Anchor(-1), 3: Anchor(-1j)}
    arcs = {
        0: (1, 1j),
        1: (1j, -1),
        2: (-1, -1j),
        3: (-1j, 1),
        4: (-1, 1),
        5: (1, 2, 2 - 2j, -2 - 2j, -2, -1),
    }
    return phi, UserPlanar(T, anchors, {a: tuple(complex(z) for z in pts) for a, pts in arcs.items()})


def test_planar_realization():
    phi, realization = _four_poles()
    assert UserPlanar.from_json(realization.to_json()).arcs == realization.arcs
    S, T, F = build_framed(phi, realization=realization, cfg=CFG)
    assert validate(F, 1e-8) == [], validate(F, 1e-8)
    records = analyze(phi)
    for p, anchor in realization.anchors.items():
        r = find_pole(records, anchor.pole).exponent
        t, c = next((t, c) for t in range(len(T.triangles)) for c in range(3) if T.corner(t, c) == p)
        H = holonomy_at(F, t, c)
        point = F.point(t, c)
        assert apply(H, point).same_as(point, 1e-6), p
        lam = min(fixed_lines(H), key=lambda line: projective_distance(line.point, point)).eigenvalue
        assert min(abs(lam ** 2 - cmath.exp(s * r)) / abs(cmath.exp(s * r)) for s in (1, -1)) <= 1e-5, p
    assert is_regular(coordinates(F))
    print("✅ planar realization frames every puncture by an eigenline of its holonomy")


def test_realization_errors():
    phi, realization = _four_poles()
    try:
        build_framed(phi, cfg=CFG)
        raise AssertionError("non-polynomial potential realized automatically")
    except RealizationRequired:
        pass
    partial = UserPlanar(realization.triangulation, {0: Anchor(1)}, realization.arcs)
    try:
        build_framed(phi, realization=partial, cfg=CFG)
        raise AssertionError("missing anchors accepted")
    except TriangulationMismatch:
        pass
    print("✅ realization errors are reported")


def test_seed_search_can_fail():
    (inf,) = analyze(AIRY)
    try:
        subdominant(AIRY, inf, 0, IntegratorConfig(seed_radius_max=1.5))
        raise AssertionError("seed found inside a tiny search radius")
    except SeedNotFound:
        pass
    print("✅ seed search reports when the decay target is out of reach")


def main():
    """Run all tests"""
    print("🚀 ODE and monodromy tests\n")
    tests = [
        test_pole_analysis,
        test_surfaces_of_potentials,
        test_chart_at_infinity_and_pullback,
        test_config_is_validated,
        test_paths,
        test_transport_keeps_the_wronskian,
        test_eigenvalue_ratio_at_regular_poles,
        test_apparent_pole_is_rejected,
        test_loops_crossing_the_chart_boundary,
        test_airy_subdominant_lines,
        test_weber_oracle,
        test_harmonic_oscillator_coordinate,
        test_wkb_slope_is_the_period,
        test_wkb_slope_at_small_hbar,
        test_weber_coordinate_is_stable_under_tolerances,
        test_weber_lines_rotate_with_z,
        test_random_polynomials_have_good_triangulations,
        test_polynomial_realizations,
        test_planar_realization,
        test_realization_errors,
        test_seed_search_can_fail,
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
