#!/usr/bin/env python3
"""
Command-line front door for the monodromy library.

Every command reads JSON (a path, or inline text starting with '{'), prints
JSON (or CSV for coordinate tables) on stdout or to --output, and logs on
stderr. Exit status 0 on success, 2 for invalid input, 3 when the numerics
fail.
"""

import argparse
import cmath
import csv
import io
import json
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from cluster import (
    coordinates,
    coordinates_from_json,
    coordinates_to_json,
    find_good,
    is_regular,
    max_deviation,
    mutate,
    pentagon_orbit,
    reconstruct,
    signed_coordinates,
)
from errors import MonodromyError, NumericalError, SerializationError
from framed import DevelopedFramedLocalSystem, degeneracy
from ode import (
    RationalPotential,
    UserPlanar,
    analyze,
    build_framed,
    default_loop,
    fit_slope,
    frame_regular,
    monodromy,
    period,
    subdominant,
    surface_of,
    wkb_sweep,
)
from projective_geometry import (
    Degenerate,
    ProjectivePoint,
    cross_ratio,
    fixed_lines,
    map_from_triples,
    projective_distance,
    solve_cross_ratio,
)
from settings_manager import SettingsManager
from surface import (
    IdealTriangulation,
    MarkedBorderedSurface,
    TaggedTriangulation,
    catalog,
    default_triangulation,
    exchange_matrix,
    flip,
    random_flips,
    rank,
    tagged_flip,
)
from weber_oracle import weber_log_derivative, weber_recessive_quadrature

logger = logging.getLogger(__name__)

COMMANDS = ("analyze", "surface", "triangulate", "flip", "tagged-flip", "exchange-matrix", "coords",
            "signed-coords", "reconstruct", "mutate", "degeneracy", "find-good", "monodromy",
            "wkb-sweep", "selftest")


# ---------------------------------------------------------------- output


def _encode(obj: Any, indent: int = 0) -> str:
    """JSON with every float at 17 significant digits."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else json.dumps(repr(x))
    if isinstance(obj, complex):
        return _encode({"re": obj.real, "im": obj.imag}, indent)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) for v in seq):
            return "[" + ", ".join(_encode(v) for v in seq) + "]"
        return "[\n" + ",\n".join(inner + _encode(v, indent + 1) for v in seq) + "\n" + pad + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _coordinates_csv(X: Dict[int, Any]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["arc_id", "re", "im"])
    for a, v in sorted(X.items()):
        if isinstance(v, Degenerate):
            writer.writerow([a, v.value, ""])
        else:
            writer.writerow([a, format(v.real, ".17g"), format(v.imag, ".17g")])
    return buf.getvalue()


# ---------------------------------------------------------------- input


def _load_input(arg: Optional[str]) -> Any:
    if arg is None:
        raise SerializationError("this command needs --input")
    try:
        if arg.lstrip().startswith(("{", "[")):
            return json.loads(arg)
        with open(arg, "r", encoding="utf-8") as f:
            return json.load(f)
    except (OSError, ValueError) as e:
        raise SerializationError(f"cannot read input: {e}")


def _section(data: Any, key: str) -> Any:
    return data[key] if isinstance(data, dict) and key in data else data


def _potential(data: Any) -> RationalPotential:
    return RationalPotential.from_json(_section(data, "potential"))


def _system(data: Any) -> DevelopedFramedLocalSystem:
    return DevelopedFramedLocalSystem.from_json(_section(data, "system"))


def _arc(args: argparse.Namespace, data: Any) -> int:
    if args.arc is not None:
        return args.arc
    try:
        return int(data["arc"])
    except (KeyError, TypeError, ValueError):
        raise SerializationError("no arc given (use --arc or an 'arc' field)")


def _signing(data: Any) -> Optional[Dict[int, int]]:
    raw = data.get("signing") if isinstance(data, dict) else None
    return None if raw is None else {int(p): int(s) for p, s in raw.items()}


# ---------------------------------------------------------------- commands


Result = Tuple[Dict[str, Any], Optional[Dict[int, Any]]]


def cmd_analyze(args, data, settings) -> Result:
    phi = _potential(data)
    records = analyze(phi)
    S = surface_of(phi, records)
    if args.svg:
        from stokes_plot import plot_stokes

        plot_stokes(phi, args.svg, records)
    return {"poles": [r.to_json() for r in records], "surface": S.to_json(),
            "degenerate": S.is_degenerate}, None


def cmd_surface(args, data, settings) -> Result:
    S = surface_of(_potential(data))
    return {"surface": S.to_json(), "rank": rank(S), "degenerate": S.is_degenerate}, None


def cmd_triangulate(args, data, settings) -> Result:
    S = MarkedBorderedSurface.from_json(_section(data, "surface"))
    return {"triangulation": default_triangulation(S).to_json(), "rank": rank(S)}, None


def cmd_flip(args, data, settings) -> Result:
    T = IdealTriangulation.from_json(_section(data, "triangulation"))
    return {"triangulation": flip(T, _arc(args, data)).to_json()}, None


def cmd_tagged_flip(args, data, settings) -> Result:
    tau = TaggedTriangulation.from_json(_section(data, "tagged"))
    return {"tagged": tagged_flip(tau, _arc(args, data)).to_json()}, None


def cmd_exchange_matrix(args, data, settings) -> Result:
    T = IdealTriangulation.from_json(_section(data, "triangulation"))
    eps = exchange_matrix(T)
    return {"exchange_matrix": [[int(x) for x in row] for row in eps]}, None


def cmd_coords(args, data, settings) -> Result:
    X = coordinates(_system(data), tol=settings.get_setting("tau_eq"))
    return {"coordinates": coordinates_to_json(X)}, X


def cmd_signed_coords(args, data, settings) -> Result:
    F = _system(data)
    X = signed_coordinates(F, F.base, _signing(data) or {}, settings.get_setting("tau_cls"))
    return {"coordinates": coordinates_to_json(X)}, X


def cmd_reconstruct(args, data, settings) -> Result:
    T = IdealTriangulation.from_json(data["triangulation"])
    F = reconstruct(T, coordinates_from_json(data["coordinates"]))
    return {"system": F.to_json()}, None


def cmd_mutate(args, data, settings) -> Result:
    T = IdealTriangulation.from_json(data["triangulation"])
    k = _arc(args, data)
    X = mutate(coordinates_from_json(data["coordinates"]), exchange_matrix(T), k, settings.get_setting("tau_eq"))
    return {"triangulation": flip(T, k).to_json(), "coordinates": coordinates_to_json(X), "arc": k}, X


def cmd_degeneracy(args, data, settings) -> Result:
    verdict = degeneracy(_system(data), settings.get_setting("tau_eq"), settings.get_setting("tau_cls"))
    if verdict.degenerate:
        logger.warning(settings.get_message("degenerate", kind=verdict.kind.value))
    else:
        logger.info(settings.get_message("nondegenerate"))
    return verdict.to_json(), None


def cmd_find_good(args, data, settings) -> Result:
    result = find_good(_system(data), budget_factor=int(settings.get_setting("find_good_budget_factor")),
                       tol=settings.get_setting("tau_eq"), cls_tol=settings.get_setting("tau_cls"))
    logger.info(settings.get_message("found_good", flips=len(result.flips)))
    return result.to_json(), result.coordinates


def cmd_monodromy(args, data, settings) -> Result:
    phi = _potential(data)
    realization = None
    if isinstance(data, dict) and data.get("realization") is not None:
        realization = UserPlanar.from_json(data["realization"])
    S, T, F = build_framed(phi, _signing(data), realization, settings.integrator_config())
    X = coordinates(F, tol=settings.get_setting("tau_eq"))
    verdict = degeneracy(F, settings.get_setting("tau_eq"), settings.get_setting("tau_cls"))
    return {"surface": S.to_json(), "triangulation": T.to_json(), "system": F.to_json(),
            "coordinates": coordinates_to_json(X), "degeneracy": verdict.to_json()}, X


def cmd_wkb_sweep(args, data, settings) -> Result:
    phi = _potential(data)
    hbars = args.hbar or (data.get("hbar") if isinstance(data, dict) else None)
    if not hbars:
        raise SerializationError("no hbar values given (use --hbar or an 'hbar' list)")
    rows = wkb_sweep(phi, [float(h) for h in hbars], settings.integrator_config(),
                     float(settings.get_setting("sweep_phase_step")))
    out: Dict[str, Any] = {"rows": [r.to_json() for r in rows]}
    if len(rows) >= 2:
        out["slopes"] = {str(a): fit_slope(rows, a)[0] for a in sorted(rows[0].logs)}
    return out, None


# ---------------------------------------------------------------- selftest


def _check_projective(settings) -> Dict[str, Any]:
    p = [ProjectivePoint.finite(z) for z in (0.3 + 1j, -2.0, 4j)]
    q = solve_cross_ratio(p[0], p[1], p[2], 1.5 - 0.5j)
    x = cross_ratio(p[0], p[1], p[2], q)
    assert abs(x - (1.5 - 0.5j)) <= 1e-12
    g = map_from_triples(p, [ProjectivePoint.finite(z) for z in (1.0, 2.0, 3.0)])
    assert g.det != 0
    return {"cross_ratio": x}


def _check_rank_law(settings) -> Dict[str, Any]:
    rng = np.random.default_rng(int(settings.get_setting("flip_walk_seed")))
    counts = {}
    for S in catalog():
        T = random_flips(default_triangulation(S), 200, rng)
        assert len(T.arcs) == rank(S), S.signature
        counts[S.signature] = len(T.arcs)
    return {"arc_counts": counts}


def _check_cluster(settings) -> Dict[str, Any]:
    rng = np.random.default_rng(1)
    T = default_triangulation(MarkedBorderedSurface(0, (6,)))
    X = {a: complex(*rng.uniform(0.5, 2.0, 2)) for a in T.arcs}
    back = coordinates(reconstruct(T, X))
    deviation = max_deviation(X, back)
    assert deviation <= 1e-9
    T5 = default_triangulation(MarkedBorderedSurface(0, (5,)))
    orbit = pentagon_orbit({0: 2.0 + 0j, 1: 1 / 3 + 0j}, exchange_matrix(T5), 0, 1)
    assert abs(orbit[-1][0] - 1 / 3) <= 1e-12 and abs(orbit[-1][1] - 2.0) <= 1e-12
    return {"round_trip_deviation": deviation}


def _check_find_good(settings) -> Dict[str, Any]:
    rng = np.random.default_rng(2)
    T = default_triangulation(MarkedBorderedSurface(0, (6,)))
    X = {a: complex(*rng.uniform(0.5, 2.0, 2)) for a in T.arcs}
    F = reconstruct(T, X)
    assert not degeneracy(F).degenerate
    result = find_good(F)
    assert is_regular(result.coordinates)
    return {"flips": len(result.flips)}


def _check_ode(settings) -> Dict[str, Any]:
    cfg = settings.integrator_config()
    c = 1.0
    phi = RationalPotential((c,), (0, 0, 1))
    pole = analyze(phi)[0]
    plus = frame_regular(phi, pole, 1, cfg).point
    minus = frame_regular(phi, pole, -1, cfg).point
    assert projective_distance(plus, minus) > 1e-6
    lam = fixed_lines(monodromy(phi, default_loop(phi, pole), cfg))[0].eigenvalue
    target = cmath.exp(pole.exponent)
    ratio = lam ** 2 if abs(lam ** 2 - target) <= abs(lam ** -2 - target) else lam ** -2
    assert abs(ratio - target) <= 1e-6 * abs(target)
    airy = RationalPotential((0, 1))
    inf = analyze(airy)[-1]
    lines = [subdominant(airy, inf, k, cfg).point for k in range(3)]
    assert min(projective_distance(a, b) for i, a in enumerate(lines) for b in lines[i + 1:]) > 1e-6
    return {"eigenvalue_ratio": ratio, "airy_lines": [ln.affine() for ln in lines]}


def _check_weber(settings) -> Dict[str, Any]:
    y, dy = weber_recessive_quadrature(0.0)
    closed = weber_log_derivative()
    assert abs(dy / y - closed) <= 1e-8
    phi = RationalPotential((0, 0, 1))
    v = subdominant(phi, analyze(phi)[-1], 0, settings.integrator_config()).vector
    measured = -v[1] / v[0]
    assert abs(measured - closed) <= 1e-6
    harmonic = period(RationalPotential((-1, 0, 1)), -1.0, 1.0)
    return {"log_derivative": measured, "period": 2 * harmonic}


SELFTESTS: List[Tuple[str, Callable[[SettingsManager], Dict[str, Any]]]] = [
    ("projective geometry", _check_projective),
    ("rank law", _check_rank_law),
    ("cluster identities", _check_cluster),
    ("good triangulation", _check_find_good),
    ("regular and subdominant framings", _check_ode),
    ("weber oracle", _check_weber),
]


def cmd_selftest(args, data, settings) -> Result:
    checks = []
    failed = 0
    for name, check in SELFTESTS:
        try:
            values = check(settings)
            checks.append({"name": name, "passed": True, "values": values})
            logger.info(settings.get_message("selftest_pass", name=name))
        except (AssertionError, MonodromyError) as e:
            failed += 1
            checks.append({"name": name, "passed": False, "error": str(e)})
            logger.error(settings.get_message("selftest_fail", name=name, error=e))
    logger.info(settings.get_message("selftest_summary", passed=len(checks) - failed, failed=failed))
    return {"checks": checks, "passed": len(checks) - failed, "failed": failed}, None


HANDLERS = {
    "analyze": cmd_analyze,
    "surface": cmd_surface,
    "triangulate": cmd_triangulate,
    "flip": cmd_flip,
    "tagged-flip": cmd_tagged_flip,
    "exchange-matrix": cmd_exchange_matrix,
    "coords": cmd_coords,
    "signed-coords": cmd_signed_coords,
    "reconstruct": cmd_reconstruct,
    "mutate": cmd_mutate,
    "degeneracy": cmd_degeneracy,
    "find-good": cmd_find_good,
    "monodromy": cmd_monodromy,
    "wkb-sweep": cmd_wkb_sweep,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Monodromy of meromorphic projective structures")
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    parser.add_argument("--input", help="JSON file, or inline JSON text")
    parser.add_argument("--output", help="write the result here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--svg", help="analyze: write a Stokes picture to this path")
    parser.add_argument("--config", default="config.json", help="settings file")
    parser.add_argument("--emit-config", action="store_true", help="print the resolved settings")
    parser.add_argument("--rel-tol", type=float, dest="rel_tol")
    parser.add_argument("--seed-decay", type=float, dest="seed_decay")
    parser.add_argument("--budget", type=int, help="find-good budget factor")
    parser.add_argument("--arc", type=int, help="flip, tagged-flip, mutate: the arc")
    parser.add_argument("--hbar", type=float, nargs="+", help="wkb-sweep: hbar values")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--quiet", action="store_true")
    return parser


def _write(text: str, path: Optional[str], settings: SettingsManager) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(settings.get_message("wrote_output", path=path))
    else:
        sys.stdout.write(text)


def main(argv: Optional[List[str]] = None) -> int:
    """Main function"""
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(format='%(asctime)s - %(name)s - %(levelname)s - %(message)s', level=level)

    if args.command is None and not args.emit_config:
        parser.error("a command is required")

    settings = SettingsManager(args.config)
    try:
        settings.apply_overrides({"rel_tol": args.rel_tol, "wkb_decay_target": args.seed_decay,
                                  "find_good_budget_factor": args.budget})
        resolved = settings.resolved()
        logger.info(settings.get_message("config_echo", settings=resolved))

        if args.emit_config:
            if args.output:
                settings.save_config(args.output)
            else:
                _write(_encode({"settings": resolved}) + "\n", None, settings)
            return 0

        data = None if args.command == "selftest" else _load_input(args.input)
        result, table = HANDLERS[args.command](args, data, settings)
        if args.format == "csv":
            if table is None:
                raise SerializationError(f"{args.command} has no coordinate table for CSV output")
            text = _coordinates_csv(table)
        else:
            text = _encode({"command": args.command, "config": resolved, **result}) + "\n"
        _write(text, args.output, settings)
        if args.command == "selftest" and result["failed"]:
            return 3
        return 0
    except NumericalError as e:
        logger.error(settings.get_message("numerical_error", error=e))
        sys.stderr.write(_encode(e.to_dict()) + "\n")
        return 3
    except MonodromyError as e:
        logger.error(settings.get_message("validation_error", error=e))
        sys.stderr.write(_encode(e.to_dict()) + "\n")
        return 2
    except (ValueError, KeyError, TypeError) as e:
        logger.error(settings.get_message("validation_error", error=e))
        sys.stderr.write(_encode({"error": type(e).__name__, "message": str(e), "details": {}}) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
