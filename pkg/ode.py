"""
Rational quadratic differentials phi(z) dz^2 on P^1 and the monodromy of
y'' = phi y.

Solutions are carried as vectors (y, -y') so that the transport along a path
solves Y' = -A Y with A = [[0, 1], [phi, 0]]. Near infinity everything is
done in the chart w = 1/z, where the potential becomes phi(1/w) / w^4 and
vectors change by L(w) = [[w, 0], [-1, -1/w]].
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import cumulative_trapezoid, quad, solve_ivp
from scipy.optimize import brentq

from cluster import coordinates
from errors import (
    AmbiguousMatch,
    ConfigError,
    DegenerateSurface,
    DegenerateTriple,
    NoPoles,
    PathTooClose,
    RealizationRequired,
    ResonantOrApparent,
    SeedNotFound,
    SerializationError,
    StepFailure,
    TriangulationMismatch,
)
from framed import DevelopedFramedLocalSystem, identity_system
from projective_geometry import (
    TAU_CLS,
    MapClass,
    ProjectiveMap,
    ProjectivePoint,
    apply,
    classify,
    complex_from_json,
    complex_to_json,
    fixed_lines,
    map_from_triples,
)
from surface import (
    IdealTriangulation,
    MarkedBorderedSurface,
    PointKind,
    Signing,
    default_triangulation,
    trivial_signing,
)
from surface import validate as validate_triangulation

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
ROOT_CLUSTER_TOL = 1e-4
CHUNK_GROWTH = 8.0


# ---------------------------------------------------------------- potentials


def _trim(coeffs: Sequence[complex]) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex).ravel()
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)


def _cluster(roots: np.ndarray) -> List[Tuple[complex, int]]:
    """Group numerically multiple roots; returns (centroid, multiplicity)."""
    clusters: List[List[complex]] = []
    for r in sorted(roots, key=lambda x: (x.real, x.imag)):
        for group in clusters:
            c = np.mean(group)
            if abs(r - c) <= ROOT_CLUSTER_TOL * (1 + abs(c)):
                group.append(r)
                break
        else:
            clusters.append([r])
    out = [(complex(np.mean(g)), len(g)) for g in clusters]
    return sorted(out, key=lambda x: (round(x[0].real, 9), round(x[0].imag, 9)))


def _cancel_common(num: np.ndarray, den: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if len(num) < 2 or len(den) < 2 or not np.any(num):
        return num, den
    num_roots = list(P.polyroots(num))
    den_roots = list(P.polyroots(den))
    kept_den = []
    cancelled = 0
    for r in den_roots:
        match = next((k for k, s in enumerate(num_roots) if abs(s - r) <= 1e-9 * (1 + abs(r))), None)
        if match is None:
            kept_den.append(r)
        else:
            num_roots.pop(match)
            cancelled += 1
    if not cancelled:
        return num, den
    logger.debug(f"cancelled {cancelled} common factors")
    num = num[-1] * (P.polyfromroots(num_roots) if num_roots else np.ones(1))
    den = den[-1] * (P.polyfromroots(kept_den) if kept_den else np.ones(1))
    return _trim(num), _trim(den)


@dataclass(frozen=True, eq=False)
class RationalPotential:
    """phi = numerator / denominator, coefficients in ascending degree."""

    numerator: Tuple[complex, ...]
    denominator: Tuple[complex, ...] = (1.0,)

    def __post_init__(self):
        num, den = _trim(self.numerator), _trim(self.denominator)
        if not np.any(den):
            raise ValueError("denominator is identically zero")
        num, den = _cancel_common(num, den)
        lead = den[-1]
        object.__setattr__(self, "numerator", tuple(complex(c) for c in num / lead))
        object.__setattr__(self, "denominator", tuple(complex(c) for c in den / lead))

    @classmethod
    def from_roots(cls, zeros: Sequence[complex], poles: Sequence[complex] = (),
                   scale: complex = 1.0) -> "RationalPotential":
        num = scale * (P.polyfromroots(zeros) if len(zeros) else np.ones(1))
        den = P.polyfromroots(poles) if len(poles) else np.ones(1)
        return cls(tuple(num), tuple(den))

    @property
    def is_zero(self) -> bool:
        return not any(self.numerator)

    @property
    def num_degree(self) -> int:
        return len(self.numerator) - 1

    @property
    def den_degree(self) -> int:
        return len(self.denominator) - 1

    @property
    def is_polynomial(self) -> bool:
        return self.den_degree == 0

    def evaluate(self, z):
        return P.polyval(z, self.numerator) / P.polyval(z, self.denominator)

    def derivative(self, z):
        n, d = P.polyval(z, self.numerator), P.polyval(z, self.denominator)
        dn = P.polyval(z, P.polyder(self.numerator))
        dd = P.polyval(z, P.polyder(self.denominator))
        return (dn * d - n * dd) / (d * d)

    def scaled(self, hbar: complex) -> "RationalPotential":
        """phi / hbar^2."""
        return RationalPotential(tuple(c / hbar ** 2 for c in self.numerator), self.denominator)

    def at_infinity(self) -> "RationalPotential":
        """The same quadratic differential in the chart w = 1/z: phi(1/w) / w^4."""
        num = np.array(self.numerator[::-1])
        den = np.array(self.denominator[::-1])
        shift = self.den_degree - self.num_degree - 4
        if shift >= 0:
            num = np.concatenate([np.zeros(shift), num])
        else:
            den = np.concatenate([np.zeros(-shift), den])
        return RationalPotential(tuple(num), tuple(den))

    def to_json(self) -> Dict[str, Any]:
        return {"numerator": [complex_to_json(c) for c in self.numerator],
                "denominator": [complex_to_json(c) for c in self.denominator]}

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "RationalPotential":
        try:
            num = [complex_from_json(c) for c in obj["numerator"]]
            den = [complex_from_json(c) for c in obj.get("denominator", [1.0])]
            return cls(tuple(num), tuple(den))
        except (KeyError, TypeError, ValueError) as e:
            raise SerializationError(f"bad potential description: {e}")

    def __repr__(self) -> str:
        return f"RationalPotential(numerator={list(self.numerator)}, denominator={list(self.denominator)})"


def pullback_power(phi: RationalPotential, k: int) -> RationalPotential:
    """Pullback of phi dz^2 under z = w^k: k^2 w^(2k-2) phi(w^k)."""
    if k < 1:
        raise ValueError("pullback exponent must be a positive integer")

    def spread(coeffs: Sequence[complex]) -> np.ndarray:
        out = np.zeros(k * (len(coeffs) - 1) + 1, dtype=complex)
        out[::k] = coeffs
        return out

    num = np.concatenate([np.zeros(2 * k - 2), k * k * spread(phi.numerator)])
    return RationalPotential(tuple(num), tuple(spread(phi.denominator)))


# ---------------------------------------------------------------- poles


@dataclass(frozen=True)
class PoleRecord:
    location: Optional[complex]
    order: int
    leading: complex
    exponent: Optional[complex] = None
    residue: Optional[complex] = None
    stokes_angles: Tuple[float, ...] = ()
    anti_stokes_angles: Tuple[float, ...] = ()

    @property
    def is_infinite(self) -> bool:
        return self.location is None

    @property
    def is_regular(self) -> bool:
        return self.order <= 2

    @property
    def a(self) -> complex:
        """lim z^2 phi at the pole."""
        return self.leading if self.order == 2 else 0j

    def to_local(self, z: complex) -> complex:
        return 1 / z if self.is_infinite else z - self.location

    def from_local(self, u: complex) -> complex:
        return 1 / u if self.is_infinite else self.location + u

    def z_direction(self, theta: float) -> float:
        return (-theta) % TWO_PI if self.is_infinite else theta % TWO_PI

    def sector_angles(self) -> List[float]:
        """Local-chart Stokes angles, labelled counterclockwise in the z-plane from the
        smallest non-negative direction."""
        return sorted(self.stokes_angles, key=self.z_direction)

    @property
    def stokes_directions(self) -> List[float]:
        return sorted(self.z_direction(t) for t in self.stokes_angles)

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "location": None if self.is_infinite else complex_to_json(self.location),
            "order": self.order,
            "leading": complex_to_json(self.leading),
        }
        if self.is_regular:
            out["exponent"] = complex_to_json(self.exponent)
            out["residue"] = complex_to_json(self.residue)
        else:
            out["stokes_angles"] = list(self.stokes_angles)
            out["anti_stokes_angles"] = list(self.anti_stokes_angles)
        return out


def _record(location: Optional[complex], order: int, leading: complex) -> PoleRecord:
    if order <= 2:
        a = leading if order == 2 else 0j
        return PoleRecord(location, order, leading,
                          exponent=2j * math.pi * cmath.sqrt(1 + 4 * a),
                          residue=4j * math.pi * cmath.sqrt(a))
    k = order - 2
    arg = cmath.phase(leading)
    stokes = sorted(((arg + TWO_PI * j) / k) % TWO_PI for j in range(k))
    anti = sorted(((arg + math.pi + TWO_PI * j) / k) % TWO_PI for j in range(k))
    return PoleRecord(location, order, leading, stokes_angles=tuple(stokes), anti_stokes_angles=tuple(anti))


def analyze(phi: RationalPotential) -> List[PoleRecord]:
    """One record per pole, finite poles first (sorted), infinity last."""
    if phi.is_zero:
        raise NoPoles("the zero potential has no poles")
    records = []
    finite = _cluster(P.polyroots(phi.denominator)) if phi.den_degree > 0 else []
    for p, m in finite:
        rest = np.prod([(p - r) ** k for r, k in finite if r != p]) if len(finite) > 1 else 1.0
        a0 = P.polyval(p, phi.numerator) / (phi.denominator[-1] * rest)
        records.append(_record(p, m, complex(a0)))
    order = phi.num_degree - phi.den_degree + 4
    if order >= 1:
        records.append(_record(None, order, phi.numerator[-1] / phi.denominator[-1]))
    if not records:
        raise NoPoles("potential has no poles")
    return records


def surface_of(phi: RationalPotential, records: Optional[List[PoleRecord]] = None) -> MarkedBorderedSurface:
    records = records if records is not None else analyze(phi)
    boundary = tuple(r.order - 2 for r in records if not r.is_regular)
    punctures = sum(1 for r in records if r.is_regular)
    s = MarkedBorderedSurface(0, boundary, punctures)
    if s.is_degenerate:
        logger.warning(f"⚠️ {s.signature} is degenerate: fewer than three marked points")
    return s


def _finite_poles(records: Sequence[PoleRecord]) -> List[complex]:
    return [r.location for r in records if not r.is_infinite]


def r_infinity(records: Sequence[PoleRecord]) -> float:
    """Radius beyond which integration switches to the chart at infinity."""
    poles = _finite_poles(records)
    return 2.0 * (1.0 + max((abs(p) for p in poles), default=0.0))


def local_radius(records: Sequence[PoleRecord], pole: PoleRecord) -> float:
    """Local-chart radius of the default circle around a pole."""
    if pole.is_infinite:
        return 1.0 / r_infinity(records)
    others = [abs(p - pole.location) for p in _finite_poles(records) if p != pole.location]
    return 0.5 * min(others) if others else 1.0


def find_pole(records: Sequence[PoleRecord], location: Optional[complex]) -> PoleRecord:
    for r in records:
        if location is None and r.is_infinite:
            return r
        if location is not None and not r.is_infinite and abs(r.location - location) <= 1e-6 * (1 + abs(location)):
            return r
    raise TriangulationMismatch(f"no pole at {location}", {"location": str(location)})


# ---------------------------------------------------------------- configuration


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_step: float = 0.25
    renorm_threshold: float = 1e8
    wkb_decay_target: float = 25.0
    seed_radius_max: float = 1e3
    tau_match: float = 1e-6
    tau_cls: float = TAU_CLS

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "tau_match", "tau_cls"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ConfigError(f"{name} must lie in (0, 1), got {value}", {name: value})
        if self.wkb_decay_target <= 10:
            raise ConfigError(f"wkb_decay_target must exceed 10, got {self.wkb_decay_target}")
        if self.max_step <= 0 or self.renorm_threshold <= 1 or self.seed_radius_max <= 1:
            raise ConfigError("max_step, renorm_threshold and seed_radius_max must be positive and large enough")

    def to_json(self) -> Dict[str, float]:
        return dict(self.__dict__)


# ---------------------------------------------------------------- paths


@dataclass(frozen=True)
class Line:
    start: complex
    end: complex

    def point(self, f: float) -> complex:
        return self.start + (self.end - self.start) * f

    def reversed(self) -> "Line":
        return Line(self.end, self.start)


@dataclass(frozen=True)
class Arc:
    """Circle piece; center None means the circle |w| = radius in the chart at infinity."""

    center: Optional[complex]
    radius: float
    start_angle: float
    sweep: float

    def local(self, f: float) -> complex:
        return self.radius * cmath.exp(1j * (self.start_angle + self.sweep * f))

    def point(self, f: float) -> complex:
        u = self.local(f)
        return 1 / u if self.center is None else self.center + u

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.start_angle + self.sweep, -self.sweep)


Segment = Union[Line, Arc]


@dataclass(frozen=True)
class PlanarPath:
    segments: Tuple[Segment, ...]

    @property
    def start(self) -> complex:
        return self.segments[0].point(0.0)

    @property
    def end(self) -> complex:
        return self.segments[-1].point(1.0)

    @property
    def is_closed(self) -> bool:
        return abs(self.start - self.end) <= 1e-12 * (1 + abs(self.start))

    def reversed(self) -> "PlanarPath":
        return PlanarPath(tuple(s.reversed() for s in reversed(self.segments)))

    def then(self, other: "PlanarPath") -> "PlanarPath":
        return PlanarPath(self.segments + other.segments)

    def sample(self, per_segment: int = 65) -> np.ndarray:
        f = np.linspace(0.0, 1.0, per_segment)
        return np.concatenate([np.array([s.point(x) for x in f]) for s in self.segments])

    def to_json(self) -> List[Dict[str, Any]]:
        out = []
        for s in self.segments:
            if isinstance(s, Line):
                out.append({"line": [complex_to_json(s.start), complex_to_json(s.end)]})
            else:
                out.append({"arc": {"center": None if s.center is None else complex_to_json(s.center),
                                    "radius": s.radius, "start": s.start_angle, "sweep": s.sweep}})
        return out

    @classmethod
    def from_json(cls, obj: List[Dict[str, Any]]) -> "PlanarPath":
        segments: List[Segment] = []
        try:
            for s in obj:
                if "line" in s:
                    segments.append(Line(complex_from_json(s["line"][0]), complex_from_json(s["line"][1])))
                else:
                    a = s["arc"]
                    center = None if a.get("center") is None else complex_from_json(a["center"])
                    segments.append(Arc(center, float(a["radius"]), float(a["start"]), float(a["sweep"])))
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise SerializationError(f"bad path description: {e}")
        return cls(tuple(segments))


EMPTY_PATH = PlanarPath(())


def polyline(points: Sequence[complex]) -> PlanarPath:
    return PlanarPath(tuple(Line(complex(a), complex(b)) for a, b in zip(points[:-1], points[1:]) if a != b))


def circle_loop(center: Optional[complex], radius: float, start_angle: float = 0.0,
                turns: float = 1.0) -> PlanarPath:
    return PlanarPath((Arc(center, radius, start_angle, TWO_PI * turns),))


def default_loop(phi: RationalPotential, pole: PoleRecord, start_angle: float = 0.0,
                 records: Optional[List[PoleRecord]] = None) -> PlanarPath:
    """Counterclockwise circle in the local chart, half the distance to the nearest other pole."""
    records = records if records is not None else analyze(phi)
    return circle_loop(pole.location, local_radius(records, pole), start_angle)


def clearance(path: PlanarPath, records: Sequence[PoleRecord]) -> float:
    poles = _finite_poles(records)
    if not poles or not path.segments:
        return math.inf
    z = path.sample()
    return float(min(np.min(np.abs(z - p)) for p in poles))


def _check_clearance(path: PlanarPath, records: Sequence[PoleRecord]) -> None:
    poles = _finite_poles(records)
    gaps = [abs(p - q) for k, p in enumerate(poles) for q in poles[k + 1:]]
    spacing = min(gaps) if gaps else 1.0
    c = clearance(path, records)
    if c < 1e-3 * spacing:
        raise PathTooClose(f"path passes within {c:.3g} of a pole", {"clearance": c, "spacing": spacing})


# ---------------------------------------------------------------- integration


@dataclass(frozen=True)
class Transport:
    value: np.ndarray
    wronskian_drift: Optional[float]
    log_scale: float
    evaluations: int


def _to_w(w: complex) -> np.ndarray:
    return np.array([[w, 0], [-1, -1 / w]], dtype=complex)


def _from_w(w: complex) -> np.ndarray:
    return np.array([[1 / w, 0], [-1, -w]], dtype=complex)


Piece = Tuple[str, Callable[[float], Tuple[complex, complex]], float]


def _line_pieces(seg: Line, r_inf: float) -> List[Piece]:
    a, d = seg.start, seg.end - seg.start
    cuts = [0.0, 1.0]
    A, B, C = abs(d) ** 2, 2 * (a * d.conjugate()).real, abs(a) ** 2 - r_inf ** 2
    disc = B * B - 4 * A * C
    if A > 0 and disc > 0:
        for t in ((-B - math.sqrt(disc)) / (2 * A), (-B + math.sqrt(disc)) / (2 * A)):
            if 0 < t < 1:
                cuts.append(t)
    cuts.sort()
    pieces: List[Piece] = []
    for t0, t1 in zip(cuts[:-1], cuts[1:]):
        if t1 - t0 <= 1e-15:
            continue
        if abs(a + d * (t0 + t1) / 2) <= r_inf:
            length = abs(d) * (t1 - t0)

            def z_param(s, t0=t0, t1=t1, length=length):
                return a + d * (t0 + (t1 - t0) * s / length), d * (t1 - t0) / length

            pieces.append(("z", z_param, length))
        else:
            f = np.linspace(t0, t1, 65)
            w = 1 / (a + d * f)
            length = float(np.sum(np.abs(np.diff(w))))

            def w_param(s, t0=t0, t1=t1, length=length):
                z = a + d * (t0 + (t1 - t0) * s / length)
                return 1 / z, -(d * (t1 - t0) / length) / (z * z)

            pieces.append(("w", w_param, length))
    return pieces


def _arc_piece(seg: Arc, r_inf: float) -> Piece:
    length = seg.radius * abs(seg.sweep)
    rate = seg.sweep / length

    def local(s):
        u = seg.radius * cmath.exp(1j * (seg.start_angle + rate * s))
        return u, 1j * rate * u

    if seg.center is None:
        return "w", local, length
    if abs(seg.center) - seg.radius > r_inf:
        def w_param(s):
            u, du = local(s)
            z = seg.center + u
            return 1 / z, -du / (z * z)

        return "w", w_param, length / (abs(seg.center) - seg.radius) ** 2

    def z_param(s):
        u, du = local(s)
        return seg.center + u, du

    return "z", z_param, length


def _pieces(path: PlanarPath, r_inf: float) -> List[Piece]:
    out: List[Piece] = []
    for seg in path.segments:
        if isinstance(seg, Line):
            out.extend(_line_pieces(seg, r_inf))
        elif seg.sweep != 0:
            out.append(_arc_piece(seg, r_inf))
    return out


def _transport_piece(q: RationalPotential, param, length: float, Y: np.ndarray,
                     cfg: IntegratorConfig) -> Tuple[np.ndarray, float, int]:
    cols = Y.shape[1]

    def rhs(s, y):
        u, du = param(s)
        f = q.evaluate(u)
        M = y.reshape(2, cols)
        return np.concatenate([-M[1] * du, -f * M[0] * du])

    s, log_scale, evaluations = 0.0, 0.0, 0
    y = Y.reshape(-1).astype(complex)
    while s < length * (1 - 1e-14):
        u, du = param(s)
        rate = math.sqrt(abs(q.evaluate(u))) * abs(du) + 1.0
        h = min(length - s, CHUNK_GROWTH / rate)
        sol = solve_ivp(rhs, (s, s + h), y, method="DOP853", rtol=cfg.rel_tol, atol=cfg.abs_tol,
                        max_step=cfg.max_step)
        evaluations += sol.nfev
        if not sol.success:
            raise StepFailure(f"integration failed: {sol.message}", {"at": str(u), "s": s})
        y = sol.y[:, -1]
        norm = float(np.max(np.abs(y)))
        if not math.isfinite(norm) or norm == 0:
            raise StepFailure("solution left the representable range", {"at": str(u)})
        if norm > cfg.renorm_threshold or norm < 1 / cfg.renorm_threshold:
            y = y / norm
            log_scale += math.log(norm)
        s += h
    return y.reshape(2, cols), log_scale, evaluations


def integrate(phi: RationalPotential, path: PlanarPath, Y0: Any,
              cfg: Optional[IntegratorConfig] = None,
              records: Optional[List[PoleRecord]] = None) -> Transport:
    """Transport a 2x2 fundamental matrix or a 2-vector along the path."""
    cfg = cfg or IntegratorConfig()
    if records is None:
        records = [] if phi.is_zero else analyze(phi)
    _check_clearance(path, records)
    Y0 = np.asarray(Y0, dtype=complex)
    vector = Y0.ndim == 1
    Y = Y0.reshape(2, 1) if vector else Y0.copy()
    r_inf = r_infinity(records)
    phi_inf = None
    log_scale, evaluations = 0.0, 0
    for chart, param, length in _pieces(path, r_inf):
        if length <= 0:
            continue
        if chart == "z":
            Y, ls, ev = _transport_piece(phi, param, length, Y, cfg)
        else:
            phi_inf = phi_inf or phi.at_infinity()
            w0, _ = param(0.0)
            W, ls, ev = _transport_piece(phi_inf, param, length, _to_w(w0) @ Y, cfg)
            w1, _ = param(length)
            Y = _from_w(w1) @ W
        log_scale += ls
        evaluations += ev
    drift = None
    if not vector:
        d = cmath.log(np.linalg.det(Y)) + 2 * log_scale - cmath.log(np.linalg.det(Y0))
        drift = abs(cmath.exp(d) - 1)
        logger.debug(f"transport: {evaluations} evaluations, Wronskian drift {drift:.2e}, log-scale {log_scale:.3f}")
    return Transport(Y[:, 0] if vector else Y, drift, log_scale, evaluations)


def monodromy(phi: RationalPotential, loop: PlanarPath, cfg: Optional[IntegratorConfig] = None,
              records: Optional[List[PoleRecord]] = None) -> ProjectiveMap:
    if not loop.is_closed:
        raise ValueError("monodromy needs a closed loop")
    result = integrate(phi, loop, np.eye(2), cfg, records)
    return ProjectiveMap.from_matrix(result.value).normalized()


# ---------------------------------------------------------------- framings


@dataclass(frozen=True)
class Framing:
    point: ProjectivePoint
    vector: np.ndarray = field(compare=False)
    base: complex


def _local_potential(phi: RationalPotential, pole: PoleRecord) -> RationalPotential:
    return phi.at_infinity() if pole.is_infinite else phi


def _turning_radius(phi: RationalPotential, records: Sequence[PoleRecord]) -> float:
    zeros = P.polyroots(phi.numerator) if phi.num_degree > 0 else []
    sizes = [abs(z) for z in zeros] + [abs(p) for p in _finite_poles(records)]
    return max(sizes + [1.0])


def _seed(phi: RationalPotential, pole: PoleRecord, theta: float, rho_start: float,
          cfg: IntegratorConfig) -> Tuple[complex, np.ndarray]:
    """Point on the local ray at angle theta where the accumulated decay reaches the
    target, with the WKB vector of the decaying solution there (z-chart convention)."""
    q = _local_potential(phi, pole)
    e = cmath.exp(1j * theta)
    rho_min = 1.0 / cfg.seed_radius_max if pole.is_infinite else rho_start / cfg.seed_radius_max
    rho = np.geomspace(rho_start, rho_min, 4000)
    vals = np.abs((np.sqrt(q.evaluate(rho * e).astype(complex)) * e).real)
    decay = cumulative_trapezoid(vals, -rho, initial=0.0)
    hits = np.nonzero(decay >= cfg.wkb_decay_target)[0]
    if not hits.size:
        raise SeedNotFound(f"decay {decay[-1]:.3g} < {cfg.wkb_decay_target} within the seed radius",
                           {"reached": float(decay[-1]), "angle": theta})
    u = complex(rho[hits[0]] * e)
    f, df = complex(q.evaluate(u)), complex(q.derivative(u))
    s = cmath.sqrt(f)
    if (s * -e).real < 0:
        s = -s
    W = np.array([1.0, s + df / (4 * f)], dtype=complex)
    logger.debug(f"seed at local radius {abs(u):.4g} angle {theta:.4f}")
    if pole.is_infinite:
        return 1 / u, _from_w(u) @ W
    return pole.location + u, W


def subdominant(phi: RationalPotential, pole: PoleRecord, sector: int,
                cfg: Optional[IntegratorConfig] = None, base: Optional[complex] = None,
                records: Optional[List[PoleRecord]] = None) -> Framing:
    """Line of the solution decaying into the given Stokes sector, transported to base.

    The default base is 0 for the pole at infinity and the point of the default
    circle on the sector's ray for a finite pole.
    """
    cfg = cfg or IntegratorConfig()
    records = records if records is not None else analyze(phi)
    if pole.is_regular:
        raise ValueError("subdominant solutions exist only at poles of order > 2")
    theta = pole.sector_angles()[sector]
    if pole.is_infinite:
        rho_start = 1.0 / max(_turning_radius(phi, records), abs(base) if base is not None else 0.0)
        base = 0j if base is None else complex(base)
    else:
        rho_start = local_radius(records, pole)
    seed_z, vector = _seed(phi, pole, theta, rho_start, cfg)
    ray_end = pole.from_local(rho_start * cmath.exp(1j * theta))
    points = [seed_z, ray_end] + ([base] if base is not None and base != ray_end else [])
    result = integrate(phi, polyline(points), vector, cfg, records)
    end = points[-1]
    return Framing(ProjectivePoint(*result.value).normalized(), result.value, end)


def subdominant_at(phi: RationalPotential, pole: PoleRecord, sector: int, angle: float, radius: float,
                   cfg: IntegratorConfig, records: List[PoleRecord]) -> Framing:
    """Subdominant line on the circle of the given local radius, swung the short way
    from the sector's ray to the local angle."""
    theta = pole.sector_angles()[sector]
    seed_z, vector = _seed(phi, pole, theta, radius, cfg)
    ray_end = pole.from_local(radius * cmath.exp(1j * theta))
    sweep = (angle - theta + math.pi) % TWO_PI - math.pi
    path = polyline([seed_z, ray_end]).then(PlanarPath((Arc(pole.location, radius, theta, sweep),)))
    result = integrate(phi, path, vector, cfg, records)
    return Framing(ProjectivePoint(*result.value).normalized(), result.value, path.end)


def frame_regular(phi: RationalPotential, pole: PoleRecord, sign: int,
                  cfg: Optional[IntegratorConfig] = None, start_angle: float = 0.0,
                  radius: Optional[float] = None,
                  records: Optional[List[PoleRecord]] = None) -> Framing:
    """Eigenline of the loop monodromy whose eigenvalue ratio is exp(sign * r)."""
    cfg = cfg or IntegratorConfig()
    records = records if records is not None else analyze(phi)
    if not pole.is_regular:
        raise ValueError("regular framings exist only at poles of order <= 2")
    radius = radius if radius is not None else local_radius(records, pole)
    loop = circle_loop(pole.location, radius, start_angle)
    M = monodromy(phi, loop, cfg, records)
    kind = classify(M, cfg.tau_cls)
    if kind is not MapClass.SEMISIMPLE:
        raise ResonantOrApparent(f"monodromy at {pole.location} is {kind.value}",
                                 {"pole": str(pole.location), "class": kind.value})
    target = cmath.exp(sign * pole.exponent)
    lines = fixed_lines(M, cfg.tau_cls)
    misses = [abs(line.eigenvalue ** 2 - target) / abs(target) for line in lines]
    if all(d <= cfg.tau_match for d in misses):
        raise AmbiguousMatch(f"both eigenlines match exp({sign} r) at {pole.location}",
                             {"pole": str(pole.location), "misses": misses})
    best = int(np.argmin(misses))
    if misses[best] > cfg.tau_match:
        logger.warning(f"⚠️ eigenvalue ratio at {pole.location} misses exp(r) by {misses[best]:.2e}")
    point = lines[best].point
    return Framing(point, np.array([point.a, point.b]), loop.start)


# ---------------------------------------------------------------- realizations


@dataclass(frozen=True)
class Auto:
    """Polynomial potentials: fan triangulation of the disc, trivial gluings,
    subdominant lines read off at z = 0."""


@dataclass(frozen=True)
class Anchor:
    pole: Optional[complex]
    sector: Optional[int] = None


@dataclass(frozen=True, eq=False)
class UserPlanar:
    """A triangulation of surface_of(phi) drawn in the plane.

    arcs[a] is a polyline from the pole of corner i of edges[a].slots[0] to the
    pole of corner i + 1; an end at infinity is given by any point beyond the
    switching radius.
    """

    triangulation: IdealTriangulation
    anchors: Dict[int, Anchor]
    arcs: Dict[int, Tuple[complex, ...]]

    def to_json(self) -> Dict[str, Any]:
        return {
            "triangulation": self.triangulation.to_json(),
            "anchors": {str(v): {"pole": None if a.pole is None else complex_to_json(a.pole), "sector": a.sector}
                        for v, a in sorted(self.anchors.items())},
            "arcs": {str(a): [complex_to_json(z) for z in pts] for a, pts in sorted(self.arcs.items())},
        }

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "UserPlanar":
        T = IdealTriangulation.from_json(obj["triangulation"])
        try:
            anchors = {int(v): Anchor(None if a.get("pole") is None else complex_from_json(a["pole"]),
                                      None if a.get("sector") is None else int(a["sector"]))
                       for v, a in obj["anchors"].items()}
            arcs = {int(a): tuple(complex_from_json(z) for z in pts) for a, pts in obj["arcs"].items()}
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise SerializationError(f"bad planar realization: {e}")
        return cls(T, anchors, arcs)


Realization = Union[Auto, UserPlanar]
EndKey = Tuple[int, int]


def _same_surface(a: MarkedBorderedSurface, b: MarkedBorderedSurface) -> bool:
    return a.genus == b.genus and sorted(a.boundary) == sorted(b.boundary) and a.punctures == b.punctures


class _PlanarBuilder:
    """Charts at arc midpoints, framings at the points where arcs enter the small
    circles around their poles, gluings by transport across each arc."""

    def __init__(self, phi: RationalPotential, records: List[PoleRecord], realization: UserPlanar,
                 signing: Signing, cfg: IntegratorConfig):
        self.phi, self.records, self.cfg = phi, records, cfg
        self.T = realization.triangulation
        self.signing = signing
        problems = validate_triangulation(self.T)
        if problems:
            raise TriangulationMismatch("planar triangulation is not valid", {"problems": problems})
        kinds = {p.index: p.kind for p in self.T.points}
        self.poles: Dict[int, PoleRecord] = {}
        self.sectors: Dict[int, Optional[int]] = {}
        for v, kind in kinds.items():
            anchor = realization.anchors.get(v)
            if anchor is None:
                raise TriangulationMismatch(f"marked point {v} has no anchor")
            pole = find_pole(records, anchor.pole)
            if (kind is PointKind.PUNCTURE) != pole.is_regular:
                raise TriangulationMismatch(f"marked point {v} is a {kind.value} but its pole has order {pole.order}")
            if kind is PointKind.BOUNDARY and not (anchor.sector is not None and 0 <= anchor.sector < pole.order - 2):
                raise TriangulationMismatch(f"marked point {v} needs a sector in 0..{pole.order - 3}")
            self.poles[v], self.sectors[v] = pole, anchor.sector
        self.halves: Dict[int, Tuple[List[complex], List[complex]]] = {}
        self.entries: Dict[EndKey, Tuple[complex, float, int]] = {}
        for a in self.T.arcs:
            if a not in realization.arcs:
                raise RealizationRequired(f"arc {a} has no planar path")
            self._prepare(a, list(realization.arcs[a]))
        self._framings: Dict[EndKey, np.ndarray] = {}

    def radius(self, pole: PoleRecord) -> float:
        if pole.is_infinite:
            return 1.0 / r_infinity(self.records)
        return 0.5 * local_radius(self.records, pole)

    def _gap(self, pole: PoleRecord, z: complex) -> float:
        """Negative inside the small disc around the pole."""
        if pole.is_infinite:
            return 1.0 / self.radius(pole) - abs(z)
        return abs(z - pole.location) - self.radius(pole)

    def _cut(self, points: List[complex], pole: PoleRecord, a: int) -> List[complex]:
        if self._gap(pole, points[0]) >= 0:
            raise TriangulationMismatch(f"arc {a} does not start at its pole", {"start": str(points[0])})
        for k in range(len(points) - 1):
            p, q = points[k], points[k + 1]
            if self._gap(pole, q) >= 0:
                t = brentq(lambda s: self._gap(pole, p + (q - p) * s), 0.0, 1.0, xtol=1e-14)
                u = pole.to_local(p + (q - p) * t)
                exact = pole.from_local(self.radius(pole) * u / abs(u))
                return [exact] + points[k + 1:]
        raise TriangulationMismatch(f"arc {a} never leaves the neighbourhood of its pole")

    def _prepare(self, a: int, points: List[complex]) -> None:
        t, i = self.T.edges[a].slots[0]
        v0, v1 = self.T.corner(t, i), self.T.corner(t, i + 1)
        if len(points) < 2:
            raise TriangulationMismatch(f"arc {a} needs at least two points")
        body = self._cut(points, self.poles[v0], a)
        body = self._cut(body[::-1], self.poles[v1], a)[::-1]
        _check_clearance(polyline(body), self.records)
        lengths = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(body)))])
        half = lengths[-1] / 2
        k = int(np.searchsorted(lengths, half, side="right")) - 1
        k = min(k, len(body) - 2)
        f = (half - lengths[k]) / (lengths[k + 1] - lengths[k])
        mid = body[k] + (body[k + 1] - body[k]) * f
        self.halves[a] = ([mid] + body[k::-1], [mid] + body[k + 1:])
        for end, v in ((0, v0), (1, v1)):
            z = body[0] if end == 0 else body[-1]
            pole = self.poles[v]
            self.entries[(a, end)] = (z, cmath.phase(pole.to_local(z)), v)

    # routes -------------------------------------------------------------

    def _end_at(self, t: int, s: int, c: int) -> EndKey:
        a = self.T.side(t, s)
        forward = self.T.edges[a].slots[0] == (t, s % 3)
        at_start = (c % 3 == s % 3) == forward
        return a, 0 if at_start else 1

    def _walk(self, t: int, s: int, c: int) -> Tuple[PlanarPath, EndKey]:
        """From the midpoint of side s to the end of that side at corner c."""
        key = self._end_at(t, s, c)
        return polyline(self.halves[key[0]][key[1]]), key

    def _swing(self, k1: EndKey, k2: EndKey, direction: int) -> PlanarPath:
        z1, a1, v = self.entries[k1]
        _, a2, _ = self.entries[k2]
        pole = self.poles[v]
        if k1 == k2:
            sweep = direction * TWO_PI
        elif direction < 0:
            sweep = -((a1 - a2) % TWO_PI)
        else:
            sweep = (a2 - a1) % TWO_PI
        return PlanarPath((Arc(pole.location, self.radius(pole), a1, sweep),))

    def _between(self, t: int, s1: int, s2: int) -> PlanarPath:
        """Midpoint of side s1 to midpoint of side s2 through their shared corner."""
        s1, s2 = s1 % 3, s2 % 3
        if s1 == s2:
            return EMPTY_PATH
        for s in (s1, s2):
            if not self.T.is_arc(self.T.side(t, s)):
                raise RealizationRequired(f"triangle {t} needs a route along boundary side {s}")
        # interior swings run clockwise from the incoming side to the outgoing one
        c, direction = ((s1 + 1) % 3, -1) if (s2 - s1) % 3 == 1 else (s1, 1)
        walk1, k1 = self._walk(t, s1, c)
        walk2, k2 = self._walk(t, s2, c)
        return walk1.then(self._swing(k1, k2, direction)).then(walk2.reversed())

    def base_side(self, t: int) -> int:
        sides = [s for s in range(3) if self.T.is_arc(self.T.side(t, s))]
        if len(sides) < 2:
            raise RealizationRequired(f"triangle {t} has more than one boundary side")
        return sides[0]

    def _to_corner(self, t: int, c: int) -> Tuple[PlanarPath, EndKey]:
        i0 = self.base_side(t)
        if c % 3 in (i0, (i0 + 1) % 3):
            return self._walk(t, i0, c)
        s = (i0 + 1) % 3 if self.T.is_arc(self.T.side(t, i0 + 1)) else (i0 + 2) % 3
        walk, key = self._walk(t, s, c)
        return self._between(t, i0, s).then(walk), key

    # framings -----------------------------------------------------------

    def _framing(self, key: EndKey) -> np.ndarray:
        if key not in self._framings:
            z, angle, v = self.entries[key]
            pole = self.poles[v]
            if pole.is_regular:
                fr = frame_regular(self.phi, pole, self.signing.get(v, 1), self.cfg, angle,
                                   self.radius(pole), self.records)
            else:
                fr = subdominant_at(self.phi, pole, self.sectors[v], angle, self.radius(pole),
                                    self.cfg, self.records)
            self._framings[key] = fr.vector
        return self._framings[key]

    def build(self) -> DevelopedFramedLocalSystem:
        corners = []
        for t in range(len(self.T.triangles)):
            tri = []
            for c in range(3):
                route, key = self._to_corner(t, c)
                v = integrate(self.phi, route.reversed(), self._framing(key), self.cfg, self.records).value
                tri.append(ProjectivePoint(*v).normalized())
            corners.append(tuple(tri))
        gluings: Dict[int, ProjectiveMap] = {}
        for a in self.T.arcs:
            (t, i), (u, j) = self.T.edges[a].slots
            route = self._between(t, self.base_side(t), i).then(self._between(u, j, self.base_side(u)))
            if route.segments:
                g = ProjectiveMap.from_matrix(integrate(self.phi, route, np.eye(2), self.cfg, self.records).value)
            else:
                g = ProjectiveMap.from_matrix(np.eye(2))
            P_t, P_u = corners[t], corners[u]
            try:
                # keep the transported far corner, make the shared side exact
                g = map_from_triples((P_t[i], P_t[(i + 1) % 3], P_t[(i + 2) % 3]),
                                     (P_u[(j + 1) % 3], P_u[j], apply(g, P_t[(i + 2) % 3])))
            except DegenerateTriple:
                logger.warning(f"⚠️ arc {a}: degenerate corner triple, keeping the transported gluing")
            gluings[a] = g.normalized()
        return DevelopedFramedLocalSystem(self.T, tuple(corners), gluings)


def build_framed(phi: RationalPotential, signing: Optional[Signing] = None,
                 realization: Optional[Realization] = None, cfg: Optional[IntegratorConfig] = None
                 ) -> Tuple[MarkedBorderedSurface, IdealTriangulation, DevelopedFramedLocalSystem]:
    cfg = cfg or IntegratorConfig()
    realization = realization or Auto()
    records = analyze(phi)
    S = surface_of(phi, records)
    if S.is_degenerate:
        raise DegenerateSurface(f"{S.signature} carries no framed moduli", {"surface": S.to_json()})
    if isinstance(realization, Auto):
        if not phi.is_polynomial:
            raise RealizationRequired("automatic realization handles polynomial potentials only; "
                                      "supply a planar triangulation")
        T = default_triangulation(S)
        pole = records[-1]
        points = [subdominant(phi, pole, v, cfg, records=records).point for v in range(S.boundary[0])]
        F = identity_system(T, points)
    else:
        if not _same_surface(realization.triangulation.surface, S):
            raise TriangulationMismatch(f"triangulation is on {realization.triangulation.surface.signature}, "
                                        f"the potential gives {S.signature}")
        T = realization.triangulation
        signing = signing if signing is not None else trivial_signing(T)
        F = _PlanarBuilder(phi, records, realization, signing, cfg).build()
    logger.info(f"✅ framed system on {S.signature}, {len(T.arcs)} arcs")
    return S, T, F


# ---------------------------------------------------------------- WKB


@dataclass(frozen=True)
class SweepRow:
    hbar: float
    values: Dict[int, complex]
    logs: Dict[int, complex]

    def scaled_log(self, a: int) -> complex:
        return self.hbar * self.logs[a]

    def to_json(self) -> Dict[str, Any]:
        return {
            "hbar": self.hbar,
            "values": {str(a): complex_to_json(x) for a, x in sorted(self.values.items())},
            "log": {str(a): complex_to_json(x) for a, x in sorted(self.logs.items())},
            "hbar_log": {str(a): complex_to_json(self.scaled_log(a)) for a in sorted(self.logs)},
        }


def _sweep_grid(targets: Sequence[float], step: float) -> np.ndarray:
    inv = sorted(1.0 / h for h in targets)
    grid = [inv[0]]
    for x in inv[1:]:
        pieces = max(1, math.ceil((x - grid[-1]) / step - 1e-12))
        grid.extend(np.linspace(grid[-1], x, pieces + 1)[1:])
    return np.array(grid)


def wkb_sweep(phi: RationalPotential, hbars: Sequence[float], cfg: Optional[IntegratorConfig] = None,
              phase_step: float = 0.5) -> List[SweepRow]:
    """Coordinates of phi / hbar^2 with log X continued in 1/hbar, grid spacing at most phase_step."""
    if not hbars or any(h <= 0 for h in hbars):
        raise ValueError("hbar values must be positive")
    grid = _sweep_grid(hbars, phase_step)
    raw: List[Dict[int, complex]] = []
    for x in grid:
        _, _, F = build_framed(phi.scaled(1.0 / x), cfg=cfg)
        X = coordinates(F)
        bad = [a for a, v in X.items() if not isinstance(v, complex) or v == 0]
        if bad:
            raise StepFailure(f"coordinates {bad} degenerate at hbar={1 / x:.6g}")
        raw.append(X)
        logger.debug(f"hbar={1 / x:.6g}: {X}")
    arcs = sorted(raw[0])
    logs = {}
    for a in arcs:
        values = np.array([X[a] for X in raw])
        logs[a] = np.log(np.abs(values)) + 1j * np.unwrap(np.angle(values))
    wanted = sorted({1.0 / h for h in hbars})
    rows = []
    for k, x in enumerate(grid):
        if any(abs(x - w) <= 1e-9 * w for w in wanted):
            rows.append(SweepRow(1.0 / x, dict(raw[k]), {a: complex(logs[a][k]) for a in arcs}))
    logger.info(f"✅ sweep over {len(grid)} grid points, {len(rows)} reported")
    return rows


def fit_slope(rows: Sequence[SweepRow], a: int) -> Tuple[complex, complex]:
    """Least-squares slope and intercept of log X_a against 1/hbar."""
    x = np.array([1.0 / r.hbar for r in rows])
    y = np.array([r.logs[a] for r in rows])
    design = np.vstack([x, np.ones_like(x)]).T.astype(complex)
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    return complex(slope), complex(intercept)


def period(phi: RationalPotential, a: complex, b: complex) -> complex:
    """Integral of sqrt(phi) dz along the segment from a to b, principal branch
    with the negative axis approached from above."""
    d = b - a

    def integrand(t: float) -> complex:
        w = complex(phi.evaluate(a + d * t))
        return cmath.sqrt(complex(w.real, w.imag + 0.0)) * d

    re = quad(lambda t: integrand(t).real, 0.0, 1.0, limit=200)[0]
    im = quad(lambda t: integrand(t).imag, 0.0, 1.0, limit=200)[0]
    return complex(re, im)
