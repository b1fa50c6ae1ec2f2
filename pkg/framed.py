"""
Framed PGL_2 local systems in developed form.

A system lives on an ideal triangulation: every triangle carries its own
chart of P^1 holding the three framing points at its corners, and every arc
carries the Moebius map from the chart of its first incidence
(edges[a].slots[0]) to the chart of its second. The holonomy of the local
system is generated by these maps; the framing at a marked point is the
corner point, transported around its star.
"""

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

from errors import DegenerateTriple, NonSemisimpleHolonomy, NotAPuncture, SerializationError
from projective_geometry import (
    IDENTITY,
    INFINITY,
    TAU_CLS,
    TAU_EQ,
    ZERO,
    MapClass,
    ProjectiveMap,
    ProjectivePoint,
    apply,
    classify,
    fixed_lines,
    map_from_json,
    map_from_triples,
    map_to_json,
    point_from_json,
    point_to_json,
    projective_distance,
)
from surface import (
    IdealTriangulation,
    PointKind,
    Slot,
    corners_of,
    flip,
    puncture_star,
    relabel_arcs,
    star,
)
from surface import validate as validate_triangulation

logger = logging.getLogger(__name__)

Corners = Tuple[ProjectivePoint, ProjectivePoint, ProjectivePoint]

# chart in which a triangle with distinct framings sits after reconstruction or a flip
BASE_TRIPLE: Corners = (INFINITY, ProjectivePoint(-1.0, 1.0), ZERO)


@dataclass(frozen=True, eq=False)
class DevelopedFramedLocalSystem:
    base: IdealTriangulation
    corners: Tuple[Corners, ...]
    gluings: Dict[int, ProjectiveMap] = field(default_factory=dict)

    def point(self, t: int, c: int) -> ProjectivePoint:
        return self.corners[t][c % 3]

    def to_json(self) -> Dict[str, Any]:
        return {
            "triangulation": self.base.to_json(),
            "corners": [[point_to_json(p) for p in tri] for tri in self.corners],
            "gluings": {str(a): map_to_json(g) for a, g in sorted(self.gluings.items())},
        }

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "DevelopedFramedLocalSystem":
        T = IdealTriangulation.from_json(obj["triangulation"])
        try:
            corners = tuple(tuple(point_from_json(p) for p in tri) for tri in obj["corners"])
            gluings = {int(a): map_from_json(m) for a, m in obj.get("gluings", {}).items()}
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise SerializationError(f"bad framed system description: {e}")
        if any(len(tri) != 3 for tri in corners):
            raise SerializationError("every triangle needs exactly three corner points")
        return cls(T, corners, gluings)


class VerdictKind(Enum):
    NONE = "none"
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"


@dataclass(frozen=True)
class DegeneracyVerdict:
    """Outcome of the degeneracy test together with the witness that triggered it."""

    kind: VerdictKind
    segment: Optional[int] = None
    pair: Optional[Tuple[ProjectivePoint, ProjectivePoint]] = None
    records: Tuple[Tuple[str, str], ...] = ()
    point: Optional[ProjectivePoint] = None

    @property
    def degenerate(self) -> bool:
        return self.kind is not VerdictKind.NONE

    def to_json(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"verdict": self.kind.value}
        if self.segment is not None:
            out["segment"] = self.segment
        if self.pair is not None:
            out["pair"] = [point_to_json(p) for p in self.pair]
            out["generators"] = [{"generator": name, "action": action} for name, action in self.records]
        if self.point is not None:
            out["point"] = point_to_json(self.point)
        return out


@dataclass(frozen=True)
class Generators:
    """Holonomies and framing points, all expressed in the chart of triangle 0."""

    loops: Tuple[Tuple[str, ProjectiveMap], ...]
    points: Tuple[ProjectivePoint, ...]
    frames: Dict[int, ProjectiveMap]


# ---------------------------------------------------------------- transport


def transition(F: DevelopedFramedLocalSystem, t: int, i: int) -> ProjectiveMap:
    """Map from the chart of triangle t to the chart across its side i."""
    e = F.base.side(t, i)
    g = F.gluings[e]
    return g if F.base.edges[e].slots[0] == (t, i % 3) else g.inverse()


def holonomy_at(F: DevelopedFramedLocalSystem, t: int, c: int) -> ProjectiveMap:
    """Counterclockwise loop around the puncture at corner c of t, in the chart of t."""
    H = IDENTITY
    for s, d, exit_side in star(F.base, t, c):
        H = transition(F, s, exit_side) @ H
    return H.normalized()


def puncture_holonomy(F: DevelopedFramedLocalSystem, p: int,
                      anchor: Optional[Slot] = None) -> ProjectiveMap:
    steps = puncture_star(F.base, p)
    t, c = anchor if anchor is not None else steps[0][:2]
    if F.base.corner(t, c) != p:
        raise NotAPuncture(f"corner {c} of triangle {t} is not at puncture {p}", {"point": p})
    return holonomy_at(F, t, c)


def _frames(F: DevelopedFramedLocalSystem) -> Tuple[Dict[int, ProjectiveMap], set]:
    """Spanning tree of the dual graph from triangle 0: R_t maps chart 0 to chart t."""
    T = F.base
    R: Dict[int, ProjectiveMap] = {0: IDENTITY}
    tree = set()
    queue = deque([0])
    while queue:
        t = queue.popleft()
        for e, i in sorted((T.side(t, i), i) for i in range(3)):
            nxt = T.other_slot(t, i)
            if nxt is None or nxt[0] in R:
                continue
            R[nxt[0]] = transition(F, t, i) @ R[t]
            tree.add(e)
            queue.append(nxt[0])
    return R, tree


def generators(F: DevelopedFramedLocalSystem) -> Generators:
    T = F.base
    R, tree = _frames(F)
    loops: List[Tuple[str, ProjectiveMap]] = []
    for a in T.arcs:
        if a in tree:
            continue
        (t, _), (u, _) = T.edges[a].slots
        loops.append((f"arc {a}", (R[u].inverse() @ F.gluings[a] @ R[t]).normalized()))
    for p in T.punctures:
        t, c, _ = puncture_star(T, p)[0]
        H = holonomy_at(F, t, c)
        loops.append((f"puncture {p}", (R[t].inverse() @ H @ R[t]).normalized()))
    points = tuple(apply(R[t].inverse(), F.point(t, c)) for t in range(len(T.triangles)) for c in range(3))
    return Generators(tuple(loops), points, R)


def transport_around(F: DevelopedFramedLocalSystem, t: int, c: int,
                     point: ProjectivePoint) -> Dict[Slot, ProjectivePoint]:
    """Transport a line at corner c of t to every corner at the same marked point."""
    T = F.base
    out: Dict[Slot, ProjectivePoint] = {}
    q = point
    for s, d, exit_side in star(T, t, c):
        out[(s, d)] = q
        q = apply(transition(F, s, exit_side), q)
    # a boundary fan stops one way; walk the other way from the start
    s, d, q = t, c, point
    while True:
        nxt = T.other_slot(s, d)
        if nxt is None:
            break
        q = apply(transition(F, s, d), q)
        s, d = nxt[0], (nxt[1] + 1) % 3
        if (s, d) in out:
            break
        out[(s, d)] = q
    return out


# ---------------------------------------------------------------- validation


def validate(F: DevelopedFramedLocalSystem, tol: float = TAU_EQ) -> List[str]:
    T = F.base
    problems = validate_triangulation(T)
    if len(F.corners) != len(T.triangles):
        problems.append(f"{len(F.corners)} corner triples for {len(T.triangles)} triangles")
        return problems
    if any(len(tri) != 3 for tri in F.corners):
        problems.append("every triangle needs exactly three corner points")
        return problems
    for a in T.arcs:
        if a not in F.gluings:
            problems.append(f"arc {a} has no gluing map")
            continue
        if len(T.edges[a].slots) != 2:
            continue
        (t, i), (u, j) = T.edges[a].slots
        g = F.gluings[a]
        if not apply(g, F.point(t, i)).same_as(F.point(u, j + 1), tol):
            problems.append(f"gluing of arc {a} does not carry corner {i} of triangle {t} "
                            f"to corner {(j + 1) % 3} of triangle {u}")
        if not apply(g, F.point(t, i + 1)).same_as(F.point(u, j), tol):
            problems.append(f"gluing of arc {a} does not carry corner {(i + 1) % 3} of triangle {t} "
                            f"to corner {j} of triangle {u}")
    extra = sorted(set(F.gluings) - set(T.arcs))
    if extra:
        problems.append(f"gluings given for non-arcs {extra}")
    return problems


# ---------------------------------------------------------------- degeneracy


def _in_pair(q: ProjectivePoint, pair: Sequence[ProjectivePoint], tol: float) -> bool:
    return any(q.same_as(x, tol) for x in pair)


def _check_pair(pair: Tuple[ProjectivePoint, ProjectivePoint], gens: Generators,
                tol: float) -> Optional[Tuple[Tuple[str, str], ...]]:
    x, y = pair
    if x.same_as(y, tol):
        return None
    if not all(_in_pair(q, pair, tol) for q in gens.points):
        return None
    records = []
    for name, h in gens.loops:
        hx, hy = apply(h, x), apply(h, y)
        if hx.same_as(x, tol) and hy.same_as(y, tol):
            records.append((name, "fix"))
        elif hx.same_as(y, tol) and hy.same_as(x, tol):
            records.append((name, "swap"))
        else:
            return None
    return tuple(records)


def _distinct(points: Sequence[ProjectivePoint], tol: float) -> List[ProjectivePoint]:
    out: List[ProjectivePoint] = []
    for q in points:
        if not any(q.same_as(x, tol) for x in out):
            out.append(q.normalized())
    return out


def _d2(gens: Generators, tol: float, cls_tol: float) -> Optional[DegeneracyVerdict]:
    kinds = [classify(h, cls_tol) for _, h in gens.loops]
    if MapClass.PARABOLIC in kinds:
        return None
    values = _distinct(gens.points, tol)
    candidates: List[Tuple[ProjectivePoint, ProjectivePoint]] = []
    semisimple = [h for (_, h), k in zip(gens.loops, kinds) if k is MapClass.SEMISIMPLE]
    if semisimple:
        h = semisimple[0]
        lines = fixed_lines(h, cls_tol)
        candidates.append((lines[0].point, lines[1].point))
        if classify(h @ h, cls_tol) is MapClass.IDENTITY:
            for q in values:
                candidates.append((q, apply(h, q).normalized()))
    elif len(values) <= 2:
        if len(values) == 2:
            candidates.append((values[0], values[1]))
        else:
            q = values[0]
            pad = ProjectivePoint(0.0, 1.0) if projective_distance(q, ProjectivePoint(0.0, 1.0)) > 0.5 \
                else ProjectivePoint(1.0, 0.0)
            candidates.append((q, pad))
    for pair in candidates:
        records = _check_pair(pair, gens, tol)
        if records is not None:
            return DegeneracyVerdict(VerdictKind.D2, pair=pair, records=records)
    return None


def degeneracy(F: DevelopedFramedLocalSystem, tol: float = TAU_EQ,
               cls_tol: float = TAU_CLS) -> DegeneracyVerdict:
    """First of D1, D2, D3 that holds, or NONE."""
    T = F.base
    for b in T.boundary_segments:
        t, i = T.edges[b].slots[0]
        if F.point(t, i).same_as(F.point(t, i + 1), tol):
            logger.debug(f"D1 witnessed by boundary segment {b}")
            return DegeneracyVerdict(VerdictKind.D1, segment=b)

    gens = generators(F)
    verdict = _d2(gens, tol, cls_tol)
    if verdict is not None:
        logger.debug(f"D2 witnessed by the pair {verdict.pair}")
        return verdict

    if T.surface.is_closed:
        q = gens.points[0]
        common = all(x.same_as(q, tol) for x in gens.points)
        fixed = all(apply(h, q).same_as(q, tol) for _, h in gens.loops)
        if common and fixed:
            kinds = [classify(puncture_holonomy(F, p), cls_tol) for p in T.punctures]
            if all(k is not MapClass.SEMISIMPLE for k in kinds):
                logger.debug(f"D3 witnessed by the common line {q}")
                return DegeneracyVerdict(VerdictKind.D3, point=q.normalized())
    return DegeneracyVerdict(VerdictKind.NONE)


def verify_verdict(F: DevelopedFramedLocalSystem, verdict: DegeneracyVerdict,
                   tol: float = TAU_EQ) -> bool:
    """Re-check a witness against its defining condition."""
    T = F.base
    if verdict.kind is VerdictKind.NONE:
        return True
    if verdict.kind is VerdictKind.D1:
        t, i = T.edges[verdict.segment].slots[0]
        return F.point(t, i).same_as(F.point(t, i + 1), tol)
    gens = generators(F)
    if verdict.kind is VerdictKind.D2:
        records = _check_pair(verdict.pair, gens, tol)
        return records is not None and records == verdict.records
    q = verdict.point
    return (all(x.same_as(q, tol) for x in gens.points)
            and all(apply(h, q).same_as(q, tol) for _, h in gens.loops))


# ---------------------------------------------------------------- actions


def conjugate(F: DevelopedFramedLocalSystem, g: ProjectiveMap) -> DevelopedFramedLocalSystem:
    corners = tuple(tuple(apply(g, p) for p in tri) for tri in F.corners)
    gluings = {a: h.conjugate_by(g).normalized() for a, h in F.gluings.items()}
    return replace(F, corners=corners, gluings=gluings)


def _set_points(F: DevelopedFramedLocalSystem, points: Dict[Slot, ProjectivePoint]) -> DevelopedFramedLocalSystem:
    corners = [list(tri) for tri in F.corners]
    for (t, c), q in points.items():
        corners[t][c] = q.normalized()
    return replace(F, corners=tuple(tuple(tri) for tri in corners))


def sign_flip(F: DevelopedFramedLocalSystem, p: int, cls_tol: float = TAU_CLS) -> DevelopedFramedLocalSystem:
    """Move the framing at puncture p to the other eigenline of its holonomy."""
    t, c, _ = puncture_star(F.base, p)[0]
    H = holonomy_at(F, t, c)
    kind = classify(H, cls_tol)
    if kind is not MapClass.SEMISIMPLE:
        raise NonSemisimpleHolonomy(f"holonomy at puncture {p} is {kind.value}",
                                    {"point": p, "class": kind.value})
    current = F.point(t, c)
    lines = fixed_lines(H, cls_tol)
    other = max(lines, key=lambda line: projective_distance(line.point, current)).point
    return _set_points(F, transport_around(F, t, c, other))


def reframe(F: DevelopedFramedLocalSystem, t: int, c: int, point: ProjectivePoint,
            tol: float = TAU_EQ) -> DevelopedFramedLocalSystem:
    """Replace the framing at the marked point of corner c of t by `point` (given in chart t)."""
    T = F.base
    if T.points[T.corner(t, c)].kind is PointKind.PUNCTURE:
        H = holonomy_at(F, t, c)
        if not apply(H, point).same_as(point, tol):
            raise ValueError(f"{point} is not fixed by the holonomy at puncture {T.corner(t, c)}")
    return _set_points(F, transport_around(F, t, c, point))


def relabel(F: DevelopedFramedLocalSystem, mapping: Dict[int, int]) -> DevelopedFramedLocalSystem:
    """Rename arcs; corner data is untouched because slot order does not depend on labels."""
    base = relabel_arcs(F.base, mapping)
    gluings = {mapping.get(a, a): g for a, g in F.gluings.items()}
    return DevelopedFramedLocalSystem(base, F.corners, gluings)


def flip_system(F: DevelopedFramedLocalSystem, a: int) -> DevelopedFramedLocalSystem:
    """The same framed local system, developed on flip(F.base, a)."""
    T = F.base
    new_T = flip(T, a)
    (t, i), (u, j) = T.edges[a].slots
    g = F.gluings[a]
    g_inv = g.inverse()

    corners = [list(tri) for tri in F.corners]
    corners[t] = [F.point(t, i + 2), F.point(t, i), apply(g_inv, F.point(u, j + 2))]
    corners[u] = [F.point(u, j + 2), F.point(u, j), apply(g, F.point(t, i + 2))]

    # old slot -> (new slot, map from the old chart to the new one)
    moved: Dict[Slot, Tuple[Slot, ProjectiveMap]] = {
        (t, (i + 1) % 3): ((u, 1), g),
        (t, (i + 2) % 3): ((t, 0), IDENTITY),
        (u, (j + 1) % 3): ((t, 1), g_inv),
        (u, (j + 2) % 3): ((u, 0), IDENTITY),
    }
    gluings = dict(F.gluings)
    gluings[a] = g if new_T.edges[a].slots[0][0] == t else g_inv
    touched = {T.side(t, i + 1), T.side(t, i + 2), T.side(u, j + 1), T.side(u, j + 2)}
    for e in touched:
        if not T.is_arc(e) or e == a:
            continue
        s0, s1 = T.edges[e].slots
        n0, m0 = moved.get(s0, (s0, IDENTITY))
        n1, m1 = moved.get(s1, (s1, IDENTITY))
        M = (m1 @ F.gluings[e] @ m0.inverse()).normalized()
        gluings[e] = M if new_T.edges[e].slots[0] == n0 else M.inverse().normalized()
    flipped = DevelopedFramedLocalSystem(new_T, tuple(tuple(tri) for tri in corners), gluings)
    return rechart(flipped, (t, u))


def rechart(F: DevelopedFramedLocalSystem, triangles: Sequence[int]) -> DevelopedFramedLocalSystem:
    """Move each listed triangle to the chart BASE_TRIPLE and refit the gluings on its sides.

    A refitted gluing is rebuilt from the corners it must match plus the image
    of the far corner, so corner agreement holds to rounding after any number
    of flips. Triangles whose framings coincide keep their chart.
    """
    T = F.base
    corners = [list(tri) for tri in F.corners]
    gluings = dict(F.gluings)
    touched = set()
    for t in sorted(set(triangles)):
        try:
            N = map_from_triples(corners[t], BASE_TRIPLE)
        except DegenerateTriple:
            continue
        N_inv = N.inverse()
        corners[t] = list(BASE_TRIPLE)
        for e in {T.side(t, i) for i in range(3)}:
            if not T.is_arc(e):
                continue
            (s0, _), (s1, _) = T.edges[e].slots
            g = gluings[e]
            if s0 == t:
                g = g @ N_inv
            if s1 == t:
                g = N @ g
            gluings[e] = g.normalized()
            touched.add(e)

    for e in sorted(touched):
        (s, i), (v, j) = T.edges[e].slots
        P, Q = corners[s], corners[v]
        far = apply(gluings[e], P[(i + 2) % 3])
        try:
            gluings[e] = map_from_triples((P[i], P[(i + 1) % 3], P[(i + 2) % 3]),
                                          (Q[(j + 1) % 3], Q[j], far))
        except DegenerateTriple:
            pass
    return DevelopedFramedLocalSystem(T, tuple(tuple(tri) for tri in corners), gluings)


def identity_system(T: IdealTriangulation, vertex_points: Sequence[ProjectivePoint]) -> DevelopedFramedLocalSystem:
    """Trivial holonomy with framing vertex_points[v] at marked point v (polygons)."""
    corners = tuple(tuple(vertex_points[v] for v in tri.corners) for tri in T.triangles)
    return DevelopedFramedLocalSystem(T, corners, {a: IDENTITY for a in T.arcs})


def corner_points(F: DevelopedFramedLocalSystem, v: int) -> List[ProjectivePoint]:
    return [F.point(t, c) for t, c in corners_of(F.base, v)]
