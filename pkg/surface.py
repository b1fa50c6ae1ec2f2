"""
Marked bordered surfaces, ideal triangulations, flips, exchange matrices and
signed/tagged triangulations.

A triangulation is stored as a triangle/side incidence table. Triangle
corners are listed counterclockwise; side i runs from corner i to corner
i + 1. Arcs carry ids 0..n-1 and boundary segments n..n+B-1. An arc glued to
itself inside one triangle marks that triangle self-folded.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import NotAPuncture, SelfFoldedInterior, SerializationError, UnsupportedSurface

logger = logging.getLogger(__name__)

Slot = Tuple[int, int]


class PointKind(Enum):
    PUNCTURE = "puncture"
    BOUNDARY = "boundary"


class EdgeKind(Enum):
    ARC = "arc"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class MarkedBorderedSurface:
    genus: int
    boundary: Tuple[int, ...] = ()
    punctures: int = 0

    def __post_init__(self):
        object.__setattr__(self, "boundary", tuple(int(k) for k in self.boundary))
        if self.genus < 0 or self.punctures < 0:
            raise ValueError("genus and puncture count must be non-negative")
        if any(k < 1 for k in self.boundary):
            raise ValueError("every boundary circle needs at least one marked point")
        if self.marked_count < 1:
            raise ValueError("a marked bordered surface needs at least one marked point")

    @property
    def marked_count(self) -> int:
        return sum(self.boundary) + self.punctures

    @property
    def is_closed(self) -> bool:
        return not self.boundary

    @property
    def is_degenerate(self) -> bool:
        """g = 0 with fewer than three marked points has no moduli."""
        return self.genus == 0 and self.marked_count < 3

    @property
    def signature(self) -> str:
        return f"g={self.genus} boundary={list(self.boundary)} punctures={self.punctures}"

    def to_json(self) -> Dict[str, Any]:
        return {"genus": self.genus, "boundary": list(self.boundary), "punctures": self.punctures}

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "MarkedBorderedSurface":
        try:
            return cls(int(obj.get("genus", 0)), tuple(obj.get("boundary", ())), int(obj.get("punctures", 0)))
        except (TypeError, ValueError) as e:
            raise SerializationError(f"bad surface description: {e}")


def rank(s: MarkedBorderedSurface) -> int:
    """n = 6g - 6 + sum(k + 3) over boundary circles and punctures (k = 0)."""
    return 6 * s.genus - 6 + sum(k + 3 for k in s.boundary) + 3 * s.punctures


@dataclass(frozen=True)
class MarkedPoint:
    index: int
    kind: PointKind
    circle: Optional[int] = None


@dataclass(frozen=True)
class Triangle:
    sides: Tuple[int, int, int]
    corners: Tuple[int, int, int]


@dataclass(frozen=True)
class Edge:
    index: int
    kind: EdgeKind
    slots: Tuple[Slot, ...]


@dataclass(frozen=True)
class SelfFolded:
    triangle: int
    interior: int
    loop: int
    puncture: int
    corner: int


@dataclass(frozen=True, eq=False)
class IdealTriangulation:
    surface: MarkedBorderedSurface
    points: Tuple[MarkedPoint, ...]
    triangles: Tuple[Triangle, ...]
    edges: Tuple[Edge, ...]

    @classmethod
    def build(cls, surface: MarkedBorderedSurface, points: Sequence[MarkedPoint],
              triangles: Sequence[Triangle], kinds: Sequence[EdgeKind]) -> "IdealTriangulation":
        """Derive edge incidences by scanning triangle sides."""
        slots: Dict[int, List[Slot]] = defaultdict(list)
        for t, tri in enumerate(triangles):
            for i, e in enumerate(tri.sides):
                slots[e].append((t, i))
        edges = tuple(Edge(e, kind, tuple(slots.get(e, ()))) for e, kind in enumerate(kinds))
        return cls(surface, tuple(points), tuple(triangles), edges)

    @property
    def arcs(self) -> List[int]:
        return [e.index for e in self.edges if e.kind is EdgeKind.ARC]

    @property
    def boundary_segments(self) -> List[int]:
        return [e.index for e in self.edges if e.kind is EdgeKind.BOUNDARY]

    @property
    def punctures(self) -> List[int]:
        return [p.index for p in self.points if p.kind is PointKind.PUNCTURE]

    @property
    def kinds(self) -> List[EdgeKind]:
        return [e.kind for e in self.edges]

    def is_arc(self, e: int) -> bool:
        return 0 <= e < len(self.edges) and self.edges[e].kind is EdgeKind.ARC

    def corner(self, t: int, i: int) -> int:
        return self.triangles[t].corners[i % 3]

    def side(self, t: int, i: int) -> int:
        return self.triangles[t].sides[i % 3]

    def other_slot(self, t: int, i: int) -> Optional[Slot]:
        """The other incidence of the edge on side i of triangle t."""
        edge = self.edges[self.side(t, i)]
        if len(edge.slots) != 2:
            return None
        first, second = edge.slots
        return second if first == (t, i % 3) else first

    def key(self) -> Tuple:
        """Canonical form up to triangle order and corner rotation."""
        rows = []
        for tri in self.triangles:
            pairs = list(zip(tri.sides, tri.corners))
            rows.append(min(tuple(pairs[r:] + pairs[:r]) for r in range(3)))
        return (self.surface, tuple(self.points), tuple(e.kind.value for e in self.edges), tuple(sorted(rows)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IdealTriangulation):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def to_json(self) -> Dict[str, Any]:
        return {
            "surface": self.surface.to_json(),
            "points": [{"id": p.index, "kind": p.kind.value, "circle": p.circle} for p in self.points],
            "triangles": [list(t.sides) for t in self.triangles],
            "vertices": [list(t.corners) for t in self.triangles],
            "edges": [{"id": e.index, "kind": e.kind.value} for e in self.edges],
        }

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "IdealTriangulation":
        try:
            surface = MarkedBorderedSurface.from_json(obj["surface"])
            points = [MarkedPoint(int(p["id"]), PointKind(p["kind"]), p.get("circle")) for p in obj["points"]]
            triangles = [Triangle(tuple(int(e) for e in sides), tuple(int(v) for v in corners))
                         for sides, corners in zip(obj["triangles"], obj["vertices"])]
            edges = sorted(obj["edges"], key=lambda e: int(e["id"]))
            if [int(e["id"]) for e in edges] != list(range(len(edges))):
                raise SerializationError("edge ids must be 0..E-1")
            kinds = [EdgeKind(e["kind"]) for e in edges]
        except (KeyError, TypeError, ValueError) as e:
            raise SerializationError(f"bad triangulation description: {e}")
        return cls.build(surface, points, triangles, kinds)


def self_folded(T: IdealTriangulation) -> List[SelfFolded]:
    found = []
    for t, tri in enumerate(T.triangles):
        for i in range(3):
            if tri.sides[i] == tri.sides[(i + 1) % 3]:
                c = (i + 1) % 3
                found.append(SelfFolded(t, tri.sides[i], tri.sides[(i + 2) % 3], tri.corners[c], c))
    return found


def is_self_folded_interior(T: IdealTriangulation, a: int) -> bool:
    return any(s.interior == a for s in self_folded(T))


def encircling(T: IdealTriangulation) -> Dict[int, Optional[int]]:
    """pi_T: interior arcs go to their encircling edge (None if it is a boundary segment)."""
    pi: Dict[int, Optional[int]] = {a: a for a in T.arcs}
    for s in self_folded(T):
        pi[s.interior] = s.loop if T.is_arc(s.loop) else None
    return pi


def star(T: IdealTriangulation, t: int, c: int) -> List[Tuple[int, int, int]]:
    """Walk counterclockwise around the marked point at corner c of triangle t.

    Returns (triangle, corner, side crossed to leave it) steps. For a
    puncture the walk closes up; for a boundary point it stops at a boundary
    segment.
    """
    steps = []
    seen = set()
    while (t, c) not in seen:
        seen.add((t, c))
        exit_side = (c - 1) % 3
        steps.append((t, c, exit_side))
        nxt = T.other_slot(t, exit_side)
        if nxt is None:
            break
        t, c = nxt
    return steps


def corners_of(T: IdealTriangulation, p: int) -> List[Slot]:
    return [(t, i) for t, tri in enumerate(T.triangles) for i in range(3) if tri.corners[i] == p]


def puncture_star(T: IdealTriangulation, p: int) -> List[Tuple[int, int, int]]:
    if not (0 <= p < len(T.points)) or T.points[p].kind is not PointKind.PUNCTURE:
        raise NotAPuncture(f"marked point {p} is not a puncture", {"point": p})
    corners = corners_of(T, p)
    if not corners:
        raise NotAPuncture(f"puncture {p} has no corners", {"point": p})
    return star(T, *corners[0])


def valency(T: IdealTriangulation, p: int) -> int:
    return len(puncture_star(T, p))


def validate(T: IdealTriangulation) -> List[str]:
    """Every violated invariant, as readable strings; empty means ok."""
    problems: List[str] = []
    s = T.surface
    n_edges = len(T.edges)
    for t, tri in enumerate(T.triangles):
        for i, e in enumerate(tri.sides):
            if not 0 <= e < n_edges:
                problems.append(f"triangle {t} side {i} references missing edge {e}")
        for v in tri.corners:
            if not 0 <= v < len(T.points):
                problems.append(f"triangle {t} references missing marked point {v}")
    if problems:
        return problems

    arcs, segments = T.arcs, T.boundary_segments
    if len(arcs) != rank(s):
        problems.append(f"arc count {len(arcs)} != rank {rank(s)}")
    if arcs != list(range(len(arcs))):
        problems.append("arcs must carry ids 0..n-1 ahead of boundary segments")
    for e in T.edges:
        expected = 2 if e.kind is EdgeKind.ARC else 1
        if len(e.slots) != expected:
            problems.append(f"{e.kind.value} {e.index} has {len(e.slots)} side incidences, expected {expected}")
    if 3 * len(T.triangles) != 2 * len(arcs) + len(segments):
        problems.append("Euler count violated: 3 #triangles != 2 #arcs + #boundary segments")

    for e in T.edges:
        if e.kind is EdgeKind.ARC and len(e.slots) == 2:
            (t, i), (u, j) = e.slots
            if T.corner(t, i) != T.corner(u, j + 1) or T.corner(t, i + 1) != T.corner(u, j):
                problems.append(f"arc {e.index} glues corners at different marked points")
        if e.kind is EdgeKind.BOUNDARY and len(e.slots) == 1:
            t, i = e.slots[0]
            for v in (T.corner(t, i), T.corner(t, i + 1)):
                if T.points[v].kind is not PointKind.BOUNDARY:
                    problems.append(f"boundary segment {e.index} ends at puncture {v}")

    punctures = [p for p in T.points if p.kind is PointKind.PUNCTURE]
    if len(punctures) != s.punctures:
        problems.append(f"{len(punctures)} punctures listed, surface has {s.punctures}")
    for c, k in enumerate(s.boundary):
        on_circle = [p for p in T.points if p.kind is PointKind.BOUNDARY and p.circle == c]
        if len(on_circle) != k:
            problems.append(f"boundary circle {c} lists {len(on_circle)} marked points, expected {k}")
    if len(T.points) != s.marked_count:
        problems.append("marked point table does not match the surface")
    if problems:
        return problems

    for p in T.points:
        corners = corners_of(T, p.index)
        if not corners:
            problems.append(f"marked point {p.index} is incident to no corner")
            continue
        if p.kind is PointKind.PUNCTURE:
            walk = star(T, *corners[0])
            closed = T.other_slot(walk[-1][0], walk[-1][2]) is not None
            if not closed or len(walk) != len(corners):
                problems.append(f"corners at puncture {p.index} do not form a single cycle")
        else:
            # start the fan at the corner whose clockwise side is a boundary segment
            starts = [(t, i) for t, i in corners if T.other_slot(t, i) is None]
            if len(starts) != 1:
                problems.append(f"boundary point {p.index} does not have a single fan")
                continue
            walk = star(T, *starts[0])
            if len(walk) != len(corners) or T.other_slot(walk[-1][0], walk[-1][2]) is not None:
                problems.append(f"corners at boundary point {p.index} do not form a single fan")

    chi = len(T.points) - len(T.edges) + len(T.triangles)
    if chi != 2 - 2 * s.genus - len(s.boundary):
        problems.append(f"Euler characteristic {chi} does not match the surface")
    return problems


def _rebuild(T: IdealTriangulation, triangles: Sequence[Triangle]) -> IdealTriangulation:
    return IdealTriangulation.build(T.surface, T.points, triangles, T.kinds)


def flip(T: IdealTriangulation, a: int) -> IdealTriangulation:
    """Replace arc a by the other diagonal of its quadrilateral; the new arc keeps id a."""
    if not T.is_arc(a):
        raise ValueError(f"edge {a} is not an arc")
    (t, i), (u, j) = T.edges[a].slots
    if t == u:
        raise SelfFoldedInterior(f"arc {a} is the interior edge of a self-folded triangle", {"arc": a})
    A, B, C = T.corner(t, i), T.corner(t, i + 1), T.corner(t, i + 2)
    D = T.corner(u, j + 2)
    e_bc, e_ca = T.side(t, i + 1), T.side(t, i + 2)
    e_ad, e_db = T.side(u, j + 1), T.side(u, j + 2)
    triangles = list(T.triangles)
    triangles[t] = Triangle((e_ca, e_ad, a), (C, A, D))
    triangles[u] = Triangle((e_db, e_bc, a), (D, B, C))
    return _rebuild(T, triangles)


def flippable(T: IdealTriangulation) -> List[int]:
    interiors = {s.interior for s in self_folded(T)}
    return [a for a in T.arcs if a not in interiors]


def random_flips(T: IdealTriangulation, count: int, rng: np.random.Generator) -> IdealTriangulation:
    for _ in range(count):
        choices = flippable(T)
        if not choices:
            break
        T = flip(T, int(rng.choice(choices)))
    return T


def relabel_arcs(T: IdealTriangulation, mapping: Dict[int, int]) -> IdealTriangulation:
    """Rename arcs by a permutation of 0..n-1 (unlisted arcs keep their id)."""
    full = {a: mapping.get(a, a) for a in T.arcs}
    if sorted(full.values()) != T.arcs:
        raise ValueError("arc relabeling must be a permutation")
    triangles = [Triangle(tuple(full.get(e, e) for e in tri.sides), tri.corners) for tri in T.triangles]
    return _rebuild(T, triangles)


def exchange_matrix(T: IdealTriangulation) -> np.ndarray:
    """eps[i][j] = +1 per non-self-folded triangle where pi(j) follows pi(i) counterclockwise."""
    n = len(T.arcs)
    eps = np.zeros((n, n), dtype=int)
    preimage: Dict[int, List[int]] = defaultdict(list)
    for a, image in encircling(T).items():
        if image is not None:
            preimage[image].append(a)
    folded = {s.triangle for s in self_folded(T)}
    for t, tri in enumerate(T.triangles):
        if t in folded:
            continue
        for i in range(3):
            x, y = tri.sides[i], tri.sides[(i + 1) % 3]
            for p in preimage.get(x, ()):
                for q in preimage.get(y, ()):
                    eps[p, q] += 1
                    eps[q, p] -= 1
    return eps


def mutate_matrix(eps: np.ndarray, k: int) -> np.ndarray:
    """Matrix mutation at k."""
    eps = np.asarray(eps, dtype=int)
    n = eps.shape[0]
    if not 0 <= k < n:
        raise IndexError(f"mutation index {k} out of range for size {n}")
    out = eps.copy()
    for i in range(n):
        for j in range(n):
            if i == k or j == k:
                out[i, j] = -eps[i, j]
            else:
                out[i, j] = eps[i, j] + np.sign(eps[i, k]) * max(0, eps[i, k] * eps[k, j])
    return out


# ---------------------------------------------------------------- signings


Signing = Dict[int, int]


def trivial_signing(T: IdealTriangulation) -> Signing:
    return {p: 1 for p in T.punctures}


@dataclass(frozen=True, eq=False)
class TaggedTriangulation:
    """A triangulation with a signing in canonical form."""

    triangulation: IdealTriangulation
    signs: Tuple[Tuple[int, int], ...] = field(default=())

    @property
    def signing(self) -> Signing:
        return dict(self.signs)

    def key(self) -> Tuple:
        return (self.triangulation.key(), self.signs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TaggedTriangulation):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def to_json(self) -> Dict[str, Any]:
        return {"triangulation": self.triangulation.to_json(),
                "signing": {str(p): s for p, s in self.signs}}

    @classmethod
    def from_json(cls, obj: Dict[str, Any]) -> "TaggedTriangulation":
        T = IdealTriangulation.from_json(obj["triangulation"])
        signing = {int(p): int(s) for p, s in obj.get("signing", {}).items()}
        return canonicalize(T, signing)[0]


def _complete(T: IdealTriangulation, signing: Optional[Signing]) -> Signing:
    full = trivial_signing(T)
    for p, s in (signing or {}).items():
        if p not in full:
            raise NotAPuncture(f"signing names marked point {p}, which is not a puncture", {"point": p})
        if s not in (1, -1):
            raise ValueError(f"sign at puncture {p} must be +1 or -1, got {s}")
        full[p] = s
    return full


def canonicalize(T: IdealTriangulation, signing: Optional[Signing] = None
                 ) -> Tuple[TaggedTriangulation, Dict[int, int]]:
    """Canonical representative of the tagged triangulation of (T, signing).

    At a valency-1 puncture with sign -1 the sign is reset to +1 and the
    interior and encircling arcs swap labels. Returns the tagged triangulation
    and the arc relabeling that was applied. A once-punctured monogon keeps
    its sign, because its encircling edge is a boundary segment.
    """
    full = _complete(T, signing)
    mapping: Dict[int, int] = {}
    for sf in self_folded(T):
        if full[sf.puncture] == -1 and T.is_arc(sf.loop):
            mapping[sf.interior] = sf.loop
            mapping[sf.loop] = sf.interior
            full[sf.puncture] = 1
    if mapping:
        T = relabel_arcs(T, mapping)
    return TaggedTriangulation(T, tuple(sorted(full.items()))), mapping


def tagged_flip(tau: TaggedTriangulation, a: int) -> TaggedTriangulation:
    tau, _ = canonicalize(tau.triangulation, tau.signing)
    T, signing = tau.triangulation, tau.signing
    for sf in self_folded(T):
        if sf.interior != a:
            continue
        signing[sf.puncture] = -signing[sf.puncture]
        if not T.is_arc(sf.loop):
            return TaggedTriangulation(T, tuple(sorted(signing.items())))
        # the other representative: label a now names the encircling arc
        swapped = relabel_arcs(T, {a: sf.loop, sf.loop: a})
        return canonicalize(flip(swapped, a), signing)[0]
    return canonicalize(flip(T, a), signing)[0]


# ---------------------------------------------------------------- catalog


def _boundary_points(k: int, circle: int, start: int) -> List[MarkedPoint]:
    return [MarkedPoint(start + i, PointKind.BOUNDARY, circle) for i in range(k)]


def _polygon(s: MarkedBorderedSurface) -> IdealTriangulation:
    k = s.boundary[0]
    n = rank(s)
    points = _boundary_points(k, 0, 0)

    def diagonal(i: int) -> int:
        # arc (0, i) for 2 <= i <= k - 2, otherwise a boundary segment
        if i == 1:
            return n
        if i == k - 1:
            return n + k - 1
        return i - 2

    triangles = [Triangle((diagonal(i), n + i, diagonal(i + 1)), (0, i, i + 1)) for i in range(1, k - 1)]
    kinds = [EdgeKind.ARC] * n + [EdgeKind.BOUNDARY] * k
    return IdealTriangulation.build(s, points, triangles, kinds)


def _punctured_polygon(s: MarkedBorderedSurface) -> IdealTriangulation:
    k = s.boundary[0]
    n = rank(s)
    points = _boundary_points(k, 0, 0) + [MarkedPoint(k, PointKind.PUNCTURE)]
    kinds = [EdgeKind.ARC] * n + [EdgeKind.BOUNDARY] * k
    if k == 1:
        # self-folded triangle (q, p, q) whose encircling edge is the boundary
        triangles = [Triangle((0, 0, 1), (0, 1, 0))]
    else:
        triangles = [Triangle((n + i, (i + 1) % k, i), (i, (i + 1) % k, k)) for i in range(k)]
    return IdealTriangulation.build(s, points, triangles, kinds)


def _annulus(s: MarkedBorderedSurface) -> IdealTriangulation:
    k1, k2 = s.boundary
    n = rank(s)
    outer = _boundary_points(k1, 0, 0)
    inner = _boundary_points(k2, 1, k1)
    link_a, link_b = k1 - 1, k1 + k2 - 1

    def radial(a: int) -> int:
        return a - 1

    def spoke(b: int) -> int:
        return k1 + b - 1

    triangles = []
    for a in range(k1):
        right = radial(a + 1) if a + 1 < k1 else link_a
        left = radial(a) if a > 0 else link_b
        triangles.append(Triangle((n + a, right, left), (a, (a + 1) % k1, k1)))
    for b in range(k2):
        first = spoke(b) if b > 0 else link_a
        second = spoke(b + 1) if b + 1 < k2 else link_b
        triangles.append(Triangle((n + k1 + b, first, second), (k1 + (b + 1) % k2, k1 + b, 0)))
    kinds = [EdgeKind.ARC] * n + [EdgeKind.BOUNDARY] * (k1 + k2)
    return IdealTriangulation.build(s, outer + inner, triangles, kinds)


def _punctured_torus(s: MarkedBorderedSurface) -> IdealTriangulation:
    points = [MarkedPoint(0, PointKind.PUNCTURE)]
    triangles = [Triangle((0, 1, 2), (0, 0, 0)), Triangle((0, 1, 2), (0, 0, 0))]
    return IdealTriangulation.build(s, points, triangles, [EdgeKind.ARC] * 3)


def _punctured_sphere(s: MarkedBorderedSurface) -> IdealTriangulation:
    p = s.punctures
    if p == 3:
        logger.warning("⚠️ three-punctured sphere has no moduli; results are reported but not guaranteed")
    points = [MarkedPoint(i, PointKind.PUNCTURE) for i in range(p)]
    top = {i: p + i - 2 for i in range(2, p - 1)}
    bottom = {i: p + (p - 3) + i - 2 for i in range(2, p - 1)}

    def equator(i: int) -> int:
        # edge (i, i+1) along the equator, with (p-1, 0) as id p-1
        return i

    def top_side(i: int) -> int:
        return equator(0) if i == 1 else (equator(p - 1) if i == p - 1 else top[i])

    def bottom_side(i: int) -> int:
        return equator(0) if i == 1 else (equator(p - 1) if i == p - 1 else bottom[i])

    triangles = []
    for i in range(1, p - 1):
        triangles.append(Triangle((top_side(i), equator(i), top_side(i + 1)), (0, i, i + 1)))
    for i in range(1, p - 1):
        triangles.append(Triangle((bottom_side(i + 1), equator(i), bottom_side(i)), (0, i + 1, i)))
    return IdealTriangulation.build(s, points, triangles, [EdgeKind.ARC] * rank(s))


def default_triangulation(s: MarkedBorderedSurface) -> IdealTriangulation:
    """Standard triangulations for the supported catalog of surfaces."""
    if s.genus == 0 and len(s.boundary) == 1 and s.punctures == 0 and s.boundary[0] >= 3:
        return _polygon(s)
    if s.genus == 0 and len(s.boundary) == 1 and s.punctures == 1:
        return _punctured_polygon(s)
    if s.genus == 0 and len(s.boundary) == 2 and s.punctures == 0:
        return _annulus(s)
    if s.genus == 1 and not s.boundary and s.punctures == 1:
        return _punctured_torus(s)
    if s.genus == 0 and not s.boundary and s.punctures >= 3:
        return _punctured_sphere(s)
    raise UnsupportedSurface(f"no standard triangulation for {s.signature}", {"surface": s.to_json()})


def catalog() -> List[MarkedBorderedSurface]:
    """Surfaces exercised by the rank-law walk."""
    surfaces = [MarkedBorderedSurface(0, (k,)) for k in range(3, 9)]
    surfaces += [MarkedBorderedSurface(0, (k,), 1) for k in range(1, 6)]
    surfaces += [MarkedBorderedSurface(0, (1, 1)), MarkedBorderedSurface(0, (2, 1))]
    surfaces += [MarkedBorderedSurface(1, (), 1), MarkedBorderedSurface(0, (), 4)]
    return surfaces
