"""
Cluster coordinates of framed local systems.

X_a is the cross ratio of the four framing points around arc a, read
counterclockwise from one end of a. The interior arc j of a self-folded
triangle with encircling arc k gets X_j = Y_j Y_k, which is the cross ratio
around k with the enclosed puncture framed by its other eigenline. Also here:
reconstruction from coordinates, mutation, signed and tagged coordinates,
and the search for a triangulation on which every coordinate is regular.
"""

import cmath
import heapq
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    BudgetExceeded,
    DegenerateInput,
    MutationPole,
    NonRegularInput,
    SelfFoldedInterior,
    SerializationError,
    TriangulationMismatch,
)
from framed import (
    BASE_TRIPLE,
    DevelopedFramedLocalSystem,
    conjugate,
    degeneracy,
    flip_system,
    holonomy_at,
    puncture_holonomy,
    relabel,
    sign_flip,
    transition,
)
from projective_geometry import (
    TAU_CLS,
    TAU_EQ,
    Degenerate,
    MapClass,
    ProjectiveMap,
    ProjectivePoint,
    Value,
    apply,
    classify,
    cross_ratio,
    fixed_lines,
    map_from_triples,
    solve_cross_ratio,
    value_from_json,
    value_to_json,
)
from surface import (
    IdealTriangulation,
    SelfFolded,
    Signing,
    TaggedTriangulation,
    canonicalize,
    exchange_matrix,
    flip,
    flippable,
    mutate_matrix,
    self_folded,
    trivial_signing,
)

logger = logging.getLogger(__name__)

CoordinateTuple = Dict[int, Value]


class EdgeClass(Enum):
    GOOD = "good"
    BAD = "bad"


def coordinates_to_json(X: CoordinateTuple) -> Dict[str, Any]:
    return {str(a): value_to_json(v) for a, v in sorted(X.items())}


def coordinates_from_json(obj: Dict[str, Any]) -> CoordinateTuple:
    try:
        return {int(a): value_from_json(v) for a, v in obj.items()}
    except (TypeError, ValueError) as e:
        raise SerializationError(f"bad coordinate tuple: {e}")


def is_regular(X: CoordinateTuple) -> bool:
    """Every value finite and nonzero."""
    for v in X.values():
        if isinstance(v, Degenerate) or v == 0 or not (math.isfinite(v.real) and math.isfinite(v.imag)):
            return False
    return True


def max_deviation(X: CoordinateTuple, Y: CoordinateTuple) -> float:
    """Largest relative difference; mismatched degenerate kinds count as infinite."""
    worst = 0.0
    for a in set(X) | set(Y):
        u, v = X.get(a), Y.get(a)
        if isinstance(u, Degenerate) or isinstance(v, Degenerate) or u is None or v is None:
            if u != v:
                return math.inf
            continue
        worst = max(worst, abs(u - v) / max(abs(u), abs(v), 1e-300))
    return worst


def _product(u: Value, v: Value) -> Value:
    if isinstance(u, Degenerate) or isinstance(v, Degenerate):
        kinds = {w for w in (u, v) if isinstance(w, Degenerate)}
        if Degenerate.INDETERMINATE in kinds or kinds == {Degenerate.ZERO, Degenerate.INFINITE}:
            return Degenerate.INDETERMINATE
        return kinds.pop()
    return u * v


def quadrilateral(F: DevelopedFramedLocalSystem, a: int) -> Tuple[ProjectivePoint, ...]:
    """(z1, z2, z3, z4) around arc a in the chart of its first incidence; a joins z1 and z3."""
    (t, i), (u, j) = F.base.edges[a].slots
    z2 = apply(transition(F, u, j), F.point(u, j + 2))
    return F.point(t, i), z2, F.point(t, i + 1), F.point(t, i + 2)


def _check_base(F: DevelopedFramedLocalSystem, T: Optional[IdealTriangulation]) -> IdealTriangulation:
    if T is not None and T != F.base:
        raise TriangulationMismatch("triangulation differs from the base of the framed system")
    return F.base


def coordinates(F: DevelopedFramedLocalSystem, T: Optional[IdealTriangulation] = None,
                tol: float = TAU_EQ, cls_tol: float = TAU_CLS) -> CoordinateTuple:
    T = _check_base(F, T)
    Y = {a: cross_ratio(*quadrilateral(F, a), tol=tol) for a in T.arcs}
    X = dict(Y)
    for sf in self_folded(T):
        if T.is_arc(sf.loop):
            X[sf.interior] = _product(_interior_ratio(F, sf, Y[sf.interior], cls_tol), Y[sf.loop])
    return X


def _interior_ratio(F: DevelopedFramedLocalSystem, sf: SelfFolded, raw: Value, cls_tol: float) -> Value:
    """Y of a self-folded interior arc, taken from the holonomy around the enclosed puncture.

    Y is the multiplier m of that holonomy or 1/m; the cross ratio read from
    the chart only picks which. Large |Y| puts two developed points close
    together, so the multiplier is the accurate value.
    """
    if isinstance(raw, Degenerate):
        return raw
    H = holonomy_at(F, sf.triangle, sf.corner)
    if classify(H, cls_tol) is not MapClass.SEMISIMPLE:
        return raw
    e1, e2 = (line.eigenvalue for line in fixed_lines(H, cls_tol))
    m = e1 / e2
    return min((m, 1 / m), key=lambda y: abs(cmath.log(y / raw)))


def _y_values(T: IdealTriangulation, X: CoordinateTuple) -> Dict[int, complex]:
    Y = {a: complex(X[a]) for a in T.arcs}
    for sf in self_folded(T):
        if T.is_arc(sf.loop):
            Y[sf.interior] = X[sf.interior] / X[sf.loop]
    return Y


def reconstruct(T: IdealTriangulation, X: CoordinateTuple) -> DevelopedFramedLocalSystem:
    """A developed system whose coordinates on T are X; every triangle is framed by (inf, -1, 0).

    Each gluing is fixed by the coordinate of its own arc alone, so the
    round trip error does not grow along chains of triangles.
    """
    missing = sorted(set(T.arcs) - set(X))
    if missing:
        raise NonRegularInput(f"no coordinate given for arcs {missing}", {"arcs": missing})
    extra = sorted(a for a in X if not T.is_arc(a))
    if extra:
        raise NonRegularInput(f"coordinates given for non-arcs {extra}", {"arcs": extra})
    if not is_regular({a: X[a] for a in T.arcs}):
        bad = [a for a in T.arcs if not is_regular({a: X[a]})]
        raise NonRegularInput(f"coordinates of arcs {bad} are not finite and nonzero", {"arcs": bad})
    Y = _y_values(T, X)

    P = BASE_TRIPLE
    gluings = {}
    for a in T.arcs:
        (t, i), (u, j) = T.edges[a].slots
        # X(z1, z2, z3, z4) = X(z3, z4, z1, z2): the far vertex seen from t
        w = solve_cross_ratio(P[(i + 1) % 3], P[(i + 2) % 3], P[i], Y[a])
        gluings[a] = map_from_triples((P[i], P[(i + 1) % 3], w), (P[(j + 1) % 3], P[j], P[(j + 2) % 3]))
    corners = tuple(BASE_TRIPLE for _ in T.triangles)
    return DevelopedFramedLocalSystem(T, corners, gluings)


# ---------------------------------------------------------------- signed and tagged


def signed_coordinates(F: DevelopedFramedLocalSystem, T: IdealTriangulation,
                       signing: Signing, cls_tol: float = TAU_CLS) -> CoordinateTuple:
    """Coordinates after moving the framing at every puncture signed -1 to its other eigenline."""
    _check_base(F, T)
    G = F
    for p, s in sorted(signing.items()):
        if s == -1:
            G = sign_flip(G, p, cls_tol)
    return coordinates(G)


def tagged_coordinates(F: DevelopedFramedLocalSystem, tau: TaggedTriangulation,
                       cls_tol: float = TAU_CLS) -> CoordinateTuple:
    return signed_coordinates(F, tau.triangulation, tau.signing, cls_tol)


# ---------------------------------------------------------------- mutation


def mutate(X: CoordinateTuple, eps: np.ndarray, k: int, tol: float = TAU_EQ) -> CoordinateTuple:
    """X_k -> 1/X_k and X_j -> X_j (1 + X_k^(-sgn eps_jk))^(-eps_jk)."""
    n = eps.shape[0]
    unknown = sorted(j for j in X if not 0 <= j < n)
    if unknown or not 0 <= k < n or k not in X:
        raise TriangulationMismatch(f"coordinates {unknown or [k]} do not match the {n} arcs of the exchange matrix",
                                    {"arcs": unknown or [k]})
    xk = X[k]
    if isinstance(xk, Degenerate) or xk == 0:
        raise NonRegularInput(f"cannot mutate at arc {k} with value {xk}", {"arc": k})
    out: CoordinateTuple = {}
    for j, xj in X.items():
        if j == k:
            out[j] = 1 / xk
            continue
        e = int(eps[j, k])
        if e == 0:
            out[j] = xj
            continue
        power = xk ** (-1 if e > 0 else 1)
        factor = 1 + power
        if abs(factor) <= tol * (1 + abs(power)):
            raise MutationPole(f"1 + X_{k}^{-1 if e > 0 else 1} vanishes", {"arc": k, "value": str(xk)})
        out[j] = _product(xj, factor ** (-e)) if isinstance(xj, Degenerate) else xj * factor ** (-e)
    return out


def mutate_sequence(X: CoordinateTuple, eps: np.ndarray, ks: Sequence[int]
                    ) -> Tuple[CoordinateTuple, np.ndarray]:
    for k in ks:
        X = mutate(X, eps, k)
        eps = mutate_matrix(eps, k)
    return X, eps


def pentagon_orbit(X: CoordinateTuple, eps: np.ndarray, a: int, b: int) -> List[CoordinateTuple]:
    """The six tuples met by alternating mutations a, b, a, b, a."""
    orbit = [dict(X)]
    for k in (a, b, a, b, a):
        X, eps = mutate_sequence(X, eps, [k])
        orbit.append(X)
    return orbit


def flip_consistency(F: DevelopedFramedLocalSystem, T: Optional[IdealTriangulation], k: int) -> float:
    """Deviation between the mutated tuple and the coordinates recomputed after flipping k."""
    T = _check_base(F, T)
    predicted = mutate(coordinates(F), exchange_matrix(T), k)
    actual = coordinates(flip_system(F, k), flip(T, k))
    return max_deviation(predicted, actual)


def equivariance_defect(F: DevelopedFramedLocalSystem, g: ProjectiveMap, mapping: Dict[int, int],
                        tol: float = TAU_EQ) -> float:
    """Coordinates are PGL_2-invariant and follow arc relabelings; returns the largest violation."""
    X = coordinates(F, tol=tol)
    Y = coordinates(relabel(conjugate(F, g), mapping), tol=tol)
    return max_deviation({mapping.get(a, a): v for a, v in X.items()}, Y)


# ---------------------------------------------------------------- good triangulations


def edge_class(F: DevelopedFramedLocalSystem, e: int, tol: float = TAU_EQ) -> EdgeClass:
    """Bad when the framings at the two ends agree under transport along e."""
    t, i = F.base.edges[e].slots[0]
    return EdgeClass.BAD if F.point(t, i).same_as(F.point(t, i + 1), tol) else EdgeClass.GOOD


def edge_report(F: DevelopedFramedLocalSystem, tol: float = TAU_EQ) -> Dict[int, EdgeClass]:
    return {e.index: edge_class(F, e.index, tol) for e in F.base.edges}


def _good_count(F: DevelopedFramedLocalSystem, tol: float) -> int:
    return sum(1 for a in F.base.arcs if edge_class(F, a, tol) is EdgeClass.GOOD)


def _moves(F: DevelopedFramedLocalSystem, tol: float) -> List[Tuple[int, ...]]:
    """Single flips of Bad arcs, then pairs of arcs sharing a triangle (pentagon moves)."""
    T = F.base
    free = flippable(T)
    bad = {a for a in T.arcs if edge_class(F, a, tol) is EdgeClass.BAD}
    moves: List[Tuple[int, ...]] = [(a,) for a in free if a in bad]
    for a in free:
        neighbours = set()
        for t, _ in T.edges[a].slots:
            neighbours.update(e for e in T.triangles[t].sides if T.is_arc(e) and e != a)
        for b in sorted(neighbours):
            if a in bad or b in bad:
                moves.append((a, b))
    return moves


@dataclass(frozen=True)
class FindGoodResult:
    tagged: TaggedTriangulation
    coordinates: CoordinateTuple
    system: DevelopedFramedLocalSystem
    flips: Tuple[int, ...]
    toggled: Tuple[int, ...]
    expanded: int

    def to_json(self) -> Dict[str, Any]:
        return {
            "tagged_triangulation": self.tagged.to_json(),
            "coordinates": coordinates_to_json(self.coordinates),
            "flips": list(self.flips),
            "sign_flips": list(self.toggled),
            "expanded": self.expanded,
        }


def _search(G0: DevelopedFramedLocalSystem, budget: int, patience: Optional[int],
            tol: float) -> Tuple[Optional[Tuple[DevelopedFramedLocalSystem, Tuple[int, ...]]], int]:
    """Best-first search over flips, most Good arcs first, ties broken by the move sequence."""
    n = len(G0.base.arcs)
    counter = 0
    payload = {0: G0}
    heap = [(-_good_count(G0, tol), 0, (), 0)]
    visited = {G0.base.key()}
    best, stale, expanded = -1, 0, 0
    while heap and expanded < budget:
        neg, _, path, idx = heapq.heappop(heap)
        G = payload.pop(idx)
        good = -neg
        if good == n:
            return (G, path), expanded
        expanded += 1
        if good > best:
            best, stale = good, 0
        else:
            stale += 1
            if patience is not None and stale >= patience:
                break
        for move in _moves(G, tol):
            H = G
            try:
                for a in move:
                    H = flip_system(H, a)
            except SelfFoldedInterior:
                continue
            key = H.base.key()
            if key in visited:
                continue
            visited.add(key)
            counter += 1
            payload[counter] = H
            heapq.heappush(heap, (-_good_count(H, tol), len(path) + len(move), path + move, counter))
    logger.debug(f"search stalled at {best}/{n} good arcs after {expanded} expansions")
    return None, expanded


def find_good(F: DevelopedFramedLocalSystem, T0: Optional[IdealTriangulation] = None,
              budget_factor: int = 20, tol: float = TAU_EQ, cls_tol: float = TAU_CLS) -> FindGoodResult:
    """A tagged triangulation on which every coordinate of F is finite and nonzero.

    Flips are explored best-first by the number of Good arcs. On a closed
    surface a stalled search toggles the sign at the lowest puncture with
    semisimple holonomy that has not been toggled yet, and starts over from
    T0. Surfaces with boundary always end with the trivial signing.
    """
    T0 = _check_base(F, T0)
    verdict = degeneracy(F, tol, cls_tol)
    if verdict.degenerate:
        raise DegenerateInput(f"framed system is degenerate ({verdict.kind.value})", verdict.to_json())
    n = len(T0.arcs)
    budget = max(budget_factor * n * n, 1)
    closed = T0.surface.is_closed
    patience = 4 * n + 4 if closed else None
    candidates = [p for p in T0.punctures if classify(puncture_holonomy(F, p), cls_tol) is MapClass.SEMISIMPLE]

    toggled: List[int] = []
    G0 = F
    spent = 0
    while True:
        if closed and not candidates:
            patience = None
        found, expanded = _search(G0, budget - spent, patience, tol)
        spent += expanded
        if found is not None:
            break
        if not closed or not candidates or spent >= budget:
            raise BudgetExceeded(f"no all-Good triangulation within {budget} moves",
                                 {"budget": budget, "spent": spent, "sign_flips": toggled})
        p = candidates.pop(0)
        toggled.append(p)
        spent += 1
        logger.warning(f"⚠️ search stalled, flipping the sign at puncture {p}")
        G0 = sign_flip(G0, p, cls_tol)

    G, path = found
    unsigned = F
    for a in path:
        unsigned = flip_system(unsigned, a)
    signing = trivial_signing(T0)
    for p in toggled:
        signing[p] = -1
    tau, mapping = canonicalize(G.base, signing)
    X = coordinates(G)
    if not is_regular(X):
        raise BudgetExceeded("search ended on a triangulation with irregular coordinates",
                             {"coordinates": coordinates_to_json(X)})
    logger.info(f"✅ all {n} arcs good after {len(path)} flips and {len(toggled)} sign flips")
    return FindGoodResult(tau, X, relabel(unsigned, mapping), path, tuple(toggled), spent)
