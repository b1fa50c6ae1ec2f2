"""
Arithmetic on the projective line P^1 and the Moebius group PGL_2(C).

Points are homogeneous pairs (a, b) with affine value z = a / b, so the
point at infinity is (1, 0). Every test for coincidence is projective and
scale free: two points agree when |a_p b_q - a_q b_p| <= tau_eq |p| |q|.
Cross ratios are ratios of such 2x2 determinants, which keeps infinity
free of special cases.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import DegenerateTriple, IdentityMap

logger = logging.getLogger(__name__)

TAU_EQ = 1e-9
TAU_CLS = 1e-8


class Degenerate(Enum):
    """In-band results of a cross ratio whose determinants vanish."""

    ZERO = "zero"
    INFINITE = "inf"
    INDETERMINATE = "ind"


class MapClass(Enum):
    IDENTITY = "identity"
    PARABOLIC = "parabolic"
    SEMISIMPLE = "semisimple"


Value = Union[complex, Degenerate]


def _check_finite(*values: complex) -> None:
    for v in values:
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"non-finite component {v!r}")


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A point of P^1 given by homogeneous coordinates (a, b), z = a / b."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        _check_finite(self.a, self.b)
        if self.a == 0 and self.b == 0:
            raise ValueError("(0, 0) is not a point of P^1")

    @classmethod
    def finite(cls, z: complex) -> "ProjectivePoint":
        return cls(complex(z), 1.0)

    @classmethod
    def from_value(cls, z: Optional[complex]) -> "ProjectivePoint":
        """None stands for the point at infinity."""
        return INFINITY if z is None else cls.finite(z)

    def norm(self) -> float:
        return math.hypot(abs(self.a), abs(self.b))

    def affine(self) -> Optional[complex]:
        """Affine coordinate a / b, or None at infinity."""
        if self.b == 0:
            return None
        return self.a / self.b

    def is_normal(self) -> bool:
        return (self.a == 1 and abs(self.b) <= 1) or (self.b == 1 and abs(self.a) < 1)

    def normalized(self) -> "ProjectivePoint":
        """Scale the largest-modulus component to exactly 1."""
        if self.is_normal():
            return self
        if abs(self.a) >= abs(self.b):
            return ProjectivePoint(1.0, self.b / self.a)
        return ProjectivePoint(self.a / self.b, 1.0)

    def same_as(self, other: "ProjectivePoint", tol: float = TAU_EQ) -> bool:
        return abs(bracket(self, other)) <= tol * self.norm() * other.norm()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return self.same_as(other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        z = self.affine()
        return "ProjectivePoint(inf)" if z is None else f"ProjectivePoint({z:.6g})"


INFINITY = ProjectivePoint(1.0, 0.0)
ZERO = ProjectivePoint(0.0, 1.0)
ONE = ProjectivePoint(1.0, 1.0)


def bracket(p: ProjectivePoint, q: ProjectivePoint) -> complex:
    """d(p, q) = a_p b_q - a_q b_p."""
    return p.a * q.b - q.a * p.b


def projective_distance(p: ProjectivePoint, q: ProjectivePoint) -> float:
    """Chordal distance |d(p, q)| / (|p| |q|), in [0, 1]."""
    return abs(bracket(p, q)) / (p.norm() * q.norm())


@dataclass(frozen=True, eq=False)
class ProjectiveMap:
    """Moebius map given by a nonsingular matrix [[a, b], [c, d]]."""

    a: complex
    b: complex
    c: complex
    d: complex
    normal: bool = field(default=False, repr=False)

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        _check_finite(self.a, self.b, self.c, self.d)
        if self.det == 0:
            raise ValueError("singular matrix is not a projective map")

    @classmethod
    def from_matrix(cls, m: Any) -> "ProjectiveMap":
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def entries(self) -> Tuple[complex, complex, complex, complex]:
        return (self.a, self.b, self.c, self.d)

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def normalized(self) -> "ProjectiveMap":
        """det = 1 representative; the sign makes the first largest entry point into Re > 0."""
        if self.normal:
            return self
        s = cmath.sqrt(self.det)
        entries = [x / s for x in self.entries()]
        pivot = max(entries, key=abs)
        if pivot.real < 0 or (pivot.real == 0 and pivot.imag < 0):
            entries = [-x for x in entries]
        return ProjectiveMap(*entries, normal=True)

    def compose(self, other: "ProjectiveMap") -> "ProjectiveMap":
        """self after other."""
        return ProjectiveMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    __matmul__ = compose

    def inverse(self) -> "ProjectiveMap":
        # the adjugate is the inverse up to scale
        return ProjectiveMap(self.d, -self.b, -self.c, self.a)

    def conjugate_by(self, g: "ProjectiveMap") -> "ProjectiveMap":
        """g self g^-1."""
        return g.compose(self).compose(g.inverse())

    def same_as(self, other: "ProjectiveMap", tol: float = TAU_EQ) -> bool:
        u = np.array(self.entries())
        v = np.array(other.entries())
        wedge = np.outer(u, v) - np.outer(v, u)
        return float(np.max(np.abs(wedge))) <= tol * np.linalg.norm(u) * np.linalg.norm(v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProjectiveMap):
            return NotImplemented
        return self.same_as(other)

    __hash__ = None  # type: ignore[assignment]


IDENTITY = ProjectiveMap(1.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class FixedLine:
    point: ProjectivePoint
    eigenvalue: complex


def apply(m: ProjectiveMap, p: ProjectivePoint) -> ProjectivePoint:
    return ProjectivePoint(m.a * p.a + m.b * p.b, m.c * p.a + m.d * p.b)


def cross_ratio(p1: ProjectivePoint, p2: ProjectivePoint, p3: ProjectivePoint,
                p4: ProjectivePoint, tol: float = TAU_EQ) -> Value:
    """(z1 - z2)(z3 - z4) / ((z2 - z3)(z1 - z4)), computed with determinants."""
    d12, d34 = bracket(p1, p2), bracket(p3, p4)
    d23, d14 = bracket(p2, p3), bracket(p1, p4)
    n1, n2, n3, n4 = p1.norm(), p2.norm(), p3.norm(), p4.norm()
    num_zero = abs(d12) <= tol * n1 * n2 or abs(d34) <= tol * n3 * n4
    den_zero = abs(d23) <= tol * n2 * n3 or abs(d14) <= tol * n1 * n4
    if num_zero and den_zero:
        return Degenerate.INDETERMINATE
    if num_zero:
        return Degenerate.ZERO
    if den_zero:
        return Degenerate.INFINITE
    return (d12 * d34) / (d23 * d14)


def solve_cross_ratio(p1: ProjectivePoint, p2: ProjectivePoint, p3: ProjectivePoint,
                      x: complex) -> ProjectivePoint:
    """The point p4 with cross_ratio(p1, p2, p3, p4) = x."""
    d12, d23 = bracket(p1, p2), bracket(p2, p3)
    return ProjectivePoint(x * d23 * p1.a - d12 * p3.a, x * d23 * p1.b - d12 * p3.b)


def _frame(triple: Sequence[ProjectivePoint], tol: float) -> np.ndarray:
    """Matrix sending inf, 0, 1 to the three points."""
    p1, p2, p3 = triple
    d12 = bracket(p1, p2)
    pairs = ((p1, p2), (p2, p3), (p1, p3))
    if any(abs(bracket(p, q)) <= tol * p.norm() * q.norm() for p, q in pairs):
        raise DegenerateTriple("triple has a repeated point", {"triple": [repr(p) for p in triple]})
    alpha = bracket(p3, p2) / d12
    beta = bracket(p1, p3) / d12
    return np.array([[alpha * p1.a, beta * p2.a], [alpha * p1.b, beta * p2.b]], dtype=complex)


def map_from_triples(src: Sequence[ProjectivePoint], dst: Sequence[ProjectivePoint],
                     tol: float = TAU_EQ) -> ProjectiveMap:
    """The unique map g with g(src[i]) = dst[i]."""
    a_src = _frame(src, tol)
    a_dst = _frame(dst, tol)
    return ProjectiveMap.from_matrix(a_dst @ np.linalg.inv(a_src)).normalized()


def classify(m: ProjectiveMap, tol: float = TAU_CLS) -> MapClass:
    """Identity, Parabolic or Semisimple; tol = 0 gives exact tests."""
    n = m.normalized()
    off = max(abs(n.b), abs(n.c), abs(n.a - n.d))
    if off <= tol * n.norm():
        return MapClass.IDENTITY
    if abs(n.trace ** 2 - 4 * n.det) <= tol * abs(n.det):
        return MapClass.PARABOLIC
    return MapClass.SEMISIMPLE


def _eigenvector(n: ProjectiveMap, lam: complex) -> ProjectivePoint:
    v1 = (n.b, lam - n.a)
    v2 = (lam - n.d, n.c)
    if math.hypot(abs(v1[0]), abs(v1[1])) >= math.hypot(abs(v2[0]), abs(v2[1])):
        return ProjectivePoint(*v1).normalized()
    return ProjectivePoint(*v2).normalized()


def fixed_lines(m: ProjectiveMap, tol: float = TAU_CLS) -> List[FixedLine]:
    """Fixed points with the eigenvalues of the det-1 representative."""
    kind = classify(m, tol)
    if kind is MapClass.IDENTITY:
        raise IdentityMap("scalar matrix fixes every point")
    n = m.normalized()
    tr = n.trace
    if kind is MapClass.PARABOLIC:
        lam = tr / 2
        return [FixedLine(_eigenvector(n, lam), lam)]
    s = cmath.sqrt(tr * tr - 4 * n.det)
    big = (tr + s) / 2 if abs(tr + s) >= abs(tr - s) else (tr - s) / 2
    small = n.det / big
    return [FixedLine(_eigenvector(n, big), big), FixedLine(_eigenvector(n, small), small)]


def complex_to_json(z: complex) -> Dict[str, float]:
    return {"re": float(z.real), "im": float(z.imag)}


def complex_from_json(obj: Any) -> complex:
    if isinstance(obj, dict):
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0)))
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return complex(float(obj[0]), float(obj[1]))
    return complex(obj)


def value_to_json(v: Value) -> Any:
    if isinstance(v, Degenerate):
        return v.value
    return complex_to_json(v)


def value_from_json(obj: Any) -> Value:
    if isinstance(obj, str):
        return Degenerate(obj)
    return complex_from_json(obj)


def point_to_json(p: ProjectivePoint) -> List[Dict[str, float]]:
    n = p.normalized()
    return [complex_to_json(n.a), complex_to_json(n.b)]


def point_from_json(obj: Any) -> ProjectivePoint:
    return ProjectivePoint(complex_from_json(obj[0]), complex_from_json(obj[1]))


def map_to_json(m: ProjectiveMap) -> List[List[Dict[str, float]]]:
    n = m.normalized()
    return [[complex_to_json(n.a), complex_to_json(n.b)], [complex_to_json(n.c), complex_to_json(n.d)]]


def map_from_json(obj: Any) -> ProjectiveMap:
    return ProjectiveMap(complex_from_json(obj[0][0]), complex_from_json(obj[0][1]),
                         complex_from_json(obj[1][0]), complex_from_json(obj[1][1]))
