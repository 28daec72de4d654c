"""Triangles, kites and their unfoldings.

The billiard table is a triangle ABC with the unit side AB on the x-axis,
A = (0, 0) carrying the angle alpha and B = (1, 0) carrying beta.  Completing
the triangle across AB gives the kite whose unfolding is a sequence of
rotations by +-2*alpha about the alpha-vertex or +-2*beta about the
beta-vertex.

Vertex labels are 0, 1, 2 for A, B, C.  An edge is labelled by the vertex
opposite to it, so edge 0 is BC, edge 1 is CA and edge 2 is AB; reflecting a
triangle copy across its edge ``e`` keeps every label and moves only the
vertex labelled ``e``.
"""
from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .errors import AdmissibilityError, InsufficientData

VERTEX_NAMES = ("A", "B", "C")
A, B, C = 0, 1, 2

Point = tuple  # (x, y); floats or mpmath.mpf


@dataclass(frozen=True)
class TriangleShape:
    alpha: float
    beta: float
    delta: float
    # Exact rational multiples of pi when known; used by extended precision.
    alpha_pi: Fraction | None = None
    beta_pi: Fraction | None = None

    @property
    def gamma(self) -> float:
        return math.pi - self.alpha - self.beta

    def angle_at(self, vertex: int) -> float:
        return (self.alpha, self.beta, self.gamma)[vertex]

    @property
    def alpha_side(self) -> float:
        """Length of AC, the side adjacent to the alpha-vertex."""
        return math.sin(self.beta) / math.sin(self.alpha + self.beta)

    def vertices(self) -> tuple[Point, Point, Point]:
        r = self.alpha_side
        return (0.0, 0.0), (1.0, 0.0), (r * math.cos(self.alpha), r * math.sin(self.alpha))

    def mp_angles(self) -> tuple:
        a = mpmath.pi * self.alpha_pi.numerator / self.alpha_pi.denominator if self.alpha_pi is not None else mpmath.mpf(self.alpha)
        b = mpmath.pi * self.beta_pi.numerator / self.beta_pi.denominator if self.beta_pi is not None else mpmath.mpf(self.beta)
        return a, b

    def mp_vertices(self) -> tuple[Point, Point, Point]:
        """Vertices at the current mpmath working precision."""
        a, b = self.mp_angles()
        r = mpmath.sin(b) / mpmath.sin(a + b)
        zero, one = mpmath.mpf(0), mpmath.mpf(1)
        return (zero, zero), (one, zero), (r * mpmath.cos(a), r * mpmath.sin(a))

    def sector(self, vertex: int) -> tuple[float, float]:
        """Directions (global angles) bounding the open sector at ``vertex``."""
        pts = self.vertices()
        v = pts[vertex]
        angles = sorted(math.atan2(pts[u][1] - v[1], pts[u][0] - v[0]) for u in range(3) if u != vertex)
        return angles[0], angles[1]

    def to_json(self) -> dict:
        out = {"alpha": self.alpha, "beta": self.beta, "delta": self.delta}
        if self.alpha_pi is not None:
            out["alpha_pi"] = str(self.alpha_pi)
        if self.beta_pi is not None:
            out["beta_pi"] = str(self.beta_pi)
        return out

    def shape_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def make_triangle(alpha: float, beta: float, delta: float, *,
                  alpha_pi: Fraction | None = None,
                  beta_pi: Fraction | None = None) -> TriangleShape:
    for name, value in (("alpha", alpha), ("beta", beta), ("delta", delta)):
        if not math.isfinite(value):
            raise AdmissibilityError(f"{name} must be finite, got {value!r}")
    if delta <= 0:
        raise AdmissibilityError(f"delta must be positive, got {delta!r}")
    if not alpha > delta:
        raise AdmissibilityError(f"alpha={alpha!r} must exceed delta={delta!r}")
    if not beta > delta:
        raise AdmissibilityError(f"beta={beta!r} must exceed delta={delta!r}")
    if not alpha + beta < math.pi - delta:
        raise AdmissibilityError(
            f"alpha+beta={alpha + beta!r} must be below pi-delta={math.pi - delta!r}")
    return TriangleShape(float(alpha), float(beta), float(delta), alpha_pi, beta_pi)


def rational_triangle(alpha_pi: Fraction, beta_pi: Fraction, delta: float = 0.01) -> TriangleShape:
    """Triangle with angles given as rational multiples of pi."""
    alpha_pi, beta_pi = Fraction(alpha_pi), Fraction(beta_pi)
    return make_triangle(float(alpha_pi) * math.pi, float(beta_pi) * math.pi, delta,
                         alpha_pi=alpha_pi, beta_pi=beta_pi)


# -- plane helpers (arithmetic only, so they work for floats and mpf) --------

def cross(o: Point, p: Point, q: Point):
    """z-component of (p - o) x (q - o)."""
    return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])


def reflect_point(p: Point, a: Point, b: Point) -> Point:
    """Mirror image of ``p`` across the line through ``a`` and ``b``."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)
    fx, fy = a[0] + t * dx, a[1] + t * dy
    return (2 * fx - p[0], 2 * fy - p[1])


def rotate_about(p: Point, pivot: Point, angle: float) -> Point:
    c, s = math.cos(angle), math.sin(angle)
    x, y = p[0] - pivot[0], p[1] - pivot[1]
    return (pivot[0] + c * x - s * y, pivot[1] + s * x + c * y)


def dist(p: Point, q: Point):
    return math.hypot(p[0] - q[0], p[1] - q[1])


# -- kite unfolding ------------------------------------------------------------

@dataclass(frozen=True)
class RotationLabel:
    pivot: str  # "A" (alpha-vertex) or "B" (beta-vertex)
    sign: int

    def __post_init__(self):
        if self.pivot not in ("A", "B") or self.sign not in (1, -1):
            raise ValueError(f"bad rotation label {self.pivot!r}{self.sign!r}")

    def amount(self, shape: TriangleShape) -> float:
        return self.sign * 2 * (shape.alpha if self.pivot == "A" else shape.beta)

    def __str__(self) -> str:
        return self.pivot + ("+" if self.sign > 0 else "-")

    @classmethod
    def parse(cls, text: str) -> "RotationLabel":
        text = text.strip()
        if len(text) != 2 or text[1] not in "+-":
            raise ValueError(f"bad move {text!r}; expected one of A+, A-, B+, B-")
        return cls(text[0], 1 if text[1] == "+" else -1)


ALL_MOVES = tuple(RotationLabel(p, s) for p in ("A", "B") for s in (1, -1))


@dataclass(frozen=True)
class Combinatorics:
    """Signed rotation labels of a kite unfolding.

    A move immediately undoing the previous one (same pivot, opposite sign)
    would send the orbit back through the side it just crossed, so such
    sequences are rejected.
    """
    moves: tuple[RotationLabel, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "moves", tuple(self.moves))
        for prev, nxt in zip(self.moves, self.moves[1:]):
            if prev.pivot == nxt.pivot and prev.sign == -nxt.sign:
                raise ValueError(f"move {nxt} undoes {prev}")

    def __len__(self) -> int:
        return len(self.moves)

    @property
    def kites(self) -> int:
        """Number of kites in the unfolding (moves + 1)."""
        return len(self.moves) + 1

    def frequency(self) -> tuple[int, int]:
        """Kite angle as (m, l) with angle = m*alpha + l*beta."""
        m = sum(2 * mv.sign for mv in self.moves if mv.pivot == "A")
        l = sum(2 * mv.sign for mv in self.moves if mv.pivot == "B")
        return m, l

    def to_json(self) -> list[str]:
        return [str(m) for m in self.moves]

    @classmethod
    def from_json(cls, data: Iterable[str]) -> "Combinatorics":
        return cls(tuple(RotationLabel.parse(s) for s in data))

    @classmethod
    def parse(cls, text: str) -> "Combinatorics":
        return cls.from_json(text.replace(",", " ").split())


def random_combinatorics(rng: random.Random, length: int) -> Combinatorics:
    moves: list[RotationLabel] = []
    while len(moves) < length:
        mv = rng.choice(ALL_MOVES)
        if moves and moves[-1].pivot == mv.pivot and moves[-1].sign == -mv.sign:
            continue
        moves.append(mv)
    return Combinatorics(tuple(moves))


@dataclass(frozen=True)
class KiteFrame:
    alpha_vertex: Point
    beta_vertex: Point
    # (plus, minus): the side vertices at kite_angle + alpha and
    # kite_angle - alpha as seen from the alpha-vertex.
    side_vertices: tuple[Point, Point]
    kite_angle: float

    def points(self) -> tuple[Point, Point, Point, Point]:
        return (self.alpha_vertex, self.beta_vertex) + tuple(self.side_vertices)

    def to_json(self) -> dict:
        return {
            "alpha_vertex": list(self.alpha_vertex),
            "beta_vertex": list(self.beta_vertex),
            "side_vertices": [list(p) for p in self.side_vertices],
            "kite_angle": self.kite_angle,
        }

    @classmethod
    def from_json(cls, data: dict) -> "KiteFrame":
        return cls(tuple(data["alpha_vertex"]), tuple(data["beta_vertex"]),
                   tuple(tuple(p) for p in data["side_vertices"]), data["kite_angle"])


def standard_kite(shape: TriangleShape) -> KiteFrame:
    _, _, c = shape.vertices()
    return KiteFrame((0.0, 0.0), (1.0, 0.0), (c, (c[0], -c[1])), 0.0)


def unfold_step(frame: KiteFrame, move: RotationLabel, shape: TriangleShape) -> KiteFrame:
    theta = move.amount(shape)
    angle = (frame.kite_angle + theta) % (2 * math.pi)
    plus, minus = frame.side_vertices
    if move.pivot == "A":
        a = frame.alpha_vertex
        b = (a[0] + math.cos(angle), a[1] + math.sin(angle))
        pivot = a
    else:
        b = frame.beta_vertex
        a = (b[0] - math.cos(angle), b[1] - math.sin(angle))
        pivot = b
    sides = (rotate_about(plus, pivot, theta), rotate_about(minus, pivot, theta))
    return KiteFrame(a, b, sides, angle)


def unfold_sequence(shape: TriangleShape, comb: Combinatorics) -> list[KiteFrame]:
    frames = [standard_kite(shape)]
    for mv in comb.moves:
        frames.append(unfold_step(frames[-1], mv, shape))
    return frames


# -- triangle unfolding across edges -------------------------------------------

@dataclass(frozen=True)
class TriangleFrame:
    vertices: tuple[Point, Point, Point]  # indexed by label A, B, C
    parity: int  # +1 for orientation-preserving copies
    next_edge: int | None = None

    def reflect(self, edge: int) -> "TriangleFrame":
        a, b = (self.vertices[i] for i in range(3) if i != edge)
        verts = list(self.vertices)
        verts[edge] = reflect_point(self.vertices[edge], a, b)
        return TriangleFrame(tuple(verts), -self.parity)


def triangle_unfold(shape: TriangleShape, edges: Sequence[int]) -> list[TriangleFrame]:
    frames = [TriangleFrame(shape.vertices(), 1)]
    for e in edges:
        if e not in (0, 1, 2):
            raise ValueError(f"edge label must be 0, 1 or 2, got {e!r}")
        frames[-1] = TriangleFrame(frames[-1].vertices, frames[-1].parity, e)
        frames.append(frames[-1].reflect(e))
    return frames


def kite_moves_from_edges(edges: Sequence[int], parity: int = 1) -> list[RotationLabel | None]:
    """Kite move produced by each triangle reflection (None for a crossing of AB).

    Crossing CA rotates the kite about the alpha-vertex by parity*2*alpha and
    crossing BC rotates about the beta-vertex by -parity*2*beta, where parity
    is the orientation of the triangle copy being left.
    """
    moves: list[RotationLabel | None] = []
    for e in edges:
        if e == B:
            moves.append(RotationLabel("A", parity))
        elif e == A:
            moves.append(RotationLabel("B", -parity))
        else:
            moves.append(None)
        parity = -parity
    return moves


def side_role(parity: int) -> int:
    """Index into ``KiteFrame.side_vertices`` holding C for a copy of this parity."""
    return 0 if parity > 0 else 1


# -- physical billiard in the fixed triangle -----------------------------------

def billiard_step(verts: Sequence[Point], p: Point, d: Point, on_edge: int | None):
    """Advance from ``p`` along ``d`` to the next side; return (point, edge, s, t).

    ``s`` is the position along the hit side measured from its first
    endpoint, as a fraction of the side length; ``t`` is the distance
    travelled when ``d`` is a unit vector.
    """
    best = None
    for e in range(3):
        if e == on_edge:
            continue
        a, b = (verts[i] for i in range(3) if i != e)
        ex, ey = b[0] - a[0], b[1] - a[1]
        den = d[0] * ey - d[1] * ex
        if den == 0:
            continue
        wx, wy = a[0] - p[0], a[1] - p[1]
        t = (wx * ey - wy * ex) / den
        s = (wx * d[1] - wy * d[0]) / den
        if t > 0 and (best is None or t < best[3]):
            best = ((p[0] + t * d[0], p[1] + t * d[1]), e, s, t)
    if best is None:
        raise ValueError("ray does not meet the triangle boundary")
    return best


def reflect_direction(d: Point, verts: Sequence[Point], edge: int) -> Point:
    a, b = (verts[i] for i in range(3) if i != edge)
    ex, ey = b[0] - a[0], b[1] - a[1]
    k = 2 * (d[0] * ex + d[1] * ey) / (ex * ex + ey * ey)
    return (k * ex - d[0], k * ey - d[1])


def trace_orbit_length(shape: TriangleShape, start: Point, on_edge: int | None,
                       direction: float, reflections: int) -> float:
    """Geometric length of an orbit from ``start`` up to its last reflection."""
    verts = shape.vertices()
    d = (math.cos(direction), math.sin(direction))
    p, edge, total = start, on_edge, 0.0
    for _ in range(reflections):
        p, edge, _, t = billiard_step(verts, p, d, edge)
        total += t
        d = reflect_direction(d, verts, edge)
    return total


def random_orbit_samples(shape: TriangleShape, count: int, reflections: int,
                         seed: int = 0) -> list[tuple[int, float]]:
    """(reflections, length) pairs for orbits started at random boundary points."""
    rng = random.Random(seed)
    verts = shape.vertices()
    samples = []
    for _ in range(count):
        edge = rng.randrange(3)
        a, b = (verts[i] for i in range(3) if i != edge)
        s = rng.uniform(0.05, 0.95)
        start = (a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1]))
        inward = math.atan2(b[1] - a[1], b[0] - a[0])
        # rotate the edge direction so the orbit points into the triangle
        opposite = verts[edge]
        if cross(a, b, opposite) < 0:
            inward += math.pi
        direction = inward + rng.uniform(0.05, math.pi - 0.05)
        samples.append((reflections, trace_orbit_length(shape, start, edge, direction, reflections)))
    return samples


@dataclass(frozen=True)
class Comparability:
    d_hat: float
    min_reflections: int
    used: int


def length_comparability(samples: Iterable[tuple[int, float]], min_reflections: int = 1) -> Comparability:
    """Empirical constant D with L/D <= n <= L*D over the given orbits."""
    d_hat, used = 0.0, 0
    for n, length in samples:
        if n < min_reflections or n <= 0 or length <= 0:
            continue
        d_hat = max(d_hat, length / n, n / length)
        used += 1
    if not used:
        raise InsufficientData(f"no orbit with at least {min_reflections} reflections")
    return Comparability(d_hat, min_reflections, used)
