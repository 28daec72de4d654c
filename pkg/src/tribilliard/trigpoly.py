"""Trigonometric polynomials in two angles with exact rational coefficients.

A polynomial is a finite sum of c*cos(m*alpha + l*beta) + s*sin(m*alpha + l*beta).
Keys (m, l) are normalised so that m > 0, or m == 0 and l >= 0, using
cos(-t) = cos(t) and sin(-t) = -sin(t).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .geometry import (A, B, Combinatorics, RotationLabel, kite_moves_from_edges,
                       random_combinatorics, side_role)

ZERO = Fraction(0)


def _canon(m: int, l: int) -> tuple[int, int, int]:
    """Normalised key and the sign picked up by the sine part."""
    if m > 0 or (m == 0 and l >= 0):
        return m, l, 1
    return -m, -l, -1


class TrigPoly:
    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], tuple] | None = None):
        acc: dict[tuple[int, int], list[Fraction]] = {}
        for (m, l), (c, s) in (terms or {}).items():
            km, kl, sign = _canon(m, l)
            slot = acc.setdefault((km, kl), [ZERO, ZERO])
            slot[0] += Fraction(c)
            slot[1] += sign * Fraction(s)
        self._terms = {}
        for key, (c, s) in sorted(acc.items()):
            if key == (0, 0):
                s = ZERO
            if c or s:
                self._terms[key] = (c, s)

    # constructors
    @classmethod
    def const(cls, value) -> "TrigPoly":
        return cls({(0, 0): (Fraction(value), ZERO)})

    @classmethod
    def cos(cls, m: int, l: int, coef=1) -> "TrigPoly":
        return cls({(m, l): (Fraction(coef), ZERO)})

    @classmethod
    def sin(cls, m: int, l: int, coef=1) -> "TrigPoly":
        return cls({(m, l): (ZERO, Fraction(coef))})

    @property
    def terms(self) -> dict[tuple[int, int], tuple[Fraction, Fraction]]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> float:
        if not self._terms:
            return -math.inf
        return max(abs(m) + abs(l) for m, l in self._terms)

    def coefficients(self) -> list[Fraction]:
        return [x for cs in self._terms.values() for x in cs if x]

    def two_adic_exponent(self) -> int:
        """Smallest k with 2^k times every coefficient an integer (-1 if impossible)."""
        k = 0
        for x in self.coefficients():
            den = x.denominator
            if den & (den - 1):
                return -1
            k = max(k, den.bit_length() - 1)
        return k

    # arithmetic
    def __add__(self, other):
        other = _lift(other)
        merged = dict(self._terms)
        for key, (c, s) in other._terms.items():
            c0, s0 = merged.get(key, (ZERO, ZERO))
            merged[key] = (c0 + c, s0 + s)
        return TrigPoly(merged)

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly({k: (-c, -s) for k, (c, s) in self._terms.items()})

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return TrigPoly({k: (c * other, s * other) for k, (c, s) in self._terms.items()})
        return tp_mul(self, other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = TrigPoly.const(other)
        return isinstance(other, TrigPoly) and self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "TrigPoly(0)"
        parts = []
        for (m, l), (c, s) in self._terms.items():
            arg = f"{m}a{l:+d}b"
            if c:
                parts.append(f"{c}*cos({arg})")
            if s:
                parts.append(f"{s}*sin({arg})")
        return "TrigPoly(" + " + ".join(parts) + ")"

    def __call__(self, alpha, beta):
        return tp_eval(self, alpha, beta)

    def to_json(self) -> list[dict]:
        return [{"m": m, "l": l, "cos": f"{c.numerator}/{c.denominator}",
                 "sin": f"{s.numerator}/{s.denominator}"}
                for (m, l), (c, s) in self._terms.items()]

    @classmethod
    def from_json(cls, data: Iterable[dict]) -> "TrigPoly":
        return cls({(d["m"], d["l"]): (Fraction(d["cos"]), Fraction(d["sin"])) for d in data})


def _lift(x) -> TrigPoly:
    return x if isinstance(x, TrigPoly) else TrigPoly.const(x)


def tp_mul(a: TrigPoly, b: TrigPoly) -> TrigPoly:
    """Exact product via the product-to-sum identities."""
    half = Fraction(1, 2)
    acc: dict[tuple[int, int], list[Fraction]] = {}

    def add(m, l, c, s):
        km, kl, sign = _canon(m, l)
        slot = acc.setdefault((km, kl), [ZERO, ZERO])
        slot[0] += c
        slot[1] += sign * s

    for (m1, l1), (c1, s1) in a._terms.items():
        for (m2, l2), (c2, s2) in b._terms.items():
            sm, sl = m1 + m2, l1 + l2
            dm, dl = m1 - m2, l1 - l2
            # cos x cos y = (cos(x-y) + cos(x+y)) / 2
            # sin x sin y = (cos(x-y) - cos(x+y)) / 2
            # sin x cos y = (sin(x+y) + sin(x-y)) / 2
            # cos x sin y = (sin(x+y) - sin(x-y)) / 2
            cc, ss, sc, cs = c1 * c2, s1 * s2, s1 * c2, c1 * s2
            add(dm, dl, half * (cc + ss), half * (sc - cs))
            add(sm, sl, half * (cc - ss), half * (sc + cs))
    return TrigPoly({k: tuple(v) for k, v in acc.items()})


def tp_eval(p: TrigPoly, alpha, beta):
    """Evaluate at scalar or numpy-array angles."""
    if isinstance(alpha, np.ndarray) or isinstance(beta, np.ndarray):
        total = np.zeros(np.broadcast(alpha, beta).shape)
        for (m, l), (c, s) in p._terms.items():
            arg = m * alpha + l * beta
            if c:
                total += float(c) * np.cos(arg)
            if s:
                total += float(s) * np.sin(arg)
        return total
    total = 0.0
    for (m, l), (c, s) in p._terms.items():
        arg = m * alpha + l * beta
        total += float(c) * math.cos(arg) + float(s) * math.sin(arg)
    return total


# -- symbolic kite unfolding -----------------------------------------------------

SIN_A_PLUS_B = TrigPoly.sin(1, 1)


@dataclass(frozen=True)
class SymbolicPoint:
    """Point ``(x, y) + w * (cos(m a + l b), sin(m a + l b))``.

    ``w`` is the side length sin(b)/sin(a+b) when ``side`` is true and zero
    otherwise.
    """
    x: TrigPoly
    y: TrigPoly
    side: bool = False
    freq: tuple[int, int] = (0, 0)

    def scaled(self) -> tuple[TrigPoly, TrigPoly]:
        """Coordinates multiplied by sin(a+b), which makes them polynomial."""
        X, Y = self.x * SIN_A_PLUS_B, self.y * SIN_A_PLUS_B
        if self.side:
            m, l = self.freq
            # sin(b) cos(t) = (sin(t+b) - sin(t-b)) / 2, sin(b) sin(t) = (cos(t-b) - cos(t+b)) / 2
            X = X + tp_mul(TrigPoly.sin(0, 1), TrigPoly.cos(m, l))
            Y = Y + tp_mul(TrigPoly.sin(0, 1), TrigPoly.sin(m, l))
        return X, Y

    def evaluate(self, alpha: float, beta: float) -> tuple[float, float]:
        x, y = tp_eval(self.x, alpha, beta), tp_eval(self.y, alpha, beta)
        if self.side:
            w = math.sin(beta) / math.sin(alpha + beta)
            m, l = self.freq
            x += w * math.cos(m * alpha + l * beta)
            y += w * math.sin(m * alpha + l * beta)
        return x, y

    @property
    def degree(self) -> float:
        """Degree of the polynomial part; side vertices report it separately."""
        return max(self.x.degree, self.y.degree)

    def to_json(self) -> dict:
        return {"x": self.x.to_json(), "y": self.y.to_json(), "side": self.side,
                "freq": list(self.freq)}


@dataclass(frozen=True)
class SymbolicKite:
    alpha_vertex: SymbolicPoint
    beta_vertex: SymbolicPoint
    side_vertices: tuple[SymbolicPoint, SymbolicPoint]  # (plus, minus)
    angle: tuple[int, int]  # kite angle = m*alpha + l*beta
    kites: int

    def vertex(self, role: str) -> SymbolicPoint:
        return {"alpha": self.alpha_vertex, "beta": self.beta_vertex,
                "plus": self.side_vertices[0], "minus": self.side_vertices[1]}[role]

    def to_json(self) -> dict:
        return {"alpha_vertex": self.alpha_vertex.to_json(), "beta_vertex": self.beta_vertex.to_json(),
                "side_vertices": [p.to_json() for p in self.side_vertices],
                "angle": list(self.angle), "kites": self.kites}


ROLES = ("alpha", "beta", "plus", "minus")


def _kite_from(ax: TrigPoly, ay: TrigPoly, bx: TrigPoly, by: TrigPoly, m: int, l: int, kites: int) -> SymbolicKite:
    alpha = SymbolicPoint(ax, ay)
    beta = SymbolicPoint(bx, by)
    plus = SymbolicPoint(ax, ay, True, (m + 1, l))
    minus = SymbolicPoint(ax, ay, True, (m - 1, l))
    return SymbolicKite(alpha, beta, (plus, minus), (m, l), kites)


def symbolic_unfold(comb: Combinatorics) -> SymbolicKite:
    """Vertices of the last kite of the unfolding as exact trig polynomials."""
    zero = TrigPoly()
    ax, ay, bx, by = zero, zero, TrigPoly.const(1), zero
    m = l = 0
    for mv in comb.moves:
        if mv.pivot == "A":
            m += 2 * mv.sign
            bx, by = ax + TrigPoly.cos(m, l), ay + TrigPoly.sin(m, l)
        else:
            l += 2 * mv.sign
            ax, ay = bx - TrigPoly.cos(m, l), by - TrigPoly.sin(m, l)
    return _kite_from(ax, ay, bx, by, m, l, comb.kites)


def area_polynomial(p: SymbolicPoint, q: SymbolicPoint, r: SymbolicPoint) -> TrigPoly:
    """A with signed area(PQR) = A(alpha, beta) / sin^2(alpha + beta)."""
    (px, py), (qx, qy), (rx, ry) = p.scaled(), q.scaled(), r.scaled()
    twice = tp_mul(qx - px, ry - py) - tp_mul(rx - px, qy - py)
    return twice * Fraction(1, 2)


def signed_area(p, q, r) -> float:
    return 0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))


@dataclass(frozen=True)
class VertexChoice:
    """A vertex role in the kite reached after a prefix of a combinatorics."""
    time: int  # number of moves applied
    role: str


def points_along(comb: Combinatorics, choices: Sequence[VertexChoice]) -> list[SymbolicPoint]:
    return [symbolic_unfold(Combinatorics(comb.moves[:ch.time])).vertex(ch.role) for ch in choices]


def triple_kites(comb: Combinatorics, choices: Sequence[VertexChoice]) -> int:
    return max(ch.time for ch in choices) + 1


def triangle_path_points(edges: Sequence[int], times: Sequence[int]) -> tuple[Combinatorics, list[VertexChoice]]:
    """Kite combinatorics and vertex roles for images along a triangle unfolding.

    ``edges`` are the sides crossed, starting from a copy with the original
    orientation; for each entry t of ``times`` the chosen point is the image
    of vertex ``edges[t-1]`` in the copy reached after t crossings, i.e. the
    vertex a diagonal with t reflections ends at.
    """
    moves = kite_moves_from_edges(edges)
    kept: list[RotationLabel] = []
    choices = []
    per_time = [0]
    for mv in moves:
        if mv is not None:
            kept.append(mv)
        per_time.append(len(kept))
    for t in times:
        label = edges[t - 1]
        parity = 1 if t % 2 == 0 else -1
        role = {A: "alpha", B: "beta"}.get(label) or ("plus" if side_role(parity) == 0 else "minus")
        choices.append(VertexChoice(per_time[t], role))
    return Combinatorics(tuple(kept)), choices


def good_triple_area(edges: Sequence[int], p: int, q: int, r: int) -> tuple[TrigPoly, int]:
    """Area polynomial of the vertices hit at times p < q < r along one corridor.

    The copy reached at time p is moved to the standard position (mirrored
    if needed, which only flips the sign of the area), so only the
    crossings between p and r enter.  Returns the polynomial and the number
    of kites spanned.
    """
    role_p = {A: "alpha", B: "beta"}.get(edges[p - 1], "plus")
    comb, tail = triangle_path_points(list(edges[p:r]), [q - p, r - p])
    pts = points_along(comb, [VertexChoice(0, role_p)] + tail)
    return area_polynomial(*pts), comb.kites


# -- families of area polynomials ------------------------------------------------

def random_vertex_triple(rng: random.Random, c: int) -> tuple[Combinatorics, list[VertexChoice]]:
    """Random unfolding with c kites and three distinct vertex choices along it."""
    comb = random_combinatorics(rng, c - 1)
    while True:
        choices = [VertexChoice(rng.randrange(c), rng.choice(ROLES)) for _ in range(3)]
        if len(set(choices)) == 3:
            return comb, choices


def family_generate(c: int, count: int | None, seed: int = 0, *, nonzero: bool = False) -> set[TrigPoly]:
    """Area polynomials (up to sign) of vertex triples along unfoldings with c kites.

    ``count=None`` enumerates every (combinatorics, vertex choice) triple.
    """
    if count == 0:
        return set()
    fam: set[TrigPoly] = set()
    if count is None:
        for comb in all_combinatorics(c - 1):
            kites = [symbolic_unfold(Combinatorics(comb.moves[:t])) for t in range(c)]
            pts = [k.vertex(role) for k in kites for role in ROLES]
            for i in range(len(pts)):
                for j in range(i + 1, len(pts)):
                    for k in range(j + 1, len(pts)):
                        a = _sign_normalised(area_polynomial(pts[i], pts[j], pts[k]))
                        if not (nonzero and a.is_zero()):
                            fam.add(a)
        return fam
    rng = random.Random(seed)
    attempts = 0
    while len(fam) < count and attempts < 50 * count:
        attempts += 1
        comb, choices = random_vertex_triple(rng, c)
        a = _sign_normalised(area_polynomial(*points_along(comb, choices)))
        if nonzero and a.is_zero():
            continue
        fam.add(a)
    return fam


def _sign_normalised(p: TrigPoly) -> TrigPoly:
    # reordering the three vertices only flips the sign of the area
    coefs = p.coefficients()
    return -p if coefs and coefs[0] < 0 else p


def all_combinatorics(length: int) -> list[Combinatorics]:
    out = [()]
    for _ in range(length):
        nxt = []
        for moves in out:
            for mv in (RotationLabel(p, s) for p in ("A", "B") for s in (1, -1)):
                if moves and moves[-1].pivot == mv.pivot and moves[-1].sign == -mv.sign:
                    continue
                nxt.append(moves + (mv,))
        out = nxt
    return [Combinatorics(m) for m in out]


def family_size_bound(c: int) -> int:
    """Distinct (combinatorics, three vertex choices) along unfoldings with c kites."""
    points = 4 * c
    return len(all_combinatorics(c - 1)) * math.comb(points, 3)


# -- degree and agreement audit of symbolic unfoldings ---------------------------

@dataclass
class UnfoldingAudit:
    checked: int = 0
    degree_violations: list = field(default_factory=list)
    frequency_violations: list = field(default_factory=list)
    max_error: float = 0.0
    two_adic: dict = field(default_factory=dict)  # exponent -> count of alpha/beta coordinate polys

    @property
    def ok(self) -> bool:
        return not self.degree_violations and not self.frequency_violations

    def to_json(self) -> dict:
        return {"checked": self.checked, "degree_violations": self.degree_violations,
                "frequency_violations": self.frequency_violations, "max_error": self.max_error,
                "two_adic": {str(k): v for k, v in sorted(self.two_adic.items())}, "ok": self.ok}


def random_admissible_angles(rng: random.Random, delta: float = 0.01) -> tuple[float, float]:
    while True:
        a, b = rng.uniform(delta, math.pi), rng.uniform(delta, math.pi)
        if a > delta and b > delta and a + b < math.pi - delta:
            return a, b


def audit_unfoldings(count: int, max_kites: int = 12, seed: int = 0, angle_pairs: int = 5,
                     delta: float = 0.01) -> UnfoldingAudit:
    """Check degree bounds and numeric agreement on random unfoldings with 1..max_kites kites.

    With n kites the alpha/beta coordinates must have degree <= 2n-2 and the
    side-vertex frequencies |m|+|l| <= 2n-1.
    """
    from .geometry import make_triangle, unfold_sequence

    rng = random.Random(seed)
    audit = UnfoldingAudit()
    for _ in range(count):
        comb = random_combinatorics(rng, rng.randint(0, max_kites - 1))
        n = comb.kites
        kite = symbolic_unfold(comb)
        for name, pt in (("alpha", kite.alpha_vertex), ("beta", kite.beta_vertex)):
            if pt.degree > 2 * n - 2:
                audit.degree_violations.append({"combinatorics": comb.to_json(), "vertex": name,
                                                "degree": pt.degree})
            for poly in (pt.x, pt.y):
                if not poly.is_zero():
                    k = poly.two_adic_exponent()
                    audit.two_adic[k] = audit.two_adic.get(k, 0) + 1
        for name, pt in zip(("plus", "minus"), kite.side_vertices):
            m, l = pt.freq
            if abs(m) + abs(l) > 2 * n - 1:
                audit.frequency_violations.append({"combinatorics": comb.to_json(), "vertex": name,
                                                   "frequency": [m, l]})
        for _ in range(angle_pairs):
            a, b = random_admissible_angles(rng, delta)
            frame = unfold_sequence(make_triangle(a, b, delta), comb)[-1]
            for role, num in zip(ROLES, frame.points()):
                sx, sy = kite.vertex(role).evaluate(a, b)
                audit.max_error = max(audit.max_error, abs(sx - num[0]), abs(sy - num[1]))
        audit.checked += 1
    return audit
