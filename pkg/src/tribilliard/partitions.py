"""Indexed partitions of a vertex sector and points in good position.

The cutting points of the n-th partition are the directions of diagonals
with at most n reflections; each point carries its diagonal's length as its
index.  Three points with indices p < q < r are in good position when x_r
lies strictly between x_p and x_q and no other point of index <= r lies in
the open interval they bound.
"""
from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .enumeration import ComplexityTable, DiagonalRecord
from .errors import DuplicateAngle, HypothesisNotMet, SearchFailed

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class CuttingPoint:
    angle: float
    index: int


@dataclass(frozen=True)
class PartitionSequence:
    vertex: int
    sector_lo: float
    sector_hi: float
    points: tuple[CuttingPoint, ...]  # sorted by angle
    max_index: int
    duplicates: tuple[tuple[CuttingPoint, CuttingPoint], ...] = ()

    def cutting_points(self, n: int) -> list[CuttingPoint]:
        return [p for p in self.points if p.index <= n]

    def intervals(self, n: int) -> list[tuple[float, float]]:
        cuts = [self.sector_lo] + [p.angle for p in self.cutting_points(n)] + [self.sector_hi]
        return list(zip(cuts, cuts[1:]))

    def max_interval_length(self, n: int) -> float:
        return max(hi - lo for lo, hi in self.intervals(n))

    def single_insertion_violations(self) -> list[dict]:
        """Intervals of the n-th partition holding two or more points of index n+1."""
        out = []
        for n in range(self.max_index):
            inside: dict[int, list[CuttingPoint]] = {}
            slot = 0
            for p in self.points:
                if p.index <= n:
                    slot += 1
                elif p.index == n + 1:
                    inside.setdefault(slot, []).append(p)
            for slot, pts in sorted(inside.items()):
                if len(pts) > 1:
                    out.append({"n": n, "interval": slot, "points": [(p.angle, p.index) for p in pts]})
        for v in out:
            log.warning("more than one new point in an interval: %s", v)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["angle", "index"])
        for p in self.points:
            writer.writerow([repr(p.angle), p.index])
        return buf.getvalue()


def build_partition_sequence(diagonals: Iterable[DiagonalRecord], vertex: int, n_max: int,
                             sector: tuple[float, float], tau: float = 1e-12,
                             strict: bool = False) -> PartitionSequence:
    """Partition sequence of one vertex sector from its diagonals.

    Two diagonals closer than ``tau`` in angle are flagged as duplicates and
    only the lower index is kept; with ``strict`` they raise DuplicateAngle.
    """
    pts = sorted(CuttingPoint(r.direction, r.reflections) for r in diagonals
                 if r.start_vertex == vertex and r.reflections <= n_max)
    kept: list[CuttingPoint] = []
    dups = []
    for p in pts:
        if kept and abs(p.angle - kept[-1].angle) < tau:
            if strict:
                raise DuplicateAngle(f"cutting points {kept[-1]} and {p} closer than {tau}")
            dups.append((kept[-1], p))
            if p.index < kept[-1].index:
                kept[-1] = p
            continue
        kept.append(p)
    if dups:
        log.warning("%d duplicate cutting angles within %g at vertex %d", len(dups), tau, vertex)
    return PartitionSequence(vertex, sector[0], sector[1], tuple(kept), n_max, tuple(dups))


def sequence_from_points(points: Iterable[tuple[float, int]], sector=(0.0, 1.0), vertex: int = 0) -> PartitionSequence:
    pts = tuple(sorted(CuttingPoint(float(a), int(i)) for a, i in points))
    return PartitionSequence(vertex, sector[0], sector[1], pts, max((p.index for p in pts), default=0))


@dataclass(frozen=True)
class GoodTriple:
    p: int
    q: int
    r: int
    x_p: float
    x_q: float
    x_r: float

    @property
    def witness_interval(self) -> tuple[float, float]:
        return min(self.x_p, self.x_q), max(self.x_p, self.x_q)

    @property
    def spread(self) -> float:
        return max(self.x_p, self.x_q, self.x_r) - min(self.x_p, self.x_q, self.x_r)

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "r": self.r,
                "x_p": self.x_p, "x_q": self.x_q, "x_r": self.x_r,
                "witness_interval": list(self.witness_interval)}


def find_good_triples(seq: PartitionSequence, index_range: tuple[int, int]) -> list[GoodTriple]:
    """Every good triple whose three indices lie in ``index_range``.

    The bounding points of x_r must be its nearest neighbours among points of
    index <= r, so one scan outwards from each candidate x_r suffices.
    """
    a, b = index_range
    pts = seq.points
    out = []
    for k, pr in enumerate(pts):
        r = pr.index
        if not a <= r <= b:
            continue
        left = next((pts[j] for j in range(k - 1, -1, -1) if pts[j].index <= r), None)
        right = next((pts[j] for j in range(k + 1, len(pts)) if pts[j].index <= r), None)
        if left is None or right is None:
            continue
        if left.index >= r or right.index >= r or left.index == right.index:
            continue
        if not left.angle < pr.angle < right.angle:
            continue  # tie at angular resolution
        lo_pt, hi_pt = sorted((left, right), key=lambda c: c.index)
        if lo_pt.index < a:
            continue
        out.append(GoodTriple(lo_pt.index, hi_pt.index, r, lo_pt.angle, hi_pt.angle, pr.angle))
    return out


def is_good_position(points: Sequence[CuttingPoint], xp: CuttingPoint, xq: CuttingPoint,
                     xr: CuttingPoint) -> bool:
    """Direct check of the definition (quadratic, used as an independent oracle)."""
    if not xp.index < xq.index < xr.index:
        return False
    lo, hi = min(xp.angle, xq.angle), max(xp.angle, xq.angle)
    if not lo < xr.angle < hi:
        return False
    return all(not (lo < c.angle < hi and c.index < xr.index + 1) or c == xr for c in points)


# -- abstract insertion model ----------------------------------------------------

@dataclass(frozen=True)
class InsertionProcess:
    """Order type of indexed points inside one interval J.

    ``indices`` lists the point indices from left to right; the interval
    endpoints are not points.  ``seed`` points present before the first step
    carry indices ``-seed..-1``; step ``s`` inserts points of index ``s``.
    """
    indices: tuple[int, ...]
    steps: int = 0

    def insert(self, slots: Sequence[int]) -> "InsertionProcess":
        """Insert one point of the next index into each listed gap (0..len)."""
        step = self.steps + 1
        out = list(self.indices)
        for slot in sorted(set(slots), reverse=True):
            out.insert(slot, step)
        return InsertionProcess(tuple(out), step)


def _order_type_triples(indices: Sequence[int]) -> list[tuple[int, int, int]]:
    pts = [CuttingPoint(float(i), idx) for i, idx in enumerate(indices)]
    seq = PartitionSequence(0, -1.0, float(len(pts)), tuple(pts), max(indices, default=0))
    lo = min(indices, default=0)
    return [(t.p, t.q, t.r) for t in find_good_triples(seq, (lo, max(indices, default=0)))]


def has_good_triple(indices: Sequence[int]) -> bool:
    return bool(_order_type_triples(indices))


def _seed_patterns(seed: int) -> list[tuple[int, ...]]:
    if seed == 0:
        return [()]
    return [tuple(-i for i in perm) for perm in itertools.permutations(range(1, seed + 1))]


@dataclass
class InsertionReport:
    c: int
    seed: int
    threshold: int
    outcomes: int = 0
    above_threshold: int = 0
    counterexamples: list[tuple[int, ...]] = field(default_factory=list)
    max_free: int = 0
    witness: tuple[int, ...] | None = None

    @property
    def holds(self) -> bool:
        return not self.counterexamples

    @property
    def witness_found(self) -> bool:
        return self.witness is not None and len(self.witness) == self.threshold - 1

    def to_json(self) -> dict:
        return {
            "c": self.c, "seed_points": self.seed, "threshold": self.threshold,
            "outcomes_explored": self.outcomes, "outcomes_at_threshold": self.above_threshold,
            "max_points_without_good_triple": self.max_free,
            "holds": self.holds, "counterexamples": [list(x) for x in self.counterexamples[:10]],
            "witness": list(self.witness) if self.witness is not None else None,
            "witness_size": len(self.witness) if self.witness is not None else None,
        }


def verify_insertion_threshold(c: int, seed: int = 3) -> InsertionReport:
    """Exhaustively check the good-triple threshold 4+2c in the insertion model.

    Every outcome of ``c`` insertion steps (each step adds at most one point
    to every gap) is explored, starting from ``seed`` points in every
    relative order.  A good triple, once present, stays present because
    later points have larger indices, so a branch is closed as soon as one
    appears; the branch's outcomes are counted but not expanded.
    """
    if not 1 <= c <= 4:
        raise ValueError("c must be between 1 and 4 for exhaustive enumeration")
    report = InsertionReport(c, seed, 4 + 2 * c)

    def walk(state: InsertionProcess, free: bool):
        if state.steps == c:
            report.outcomes += 1
            n = len(state.indices)
            if n >= report.threshold:
                report.above_threshold += 1
                if free:
                    report.counterexamples.append(state.indices)
            if free and n > report.max_free:
                report.max_free = n
                report.witness = state.indices
            return
        gaps = len(state.indices) + 1
        for k in range(gaps + 1):
            for slots in itertools.combinations(range(gaps), k):
                child = state.insert(slots)
                if free and not has_good_triple(child.indices):
                    walk(child, True)
                else:
                    _count_closed(child, k, report)

    def _count_closed(state, _k, rep):
        # a closed branch contributes outcomes; only sizes matter for the report
        sizes = _reachable_sizes(len(state.indices), c - state.steps)
        for size, count in sizes.items():
            rep.outcomes += count
            if size >= rep.threshold:
                rep.above_threshold += count

    for pattern in _seed_patterns(seed):
        start = InsertionProcess(pattern, 0)
        walk(start, not has_good_triple(pattern))
    return report


_SIZE_CACHE: dict[tuple[int, int], dict[int, int]] = {}


def _reachable_sizes(n: int, steps: int) -> dict[int, int]:
    """Number of insertion histories reaching each final size from n points."""
    key = (n, steps)
    if key in _SIZE_CACHE:
        return _SIZE_CACHE[key]
    if steps == 0:
        out = {n: 1}
    else:
        out: dict[int, int] = {}
        gaps = n + 1
        for k in range(gaps + 1):
            ways = math.comb(gaps, k)
            for size, cnt in _reachable_sizes(n + k, steps - 1).items():
                out[size] = out.get(size, 0) + ways * cnt
    _SIZE_CACHE[key] = out
    return out


def brute_force_insertion(c: int, seed: int) -> tuple[int, int]:
    """Unpruned enumeration: (max size without a good triple, counterexamples)."""
    states = [InsertionProcess(p, 0) for p in _seed_patterns(seed)]
    for _ in range(c):
        nxt = []
        for st in states:
            gaps = len(st.indices) + 1
            for k in range(gaps + 1):
                for slots in itertools.combinations(range(gaps), k):
                    nxt.append(st.insert(slots))
        states = nxt
    free_sizes = [len(s.indices) for s in states if not has_good_triple(s.indices)]
    bad = sum(1 for n in free_sizes if n >= 4 + 2 * c)
    return max(free_sizes, default=0), bad


# -- ratio jumps and close triples -----------------------------------------------

@dataclass(frozen=True)
class RatioJump:
    n: int
    c: int
    k: int
    N: int | None
    ratio: float | None
    threshold: float
    growth_hypothesis: bool | None = None  # P_n >= exp(n**mu) when mu is given


def find_ratio_jump(table: ComplexityTable | Sequence[int], n: int, c: int, k: int,
                    mu: float | None = None) -> RatioJump:
    """Smallest N = n + l*c (1 <= l < k) with P_{N+c} / P_N >= 4 + 2c."""
    counts = table.counts if isinstance(table, ComplexityTable) else tuple(table)
    if n + k * c >= len(counts):
        raise ValueError(f"table must cover n + k*c = {n + k * c}")
    threshold = 4 + 2 * c
    hyp = None
    if mu is not None:
        hyp = counts[n] > 0 and math.log(counts[n]) >= n ** mu
    for l in range(1, k):
        N = n + l * c
        if counts[N] > 0 and counts[N + c] >= threshold * counts[N]:
            return RatioJump(n, c, k, N, counts[N + c] / counts[N], threshold, hyp)
    return RatioJump(n, c, k, None, None, threshold, hyp)


def block_schedule(n_i: int, mu: float, epsilon: float) -> tuple[int, int]:
    """Block length c = n_i^(1-mu+eps) and block count k = n_i^mu, rounded up."""
    return max(1, math.ceil(n_i ** (1 - mu + epsilon))), max(1, math.ceil(n_i ** mu))


@dataclass(frozen=True)
class CloseTriple:
    triple: GoodTriple
    bound: float  # e^c / P_n, in units of the sector length
    distances: tuple[float, float, float]  # |x_p-x_q|, |x_p-x_r|, |x_q-x_r| normalised

    def to_json(self) -> dict:
        return {"triple": self.triple.to_json(), "bound": self.bound,
                "pairwise_distances": list(self.distances),
                "certified": max(self.distances) <= self.bound}


def find_close_good_triple(seq: PartitionSequence, table: ComplexityTable | Sequence[int],
                           n: int, c: int) -> CloseTriple:
    """Good triple with indices in [n+1, n+c] and pairwise distance <= e^c / P_n.

    Distances are measured with the sector rescaled to unit length.
    """
    counts = table.counts if isinstance(table, ComplexityTable) else tuple(table)
    if n + c >= len(counts):
        raise HypothesisNotMet(f"table does not reach n+c = {n + c}")
    pn, pnc = counts[n], counts[n + c]
    problems = []
    if pnc < (4 + 2 * c) * pn:
        problems.append(f"P_{n + c}={pnc} < (4+2c)P_{n}={(4 + 2 * c) * pn}")
    if c < 4:
        problems.append(f"c={c} < 4")
    if not math.exp(c) < pn:
        problems.append(f"e^c={math.exp(c):.6g} >= P_{n}={pn}")
    if problems:
        raise HypothesisNotMet("; ".join(problems))
    width = seq.sector_hi - seq.sector_lo
    bound = math.exp(c) / pn
    best = None
    for t in find_good_triples(seq, (n + 1, n + c)):
        d = tuple(abs(x - y) / width for x, y in ((t.x_p, t.x_q), (t.x_p, t.x_r), (t.x_q, t.x_r)))
        if best is None or max(d) < max(best.distances):
            best = CloseTriple(t, bound, d)
    if best is None or max(best.distances) > bound:
        raise SearchFailed(
            f"hypotheses hold for n={n}, c={c} but no good triple within {bound:.6g} "
            f"(closest: {None if best is None else max(best.distances)})")
    return best


def planted_sequence(n: int, c: int) -> PartitionSequence:
    """Synthetic sequence where every step splits every interval.

    Step m inserts one point at the midpoint of every current interval, so
    P_m = 2^m - 1 and the close-triple hypotheses hold once 2^n - 1 > e^c.
    """
    bounds = [0.0, 1.0]
    pts = []
    for m in range(1, n + c + 1):
        mids = [(a + b) / 2 for a, b in zip(bounds, bounds[1:])]
        pts.extend(CuttingPoint(x, m) for x in mids)
        bounds = sorted(bounds + mids)
    return sequence_from_points([(p.angle, p.index) for p in pts])


def counts_from_sequence(seq: PartitionSequence) -> tuple[int, ...]:
    per = [0] * (seq.max_index + 1)
    for p in seq.points:
        per[p.index] += 1
    return tuple(itertools.accumulate(per))
