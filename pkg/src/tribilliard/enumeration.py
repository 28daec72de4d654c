"""Generalized diagonals by corridor-pruned depth-first unfolding.

A diagonal leaving vertex V is found by unfolding the triangle along the
sequence of sides the orbit crosses: the orbit becomes the straight segment
from V to an image of a vertex.  The search keeps, for every corridor of
unfolded triangles, the window of directions at V whose rays cross all the
corridor's edges; a corridor with an empty window has no descendants.

Two vertex images count as aligned as seen from V when the distance of the
nearer one to the line through V and the farther one is below
``tau_hit * depth``.  Orbits through a vertex stop there, so an image aligned
with a window boundary is never a new diagonal.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
import tempfile
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import mpmath

from . import __version__
from .errors import AmbiguousHit, BudgetExceeded, PrecisionWarning
from .geometry import (TriangleShape, billiard_step, cross, reflect_direction,
                       reflect_point)

BRUTE_FORCE_MAX_DEPTH = 12


@dataclass(frozen=True)
class PrecisionConfig:
    tau_hit: float = 1e-12
    tau_safe: float = 1e-6
    extended: bool = True
    extended_dps: int = 40  # about 133 bits of mantissa

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, order=True)
class DiagonalRecord:
    reflections: int
    direction: float
    start_vertex: int
    end_vertex_label: int
    geometric_length: float
    combinatorics: tuple[int, ...]  # labels of the sides crossed, in order
    precision_warning: bool = False

    def canonical_key(self) -> tuple[int, ...]:
        """Same key for a diagonal and its reversal."""
        return min(self.combinatorics, self.combinatorics[::-1])

    def to_json(self) -> dict:
        return {
            "start_vertex": self.start_vertex,
            "end_vertex_label": self.end_vertex_label,
            "direction": self.direction,
            "reflections": self.reflections,
            "geometric_length": self.geometric_length,
            "combinatorics": list(self.combinatorics),
            "precision_warning": self.precision_warning,
        }

    @classmethod
    def from_json(cls, d: dict) -> "DiagonalRecord":
        return cls(d["reflections"], d["direction"], d["start_vertex"], d["end_vertex_label"],
                   d["geometric_length"], tuple(d["combinatorics"]), d.get("precision_warning", False))


@dataclass(frozen=True)
class AngularWindow:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"empty window [{self.lo}, {self.hi})")


@dataclass
class EnumerationStats:
    nodes: int = 0
    extended_checks: int = 0
    ambiguous: int = 0
    max_window_depth: int = 0


@dataclass(frozen=True)
class ComplexityTable:
    counts: tuple[int, ...]
    convention: str = "undirected-dedup-sides-excluded"

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(self.counts))

    def __getitem__(self, n: int) -> int:
        return self.counts[n]

    def __len__(self) -> int:
        return len(self.counts)

    @property
    def n_max(self) -> int:
        return len(self.counts) - 1

    def to_json(self) -> dict:
        return {"counts": list(self.counts), "convention": self.convention}


def direction_of(v: tuple, w: tuple) -> float:
    return math.atan2(w[1] - v[1], w[0] - v[0])


class _Aligner:
    """Tolerance-aware side test of vertex images as seen from V."""

    def __init__(self, shape: TriangleShape, vertex: int, cfg: PrecisionConfig, stats: EnumerationStats):
        self.shape, self.vertex, self.cfg, self.stats = shape, vertex, cfg, stats

    @staticmethod
    def metric(v, b, w):
        nb = math.hypot(b[0] - v[0], b[1] - v[1])
        nw = math.hypot(w[0] - v[0], w[1] - v[1])
        return cross(v, b, w) / max(nb, nw)

    def side(self, b, b_ref, w, w_ref, path, depth) -> tuple[int, bool]:
        """Sign of w relative to the ray V->b (+1 counterclockwise, 0 aligned).

        The second value flags a decision taken inside the ambiguity band.
        """
        value = self.metric(self.shape.vertices()[self.vertex], b, w)
        tau = self.cfg.tau_hit * max(depth, 1)
        if abs(value) < tau:
            return 0, False
        if abs(value) >= self.cfg.tau_safe or not self.cfg.extended:
            return (1 if value > 0 else -1), False
        self.stats.extended_checks += 1
        with mpmath.workdps(self.cfg.extended_dps):
            pts = _mp_images(self.shape, path, (b_ref, w_ref))
            v = self.shape.mp_vertices()[self.vertex]
            hb, hw = pts[b_ref], pts[w_ref]
            nb = mpmath.sqrt((hb[0] - v[0]) ** 2 + (hb[1] - v[1]) ** 2)
            nw = mpmath.sqrt((hw[0] - v[0]) ** 2 + (hw[1] - v[1]) ** 2)
            hv = float(cross(v, hb, hw) / max(nb, nw))
        if abs(hv) < tau:
            return 0, False
        warn = abs(hv) < self.cfg.tau_safe
        if warn:
            self.stats.ambiguous += 1
        return (1 if hv > 0 else -1), warn


def _mp_images(shape: TriangleShape, path: Sequence[int], refs: Iterable[tuple[int, int]]) -> dict:
    """Extended-precision coordinates of the images ``(depth, label)``."""
    wanted = set(refs)
    verts = list(shape.mp_vertices())
    out = {}
    for depth in range(len(path) + 1):
        for d, label in wanted:
            if d == depth:
                out[(d, label)] = verts[label]
        if depth < len(path):
            e = path[depth]
            a, b = (verts[i] for i in range(3) if i != e)
            verts[e] = reflect_point(verts[e], a, b)
    return out


def _make_record(shape, vertex, w, path, warn) -> DiagonalRecord:
    v = shape.vertices()[vertex]
    return DiagonalRecord(len(path), direction_of(v, w), vertex, path[-1],
                          math.hypot(w[0] - v[0], w[1] - v[1]), tuple(path), warn)


def enumerate_diagonals(shape: TriangleShape, start_vertex: int, n_max: int,
                        precision: PrecisionConfig | None = None,
                        stats: EnumerationStats | None = None) -> list[DiagonalRecord]:
    """All diagonals from ``start_vertex`` with 1..n_max reflections, sorted."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    cfg = precision or PrecisionConfig()
    stats = stats if stats is not None else EnumerationStats()
    aligner = _Aligner(shape, start_vertex, cfg, stats)
    verts = shape.vertices()
    v = verts[start_vertex]
    u1, u2 = (i for i in range(3) if i != start_vertex)
    if cross(v, verts[u1], verts[u2]) < 0:
        u1, u2 = u2, u1
    # vertex entries are (point, label, creation depth)
    lo, hi = (verts[u1], u1, 0), (verts[u2], u2, 0)
    stack = [((start_vertex,), lo, hi, (v, start_vertex), lo, hi)]
    records: list[DiagonalRecord] = []
    while stack:
        path, e_lo, e_hi, opp, w_lo, w_hi = stack.pop()
        stats.nodes += 1
        depth = len(path)
        w = (reflect_point(opp[0], e_lo[0], e_hi[0]), opp[1], depth)
        s_lo, warn_lo = aligner.side(w_lo[0], (w_lo[2], w_lo[1]), w[0], (depth, w[1]), path, depth)
        s_hi, warn_hi = aligner.side(w[0], (depth, w[1]), w_hi[0], (w_hi[2], w_hi[1]), path, depth)
        # child: (edge low end, edge high end, vertex opposite the edge, window)
        if s_lo > 0 and s_hi > 0:
            records.append(_make_record(shape, start_vertex, w[0], path, warn_lo or warn_hi))
            children = [(w, e_hi, e_lo, w, w_hi), (e_lo, w, e_hi, w_lo, w)]
        elif s_lo <= 0:
            children = [(w, e_hi, e_lo, w_lo, w_hi)]
        else:
            children = [(e_lo, w, e_hi, w_lo, w_hi)]
        if depth >= n_max:
            continue
        # an edge carries the label of its opposite vertex; push in reverse so
        # children are visited in ascending label order
        for c_lo, c_hi, c_opp, cw_lo, cw_hi in sorted(children, key=lambda c: -c[2][1]):
            stack.append((path + (c_opp[1],), c_lo, c_hi, (c_opp[0], c_opp[1]), cw_lo, cw_hi))
        stats.max_window_depth = max(stats.max_window_depth, depth)
    records.sort()
    if stats.ambiguous:
        warnings.warn(f"{stats.ambiguous} vertex tests inside the ambiguity band "
                      f"[{cfg.tau_hit}, {cfg.tau_safe}] at extended precision", PrecisionWarning)
    return records


def brute_force_diagonals(shape: TriangleShape, start_vertex: int, n_max: int,
                          precision: PrecisionConfig | None = None) -> list[DiagonalRecord]:
    """Unpruned oracle: test every side sequence of length 1..n_max."""
    if n_max > BRUTE_FORCE_MAX_DEPTH:
        raise BudgetExceeded(f"brute force limited to n_max <= {BRUTE_FORCE_MAX_DEPTH}, got {n_max}")
    cfg = precision or PrecisionConfig()
    aligner = _Aligner(shape, start_vertex, cfg, EnumerationStats())
    base = shape.vertices()
    v = base[start_vertex]
    records = []
    for k in range(1, n_max + 1):
        for seq in itertools.product(range(3), repeat=k):
            rec = _check_sequence(shape, start_vertex, v, base, seq, aligner)
            if rec is not None:
                records.append(rec)
    records.sort()
    return records


def _check_sequence(shape, vertex, v, base, seq, aligner):
    if any(a == b for a, b in zip(seq, seq[1:])):
        return None  # a ray never re-crosses the side it just left
    verts = list(base)
    created = [0, 0, 0]
    edges = []
    for depth, e in enumerate(seq, start=1):
        i, j = (x for x in range(3) if x != e)
        edges.append(((verts[i], (created[i], i)), (verts[j], (created[j], j))))
        verts[e] = reflect_point(verts[e], verts[i], verts[j])
        created[e] = depth
    w, w_ref = verts[seq[-1]], (len(seq), seq[-1])
    if math.hypot(w[0] - v[0], w[1] - v[1]) == 0:
        return None
    depth = len(seq)
    warn = False
    last_t = 0.0
    for (a, a_ref), (b, b_ref) in edges:
        sa, wa = aligner.side(w, w_ref, a, a_ref, seq, depth)
        sb, wb = aligner.side(w, w_ref, b, b_ref, seq, depth)
        if sa == 0 or sb == 0 or sa == sb:
            return None
        warn = warn or wa or wb
        ca, cb = cross(a, b, v), cross(a, b, w)
        if ca == 0 or (ca > 0) == (cb > 0):
            return None
        t = ca / (ca - cb)
        if not last_t < t < 1:
            return None
        last_t = t
    return _make_record(shape, vertex, w, seq, warn)


def complexity_table(diagonal_sets: Iterable[Iterable[DiagonalRecord]], n_max: int,
                     convention: str = "global") -> ComplexityTable:
    """P_0..P_{n_max}: cumulative counts of diagonals with at most n reflections.

    ``global`` counts undirected diagonals once across all start vertices;
    ``per-vertex`` counts the records as given (one vertex's cutting points).
    """
    per_length = [0] * (n_max + 1)
    if convention == "global":
        seen = {}
        for records in diagonal_sets:
            for r in records:
                if r.reflections <= n_max:
                    seen[r.canonical_key()] = r.reflections
        for n in seen.values():
            per_length[n] += 1
        tag = "undirected-dedup-sides-excluded"
    elif convention == "per-vertex":
        for records in diagonal_sets:
            for r in records:
                if r.reflections <= n_max:
                    per_length[r.reflections] += 1
        tag = "per-vertex-directed-sides-excluded"
    else:
        raise ValueError(f"unknown counting convention {convention!r}")
    return ComplexityTable(tuple(itertools.accumulate(per_length)), tag)


# -- physical re-trace ---------------------------------------------------------

@dataclass(frozen=True)
class TraceOutcome:
    status: str  # "hit", "survived" or "ambiguous"
    vertex: int | None = None
    reflections: int | None = None
    clearance: float = math.inf  # closest approach to a vertex at a contact


def _contact_clearance(verts, edge, s):
    a, b = (verts[i] for i in range(3) if i != edge)
    length = math.hypot(float(b[0] - a[0]), float(b[1] - a[1]))
    s = float(s)
    if s < 0.5:
        return abs(s) * length, next(i for i in range(3) if i != edge)
    return abs(1 - s) * length, [i for i in range(3) if i != edge][1]


def trace_ray(shape: TriangleShape, start_vertex: int, direction: float, max_reflections: int,
              tol: float = 1e-9, safe: float = 1e-6, extended_dps: int = 40,
              raise_on_ambiguous: bool = False) -> TraceOutcome:
    """Follow the billiard orbit physically inside the fixed triangle."""
    lo, hi = shape.sector(start_vertex)
    if not lo + tol < direction < hi - tol:
        out = TraceOutcome("ambiguous", clearance=0.0)
        if raise_on_ambiguous:
            raise AmbiguousHit(f"direction {direction!r} is on or outside the sector boundary")
        return out
    verts = shape.vertices()
    p = verts[start_vertex]
    d = (math.cos(direction), math.sin(direction))
    edge = None
    closest = math.inf
    for contact in range(1, max_reflections + 2):
        p, edge, s, _ = billiard_step(verts, p, d, edge)
        clearance, near = _contact_clearance(verts, edge, s)
        if clearance < safe:
            hp = _mp_trace_clearance(shape, start_vertex, direction, contact, extended_dps)
            if hp < tol:
                return TraceOutcome("hit", near, contact - 1, hp)
            if clearance < tol:
                if raise_on_ambiguous:
                    raise AmbiguousHit(f"double precision hit at contact {contact} not confirmed")
                return TraceOutcome("ambiguous", near, contact - 1, hp)
        closest = min(closest, clearance)
        if contact == max_reflections + 1:
            break
        d = reflect_direction(d, verts, edge)
    return TraceOutcome("survived", clearance=closest)


def _mp_trace_clearance(shape, vertex, direction, contacts, dps):
    with mpmath.workdps(dps):
        verts = shape.mp_vertices()
        p = verts[vertex]
        d = (mpmath.cos(mpmath.mpf(direction)), mpmath.sin(mpmath.mpf(direction)))
        edge = None
        for k in range(contacts):
            p, edge, s, _ = billiard_step(verts, p, d, edge)
            if k < contacts - 1:
                d = reflect_direction(d, verts, edge)
        a, b = (verts[i] for i in range(3) if i != edge)
        length = mpmath.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2)
        return float(min(abs(s), abs(1 - s)) * length)


# -- cache -----------------------------------------------------------------------

CACHE_SCHEMA_VERSION = 1


def cache_path(cache_dir: os.PathLike, shape: TriangleShape, vertex: int, n_max: int) -> Path:
    return Path(cache_dir) / "enumeration" / f"{shape.shape_hash()}_v{vertex}_n{n_max}.json"


def _cache_meta(shape, vertex, n_max, cfg) -> dict:
    return {
        "schema_version": CACHE_SCHEMA_VERSION,
        "code_version": __version__,
        "shape": shape.to_json(),
        "shape_hash": shape.shape_hash(),
        "vertex": vertex,
        "n_max": n_max,
        "precision": cfg.to_json(),
    }


def write_json_atomic(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def load_cached(cache_dir, shape, vertex, n_max, cfg) -> list[DiagonalRecord] | None:
    path = cache_path(cache_dir, shape, vertex, n_max)
    try:
        data = json.loads(path.read_text())
    except (OSError, ValueError):
        return None
    if data.get("metadata") != _cache_meta(shape, vertex, n_max, cfg):
        return None
    return [DiagonalRecord.from_json(r) for r in data["records"]]


def store_cached(cache_dir, shape, vertex, n_max, cfg, records) -> Path:
    path = cache_path(cache_dir, shape, vertex, n_max)
    write_json_atomic(path, {"metadata": _cache_meta(shape, vertex, n_max, cfg),
                             "records": [r.to_json() for r in records]})
    return path


def enumerate_cached(cache_dir, shape, vertex, n_max, cfg=None) -> tuple[list[DiagonalRecord], bool]:
    """Enumerate with the on-disk cache; the flag says whether the cache was used."""
    cfg = cfg or PrecisionConfig()
    if cache_dir is not None:
        hit = load_cached(cache_dir, shape, vertex, n_max, cfg)
        if hit is not None:
            return hit, True
    records = enumerate_diagonals(shape, vertex, n_max, cfg)
    if cache_dir is not None:
        store_cached(cache_dir, shape, vertex, n_max, cfg, records)
    return records, False


def records_digest(records: Sequence[DiagonalRecord]) -> str:
    blob = json.dumps([r.to_json() for r in records], sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()
