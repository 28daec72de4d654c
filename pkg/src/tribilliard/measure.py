"""Monte Carlo estimates of sublevel-set measure for trigonometric polynomials."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ZeroPolynomial
from .trigpoly import TrigPoly, family_generate, tp_eval

log = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
DEFAULT_R = 0.05  # exp(-R m^2) stays far above the double underflow limit for m <= 64
SHARD = 1 << 16


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 20240601
    sample_count: int = 100_000
    mode: str = "random"  # "random" or "grid"
    domain: str = "torus"  # "torus" = [0, 2pi]^2, "admissible" = {a, b > delta, a + b < pi - delta}
    delta: float = 0.01

    def __post_init__(self):
        if self.sample_count <= 0:
            raise ValueError("sample_count must be positive")
        if self.mode not in ("random", "grid"):
            raise ValueError(f"unknown sampling mode {self.mode!r}")
        if self.domain not in ("torus", "admissible"):
            raise ValueError(f"unknown domain {self.domain!r}")


@dataclass(frozen=True)
class MeasureEstimate:
    fraction: float
    standard_error: float
    sample_count: int

    @classmethod
    def from_count(cls, hits: int, n: int) -> "MeasureEstimate":
        f = hits / n
        return cls(f, math.sqrt(f * (1 - f) / n), n)


def _shard_sizes(n: int) -> list[int]:
    full, rest = divmod(n, SHARD)
    return [SHARD] * full + ([rest] if rest else [])


def sample_angles(cfg: SamplerConfig) -> Iterable[tuple[np.ndarray, np.ndarray]]:
    """Shards of (alpha, beta) samples; identical config gives identical shards."""
    if cfg.mode == "grid":
        side = max(1, math.isqrt(cfg.sample_count))
        if cfg.domain == "torus":
            ticks = (np.arange(side) + 0.5) * (TWO_PI / side)
            a, b = np.meshgrid(ticks, ticks, indexing="ij")
            yield a.ravel(), b.ravel()
            return
        # midpoints of a grid over the bounding square, kept inside the simplex
        lo, hi = cfg.delta, math.pi - 2 * cfg.delta
        ticks = lo + (np.arange(side) + 0.5) * ((hi - lo) / side)
        a, b = np.meshgrid(ticks, ticks, indexing="ij")
        keep = a + b < math.pi - cfg.delta
        yield a[keep], b[keep]
        return
    children = np.random.SeedSequence(cfg.seed).spawn(len(_shard_sizes(cfg.sample_count)))
    for size, child in zip(_shard_sizes(cfg.sample_count), children):
        rng = np.random.default_rng(child)
        if cfg.domain == "torus":
            yield rng.uniform(0, TWO_PI, size), rng.uniform(0, TWO_PI, size)
        else:
            yield _admissible(rng, size, cfg.delta)


def _admissible(rng, size, delta):
    """Uniform points of the triangle a, b > delta, a + b < pi - delta."""
    side = math.pi - 3 * delta
    u, v = rng.uniform(0, 1, size), rng.uniform(0, 1, size)
    flip = u + v > 1
    u[flip], v[flip] = 1 - u[flip], 1 - v[flip]
    return delta + side * u, delta + side * v


def sublevel_fraction(p: TrigPoly, eps: float, cfg: SamplerConfig) -> MeasureEstimate:
    """Fraction of sampled angle pairs with |p| < eps."""
    if p.is_zero():
        raise ZeroPolynomial("sublevel measure of the zero polynomial is the whole domain")
    hits = total = 0
    for a, b in sample_angles(cfg):
        hits += int(np.count_nonzero(np.abs(tp_eval(p, a, b)) < eps))
        total += a.size
    return MeasureEstimate.from_count(hits, total)


def closed_form_cos_measure(m: int, eps: float) -> float:
    """Measure fraction of {|cos(m a)| < eps} on the torus (any m != 0)."""
    return 2 * math.asin(min(eps, 1.0)) / math.pi


@dataclass(frozen=True)
class DecayRow:
    degree: int
    eps: float
    worst_fraction: float
    worst_standard_error: float
    family_size: int
    reference: float  # exp(-c m)
    underflow: bool = False
    skipped_zero: int = 0


@dataclass(frozen=True)
class DecayTable:
    rows: tuple[DecayRow, ...]
    R: float
    c: float

    def nonincreasing(self) -> bool:
        fr = [r.worst_fraction for r in self.rows]
        return all(x >= y for x, y in zip(fr, fr[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "eps", "worst_fraction", "family_size", "exp_minus_cm", "underflow"])
        for r in self.rows:
            w.writerow([r.degree, f"{r.eps:.15g}", f"{r.worst_fraction:.15g}", r.family_size,
                        f"{r.reference:.15g}", int(r.underflow)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {"R": self.R, "c": self.c, "rows": [r.__dict__ for r in self.rows]}


def threshold(m: int, R: float) -> float:
    return math.exp(-R * m * m)


def decay_experiment(degrees: Sequence[int], R: float = DEFAULT_R,
                     families: dict[int, Iterable[TrigPoly]] | None = None,
                     sampler: SamplerConfig | None = None, *, c: float = 0.1,
                     family_count: int = 50, family_seed: int = 0) -> DecayTable:
    """Worst sublevel fraction at eps_m = exp(-R m^2) over a family per degree.

    Without explicit ``families``, degree m uses area polynomials of vertex
    triples along unfoldings with m // 4 kites (degree at most m).
    """
    sampler = sampler or SamplerConfig()
    degrees = sorted(set(degrees))
    rows = []
    for m in degrees:
        if families is not None:
            fam = list(families[m])
        else:
            fam = sorted(family_generate(max(1, m // 4), family_count, seed=family_seed + m, nonzero=True),
                         key=lambda p: repr(p.to_json()))
        if not fam:
            raise ValueError(f"empty family for degree {m}")
        eps = threshold(m, R)
        worst, worst_se, skipped = 0.0, 0.0, 0
        if eps == 0.0:
            log.warning("threshold exp(-%g*%d^2) underflows; fraction reported as 0", R, m)
            rows.append(DecayRow(m, eps, 0.0, 0.0, len(fam), math.exp(-c * m), True))
            continue
        for p in fam:
            try:
                est = sublevel_fraction(p, eps, sampler)
            except ZeroPolynomial:
                skipped += 1
                log.info("skipping zero polynomial in degree-%d family", m)
                continue
            if est.fraction > worst:
                worst, worst_se = est.fraction, est.standard_error
        rows.append(DecayRow(m, eps, worst, worst_se, len(fam), math.exp(-c * m), False, skipped))
    return DecayTable(tuple(rows), R, c)
