"""Growth fits, the constants system and bound-comparison reports."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .enumeration import ComplexityTable
from .errors import DegenerateRange, Infeasible

MU_STAR = math.sqrt(3) - 1


def _counts(table: ComplexityTable | Sequence[int]) -> tuple[int, ...]:
    return tuple(table.counts) if isinstance(table, ComplexityTable) else tuple(table)


@dataclass(frozen=True)
class ConstantsConfig:
    mu: float
    epsilon: float
    gamma: float

    def checks(self) -> dict[str, bool]:
        mu, eps, g = self.mu, self.epsilon, self.gamma
        return {
            "gamma<=1": g <= 1,
            "gamma+eps>1": g + eps > 1,
            "(gamma+eps)*mu>1": (g + eps) * mu > 1,
            "eps<mu": eps < mu,
            "2eps<mu": 2 * eps < mu,
        }

    @property
    def feasible(self) -> bool:
        return all(v > 0 for v in (self.mu, self.epsilon, self.gamma)) and all(self.checks().values())

    def to_json(self) -> dict:
        return {"mu": self.mu, "epsilon": self.epsilon, "gamma": self.gamma,
                "checks": self.checks(), "feasible": self.feasible}


@dataclass(frozen=True)
class ConstantsSolution:
    mu_star: float
    witness: ConstantsConfig | None

    def to_json(self) -> dict:
        return {"mu_star": self.mu_star, "witness": None if self.witness is None else self.witness.to_json()}


def solve_constants(mu: float | None = None) -> ConstantsSolution:
    """Return mu* (root of mu^2/2 + mu - 1) and, if ``mu`` is given, a feasible witness.

    With gamma = 1 the system reduces to 1/mu - 1 < eps < mu/2, which is
    nonempty exactly when mu > mu*.  The witness takes the midpoint.
    """
    if mu is None:
        return ConstantsSolution(MU_STAR, None)
    lo, hi = max(0.0, 1 / mu - 1), mu / 2
    if mu <= MU_STAR or not lo < hi:
        raise Infeasible(f"no feasible (gamma, eps) for mu={mu!r}; need mu > sqrt(3) - 1")
    cfg = ConstantsConfig(mu, (lo + hi) / 2, 1.0)
    if not cfg.feasible:
        raise Infeasible(f"midpoint witness failed for mu={mu!r}: {cfg.checks()}")
    return ConstantsSolution(MU_STAR, cfg)


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    intercept: float
    residual: float  # RMS of log residuals
    n_lo: int
    n_hi: int

    def to_json(self) -> dict:
        return self.__dict__.copy()


def growth_exponent(table: ComplexityTable | Sequence[int], n_range: tuple[int, int] | None = None) -> GrowthFit:
    counts = _counts(table)
    lo, hi = n_range if n_range is not None else (1, len(counts) - 1)
    lo, hi = max(lo, 1), min(hi, len(counts) - 1)
    ns = list(range(lo, hi + 1))
    if len(ns) < 3:
        raise DegenerateRange(f"fit range [{lo}, {hi}] has fewer than 3 points")
    ps = [counts[n] for n in ns]
    if min(ps) <= 0:
        raise DegenerateRange(f"table is not strictly positive on [{lo}, {hi}]")
    x, y = np.log(ns), np.log(ps)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return GrowthFit(float(slope), float(intercept), resid, lo, hi)


def _below_stretched_exp(p: int, n: int, s: float) -> bool:
    # P_n < exp(n^s), compared in log space
    return p <= 0 or math.log(p) < n ** s


@dataclass(frozen=True)
class GapSequence:
    times: tuple[int, ...]
    mu: float

    @property
    def gaps(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.times, self.times[1:]))

    def gap_comparison(self, epsilon: float) -> list[dict]:
        """Each gap against n_i^(1+eps); informational only."""
        return [{"n_i": a, "gap": b - a, "bound": a ** (1 + epsilon), "within": b - a < a ** (1 + epsilon)}
                for a, b in zip(self.times, self.times[1:])]

    def to_json(self) -> dict:
        return {"mu": self.mu, "times": list(self.times), "gaps": list(self.gaps)}


def gap_sequence(table: ComplexityTable | Sequence[int], mu: float) -> GapSequence:
    counts = _counts(table)
    return GapSequence(tuple(n for n, p in enumerate(counts) if _below_stretched_exp(p, n, mu)), mu)


@dataclass(frozen=True)
class BoundRow:
    n: int
    p_n: int
    log_bound: float  # n^(mu+eps)
    ratio: float  # P_n / exp(n^(mu+eps))
    per_n_upper: int  # periodic orbits of length <= n are at most P_n

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound) if self.log_bound < 700 else math.inf


@dataclass(frozen=True)
class BoundReport:
    rows: tuple[BoundRow, ...]
    mu: float
    epsilon: float

    @property
    def implied_c(self) -> float:
        return max((r.ratio for r in self.rows), default=0.0)

    @property
    def argmax_n(self) -> int | None:
        if not self.rows:
            return None
        return max(self.rows, key=lambda r: (r.ratio, -r.n)).n

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "P_n", "exp_n_pow_s", "ratio", "Per_n_upper"])
        for r in self.rows:
            w.writerow([r.n, r.p_n, f"{r.bound:.15g}", f"{r.ratio:.15g}", r.per_n_upper])
        return buf.getvalue()

    def summary(self) -> str:
        s = self.mu + self.epsilon
        if not self.rows:
            return f"empty table; no rows (s = {s:.15g})"
        return (f"P_n vs exp(n^{s:.15g}) for n in [{self.rows[0].n}, {self.rows[-1].n}]: "
                f"implied C = {self.implied_c:.15g} attained at n = {self.argmax_n}; "
                f"Per_n <= P_n on every row (informational, asymptotic claim not tested)")

    def to_json(self) -> dict:
        return {"mu": self.mu, "epsilon": self.epsilon, "implied_c": self.implied_c,
                "argmax_n": self.argmax_n,
                "rows": [{"n": r.n, "P_n": r.p_n, "log_bound": r.log_bound, "ratio": r.ratio,
                          "Per_n_upper": r.per_n_upper} for r in self.rows]}


def bound_report(table: ComplexityTable | Sequence[int], mu: float = MU_STAR,
                 epsilon: float = 0.05) -> BoundReport:
    s = mu + epsilon
    rows = []
    for n, p in enumerate(_counts(table)):
        if n == 0:
            continue
        lb = n ** s
        ratio = math.exp(math.log(p) - lb) if p > 0 else 0.0
        rows.append(BoundRow(n, p, lb, ratio, p))
    return BoundReport(tuple(rows), mu, epsilon)
