"""Command-line entry point: ``tribilliard <command> [options]``.

Every command writes one JSON artifact under ``<cache>/artifacts`` named by
the hash of its content (the timestamp is left out of the hash) and records
it in ``<cache>/artifacts/latest.json``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .analysis import bound_report, gap_sequence, growth_exponent, solve_constants
from .enumeration import (PrecisionConfig, complexity_table, enumerate_cached, records_digest,
                          write_json_atomic)
from .errors import BilliardError
from .geometry import TriangleShape, make_triangle
from .measure import DEFAULT_R, SamplerConfig, decay_experiment
from .partitions import build_partition_sequence, find_good_triples, verify_insertion_threshold
from .trigpoly import audit_unfoldings, good_triple_area, tp_eval

log = logging.getLogger("tribilliard")

SCHEMA_VERSION = 1
DEFAULT_SEED = 20240601
CACHE_ENV = "TRIBILLIARD_CACHE_DIR"
EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_COUNTEREXAMPLE = 0, 1, 2, 3

_PI_RE = re.compile(r"^([+-]?\d+)(?:/(\d+))?\s*\*?\s*pi$|^pi(?:/(\d+))?$")


def parse_angle(text: str) -> tuple[float, Fraction | None]:
    """Radians, or a rational multiple of pi such as ``1/3pi``, ``2/5 pi`` or ``pi/4``."""
    t = text.strip().lower()
    m = _PI_RE.match(t)
    if m:
        if m.group(1) is not None:
            frac = Fraction(int(m.group(1)), int(m.group(2) or 1))
        else:
            frac = Fraction(1, int(m.group(3) or 1))
        return float(frac) * math.pi, frac
    try:
        value = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad angle {text!r}; use radians or p/q pi") from None
    return value, None


def default_cache_dir() -> Path:
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "tribilliard")


def shape_from_args(args) -> TriangleShape:
    (a, a_pi), (b, b_pi) = args.alpha, args.beta
    return make_triangle(a, b, args.delta, alpha_pi=a_pi, beta_pi=b_pi)


def precision_from_args(args) -> PrecisionConfig:
    return PrecisionConfig(tau_hit=args.tau_hit, tau_safe=args.tau_safe)


def _vertices(args) -> list[int]:
    return [0, 1, 2] if args.vertex is None else [args.vertex]


def _enumerate_all(args, shape, vertices):
    cfg = precision_from_args(args)
    jobs = [(args.cache_dir, shape, v, args.n_max, cfg) for v in vertices]
    if args.threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            results = list(pool.map(enumerate_cached, *zip(*jobs)))
    else:
        results = [enumerate_cached(*job) for job in jobs]
    return {v: recs for v, (recs, _) in zip(vertices, results)}, {v: hit for v, (_, hit) in zip(vertices, results)}


# -- commands --------------------------------------------------------------------
# each returns (result dict, text summary, csv text or None, exit code)

def cmd_enumerate(args):
    shape = shape_from_args(args)
    vertices = _vertices(args)
    records, hits = _enumerate_all(args, shape, vertices)
    conv = "global" if args.vertex is None else "per-vertex"
    table = complexity_table(records.values(), args.n_max, conv)
    result = {
        "shape": shape.to_json(),
        "n_max": args.n_max,
        "table": table.to_json(),
        "per_vertex": {str(v): {"records": len(r), "digest": records_digest(r),
                                "precision_warnings": sum(x.precision_warning for x in r)}
                       for v, r in records.items()},
    }
    text = f"P_{args.n_max} = {table[args.n_max]} ({table.convention}); cache hits: " + \
        ", ".join(f"v{v}={'yes' if h else 'no'}" for v, h in hits.items())
    return result, text, _rows_csv(["n", "P_n"], enumerate(table.counts)), EXIT_OK


def cmd_partitions(args):
    shape = shape_from_args(args)
    v = args.vertex or 0
    records, _ = _enumerate_all(args, shape, [v])
    seq = build_partition_sequence(records[v], v, args.n_max, shape.sector(v), args.tau_hit)
    viol = seq.single_insertion_violations()
    result = {
        "shape": shape.to_json(), "vertex": v, "n_max": args.n_max,
        "points": [[p.angle, p.index] for p in seq.points],
        "max_interval_length": [seq.max_interval_length(n) for n in range(args.n_max + 1)],
        "duplicates": len(seq.duplicates),
        "single_insertion_violations": viol,
    }
    text = (f"vertex {v}: {len(seq.points)} cutting points, max interval at n={args.n_max}: "
            f"{seq.max_interval_length(args.n_max):.15g}, single-insertion violations: {len(viol)}")
    return result, text, seq.to_csv(), EXIT_OK


def cmd_good_triples(args):
    shape = shape_from_args(args)
    vertices = _vertices(args)
    records, _ = _enumerate_all(args, shape, vertices)
    lo = args.index_lo
    hi = args.index_hi if args.index_hi is not None else args.n_max
    out, zero_area = [], 0
    for v in vertices:
        seq = build_partition_sequence(records[v], v, args.n_max, shape.sector(v), args.tau_hit)
        by_key = {(r.direction, r.reflections): r for r in records[v]}
        for t in find_good_triples(seq, (lo, hi)):
            rec = by_key[(t.x_r, t.r)]
            poly, kites = good_triple_area(rec.combinatorics, t.p, t.q, t.r)
            value = float(tp_eval(poly, shape.alpha, shape.beta))
            zero_area += value == 0.0
            out.append({"vertex": v, **t.to_json(), "kites": kites, "area_degree": poly.degree,
                        "area_polynomial": poly.to_json(), "area_value": value})
    result = {"shape": shape.to_json(), "n_max": args.n_max, "index_range": [lo, hi],
              "triples": out, "zero_area": zero_area}
    text = f"{len(out)} good triples with indices in [{lo}, {hi}]; zero areas: {zero_area}"
    rows = [(d["vertex"], d["p"], d["q"], d["r"], d["x_p"], d["x_q"], d["x_r"], d["area_value"]) for d in out]
    code = EXIT_COUNTEREXAMPLE if zero_area else EXIT_OK
    return result, text, _rows_csv(["vertex", "p", "q", "r", "x_p", "x_q", "x_r", "area"], rows), code


def cmd_symbolic_check(args):
    audit = audit_unfoldings(args.samples, args.max_kites, args.seed, args.angle_pairs)
    text = (f"{audit.checked} unfoldings: degree violations {len(audit.degree_violations)}, "
            f"frequency violations {len(audit.frequency_violations)}, "
            f"max numeric error {audit.max_error:.15g}")
    code = EXIT_OK if audit.ok and audit.max_error <= args.tolerance else EXIT_COUNTEREXAMPLE
    return audit.to_json(), text, None, code


def cmd_area_poly(args):
    try:
        edges = [int(x) for x in args.edges.replace(",", " ").split()]
        p, q, r = (int(x) for x in args.times.replace(",", " ").split())
    except ValueError:
        raise BilliardError("--edges takes integer labels and --times exactly three integers") from None
    if not 1 <= p < q < r <= len(edges):
        raise BilliardError(f"need 1 <= p < q < r <= {len(edges)}, got {p}, {q}, {r}")
    if any(e not in (0, 1, 2) for e in edges) or any(a == b for a, b in zip(edges, edges[1:])):
        raise BilliardError("edges must be labels 0, 1, 2 with no immediate repeats")
    poly, kites = good_triple_area(edges, p, q, r)
    result = {"edges": edges, "times": [p, q, r], "kites": kites, "degree": poly.degree
              if not poly.is_zero() else None, "polynomial": poly.to_json(),
              "two_adic_exponent": poly.two_adic_exponent() if not poly.is_zero() else None}
    text = f"A = {poly!r}; degree {result['degree']} (bound {4 * kites})"
    if args.alpha is not None and args.beta is not None:
        a, b = args.alpha[0], args.beta[0]
        result["value"] = float(tp_eval(poly, a, b))
        result["area"] = result["value"] / math.sin(a + b) ** 2
        text += f"; area at given angles = {result['area']:.15g}"
    return result, text, None, EXIT_OK


def cmd_measure_decay(args):
    degrees = [int(x) for x in args.degrees.replace(",", " ").split()]
    sampler = SamplerConfig(seed=args.seed, sample_count=args.samples, mode=args.mode)
    table = decay_experiment(degrees, args.R, sampler=sampler, family_count=args.family_size,
                             family_seed=args.seed)
    text = "worst fractions " + ", ".join(f"m={r.degree}: {r.worst_fraction:.15g}" for r in table.rows) + \
        f"; nonincreasing: {table.nonincreasing()}"
    result = {**table.to_json(), "nonincreasing": table.nonincreasing(), "samples": args.samples,
              "seed": args.seed}
    return result, text, table.to_csv(), EXIT_OK


def cmd_constants(args):
    sol = solve_constants(args.mu)
    text = f"mu* = {sol.mu_star:.15g}"
    if sol.witness is not None:
        w = sol.witness
        text += f"; witness gamma={w.gamma:.15g} eps={w.epsilon:.15g} mu={w.mu:.15g}"
    return sol.to_json(), text, None, EXIT_OK


def cmd_report(args):
    shape = shape_from_args(args)
    records, _ = _enumerate_all(args, shape, [0, 1, 2])
    table = complexity_table(records.values(), args.n_max)
    mu = args.mu if args.mu is not None else solve_constants().mu_star
    fit = growth_exponent(table, (args.fit_lo, args.n_max))
    gaps = gap_sequence(table, mu + args.epsilon)
    rep = bound_report(table, mu, args.epsilon)
    result = {"shape": shape.to_json(), "table": table.to_json(), "growth": fit.to_json(),
              "gap_sequence": {**gaps.to_json(), "comparison": gaps.gap_comparison(args.epsilon)},
              "bound_report": rep.to_json()}
    text = f"growth exponent {fit.exponent:.15g} on [{fit.n_lo}, {fit.n_hi}]\n{rep.summary()}"
    return result, text, rep.to_csv(), EXIT_OK


def cmd_verify_insertion(args):
    cs = [int(x) for x in args.c.replace(",", " ").split()]
    reports = [verify_insertion_threshold(c, seed=args.seed_points) for c in cs]
    ok = all(r.holds for r in reports)
    lines = [f"c={r.c}: {'holds' if r.holds else 'COUNTEREXAMPLE'}; witness without good triple: "
             f"{'yes' if r.witness_found else 'no'}" for r in reports]
    return {"seed_points": args.seed_points, "reports": [r.to_json() for r in reports]}, \
        "\n".join(lines), None, EXIT_OK if ok else EXIT_COUNTEREXAMPLE


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{x:.15g}" if isinstance(x, float) else x for x in row])
    return buf.getvalue()


# -- artifacts -------------------------------------------------------------------

def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_artifact(cache_dir: Path, command: str, config: dict, result: dict) -> Path:
    body = {"schema_version": SCHEMA_VERSION, "command": command, "code_version": __version__,
            "config": config, "result": result}
    digest = hashlib.sha256(canonical_json(body).encode()).hexdigest()[:16]
    art_dir = Path(cache_dir) / "artifacts"
    path = art_dir / f"{command}-{digest}.json"
    write_json_atomic(path, {**body, "content_hash": digest,
                             "metadata": {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}})
    index = art_dir / "latest.json"
    try:
        entries = json.loads(index.read_text())
    except (OSError, ValueError):
        entries = {}
    entries[command] = path.name
    entries["latest"] = path.name
    write_json_atomic(index, entries)
    return path


# -- parser ----------------------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED})")
    common.add_argument("--cache-dir", type=Path, default=None,
                        help=f"cache and artifact directory (env {CACHE_ENV})")
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--threads", type=_positive_int, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    shape = argparse.ArgumentParser(add_help=False)
    shape.add_argument("--alpha", type=parse_angle, required=True, help="radians or p/q pi")
    shape.add_argument("--beta", type=parse_angle, required=True, help="radians or p/q pi")
    shape.add_argument("--delta", type=float, default=0.01)
    shape.add_argument("--n-max", type=_positive_int, default=12)
    shape.add_argument("--tau-hit", type=float, default=PrecisionConfig.tau_hit)
    shape.add_argument("--tau-safe", type=float, default=PrecisionConfig.tau_safe)

    parser = argparse.ArgumentParser(prog="tribilliard", description="Triangular billiard experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", parents=[common, shape], help="count generalized diagonals")
    p.add_argument("--vertex", type=int, choices=(0, 1, 2))
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("partitions", parents=[common, shape], help="partition sequence at a vertex")
    p.add_argument("--vertex", type=int, choices=(0, 1, 2))
    p.set_defaults(func=cmd_partitions)

    p = sub.add_parser("good-triples", parents=[common, shape], help="good triples and their area polynomials")
    p.add_argument("--vertex", type=int, choices=(0, 1, 2))
    p.add_argument("--index-lo", type=int, default=1)
    p.add_argument("--index-hi", type=int)
    p.set_defaults(func=cmd_good_triples)

    p = sub.add_parser("symbolic-check", parents=[common], help="degree bounds of symbolic unfoldings")
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--max-kites", type=_positive_int, default=12)
    p.add_argument("--angle-pairs", type=_positive_int, default=5)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.set_defaults(func=cmd_symbolic_check)

    p = sub.add_parser("area-poly", parents=[common], help="area polynomial of three vertices along a corridor")
    p.add_argument("--edges", required=True, help="sides crossed, e.g. '0,1,0,2'")
    p.add_argument("--times", required=True, help="three times p<q<r, e.g. '1,2,4'")
    p.add_argument("--alpha", type=parse_angle)
    p.add_argument("--beta", type=parse_angle)
    p.set_defaults(func=cmd_area_poly)

    p = sub.add_parser("measure-decay", parents=[common], help="sublevel-set measure decay")
    p.add_argument("--degrees", default="4,8,16")
    p.add_argument("--R", type=float, default=DEFAULT_R)
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--family-size", type=_positive_int, default=50)
    p.add_argument("--mode", choices=("random", "grid"), default="random")
    p.set_defaults(func=cmd_measure_decay)

    p = sub.add_parser("constants", parents=[common], help="solve the constants system")
    p.add_argument("--mu", type=float)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("report", parents=[common, shape], help="growth fit, gap sequence and bound report")
    p.add_argument("--mu", type=float)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--fit-lo", type=int, default=10)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify-lemma21", parents=[common], help="exhaustive insertion-process check")
    p.add_argument("--c", default="1,2,3")
    p.add_argument("--seed-points", type=int, default=3, help="points present before the first insertion")
    p.set_defaults(func=cmd_verify_insertion)
    return parser


def _config(args) -> dict:
    skip = {"func", "format", "threads", "verbose", "cache_dir", "command"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, tuple):  # parsed angle
            v = {"radians": v[0], "pi_multiple": None if v[1] is None else str(v[1])}
        out[k] = v
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args.cache_dir = args.cache_dir or default_cache_dir()
    try:
        result, text, table_csv, code = args.func(args)
    except BilliardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    path = write_artifact(args.cache_dir, args.command, _config(args), result)
    if args.format == "json":
        sys.stdout.write(canonical_json(result))
    elif args.format == "csv":
        sys.stdout.write(table_csv if table_csv is not None else
                         _rows_csv(["key", "value"], ((k, json.dumps(v, sort_keys=True))
                                                      for k, v in sorted(result.items()))))
    else:
        print(text)
        print(f"artifact: {path}")
    if code == EXIT_COUNTEREXAMPLE:
        print("counterexample found; see artifact", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
