"""Batch experiment driver.

Subcommands: ``sample``, ``stats``, ``ising-scan``, ``contours``,
``percolation``, ``surgery-selftest``, ``oracle``.  Every run is seeded,
emits a CSV or JSON report with the resolved configuration embedded, and
reproduces its data rows byte for byte under the same configuration and
seed.  Trial-parallel subcommands accept ``--workers``; per-trial RNG
streams are keyed by absolute trial index, so results do not depend on the
worker count.
"""

from __future__ import annotations

import argparse
import math
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import branching, contours, ising, percolation, surgery, triangulation
from .reports import ExperimentReport, resolve_output
from .rng import stream

_CHUNK = 1024


def _chunks(total: int) -> list[tuple[int, int]]:
    return [(lo, min(_CHUNK, total - lo)) for lo in range(0, total, _CHUNK)]


def _map_chunks(fn, args, total: int, workers: int) -> list:
    """Run fn(*args, start, count) over trial chunks, serially or in a pool."""
    parts = _chunks(total)
    if workers <= 1:
        return [fn(*args, lo, cnt) for lo, cnt in parts]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args, lo, cnt) for lo, cnt in parts]
        return [f.result() for f in futures]


# -- sample -------------------------------------------------------------------


def _sample_chunk(seed: int, levels: int, start: int, count: int) -> Counter:
    hist: Counter = Counter()
    for i in range(start, start + count):
        sf = branching.sample_spine_forest(stream(seed, i), levels)
        for n, k in enumerate(sf.level_sizes):
            hist[(n, k)] += 1
    return hist


def cmd_sample(args) -> ExperimentReport:
    hist: Counter = Counter()
    for part in _map_chunks(_sample_chunk, (args.seed, args.levels), args.trials, args.workers):
        hist.update(part)
    if args.save > 0:
        base = resolve_output(args.out, f"sample_seed{args.seed}", args.format)
        for i in range(args.save):
            t = triangulation.forest_to_triangulation(
                branching.sample_spine_forest(stream(args.seed, i), args.levels)
            )
            path = base.with_suffix(f".t{i}.lt")
            path.write_text(triangulation.to_text(t))
    rows = [(n, k, c) for (n, k), c in sorted(hist.items())]
    return ExperimentReport(
        "sample",
        {"seed": args.seed, "levels": args.levels, "trials": args.trials, "save": args.save},
        ("level", "size", "count"),
        rows,
        {"trials": args.trials},
    )


# -- stats --------------------------------------------------------------------


def _stats_chunk(seed: int, levels: int, start: int, count: int) -> Counter:
    hist: Counter = Counter()
    for i in range(start, start + count):
        sf = branching.sample_spine_forest(stream(seed, i), levels)
        sizes = sf.level_sizes
        for n in range(1, levels + 1):
            hist[(n, sizes[n])] += 1
    return hist


def tv_distance_to_level_law(counts: dict[int, int], n: int, trials: int) -> float:
    """Total-variation distance between an empirical level-size histogram and
    the exact conditioned level-size law."""
    k_max = max(max(counts), 400)
    tv = 0.0
    tail = 1.0
    for k in range(1, k_max + 1):
        p = branching.level_size_pmf(n, k)
        tail -= p
        tv += abs(counts.get(k, 0) / trials - p)
    return 0.5 * (tv + max(tail, 0.0))


def cmd_stats(args) -> ExperimentReport:
    hist: Counter = Counter()
    for part in _map_chunks(_stats_chunk, (args.seed, args.levels), args.trials, args.workers):
        hist.update(part)
    check_levels = sorted({1, min(3, args.levels), args.levels})
    rows = []
    for n in check_levels:
        counts = {k: c for (lvl, k), c in hist.items() if lvl == n}
        tv = tv_distance_to_level_law(counts, n, args.trials)
        rows.append((n, args.trials, tv, args.threshold, int(tv < args.threshold)))
    return ExperimentReport(
        "stats",
        {
            "seed": args.seed,
            "levels": args.levels,
            "trials": args.trials,
            "threshold": args.threshold,
        },
        ("level", "trials", "tv_distance", "threshold", "passed"),
        rows,
        {"all_passed": int(all(r[4] for r in rows))},
    )


# -- ising-scan ---------------------------------------------------------------


def _scan_point(seed: int, levels: int, beta: float, bc: str, sweeps: int,
                replicas: int, burn_in: int) -> tuple:
    t = triangulation.forest_to_triangulation(
        branching.sample_spine_forest(stream(seed, 0), levels + 1)
    )
    key = 1 if bc == "plus" else 2
    est = ising.root_plus_probability(
        t, beta, bc, sweeps=sweeps, replicas=replicas,
        seed=seed * 1000003 + key, burn_in=burn_in,
    )
    return (beta, bc, est.estimate, est.stderr, sweeps, replicas)


def cmd_ising_scan(args) -> ExperimentReport:
    betas = args.beta_grid if args.beta_grid else [args.beta]
    if betas is None or betas == [None]:
        raise ValueError("ising-scan needs --beta or --beta-grid")
    bcs = ["plus", "minus"] if args.bc == "both" else [args.bc]
    tasks = [(b, bc) for b in betas for bc in bcs]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = [
                pool.submit(_scan_point, args.seed, args.levels, b, bc,
                            args.sweeps, args.replicas, args.burn_in)
                for b, bc in tasks
            ]
            rows = [f.result() for f in futures]
    else:
        rows = [
            _scan_point(args.seed, args.levels, b, bc, args.sweeps, args.replicas, args.burn_in)
            for b, bc in tasks
        ]
    return ExperimentReport(
        "ising-scan",
        {
            "seed": args.seed,
            "levels": args.levels,
            "betas": betas,
            "bc": args.bc,
            "sweeps": args.sweeps,
            "replicas": args.replicas,
            "burn_in": args.burn_in,
        },
        ("beta", "bc", "estimate", "stderr", "sweeps", "replicas"),
        rows,
    )


# -- contours -----------------------------------------------------------------


def _small_triangulation(seed: int, levels: int, width_cap: int) -> triangulation.Triangulation:
    """First seeded spine sample whose widths fit the caps (deterministic)."""
    for i in range(10000):
        sf = branching.sample_spine_forest(stream(seed, i), levels)
        t = triangulation.forest_to_triangulation(sf)
        if max(t.level_sizes) <= width_cap and t.triangle_count <= contours.MAX_EXHAUSTIVE_TRIANGLES:
            return t
    raise ValueError("no sample fits the caps; lower --levels or raise --width-cap")


def cmd_contours(args) -> ExperimentReport:
    t = _small_triangulation(args.seed, args.levels, args.width_cap)
    cs = contours.enumerate_contours(t, args.max_len)
    series = contours.peierls_series(cs.counts, args.beta)
    rows = list(series.rows)
    return ExperimentReport(
        "contours",
        {
            "seed": args.seed,
            "levels": args.levels,
            "width_cap": args.width_cap,
            "beta": args.beta,
            "max_len": args.max_len,
            "level_sizes": list(t.level_sizes),
        },
        ("length", "count", "partial_sum"),
        rows,
        {
            "triangles": t.triangle_count,
            "total": series.total,
            "tail_below_one_from": series.tail_below_one_from,
        },
    )


# -- percolation --------------------------------------------------------------


def _reach_chunk(levels: int, beta: float, seed: int, start: int, count: int) -> int:
    return sum(
        1 for i in range(start, start + count)
        if percolation._reach_trial(levels, beta, seed, i)
    )


def cmd_percolation(args) -> ExperimentReport:
    betas = args.beta_grid if args.beta_grid else [args.beta]
    if betas == [None]:
        raise ValueError("percolation needs --beta or --beta-grid")
    rows = []
    for levels in args.levels_list:
        for beta in betas:
            hits = sum(
                _map_chunks(_reach_chunk, (levels, beta, args.seed), args.trials, args.workers)
            )
            est = percolation.ReachEstimate(beta, levels, args.trials, hits)
            rows.append((beta, levels, args.trials, hits, est.estimate, est.stderr))
    return ExperimentReport(
        "percolation",
        {
            "seed": args.seed,
            "levels": args.levels_list,
            "betas": betas,
            "trials": args.trials,
        },
        ("beta", "levels", "trials", "reach_count", "estimate", "stderr"),
        rows,
    )


# -- surgery-selftest ---------------------------------------------------------


def _reconstruction_fixture():
    t = triangulation.forest_to_triangulation(((2,), (5, 1), (1,) * 6))
    pn = surgery.path_neighborhood(t, [(0, 0), (1, 0)])
    plan = {1: ((5,) * 10, (1,) * 10)}
    t_mod = surgery.apply_modification(t, pn, plan, threshold=8, count=10)
    return t, pn, t_mod


def cmd_surgery_selftest(args) -> ExperimentReport:
    rows = []
    fails = 0
    sites = 0
    for t, _ in triangulation.enumerate_triangulations(2, 3):
        for pos in range(t.level_sizes[1]):
            for site in surgery.insertion_sites(t, 1, pos):
                sites += 1
                res = surgery.insert_pairs(
                    t, surgery.Insertion(1, pos, ((site.up_slot, site.down_slot),))
                )
                if surgery.collapse_run(res.triangulation, *res.new_horizontal_run) != t:
                    fails += 1
    rows.append(("roundtrip_failures", float(fails), 0.0, int(fails == 0)))

    t, pn, t_mod = _reconstruction_fixture()
    wins = 0
    for i in range(args.attempts):
        r = surgery.randomized_reconstruction(t_mod, t, pn.path, stream(args.seed, i))
        wins += r.success
    freq = wins / args.attempts
    bound = surgery.reconstruction_probability_bound(pn.degrees())
    se = math.sqrt(max(freq * (1 - freq), 1e-12) / args.attempts)
    rows.append(("reconstruction_frequency", freq, bound, int(freq >= bound - 3 * se)))
    return ExperimentReport(
        "surgery-selftest",
        {"seed": args.seed, "attempts": args.attempts, "roundtrip_sites": sites},
        ("check", "value", "bound", "passed"),
        rows,
        {"all_passed": int(all(r[3] for r in rows))},
    )


# -- oracle -------------------------------------------------------------------


def cmd_oracle(args) -> ExperimentReport:
    rows = []
    # measure consistency: exp(-mu*F) versus the offspring-product form
    enum = triangulation.enumerate_triangulations(args.levels, args.width_cap)
    z1 = sum(w for _, w in enum)
    z2 = sum(triangulation.forest_weight_product(t) for t, _ in enum)
    err = max(
        abs(w / z1 - triangulation.forest_weight_product(t) / z2) for t, w in enum
    )
    rows.append(("measure_product_form", err, 1e-12, int(err < 1e-12)))

    # spin-flip symmetry on the deepest all-ones instance
    t = triangulation.forest_to_triangulation(((1,),) * args.levels)
    gp = ising.gibbs_exact(t, args.beta, "plus")
    gm = ising.gibbs_exact(t, args.beta, "minus")
    err = abs((1.0 - gp.root_plus()) - gm.root_plus())
    rows.append(("spin_flip_symmetry", err, 1e-12, int(err < 1e-12)))

    # contour flip ratio on the same instance
    cs = contours.enumerate_contours(t)
    worst = 0.0
    for c in cs.contours:
        below = contours.below_vertices(t, c)
        spins = np.array(
            [1 if (lvl, p) in below else -1
             for lvl in range(t.top_level) for p in range(t.level_sizes[lvl])],
            dtype=np.int8,
        )
        ref = -np.ones_like(spins)
        ratio = gm.prob_of(spins) / gm.prob_of(ref)
        expected = math.exp(-2.0 * args.beta * c.length)
        worst = max(worst, abs(ratio - expected) / expected)
    rows.append(("contour_flip_ratio", worst, 1e-12, int(worst < 1e-12)))
    return ExperimentReport(
        "oracle",
        {"levels": args.levels, "width_cap": args.width_cap, "beta": args.beta},
        ("check", "max_error", "tolerance", "passed"),
        rows,
        {"all_passed": int(all(r[3] for r in rows))},
    )


# -- argument plumbing ---------------------------------------------------------


def _beta_grid(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _levels_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdt-ising",
        description="Seeded experiments on Ising models over random Lorentzian triangulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, trials_default=1000):
        p.add_argument("--seed", type=int, default=0, help="master seed (64-bit)")
        p.add_argument("--trials", type=int, default=trials_default)
        p.add_argument("--out", type=str, default=None, help="output path")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sample", help="sample triangulations and level-size histograms")
    common(p)
    p.add_argument("--levels", "--n", "-n", type=int, default=5)
    p.add_argument("--save", type=int, default=0, help="save this many sampled triangulations")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("stats", help="level-size law goodness of fit")
    common(p, trials_default=100000)
    p.add_argument("--levels", "--n", "-n", type=int, default=5)
    p.add_argument("--threshold", type=float, default=0.015)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("ising-scan", help="root magnetization over a beta grid")
    common(p)
    p.add_argument("--levels", "--n", "-n", type=int, default=10)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--beta-grid", type=_beta_grid, default=None)
    p.add_argument("--bc", choices=("plus", "minus", "both"), default="both")
    p.add_argument("--sweeps", type=int, default=2000)
    p.add_argument("--replicas", type=int, default=2)
    p.add_argument("--burn-in", type=int, default=1000)
    p.set_defaults(fn=cmd_ising_scan)

    p = sub.add_parser("contours", help="enumerate winding contours and the contour series")
    common(p)
    p.add_argument("--levels", "--n", "-n", type=int, default=3)
    p.add_argument("--width-cap", type=int, default=4)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--max-len", type=int, default=None)
    p.set_defaults(fn=cmd_contours)

    p = sub.add_parser("percolation", help="annealed open-cluster reach estimates")
    common(p, trials_default=10000)
    p.add_argument("--levels", type=_levels_list, dest="levels_list", default=[10, 30])
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--beta-grid", type=_beta_grid, default=None)
    p.set_defaults(fn=cmd_percolation)

    p = sub.add_parser("surgery-selftest", help="insert/collapse roundtrips and reconstruction")
    common(p)
    p.add_argument("--attempts", type=int, default=20000)
    p.set_defaults(fn=cmd_surgery_selftest)

    p = sub.add_parser("oracle", help="exact enumeration cross-checks")
    common(p)
    p.add_argument("--levels", "--n", "-n", type=int, default=2)
    p.add_argument("--width-cap", type=int, default=4)
    p.add_argument("--beta", type=float, default=1.0)
    p.set_defaults(fn=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    path = resolve_output(args.out, f"{report.command}_seed{args.seed}", args.format)
    report.write(path, args.format)
    print(f"{report.command}: {len(report.rows)} rows -> {path}")
    if report.summary:
        print(f"summary: {report.summary}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
