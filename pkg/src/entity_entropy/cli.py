"""``entity-entropy`` command line interface.

Subcommands: analyze, overlap, temporal, simulate, fit. Each writes CSV/JSON
tables into ``--out``; ``--figures`` additionally renders PNGs from them.

Exit codes: 0 success, 1 I/O or validation error, 2 no eligible data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np
from scipy import stats

from .entropy import (category_stats, correlation, coverage_rank_table, entropy_profiles,
                      max_corpus_entropy, size_entropy_pairs, table_entropy)
from . import fitting, genmodel, overlap, temporal
from .corpus import CorpusError, CorpusIndex, filter_entities, load_corpus
from .reports import histogram, kde_curve, write_csv, write_json

log = logging.getLogger("entity_entropy")

EXIT_OK, EXIT_ERROR, EXIT_EMPTY = 0, 1, 2


class EmptyData(Exception):
    """Nothing eligible to analyse; maps to exit code 2."""


# ---------------------------------------------------------------- helpers


def _corpus_paths(args) -> tuple[Path, Path, Path]:
    base = Path(args.corpus) if args.corpus else None
    paths = []
    for name in ("docs", "entities", "facts"):
        explicit = getattr(args, name)
        if explicit:
            paths.append(Path(explicit))
        elif base is not None:
            paths.append(base / f"{name}.jsonl")
        else:
            raise CorpusError(f"no {name} file given (use --{name} or --corpus)")
    return tuple(paths)


def _load(args) -> CorpusIndex:
    index = load_corpus(*_corpus_paths(args))
    return filter_entities(index, args.min_facts, args.min_docs)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _plotting():
    from . import plotting
    return plotting


def _bandwidth(value: str):
    try:
        return float(value)
    except ValueError:
        return value


# ---------------------------------------------------------------- commands


def cmd_analyze(args) -> int:
    index = _load(args)
    if len(index) == 0:
        raise EmptyData("no entities admitted")
    out = _outdir(args)
    profiles = entropy_profiles(index)
    write_csv(out / "entropy_profiles.csv",
              ["entity_id", "category", "total_facts", "doc_count", "entropy_bits"],
              [(p.entity_id, p.category, p.total_facts, p.doc_count, p.entropy_bits)
               for p in profiles])
    write_csv(out / "category_stats.csv",
              ["category", "mean_entropy", "median_entropy", "std_dev", "count"],
              [(c.category, c.mean_entropy, c.median_entropy, c.std_dev, c.count)
               for c in category_stats(index)])
    size = size_entropy_pairs(index, args.correlation)
    write_csv(out / "size_entropy.csv", ["entity_id", "total_facts", "entropy_bits"],
              [(e, n, h) for e, (n, h) in zip(size.entity_ids, size.pairs)])
    coverage = coverage_rank_table(index, args.threshold)
    write_csv(out / "coverage_rank.csv", ["rank", "entity_id", "coverage_count"],
              [(i, e, c) for i, (e, c) in enumerate(coverage, 1)])

    h = np.array([p.entropy_bits for p in profiles])
    corpus_max = max_corpus_entropy(index.n_docs)
    hist = histogram(h, args.bins, upper=corpus_max)
    write_csv(out / "entropy_histogram.csv", ["bin_left", "bin_right", "count"],
              zip(hist.edges[:-1], hist.edges[1:], hist.counts))
    kde = kde_curve(h, _bandwidth(args.bandwidth))
    write_csv(out / "entropy_kde.csv", ["entropy_bits", "density"], zip(kde.x, kde.density))

    cover_counts = np.array([c for _, c in coverage])
    write_json(out / "summary.json", {
        "n_entities": len(index),
        "n_documents": index.n_docs,
        "n_facts": index.n_facts,
        "corpus_max_bits": corpus_max,
        "entropy_mean": float(h.mean()),
        "entropy_median": float(np.median(h)),
        "entropy_std": float(h.std()),
        "entropy_skewness": float(stats.skew(h)) if np.ptp(h) > 0 else None,
        "kde_bandwidth": kde.bandwidth,
        "size_entropy_correlation": size.correlation,
        "correlation_method": size.method,
        "coverage_threshold": args.threshold,
        "coverage_p90": float(np.percentile(cover_counts, 90)),
        "share_under_10_docs": float(np.mean(cover_counts < 10)),
    })
    if args.figures:
        plt = _plotting()
        plt.entropy_distribution(hist, kde, out / "entropy_distribution.png", corpus_max)
        plt.size_vs_entropy([p[0] for p in size.pairs], [p[1] for p in size.pairs],
                            out / "size_entropy.png", size.correlation)
        plt.coverage_rank(cover_counts, out / "coverage_rank.png", args.threshold)
    print(f"analyzed {len(index)} entities over {index.n_docs} documents -> {out}")
    return EXIT_OK


def cmd_overlap(args) -> int:
    index = _load(args)
    if len(index) == 0:
        raise EmptyData("no entities admitted")
    out = _outdir(args)
    graph = overlap.build_overlap(index, args.min_weight)
    write_csv(out / "overlap_edges.csv", ["entity_i", "entity_j", "weight"],
              overlap.edge_list(graph))
    matrix = overlap.adjacency_matrix(graph)
    write_csv(out / "adjacency.csv", list(graph.nodes), matrix.tolist())
    report = {"n_nodes": graph.n, "n_edges": len(graph.edges),
              "connectivity": overlap.connectivity(graph), "min_weight": args.min_weight}
    sub = None
    if args.top_k is not None:
        k = min(args.top_k, graph.n)
        sub = overlap.top_k_subgraph(graph, k)
        write_csv(out / f"adjacency_top{k}.csv", list(sub.nodes),
                  overlap.adjacency_matrix(sub).tolist())
        report["top_k"] = {"k": k, "n_edges": len(sub.edges),
                           "connectivity": overlap.connectivity(sub)}
    write_json(out / "connectivity.json", report)
    if args.figures:
        plt = _plotting()
        plt.adjacency_heatmap(matrix, out / "adjacency.png", "all entities")
        if sub is not None:
            plt.adjacency_heatmap(overlap.adjacency_matrix(sub), out / "adjacency_top.png",
                                  f"top {sub.n} entities")
    conn = report["connectivity"]
    print(f"connectivity: {'n/a' if conn is None else f'{conn:.4f}'} "
          f"({len(graph.edges)} edges, {graph.n} nodes)")
    return EXIT_OK


def cmd_temporal(args) -> int:
    index = _load(args)
    if len(index) == 0:
        raise EmptyData("no entities admitted")
    out = _outdir(args)
    series_list = []
    for eid in index.entity_ids:
        try:
            series_list.append(temporal.entropy_series(index, eid, args.horizon))
        except temporal.TemporalUnavailable as exc:
            log.warning("skipping %s: %s", eid, exc)
    if not series_list:
        raise EmptyData("no entities with dated documents")

    write_csv(out / "entropy_series.csv", ["entity_id", "day_offset", "entropy_bits"],
              ((s.entity_id, t, v) for s in series_list for t, v in enumerate(s.values)))
    pairs = [p for s in series_list
             if (p := temporal.early_vs_final(s, args.early, args.final)) is not None]
    write_csv(out / "early_final.csv", ["entity_id", "early", "final", "class"],
              [(p.entity_id, p.early, p.final, p.label) for p in pairs])
    fit_all = temporal.early_final_regression(pairs, "all")
    fit_growing = temporal.early_final_regression(pairs, "growing")
    write_json(out / "early_final_regression.json", {
        "early_day": args.early, "final_day": args.final, "n_pairs": len(pairs),
        "n_growing": sum(p.label == "growing" for p in pairs),
        "all": dict(zip(("slope", "intercept"), fit_all)) if fit_all else None,
        "growing": dict(zip(("slope", "intercept"), fit_growing)) if fit_growing else None,
        "spearman": correlation([p.early for p in pairs], [p.final for p in pairs]),
    })
    if args.burst_threshold is not None:
        rows = []
        for s in series_list:
            if len(s) < 2:
                continue
            d = temporal.delta_series(s)
            rows.extend((s.entity_id, t, d[t - 1], s.values[t])
                        for t in temporal.detect_bursts(s, args.burst_threshold))
        write_csv(out / "bursts.csv", ["entity_id", "day_offset", "delta_bits", "entropy_bits"],
                  rows)
    if args.figures:
        plt = _plotting()
        top = sorted(series_list, key=lambda s: (-s.values[-1], s.entity_id))[:5]
        plt.entropy_over_time({s.entity_id: s.values for s in top}, out / "entropy_top5.png")
        if pairs:
            plt.early_vs_final([p.early for p in pairs], [p.final for p in pairs],
                               [p.label == "growing" for p in pairs], out / "early_final.png",
                               fit_all, fit_growing, args.early, args.final)
    print(f"wrote series for {len(series_list)} entities, {len(pairs)} early/final pairs")
    return EXIT_OK


def _load_schedule(args) -> genmodel.DocSchedule:
    if args.schedule == "corpus":
        index = load_corpus(*_corpus_paths(args))
        counts = temporal.daily_document_counts(index)
        if args.days is not None:
            counts = (counts + [0] * args.days)[:args.days]
        return genmodel.DocSchedule(counts)
    if args.schedule == "lognormal":
        if args.days is None:
            raise ValueError("--days is required for a lognormal schedule")
        return genmodel.DocSchedule.lognormal(args.schedule_mu, args.schedule_sigma, args.days,
                                              rng=args.seed)
    path = Path(args.schedule)
    text = path.read_text(encoding="utf-8").strip()
    if text.startswith("["):
        counts = json.loads(text)
    else:
        counts = [int(tok) for tok in text.replace(",", " ").split()]
    if args.days is not None:
        counts = (list(counts) + [0] * args.days)[:args.days]
    return genmodel.DocSchedule(counts)


def _read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object")
    return data


def cmd_simulate(args) -> int:
    if args.population is None and args.params is None:
        raise ValueError("one of --params or --population is required")
    schedule = _load_schedule(args)
    out = _outdir(args)
    write_csv(out / "doc_schedule.csv", ["day", "documents"], enumerate(schedule.counts))
    if args.population is not None:
        return _simulate_population(args, schedule, out)

    params = genmodel.GenParams.from_dict(_read_json(args.params))
    traj = genmodel.simulate(params, schedule, args.mode, args.seed, args.window)
    write_csv(out / "trajectory.csv",
              ["day", "entropy_bits", "pbar", "baseline_term", "feedback_term", "new_docs",
               "docs_with_facts"],
              zip(range(len(traj)), traj.entropy_bits, traj.pbar, traj.baseline_term,
                  traj.feedback_term, schedule.counts, traj.docs_with_facts))
    write_csv(out / "doc_facts.csv", ["day", "doc_index", "facts"],
              ((t, i, f) for t, day in enumerate(traj.doc_facts) for i, f in enumerate(day)))
    write_json(out / "simulation.json", {"params": params.to_dict(), "mode": args.mode,
                                         "seed": args.seed, "window": args.window,
                                         "days": len(schedule),
                                         "final_entropy": traj.entropy_bits[-1]
                                         if len(traj) else 0.0})
    if args.figures:
        plt = _plotting()
        plt.trajectory_decomposition(traj.entropy_bits, traj.baseline_term, traj.feedback_term,
                                     out / "trajectory.png")
        if len(traj) > 1:
            plt.daily_deltas(temporal.delta_series(traj.entropy_bits), out / "deltas.png")
        plt.document_schedule(schedule.counts, out / "doc_schedule.png")
    print(f"simulated {len(schedule)} days, final entropy "
          f"{traj.entropy_bits[-1] if len(traj) else 0.0:.4f} bits -> {out}")
    return EXIT_OK


def population_summary(trajs, early_day: int = 10, final_day: int = 90) -> tuple[dict, list]:
    """Final-entropy distribution and early/final growth statistics for a simulated population.

    Entities that never receive a fact are not admitted, mirroring the corpus
    rule that an entity needs at least one fact.
    """
    rows = []
    for i, tr in enumerate(trajs):
        fm = tr.first_mention
        if fm is None:
            continue
        s = temporal.series_from_values(tr.entropy_bits[fm:], f"sim{i:05d}")
        ef = temporal.early_vs_final(s, early_day, final_day)
        rows.append((s.entity_id, fm, float(tr.entropy_bits[-1]),
                     ef.early if ef else None, ef.final if ef else None,
                     ef.label if ef else None))
    final = np.array([r[2] for r in rows])
    # early/final correlation over entities whose entropy moved at least once
    moved = [r for r in rows if r[4] is not None and r[4] > 0]
    summary = {
        "n_simulated": len(trajs),
        "n_admitted": len(rows),
        "entropy_mean": float(final.mean()) if rows else None,
        "entropy_median": float(np.median(final)) if rows else None,
        "entropy_skewness": float(stats.skew(final)) if rows and np.ptp(final) > 0 else None,
        "early_day": early_day,
        "final_day": final_day,
        "n_early_final": len(moved),
        "early_final_spearman": correlation([r[3] for r in moved], [r[4] for r in moved]),
    }
    return summary, rows


def _simulate_population(args, schedule, out: Path) -> int:
    if args.population == "heavy-tail":
        spec = genmodel.HEAVY_TAIL_POPULATION
    else:
        spec = genmodel.PopulationSpec.from_dict(_read_json(args.population))
    params, trajs = genmodel.simulate_population(spec, schedule, args.n_entities, args.seed,
                                                 args.mode, args.window)
    summary, rows = population_summary(trajs, args.early, args.final)
    if summary["n_admitted"] == 0:
        raise EmptyData("no simulated entity received any facts")
    alpha = {f"sim{i:05d}": p.alpha_e for i, p in enumerate(params)}
    write_csv(out / "population.csv",
              ["entity_id", "alpha_e", "first_mention_day", "final_entropy", "early", "final",
               "class"], [(r[0], alpha[r[0]], *r[1:]) for r in rows])
    final = np.array([r[2] for r in rows])
    hist = histogram(final, args.bins)
    write_csv(out / "population_histogram.csv", ["bin_left", "bin_right", "count"],
              zip(hist.edges[:-1], hist.edges[1:], hist.counts))
    write_json(out / "population_summary.json",
               {**summary, "spec": dataclasses.asdict(spec), "seed": args.seed,
                "mode": args.mode, "days": len(schedule)})
    if args.figures:
        plt = _plotting()
        plt.entropy_distribution(hist, kde_curve(final), out / "population_entropy.png")
        ef = [r for r in rows if r[3] is not None]
        if ef:
            plt.early_vs_final([r[3] for r in ef], [r[4] for r in ef],
                               [r[5] == "growing" for r in ef], out / "population_early_final.png",
                               early_day=args.early, final_day=args.final)
    print(f"simulated {len(trajs)} entities ({summary['n_admitted']} admitted), mean "
          f"{summary['entropy_mean']:.3f} / median {summary['entropy_median']:.3f} bits")
    return EXIT_OK


def cmd_fit(args) -> int:
    index = _load(args)
    if len(index) == 0:
        raise EmptyData("no entities admitted")
    out = _outdir(args)
    config = fitting.FitConfig(restarts=args.restarts, screen=args.screen,
                               max_iterations=args.max_iterations,
                               tolerance=args.tolerance, seed=args.seed, window=args.window,
                               eval_days=args.eval_days)
    results, excluded = fitting.fit_corpus(index, args.train_days, args.eval_days, config,
                                           args.workers)
    for eid, reason in excluded.items():
        log.info("excluded %s: %s", eid, reason)
    if not results:
        raise EmptyData("no entities eligible for fitting")

    write_csv(out / "fit_results.csv",
              ["entity_id", "train_days", "alpha_e", "delta_e", "alpha_local", "alpha_global",
               "alpha_docs", "train_rmse", "test_rmse", "converged", "iterations",
               "restarts_used", "anchor_day"],
              [(r.entity_id, r.train_days, r.params.alpha_e, r.params.delta_e,
                r.params.alpha_local, r.params.alpha_global, r.params.alpha_docs, r.train_rmse,
                r.test_rmse, r.converged, r.iterations, r.restarts_used, r.anchor)
               for r in results])
    header = ["train_days", "mean_rmse", "median_rmse", "std_rmse", "valid_samples"]
    summary = fitting.fit_summary(results, "test")
    write_csv(out / "fit_summary.csv", header, [[row[h] for h in header] for row in summary])
    train_summary = fitting.fit_summary(results, "train")
    write_csv(out / "fit_summary_train.csv", header,
              [[row[h] for h in header] for row in train_summary])
    final_h = {t.entity_id: table_entropy(t) for t in index}
    write_csv(out / "fit_scatter.csv",
              ["entity_id", "train_days", "final_entropy", "train_rmse", "test_rmse"],
              [(r.entity_id, r.train_days, final_h[r.entity_id], r.train_rmse, r.test_rmse)
               for r in results])

    totals = list(fitting.document_fact_totals(index).values())
    fact_params = fitting.fit_lognormal(totals) if len(totals) >= 2 else None
    params0 = results[0].params
    simulated = np.random.default_rng(args.seed).lognormal(
        params0.mu_facts, params0.sigma_facts, size=max(len(totals), 1))
    write_csv(out / "fact_distribution.csv", ["source", "facts"],
              [("empirical", v) for v in totals] + [("simulated", v) for v in simulated])
    schedule = temporal.daily_document_counts(index)
    write_csv(out / "doc_schedule.csv", ["day", "documents"], enumerate(schedule))
    write_json(out / "global_params.json", {
        "mu_facts": params0.mu_facts, "sigma_facts": params0.sigma_facts,
        "fitted_from_corpus": fact_params is not None,
        "n_results": len(results), "n_excluded": len(excluded),
        "config": {k: v for k, v in dataclasses.asdict(config).items()
                   if k not in ("mu_facts", "sigma_facts")},
    })
    if args.figures:
        plt = _plotting()
        plt.fit_metrics([final_h[r.entity_id] for r in results],
                        [r.test_rmse if r.test_rmse is not None else r.train_rmse for r in results],
                        [r.train_days for r in results], out / "fit_metrics.png")
        plt.fact_distribution(totals, simulated, out / "fact_distribution.png")
        plt.document_schedule(schedule, out / "doc_schedule.png")
    for row in summary:
        print(f"train {row['train_days']:>3}d: mean RMSE {row['mean_rmse']:.4f} "
              f"(n={row['valid_samples']})")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_corpus_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("corpus")
    g.add_argument("--corpus", help="directory holding docs.jsonl, entities.jsonl, facts.jsonl")
    g.add_argument("--docs", help="documents JSONL file")
    g.add_argument("--entities", help="entities JSONL file")
    g.add_argument("--facts", help="facts JSONL file")
    g.add_argument("--min-facts", type=int, default=1)
    g.add_argument("--min-docs", type=int, default=1)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", "-o", default="report", help="output directory")
    p.add_argument("--figures", action="store_true", help="also render PNG figures")
    p.add_argument("--config", help="JSON file of option defaults (flags win)")


def _train_days(text: str) -> list[int]:
    return [int(x) for x in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entity-entropy", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="entropy profiles, categories, coverage, distribution")
    _add_corpus_args(p)
    _add_common(p)
    p.add_argument("--threshold", type=float, default=0.95, help="coverage threshold")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--bandwidth", default="silverman", help="silverman, scott, or a number")
    p.add_argument("--correlation", choices=("spearman", "pearson"), default="spearman")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("overlap", help="shared-document graph and connectivity")
    _add_corpus_args(p)
    _add_common(p)
    p.add_argument("--top-k", type=int)
    p.add_argument("--min-weight", type=int, default=1)
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("temporal", help="entropy series, early/final growth, bursts")
    _add_corpus_args(p)
    _add_common(p)
    p.add_argument("--horizon", type=int, help="days after first mention (default: to last document)")
    p.add_argument("--burst-threshold", type=float)
    p.add_argument("--early", type=int, default=10)
    p.add_argument("--final", type=int, default=90)
    p.set_defaults(func=cmd_temporal)

    p = sub.add_parser("simulate", help="run the growth model")
    _add_corpus_args(p)
    _add_common(p)
    p.add_argument("--params", help="JSON file of model parameters")
    p.add_argument("--population", help="JSON population spec, or 'heavy-tail'")
    p.add_argument("--n-entities", type=int, default=500)
    p.add_argument("--schedule", default="lognormal",
                   help="'corpus', 'lognormal', or a file of daily document counts")
    p.add_argument("--schedule-mu", type=float, default=genmodel.EMPIRICAL_SCHEDULE_MU)
    p.add_argument("--schedule-sigma", type=float, default=genmodel.EMPIRICAL_SCHEDULE_SIGMA)
    p.add_argument("--days", type=int)
    p.add_argument("--mode", choices=("stochastic", "expectation"), default="stochastic")
    p.add_argument("--window", choices=("day", "cumulative"), default="day")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--early", type=int, default=10)
    p.add_argument("--final", type=int, default=90)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit model parameters per entity")
    _add_corpus_args(p)
    _add_common(p)
    p.add_argument("--train-days", type=_train_days, default=[30, 60, 90],
                   help="training windows, e.g. '30,60,90'")
    p.add_argument("--eval-days", type=int, default=90)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--screen", type=int, default=1024,
                   help="uniform points scored to choose the restart origins")
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--window", choices=("day", "cumulative"), default="day")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_fit)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str] | None):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        data = _read_json(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in data.items()})
        args = parser.parse_args(argv)
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except EmptyData as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (CorpusError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
