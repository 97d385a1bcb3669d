"""Command-line entry point.

Subcommands: ingest, stats, task1, task2, task3, routes, synth. All tunables
live in one declarative JSON config (``--config``, ``-`` for stdin) with a
few flag overrides; unknown keys are rejected up front. Every report embeds
the fully resolved config and a version string so a report is reproducible
from its own contents; timestamps sit in a separate field so reruns are
otherwise bit-identical.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import datetime as dt
import json
import logging
import os
import subprocess
import sys
from pathlib import Path

from gigmine import __version__
from gigmine.birank import (
    birank,
    score_histogram,
    seed_scores,
    temporal_weights,
    yearly_trajectories,
)
from gigmine.errors import GigmineError
from gigmine.ingest import filter_min_activity, filter_post_2007, parse_corpus
from gigmine.labeling import change_points, label_corpus
from gigmine.linkpred import ALL_PREDICTORS, SplitSpec, run_task2
from gigmine.routes import city_sequences, mine_routes
from gigmine.success import run_task1
from gigmine.synth import GenSpec, generate

log = logging.getLogger("gigmine")


class UsageError(Exception):
    """Bad invocation or config; maps to exit code 2."""


DEFAULTS: dict = {
    "seed": 0,
    "threads": 0,  # 0 = logical cores
    "corpus": {
        "dir": "",
        "events": "events.csv",
        "releases": "releases.csv",
        "labels": "labels.csv",
    },
    "preprocess": {
        "post_platform_filter": True,
        "cutoff": "2007-01-01",
        "min_activity_filter": True,
        "activity_threshold": 10,
        "recursive": True,
    },
    "task1": {
        "mode": "count",
        "n_splits": 3,
        "test_fraction": 0.2,
        "cv_folds": 3,
        "threshold": 0.5,
        "c_grid": [0.01, 0.1, 1.0, 10.0, 100.0],
        "k_grid": [250, 500, 750, 1000],
    },
    "task2": {
        "predictors": list(ALL_PREDICTORS),
        "train_end_year": 2015,
        "test_years": [2016, 2017],
        "hidden_fraction": 0.2,
        "n_random_splits": 3,
        "core_k": 5,
        "svd_k": 25,
        "neg_multiple": 10,
        "neg_floor": 100000,
        "exhaustive_negatives": False,
        "walks_per_node": 40,
        "walk_length": 10,
        "embed_dim": 128,
        "embed_window": 5,
        "embed_epochs": 5,
    },
    "task3": {
        "delta": 0.85,
        "alpha": 0.85,
        "beta": 0.85,
        "ref_year": 0,  # 0 = most recent year in the corpus
        "window_years": 3,
        "count_scaled": False,
        "top_k": 20,
        "bins": 20,
    },
    "routes": {"n_values": [4, 5], "top_k": 20},
    "synth": {
        "n_artists": 1000,
        "n_venues": 200,
        "years": [2008, 2017],
        "heavy_tail_exponent": 2.2,
        "min_events": 10,
        "positive_fraction": 0.1,
        "success_venue_bias": 3.0,
        "hub_fraction": 0.05,
        "future_edge_count": 0,
        "trajectory_artists": 0,
        "route_artists": 0,
    },
}


def _merge_config(user: dict, defaults: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise UsageError(f"unknown config key: {here}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise UsageError(f"config key {here} must be an object")
            out[key] = _merge_config(value, defaults[key], here)
        else:
            out[key] = value
    return out


def load_config(arg: str | None, seed: int | None, threads: int | None) -> dict:
    if arg is None:
        user = {}
    elif arg == "-":
        try:
            user = json.load(sys.stdin)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config on stdin is not valid JSON: {exc}")
    else:
        path = Path(arg)
        if not path.exists():
            raise UsageError(f"config file not found: {path}")
        try:
            user = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(user, dict):
        raise UsageError("config must be a JSON object")
    config = _merge_config(user, DEFAULTS)
    if seed is not None:
        config["seed"] = seed
    if threads is not None:
        config["threads"] = threads
    if config["threads"] == 0:
        config["threads"] = os.cpu_count() or 1
    return config


def _version() -> str:
    try:
        described = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if described.returncode == 0 and described.stdout.strip():
            return f"gigmine {__version__} ({described.stdout.strip()})"
    except (OSError, subprocess.SubprocessError):
        pass
    return f"gigmine {__version__}"


def _corpus_paths(config: dict) -> tuple[Path, Path, Path]:
    c = config["corpus"]
    base = Path(c["dir"]) if c["dir"] else Path(".")
    paths = tuple(base / c[k] if not Path(c[k]).is_absolute() else Path(c[k])
                  for k in ("events", "releases", "labels"))
    for p in paths:
        if not p.exists():
            raise UsageError(f"corpus file not found: {p}")
    return paths


def _load_preprocessed(config: dict):
    """Parse, filter, and label the corpus per the preprocess config."""
    events_f, releases_f, labels_f = _corpus_paths(config)
    log.info("parsing corpus from %s", events_f.parent)
    corpus = parse_corpus(events_f, releases_f, labels_f)
    stages = {"parsed": corpus.sizes()}
    pp = config["preprocess"]
    if pp["post_platform_filter"]:
        corpus = filter_post_2007(corpus, cutoff=dt.date.fromisoformat(pp["cutoff"]))
        stages["post_platform_filter"] = corpus.sizes()
    labels, label_stats = label_corpus(corpus)
    if pp["min_activity_filter"]:
        corpus = filter_min_activity(
            corpus,
            threshold=pp["activity_threshold"],
            change_points=change_points(labels),
            recursive=pp["recursive"],
        )
        labels, label_stats = label_corpus(corpus)
        stages["min_activity_filter"] = corpus.sizes()
    log.info("corpus ready: %s", corpus.sizes())
    return corpus, labels, {"stages": stages, "labeling": label_stats}


def _report(config: dict, payload: dict) -> dict:
    return {
        "version": _version(),
        "config": config,
        "generated_at": dt.datetime.now(dt.timezone.utc).isoformat(),
        **payload,
    }


def _write_json(path: Path, obj: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8",
    )
    log.info("wrote %s", path)


def cmd_ingest(config: dict, out: Path) -> dict:
    corpus, _labels, info = _load_preprocessed(config)
    payload = {
        "report": "ingest",
        "load": corpus.load_report.to_dict() if corpus.load_report else {},
        **info,
        "final": corpus.sizes(),
    }
    _write_json(out / "ingest-report.json", _report(config, payload))
    return payload


def cmd_stats(config: dict, out: Path) -> dict:
    events_f, releases_f, labels_f = _corpus_paths(config)
    corpus = parse_corpus(events_f, releases_f, labels_f)
    g = corpus.graph()
    lo, hi = corpus.year_span()
    payload = {
        "report": "stats",
        "concerts": corpus.n_events,
        "artists": len(corpus.artist_events),
        "venues": len(corpus.venue_events),
        "releases": len(corpus.releases),
        "labels": len(corpus.labels.nodes),
        "major_roots": len(corpus.labels.major_roots),
        "edges": g.n_edges,
        "year_span": [lo, hi],
        "load": corpus.load_report.to_dict() if corpus.load_report else {},
    }
    _write_json(out / "stats-report.json", _report(config, payload))
    return payload


def cmd_task1(config: dict, out: Path) -> dict:
    corpus, labels, info = _load_preprocessed(config)
    t1 = config["task1"]
    result = run_task1(
        corpus,
        labels,
        mode=t1["mode"],
        n_splits=t1["n_splits"],
        test_fraction=t1["test_fraction"],
        cv_folds=t1["cv_folds"],
        threshold=t1["threshold"],
        c_grid=tuple(t1["c_grid"]),
        k_grid=tuple(t1["k_grid"]),
        seed=config["seed"],
    )
    payload = {"report": "task1", **info, **result}
    _write_json(out / "task1-report.json", _report(config, payload))
    return payload


def cmd_task2(config: dict, out: Path) -> dict:
    corpus, _labels, info = _load_preprocessed(config)
    t2 = config["task2"]
    result = run_task2(
        corpus,
        predictors=tuple(t2["predictors"]),
        split=SplitSpec(
            kind="temporal",
            train_end_year=t2["train_end_year"],
            test_years=frozenset(t2["test_years"]),
            seed=config["seed"],
        ),
        hidden_fraction=t2["hidden_fraction"],
        n_random_splits=t2["n_random_splits"],
        core_k=t2["core_k"],
        svd_k=t2["svd_k"],
        neg_multiple=t2["neg_multiple"],
        neg_floor=t2["neg_floor"],
        exhaustive_negatives=t2["exhaustive_negatives"],
        seed=config["seed"],
        walks_per_node=t2["walks_per_node"],
        walk_length=t2["walk_length"],
        embed_dim=t2["embed_dim"],
        embed_window=t2["embed_window"],
        embed_epochs=t2["embed_epochs"],
    )
    payload = {"report": "task2", **info, **result}
    _write_json(out / "task2-report.json", _report(config, payload))
    return payload


def cmd_task3(config: dict, out: Path) -> dict:
    corpus, labels, info = _load_preprocessed(config)
    t3 = config["task3"]
    g = corpus.graph()
    ref_year = t3["ref_year"] or corpus.year_span()[1]
    result = birank(
        g,
        weights=temporal_weights(g, delta=t3["delta"], ref_year=ref_year),
        seeds=seed_scores(g),
        alpha=t3["alpha"],
        beta=t3["beta"],
        count_scaled=t3["count_scaled"],
    )
    top = t3["top_k"]
    top_artists = sorted(
        result.artist_scores.items(), key=lambda kv: (-kv[1], kv[0])
    )[:top]
    top_venues = sorted(
        result.venue_scores.items(), key=lambda kv: (-kv[1], kv[0])
    )[:top]
    hist = score_histogram(
        result, {a: lab.successful for a, lab in labels.items()}, bins=t3["bins"]
    )
    trajectories = yearly_trajectories(
        corpus,
        window_years=t3["window_years"],
        delta=t3["delta"],
        alpha=t3["alpha"],
        beta=t3["beta"],
        count_scaled=t3["count_scaled"],
        threads=config["threads"],
    )
    traj_csv = out / "task3-trajectories.csv"
    traj_csv.parent.mkdir(parents=True, exist_ok=True)
    with open(traj_csv, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["artist_id", "year", "rank", "score"])
        for year in sorted(trajectories):
            ranking = trajectories[year]
            for artist in sorted(ranking, key=lambda a: (ranking[a]["rank"], a)):
                writer.writerow(
                    [artist, year, ranking[artist]["rank"],
                     f"{ranking[artist]['score']:.10g}"]
                )
    log.info("wrote %s", traj_csv)
    payload = {
        "report": "task3",
        **info,
        "ref_year": ref_year,
        "iterations": result.iterations,
        "converged": result.converged,
        "top_artists": [[a, s] for a, s in top_artists],
        "top_venues": [[v, s] for v, s in top_venues],
        "histogram": hist,
        "trajectory_years": sorted(trajectories),
    }
    _write_json(out / "task3-report.json", _report(config, payload))
    return payload


def _city_display(city: tuple) -> str:
    return ", ".join(part for part in city if part)


def cmd_routes(config: dict, out: Path) -> dict:
    corpus, _labels, info = _load_preprocessed(config)
    r = config["routes"]
    ranked = mine_routes(
        city_sequences(corpus), n_values=tuple(r["n_values"]), top_k=r["top_k"]
    )
    csv_path = out / "routes-report.csv"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "rank", "route", "count", "bidirectional"])
        for n in sorted(ranked):
            for rank, rc in enumerate(ranked[n], start=1):
                writer.writerow(
                    [
                        n,
                        rank,
                        "|".join(_city_display(c) for c in rc.route),
                        rc.count,
                        int(rc.bidirectional),
                    ]
                )
    log.info("wrote %s", csv_path)
    payload = {
        "report": "routes",
        **info,
        "routes": {
            str(n): [
                {
                    "route": [_city_display(c) for c in rc.route],
                    "count": rc.count,
                    "bidirectional": rc.bidirectional,
                }
                for rc in ranked[n]
            ]
            for n in sorted(ranked)
        },
    }
    _write_json(out / "routes-report.json", _report(config, payload))
    return payload


def cmd_synth(config: dict, out: Path) -> dict:
    s = config["synth"]
    spec = GenSpec(
        n_artists=s["n_artists"],
        n_venues=s["n_venues"],
        years=tuple(s["years"]),
        seed=config["seed"],
        heavy_tail_exponent=s["heavy_tail_exponent"],
        min_events=s["min_events"],
        positive_fraction=s["positive_fraction"],
        success_venue_bias=s["success_venue_bias"],
        hub_fraction=s["hub_fraction"],
        future_edge_count=s["future_edge_count"],
        trajectory_artists=s["trajectory_artists"],
        route_artists=s["route_artists"],
    )
    manifest = generate(spec, out)
    # stdout carries a ready-to-pipe config pointing at the generated corpus
    handoff: dict = {
        "corpus": {
            "dir": str(out),
            "events": "events.csv",
            "releases": "releases.csv",
            "labels": "labels.csv",
        }
    }
    if manifest["test_years"]:
        handoff["task2"] = {
            "train_end_year": manifest["train_end_year"],
            "test_years": manifest["test_years"],
        }
    print(json.dumps(handoff, indent=2, sort_keys=True))
    return manifest


COMMANDS = {
    "ingest": cmd_ingest,
    "stats": cmd_stats,
    "task1": cmd_task1,
    "task2": cmd_task2,
    "task3": cmd_task3,
    "routes": cmd_routes,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gigmine",
        description="Concert-graph analytics: success forecasting, venue link "
        "prediction, temporal influence ranking, tour-route mining.",
    )
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("ingest", "parse and filter a corpus, write ingest-report.json"),
        ("stats", "raw corpus statistics without filtering"),
        ("task1", "artist success forecasting experiment"),
        ("task2", "artist-venue link prediction experiment"),
        ("task3", "temporally weighted two-sided ranking"),
        ("routes", "frequent touring route mining"),
        ("synth", "generate a synthetic corpus with planted ground truth"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file, or - for stdin")
        p.add_argument("--seed", type=int, help="override config seed")
        p.add_argument(
            "--threads", type=int, help="worker pool size (0 = logical cores)"
        )
        p.add_argument(
            "--out", default=".", help="output directory for reports (default .)"
        )
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config, args.seed, args.threads)
        out = Path(args.out)
        COMMANDS[args.command](config, out)
    except UsageError as exc:
        print(f"gigmine: {exc}", file=sys.stderr)
        return 2
    except GigmineError as exc:
        print(f"gigmine: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
