import datetime as dt
import json

import numpy as np
import pytest

from oracles import mle_tail_exponent

from gigmine.errors import GigmineError
from gigmine.ingest import parse_corpus
from gigmine.labeling import label_corpus
from gigmine.synth import GenSpec, generate


def read_corpus(out):
    return parse_corpus(out / "events.csv", out / "releases.csv", out / "labels.csv")


class TestGenSpecValidation:
    def test_bad_sizes(self):
        with pytest.raises(GigmineError):
            GenSpec(n_artists=0)
        with pytest.raises(GigmineError):
            GenSpec(n_venues=0)

    def test_bad_fractions(self):
        with pytest.raises(GigmineError, match="positive_fraction"):
            GenSpec(positive_fraction=0.0)
        with pytest.raises(GigmineError, match="hub_fraction"):
            GenSpec(hub_fraction=1.0)

    def test_bad_tail_and_bias(self):
        with pytest.raises(GigmineError, match="exceed 1"):
            GenSpec(heavy_tail_exponent=1.0)
        with pytest.raises(GigmineError, match="bias"):
            GenSpec(success_venue_bias=0.5)

    def test_bad_years_and_counts(self):
        with pytest.raises(GigmineError, match="years"):
            GenSpec(years=(2017, 2008))
        with pytest.raises(GigmineError, match="negative"):
            GenSpec(future_edge_count=-1)
        with pytest.raises(GigmineError, match="min_events"):
            GenSpec(min_events=0)

    def test_too_many_special_artists(self, tmp_path):
        with pytest.raises(GigmineError, match="exceed"):
            generate(
                GenSpec(n_artists=10, trajectory_artists=6, route_artists=5), tmp_path
            )

    def test_route_needs_enough_venues(self, tmp_path):
        with pytest.raises(GigmineError, match="venues"):
            generate(GenSpec(n_artists=20, n_venues=5, route_artists=1), tmp_path)

    def test_future_edges_need_long_span(self, tmp_path):
        with pytest.raises(GigmineError, match="span"):
            generate(
                GenSpec(n_artists=50, years=(2013, 2017), future_edge_count=5), tmp_path
            )

    def test_positives_need_training_years(self, tmp_path):
        with pytest.raises(GigmineError, match="training years"):
            generate(GenSpec(n_artists=50, years=(2015, 2017)), tmp_path)

    def test_infeasible_future_edge_count(self, tmp_path):
        # 3 artists cannot supply 500 brand-new strong pairs
        with pytest.raises(GigmineError, match="future edges"):
            generate(
                GenSpec(
                    n_artists=3,
                    n_venues=5,
                    years=(2008, 2017),
                    positive_fraction=0.3,
                    future_edge_count=500,
                ),
                tmp_path,
            )


class TestDeterminismAndFormat:
    def test_identical_specs_byte_identical_files(self, tmp_path):
        spec = GenSpec(n_artists=40, n_venues=15, seed=9, min_events=5)
        a, b = tmp_path / "a", tmp_path / "b"
        generate(spec, a)
        generate(spec, b)
        for name in ("events.csv", "releases.csv", "labels.csv", "manifest.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_different_seed_different_corpus(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        generate(GenSpec(n_artists=40, n_venues=15, seed=1, min_events=5), a)
        generate(GenSpec(n_artists=40, n_venues=15, seed=2, min_events=5), b)
        assert (a / "events.csv").read_bytes() != (b / "events.csv").read_bytes()

    def test_ingest_accepts_every_row(self, tmp_path):
        manifest = generate(
            GenSpec(
                n_artists=80,
                n_venues=25,
                seed=4,
                min_events=5,
                trajectory_artists=2,
                route_artists=1,
                future_edge_count=10,
            ),
            tmp_path,
        )
        corpus = read_corpus(tmp_path)
        report = corpus.load_report
        assert report.events_rejected == 0
        assert report.releases_rejected == 0
        assert report.labels_rejected == 0
        assert corpus.n_events == manifest["counts"]["events"]
        assert corpus.sizes()["artists"] == 80

    def test_manifest_matches_file(self, tmp_path):
        manifest = generate(GenSpec(n_artists=30, n_venues=12, seed=2, min_events=5), tmp_path)
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk == manifest


class TestPlantedLabels:
    def test_positive_count_and_change_points(self, tmp_path):
        manifest = generate(
            GenSpec(n_artists=60, n_venues=20, seed=5, positive_fraction=0.25, min_events=5),
            tmp_path,
        )
        assert len(manifest["planted_positives"]) == 15
        corpus = read_corpus(tmp_path)
        labels, stats = label_corpus(corpus)
        assert stats["successful"] == 15
        positives = {a for a, lab in labels.items() if lab.successful}
        assert positives == set(manifest["planted_positives"])
        for artist, cp in manifest["change_points"].items():
            assert labels[artist].change_point == dt.date.fromisoformat(cp)

    def test_change_points_inside_training_years(self, tmp_path):
        manifest = generate(
            GenSpec(
                n_artists=60,
                n_venues=20,
                seed=6,
                years=(2008, 2017),
                future_edge_count=4,
                min_events=5,
            ),
            tmp_path,
        )
        for cp in manifest["change_points"].values():
            year = dt.date.fromisoformat(cp).year
            assert 2010 <= year <= manifest["train_end_year"] - 1


class TestPlantedStructure:
    def test_hub_rate_of_positives_pre_change_point(self, tmp_path):
        manifest = generate(
            GenSpec(
                n_artists=400,
                n_venues=50,
                seed=7,
                positive_fraction=0.2,
                success_venue_bias=3.0,
            ),
            tmp_path,
        )
        corpus = read_corpus(tmp_path)
        hubs = set(manifest["hub_venues"])
        cps = {
            a: dt.date.fromisoformat(s) for a, s in manifest["change_points"].items()
        }
        pre_events = [
            ev
            for a, cp in cps.items()
            for ev in corpus.artist_events[a]
            if ev.date < cp
        ]
        n = len(pre_events)
        in_hub = sum(ev.venue_id in hubs for ev in pre_events)
        p = manifest["expected_hub_rate_biased"]
        sigma = (n * p * (1 - p)) ** 0.5
        assert abs(in_hub - n * p) <= 3 * sigma
        assert manifest["expected_hub_rate_biased"] > manifest["expected_hub_rate_base"]

    def test_tail_exponent_recovered(self, tmp_path):
        import csv

        spec = GenSpec(
            n_artists=10_000,
            n_venues=50,
            seed=8,
            positive_fraction=0.001,
            heavy_tail_exponent=2.2,
            min_events=3,
        )
        manifest = generate(spec, tmp_path)
        positives = set(manifest["planted_positives"])
        per_artist: dict[str, int] = {}
        with open(tmp_path / "events.csv", newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                a = row["artist_id"]
                per_artist[a] = per_artist.get(a, 0) + 1
        counts = [
            c for a, c in per_artist.items()
            if a not in positives  # positives' counts are deliberately inflated
        ]
        gamma = mle_tail_exponent(np.asarray(counts, dtype=float), k_min=3)
        assert abs(gamma - 2.2) <= 0.3

    def test_trajectory_plan_matches_emitted_events(self, tmp_path):
        manifest = generate(
            GenSpec(
                n_artists=50,
                n_venues=20,
                seed=9,
                trajectory_artists=3,
                min_events=5,
            ),
            tmp_path,
        )
        corpus = read_corpus(tmp_path)
        assert len(manifest["trajectory_artists"]) == 3
        for artist, plan in manifest["trajectory_artists"].items():
            per_year: dict[int, int] = {}
            for ev in corpus.artist_events[artist]:
                per_year[ev.date.year] = per_year.get(ev.date.year, 0) + 1
            assert per_year == {int(y): c for y, c in plan.items()}
            ramp = [c for _, c in sorted(plan.items())]
            assert all(b > a for a, b in zip(ramp, ramp[1:]))

    def test_route_artists_walk_the_planted_route(self, tmp_path):
        manifest = generate(
            GenSpec(
                n_artists=40,
                n_venues=20,
                seed=10,
                route_artists=2,
                min_events=5,
            ),
            tmp_path,
        )
        corpus = read_corpus(tmp_path)
        route = manifest["planted_route"]
        assert len(route) == 5
        for artist in manifest["route_artists"]:
            events = sorted(corpus.artist_events[artist], key=lambda e: (e.date, e.event_id))
            cities = [e.city for e in events]
            assert len(cities) >= 100
            want = [route[t % 5] for t in range(len(cities))]
            assert cities == want

    def test_future_edges_are_new_pairs_past_cutoff(self, tmp_path):
        manifest = generate(
            GenSpec(
                n_artists=150,
                n_venues=40,
                seed=11,
                years=(2008, 2017),
                future_edge_count=15,
                min_events=8,
            ),
            tmp_path,
        )
        corpus = read_corpus(tmp_path)
        cutoff = manifest["train_end_year"]
        planted = {tuple(p) for p in manifest["planted_future_edges"]}
        assert len(planted) == 15
        train_pairs = {
            (ev.artist_id, ev.venue_id)
            for ev in corpus.events
            if ev.date.year <= cutoff
        }
        test_pairs = {
            (ev.artist_id, ev.venue_id)
            for ev in corpus.events
            if ev.date.year > cutoff
        }
        assert planted <= test_pairs
        assert not planted & train_pairs
        # every non-planted test pair already exists in training
        assert test_pairs - planted <= train_pairs
        assert manifest["test_years"] == [cutoff + 1, 2017]
