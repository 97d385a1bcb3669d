import csv

import pytest

from gigmine.graph import BipartiteGraph, EdgeInfo


@pytest.fixture
def toy_graph():
    """Three-edge graph: a1-v1, a1-v2, a2-v1."""
    edges = {
        ("a1", "v1"): EdgeInfo(count=1, first_year=2010),
        ("a1", "v2"): EdgeInfo(count=1, first_year=2011),
        ("a2", "v1"): EdgeInfo(count=1, first_year=2012),
    }
    return BipartiteGraph({"a1", "a2"}, {"v1", "v2"}, edges)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


EVENT_HEADER = ["event_id", "artist_id", "venue_id", "date", "city", "state", "country", "lat", "lon", "popularity"]
RELEASE_HEADER = ["artist_id", "label_id", "release_date"]
LABEL_HEADER = ["label_id", "name", "parent_label_id", "is_major_root"]


def event_row(eid, artist, venue, date, city="NYC", state="NY", country="US",
              lat="40.7", lon="-74.0", pop=""):
    return [eid, artist, venue, date, city, state, country, lat, lon, pop]


@pytest.fixture
def corpus_files(tmp_path):
    """Write a small, valid corpus and return the three paths."""

    def _write(events, releases=(), labels=()):
        e, r, l = tmp_path / "events.csv", tmp_path / "releases.csv", tmp_path / "labels.csv"
        write_csv(e, EVENT_HEADER, events)
        write_csv(r, RELEASE_HEADER, releases)
        write_csv(l, LABEL_HEADER, labels)
        return e, r, l

    return _write
