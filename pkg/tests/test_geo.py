import csv
import random
import unicodedata
from datetime import datetime, timezone
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from factories import fuzz_strings
from tweetatlas.geo import (Gazetteer, GazetteerError, ResolverMetrics, evaluate_resolver,
                            load_gazetteer, normalize_diacritics, read_entries, read_labels, refine,
                            resolve_all, resolve_location, resolve_record, unknown_report)
from tweetatlas.model import GazetteerEntry, TweetRecord

DATA = Path(__file__).parent / "data"
FIXTURE_GAZ = DATA / "gazetteer_fixture.csv"
FIXTURE_PATCH = DATA / "patch_fixture.csv"


@pytest.fixture(scope="module")
def gaz():
    return load_gazetteer(FIXTURE_GAZ)


@pytest.fixture(scope="module")
def seed_gaz():
    return load_gazetteer()


def rec(tid, location, iso=None, country=None):
    if iso and not country:
        country = iso
    return TweetRecord(datetime(2019, 11, 1, tzinfo=timezone.utc), str(tid), "en", country, None,
                       iso, location, "n", "u", False, "t")


def letters(s):
    return sum(1 for c in s if unicodedata.category(c).startswith("L"))


class TestNormalize:
    @pytest.mark.parametrize("raw,expected", [
        ("São Paulo", "sao paulo"),
        ("Ciudad de México", "ciudad de mexico"),
        ("london", "london"),
        ("ZÜRICH", "zurich"),
        ("İstanbul", "istanbul"),
        ("Straße", "straße"),
        ("Ångström", "angstrom"),
        ("서울", "서울"),
        ("", ""),
    ])
    def test_examples(self, raw, expected):
        assert normalize_diacritics(raw) == expected

    @given(st.text())
    def test_idempotent(self, s):
        once = normalize_diacritics(s)
        assert normalize_diacritics(once) == once

    @given(st.text())
    def test_never_adds_letters(self, s):
        assert letters(normalize_diacritics(s)) <= letters(s)

    @given(st.text())
    def test_no_marks_left(self, s):
        out = unicodedata.normalize("NFD", normalize_diacritics(s))
        assert not any(unicodedata.category(c).startswith("M") for c in out)


class TestResolve:
    def test_paris(self, gaz):
        m = resolve_location("Paris, France", gaz)
        assert (m.country, m.city, m.country_iso) == ("France", "Paris", "FR")

    @pytest.mark.parametrize("text", ["Gotham City", "", "   ", None, "asgard"])
    def test_none(self, gaz, text):
        assert resolve_location(text, gaz) is None

    def test_first_match_wins(self):
        g = Gazetteer([GazetteerEntry("georgia", "Georgia", None, "GE"),
                       GazetteerEntry("atlanta", "United States", "Atlanta", "US")])
        assert g.resolve("Atlanta, Georgia").country_iso == "GE"

    def test_whole_word_only(self, gaz):
        assert resolve_location("Indiana", gaz).country_iso == "US"
        assert resolve_location("Omaha", gaz) is None
        assert resolve_location("Nigerian", gaz) is None

    def test_matched_entry_id(self, gaz):
        m = gaz.resolve("Lyon")
        assert gaz.entries[m.matched_entry_id].possible_match == "lyon"

    def test_regex_pattern(self, gaz):
        assert gaz.resolve("U.S.A").country_iso == "US"
        assert gaz.resolve("Made in Deutschland").country_iso == "DE"

    def test_fictional_checked_before_gazetteer(self, gaz):
        assert gaz.resolve("Gotham City, USA") is None

    def test_seed_gazetteer_traps(self, seed_gaz):
        assert seed_gaz.resolve("Indiana").country_iso == "US"
        assert seed_gaz.resolve("New Delhi, India").country_iso == "IN"
        assert seed_gaz.resolve("Paris").country_iso == "FR"
        assert seed_gaz.resolve("São Paulo, Brasil").country_iso == "BR"
        assert seed_gaz.resolve("Konoha") is None

    @given(st.text(max_size=30))
    def test_normalization_is_canonical(self, seed_gaz, s):
        assert seed_gaz.resolve(s) == seed_gaz.resolve(normalize_diacritics(s))

    def test_seed_gazetteer_covers_many_countries(self, seed_gaz):
        assert len({e.country_iso for e in seed_gaz.entries}) >= 237


class TestIndex:
    def test_equivalent_to_linear_scan_on_fuzz(self, seed_gaz):
        for s in fuzz_strings(seed_gaz, 2000, seed=5):
            assert seed_gaz.resolve(s) == seed_gaz.resolve_linear(s), s

    @settings(max_examples=300)
    @given(st.lists(st.sampled_from(
        ["new", "york", "paris", "texas", "indiana", "u.s.a.", "usa", "georgia", "deutschland",
         "são", "paulo", "x", "-", ",", " ", "méxico", "city", "nyc", "cdmx"]), max_size=6),
        st.text(max_size=5))
    def test_equivalent_on_fixture(self, words, junk):
        g = load_gazetteer(FIXTURE_GAZ).refine(read_entries(FIXTURE_PATCH))
        s = " ".join(words) + junk
        assert g.resolve(s) == g.resolve_linear(s)

    def test_shuffling_index_does_not_change_results(self, seed_gaz):
        strings = fuzz_strings(seed_gaz, 500, seed=8)
        before = [seed_gaz.resolve(s) for s in strings]
        g = load_gazetteer()
        rng = random.Random(1)
        for lst in g.index.values():
            rng.shuffle(lst)
        g.index = dict(rng.sample(list(g.index.items()), len(g.index)))
        assert [g.resolve(s) for s in strings] == before


class TestResolveAll:
    def test_ten_records_seven_resolvable(self, gaz):
        locs = ["Paris", "Tokyo", "Lagos, Nigeria", "Konoha", "somewhere", "USA", "Bogotá",
                "Madrid", "the moon", "Kraków"]
        out, metrics = resolve_all([rec(i, loc) for i, loc in enumerate(locs)], gaz)
        assert (metrics.total, metrics.resolved, metrics.unresolved) == (10, 7, 3)
        assert metrics.detection_rate == 0.7
        assert [r.country_iso for r in out] == ["FR", "JP", "NG", None, None, "US", "CO", "ES", None, "PL"]

    def test_all_resolvable(self, gaz):
        _, m = resolve_all([rec(1, "Paris"), rec(2, "Lyon")], gaz)
        assert m.unresolved == 0 and m.detection_rate == 1.0

    def test_empty(self, gaz):
        _, m = resolve_all([], gaz)
        assert (m.total, m.detection_rate, m.precision) == (0, 0.0, 0.0)

    def test_resolve_record_clears_stale_place(self, gaz):
        r = rec(1, "somewhere", iso="FR", country="France")
        assert resolve_record(r, gaz).country_iso is None

    def test_metrics_merge(self):
        a = ResolverMetrics(10, 7, 3)
        b = ResolverMetrics(5, 1, 4)
        m = a.merge(b)
        assert (m.total, m.resolved, m.unresolved) == (15, 8, 7)
        assert a.merge(b).to_dict() == b.merge(a).to_dict()


class TestUnknownReport:
    def test_example(self):
        rs = [rec(1, "Asgard"), rec(2, "asgard "), rec(3, "Nowhere"), rec(4, "Paris", iso="FR")]
        assert unknown_report(rs) == [("asgard", 2), ("nowhere", 1)]

    def test_none_unresolved(self):
        assert unknown_report([rec(1, "Paris", iso="FR")]) == []

    def test_five_distinct(self, gaz):
        locs = ["Mordor", "mordor", "MORDOR", "Hyrule", "somewhere", "Somewhere", "the moon",
                "in my head", "Paris"]
        out, metrics = resolve_all([rec(i, loc) for i, loc in enumerate(locs)], gaz)
        report = unknown_report(out)
        assert len(report) == 5
        assert sum(n for _, n in report) == metrics.unresolved
        assert report[0] == ("mordor", 3)


class TestRefine:
    def test_cdmx(self, gaz, tmp_path):
        assert gaz.resolve("CDMX") is None
        g2 = refine(gaz, FIXTURE_PATCH)
        assert g2.resolve("CDMX").country_iso == "MX"
        assert gaz.resolve("CDMX") is None
        assert len(g2) == len(gaz) + 4

    def test_empty_patch(self, gaz, tmp_path):
        p = tmp_path / "patch.csv"
        p.write_text("pattern,country,city,country_iso\n")
        g2 = refine(gaz, p)
        for s in ["Paris", "CDMX", "Atlanta, Georgia", "nowhere"]:
            assert g2.resolve(s) == gaz.resolve(s)

    def test_patch_overrides_base(self, gaz):
        g2 = gaz.refine([GazetteerEntry("atlanta", "United States", "Atlanta", "US")])
        assert g2.resolve("Atlanta, Georgia").country_iso == "US"

    @pytest.mark.parametrize("body,row", [
        ("cdmx,Mexico,,MEX\n", 2),
        ("cdmx,Mexico,,MX\nkolkata,India,,in\n", 3),
        ("cdmx,Mexico,,MX\nfoo(,X,,XX\n", 3),
        ("cdmx,Mexico,MX\n", 2),
        ("cdmx,Mexico,,MX\nCDMX,Mexico,,MX\n", 3),
    ])
    def test_bad_patch_rows(self, tmp_path, body, row):
        p = tmp_path / "patch.csv"
        p.write_text("pattern,country,city,country_iso\n" + body)
        with pytest.raises(GazetteerError) as err:
            read_entries(p)
        assert err.value.row == row

    def test_bad_header(self, tmp_path):
        p = tmp_path / "patch.csv"
        p.write_text("name,iso\n")
        with pytest.raises(GazetteerError):
            read_entries(p)

    @given(st.lists(st.sampled_from(["nyc", "atlanta", "georgia", "paris", "texas", "kolkata", "x"]),
                    max_size=4))
    def test_monotone(self, words):
        base = load_gazetteer(FIXTURE_GAZ)
        patch = read_entries(FIXTURE_PATCH) + [GazetteerEntry("atlanta", "United States", None, "US")]
        g2 = base.refine(patch)
        s = ", ".join(words)
        before, after = base.resolve(s), g2.resolve(s)
        if before is not None and (after.country, after.city, after.country_iso) != (
                before.country, before.city, before.country_iso):
            assert after.matched_entry_id < len(patch)
        if before is not None:
            assert after is not None


class TestEvaluate:
    def test_twenty_cases(self):
        # 10 resolved (8 right, 2 wrong), 10 unresolved
        records, labels = [], {}
        for i in range(8):
            records.append(rec(i, "x", iso="FR"))
            labels[str(i)] = "FR"
        for i in (8, 9):
            records.append(rec(i, "x", iso="GE"))
            labels[str(i)] = "US"
        for i in range(10, 20):
            records.append(rec(i, "x"))
            labels[str(i)] = "BR" if i % 2 else ""
        m = evaluate_resolver(records, labels)
        assert (m.precision, m.detection_rate) == (0.8, 0.5)

    def test_all_correct(self):
        m = evaluate_resolver([rec(1, "x", iso="FR")], {"1": "FR"})
        assert m.precision == 1.0

    def test_unlabelled_resolution_is_incorrect(self):
        m = evaluate_resolver([rec(1, "x", iso="FR")], {})
        assert m.precision == 0.0

    def test_unknown_label_id(self):
        with pytest.raises(KeyError):
            evaluate_resolver([rec(1, "x")], {"2": "FR"})

    def test_patch_rescues_three_of_twenty_five(self, gaz):
        locs = (["Paris", "Tokyo", "Lagos", "USA", "Madrid", "Lyon", "Kraków", "Bogotá", "Oslo, Norway",
                 "Canada", "Texas", "Mumbai", "Zürich", "Caracas", "Japan"]
                + ["CDMX", "Kolkata", "NYC"]
                + ["Konoha", "the moon", "somewhere", "Omaha", "heaven", "online", "Chinatown"])
        assert len(locs) == 25
        raw = [rec(i, loc) for i, loc in enumerate(locs)]
        before, _ = resolve_all(raw, gaz)
        after, _ = resolve_all(raw, refine(gaz, FIXTURE_PATCH))
        m = evaluate_resolver(after, {}, before=before)
        assert m.detection_delta == pytest.approx(0.12, abs=1e-15)
        assert evaluate_resolver(before, {}).detection_rate == 0.6
        assert m.detection_rate == 0.72

    def test_before_after_size_mismatch(self):
        with pytest.raises(ValueError):
            evaluate_resolver([rec(1, "x")], {}, before=[])

    def test_read_labels(self, tmp_path):
        p = tmp_path / "labels.csv"
        p.write_text("tweet_id,country_iso\n1,FR\n2,\n")
        assert read_labels(p) == {"1": "FR", "2": None}


def load_200():
    with open(DATA / "resolver_200.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [(f"r{k:03d}", row) for k, row in enumerate(rows, start=1)]


class TestHandLabeled200:
    def test_each_row(self):
        g = load_gazetteer(FIXTURE_GAZ)
        g2 = refine(g, FIXTURE_PATCH)
        for tid, row in load_200():
            b, a = g.resolve(row["location"]), g2.resolve(row["location"])
            assert (b.country_iso if b else "") == row["before"], row
            assert (a.country_iso if a else "") == row["after"], row

    def test_metrics_match_hand_counts(self):
        rows = load_200()
        assert len(rows) == 200
        raw = [rec(tid, row["location"]) for tid, row in rows]
        labels = {tid: row["label"] for tid, row in rows}
        g = load_gazetteer(FIXTURE_GAZ)
        before, _ = resolve_all(raw, g)
        after, _ = resolve_all(raw, refine(g, FIXTURE_PATCH))
        m0 = evaluate_resolver(before, labels)
        m1 = evaluate_resolver(after, labels, before=before)
        # counted by hand from the fixture columns
        assert (m0.resolved, m0.correct) == (136, 131)
        assert (m1.resolved, m1.correct) == (145, 140)
        assert m0.detection_rate == 136 / 200
        assert m0.precision == 131 / 136
        assert m1.precision == 140 / 145
        assert m1.detection_delta == 9 / 200
