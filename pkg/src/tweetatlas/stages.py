"""File-level pipeline stages. The CLI subcommands and ``run`` both call these."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from . import analytics, rankcorr
from .analytics import ORIGINAL, RETWEET, UNKNOWN, CorpusSummary
from .geo import (Gazetteer, evaluate_resolver, read_labels, resolve_record, unknown_report,
                  write_unknowns, ResolverMetrics)
from .ingest import IngestStats, ingest
from .model import CountryStats, TweetRecord, iter_records, write_records

logger = logging.getLogger(__name__)

ANALYZE_ARTIFACTS = ("country_counts.csv", "bins.csv", "top_users_tweets.csv",
                     "top_users_retweets.csv", "top_words.csv", "languages.csv", "native_table.csv")


def _writer(path: Path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def write_json(obj, path: Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def ingest_stage(lines: Iterable, output: Path, stats_path: Path | None = None,
                 memory_bound: int = 1_000_000) -> IngestStats:
    """Write the clean, deduplicated stream to ``output``."""
    stats = IngestStats()
    write_records(ingest(lines, stats, memory_bound), output)
    if not stats.is_consistent():
        raise RuntimeError(f"ingest accounting is off: {stats}")
    if stats_path is not None:
        write_json(stats.to_dict(), stats_path)
    return stats


def resolve_stage(input: Path, gazetteer: Gazetteer, output: Path, unknowns: Path | None = None,
                  labels: Path | None = None, metrics_path: Path | None = None,
                  baseline: Gazetteer | None = None) -> ResolverMetrics:
    """Resolve every record's location; optionally write unknowns and labelled metrics.

    ``baseline`` (the gazetteer before a patch) adds the detection-rate delta.
    """
    label_map = read_labels(labels) if labels else None
    keep = label_map is not None
    resolved: list[TweetRecord] = []
    before: list[TweetRecord] = []
    metrics = ResolverMetrics()
    unresolved: list[TweetRecord] = []

    def stream():
        for r in iter_records(input):
            r2 = resolve_record(r, gazetteer)
            metrics.total += 1
            if r2.country_iso is None:
                metrics.unresolved += 1
                unresolved.append(r2)
            else:
                metrics.resolved += 1
            if keep:
                resolved.append(r2)
                if baseline is not None:
                    before.append(resolve_record(r, baseline))
            yield r2

    write_records(stream(), output)
    if unknowns is not None:
        write_unknowns(unknown_report(unresolved), unknowns)
    if keep:
        metrics = evaluate_resolver(resolved, label_map, before if baseline is not None else None)
    if metrics_path is not None:
        write_json(metrics.to_dict(), metrics_path)
    return metrics


@dataclass
class AnalyzeParams:
    top_users: int = 500
    top_words: int = 100
    native_top: int = 10


def summarize(input: Path) -> CorpusSummary:
    return CorpusSummary.of(iter_records(input))


def analyze_stage(input: Path, out_dir: Path, native_map: dict[str, set[str]],
                  params: AnalyzeParams = AnalyzeParams()) -> CorpusSummary:
    out_dir.mkdir(parents=True, exist_ok=True)
    s = summarize(input)
    write_country_counts(s.countries, out_dir / "country_counts.csv")

    fh, w = _writer(out_dir / "bins.csv")
    with fh:
        w.writerow(["bin", "lower", "upper", "country_count", "total", "countries"])
        for g in analytics.bin_countries(s.countries):
            w.writerow([g.index, g.lower, "" if g.upper is None else g.upper,
                        len(g.countries), g.total, " ".join(g.countries)])

    for kind, name in ((ORIGINAL, "top_users_tweets.csv"), (RETWEET, "top_users_retweets.csv")):
        fh, w = _writer(out_dir / name)
        with fh:
            w.writerow(["rank", "username", "country_iso", "count"])
            for rank, h in enumerate(s.top_users(params.top_users, kind), start=1):
                w.writerow([rank, h.username, h.country_iso or "", h.count])

    fh, w = _writer(out_dir / "top_words.csv")
    with fh:
        w.writerow(["rank", "word", "count"])
        for rank, (word, n) in enumerate(s.word_frequency(params.top_words), start=1):
            w.writerow([rank, word, n])

    fh, w = _writer(out_dir / "languages.csv")
    with fh:
        w.writerow(["language_code", "count"])
        langs, _ = s.language_distribution()
        w.writerows(sorted(langs.items(), key=lambda kv: (-kv[1], kv[0])))

    fh, w = _writer(out_dir / "native_table.csv")
    with fh:
        w.writerow(["rank", "country_iso", "native_languages", "total_tweets", "tweets_in_native",
                    "pct_native", "pct_other"])
        for row in analytics.native_language_table(s.countries, native_map, params.native_top):
            w.writerow([row.rank, row.country_iso, " ".join(row.native_languages), row.total_tweets,
                        row.tweets_in_native, f"{row.pct_native:.1f}", f"{row.pct_other:.1f}"])
    return s


def write_country_counts(counts: dict[str, CountryStats], path: Path) -> None:
    fh, w = _writer(path)
    with fh:
        w.writerow(["country_iso", "tweet_count", "retweet_count"])
        known = sorted((v for k, v in counts.items() if k != UNKNOWN),
                       key=lambda v: (-v.tweet_count, v.country_iso))
        for v in known:
            w.writerow([v.country_iso, v.tweet_count, v.retweet_count])
        if UNKNOWN in counts:
            u = counts[UNKNOWN]
            w.writerow([UNKNOWN, u.tweet_count, u.retweet_count])


def read_country_counts(path: Path) -> dict[str, int]:
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            iso = row["country_iso"]
            if iso != UNKNOWN:
                out[iso] = int(row["tweet_count"])
    return out


def correlate_stage(counts_path: Path, hdi_path: Path | None, out_dir: Path,
                    classic_factor: bool = False, max_rank: str = rankcorr.MAX_PRESENT
                    ) -> list[rankcorr.HDIResult]:
    out_dir.mkdir(parents=True, exist_ok=True)
    counts = read_country_counts(counts_path)
    results = rankcorr.hdi_experiment(counts, rankcorr.read_hdi(hdi_path),
                                      classic_factor=classic_factor, max_rank=max_rank)
    fh, w = _writer(out_dir / "correlations.csv")
    with fh:
        w.writerow(["category", "rs_prime", "n", "m"])
        for r in results:
            w.writerow([r.category, "" if r.rs_prime is None else f"{r.rs_prime:.6f}", r.n, r.m])
    for r in results:
        fh, w = _writer(out_dir / f"scatter_{r.category}.csv")
        with fh:
            w.writerow(["country_iso", "un_rank", "tweet_rank"])
            w.writerows(r.scatter)
    return results
