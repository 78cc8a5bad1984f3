"""Corpus aggregations: country counts and bins, top handles, words, languages."""

from __future__ import annotations

import bisect
import csv
import re
from collections import Counter, defaultdict
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import CountryStats, TweetRecord

UNKNOWN = "unknown"

ORIGINAL = "original"
RETWEET = "retweet"


def round_half_up(x, places: int = 1) -> float:
    """Round half away from zero (Python's round() is half-to-even)."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(str(x)).quantize(q, rounding=ROUND_HALF_UP))


def percent(part: int, whole: int) -> float:
    """100 * part / whole rounded half-up to one decimal, computed exactly."""
    if whole == 0:
        return 0.0
    exact = Decimal(100 * part) / Decimal(whole)
    return float(exact.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def count_by_country(records: Iterable[TweetRecord]) -> dict[str, CountryStats]:
    """Per-country stats keyed by ISO code; unresolved records go under ``"unknown"``."""
    out: dict[str, CountryStats] = {}
    for r in records:
        key = r.country_iso or UNKNOWN
        stats = out.get(key)
        if stats is None:
            stats = out[key] = CountryStats(key)
        stats.add(r)
    return out


def merge_counts(*parts: Mapping[str, CountryStats]) -> dict[str, CountryStats]:
    out: dict[str, CountryStats] = {}
    for part in parts:
        for key, stats in part.items():
            out[key] = out[key].merge(stats) if key in out else stats.merge(CountryStats(key))
    return out


@dataclass(frozen=True)
class BinScheme:
    boundaries: tuple[int, ...] = (5_000, 50_000, 100_000, 500_000, 1_000_000, 5_000_000, 10_000_000)

    def __post_init__(self):
        b = self.boundaries
        if any(lo >= hi for lo, hi in zip(b, b[1:])):
            raise ValueError("bin boundaries must be strictly ascending")

    def __len__(self):
        return len(self.boundaries) + 1

    def bin_of(self, count: int) -> int:
        """1-based bin index; intervals are [lower, upper)."""
        return bisect.bisect_right(self.boundaries, count) + 1

    def bounds(self, index: int) -> tuple[int, int | None]:
        lo = 0 if index == 1 else self.boundaries[index - 2]
        hi = self.boundaries[index - 1] if index <= len(self.boundaries) else None
        return lo, hi


DEFAULT_BINS = BinScheme()


@dataclass
class BinGroup:
    index: int
    lower: int
    upper: int | None
    countries: list[str]
    total: int


def _tweet_count(v) -> int:
    return v.tweet_count if isinstance(v, CountryStats) else int(v)


def bin_countries(counts: Mapping[str, CountryStats | int], scheme: BinScheme = DEFAULT_BINS
                  ) -> list[BinGroup]:
    """Group countries by tweet count. Countries in each group are listed by count desc."""
    groups = [BinGroup(i, *scheme.bounds(i), [], 0) for i in range(1, len(scheme) + 1)]
    ordered = sorted(((k, _tweet_count(v)) for k, v in counts.items() if k != UNKNOWN),
                     key=lambda kv: (-kv[1], kv[0]))
    for iso, n in ordered:
        if n < 1:
            continue
        g = groups[scheme.bin_of(n) - 1]
        g.countries.append(iso)
        g.total += n
    return groups


@dataclass(frozen=True)
class HandleCount:
    username: str
    country_iso: str | None
    count: int
    kind: str


def top_users(records: Iterable[TweetRecord], k: int, kind: str = ORIGINAL) -> list[HandleCount]:
    """Most active handles of one kind (originals or retweets).

    Ranked by count descending, then username. Each handle is tagged with
    the country seen most often across all its records (ties: lowest ISO
    code), or None if it never resolved.
    """
    return CorpusSummary.of(records).top_users(k, kind)


def modal_country(c: Counter | None) -> str | None:
    if not c:
        return None
    return min(c.items(), key=lambda kv: (-kv[1], kv[0]))[0]


@dataclass(frozen=True)
class CountryShare:
    country_iso: str
    handles: int
    percentage: float


def country_share_of_top(top: Sequence[HandleCount]) -> list[CountryShare]:
    """Share of the given handles per country, largest first. Untagged handles count as unknown."""
    if not top:
        raise ValueError("empty handle list")
    c = Counter(h.country_iso or UNKNOWN for h in top)
    return [CountryShare(iso, n, percent(n, len(top)))
            for iso, n in sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))]


_URL = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION = re.compile(r"@\w+")
_HASH = re.compile(r"#(?=\w)")
_TOKEN = re.compile(r"(?<!\S)[-%](?!\S)|(?:[^\W_]|')+")


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens.

    >>> tokenize("RT @user check https://x.co #news")
    ['rt', 'check', 'news']
    >>> tokenize("100 % done - now")
    ['100', '%', 'done', '-', 'now']
    """
    text = text.replace("’", "'")
    text = _URL.sub(" ", text)
    text = _MENTION.sub(" ", text)
    text = _HASH.sub("", text)
    out = []
    for tok in _TOKEN.findall(text.lower()):
        if tok not in ("-", "%"):
            tok = tok.strip("'")
            if not tok:
                continue
        out.append(tok)
    return out


def word_counts(records: Iterable[TweetRecord]) -> Counter:
    c: Counter = Counter()
    for r in records:
        c.update(tokenize(r.text))
    return c


def top_n(counter: Mapping[str, int], n: int) -> list[tuple[str, int]]:
    if n < 1:
        raise ValueError("n must be >= 1")
    return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:n]


def word_frequency(records: Iterable[TweetRecord], n: int) -> list[tuple[str, int]]:
    return top_n(word_counts(records), n)


def language_distribution(records: Iterable[TweetRecord]) -> tuple[dict[str, int], int]:
    c = Counter(r.language_code for r in records)
    return dict(c), len(c)


class CorpusSummary:
    """Every counter the analyses need, filled in one pass.

    Summaries of disjoint slices of a corpus can be merged; the result is
    the same as summarizing the whole corpus at once.
    """

    def __init__(self):
        self.countries: dict[str, CountryStats] = {}
        self.handles = {ORIGINAL: Counter(), RETWEET: Counter()}
        self.places: dict[str, Counter] = defaultdict(Counter)
        self.words: Counter = Counter()
        self.languages: Counter = Counter()

    @classmethod
    def of(cls, records: Iterable[TweetRecord]) -> "CorpusSummary":
        s = cls()
        for r in records:
            s.add(r)
        return s

    def add(self, r: TweetRecord) -> None:
        key = r.country_iso or UNKNOWN
        stats = self.countries.get(key)
        if stats is None:
            stats = self.countries[key] = CountryStats(key)
        stats.add(r)
        self.handles[RETWEET if r.is_retweet else ORIGINAL][r.username] += 1
        if r.country_iso:
            self.places[r.username][r.country_iso] += 1
        self.words.update(tokenize(r.text))
        self.languages[r.language_code] += 1

    def merge(self, other: "CorpusSummary") -> "CorpusSummary":
        out = CorpusSummary()
        out.countries = merge_counts(self.countries, other.countries)
        for kind in out.handles:
            out.handles[kind] = self.handles[kind] + other.handles[kind]
        for src in (self.places, other.places):
            for user, c in src.items():
                out.places[user].update(c)
        out.words = self.words + other.words
        out.languages = self.languages + other.languages
        return out

    def top_users(self, k: int, kind: str = ORIGINAL) -> list[HandleCount]:
        if k < 1:
            raise ValueError("k must be >= 1")
        if kind not in self.handles:
            raise ValueError(f"kind must be {ORIGINAL!r} or {RETWEET!r}")
        ranked = sorted(self.handles[kind].items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        return [HandleCount(u, modal_country(self.places.get(u)), n, kind) for u, n in ranked]

    def word_frequency(self, n: int) -> list[tuple[str, int]]:
        return top_n(self.words, n)

    def language_distribution(self) -> tuple[dict[str, int], int]:
        return dict(self.languages), len(self.languages)


@dataclass(frozen=True)
class NativeLanguageRow:
    rank: int
    country_iso: str
    native_languages: tuple[str, ...]
    total_tweets: int
    tweets_in_native: int
    pct_native: float
    pct_other: float


class MissingNativeLanguage(KeyError):
    pass


def native_language_table(counts: Mapping[str, CountryStats] | Iterable[TweetRecord],
                          native_map: Mapping[str, Iterable[str]], top: int = 10
                          ) -> list[NativeLanguageRow]:
    """Share of tweets written in a native language for the ``top`` busiest countries.

    Accepts either records or the output of :func:`count_by_country`.
    """
    if not isinstance(counts, Mapping):
        counts = count_by_country(counts)
    busiest = sorted(((k, v) for k, v in counts.items() if k != UNKNOWN and v.tweet_count > 0),
                     key=lambda kv: (-kv[1].tweet_count, kv[0]))[:top]
    rows = []
    for rank, (iso, stats) in enumerate(busiest, start=1):
        if iso not in native_map:
            raise MissingNativeLanguage(f"no native languages known for {iso}")
        langs = tuple(sorted(set(native_map[iso])))
        native = sum(stats.per_language_counts.get(lang, 0) for lang in langs)
        pct = percent(native, stats.tweet_count)
        rows.append(NativeLanguageRow(rank, iso, langs, stats.tweet_count, native, pct,
                                      round_half_up(100 - pct)))
    return rows


def read_native_map(path: str | Path) -> dict[str, set[str]]:
    out: dict[str, set[str]] = defaultdict(set)
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            iso = row["country_iso"].strip()
            lang = row["language_code"].strip()
            if iso and lang:
                out[iso].add(lang)
    return dict(out)
