"""Gazetteer-based resolution of free-text user locations to countries."""

from __future__ import annotations

import csv
import dataclasses
import re
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import GazetteerEntry, TweetRecord

GAZETTEER_COLUMNS = ("pattern", "country", "city", "country_iso")

DEFAULT_FICTIONAL = ("konoha", "gotham city", "hueco mundo", "asgard")

_LITERAL_RE = re.compile(r"[^\W_](?:[\w '\-]|\\[ '\-])*")
_WORD_RE = re.compile(r"\w+")


class GazetteerError(ValueError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(f"row {row}: {message}" if row is not None else message)
        self.row = row


def _strip_marks(s: str) -> str:
    return "".join(c for c in unicodedata.normalize("NFD", s)
                   if not unicodedata.category(c).startswith("M"))


@lru_cache(maxsize=None)
def _fold_char(c: str) -> str:
    # simple (1:1) case folding; full folding would turn one letter into two
    f = c.casefold()
    if len(f) == 1:
        return f
    lo = c.lower()
    return lo if len(lo) == 1 else c


def _fold(s: str) -> str:
    return "".join(_fold_char(c) for c in s)


def normalize_diacritics(text: str) -> str:
    """Fold case and strip diacritics: ``"São Paulo"`` -> ``"sao paulo"``.

    Canonical decomposition, removal of combining marks, simple case
    folding, then NFC so Hangul and the like stay composed. Repeated until
    stable, which makes the function idempotent.
    """
    prev = None
    out = text
    for _ in range(8):
        if out == prev:
            break
        prev = out
        out = unicodedata.normalize("NFC", _fold(_strip_marks(out)))
    return out


def _bounded(pattern: str) -> re.Pattern:
    body = unicodedata.normalize("NFC", _strip_marks(pattern))
    return re.compile(rf"(?<!\w)(?:{body})(?!\w)", re.IGNORECASE)


def _index_token(pattern: str) -> str | None:
    """First word of a pattern that is a plain literal, or None for real regexes."""
    if not _LITERAL_RE.fullmatch(pattern):
        return None
    literal = re.sub(r"\\(.)", r"\1", pattern)
    m = _WORD_RE.match(normalize_diacritics(literal))
    # the folded literal must still start with the same word for the index to be exact
    return m.group(0) if m else None


@dataclass(frozen=True)
class LocationMatch:
    country: str
    city: str | None
    country_iso: str
    matched_entry_id: int


class Gazetteer:
    """Ordered gazetteer entries. The first matching entry wins.

    A token index narrows the entries worth trying; entries whose pattern
    is not a plain literal are always tried. ``resolve`` and
    ``resolve_linear`` give identical answers.
    """

    def __init__(self, entries: Iterable[GazetteerEntry], fictional: Iterable[str] = DEFAULT_FICTIONAL):
        self.entries: tuple[GazetteerEntry, ...] = tuple(entries)
        self.fictional: tuple[str, ...] = tuple(fictional)
        self._compiled = [_bounded(e.possible_match) for e in self.entries]
        self._fictional_re = [_bounded(p) for p in self.fictional]
        self.index: dict[str, list[int]] = defaultdict(list)
        self._always: list[int] = []
        for i, e in enumerate(self.entries):
            tok = _index_token(e.possible_match)
            if tok is None:
                self._always.append(i)
            else:
                self.index[tok].append(i)
        self.index = dict(self.index)

    def __len__(self):
        return len(self.entries)

    def is_fictional(self, normalized: str) -> bool:
        return any(p.search(normalized) for p in self._fictional_re)

    def _match(self, i: int) -> LocationMatch:
        e = self.entries[i]
        return LocationMatch(e.country, e.city, e.country_iso, i)

    def resolve(self, plaintext: str | None) -> LocationMatch | None:
        if not plaintext:
            return None
        text = normalize_diacritics(plaintext)
        if not text.strip() or self.is_fictional(text):
            return None
        candidates = set(self._always)
        for tok in set(_WORD_RE.findall(text)):
            candidates.update(self.index.get(tok, ()))
        for i in sorted(candidates):
            if self._compiled[i].search(text):
                return self._match(i)
        return None

    def resolve_linear(self, plaintext: str | None) -> LocationMatch | None:
        """Reference scan over every entry in order; no index."""
        if not plaintext:
            return None
        text = normalize_diacritics(plaintext)
        if not text.strip() or self.is_fictional(text):
            return None
        for i, rx in enumerate(self._compiled):
            if rx.search(text):
                return self._match(i)
        return None

    def refine(self, patch: Sequence[GazetteerEntry]) -> "Gazetteer":
        """New gazetteer with ``patch`` entries in front so they win first-match."""
        _check_duplicates(patch)
        return Gazetteer(list(patch) + list(self.entries), self.fictional)


def _check_duplicates(entries: Sequence[GazetteerEntry]):
    seen: dict[str, int] = {}
    for n, e in enumerate(entries, start=2):
        key = normalize_diacritics(e.possible_match)
        if key in seen:
            raise GazetteerError(f"duplicate pattern {e.possible_match!r} (first at row {seen[key]})", n)
        seen[key] = n


def read_entries(path: str | Path) -> list[GazetteerEntry]:
    """Read a ``pattern,country,city,country_iso`` CSV. Row numbers in errors count the header as 1."""
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return entries
        if tuple(h.strip() for h in header) != GAZETTEER_COLUMNS:
            raise GazetteerError(f"expected header {','.join(GAZETTEER_COLUMNS)}", 1)
        for row in reader:
            if not any(c.strip() for c in row):
                continue
            if len(row) != 4:
                raise GazetteerError(f"expected 4 fields, got {len(row)}", reader.line_num)
            pattern, country, city, iso = (c.strip() for c in row)
            try:
                entries.append(GazetteerEntry(pattern, country, city or None, iso))
            except ValueError as exc:
                raise GazetteerError(str(exc), reader.line_num) from None
    _check_duplicates(entries)
    return entries


def read_fictional(path: str | Path) -> list[str]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            re.compile(line)
            out.append(line)
    return out


def load_gazetteer(path: str | Path | None = None, fictional: str | Path | None = None) -> Gazetteer:
    """Load a gazetteer file, or the bundled seed gazetteer when ``path`` is None."""
    data = resources.files("tweetatlas") / "data"
    if path is None:
        with resources.as_file(data / "gazetteer.csv") as p:
            entries = read_entries(p)
    else:
        entries = read_entries(path)
    if fictional is None:
        with resources.as_file(data / "fictional.txt") as p:
            names = read_fictional(p)
    else:
        names = read_fictional(fictional)
    names = list(dict.fromkeys(list(DEFAULT_FICTIONAL) + names))
    return Gazetteer(entries, names)


def refine(gazetteer: Gazetteer, patch_file: str | Path) -> Gazetteer:
    return gazetteer.refine(read_entries(patch_file))


def resolve_location(plaintext: str | None, gazetteer: Gazetteer) -> LocationMatch | None:
    return gazetteer.resolve(plaintext)


@dataclass
class ResolverMetrics:
    total: int = 0
    resolved: int = 0
    unresolved: int = 0
    correct: int = 0
    labelled: bool = False
    detection_delta: float | None = None

    @property
    def detection_rate(self) -> float:
        return self.resolved / self.total if self.total else 0.0

    @property
    def precision(self) -> float:
        return self.correct / self.resolved if self.resolved else 0.0

    def merge(self, other: "ResolverMetrics") -> "ResolverMetrics":
        return ResolverMetrics(
            self.total + other.total,
            self.resolved + other.resolved,
            self.unresolved + other.unresolved,
            self.correct + other.correct,
            self.labelled or other.labelled,
        )

    def to_dict(self) -> dict:
        d = {
            "total": self.total,
            "resolved": self.resolved,
            "unresolved": self.unresolved,
            "detection_rate": self.detection_rate,
        }
        if self.labelled:
            d["correct"] = self.correct
            d["precision"] = self.precision
        if self.detection_delta is not None:
            d["detection_delta"] = self.detection_delta
        return d


def resolve_record(record: TweetRecord, gazetteer: Gazetteer) -> TweetRecord:
    m = gazetteer.resolve(record.raw_location)
    if m is None:
        return dataclasses.replace(record, detected_country=None, detected_city=None, country_iso=None)
    return dataclasses.replace(record, detected_country=m.country, detected_city=m.city,
                               country_iso=m.country_iso)


def resolve_all(records: Iterable[TweetRecord], gazetteer: Gazetteer
                ) -> tuple[list[TweetRecord], ResolverMetrics]:
    out = []
    metrics = ResolverMetrics()
    for r in records:
        r = resolve_record(r, gazetteer)
        metrics.total += 1
        if r.country_iso is None:
            metrics.unresolved += 1
        else:
            metrics.resolved += 1
        out.append(r)
    return out, metrics


def unknown_report(records: Iterable[TweetRecord]) -> list[tuple[str, int]]:
    """Normalized raw locations of unresolved records, most frequent first (ties alphabetical)."""
    counts = Counter(normalize_diacritics(r.raw_location).strip()
                     for r in records if r.country_iso is None)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def evaluate_resolver(records: Sequence[TweetRecord], labels: Mapping[str, str | None],
                      before: Sequence[TweetRecord] | None = None) -> ResolverMetrics:
    """Detection rate and precision of resolved records against hand labels.

    ``labels`` maps tweet_id to the true ISO code, with None or "" for a
    location that names no real country. A resolved record counts as
    correct only when its label equals its ISO code. If ``before`` holds
    the same records resolved with an earlier gazetteer, the result also
    carries the change in detection rate.
    """
    ids = {r.tweet_id for r in records}
    unknown = sorted(set(labels) - ids)
    if unknown:
        raise KeyError(f"labels for unknown record ids: {', '.join(unknown[:5])}")
    m = ResolverMetrics(labelled=True)
    for r in records:
        m.total += 1
        if r.country_iso is None:
            m.unresolved += 1
            continue
        m.resolved += 1
        if (labels.get(r.tweet_id) or None) == r.country_iso:
            m.correct += 1
    if before is not None:
        prev = ResolverMetrics()
        for r in before:
            prev.total += 1
            if r.country_iso is None:
                prev.unresolved += 1
            else:
                prev.resolved += 1
        if prev.total != m.total:
            raise ValueError("before/after record sets differ in size")
        m.detection_delta = (m.resolved - prev.resolved) / m.total if m.total else 0.0
    return m


def read_labels(path: str | Path) -> dict[str, str | None]:
    """CSV ``tweet_id,country_iso``; an empty ISO code means no real country."""
    out: dict[str, str | None] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for n, row in enumerate(csv.DictReader(fh), start=2):
            tid = (row.get("tweet_id") or "").strip()
            if not tid:
                raise GazetteerError("missing tweet_id", n)
            out[tid] = (row.get("country_iso") or "").strip() or None
    return out


def write_unknowns(rows: Iterable[tuple[str, int]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["location", "count"])
        w.writerows(rows)
