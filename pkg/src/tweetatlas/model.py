"""Record types shared across the pipeline, plus the cleaned-record CSV format."""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

CSV_COLUMNS = (
    "created_at",
    "tweet_id",
    "language_code",
    "detected_country",
    "detected_city",
    "country_iso",
    "raw_location",
    "display_name",
    "username",
    "is_retweet",
    "text",
)

ISO_RE = re.compile(r"^[A-Z]{2}$")

# classic API format, e.g. "Wed Oct 10 20:19:24 +0000 2018"
_TWITTER_TIME = "%a %b %d %H:%M:%S %z %Y"


class ParseError(ValueError):
    """A raw input line could not be turned into a tweet object."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class RecordFormatError(ValueError):
    """A cleaned-record CSV row is malformed."""

    def __init__(self, message: str, row: int):
        super().__init__(f"row {row}: {message}")
        self.row = row


_MONTHS = {m: k for k, m in enumerate(
    ("Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"), start=1)}
_TWITTER_RE = re.compile(
    r"(?:Mon|Tue|Wed|Thu|Fri|Sat|Sun) (\w{3}) (\d{2}) (\d{2}):(\d{2}):(\d{2}) \+0000 (\d{4})")


def parse_timestamp(value: str) -> datetime:
    """Parse either the classic tweet timestamp or ISO-8601 into an aware UTC datetime."""
    value = value.strip()
    # strptime is slow; the usual UTC form is handled directly
    m = _TWITTER_RE.fullmatch(value)
    if m and m.group(1) in _MONTHS:
        mon, day, hh, mm, ss, year = m.groups()
        return datetime(int(year), _MONTHS[mon], int(day), int(hh), int(mm), int(ss), tzinfo=timezone.utc)
    try:
        dt = datetime.strptime(value, _TWITTER_TIME)
    except ValueError:
        iso = value[:-1] + "+00:00" if value.endswith(("Z", "z")) else value
        dt = datetime.fromisoformat(iso)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    dt = dt.astimezone(timezone.utc)
    # spelled out because strftime("%Y") does not zero-pad years < 1000 on glibc
    out = f"{dt.year:04d}-{dt.month:02d}-{dt.day:02d}T{dt.hour:02d}:{dt.minute:02d}:{dt.second:02d}"
    if dt.microsecond:
        out += f".{dt.microsecond:06d}"
    return out + "Z"


@dataclass(frozen=True)
class RawTweetObject:
    created_at: str
    id: str
    text: str
    lang: str | None
    user_name: str
    user_screen_name: str
    user_location: str | None
    retweeted_status_present: bool


@dataclass(frozen=True)
class TweetRecord:
    """One cleaned tweet: the eleven persisted attributes."""

    created_at: datetime
    tweet_id: str
    language_code: str
    detected_country: str | None
    detected_city: str | None
    country_iso: str | None
    raw_location: str
    display_name: str
    username: str
    is_retweet: bool
    text: str

    def __post_init__(self):
        if not self.tweet_id:
            raise ValueError("tweet_id must be non-empty")
        if not self.language_code:
            raise ValueError("language_code must be non-empty")
        if not self.raw_location:
            raise ValueError("raw_location must be non-empty")
        if (self.detected_country is None) != (self.country_iso is None):
            raise ValueError("detected_country and country_iso must be set together")
        if self.country_iso is not None and not ISO_RE.match(self.country_iso):
            raise ValueError(f"bad country_iso {self.country_iso!r}")
        if self.created_at.tzinfo is None:
            raise ValueError("created_at must be timezone-aware")
        # csv on 3.10 cannot write NUL; ingest replaces it before construction
        for f in ("raw_location", "display_name", "username", "text"):
            if "\x00" in getattr(self, f):
                raise ValueError(f"{f} contains NUL")


@dataclass(frozen=True)
class GazetteerEntry:
    possible_match: str
    country: str
    city: str | None
    country_iso: str

    def __post_init__(self):
        if not self.possible_match:
            raise ValueError("empty pattern")
        if not self.country:
            raise ValueError("empty country")
        if not ISO_RE.match(self.country_iso or ""):
            raise ValueError(f"bad ISO code {self.country_iso!r}")
        try:
            re.compile(self.possible_match)
        except re.error as exc:
            raise ValueError(f"invalid pattern {self.possible_match!r}: {exc}") from None


class RankedList:
    """Items in rank order; the item at position p has rank p (1-based)."""

    __slots__ = ("items", "_rank")

    def __init__(self, items: Iterable[str]):
        self.items: tuple[str, ...] = tuple(items)
        self._rank = {item: pos for pos, item in enumerate(self.items, start=1)}
        if len(self._rank) != len(self.items):
            raise ValueError("ranked items must be unique")

    @classmethod
    def from_scores(cls, scores: Mapping[str, float]) -> "RankedList":
        """Rank by descending score, ties by ascending key."""
        return cls(k for k, _ in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0])))

    def rank(self, item: str) -> int | None:
        return self._rank.get(item)

    def pairs(self) -> list[tuple[str, int]]:
        return [(item, pos) for pos, item in enumerate(self.items, start=1)]

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __contains__(self, item):
        return item in self._rank

    def __eq__(self, other):
        return isinstance(other, RankedList) and self.items == other.items

    def __hash__(self):
        return hash(self.items)

    def __repr__(self):
        return f"RankedList({list(self.items)!r})"


@dataclass
class CountryStats:
    """Per-country counters. tweet_count includes retweets."""

    country_iso: str
    tweet_count: int = 0
    retweet_count: int = 0
    per_language_counts: Counter = field(default_factory=Counter)

    def add(self, record: TweetRecord) -> None:
        self.tweet_count += 1
        if record.is_retweet:
            self.retweet_count += 1
        self.per_language_counts[record.language_code] += 1

    def merge(self, other: "CountryStats") -> "CountryStats":
        if other.country_iso != self.country_iso:
            raise ValueError(f"cannot merge {other.country_iso} into {self.country_iso}")
        return CountryStats(
            self.country_iso,
            self.tweet_count + other.tweet_count,
            self.retweet_count + other.retweet_count,
            self.per_language_counts + other.per_language_counts,
        )


def _as_text(line: str | bytes) -> str:
    if isinstance(line, bytes):
        try:
            return line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8: {exc.reason}", exc.start) from None
    return line


def _opt_str(value) -> str | None:
    if value is None:
        return None
    if not isinstance(value, str):
        raise TypeError
    return value


def parse_raw(line: str | bytes, offset: int = 0) -> RawTweetObject:
    """Parse one JSON-lines tweet object.

    ``offset`` is the byte offset of the line within its source and is
    carried on any :class:`ParseError` so callers can report and skip.
    Unknown fields are ignored.
    """
    text = _as_text(line)
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, RecursionError) as exc:
        pos = getattr(exc, "pos", 0) or 0
        raise ParseError(f"malformed JSON: {getattr(exc, 'msg', exc)}", offset + pos) from None
    if not isinstance(obj, dict):
        raise ParseError("tweet object must be a JSON object", offset)

    user = obj.get("user")
    if not isinstance(user, dict):
        raise ParseError("missing user object", offset)

    tid = obj.get("id_str")
    if tid is None and isinstance(obj.get("id"), int) and not isinstance(obj.get("id"), bool):
        tid = str(obj["id"])
    if not isinstance(tid, str) or not tid:
        raise ParseError("missing id", offset)

    created = obj.get("created_at")
    if not isinstance(created, str):
        raise ParseError("missing created_at", offset)
    try:
        parse_timestamp(created)
    except (ValueError, OverflowError):
        raise ParseError(f"bad created_at {created!r}", offset) from None

    body = obj.get("full_text", obj.get("text", ""))
    try:
        return RawTweetObject(
            created_at=created,
            id=tid,
            text=_opt_str(body) or "",
            lang=_opt_str(obj.get("lang")),
            user_name=_opt_str(user.get("name")) or "",
            user_screen_name=_opt_str(user.get("screen_name")) or "",
            user_location=_opt_str(user.get("location")),
            retweeted_status_present=obj.get("retweeted_status") is not None,
        )
    except TypeError:
        raise ParseError("field has wrong type", offset) from None


def record_to_row(r: TweetRecord) -> list[str]:
    return [
        format_timestamp(r.created_at),
        r.tweet_id,
        r.language_code,
        r.detected_country or "",
        r.detected_city or "",
        r.country_iso or "",
        r.raw_location,
        r.display_name,
        r.username,
        "true" if r.is_retweet else "false",
        r.text,
    ]


def row_to_record(row: Sequence[str], rownum: int) -> TweetRecord:
    if len(row) != len(CSV_COLUMNS):
        raise RecordFormatError(f"expected {len(CSV_COLUMNS)} fields, got {len(row)}", rownum)
    created, tid, lang, country, city, iso, loc, name, user, rt, text = row
    if rt not in ("true", "false"):
        raise RecordFormatError(f"is_retweet must be true/false, got {rt!r}", rownum)
    try:
        return TweetRecord(
            created_at=parse_timestamp(created),
            tweet_id=tid,
            language_code=lang,
            detected_country=country or None,
            detected_city=city or None,
            country_iso=iso or None,
            raw_location=loc,
            display_name=name,
            username=user,
            is_retweet=rt == "true",
            text=text,
        )
    except ValueError as exc:
        raise RecordFormatError(str(exc), rownum) from None


def write_records(records: Iterable[TweetRecord], path: str | Path) -> int:
    """Write records as the 11-column CSV; returns the number of rows written."""
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(record_to_row(r))
            n += 1
    return n


def iter_records(path: str | Path) -> Iterator[TweetRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RecordFormatError("missing header", 1) from None
        if tuple(header) != CSV_COLUMNS:
            raise RecordFormatError(f"unexpected header {header!r}", 1)
        try:
            for row in reader:
                yield row_to_record(row, reader.line_num)
        except csv.Error as exc:
            raise RecordFormatError(str(exc), reader.line_num) from None


def read_records(path: str | Path) -> list[TweetRecord]:
    return list(iter_records(path))


def record_fields() -> tuple[str, ...]:
    return tuple(f.name for f in fields(TweetRecord))
