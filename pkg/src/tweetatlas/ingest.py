"""Raw tweet ingestion: replay files, filtering, and deduplication."""

from __future__ import annotations

import enum
import logging
import re
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .dedupe import Deduper
from .model import ParseError, RawTweetObject, TweetRecord, parse_raw, parse_timestamp

logger = logging.getLogger(__name__)

UNDETERMINED_LANG = "und"
_RT_PREFIX = re.compile(r"^RT @\w")


class SkipReason(enum.Enum):
    MISSING_LOCATION = "missing_location"
    MISSING_LANGUAGE = "missing_language"


@dataclass(frozen=True)
class RateLimitPolicy:
    max_requests: int
    window: float  # seconds
    poll_interval_min: float = 0.5
    poll_interval_max: float = 2.0

    def __post_init__(self):
        if self.max_requests < 1:
            raise ValueError("max_requests must be positive")
        if self.window <= 0:
            raise ValueError("window must be positive")
        if not 0 <= self.poll_interval_min <= self.poll_interval_max:
            raise ValueError("need 0 <= poll_interval_min <= poll_interval_max")

    @classmethod
    def parse(cls, rate: str, interval: str | None = None) -> "RateLimitPolicy":
        """Build from CLI strings like ``450/15m`` and ``500-2000ms``."""
        m = re.fullmatch(r"\s*(\d+)\s*/\s*(\d*\.?\d*)\s*(ms|s|m|h)?\s*", rate)
        if not m:
            raise ValueError(f"bad rate {rate!r}, expected e.g. 450/15m")
        n = int(m.group(1))
        amount = float(m.group(2)) if m.group(2) else 1.0
        window = amount * {"ms": 0.001, "s": 1, "m": 60, "h": 3600, None: 1}[m.group(3)]
        lo, hi = 0.5, 2.0
        if interval:
            m = re.fullmatch(r"\s*(\d+)\s*-\s*(\d+)\s*ms\s*", interval)
            if not m:
                raise ValueError(f"bad interval {interval!r}, expected e.g. 500-2000ms")
            lo, hi = int(m.group(1)) / 1000, int(m.group(2)) / 1000
        return cls(n, window, lo, hi)


# the limits the original crawl ran under
TWITTER_SEARCH_POLICY = RateLimitPolicy(450, 15 * 60, 0.5, 2.0)


@dataclass
class IngestStats:
    seen: int = 0
    skipped_missing_location: int = 0
    skipped_missing_language: int = 0
    parse_errors: int = 0
    duplicates_removed: int = 0
    kept: int = 0

    def is_consistent(self) -> bool:
        return self.seen == (
            self.kept
            + self.skipped_missing_location
            + self.skipped_missing_language
            + self.parse_errors
            + self.duplicates_removed
        )

    def merge(self, other: "IngestStats") -> "IngestStats":
        a, b = asdict(self), asdict(other)
        return IngestStats(**{k: a[k] + b[k] for k in a})

    def to_dict(self) -> dict:
        return asdict(self)


def _clean(s: str) -> str:
    return s.replace("\x00", "�")


def filter_record(raw: RawTweetObject) -> TweetRecord | SkipReason:
    """Keep tweets that report a location and a detected language.

    A blank location counts as missing, and so does the ``und`` language
    marker. Location is checked first. The returned record has no
    detected place yet.
    """
    if raw.user_location is None or not raw.user_location.strip():
        return SkipReason.MISSING_LOCATION
    lang = (raw.lang or "").strip()
    if not lang or lang.lower() == UNDETERMINED_LANG:
        return SkipReason.MISSING_LANGUAGE
    is_rt = raw.retweeted_status_present or bool(_RT_PREFIX.match(raw.text))
    return TweetRecord(
        created_at=parse_timestamp(raw.created_at),
        tweet_id=raw.id,
        language_code=lang,
        detected_country=None,
        detected_city=None,
        country_iso=None,
        raw_location=_clean(raw.user_location),
        display_name=_clean(raw.user_name),
        username=_clean(raw.user_screen_name),
        is_retweet=is_rt,
        text=_clean(raw.text),
    )


def replay_source(path: str | Path) -> Iterator[tuple[int, bytes]]:
    """Yield ``(byte_offset, line)`` for each non-empty line of a JSON-lines file.

    Streams the file, so memory use does not grow with file size.
    """
    offset = 0
    with open(path, "rb") as fh:
        for line in fh:
            start = offset
            offset += len(line)
            stripped = line.rstrip(b"\r\n")
            if stripped.strip():
                yield start, stripped


def _with_offsets(lines: Iterable) -> Iterator[tuple[int, str | bytes]]:
    offset = 0
    for item in lines:
        if isinstance(item, tuple):
            yield item
            continue
        yield offset, item
        offset += len(item.encode("utf-8") if isinstance(item, str) else item) + 1


def clean_stream(lines: Iterable, stats: IngestStats) -> Iterator[TweetRecord]:
    """Parse and filter raw lines, counting every outcome except duplicates."""
    for offset, line in _with_offsets(lines):
        stats.seen += 1
        try:
            raw = parse_raw(line, offset)
        except ParseError as exc:
            stats.parse_errors += 1
            logger.debug("skipping line: %s", exc)
            continue
        out = filter_record(raw)
        if out is SkipReason.MISSING_LOCATION:
            stats.skipped_missing_location += 1
        elif out is SkipReason.MISSING_LANGUAGE:
            stats.skipped_missing_language += 1
        else:
            yield out


def ingest(lines: Iterable, stats: IngestStats | None = None,
           memory_bound: int = 1_000_000) -> Iterator[TweetRecord]:
    """parse -> filter -> dedupe, lazily. ``stats`` is filled in as the stream drains."""
    stats = stats if stats is not None else IngestStats()
    deduper = Deduper(lambda r: r.tweet_id, memory_bound)
    for rec in deduper.run(clean_stream(lines, stats)):
        stats.kept += 1
        yield rec
    stats.duplicates_removed = deduper.duplicates_removed
