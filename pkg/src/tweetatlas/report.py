"""Plot-ready report files and a hashed manifest built from the stage outputs."""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .analytics import HandleCount, country_share_of_top
from .rankcorr import HDI_CATEGORIES

REQUIRED = (
    "country_counts.csv", "bins.csv", "top_users_tweets.csv", "top_users_retweets.csv",
    "top_words.csv", "native_table.csv", "correlations.csv",
) + tuple(f"scatter_{c}.csv" for c in HDI_CATEGORIES)

FIG4_HANDLES = 20
FIG6_WORDS = 20


class MissingArtifact(FileNotFoundError):
    def __init__(self, name: str):
        super().__init__(f"missing artifact: {name}")
        self.name = name


@dataclass
class ManifestEntry:
    name: str
    path: str
    rows: int
    sha256: str


@dataclass
class ReportBundle:
    manifest: list[ManifestEntry]
    generated_at: str
    pipeline_config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "generated_at": self.generated_at,
            "pipeline_config": self.pipeline_config,
            "artifacts": [asdict(e) for e in self.manifest],
        }


def _read(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _write(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the timestamp for reproducible builds
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return now.strftime("%Y-%m-%dT%H:%M:%SZ")


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _handles(rows: list[dict]) -> list[HandleCount]:
    return [HandleCount(r["username"], r["country_iso"] or None, int(r["count"]), "") for r in rows]


def _share_rows(rows):
    if not rows:
        return []
    return [(s.country_iso, s.handles, f"{s.percentage:.1f}")
            for s in country_share_of_top(_handles(rows))]


def build_report(out_dir: str | Path, pipeline_config: dict | None = None) -> ReportBundle:
    """Derive the figure and table files in ``out_dir`` and write ``manifest.json``.

    Everything except the manifest's ``generated_at`` is a pure function of
    the upstream files, so reruns are byte-identical.
    """
    out = Path(out_dir)
    for name in REQUIRED:
        if not (out / name).is_file():
            raise MissingArtifact(name)

    written: list[tuple[str, int]] = []

    def emit(name, header, rows):
        rows = list(rows)
        _write(out / name, header, rows)
        written.append((name, len(rows)))

    bins = _read(out / "bins.csv")
    choropleth = sorted(((iso, int(b["bin"])) for b in bins for iso in b["countries"].split()),
                        key=lambda t: t[0])
    emit("choropleth.csv", ["country_iso", "bin"], choropleth)

    tweets = _read(out / "top_users_tweets.csv")
    retweets = _read(out / "top_users_retweets.csv")
    emit("fig3_tweets.csv", ["country_iso", "handles", "percentage"], _share_rows(tweets))
    emit("fig3_retweets.csv", ["country_iso", "handles", "percentage"], _share_rows(retweets))
    emit("fig4_top20.csv", ["rank", "username", "country_iso", "count"],
         ((r["rank"], r["username"], r["country_iso"], r["count"]) for r in tweets[:FIG4_HANDLES]))

    words = _read(out / "top_words.csv")
    emit("fig6_words.csv", ["rank", "word", "count"],
         ((r["rank"], r["word"], r["count"]) for r in words[:FIG6_WORDS]))

    for cat in HDI_CATEGORIES:
        pts = _read(out / f"scatter_{cat}.csv")
        emit(f"fig7_scatter_{cat}.csv", ["country_iso", "tweet_rank", "un_rank"],
             ((p["country_iso"], p["tweet_rank"], p["un_rank"]) for p in pts))

    native = _read(out / "native_table.csv")
    emit("table1.csv", ["rank", "country_iso", "native_languages", "total_tweets", "tweets_in_native",
                        "pct_native", "pct_other"],
         ((r["rank"], r["country_iso"], r["native_languages"], r["total_tweets"],
           r["tweets_in_native"], r["pct_native"], r["pct_other"]) for r in native))

    manifest = [ManifestEntry(name, name, rows, sha256_file(out / name)) for name, rows in written]
    bundle = ReportBundle(manifest, _timestamp(), dict(pipeline_config or {}))
    (out / "manifest.json").write_text(json.dumps(bundle.to_dict(), indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    return bundle


def verify_manifest(out_dir: str | Path) -> list[str]:
    """Names of manifest artifacts that are missing or whose hash no longer matches."""
    out = Path(out_dir)
    data = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    bad = []
    for a in data["artifacts"]:
        p = out / a["path"]
        if not p.is_file() or sha256_file(p) != a["sha256"]:
            bad.append(a["name"])
    return bad
