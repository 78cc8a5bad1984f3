"""Rank correlation for full and partial rankings, and the HDI comparison.

All coefficients are accumulated over exact integers and divided once as
a Fraction, so results do not depend on summation order.
"""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

from .model import CountryStats, RankedList

logger = logging.getLogger(__name__)

HDI_CATEGORIES = ("very_high", "high", "medium", "low")
HDI_LIST_SIZE = 20

# what to use for max v in the denominator
MAX_PRESENT = "present"  # max over ranks actually in the comparison list, i.e. m
MAX_ALL = "all"  # max over every v, placeholders included


class DegenerateRanking(ValueError):
    pass


@dataclass(frozen=True)
class PartialRankPair:
    reference: RankedList
    comparison: RankedList
    v: tuple[int, ...]
    missing: int  # value used for reference items absent from the comparison

    @property
    def n(self) -> int:
        return len(self.reference)

    @property
    def m(self) -> int:
        return len(self.comparison)


def build_pair(reference: RankedList, comparison: RankedList, missing_rank: int | None = None
               ) -> PartialRankPair:
    """Look up each reference item's rank in ``comparison``.

    Absent items get ``missing_rank``, m + 1 by default.
    """
    if len(reference) < 1 or len(comparison) < 1:
        raise ValueError("both rankings need at least one item")
    placeholder = len(comparison) + 1 if missing_rank is None else missing_rank
    v = tuple(comparison.rank(item) or placeholder for item in reference)
    return PartialRankPair(reference, comparison, v, placeholder)


def msrc(pair: PartialRankPair, classic_factor: bool = False, max_rank: str = MAX_PRESENT) -> float:
    """Modified Spearman coefficient for a reference ranking against a partial one.

    ``1 - sum((i - v_i)**2) / (m * (max_v**2 - 1))`` with i running over
    reference positions. ``classic_factor`` multiplies the sum by 6, which on
    two full rankings gives the textbook Spearman rho. When the denominator
    vanishes, perfect agreement (zero sum) still returns 1.0 and anything
    else raises :class:`DegenerateRanking`.
    """
    num = sum((i - vi) ** 2 for i, vi in enumerate(pair.v, start=1))
    if classic_factor:
        num *= 6
    if max_rank == MAX_PRESENT:
        top = pair.m
    elif max_rank == MAX_ALL:
        top = max(pair.v)
    else:
        raise ValueError(f"max_rank must be {MAX_PRESENT!r} or {MAX_ALL!r}")
    den = pair.m * (top * top - 1)
    if den == 0:
        if num == 0:
            return 1.0
        raise DegenerateRanking(f"zero denominator (m={pair.m}, max v={top})")
    return float(1 - Fraction(num, den))


def _check_same_items(a: RankedList, b: RankedList):
    if set(a) != set(b):
        raise ValueError("rankings must contain the same items")


def spearman_classic(full_a: RankedList, full_b: RankedList) -> float:
    """Textbook Spearman rho, 1 - 6*sum(d**2) / (n*(n**2 - 1)), for untied full rankings."""
    _check_same_items(full_a, full_b)
    n = len(full_a)
    d2 = sum((pos - full_b.rank(item)) ** 2 for pos, item in enumerate(full_a, start=1))
    if n < 2:
        return 1.0
    return float(1 - Fraction(6 * d2, n * (n * n - 1)))


def _count_inversions(seq: list[int]) -> int:
    # merge sort; O(n log n)
    if len(seq) < 2:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    inv = _count_inversions(left) + _count_inversions(right)
    i = j = 0
    for k in range(len(seq)):
        if j >= len(right) or (i < len(left) and left[i] <= right[j]):
            seq[k] = left[i]
            i += 1
        else:
            seq[k] = right[j]
            j += 1
            inv += len(left) - i
    return inv


def kendall_tau(full_a: RankedList, full_b: RankedList) -> float:
    """(concordant - discordant) / (n*(n-1)/2) for untied full rankings."""
    _check_same_items(full_a, full_b)
    n = len(full_a)
    if n < 2:
        return 1.0
    pairs = n * (n - 1) // 2
    discordant = _count_inversions([full_b.rank(item) for item in full_a])
    return float(Fraction(pairs - 2 * discordant, pairs))


@dataclass(frozen=True)
class HDIFixture:
    category: str
    countries: RankedList
    un_ranks: Mapping[str, int]

    def __post_init__(self):
        if len(self.countries) != HDI_LIST_SIZE:
            raise ValueError(f"{self.category}: expected {HDI_LIST_SIZE} countries, got {len(self.countries)}")


def read_hdi(path: str | Path | None = None) -> dict[str, HDIFixture]:
    """Load ``country_iso,category,un_rank`` rows; the bundled table when ``path`` is None.

    Within a category countries are ordered by UN rank, ties in file order.
    """
    if path is None:
        with resources.as_file(resources.files("tweetatlas") / "data" / "hdi_2019.csv") as p:
            return read_hdi(p)
    rows = defaultdict(list)
    with open(path, newline="", encoding="utf-8") as fh:
        for n, row in enumerate(csv.DictReader(fh)):
            cat = row["category"].strip()
            if cat not in HDI_CATEGORIES:
                raise ValueError(f"unknown HDI category {cat!r}")
            rows[cat].append((int(row["un_rank"]), n, row["country_iso"].strip()))
    missing = [c for c in HDI_CATEGORIES if c not in rows]
    if missing:
        raise ValueError(f"HDI file is missing categories: {', '.join(missing)}")
    out = {}
    for cat in HDI_CATEGORIES:
        ordered = sorted(rows[cat])
        out[cat] = HDIFixture(cat, RankedList(iso for _, _, iso in ordered),
                              {iso: r for r, _, iso in ordered})
    return out


@dataclass
class HDIResult:
    category: str
    rs_prime: float | None
    n: int
    m: int
    scatter: list[tuple[str, int, int]]  # (country_iso, un_rank, tweet_rank)


def hdi_experiment(country_counts: Mapping[str, CountryStats | int], fixtures: Mapping[str, HDIFixture],
                   classic_factor: bool = False, max_rank: str = MAX_PRESENT) -> list[HDIResult]:
    """Correlate each HDI category's UN order with its order by tweet volume.

    The comparison ranking holds only the category's countries that have
    tweets; countries without any take the placeholder rank. A category with
    no tweets at all has no coefficient (``rs_prime`` is None).
    """
    missing = [c for c in HDI_CATEGORIES if c not in fixtures]
    if missing:
        raise ValueError(f"missing HDI categories: {', '.join(missing)}")

    def tweets(iso):
        v = country_counts.get(iso)
        if v is None:
            return 0
        return v.tweet_count if isinstance(v, CountryStats) else int(v)

    results = []
    for cat in HDI_CATEGORIES:
        fx = fixtures[cat]
        present = {iso: tweets(iso) for iso in fx.countries if tweets(iso) > 0}
        if not present:
            logger.warning("no tweets for any %s-HDI country; skipping coefficient", cat)
            results.append(HDIResult(cat, None, len(fx.countries), 0,
                                     [(iso, fx.un_ranks[iso], 1) for iso in fx.countries]))
            continue
        comparison = RankedList.from_scores(present)
        pair = build_pair(fx.countries, comparison)
        rs = msrc(pair, classic_factor=classic_factor, max_rank=max_rank)
        scatter = [(iso, fx.un_ranks[iso], v) for iso, v in zip(fx.countries, pair.v)]
        results.append(HDIResult(cat, rs, pair.n, pair.m, scatter))
    return results
