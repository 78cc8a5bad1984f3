"""Order-preserving deduplication by tweet id with a disk spill path.

Ids are tracked in a set until it holds ``memory_bound`` entries. Past that
point the ids already emitted are written out as a sorted run, and the rest
of the stream is resolved with an external sort: records are buffered in
chunks of ``memory_bound``, each chunk sorted by (id, seq) and spilled,
the runs merged to keep the first occurrence of each id, and the survivors
merged back into stream order.
"""

from __future__ import annotations

import heapq
import itertools
import pickle
import tempfile
from typing import Callable, Iterable, Iterator, TypeVar

T = TypeVar("T")

# seq used for ids that were already emitted before the spill started
_EMITTED = -1


def _dump_run(items, dir=None):
    # one self-contained pickle per item: a shared Pickler would grow its
    # memo without bound, and clearing it desyncs a shared Unpickler
    f = tempfile.TemporaryFile(dir=dir)
    for item in items:
        pickle.dump(item, f, protocol=pickle.HIGHEST_PROTOCOL)
    f.seek(0)
    return f


def _load_run(f):
    while True:
        try:
            yield pickle.load(f)
        except EOFError:
            return


# most runs open at once; more than this are merged in passes first
FAN_IN = 64


def _merge_runs(runs, key, dir=None, fan_in=None):
    """Merge sorted runs until at most ``fan_in`` remain, closing consumed files."""
    fan_in = fan_in or FAN_IN
    while len(runs) > fan_in:
        merged = []
        for i in range(0, len(runs), fan_in):
            group = runs[i:i + fan_in]
            merged.append(_dump_run(heapq.merge(*(_load_run(f) for f in group), key=key), dir))
            for f in group:
                f.close()
        runs = merged
    return runs


class Deduper:
    """Keep the first record per key, in stream order, counting the rest.

    >>> d = Deduper(key=lambda x: x)
    >>> list(d.run(["1", "2", "1"])), d.duplicates_removed
    (['1', '2'], 1)
    """

    def __init__(self, key: Callable[[T], str], memory_bound: int = 1_000_000, tmp_dir=None):
        if memory_bound < 1:
            raise ValueError("memory_bound must be >= 1")
        self.key = key
        self.memory_bound = memory_bound
        self.tmp_dir = tmp_dir
        self.duplicates_removed = 0
        self.spilled = False

    def run(self, stream: Iterable[T]) -> Iterator[T]:
        it = iter(stream)
        seen: set[str] = set()
        for item in it:
            k = self.key(item)
            if k in seen:
                self.duplicates_removed += 1
                continue
            if len(seen) >= self.memory_bound:
                self.spilled = True
                yield from self._external(itertools.chain([item], it), seen)
                return
            seen.add(k)
            yield item

    def _external(self, rest: Iterator[T], emitted: set[str]) -> Iterator[T]:
        runs = [_dump_run(((k, _EMITTED, None) for k in sorted(emitted)), self.tmp_dir)]
        emitted.clear()

        seq = itertools.count()
        while True:
            chunk = [(self.key(x), next(seq), x) for x in itertools.islice(rest, self.memory_bound)]
            if not chunk:
                break
            chunk.sort(key=lambda t: (t[0], t[1]))
            runs.append(_dump_run(chunk, self.tmp_dir))
            del chunk

        by_id = lambda t: (t[0], t[1])  # noqa: E731
        runs = _merge_runs(runs, by_id, self.tmp_dir)
        merged = heapq.merge(*(_load_run(f) for f in runs), key=by_id)
        survivors = []
        keepers = []
        prev = None
        for k, s, item in merged:
            if k == prev:
                self.duplicates_removed += 1
                continue
            prev = k
            if s == _EMITTED:
                continue
            keepers.append((s, item))
            if len(keepers) >= self.memory_bound:
                keepers.sort(key=lambda t: t[0])
                survivors.append(_dump_run(keepers, self.tmp_dir))
                keepers = []
        for f in runs:
            f.close()
        if keepers:
            keepers.sort(key=lambda t: t[0])
            survivors.append(_dump_run(keepers, self.tmp_dir))
            keepers = []
        survivors = _merge_runs(survivors, lambda t: t[0], self.tmp_dir)

        try:
            for _, item in heapq.merge(*(_load_run(f) for f in survivors), key=lambda t: t[0]):
                yield item
        finally:
            for f in survivors:
                f.close()


def dedupe(stream: Iterable[T], key: Callable[[T], str] = lambda r: r.tweet_id,
           memory_bound: int = 1_000_000) -> tuple[list[T], int]:
    """Eager convenience wrapper: returns (kept records, duplicates removed)."""
    d = Deduper(key, memory_bound)
    kept = list(d.run(stream))
    return kept, d.duplicates_removed
