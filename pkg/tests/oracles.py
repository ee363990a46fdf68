"""Independent brute-force reimplementations used to check the real ones.

Everything here is written as plainly as possible and shares no code path
with the package internals it checks: flag matching is restated from the
mode definitions, chain containment is a positional scan, graph weights
are recounted with a Counter.
"""

from __future__ import annotations

from collections import Counter

from riwaya.model import TriMatchMode, TriState
from riwaya.store import Store


def matches(value: TriState, mode: TriMatchMode) -> bool:
    if mode is TriMatchMode.STRICT_YES:
        return value == TriState.YES
    if mode is TriMatchMode.YES_OR_LIMINAL:
        return value == TriState.YES or value == TriState.LIMINAL
    if mode is TriMatchMode.LIMINAL_ONLY:
        return value == TriState.LIMINAL
    if mode is TriMatchMode.NO_ONLY:
        return value == TriState.NO
    raise AssertionError(mode)


def query(store: Store, work_id=None, chapter_id=None, flags=(), transmitter_id=None):
    """Full scan; the transmitter predicate reads the chain directly."""
    keep = []
    for trad in store.traditions.values():
        chapter = store.chapters[trad.chapter_id]
        if work_id is not None and chapter.work_id != work_id:
            continue
        if chapter_id is not None and trad.chapter_id != chapter_id:
            continue
        if transmitter_id is not None:
            if transmitter_id not in [ref.transmitter_id for ref in trad.isnad]:
                continue
        ok = True
        for key, mode in flags:
            if not matches(trad.flags.value(key), mode):
                ok = False
                break
        if ok:
            keep.append(trad)
    keep.sort(
        key=lambda t: (
            store.chapters[t.chapter_id].work_id,
            store.chapters[t.chapter_id].ordinal,
            t.ordinal_in_chapter,
        )
    )
    return keep


def mention_counts(store: Store, work_id: int, key: str, mode: TriMatchMode):
    """(total_trads, matching_trads, total_chapters, matching_chapters)."""
    total = hit = chap_hit = 0
    chapters = [c for c in store.chapters.values() if c.work_id == work_id]
    for chapter in chapters:
        any_hit = False
        for trad in store.traditions.values():
            if trad.chapter_id != chapter.id:
                continue
            total += 1
            if matches(trad.flags.value(key), mode):
                hit += 1
                any_hit = True
        if any_hit:
            chap_hit += 1
    return total, hit, len(chapters), chap_hit


def contains_contiguous(haystack: tuple[int, ...], needle: tuple[int, ...]) -> bool:
    n = len(needle)
    for i in range(len(haystack) - n + 1):
        if haystack[i:i + n] == needle:
            return True
    return False


def chain_supports(store: Store, min_len: int) -> dict[tuple[int, ...], int]:
    """Support of every pattern, counted by per-tradition containment scans."""
    chains = [t.isnad.transmitter_ids() for t in store.traditions.values()]
    universe: set[tuple[int, ...]] = set()
    for ids in chains:
        for length in range(min_len, len(ids) + 1):
            for start in range(len(ids) - length + 1):
                universe.add(ids[start:start + length])
    return {
        pattern: sum(1 for ids in chains if contains_contiguous(ids, pattern))
        for pattern in universe
    }


def ranked_patterns(store: Store, min_len: int):
    supports = chain_supports(store, min_len)
    return sorted(supports.items(), key=lambda kv: (-kv[1], -len(kv[0]), kv[0]))


def graph_edges(store: Store, work_ids=None) -> tuple[Counter, set[int]]:
    """Edge Counter and node set recomputed straight from the chains."""
    counter: Counter = Counter()
    nodes: set[int] = set()
    for trad in store.traditions.values():
        if work_ids is not None:
            if store.chapters[trad.chapter_id].work_id not in work_ids:
                continue
        ids = trad.isnad.transmitter_ids()
        nodes.update(ids)
        for earlier, receiver in zip(ids[1:], ids[:-1]):
            counter[(earlier, receiver)] += 1
    return counter, nodes


def contingency(store: Store, key_a: str, key_b: str, mode: TriMatchMode):
    both = a_only = b_only = neither = 0
    for trad in store.traditions.values():
        a = matches(trad.flags.value(key_a), mode)
        b = matches(trad.flags.value(key_b), mode)
        both += a and b
        a_only += a and not b
        b_only += b and not a
        neither += not a and not b
    return both, a_only, b_only, neither
