"""Statistical queries over a store: the quantitative side of the toolkit.

Everything here is a pure read-only function over a store snapshot.
Mention statistics are flag-driven: the analyst's classification is the
record of what a tradition mentions, which keeps every figure reproducible
from the store alone.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyWork, InvariantViolation, UnknownFlagKey
from .model import Percent, TriMatchMode, percentage, tri_matches
from .store import Store

# ---------------------------------------------------------------------------
# Mention statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MentionStats:
    """Per-work mention counts at tradition and chapter granularity."""

    work_id: int
    total_traditions: int
    mentioning: int
    pct_traditions: Percent
    total_chapters: int
    chapters_mentioning: int
    pct_chapters: Percent


def mention_stats(
    store: Store,
    work_id: int,
    flag_key: str,
    mode: TriMatchMode = TriMatchMode.STRICT_YES,
) -> MentionStats:
    """Count traditions and chapters of a work matching (flag_key, mode).

    A chapter mentions when at least one of its traditions matches.
    Raises EmptyWork for works with zero traditions, where the percentage
    is undefined.
    """
    store.get_work(work_id)
    if flag_key not in store.flag_vocabulary:
        raise UnknownFlagKey(f"flag key {flag_key!r} not in vocabulary")
    chapters = store.chapters_of_work(work_id)
    total_traditions = 0
    mentioning = 0
    chapters_mentioning = 0
    for chapter in chapters:
        chapter_hit = False
        for trad in store.traditions_of_chapter(chapter.id):
            total_traditions += 1
            if tri_matches(trad.flags.value(flag_key), mode):
                mentioning += 1
                chapter_hit = True
        if chapter_hit:
            chapters_mentioning += 1
    if total_traditions == 0:
        raise EmptyWork(f"work {work_id} has no traditions")
    return MentionStats(
        work_id=work_id,
        total_traditions=total_traditions,
        mentioning=mentioning,
        pct_traditions=percentage(mentioning, total_traditions),
        total_chapters=len(chapters),
        chapters_mentioning=chapters_mentioning,
        pct_chapters=percentage(chapters_mentioning, len(chapters)),
    )


# ---------------------------------------------------------------------------
# Report table
# ---------------------------------------------------------------------------

REPORT_COLUMNS = (
    "collection",
    "traditions",
    "traditions_mentioning",
    "chapters",
    "chapters_mentioning",
    "pct_traditions",
    "pct_chapters",
)


@dataclass(frozen=True)
class ReportRow:
    label: str
    total_traditions: int
    mentioning: int
    total_chapters: int
    chapters_mentioning: int
    pct_traditions: Percent | None  # None renders as a dash (empty work)
    pct_chapters: Percent | None

    def cells(self) -> tuple[str, ...]:
        return (
            self.label,
            str(self.total_traditions),
            str(self.mentioning),
            str(self.total_chapters),
            str(self.chapters_mentioning),
            "-" if self.pct_traditions is None else self.pct_traditions.render(),
            "-" if self.pct_chapters is None else self.pct_chapters.render(),
        )


@dataclass(frozen=True)
class ReportTable:
    rows: tuple[ReportRow, ...]

    def to_tsv(self) -> str:
        lines = ["\t".join(REPORT_COLUMNS)]
        lines.extend("\t".join(row.cells()) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        """Aligned plain-text rendering; percentages carry a % sign."""
        header = (
            "Collection",
            "Traditions",
            "Mentioning",
            "Chapters",
            "Chapters mentioning",
            "% traditions",
            "% chapters",
        )
        table = [header]
        for row in self.rows:
            cells = list(row.cells())
            for i in (5, 6):
                if cells[i] != "-":
                    cells[i] += "%"
            table.append(tuple(cells))
        widths = [max(len(r[i]) for r in table) for i in range(len(header))]
        out = []
        for r in table:
            first = r[0].ljust(widths[0])
            rest = "  ".join(r[i].rjust(widths[i]) for i in range(1, len(header)))
            out.append((first + "  " + rest).rstrip())
        return "\n".join(out) + "\n"


def report_table(
    store: Store,
    flag_key: str,
    mode: TriMatchMode = TriMatchMode.STRICT_YES,
    work_ids: tuple[int, ...] | None = None,
) -> ReportTable:
    """One row per work, in the given order, with the six mention columns.

    Works without traditions yield a dashed row rather than aborting the
    whole report.
    """
    if work_ids is None:
        work_ids = tuple(sorted(store.works))
    rows = []
    for work_id in work_ids:
        work = store.get_work(work_id)
        try:
            stats = mention_stats(store, work_id, flag_key, mode)
        except EmptyWork:
            rows.append(
                ReportRow(
                    label=work.label(),
                    total_traditions=0,
                    mentioning=0,
                    total_chapters=len(store.chapters_of_work(work_id)),
                    chapters_mentioning=0,
                    pct_traditions=None,
                    pct_chapters=None,
                )
            )
            continue
        rows.append(
            ReportRow(
                label=work.label(),
                total_traditions=stats.total_traditions,
                mentioning=stats.mentioning,
                total_chapters=stats.total_chapters,
                chapters_mentioning=stats.chapters_mentioning,
                pct_traditions=stats.pct_traditions,
                pct_chapters=stats.pct_chapters,
            )
        )
    return ReportTable(rows=tuple(rows))


# ---------------------------------------------------------------------------
# Attribution
# ---------------------------------------------------------------------------

def attribution(
    store: Store,
    transmitter_id: int,
    work_id: int | None = None,
    position: int | None = None,
) -> list[int]:
    """Ids of traditions whose chain contains the transmitter.

    position=None means anywhere in the chain; position=k restricts to the
    0-based chain position k (0 is the collector end).  Sorted by id.
    """
    store.get_transmitter(transmitter_id)
    if position is not None and position < 0:
        raise InvariantViolation("position", "must be >= 0")
    if work_id is not None:
        trads = store.traditions_of_work(work_id)
    else:
        trads = list(store.traditions.values())
    out = []
    for trad in trads:
        ids = trad.isnad.transmitter_ids()
        if position is None:
            hit = transmitter_id in ids
        else:
            hit = position < len(ids) and ids[position] == transmitter_id
        if hit:
            out.append(trad.id)
    return sorted(out)


# ---------------------------------------------------------------------------
# Frequent chain subsequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainPattern:
    """A contiguous id subsequence and the number of traditions carrying it."""

    sequence: tuple[int, ...]
    support: int


def common_chains(store: Store, min_len: int = 2, top_k: int = 10) -> list[ChainPattern]:
    """Most frequent contiguous chain subsequences of length >= min_len.

    Support counts traditions containing the pattern at least once, not
    occurrences: the unit of evidence is the tradition.  Ordering is
    support desc, then length desc, then the id sequence ascending, which
    makes the output deterministic everywhere.
    """
    if min_len < 2:
        raise InvariantViolation("min_len", "must be >= 2")
    if top_k < 1:
        raise InvariantViolation("top_k", "must be >= 1")
    support: dict[tuple[int, ...], int] = {}
    for trad in store.traditions.values():
        ids = trad.isnad.transmitter_ids()
        seen: set[tuple[int, ...]] = set()
        for length in range(min_len, len(ids) + 1):
            for start in range(len(ids) - length + 1):
                seen.add(ids[start:start + length])
        for pattern in seen:
            support[pattern] = support.get(pattern, 0) + 1
    ranked = sorted(
        support.items(), key=lambda item: (-item[1], -len(item[0]), item[0])
    )
    return [ChainPattern(sequence=seq, support=n) for seq, n in ranked[:top_k]]


# ---------------------------------------------------------------------------
# Transmission graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransmissionGraph:
    """Directed weighted graph of adjacent chain pairs.

    Edges point from the earlier authority to the transmitter who reports
    from them, so weight flows in the direction the tradition travelled.
    """

    nodes: tuple[int, ...]
    edges: tuple[tuple[int, int, int], ...]  # (src, dst, weight), sorted

    def total_weight(self) -> int:
        return sum(w for _, _, w in self.edges)


def transmission_graph(store: Store, work_ids: tuple[int, ...] | None = None) -> TransmissionGraph:
    """Aggregate every chain [c0, c1, ...] into edges c(i+1) -> c(i).

    Weight counts adjacent-pair occurrences across all scoped chains, so
    the total weight equals the sum over traditions of (chain length - 1).
    """
    if work_ids is None:
        trads = list(store.traditions.values())
    else:
        trads = []
        for work_id in work_ids:
            trads.extend(store.traditions_of_work(work_id))
    nodes: set[int] = set()
    weights: dict[tuple[int, int], int] = {}
    for trad in trads:
        ids = trad.isnad.transmitter_ids()
        nodes.update(ids)
        for i in range(len(ids) - 1):
            edge = (ids[i + 1], ids[i])
            weights[edge] = weights.get(edge, 0) + 1
    return TransmissionGraph(
        nodes=tuple(sorted(nodes)),
        edges=tuple((src, dst, weights[(src, dst)]) for src, dst in sorted(weights)),
    )


def graph_to_dot(graph: TransmissionGraph, store: Store) -> str:
    """DOT rendering; nodes labeled 'id: canonical_name', edges by weight."""
    lines = ["digraph transmission {"]
    for node in graph.nodes:
        name = store.get_transmitter(node).canonical_name.replace('"', '\\"')
        lines.append(f'  {node} [label="{node}: {name}"];')
    for src, dst, weight in graph.edges:
        lines.append(f'  {src} -> {dst} [label="{weight}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_tsv(graph: TransmissionGraph) -> str:
    lines = ["src_id\tdst_id\tweight"]
    lines.extend(f"{src}\t{dst}\t{weight}" for src, dst, weight in graph.edges)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Flag co-occurrence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContingencyCounts:
    """2x2 contingency over all traditions; cells sum to the total."""

    both: int
    a_only: int
    b_only: int
    neither: int

    def total(self) -> int:
        return self.both + self.a_only + self.b_only + self.neither


def cooccurrence(
    store: Store,
    flag_key_a: str,
    flag_key_b: str,
    mode: TriMatchMode = TriMatchMode.STRICT_YES,
) -> ContingencyCounts:
    """Raw association counts between two flag keys under one match mode.

    No coefficient is computed here; the four counts feed whatever measure
    downstream analysis prefers.
    """
    for key in (flag_key_a, flag_key_b):
        if key not in store.flag_vocabulary:
            raise UnknownFlagKey(f"flag key {key!r} not in vocabulary")
    both = a_only = b_only = neither = 0
    for trad in store.traditions.values():
        a = tri_matches(trad.flags.value(flag_key_a), mode)
        b = tri_matches(trad.flags.value(flag_key_b), mode)
        if a and b:
            both += 1
        elif a:
            a_only += 1
        elif b:
            b_only += 1
        else:
            neither += 1
    return ContingencyCounts(both=both, a_only=a_only, b_only=b_only, neither=neither)
