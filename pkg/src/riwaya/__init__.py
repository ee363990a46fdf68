"""riwaya: corpus analytics for early Islamic tradition literature.

Traditions live in a TSV-backed relational store as isnad + matn records
with three-valued thematic flags; .rwy markup files carry the corpus text,
lexicon tagging finds names and transmission terms, chain extraction turns
marked text into transmission chains, and the analytics layer computes
mention statistics, attribution lists, frequent chain subsequences and
transmission graphs.
"""

from .analytics import (
    ChainPattern,
    ContingencyCounts,
    MentionStats,
    ReportRow,
    ReportTable,
    TransmissionGraph,
    attribution,
    common_chains,
    cooccurrence,
    graph_to_dot,
    graph_to_tsv,
    mention_stats,
    report_table,
    transmission_graph,
)
from .errors import (
    DanglingReference,
    DuplicateFlagKey,
    DuplicateLink,
    DuplicateOrdinal,
    EmptyWork,
    InvariantViolation,
    MarkupSyntaxError,
    NoLexicon,
    RiwayaError,
    StoreIOError,
    UnknownEndpoint,
    UnknownFlagKey,
    UnknownId,
    UnknownParent,
    ZeroTotal,
)
from .markup import (
    AmbiguityReport,
    AmbiguousName,
    ConcordanceHit,
    Lexicon,
    MarkupChapter,
    MarkupDocument,
    MarkupWork,
    Span,
    SpanKind,
    TagScope,
    TraditionBlock,
    concordance,
    extract_isnad,
    extract_isnad_and_matn,
    load_lexicon,
    make_block,
    parse_markup,
    parse_markup_file,
    resolve_unambiguous,
    save_lexicon,
    serialize_markup,
    tag_occurrences,
    write_markup_file,
)
from .model import (
    DEFAULT_FLAG_VOCABULARY,
    ChapterRecord,
    IsnadChain,
    LinkKind,
    LinkRow,
    Percent,
    ThematicFlags,
    TraditionRecord,
    TransmitterRecord,
    TransmitterRef,
    TriMatchMode,
    TriState,
    WorkRecord,
    percentage,
    tri_matches,
)
from .store import ImportReport, Store

__version__ = "0.1.0"
