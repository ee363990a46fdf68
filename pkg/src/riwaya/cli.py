"""The riwaya command line: parse, tag, extract, ingest, query, report.

Output is machine-parseable TSV by default (--format text for aligned
tables, --format dot for graphs); diagnostics go to stderr.  Exit codes:
0 success, 1 usage error, 2 data error (parse/import/query failures),
3 I/O error.  The store directory comes from --store or the RIWAYA_STORE
environment variable, flags winning.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import analytics
from .errors import MarkupSyntaxError, RiwayaError, StoreIOError
from .markup import (
    AmbiguityReport,
    Lexicon,
    MarkupDocument,
    extract_isnad_and_matn,
    load_lexicon,
    parse_markup,
    resolve_unambiguous,
    serialize_markup,
)
from .model import DEFAULT_FLAG_VOCABULARY, TriMatchMode
from .store import Store, _esc, _serialize_chain, _serialize_flags

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3

_MODE_CHOICES = tuple(mode.value for mode in TriMatchMode)


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _store_path(args) -> Path:
    path = args.store or os.environ.get("RIWAYA_STORE")
    if not path:
        raise _Failure(EXIT_USAGE, "riwaya: --store required (or set RIWAYA_STORE)")
    return Path(path)


def _open_store(args) -> Store:
    return Store.open(_store_path(args))


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Failure(EXIT_IO, f"riwaya: {path}: {exc.strerror or exc}") from exc


def _load_doc(path: str, lexicon: Lexicon | None = None) -> MarkupDocument:
    text = _read_text(path)
    try:
        return parse_markup(text, lexicon)
    except MarkupSyntaxError as exc:
        raise _Failure(EXIT_DATA, f"{path}:{exc.line}: {exc.reason}") from exc


def _load_lexicon(path: str) -> Lexicon:
    try:
        return load_lexicon(path)
    except OSError as exc:
        raise _Failure(EXIT_IO, f"riwaya: {path}: {exc.strerror or exc}") from exc
    except MarkupSyntaxError as exc:
        raise _Failure(EXIT_DATA, f"{path}:{exc.line}: {exc.reason}") from exc


def _mode(args) -> TriMatchMode:
    return TriMatchMode(args.mode)


def _ambiguity_lines(prefix: str, report: AmbiguityReport) -> list[str]:
    return [
        f"{prefix}: position {entry.position} surface {entry.surface_form!r}"
        f" candidates {','.join(str(c) for c in entry.candidates)}"
        for entry in report.entries
    ]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_init(args) -> int:
    path = _store_path(args)
    if args.flags is None:
        vocabulary = DEFAULT_FLAG_VOCABULARY
    else:
        vocabulary = tuple(key for key in args.flags.split(",") if key)
    store = Store.create(path, vocabulary)
    if args.lexicon:
        store.register_lexicon(_load_lexicon(args.lexicon))
    return EXIT_OK


def cmd_parse_check(args) -> int:
    lexicon = _load_lexicon(args.lexicon) if args.lexicon else None
    for path in args.files:
        _load_doc(path, lexicon)
        print(f"{path}: OK")
    return EXIT_OK


def cmd_tag(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    doc = _load_doc(args.file, lexicon)
    tagged = resolve_unambiguous(doc, lexicon)
    unresolved = 0
    for _, _, block in tagged.blocks():
        for span in block.name_spans():
            if span.is_ambiguous():
                unresolved += 1
    text = serialize_markup(tagged)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if unresolved and args.verbose:
        print(f"{args.file}: {unresolved} ambiguous name(s) left unresolved",
              file=sys.stderr)
    return EXIT_OK


def cmd_extract(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    print("work_id\tchapter_id\ttradition_id\tstatus\tchain")
    for path in args.files:
        doc = _load_doc(path, lexicon)
        for work, chapter, block in doc.blocks():
            result, _ = extract_isnad_and_matn(block, lexicon)
            if isinstance(result, AmbiguityReport):
                detail = "; ".join(
                    f"position {e.position} surface {e.surface_form!r}"
                    f" candidates {','.join(str(c) for c in e.candidates)}"
                    for e in result.entries
                )
                row = ("ambiguous", detail)
            elif len(result) == 0:
                row = ("empty", "")
            else:
                row = ("ok", _serialize_chain(result))
            print(f"{work.id}\t{chapter.id}\t{block.id}\t{row[0]}\t{row[1]}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    store = _open_store(args)
    lexicon = _load_lexicon(args.lexicon)
    store.autosave = False
    if args.register:
        store.register_lexicon(lexicon)
    print("file\tworks\tchapters\ttraditions\tindiv_trad_links"
          "\trecueil_trad_links\tambiguities")
    reviews: list[str] = []
    for path in args.files:
        doc = _load_doc(path, lexicon)
        report = store.import_document(doc, lexicon)
        print(
            f"{path}\t{report.works}\t{report.chapters}\t{report.traditions}"
            f"\t{report.indiv_trad_links}\t{report.recueil_trad_links}"
            f"\t{report.ambiguities}"
        )
        for tradition_id, ambiguity in report.review:
            reviews.extend(
                _ambiguity_lines(f"review: tradition {tradition_id}", ambiguity)
            )
        if args.verbose:
            print(f"ingested {path}", file=sys.stderr)
    store.save()
    for line in reviews:
        print(line, file=sys.stderr)
    return EXIT_OK


def cmd_query(args) -> int:
    store = _open_store(args)
    mode = _mode(args)
    flags = tuple((key, mode) for key in (args.flag or ()))
    results = store.query_traditions(
        work_id=args.work,
        chapter_id=args.chapter,
        flags=flags,
        transmitter_id=args.transmitter,
    )
    print("id\tchapter_id\tordinal\tisnad\tflags\tmatn_summary")
    for trad in results:
        print(
            f"{trad.id}\t{trad.chapter_id}\t{trad.ordinal_in_chapter}"
            f"\t{_serialize_chain(trad.isnad)}"
            f"\t{_serialize_flags(trad.flags, store.flag_vocabulary)}"
            f"\t{_esc(trad.matn_summary)}"
        )
    return EXIT_OK


def _print_table(table: analytics.ReportTable, fmt: str) -> None:
    sys.stdout.write(table.to_text() if fmt == "text" else table.to_tsv())


def cmd_stats(args) -> int:
    store = _open_store(args)
    stats = analytics.mention_stats(store, args.work, args.flag, _mode(args))
    row = analytics.ReportRow(
        label=store.get_work(args.work).label(),
        total_traditions=stats.total_traditions,
        mentioning=stats.mentioning,
        total_chapters=stats.total_chapters,
        chapters_mentioning=stats.chapters_mentioning,
        pct_traditions=stats.pct_traditions,
        pct_chapters=stats.pct_chapters,
    )
    _print_table(analytics.ReportTable(rows=(row,)), args.format)
    return EXIT_OK


def cmd_report(args) -> int:
    store = _open_store(args)
    work_ids = None
    if args.works:
        work_ids = tuple(int(part) for part in args.works.split(",") if part)
    table = analytics.report_table(store, args.flag, _mode(args), work_ids)
    _print_table(table, args.format)
    return EXIT_OK


def cmd_attrib(args) -> int:
    store = _open_store(args)
    ids = analytics.attribution(
        store, args.transmitter, work_id=args.work, position=args.position
    )
    print("tradition_id")
    for tradition_id in ids:
        print(tradition_id)
    return EXIT_OK


def cmd_chains(args) -> int:
    store = _open_store(args)
    patterns = analytics.common_chains(store, min_len=args.min_len, top_k=args.top)
    print("support\tlength\tsequence")
    for pattern in patterns:
        seq = ",".join(str(tid) for tid in pattern.sequence)
        print(f"{pattern.support}\t{len(pattern.sequence)}\t{seq}")
    return EXIT_OK


def cmd_graph(args) -> int:
    store = _open_store(args)
    work_ids = None
    if args.works:
        work_ids = tuple(int(part) for part in args.works.split(",") if part)
    graph = analytics.transmission_graph(store, work_ids)
    if args.format == "dot":
        sys.stdout.write(analytics.graph_to_dot(graph, store))
    else:
        sys.stdout.write(analytics.graph_to_tsv(graph))
    return EXIT_OK


def cmd_export(args) -> int:
    store = _open_store(args)
    store.export_tables(args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _formatter(prog: str) -> argparse.HelpFormatter:
    return argparse.HelpFormatter(prog, width=96)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riwaya",
        description="Corpus analytics for tradition literature: markup, "
        "chains, relational store, mention statistics.",
        formatter_class=_formatter,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def add(name: str, text: str, func, store: bool = False):
        p = sub.add_parser(name, help=text, description=text, formatter_class=_formatter)
        if store:
            p.add_argument("--store", metavar="DIR",
                           help="store directory (default: $RIWAYA_STORE)")
        p.set_defaults(func=func)
        return p

    def add_mode(p):
        p.add_argument("--mode", choices=_MODE_CHOICES, default="strict-yes",
                       help="tri-state match mode (default: strict-yes)")

    p = add("init", "create an empty store", cmd_init, store=True)
    p.add_argument("--flags", metavar="KEYS",
                   help="comma-separated flag vocabulary (default: built-in nine keys)")
    p.add_argument("--lexicon", metavar="FILE",
                   help="register this lexicon's transmitters in the new store")

    p = add("parse-check", "validate .rwy files", cmd_parse_check)
    p.add_argument("--lexicon", metavar="FILE",
                   help="also resolve explicit @NAME annotations against this lexicon")
    p.add_argument("files", nargs="+", metavar="FILE")

    p = add("tag", "apply a lexicon and write the annotated .rwy", cmd_tag)
    p.add_argument("--lexicon", metavar="FILE", required=True)
    p.add_argument("--out", metavar="FILE", help="output path (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("file", metavar="FILE")

    p = add("extract", "extract chains, reporting ambiguities", cmd_extract)
    p.add_argument("--lexicon", metavar="FILE", required=True)
    p.add_argument("files", nargs="+", metavar="FILE")

    p = add("ingest", "import documents into the store", cmd_ingest, store=True)
    p.add_argument("--lexicon", metavar="FILE", required=True)
    p.add_argument("--register", action="store_true",
                   help="insert the lexicon's transmitters before importing")
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("files", nargs="+", metavar="FILE")

    p = add("query", "filter traditions", cmd_query, store=True)
    p.add_argument("--work", type=int, metavar="ID")
    p.add_argument("--chapter", type=int, metavar="ID")
    p.add_argument("--transmitter", type=int, metavar="ID")
    p.add_argument("--flag", action="append", metavar="KEY",
                   help="flag predicate; repeatable, all must match")
    add_mode(p)

    p = add("stats", "mention statistics for one work", cmd_stats, store=True)
    p.add_argument("--work", type=int, required=True, metavar="ID")
    p.add_argument("--flag", required=True, metavar="KEY")
    p.add_argument("--format", choices=("tsv", "text"), default="tsv")
    add_mode(p)

    p = add("report", "mention table across works", cmd_report, store=True)
    p.add_argument("--flag", required=True, metavar="KEY")
    p.add_argument("--works", metavar="IDS", help="comma-separated work ids (default: all)")
    p.add_argument("--format", choices=("tsv", "text"), default="tsv")
    add_mode(p)

    p = add("attrib", "traditions whose chain contains a transmitter", cmd_attrib,
            store=True)
    p.add_argument("--transmitter", type=int, required=True, metavar="ID")
    p.add_argument("--work", type=int, metavar="ID")
    p.add_argument("--position", type=int, metavar="K",
                   help="restrict to 0-based chain position K")

    p = add("chains", "most frequent contiguous chain subsequences", cmd_chains,
            store=True)
    p.add_argument("--min-len", type=int, default=2, metavar="N")
    p.add_argument("--top", type=int, default=10, metavar="K")

    p = add("graph", "transmission graph as TSV edges or DOT", cmd_graph, store=True)
    p.add_argument("--works", metavar="IDS", help="comma-separated work ids (default: all)")
    p.add_argument("--format", choices=("tsv", "dot"), default="tsv")

    p = add("export", "dump the seven tables as TSV", cmd_export, store=True)
    p.add_argument("--out", required=True, metavar="DIR")

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except _Failure as exc:
        print(exc.message, file=sys.stderr)
        return exc.code
    except StoreIOError as exc:
        print(f"riwaya: {exc}", file=sys.stderr)
        return EXIT_IO
    except RiwayaError as exc:
        print(f"riwaya: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"riwaya: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
