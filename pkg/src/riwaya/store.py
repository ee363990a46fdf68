"""Persistent relational store: four entity tables, three link tables.

The on-disk form is a directory of TSV files plus a JSON manifest rather
than a binary database, so a corpus stays portable, diffable and
inspectable.  Ids are assigned sequentially from 1 per table and are
stable forever: the store is append-only, corrections are new versions of
the directory.

Single-writer, multiple-reader: one process mutates, saves replace the
directory wholesale so readers always see a consistent snapshot.
"""

from __future__ import annotations

import copy
import json
import os
import shutil
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType

from . import markup as markup_mod
from .errors import (
    DuplicateFlagKey,
    DuplicateLink,
    InvariantViolation,
    StoreIOError,
    UnknownEndpoint,
    UnknownFlagKey,
    UnknownId,
    UnknownParent,
)
from .model import (
    DEFAULT_FLAG_VOCABULARY,
    ChapterRecord,
    IsnadChain,
    LinkKind,
    LinkRow,
    ThematicFlags,
    TraditionRecord,
    TransmitterRecord,
    TransmitterRef,
    TriMatchMode,
    TriState,
    WorkRecord,
    tri_matches,
)

FORMAT_VERSION = 1

_TABLE_FILES = {
    "transmitters": "transmitters.tsv",
    "works": "works.tsv",
    "chapters": "chapters.tsv",
    "traditions": "traditions.tsv",
}
_LINK_FILES = {
    LinkKind.INDIV_TRAD: "link_indiv_trad.tsv",
    LinkKind.RECUEIL_TRAD: "link_recueil_trad.tsv",
    LinkKind.INDIV_RECUEIL: "link_indiv_recueil.tsv",
}
_LINK_HEADERS = {
    LinkKind.INDIV_TRAD: ("link_id", "indiv_id", "trad_id"),
    LinkKind.RECUEIL_TRAD: ("link_id", "recueil_id", "trad_id"),
    LinkKind.INDIV_RECUEIL: ("link_id", "indiv_id", "recueil_id"),
}


# ---------------------------------------------------------------------------
# Field escaping (TSV is unquoted; tabs/newlines/backslashes are escaped)
# ---------------------------------------------------------------------------

def _esc(text: str, extra: str = "") -> str:
    out = text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")
    for ch in extra:
        out = out.replace(ch, "\\" + ch)
    return out


def _unesc(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append("\t" if nxt == "t" else "\n" if nxt == "n" else nxt)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _split_escaped(text: str, sep: str) -> list[str]:
    parts: list[str] = []
    cur: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            cur.append(text[i:i + 2])
            i += 2
        elif ch == sep:
            parts.append("".join(cur))
            cur = []
            i += 1
        else:
            cur.append(ch)
            i += 1
    parts.append("".join(cur))
    return parts


def _opt_int(text: str) -> int | None:
    return int(text) if text else None


def _fmt_opt(value: int | None) -> str:
    return "" if value is None else str(value)


def _serialize_chain(chain: IsnadChain) -> str:
    return ",".join(
        f"{ref.transmitter_id}:{_esc(ref.surface_form, extra=',:')}" for ref in chain
    )


def _parse_chain(text: str) -> IsnadChain:
    if not text:
        return IsnadChain()
    refs = []
    for part in _split_escaped(text, ","):
        pieces = _split_escaped(part, ":")
        if len(pieces) != 2:
            raise StoreIOError(f"malformed chain entry: {part!r}")
        refs.append(TransmitterRef(int(pieces[0]), _unesc(pieces[1])))
    return IsnadChain(tuple(refs))


def _serialize_flags(flags: ThematicFlags, vocabulary: tuple[str, ...]) -> str:
    return ";".join(f"{key}={flags.value(key).value}" for key in vocabulary)


def _parse_flags(text: str) -> ThematicFlags:
    if not text:
        return ThematicFlags()
    values = {}
    for part in text.split(";"):
        key, _, raw = part.partition("=")
        if not key or not raw:
            raise StoreIOError(f"malformed flag entry: {part!r}")
        values[key] = TriState.from_text(raw)
    return ThematicFlags(values)


# ---------------------------------------------------------------------------
# Import report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ImportReport:
    """Counts from one bulk import, plus chains left for human review."""

    works: int = 0
    chapters: int = 0
    traditions: int = 0
    indiv_trad_links: int = 0
    recueil_trad_links: int = 0
    ambiguities: int = 0
    review: tuple[tuple[int, markup_mod.AmbiguityReport], ...] = ()


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------

class Store:
    """In-memory relational state with a TSV directory behind it.

    Mutating methods persist immediately when `autosave` is on (the
    default for stores bound to a path); bulk operations suspend it and
    save once.  Constructing directly is reserved for ephemeral stores,
    use create()/open() for persistent ones.
    """

    def __init__(self, path: Path | None, flag_vocabulary: tuple[str, ...] = DEFAULT_FLAG_VOCABULARY):
        seen = set()
        for key in flag_vocabulary:
            if key in seen:
                raise DuplicateFlagKey(f"flag key declared twice: {key!r}")
            seen.add(key)
            if not markup_mod._IDENT_RE.match(key):
                raise InvariantViolation("flag_vocabulary", f"bad key {key!r}")
        self.path = Path(path) if path is not None else None
        self.flag_vocabulary = tuple(flag_vocabulary)
        self.autosave = path is not None
        self._state: dict = {
            "transmitters": {},
            "works": {},
            "chapters": {},
            "traditions": {},
            "links": {kind: [] for kind in LinkKind},
            "link_pairs": {kind: set() for kind in LinkKind},
            "chapters_by_work": {},
            "traditions_by_chapter": {},
        }

    # -- construction ------------------------------------------------------

    @classmethod
    def create(cls, path: str | Path, flag_vocabulary: tuple[str, ...] = DEFAULT_FLAG_VOCABULARY) -> "Store":
        """Create and persist an empty store at a fresh directory."""
        path = Path(path)
        if path.exists() and any(path.iterdir()):
            raise StoreIOError(f"refusing to create store in non-empty {path}")
        store = cls(path, flag_vocabulary)
        store.save()
        return store

    @classmethod
    def ephemeral(cls, flag_vocabulary: tuple[str, ...] = DEFAULT_FLAG_VOCABULARY) -> "Store":
        """An in-memory store with no backing directory (tests, oracles)."""
        return cls(None, flag_vocabulary)

    @classmethod
    def open(cls, path: str | Path) -> "Store":
        path = Path(path)
        manifest_path = path / "manifest.json"
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise StoreIOError(f"cannot open store at {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise StoreIOError(f"corrupt manifest in {path}: {exc}") from exc
        if manifest.get("format_version") != FORMAT_VERSION:
            raise StoreIOError(
                f"unsupported format_version {manifest.get('format_version')!r}"
            )
        store = cls(path, tuple(manifest.get("flag_vocabulary", ())))
        try:
            store._load_tables()
        except OSError as exc:
            raise StoreIOError(f"cannot read store tables: {exc}") from exc
        store._check_integrity(manifest)
        return store

    # -- accessors ----------------------------------------------------------

    @property
    def transmitters(self):
        return MappingProxyType(self._state["transmitters"])

    @property
    def works(self):
        return MappingProxyType(self._state["works"])

    @property
    def chapters(self):
        return MappingProxyType(self._state["chapters"])

    @property
    def traditions(self):
        return MappingProxyType(self._state["traditions"])

    def links(self, kind: LinkKind) -> tuple[LinkRow, ...]:
        return tuple(self._state["links"][kind])

    def has_link(self, kind: LinkKind, left_id: int, right_id: int) -> bool:
        return (left_id, right_id) in self._state["link_pairs"][kind]

    def get_transmitter(self, transmitter_id: int) -> TransmitterRecord:
        try:
            return self._state["transmitters"][transmitter_id]
        except KeyError:
            raise UnknownId(f"no transmitter {transmitter_id}") from None

    def get_work(self, work_id: int) -> WorkRecord:
        try:
            return self._state["works"][work_id]
        except KeyError:
            raise UnknownId(f"no work {work_id}") from None

    def get_chapter(self, chapter_id: int) -> ChapterRecord:
        try:
            return self._state["chapters"][chapter_id]
        except KeyError:
            raise UnknownId(f"no chapter {chapter_id}") from None

    def get_tradition(self, tradition_id: int) -> TraditionRecord:
        try:
            return self._state["traditions"][tradition_id]
        except KeyError:
            raise UnknownId(f"no tradition {tradition_id}") from None

    def chapters_of_work(self, work_id: int) -> list[ChapterRecord]:
        self.get_work(work_id)
        ids = self._state["chapters_by_work"].get(work_id, [])
        return sorted(
            (self._state["chapters"][cid] for cid in ids), key=lambda c: c.ordinal
        )

    def traditions_of_chapter(self, chapter_id: int) -> list[TraditionRecord]:
        self.get_chapter(chapter_id)
        ids = self._state["traditions_by_chapter"].get(chapter_id, [])
        return sorted(
            (self._state["traditions"][tid] for tid in ids),
            key=lambda t: t.ordinal_in_chapter,
        )

    def traditions_of_work(self, work_id: int) -> list[TraditionRecord]:
        out = []
        for chapter in self.chapters_of_work(work_id):
            out.extend(self.traditions_of_chapter(chapter.id))
        return out

    # -- inserts -------------------------------------------------------------

    def _next_id(self, table: str) -> int:
        return len(self._state[table]) + 1

    def insert_transmitter(
        self,
        canonical_name: str,
        alt_names: tuple[str, ...] = (),
        death_date_hijri: int | None = None,
        notes: str = "",
    ) -> int:
        record = TransmitterRecord(
            id=self._next_id("transmitters"),
            canonical_name=canonical_name,
            alt_names=tuple(alt_names),
            death_date_hijri=death_date_hijri,
            notes=notes,
        )
        self._state["transmitters"][record.id] = record
        self._maybe_save()
        return record.id

    def insert_work(
        self,
        title: str,
        traditionist: str = "",
        death_date_hijri: int | None = None,
        edition_label: str = "",
    ) -> int:
        record = WorkRecord(
            id=self._next_id("works"),
            title=title,
            traditionist=traditionist,
            death_date_hijri=death_date_hijri,
            edition_label=edition_label,
        )
        self._state["works"][record.id] = record
        self._state["chapters_by_work"][record.id] = []
        self._maybe_save()
        return record.id

    def insert_chapter(self, work_id: int, ordinal: int, heading: str = "") -> int:
        if work_id not in self._state["works"]:
            raise UnknownParent(f"no work {work_id}")
        expected = len(self._state["chapters_by_work"][work_id]) + 1
        if ordinal != expected:
            raise InvariantViolation(
                "ordinal", f"chapter ordinals are contiguous; expected {expected}"
            )
        record = ChapterRecord(
            id=self._next_id("chapters"), work_id=work_id, ordinal=ordinal, heading=heading
        )
        self._state["chapters"][record.id] = record
        self._state["chapters_by_work"][work_id].append(record.id)
        self._state["traditions_by_chapter"][record.id] = []
        self._maybe_save()
        return record.id

    def insert_tradition(
        self,
        chapter_id: int,
        ordinal_in_chapter: int,
        isnad: IsnadChain = IsnadChain(),
        matn_summary: str = "",
        flags: ThematicFlags | None = None,
    ) -> int:
        if chapter_id not in self._state["chapters"]:
            raise UnknownParent(f"no chapter {chapter_id}")
        for ref in isnad:
            if ref.transmitter_id not in self._state["transmitters"]:
                raise UnknownParent(f"chain names unknown transmitter {ref.transmitter_id}")
        siblings = self._state["traditions_by_chapter"][chapter_id]
        if any(
            self._state["traditions"][tid].ordinal_in_chapter == ordinal_in_chapter
            for tid in siblings
        ):
            raise InvariantViolation(
                "ordinal_in_chapter", f"{ordinal_in_chapter} already used in chapter"
            )
        materialized = (flags or ThematicFlags()).materialize(self.flag_vocabulary)
        record = TraditionRecord(
            id=self._next_id("traditions"),
            chapter_id=chapter_id,
            ordinal_in_chapter=ordinal_in_chapter,
            isnad=isnad,
            matn_summary=matn_summary,
            flags=materialized,
        )
        self._state["traditions"][record.id] = record
        siblings.append(record.id)
        self._maybe_save()
        return record.id

    def link(self, kind: LinkKind, left_id: int, right_id: int) -> int:
        left_table, right_table = {
            LinkKind.INDIV_TRAD: ("transmitters", "traditions"),
            LinkKind.RECUEIL_TRAD: ("works", "traditions"),
            LinkKind.INDIV_RECUEIL: ("transmitters", "works"),
        }[kind]
        if left_id not in self._state[left_table]:
            raise UnknownEndpoint(f"{kind.value}: no {left_table[:-1]} {left_id}")
        if right_id not in self._state[right_table]:
            raise UnknownEndpoint(f"{kind.value}: no {right_table[:-1]} {right_id}")
        if (left_id, right_id) in self._state["link_pairs"][kind]:
            raise DuplicateLink(f"{kind.value}: ({left_id}, {right_id}) already linked")
        row = LinkRow(
            link_id=len(self._state["links"][kind]) + 1,
            left_id=left_id,
            right_id=right_id,
            kind=kind,
        )
        self._state["links"][kind].append(row)
        self._state["link_pairs"][kind].add((left_id, right_id))
        self._maybe_save()
        return row.link_id

    # -- lexicon registration -------------------------------------------------

    def register_lexicon(self, lexicon: markup_mod.Lexicon) -> int:
        """Insert transmitter records for a lexicon's name entries.

        Lexicon ids must be dense (1..n); ids already present are left
        untouched, new ones get the first surface form as canonical name
        and the rest as alternates.  Returns the number inserted.
        """
        entries = {tid: surfaces for tid, surfaces in lexicon.name_entries}
        existing = len(self._state["transmitters"])
        inserted = 0
        prior_autosave = self.autosave
        self.autosave = False
        try:
            for tid in sorted(entries):
                if tid <= existing:
                    continue
                if tid != len(self._state["transmitters"]) + 1:
                    raise InvariantViolation(
                        "transmitter_id",
                        f"lexicon ids must be dense from 1; gap before {tid}",
                    )
                surfaces = entries[tid]
                self.insert_transmitter(
                    canonical_name=surfaces[0], alt_names=tuple(surfaces[1:])
                )
                inserted += 1
        finally:
            self.autosave = prior_autosave
        if inserted:
            self._maybe_save()
        return inserted

    # -- bulk import -----------------------------------------------------------

    def import_document(
        self, doc: markup_mod.MarkupDocument, lexicon: markup_mod.Lexicon
    ) -> ImportReport:
        """Insert a parsed document's works, chapters, traditions and links.

        Document order is preserved; every chain position becomes an
        INDIV_TRAD link (one per distinct transmitter) and every tradition
        a RECUEIL_TRAD link.  Chains whose extraction is ambiguous import
        as empty chains and are listed for review instead of failing the
        document.  Any insert error aborts atomically: the store is left
        exactly as before.
        """
        snapshot = copy.deepcopy(self._state)
        prior_autosave = self.autosave
        self.autosave = False
        counts = {"works": 0, "chapters": 0, "traditions": 0, "it": 0, "rt": 0}
        review: list[tuple[int, markup_mod.AmbiguityReport]] = []
        try:
            for work in doc.works:
                wid = self.insert_work(
                    title=work.title,
                    traditionist=work.traditionist,
                    death_date_hijri=work.death_date_hijri,
                    edition_label=work.edition_label,
                )
                counts["works"] += 1
                for chapter in work.chapters:
                    cid = self.insert_chapter(
                        work_id=wid, ordinal=chapter.ordinal, heading=chapter.heading
                    )
                    counts["chapters"] += 1
                    for block in chapter.blocks:
                        result, matn = markup_mod.extract_isnad_and_matn(block, lexicon)
                        if isinstance(result, markup_mod.AmbiguityReport):
                            chain: IsnadChain = IsnadChain()
                        else:
                            chain = result
                        flags = ThematicFlags(
                            {key: state for key, state in block.flag_directives}
                        )
                        tid = self.insert_tradition(
                            chapter_id=cid,
                            ordinal_in_chapter=block.ordinal,
                            isnad=chain,
                            matn_summary=matn,
                            flags=flags,
                        )
                        counts["traditions"] += 1
                        if isinstance(result, markup_mod.AmbiguityReport):
                            review.append((tid, result))
                        seen: set[int] = set()
                        for ref in chain:
                            if ref.transmitter_id in seen:
                                continue
                            seen.add(ref.transmitter_id)
                            self.link(LinkKind.INDIV_TRAD, ref.transmitter_id, tid)
                            counts["it"] += 1
                        self.link(LinkKind.RECUEIL_TRAD, wid, tid)
                        counts["rt"] += 1
        except Exception:
            self._state = snapshot
            self.autosave = prior_autosave
            raise
        self.autosave = prior_autosave
        self._maybe_save()
        return ImportReport(
            works=counts["works"],
            chapters=counts["chapters"],
            traditions=counts["traditions"],
            indiv_trad_links=counts["it"],
            recueil_trad_links=counts["rt"],
            ambiguities=len(review),
            review=tuple(review),
        )

    # -- queries ---------------------------------------------------------------

    def query_traditions(
        self,
        work_id: int | None = None,
        chapter_id: int | None = None,
        flags: tuple[tuple[str, TriMatchMode], ...] = (),
        transmitter_id: int | None = None,
    ) -> list[TraditionRecord]:
        """Traditions satisfying the conjunction of all given predicates.

        The transmitter predicate means an INDIV_TRAD link exists.  Results
        come back in (work, chapter ordinal, tradition ordinal) order.
        """
        if work_id is not None:
            self.get_work(work_id)
        if chapter_id is not None:
            self.get_chapter(chapter_id)
        if transmitter_id is not None:
            self.get_transmitter(transmitter_id)
        for key, _ in flags:
            if key not in self.flag_vocabulary:
                raise UnknownFlagKey(f"flag key {key!r} not in vocabulary")
        pairs = self._state["link_pairs"][LinkKind.INDIV_TRAD]
        out = []
        for trad in self._state["traditions"].values():
            chapter = self._state["chapters"][trad.chapter_id]
            if chapter_id is not None and trad.chapter_id != chapter_id:
                continue
            if work_id is not None and chapter.work_id != work_id:
                continue
            if transmitter_id is not None and (transmitter_id, trad.id) not in pairs:
                continue
            if all(tri_matches(trad.flags.value(key), mode) for key, mode in flags):
                out.append(trad)
        out.sort(
            key=lambda t: (
                self._state["chapters"][t.chapter_id].work_id,
                self._state["chapters"][t.chapter_id].ordinal,
                t.ordinal_in_chapter,
            )
        )
        return out

    # -- persistence -------------------------------------------------------------

    def _maybe_save(self):
        if self.autosave and self.path is not None:
            self.save()

    def _counters(self) -> dict:
        return {
            "transmitters": len(self._state["transmitters"]) + 1,
            "works": len(self._state["works"]) + 1,
            "chapters": len(self._state["chapters"]) + 1,
            "traditions": len(self._state["traditions"]) + 1,
            "link_indiv_trad": len(self._state["links"][LinkKind.INDIV_TRAD]) + 1,
            "link_recueil_trad": len(self._state["links"][LinkKind.RECUEIL_TRAD]) + 1,
            "link_indiv_recueil": len(self._state["links"][LinkKind.INDIV_RECUEIL]) + 1,
        }

    def save(self) -> None:
        """Persist by writing a fresh directory and swapping it into place."""
        if self.path is None:
            raise StoreIOError("ephemeral store has no backing path")
        tmp = self.path.with_name(self.path.name + f".tmp{os.getpid()}")
        trash = self.path.with_name(self.path.name + f".old{os.getpid()}")
        try:
            if tmp.exists():
                shutil.rmtree(tmp)
            tmp.mkdir(parents=True)
            self._write_tables(tmp)
            if self.path.exists():
                os.rename(self.path, trash)
                os.rename(tmp, self.path)
                shutil.rmtree(trash)
            else:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                os.rename(tmp, self.path)
        except OSError as exc:
            raise StoreIOError(f"cannot save store at {self.path}: {exc}") from exc

    def export_tables(self, path: str | Path) -> None:
        """Write the seven tables plus manifest into the given directory."""
        path = Path(path)
        try:
            path.mkdir(parents=True, exist_ok=True)
            self._write_tables(path)
        except OSError as exc:
            raise StoreIOError(f"cannot export tables to {path}: {exc}") from exc

    def _write_tables(self, target: Path) -> None:
        manifest = {
            "format_version": FORMAT_VERSION,
            "flag_vocabulary": list(self.flag_vocabulary),
            "counters": self._counters(),
        }
        (target / "manifest.json").write_text(
            json.dumps(manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )

        def write_tsv(name: str, header: tuple[str, ...], rows):
            lines = ["\t".join(header)]
            lines.extend("\t".join(row) for row in rows)
            (target / name).write_text("\n".join(lines) + "\n", encoding="utf-8")

        write_tsv(
            "transmitters.tsv",
            ("id", "canonical_name", "alt_names", "death_date_hijri", "notes"),
            (
                (
                    str(t.id),
                    _esc(t.canonical_name),
                    "|".join(_esc(n, extra="|") for n in t.alt_names),
                    _fmt_opt(t.death_date_hijri),
                    _esc(t.notes),
                )
                for t in self._state["transmitters"].values()
            ),
        )
        write_tsv(
            "works.tsv",
            ("id", "title", "traditionist", "death_date_hijri", "edition_label"),
            (
                (
                    str(w.id),
                    _esc(w.title),
                    _esc(w.traditionist),
                    _fmt_opt(w.death_date_hijri),
                    _esc(w.edition_label),
                )
                for w in self._state["works"].values()
            ),
        )
        write_tsv(
            "chapters.tsv",
            ("id", "work_id", "ordinal", "heading"),
            (
                (str(c.id), str(c.work_id), str(c.ordinal), _esc(c.heading))
                for c in self._state["chapters"].values()
            ),
        )
        write_tsv(
            "traditions.tsv",
            ("id", "chapter_id", "ordinal_in_chapter", "isnad", "matn_summary", "flags"),
            (
                (
                    str(t.id),
                    str(t.chapter_id),
                    str(t.ordinal_in_chapter),
                    _serialize_chain(t.isnad),
                    _esc(t.matn_summary),
                    _serialize_flags(t.flags, self.flag_vocabulary),
                )
                for t in self._state["traditions"].values()
            ),
        )
        for kind, filename in _LINK_FILES.items():
            write_tsv(
                filename,
                _LINK_HEADERS[kind],
                (
                    (str(row.link_id), str(row.left_id), str(row.right_id))
                    for row in self._state["links"][kind]
                ),
            )

    def _read_tsv(self, name: str, width: int) -> list[list[str]]:
        text = (self.path / name).read_text(encoding="utf-8")
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        rows = []
        for idx, line in enumerate(lines[1:], start=2):
            cols = line.split("\t")
            if len(cols) != width:
                raise StoreIOError(f"{name}:{idx}: expected {width} columns")
            rows.append(cols)
        return rows

    def _load_tables(self) -> None:
        for cols in self._read_tsv("transmitters.tsv", 5):
            record = TransmitterRecord(
                id=int(cols[0]),
                canonical_name=_unesc(cols[1]),
                alt_names=tuple(_unesc(p) for p in _split_escaped(cols[2], "|") if p),
                death_date_hijri=_opt_int(cols[3]),
                notes=_unesc(cols[4]),
            )
            self._state["transmitters"][record.id] = record
        for cols in self._read_tsv("works.tsv", 5):
            record = WorkRecord(
                id=int(cols[0]),
                title=_unesc(cols[1]),
                traditionist=_unesc(cols[2]),
                death_date_hijri=_opt_int(cols[3]),
                edition_label=_unesc(cols[4]),
            )
            self._state["works"][record.id] = record
            self._state["chapters_by_work"][record.id] = []
        for cols in self._read_tsv("chapters.tsv", 4):
            record = ChapterRecord(
                id=int(cols[0]),
                work_id=int(cols[1]),
                ordinal=int(cols[2]),
                heading=_unesc(cols[3]),
            )
            self._state["chapters"][record.id] = record
            self._state["chapters_by_work"].setdefault(record.work_id, []).append(record.id)
            self._state["traditions_by_chapter"][record.id] = []
        for cols in self._read_tsv("traditions.tsv", 6):
            record = TraditionRecord(
                id=int(cols[0]),
                chapter_id=int(cols[1]),
                ordinal_in_chapter=int(cols[2]),
                isnad=_parse_chain(cols[3]),
                matn_summary=_unesc(cols[4]),
                flags=_parse_flags(cols[5]),
            )
            self._state["traditions"][record.id] = record
            self._state["traditions_by_chapter"].setdefault(record.chapter_id, []).append(
                record.id
            )
        for kind, filename in _LINK_FILES.items():
            for cols in self._read_tsv(filename, 3):
                row = LinkRow(
                    link_id=int(cols[0]),
                    left_id=int(cols[1]),
                    right_id=int(cols[2]),
                    kind=kind,
                )
                self._state["links"][kind].append(row)
                self._state["link_pairs"][kind].add((row.left_id, row.right_id))

    def _check_integrity(self, manifest: dict) -> None:
        state = self._state
        for table in ("transmitters", "works", "chapters", "traditions"):
            ids = list(state[table])
            if ids != list(range(1, len(ids) + 1)):
                raise StoreIOError(f"{table}: ids must run 1..n in order")
        for chapter in state["chapters"].values():
            if chapter.work_id not in state["works"]:
                raise StoreIOError(f"chapter {chapter.id}: unknown work {chapter.work_id}")
        for trad in state["traditions"].values():
            if trad.chapter_id not in state["chapters"]:
                raise StoreIOError(f"tradition {trad.id}: unknown chapter {trad.chapter_id}")
            for ref in trad.isnad:
                if ref.transmitter_id not in state["transmitters"]:
                    raise StoreIOError(
                        f"tradition {trad.id}: unknown transmitter {ref.transmitter_id}"
                    )
            extra = set(trad.flags) - set(self.flag_vocabulary)
            if extra:
                raise StoreIOError(f"tradition {trad.id}: undeclared flags {sorted(extra)}")
        endpoint_tables = {
            LinkKind.INDIV_TRAD: ("transmitters", "traditions"),
            LinkKind.RECUEIL_TRAD: ("works", "traditions"),
            LinkKind.INDIV_RECUEIL: ("transmitters", "works"),
        }
        for kind, rows in state["links"].items():
            left_table, right_table = endpoint_tables[kind]
            for row in rows:
                if row.left_id not in state[left_table] or row.right_id not in state[right_table]:
                    raise StoreIOError(f"{kind.value} link {row.link_id}: dangling endpoint")
        if manifest.get("counters") != self._counters():
            raise StoreIOError("manifest counters disagree with table contents")

    # -- equality (used by round-trip tests) -----------------------------------

    def same_contents(self, other: "Store") -> bool:
        return (
            self.flag_vocabulary == other.flag_vocabulary
            and self._state["transmitters"] == other._state["transmitters"]
            and self._state["works"] == other._state["works"]
            and self._state["chapters"] == other._state["chapters"]
            and self._state["traditions"] == other._state["traditions"]
            and all(
                self._state["links"][kind] == other._state["links"][kind]
                for kind in LinkKind
            )
        )
