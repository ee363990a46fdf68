"""Corpus markup: the .rwy file format, lexicon tagging, chain extraction.

The format is line-oriented so that OCR'd or transliterated text stays
hand-editable:

    #WORK id=1 title="Kitab al-magazi" traditionist="al-Waqidi" died=207 edition="ed-1"
    ##CHAPTER id=1 ordinal=1 heading="Badr"
    ###TRAD id=1 ordinal=1
    @ISNAD{ al-Waqidi <- @NAME[2]{Abu Bakr b. Ismail} }
    @MATN{
    narrative text, any number of lines
    }
    %FLAG militaire=yes
    ; comment lines start with a semicolon

Span offsets are byte offsets into the UTF-8 encoding of a block's
raw_text, so annotations persist bit-exactly across tools.  Parsing,
tagging and extraction are pure functions: documents are never mutated,
every operation returns a new document.
"""

from __future__ import annotations

import re
from bisect import bisect_left
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .errors import (
    DanglingReference,
    DuplicateOrdinal,
    InvariantViolation,
    MarkupSyntaxError,
    NoLexicon,
)
from .model import IsnadChain, TransmitterRef, TriState

# ---------------------------------------------------------------------------
# Lexicon
# ---------------------------------------------------------------------------

# Reserved id for transmission-term rows in .lex files.
TERM_ID = 0


@dataclass(frozen=True)
class Lexicon:
    """Surface forms for transmitters plus the transmission-term vocabulary.

    The same surface form may map to several transmitter ids; that is the
    same-name ambiguity case and is data, never an error here.
    """

    name_entries: tuple[tuple[int, tuple[str, ...]], ...] = ()
    transmission_terms: tuple[str, ...] = ()

    def __post_init__(self):
        for tid, surfaces in self.name_entries:
            if tid < 1:
                raise InvariantViolation("transmitter_id", "ids start at 1")
            if not surfaces or any(not s for s in surfaces):
                raise InvariantViolation("surface_form", "must be non-empty")
        if any(not t for t in self.transmission_terms):
            raise InvariantViolation("transmission_terms", "must be non-empty")

    def name_ids(self) -> frozenset[int]:
        return frozenset(tid for tid, _ in self.name_entries)

    def surface_map(self) -> dict[str, tuple[int, ...]]:
        """Map each surface form to the sorted ids it may denote."""
        table: dict[str, set[int]] = {}
        for tid, surfaces in self.name_entries:
            for s in surfaces:
                table.setdefault(s, set()).add(tid)
        return {s: tuple(sorted(ids)) for s, ids in table.items()}

    def is_empty(self) -> bool:
        return not self.name_entries and not self.transmission_terms


def load_lexicon(path: str | Path) -> Lexicon:
    """Read a .lex TSV: transmitter_id <TAB> surface_form, terms under id 0."""
    entries: dict[int, list[str]] = {}
    terms: list[str] = []
    order: list[int] = []
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise MarkupSyntaxError(line_no, "lexicon rows are transmitter_id<TAB>surface")
        raw_id, surface = parts
        try:
            tid = int(raw_id)
        except ValueError:
            raise MarkupSyntaxError(line_no, f"bad transmitter id {raw_id!r}") from None
        if tid < 0:
            raise MarkupSyntaxError(line_no, "transmitter id must be >= 0")
        if not surface:
            raise MarkupSyntaxError(line_no, "empty surface form")
        if tid == TERM_ID:
            terms.append(surface)
        else:
            if tid not in entries:
                order.append(tid)
            entries.setdefault(tid, []).append(surface)
    return Lexicon(
        name_entries=tuple((tid, tuple(entries[tid])) for tid in order),
        transmission_terms=tuple(terms),
    )


def save_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    lines = [f"{TERM_ID}\t{t}" for t in lexicon.transmission_terms]
    for tid, surfaces in lexicon.name_entries:
        lines.extend(f"{tid}\t{s}" for s in surfaces)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Spans and document structure
# ---------------------------------------------------------------------------

class SpanKind(Enum):
    NAME = "name"
    TRANSMISSION_TERM = "term"
    ISNAD_SEGMENT = "isnad"
    MATN_SEGMENT = "matn"
    CUSTOM_TAG = "custom"


@dataclass(frozen=True)
class Span:
    """Tagged byte range within a block's raw_text.

    NAME spans carry either one resolved transmitter_id or, for same-name
    ambiguity, the full sorted candidate list.  Spans created from explicit
    @NAME[id]{...} annotations are marked explicit and survive
    serialization; machine-tagged spans are recomputable and do not.
    """

    start: int
    end: int
    kind: SpanKind
    transmitter_id: int | None = None
    candidates: tuple[int, ...] = ()
    label: str | None = None
    explicit: bool = False

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise InvariantViolation("span", f"bad range {self.start}..{self.end}")
        if self.kind is SpanKind.NAME:
            resolved = self.transmitter_id is not None
            ambiguous = len(self.candidates) >= 2
            if resolved == ambiguous:
                raise InvariantViolation(
                    "span", "NAME span needs a transmitter_id or >=2 candidates"
                )
            if tuple(sorted(set(self.candidates))) != self.candidates:
                raise InvariantViolation("span", "candidates must be sorted and unique")

    def is_ambiguous(self) -> bool:
        return bool(self.candidates)


@dataclass(frozen=True)
class TraditionBlock:
    """One tradition as marked up: raw text, segments, flags, spans."""

    id: int
    ordinal: int
    raw_text: str = ""
    isnad_segment: tuple[int, int] | None = None
    matn_segment: tuple[int, int] | None = None
    flag_directives: tuple[tuple[str, TriState], ...] = ()
    spans: tuple[Span, ...] = ()

    def __post_init__(self):
        if self.id < 1 or self.ordinal < 1:
            raise InvariantViolation("id", "ids and ordinals start at 1")
        size = len(self.raw_text.encode("utf-8"))
        for seg in (self.isnad_segment, self.matn_segment):
            if seg is not None and not (0 <= seg[0] <= seg[1] <= size):
                raise InvariantViolation("segment", f"out of bounds: {seg}")
        if self.isnad_segment and self.matn_segment:
            a, b = self.isnad_segment, self.matn_segment
            if a[0] < b[1] and b[0] < a[1]:
                raise InvariantViolation("segment", "isnad and matn segments overlap")
        object.__setattr__(
            self, "spans", tuple(sorted(self.spans, key=lambda s: (s.start, s.end)))
        )
        by_kind: dict[SpanKind, int] = {}
        for span in self.spans:
            if span.end > size:
                raise InvariantViolation("span", "span exceeds raw_text")
            prev_end = by_kind.get(span.kind, 0)
            if span.start < prev_end:
                raise InvariantViolation("span", f"overlapping {span.kind.value} spans")
            by_kind[span.kind] = span.end

    def _slice(self, seg: tuple[int, int]) -> str:
        return self.raw_text.encode("utf-8")[seg[0]:seg[1]].decode("utf-8")

    def isnad_text(self) -> str | None:
        return self._slice(self.isnad_segment) if self.isnad_segment is not None else None

    def matn_text(self) -> str | None:
        return self._slice(self.matn_segment) if self.matn_segment is not None else None

    def name_spans(self) -> tuple[Span, ...]:
        return tuple(s for s in self.spans if s.kind is SpanKind.NAME)


def make_block(
    block_id: int,
    ordinal: int,
    isnad: str | None = None,
    matn: str | None = None,
    flags: tuple[tuple[str, TriState], ...] = (),
    explicit_names: tuple[tuple[int, int, int], ...] = (),
) -> TraditionBlock:
    """Build a block from its isnad and matn texts.

    explicit_names are (char_start, char_end, transmitter_id) triples
    relative to the isnad text; they become explicit @NAME spans.  The
    block's raw_text is the isnad text, a newline, then the matn text
    (whichever are present), with segments set accordingly.
    """
    if isnad is not None and matn is not None:
        raw = isnad + "\n" + matn
        ilen = len(isnad.encode("utf-8"))
        iseg: tuple[int, int] | None = (0, ilen)
        mseg: tuple[int, int] | None = (ilen + 1, len(raw.encode("utf-8")))
    elif isnad is not None:
        raw, iseg, mseg = isnad, (0, len(isnad.encode("utf-8"))), None
    elif matn is not None:
        raw, iseg, mseg = matn, None, (0, len(matn.encode("utf-8")))
    else:
        raw, iseg, mseg = "", None, None
    bmap = _ByteMap(raw)
    spans = tuple(
        Span(
            start=bmap.to_byte(cs),
            end=bmap.to_byte(ce),
            kind=SpanKind.NAME,
            transmitter_id=tid,
            explicit=True,
        )
        for cs, ce, tid in explicit_names
    )
    return TraditionBlock(
        id=block_id,
        ordinal=ordinal,
        raw_text=raw,
        isnad_segment=iseg,
        matn_segment=mseg,
        flag_directives=tuple(flags),
        spans=spans,
    )


def _check_unique_ordinals(items, what: str):
    seen = set()
    for item in items:
        if item.ordinal in seen:
            raise DuplicateOrdinal(0, f"duplicate {what} ordinal {item.ordinal}")
        seen.add(item.ordinal)


@dataclass(frozen=True)
class MarkupChapter:
    id: int
    ordinal: int
    heading: str = ""
    blocks: tuple[TraditionBlock, ...] = ()

    def __post_init__(self):
        if self.id < 1 or self.ordinal < 1:
            raise InvariantViolation("id", "ids and ordinals start at 1")
        object.__setattr__(
            self, "blocks", tuple(sorted(self.blocks, key=lambda b: b.ordinal))
        )
        _check_unique_ordinals(self.blocks, "tradition")


@dataclass(frozen=True)
class MarkupWork:
    id: int
    title: str
    traditionist: str = ""
    death_date_hijri: int | None = None
    edition_label: str = ""
    chapters: tuple[MarkupChapter, ...] = ()

    def __post_init__(self):
        if self.id < 1:
            raise InvariantViolation("id", "ids start at 1")
        if not self.title:
            raise InvariantViolation("title", "must be non-empty")
        object.__setattr__(
            self, "chapters", tuple(sorted(self.chapters, key=lambda c: c.ordinal))
        )
        _check_unique_ordinals(self.chapters, "chapter")


@dataclass(frozen=True)
class MarkupDocument:
    """Parsed corpus file: works, their chapters, their tradition blocks."""

    works: tuple[MarkupWork, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "works", tuple(sorted(self.works, key=lambda w: w.id)))
        for kind, ids in (
            ("work", [w.id for w in self.works]),
            ("chapter", [c.id for w in self.works for c in w.chapters]),
            ("tradition", [b.id for w in self.works for c in w.chapters for b in c.blocks]),
        ):
            if len(ids) != len(set(ids)):
                raise MarkupSyntaxError(0, f"duplicate {kind} id")

    def blocks(self):
        """Yield (work, chapter, block) in document order."""
        for work in self.works:
            for chapter in work.chapters:
                for block in chapter.blocks:
                    yield work, chapter, block


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_ATTR_KEY_RE = re.compile(r"[a-z_]+")
_INT_RE = re.compile(r"-?\d+")
_FLAG_RE = re.compile(r"%FLAG\s+([A-Za-z_][A-Za-z0-9_]*)=(yes|no|liminal)\s*$")
_NAME_ANNOT_RE = re.compile(r"@NAME\[(\d+)\]\{([^{}]*)\}")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def _parse_attrs(rest: str, line_no: int) -> dict:
    attrs: dict = {}
    i, n = 0, len(rest)
    while i < n:
        while i < n and rest[i] == " ":
            i += 1
        if i >= n:
            break
        m = _ATTR_KEY_RE.match(rest, i)
        if not m:
            raise MarkupSyntaxError(line_no, f"expected attribute at column {i + 1}")
        key = m.group(0)
        i = m.end()
        if i >= n or rest[i] != "=":
            raise MarkupSyntaxError(line_no, f"expected '=' after {key!r}")
        i += 1
        if key in attrs:
            raise MarkupSyntaxError(line_no, f"duplicate attribute {key!r}")
        if i < n and rest[i] == '"':
            i += 1
            out = []
            while i < n and rest[i] != '"':
                ch = rest[i]
                if ch == "\\":
                    if i + 1 >= n or rest[i + 1] not in '"\\':
                        raise MarkupSyntaxError(line_no, "bad escape in string")
                    out.append(rest[i + 1])
                    i += 2
                else:
                    out.append(ch)
                    i += 1
            if i >= n:
                raise MarkupSyntaxError(line_no, "unterminated string")
            i += 1
            attrs[key] = "".join(out)
        else:
            m = _INT_RE.match(rest, i)
            if m:
                attrs[key] = int(m.group(0))
                i = m.end()
            elif rest.startswith("none", i):
                attrs[key] = None
                i += 4
            else:
                raise MarkupSyntaxError(line_no, f"bad value for {key!r}")
    return attrs


def _require(attrs: dict, keys: tuple[str, ...], line_no: int, directive: str):
    for key in keys:
        if key not in attrs:
            raise MarkupSyntaxError(line_no, f"{directive} missing {key!r}")


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


class _BlockBuilder:
    def __init__(self, attrs: dict, line_no: int):
        self.id = attrs["id"]
        self.ordinal = attrs["ordinal"]
        self.line_no = line_no
        self.isnad_raw: str | None = None
        self.isnad_line = line_no
        self.matn: str | None = None
        self.flags: list[tuple[str, TriState]] = []
        self.flag_keys: set[str] = set()

    def finish(self, lexicon: Lexicon | None) -> TraditionBlock:
        isnad_text, explicit = (None, [])
        if self.isnad_raw is not None:
            isnad_text, explicit = _strip_annotations(self.isnad_raw, self.isnad_line, lexicon)
        return make_block(
            block_id=self.id,
            ordinal=self.ordinal,
            isnad=isnad_text,
            matn=self.matn,
            flags=tuple(self.flags),
            explicit_names=tuple(explicit),
        )


def _strip_annotations(content: str, line_no: int, lexicon: Lexicon | None):
    """Replace @NAME[id]{surface} annotations with their surfaces.

    Returns (plain text, [(char_start, char_end, transmitter_id), ...]).
    """
    out: list[str] = []
    explicit: list[tuple[int, int, int]] = []
    pos = 0
    length = 0
    for m in _NAME_ANNOT_RE.finditer(content):
        lead = content[pos:m.start()]
        out.append(lead)
        length += len(lead)
        tid = int(m.group(1))
        surface = m.group(2)
        if tid < 1:
            raise MarkupSyntaxError(line_no, "@NAME id must be >= 1")
        if not surface:
            raise MarkupSyntaxError(line_no, "@NAME surface must be non-empty")
        if lexicon is not None and tid not in lexicon.name_ids():
            raise DanglingReference(line_no, f"@NAME[{tid}] not in lexicon")
        explicit.append((length, length + len(surface), tid))
        out.append(surface)
        length += len(surface)
        pos = m.end()
    tail = content[pos:]
    if "@NAME" in tail or any("@NAME" in part for part in out[::2]):
        raise MarkupSyntaxError(line_no, "malformed @NAME annotation")
    out.append(tail)
    return "".join(out), explicit


def parse_markup(text: str, lexicon: Lexicon | None = None) -> MarkupDocument:
    """Parse .rwy text into a document.

    When a lexicon is bound, explicit @NAME[id] annotations must resolve
    against it (DanglingReference otherwise).  Comment and blank lines are
    discarded; everything else must be a well-formed directive.
    """
    works: list[dict] = []
    work: dict | None = None
    chapter: dict | None = None
    block: _BlockBuilder | None = None
    seen_work_ids: set[int] = set()
    seen_chapter_ids: set[int] = set()
    seen_trad_ids: set[int] = set()

    def close_block():
        nonlocal block
        if block is not None and chapter is not None:
            chapter["blocks"].append(block.finish(lexicon))
        block = None

    def close_chapter():
        nonlocal chapter
        close_block()
        if chapter is not None and work is not None:
            work["chapters"].append(chapter)
        chapter = None

    def close_work():
        nonlocal work
        close_chapter()
        if work is not None:
            works.append(work)
        work = None

    lines = text.split("\n")
    i = 0
    while i < len(lines):
        line_no = i + 1
        line = lines[i].rstrip("\r")
        i += 1
        if not line.strip() or line.startswith(";"):
            continue
        if line.startswith("###TRAD"):
            attrs = _parse_attrs(line[len("###TRAD"):], line_no)
            _require(attrs, ("id", "ordinal"), line_no, "###TRAD")
            if chapter is None:
                raise MarkupSyntaxError(line_no, "###TRAD outside a chapter")
            if attrs["id"] in seen_trad_ids:
                raise MarkupSyntaxError(line_no, f"duplicate tradition id {attrs['id']}")
            if attrs["ordinal"] in chapter["ordinals"]:
                raise DuplicateOrdinal(
                    line_no, f"duplicate tradition ordinal {attrs['ordinal']}"
                )
            close_block()
            seen_trad_ids.add(attrs["id"])
            chapter["ordinals"].add(attrs["ordinal"])
            block = _BlockBuilder(attrs, line_no)
        elif line.startswith("##CHAPTER"):
            attrs = _parse_attrs(line[len("##CHAPTER"):], line_no)
            _require(attrs, ("id", "ordinal"), line_no, "##CHAPTER")
            if work is None:
                raise MarkupSyntaxError(line_no, "##CHAPTER outside a work")
            if attrs["id"] in seen_chapter_ids:
                raise MarkupSyntaxError(line_no, f"duplicate chapter id {attrs['id']}")
            if attrs["ordinal"] in work["ordinals"]:
                raise DuplicateOrdinal(
                    line_no, f"duplicate chapter ordinal {attrs['ordinal']}"
                )
            close_chapter()
            seen_chapter_ids.add(attrs["id"])
            work["ordinals"].add(attrs["ordinal"])
            chapter = {
                "id": attrs["id"],
                "ordinal": attrs["ordinal"],
                "heading": attrs.get("heading", ""),
                "blocks": [],
                "ordinals": set(),
            }
        elif line.startswith("#WORK"):
            attrs = _parse_attrs(line[len("#WORK"):], line_no)
            _require(attrs, ("id", "title"), line_no, "#WORK")
            if attrs["id"] in seen_work_ids:
                raise MarkupSyntaxError(line_no, f"duplicate work id {attrs['id']}")
            close_work()
            seen_work_ids.add(attrs["id"])
            work = {
                "id": attrs["id"],
                "title": attrs["title"],
                "traditionist": attrs.get("traditionist", ""),
                "died": attrs.get("died"),
                "edition": attrs.get("edition", ""),
                "chapters": [],
                "ordinals": set(),
            }
        elif line.startswith("@ISNAD{"):
            if block is None:
                raise MarkupSyntaxError(line_no, "@ISNAD outside a tradition")
            if block.isnad_raw is not None:
                raise MarkupSyntaxError(line_no, "duplicate @ISNAD")
            end = line.rfind("}")
            if end < len("@ISNAD{"):
                raise MarkupSyntaxError(line_no, "unterminated @ISNAD")
            if line[end + 1:].strip():
                raise MarkupSyntaxError(line_no, "content after @ISNAD closing brace")
            block.isnad_raw = line[len("@ISNAD{"):end]
            block.isnad_line = line_no
        elif line == "@MATN{":
            if block is None:
                raise MarkupSyntaxError(line_no, "@MATN outside a tradition")
            if block.matn is not None:
                raise MarkupSyntaxError(line_no, "duplicate @MATN")
            body: list[str] = []
            while True:
                if i >= len(lines):
                    raise MarkupSyntaxError(line_no, "unterminated @MATN")
                raw = lines[i].rstrip("\r")
                i += 1
                if raw == "}":
                    break
                body.append(raw[1:] if raw.startswith("\\") else raw)
            block.matn = "\n".join(body)
        elif line.startswith("%FLAG"):
            if block is None:
                raise MarkupSyntaxError(line_no, "%FLAG outside a tradition")
            m = _FLAG_RE.match(line)
            if not m:
                raise MarkupSyntaxError(line_no, "expected %FLAG key=yes|no|liminal")
            key = m.group(1)
            if key in block.flag_keys:
                raise MarkupSyntaxError(line_no, f"duplicate flag {key!r}")
            block.flag_keys.add(key)
            block.flags.append((key, TriState(m.group(2))))
        else:
            raise MarkupSyntaxError(line_no, f"unexpected content: {line[:40]!r}")
    close_work()

    return MarkupDocument(
        works=tuple(
            MarkupWork(
                id=w["id"],
                title=w["title"],
                traditionist=w["traditionist"],
                death_date_hijri=w["died"],
                edition_label=w["edition"],
                chapters=tuple(
                    MarkupChapter(
                        id=c["id"],
                        ordinal=c["ordinal"],
                        heading=c["heading"],
                        blocks=tuple(c["blocks"]),
                    )
                    for c in w["chapters"]
                ),
            )
            for w in works
        )
    )


def parse_markup_file(path: str | Path, lexicon: Lexicon | None = None) -> MarkupDocument:
    return parse_markup(Path(path).read_text(encoding="utf-8"), lexicon)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _serialize_isnad(block: TraditionBlock) -> str:
    seg = block.isnad_segment
    assert seg is not None
    data = block.raw_text.encode("utf-8")
    pieces: list[str] = []
    pos = seg[0]
    for span in block.spans:
        if not span.explicit or span.kind is not SpanKind.NAME:
            continue
        if span.start < seg[0] or span.end > seg[1]:
            continue
        pieces.append(data[pos:span.start].decode("utf-8"))
        surface = data[span.start:span.end].decode("utf-8")
        pieces.append(f"@NAME[{span.transmitter_id}]{{{surface}}}")
        pos = span.end
    pieces.append(data[pos:seg[1]].decode("utf-8"))
    return "".join(pieces)


def serialize_markup(doc: MarkupDocument) -> str:
    """Render a document in canonical form.

    Canonical ordering is works by id, chapters and traditions by ordinal;
    only explicit @NAME annotations are persisted (machine tags are
    recomputable from a lexicon).  parse_markup inverts this exactly.
    """
    lines: list[str] = []
    for wi, work in enumerate(doc.works):
        if wi:
            lines.append("")
        died = "none" if work.death_date_hijri is None else str(work.death_date_hijri)
        lines.append(
            f"#WORK id={work.id} title={_quote(work.title)}"
            f" traditionist={_quote(work.traditionist)} died={died}"
            f" edition={_quote(work.edition_label)}"
        )
        for chapter in work.chapters:
            lines.append("")
            lines.append(
                f"##CHAPTER id={chapter.id} ordinal={chapter.ordinal}"
                f" heading={_quote(chapter.heading)}"
            )
            for block in chapter.blocks:
                lines.append(f"###TRAD id={block.id} ordinal={block.ordinal}")
                if block.isnad_segment is not None:
                    lines.append("@ISNAD{" + _serialize_isnad(block) + "}")
                matn = block.matn_text()
                if matn is not None:
                    lines.append("@MATN{")
                    for raw in matn.split("\n") if matn else []:
                        if raw.startswith(("}", "\\")):
                            raw = "\\" + raw
                        lines.append(raw)
                    lines.append("}")
                for key, state in block.flag_directives:
                    lines.append(f"%FLAG {key}={state.value}")
    return "\n".join(lines) + "\n" if lines else ""


def write_markup_file(doc: MarkupDocument, path: str | Path) -> None:
    Path(path).write_text(serialize_markup(doc), encoding="utf-8")


# ---------------------------------------------------------------------------
# Matching machinery
# ---------------------------------------------------------------------------

class _ByteMap:
    """Char index <-> UTF-8 byte offset conversion for one string."""

    def __init__(self, text: str):
        offs = [0]
        for ch in text:
            offs.append(offs[-1] + len(ch.encode("utf-8")))
        self.offs = offs

    def to_byte(self, char_index: int) -> int:
        return self.offs[char_index]

    def to_char(self, byte_offset: int) -> int:
        idx = bisect_left(self.offs, byte_offset)
        if idx >= len(self.offs) or self.offs[idx] != byte_offset:
            raise InvariantViolation("span", "offset not on a character boundary")
        return idx


def _boundary_ok(text: str, start: int, end: int) -> bool:
    # A match bordered by letters/digits on a lettered edge is inside a word.
    if start > 0 and text[start].isalnum() and text[start - 1].isalnum():
        return False
    if end < len(text) and text[end - 1].isalnum() and text[end].isalnum():
        return False
    return True


class _Matcher:
    """Longest-match, leftmost scanner over a lexicon's surface forms."""

    def __init__(self, lexicon: Lexicon):
        self.names = lexicon.surface_map()
        self.terms = frozenset(lexicon.transmission_terms)
        candidates: dict[str, list[str]] = {}
        for surface in set(self.names) | self.terms:
            candidates.setdefault(surface[0], []).append(surface)
        # Longest first; at equal length a name beats a term.
        self.by_first = {
            first: sorted(forms, key=lambda s: (-len(s), s not in self.names))
            for first, forms in candidates.items()
        }

    def longest_at(self, text: str, pos: int, limit: int):
        """Best (end, kind, ids) match starting exactly at pos, else None."""
        for surface in self.by_first.get(text[pos], ()):
            end = pos + len(surface)
            if end > limit:
                continue
            if not text.startswith(surface, pos):
                continue
            if not _boundary_ok(text, pos, end):
                continue
            ids = self.names.get(surface)
            if ids is not None:
                return end, SpanKind.NAME, ids
            return end, SpanKind.TRANSMISSION_TERM, ()
        return None


def _scan_range(text: str, lo: int, hi: int, matcher: _Matcher, blocked: list[tuple[int, int]]):
    """Non-overlapping longest matches in [lo, hi), skipping blocked ranges."""
    found = []
    bi = 0
    pos = lo
    while pos < hi:
        while bi < len(blocked) and blocked[bi][1] <= pos:
            bi += 1
        if bi < len(blocked) and blocked[bi][0] <= pos:
            pos = blocked[bi][1]
            continue
        limit = min(hi, blocked[bi][0]) if bi < len(blocked) else hi
        m = matcher.longest_at(text, pos, limit)
        if m:
            end, kind, ids = m
            found.append((pos, end, kind, ids))
            pos = end
        else:
            pos += 1
    return found


class TagScope(Enum):
    ISNAD_ONLY = "isnad"
    MATN_ONLY = "matn"
    ALL = "all"


def _char_ranges_for_scope(block: TraditionBlock, scope: TagScope, bmap: _ByteMap):
    if scope is TagScope.ALL:
        return [(0, len(block.raw_text))]
    seg = block.isnad_segment if scope is TagScope.ISNAD_ONLY else block.matn_segment
    if seg is None:
        return []
    return [(bmap.to_char(seg[0]), bmap.to_char(seg[1]))]


def _tag_block(block: TraditionBlock, matcher: _Matcher, scope: TagScope) -> TraditionBlock:
    if not block.raw_text:
        return block
    bmap = _ByteMap(block.raw_text)
    blocked = sorted(
        (bmap.to_char(s.start), bmap.to_char(s.end))
        for s in block.spans
        if s.kind in (SpanKind.NAME, SpanKind.TRANSMISSION_TERM)
    )
    new_spans: list[Span] = []
    for lo, hi in _char_ranges_for_scope(block, scope, bmap):
        for cs, ce, kind, ids in _scan_range(block.raw_text, lo, hi, matcher, blocked):
            if kind is SpanKind.NAME:
                if len(ids) == 1:
                    span = Span(bmap.to_byte(cs), bmap.to_byte(ce), kind,
                                transmitter_id=ids[0])
                else:
                    span = Span(bmap.to_byte(cs), bmap.to_byte(ce), kind, candidates=ids)
            else:
                span = Span(bmap.to_byte(cs), bmap.to_byte(ce), kind)
            new_spans.append(span)
    if not new_spans:
        return block
    return replace(block, spans=block.spans + tuple(new_spans))


def tag_occurrences(
    doc: MarkupDocument, lexicon: Lexicon, scope: TagScope = TagScope.ALL
) -> MarkupDocument:
    """Add NAME and TRANSMISSION_TERM spans for every lexicon match.

    Matching is longest-match leftmost with no overlaps; pre-existing
    explicit annotations (and earlier tag runs) are preserved, their byte
    ranges never re-tagged, which makes the operation idempotent.  A
    surface mapping to several transmitter ids produces a NAME span
    carrying the candidate list: ambiguity is data, not failure.
    """
    if lexicon.is_empty():
        return doc
    matcher = _Matcher(lexicon)
    return MarkupDocument(
        works=tuple(
            replace(
                work,
                chapters=tuple(
                    replace(
                        chapter,
                        blocks=tuple(
                            _tag_block(b, matcher, scope) for b in chapter.blocks
                        ),
                    )
                    for chapter in work.chapters
                ),
            )
            for work in doc.works
        )
    )


def resolve_unambiguous(doc: MarkupDocument, lexicon: Lexicon) -> MarkupDocument:
    """Promote unambiguous isnad-segment name matches to explicit @NAME spans.

    This is the curation step the `tag` command performs before writing a
    file back out: resolved names become part of the markup, ambiguous
    ones are left for a human to annotate.
    """
    tagged = tag_occurrences(doc, lexicon, TagScope.ISNAD_ONLY)
    new_works = []
    for work in tagged.works:
        new_chapters = []
        for chapter in work.chapters:
            new_blocks = []
            for block in chapter.blocks:
                seg = block.isnad_segment
                spans = tuple(
                    replace(span, explicit=True)
                    if (
                        seg is not None
                        and span.kind is SpanKind.NAME
                        and span.transmitter_id is not None
                        and seg[0] <= span.start
                        and span.end <= seg[1]
                    )
                    else span
                    for span in block.spans
                )
                new_blocks.append(replace(block, spans=spans))
            new_chapters.append(replace(chapter, blocks=tuple(new_blocks)))
        new_works.append(replace(work, chapters=tuple(new_chapters)))
    return MarkupDocument(works=tuple(new_works))


# ---------------------------------------------------------------------------
# Chain extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AmbiguousName:
    """One unresolved chain position: who is this, of the candidates?"""

    position: int
    surface_form: str
    candidates: tuple[int, ...]


@dataclass(frozen=True)
class AmbiguityReport:
    """Chain extraction refused: these positions need human resolution."""

    entries: tuple[AmbiguousName, ...]


# Punctuation swallowed between an extracted chain and the matn proper.
_BOUNDARY_TRIM = " \t.,;:"


def _extract_from_segment(block: TraditionBlock, matcher: _Matcher):
    bmap = _ByteMap(block.raw_text)
    seg = block.isnad_segment
    lo, hi = bmap.to_char(seg[0]), bmap.to_char(seg[1])
    blocked = sorted(
        (bmap.to_char(s.start), bmap.to_char(s.end), s.transmitter_id)
        for s in block.spans
        if s.kind is SpanKind.NAME and s.explicit
        and seg[0] <= s.start and s.end <= seg[1]
    )
    names = [(cs, ce, (tid,)) for cs, ce, tid in blocked]
    for cs, ce, kind, ids in _scan_range(
        block.raw_text, lo, hi, matcher, [(b[0], b[1]) for b in blocked]
    ):
        if kind is SpanKind.NAME:
            names.append((cs, ce, ids))
    names.sort()
    return names


def _walk_heuristic(text: str, matcher: _Matcher):
    """Accept leading NAME/TERM tokens; stop at the first alien token.

    Returns (names, boundary): matched names as (start, end, ids) and the
    char offset where the matn begins.
    """
    names: list[tuple[int, int, tuple[int, ...]]] = []
    pos = 0
    boundary = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = matcher.longest_at(text, pos, n)
        if m is None:
            break
        end, kind, ids = m
        if kind is SpanKind.NAME:
            names.append((pos, end, ids))
            boundary = end
        elif not names:
            break  # a chain opens with a name, not a bare term
        pos = end
    if names:
        while boundary < n and text[boundary] in _BOUNDARY_TRIM:
            boundary += 1
    return names, boundary


def extract_isnad(block: TraditionBlock, lexicon: Lexicon):
    """Extract the transmission chain of one block, collector-first.

    With an explicit isnad segment the chain is simply the ordered name
    spans inside it; the matn is never read.  Without one, heuristic mode
    walks tokens from the block start, and keeps names for as long as only
    lexicon names and transmission terms appear.  Any position whose
    surface form has several candidate transmitters yields an
    AmbiguityReport instead of a chain: resolution is a human act.
    """
    chain, _ = extract_isnad_and_matn(block, lexicon)
    return chain


def extract_isnad_and_matn(block: TraditionBlock, lexicon: Lexicon):
    """Like extract_isnad, also returning the block's matn text."""
    matcher = _Matcher(lexicon)
    if block.isnad_segment is not None:
        names = _extract_from_segment(block, matcher)
        matn = block.matn_text() or ""
    else:
        if not lexicon.name_entries:
            raise NoLexicon("heuristic extraction needs a name lexicon")
        if not lexicon.transmission_terms:
            raise NoLexicon("heuristic extraction needs transmission terms")
        names, boundary = _walk_heuristic(block.raw_text, matcher)
        matn = block.raw_text[boundary:]
    ambiguous = tuple(
        AmbiguousName(i, block.raw_text[cs:ce] if block.isnad_segment is None
                      else _segment_text(block, cs, ce), ids)
        for i, (cs, ce, ids) in enumerate(names)
        if len(ids) > 1
    )
    if ambiguous:
        return AmbiguityReport(ambiguous), matn
    chain = IsnadChain(
        tuple(
            TransmitterRef(ids[0], _segment_text(block, cs, ce))
            for cs, ce, ids in names
        )
    )
    return chain, matn


def _segment_text(block: TraditionBlock, char_start: int, char_end: int) -> str:
    return block.raw_text[char_start:char_end]


# ---------------------------------------------------------------------------
# Concordance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConcordanceHit:
    """A keyword-in-context row; offset is a character offset in the block."""

    work_id: int
    chapter_id: int
    tradition_id: int
    offset: int
    left: str
    match: str
    right: str


def concordance(doc: MarkupDocument, lexeme: str, window: int) -> list[ConcordanceHit]:
    """All non-overlapping occurrences of a lexeme, in document order.

    Contexts hold up to `window` characters each side and never cross a
    tradition block's boundary.
    """
    if not (0 <= window <= 200):
        raise InvariantViolation("window", "must be between 0 and 200")
    if not lexeme:
        return []
    hits: list[ConcordanceHit] = []
    for work, chapter, block in doc.blocks():
        text = block.raw_text
        pos = text.find(lexeme)
        while pos != -1:
            end = pos + len(lexeme)
            hits.append(
                ConcordanceHit(
                    work_id=work.id,
                    chapter_id=chapter.id,
                    tradition_id=block.id,
                    offset=pos,
                    left=text[max(0, pos - window):pos],
                    match=lexeme,
                    right=text[end:end + window],
                )
            )
            pos = text.find(lexeme, end)
    return hits
