"""Domain types shared by every other module.

Traditions are modeled the way the source corpora are structured: a work
(kitab) divided into chapters (bab), each chapter holding numbered
traditions, each tradition carrying a transmission chain (isnad) and a
narrative summary (matn).  Thematic classification is three-valued: yes,
no, or liminal for readings where a theme is implied but never made
explicit.

All types here are immutable value objects; they are safe to share freely.
"""

from __future__ import annotations

from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .errors import InvariantViolation, ZeroTotal

# Default flag vocabulary: prophetic / first-caliphs attribution plus broad
# thematic categories.  Stores may declare any other vocabulary.
DEFAULT_FLAG_VOCABULARY: tuple[str, ...] = (
    "trad_proph",
    "trad_bakr",
    "trad_umar",
    "trad_uthm",
    "miracle",
    "diplomatique",
    "theologique",
    "politique",
    "militaire",
)


class TriState(Enum):
    """Three-valued classification: yes, no, or the in-between reading."""

    YES = "yes"
    NO = "no"
    LIMINAL = "liminal"

    @classmethod
    def from_text(cls, text: str) -> "TriState":
        try:
            return cls(text)
        except ValueError:
            raise InvariantViolation("flag", f"not a tri-state value: {text!r}") from None

    def __str__(self) -> str:
        return self.value


class TriMatchMode(Enum):
    """Selection modes over a TriState value."""

    STRICT_YES = "strict-yes"
    YES_OR_LIMINAL = "yes-or-liminal"
    LIMINAL_ONLY = "liminal-only"
    NO_ONLY = "no-only"

    @classmethod
    def from_text(cls, text: str) -> "TriMatchMode":
        try:
            return cls(text)
        except ValueError:
            raise InvariantViolation("mode", f"not a match mode: {text!r}") from None


def tri_matches(value: TriState, mode: TriMatchMode) -> bool:
    """Decide whether a tri-state value satisfies the given selection mode.

    STRICT_YES, LIMINAL_ONLY and NO_ONLY partition the three values;
    YES_OR_LIMINAL accepts everything except NO.
    """
    if mode is TriMatchMode.STRICT_YES:
        return value is TriState.YES
    if mode is TriMatchMode.YES_OR_LIMINAL:
        return value in (TriState.YES, TriState.LIMINAL)
    if mode is TriMatchMode.LIMINAL_ONLY:
        return value is TriState.LIMINAL
    return value is TriState.NO


# ---------------------------------------------------------------------------
# Percentages
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Percent:
    """An exact rational percentage rendered at one decimal place.

    The exact value is kept as a Fraction; rendering rounds half away from
    zero, so 96.666... prints 96.7 and 6.25 prints 6.3.
    """

    exact: Fraction

    def render(self) -> str:
        tenths = self.exact * 10
        if tenths >= 0:
            n = int(tenths + Fraction(1, 2))
        else:
            n = -int(-tenths + Fraction(1, 2))
        whole, dec = divmod(abs(n), 10)
        sign = "-" if n < 0 else ""
        return f"{sign}{whole}.{dec}"

    def __str__(self) -> str:
        return self.render()

    def __float__(self) -> float:
        return float(self.exact)


def percentage(count: int, total: int) -> Percent:
    """Return 100*count/total as an exact Percent.

    Raises ZeroTotal when total is zero; callers computing per-work
    statistics map that onto EmptyWork.
    """
    if total == 0:
        raise ZeroTotal("percentage undefined for total=0")
    if total < 0:
        raise InvariantViolation("total", "must be positive")
    if count < 0 or count > total:
        raise InvariantViolation("count", "must satisfy 0 <= count <= total")
    return Percent(Fraction(100 * count, total))


# ---------------------------------------------------------------------------
# Thematic flags
# ---------------------------------------------------------------------------

class ThematicFlags(Mapping):
    """Immutable map from flag key to TriState.

    Keys are case-sensitive identifiers drawn from a corpus-level
    vocabulary.  Keys absent from an assignment materialize as NO when the
    flags are bound to a vocabulary (unchecked boxes read as "no").
    """

    __slots__ = ("_values",)

    def __init__(self, values: Mapping[str, TriState] | None = None):
        vals = dict(values or {})
        for key, state in vals.items():
            if not isinstance(state, TriState):
                raise InvariantViolation("flags", f"value for {key!r} is not a TriState")
        object.__setattr__(self, "_values", vals)

    def __getitem__(self, key: str) -> TriState:
        return self._values[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ThematicFlags):
            return self._values == other._values
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._values.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self._values.items())
        return f"ThematicFlags({inner})"

    def value(self, key: str) -> TriState:
        """Flag value with the unchecked default: missing keys read NO."""
        return self._values.get(key, TriState.NO)

    def materialize(self, vocabulary: tuple[str, ...]) -> "ThematicFlags":
        """Return flags holding every vocabulary key, missing ones as NO.

        Raises InvariantViolation when a set key is outside the vocabulary.
        """
        extra = set(self._values) - set(vocabulary)
        if extra:
            raise InvariantViolation(
                "flags", f"keys not in vocabulary: {', '.join(sorted(extra))}"
            )
        return ThematicFlags({key: self.value(key) for key in vocabulary})


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransmitterRecord:
    """A named individual appearing in transmission chains."""

    id: int
    canonical_name: str
    alt_names: tuple[str, ...] = ()
    death_date_hijri: int | None = None
    notes: str = ""

    def __post_init__(self):
        if self.id < 1:
            raise InvariantViolation("id", "ids start at 1")
        if not self.canonical_name:
            raise InvariantViolation("canonical_name", "must be non-empty")


@dataclass(frozen=True)
class WorkRecord:
    """A collection (kitab): title, compiler, and edition label.

    The compiler's death date serves as the terminus post quem for dating
    the collection's content.
    """

    id: int
    title: str
    traditionist: str = ""
    death_date_hijri: int | None = None
    edition_label: str = ""

    def __post_init__(self):
        if self.id < 1:
            raise InvariantViolation("id", "ids start at 1")
        if not self.title:
            raise InvariantViolation("title", "must be non-empty")

    def label(self) -> str:
        """Display label: 'Title of Traditionist' when a compiler is set."""
        if self.traditionist:
            return f"{self.title} of {self.traditionist}"
        return self.title


@dataclass(frozen=True)
class ChapterRecord:
    """A chapter (bab) within a work; ordinals run contiguously from 1."""

    id: int
    work_id: int
    ordinal: int
    heading: str = ""

    def __post_init__(self):
        if self.id < 1:
            raise InvariantViolation("id", "ids start at 1")
        if self.ordinal < 1:
            raise InvariantViolation("ordinal", "must be positive")


@dataclass(frozen=True)
class TransmitterRef:
    """One chain position: a transmitter id plus the name as written there."""

    transmitter_id: int
    surface_form: str

    def __post_init__(self):
        if self.transmitter_id < 1:
            raise InvariantViolation("transmitter_id", "ids start at 1")
        if not self.surface_form:
            raise InvariantViolation("surface_form", "must be non-empty")


@dataclass(frozen=True)
class IsnadChain:
    """Ordered transmission chain, collector-first.

    Position 0 holds the latest transmitter (the collector who wrote the
    tradition down); the last position holds the earliest authority.  A
    chain may be empty, and the same transmitter may recur at different
    positions.
    """

    links: tuple[TransmitterRef, ...] = ()

    def __len__(self) -> int:
        return len(self.links)

    def __iter__(self) -> Iterator[TransmitterRef]:
        return iter(self.links)

    def __bool__(self) -> bool:
        return bool(self.links)

    def transmitter_ids(self) -> tuple[int, ...]:
        return tuple(ref.transmitter_id for ref in self.links)

    @classmethod
    def of(cls, *pairs: tuple[int, str]) -> "IsnadChain":
        return cls(tuple(TransmitterRef(tid, surface) for tid, surface in pairs))


@dataclass(frozen=True)
class TraditionRecord:
    """One narrative unit: chain, matn summary, and thematic flags."""

    id: int
    chapter_id: int
    ordinal_in_chapter: int
    isnad: IsnadChain = IsnadChain()
    matn_summary: str = ""
    flags: ThematicFlags = field(default_factory=ThematicFlags)

    def __post_init__(self):
        if self.id < 1:
            raise InvariantViolation("id", "ids start at 1")
        if self.ordinal_in_chapter < 1:
            raise InvariantViolation("ordinal_in_chapter", "must be positive")


class LinkKind(Enum):
    """The three join tables connecting transmitters, works and traditions."""

    INDIV_TRAD = "indiv_trad"
    RECUEIL_TRAD = "recueil_trad"
    INDIV_RECUEIL = "indiv_recueil"


@dataclass(frozen=True)
class LinkRow:
    """Numeric join row; link ids run sequentially per kind."""

    link_id: int
    left_id: int
    right_id: int
    kind: LinkKind

    def __post_init__(self):
        if self.link_id < 1 or self.left_id < 1 or self.right_id < 1:
            raise InvariantViolation("link", "ids start at 1")
