from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from riwaya.errors import InvariantViolation, ZeroTotal
from riwaya.model import (
    DEFAULT_FLAG_VOCABULARY,
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

tri_states = st.sampled_from(list(TriState))
modes = st.sampled_from(list(TriMatchMode))


# ---------------------------------------------------------------------------
# TriState / tri_matches
# ---------------------------------------------------------------------------

def test_three_distinct_values():
    assert len({TriState.YES, TriState.NO, TriState.LIMINAL}) == 3
    assert TriState.LIMINAL != TriState.YES
    assert TriState.LIMINAL != TriState.NO


def test_from_text_round_trip():
    for state in TriState:
        assert TriState.from_text(state.value) is state
    with pytest.raises(InvariantViolation):
        TriState.from_text("maybe")


def test_tri_matches_definitions():
    assert tri_matches(TriState.LIMINAL, TriMatchMode.YES_OR_LIMINAL) is True
    assert tri_matches(TriState.LIMINAL, TriMatchMode.STRICT_YES) is False
    assert tri_matches(TriState.NO, TriMatchMode.NO_ONLY) is True
    assert tri_matches(TriState.YES, TriMatchMode.STRICT_YES) is True
    assert tri_matches(TriState.YES, TriMatchMode.YES_OR_LIMINAL) is True
    assert tri_matches(TriState.NO, TriMatchMode.YES_OR_LIMINAL) is False
    assert tri_matches(TriState.YES, TriMatchMode.LIMINAL_ONLY) is False


@given(st.lists(tri_states, max_size=50))
def test_partition_modes_cover_everything_once(values):
    strict = sum(tri_matches(v, TriMatchMode.STRICT_YES) for v in values)
    liminal = sum(tri_matches(v, TriMatchMode.LIMINAL_ONLY) for v in values)
    no = sum(tri_matches(v, TriMatchMode.NO_ONLY) for v in values)
    assert strict + liminal + no == len(values)


@given(tri_states)
def test_yes_or_liminal_is_union(value):
    expected = tri_matches(value, TriMatchMode.STRICT_YES) or tri_matches(
        value, TriMatchMode.LIMINAL_ONLY
    )
    assert tri_matches(value, TriMatchMode.YES_OR_LIMINAL) == expected


# ---------------------------------------------------------------------------
# percentage
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "count,total,rendered",
    [
        (91, 147, "61.9"),
        (319, 579, "55.1"),
        (0, 10, "0.0"),
        (87, 90, "96.7"),  # exact 96.666..., rounds half away from zero
        (402, 488, "82.4"),
        (27, 31, "87.1"),
        (47, 47, "100.0"),
        (1, 16, "6.3"),  # exact 6.25: the tie goes away from zero
    ],
)
def test_percentage_rendering(count, total, rendered):
    assert percentage(count, total).render() == rendered


def test_percentage_exact_value():
    assert percentage(91, 147).exact == Fraction(9100, 147)


def test_percentage_full_is_100():
    for total in (1, 3, 7, 147):
        assert percentage(total, total).render() == "100.0"


def test_percentage_errors():
    with pytest.raises(ZeroTotal):
        percentage(0, 0)
    with pytest.raises(InvariantViolation):
        percentage(5, 4)
    with pytest.raises(InvariantViolation):
        percentage(-1, 4)


def test_percent_render_negative_ties_go_away_from_zero():
    assert Percent(Fraction(-25, 4)).render() == "-6.3"


@given(st.integers(min_value=1, max_value=2000), st.data())
def test_percentage_monotone_in_count(total, data):
    a = data.draw(st.integers(min_value=0, max_value=total))
    b = data.draw(st.integers(min_value=a, max_value=total))
    assert percentage(a, total).exact <= percentage(b, total).exact


@given(st.integers(min_value=1, max_value=2000), st.data())
def test_percentage_render_within_half_unit(total, data):
    count = data.draw(st.integers(min_value=0, max_value=total))
    pct = percentage(count, total)
    assert abs(float(pct.render()) - float(pct.exact)) <= 0.05 + 1e-12


# ---------------------------------------------------------------------------
# ThematicFlags
# ---------------------------------------------------------------------------

def test_default_vocabulary_is_the_nine_keys():
    assert DEFAULT_FLAG_VOCABULARY == (
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


def test_flags_materialize_missing_as_no():
    flags = ThematicFlags({"miracle": TriState.LIMINAL})
    full = flags.materialize(("miracle", "militaire"))
    assert full["miracle"] is TriState.LIMINAL
    assert full["militaire"] is TriState.NO
    assert set(full) == {"miracle", "militaire"}


def test_flags_materialize_rejects_undeclared_keys():
    flags = ThematicFlags({"fiscale": TriState.YES})
    with pytest.raises(InvariantViolation) as exc:
        flags.materialize(DEFAULT_FLAG_VOCABULARY)
    assert exc.value.field == "flags"


def test_flags_value_defaults_to_no():
    assert ThematicFlags().value("militaire") is TriState.NO


def test_flags_equality_ignores_order():
    a = ThematicFlags({"x": TriState.YES, "y": TriState.NO})
    b = ThematicFlags({"y": TriState.NO, "x": TriState.YES})
    assert a == b
    assert hash(a) == hash(b)


def test_flags_reject_non_tristate():
    with pytest.raises(InvariantViolation):
        ThematicFlags({"x": True})


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

def test_transmitter_requires_name():
    with pytest.raises(InvariantViolation):
        TransmitterRecord(id=1, canonical_name="")
    with pytest.raises(InvariantViolation):
        TransmitterRecord(id=0, canonical_name="x")


def test_work_label():
    work = WorkRecord(id=1, title="Muṣannaf", traditionist="ʿAbd al-Razzāq")
    assert work.label() == "Muṣannaf of ʿAbd al-Razzāq"
    assert WorkRecord(id=2, title="Tafsīr").label() == "Tafsīr"


def test_chain_collector_first_helpers():
    chain = IsnadChain.of((1, "al-Wāqidī"), (2, "Saʿd"))
    assert chain.transmitter_ids() == (1, 2)
    assert len(chain) == 2
    assert bool(chain)
    assert not IsnadChain()
    assert [ref.surface_form for ref in chain] == ["al-Wāqidī", "Saʿd"]


def test_chain_allows_repeats_and_empty():
    chain = IsnadChain.of((3, "a"), (3, "a"))
    assert chain.transmitter_ids() == (3, 3)
    assert IsnadChain().transmitter_ids() == ()


def test_transmitter_ref_invariants():
    with pytest.raises(InvariantViolation):
        TransmitterRef(0, "x")
    with pytest.raises(InvariantViolation):
        TransmitterRef(1, "")


def test_tradition_record_invariants():
    with pytest.raises(InvariantViolation):
        TraditionRecord(id=1, chapter_id=1, ordinal_in_chapter=0)


def test_link_row_invariants():
    row = LinkRow(link_id=1, left_id=3, right_id=1, kind=LinkKind.INDIV_TRAD)
    assert row.kind is LinkKind.INDIV_TRAD
    with pytest.raises(InvariantViolation):
        LinkRow(link_id=0, left_id=1, right_id=1, kind=LinkKind.INDIV_TRAD)
