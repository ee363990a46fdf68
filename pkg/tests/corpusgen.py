"""Seeded random corpora for oracle-equivalence and property tests."""

from __future__ import annotations

import random

from riwaya.model import IsnadChain, LinkKind, ThematicFlags, TransmitterRef, TriState
from riwaya.store import Store

FLAG_KEYS = ("trad_proph", "miracle", "militaire")
STATES = (TriState.YES, TriState.NO, TriState.LIMINAL)


def random_store(
    rng: random.Random,
    max_transmitters: int = 10,
    max_traditions: int = 25,
    max_chain: int = 8,
) -> Store:
    """A store with random chains, flags, and chain-derived links.

    INDIV_TRAD links mirror what import_document creates: one per distinct
    transmitter per tradition; RECUEIL_TRAD links one per tradition.
    """
    store = Store.ephemeral(FLAG_KEYS)
    n_transmitters = rng.randint(1, max_transmitters)
    for i in range(n_transmitters):
        store.insert_transmitter(f"Rāwī {i + 1}")
    n_traditions = rng.randint(0, max_traditions)
    n_works = rng.randint(1, 3)
    work_ids = [store.insert_work(f"Kitāb {w + 1}") for w in range(n_works)]
    chapter_ids = []
    for work_id in work_ids:
        for ordinal in range(1, rng.randint(1, 4) + 1):
            chapter_ids.append(store.insert_chapter(work_id, ordinal))
    placed = 0
    ordinals = {cid: 0 for cid in chapter_ids}
    while placed < n_traditions:
        cid = rng.choice(chapter_ids)
        ordinals[cid] += 1
        length = rng.randint(0, max_chain)
        refs = []
        for _ in range(length):
            tid = rng.randint(1, n_transmitters)
            refs.append(TransmitterRef(tid, f"Rāwī {tid}"))
        flags = ThematicFlags({key: rng.choice(STATES) for key in FLAG_KEYS})
        trad_id = store.insert_tradition(
            chapter_id=cid,
            ordinal_in_chapter=ordinals[cid],
            isnad=IsnadChain(tuple(refs)),
            matn_summary=f"entry {placed + 1}",
            flags=flags,
        )
        seen = set()
        for ref in refs:
            if ref.transmitter_id not in seen:
                seen.add(ref.transmitter_id)
                store.link(LinkKind.INDIV_TRAD, ref.transmitter_id, trad_id)
        work_id = store.get_chapter(cid).work_id
        store.link(LinkKind.RECUEIL_TRAD, work_id, trad_id)
        placed += 1
    return store
