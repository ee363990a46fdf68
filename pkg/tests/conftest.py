from __future__ import annotations

from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES_DIR = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES_DIR


@pytest.fixture(scope="session")
def survey_store():
    """The survey corpus loaded into an ephemeral store, shared read-only."""
    from riwaya import fixtures

    return fixtures.build_survey_store()


@pytest.fixture()
def umayr_store():
    """Single-tradition store built from the five-name chain fixture."""
    from riwaya import fixtures
    from riwaya.store import Store

    store = Store.ephemeral()
    lexicon = fixtures.umayr_lexicon()
    store.register_lexicon(lexicon)
    store.import_document(fixtures.umayr_document(), lexicon)
    return store
