import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture()
def make_doc():
    from gpcorpus.ingest import Document

    def _make(text, doc_id="doc1", title="title", language="en", well_formed=True):
        return Document(doc_id=doc_id, title=title, text=text,
                        language=language, well_formed=well_formed)

    return _make
