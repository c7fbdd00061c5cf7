import datetime as dt
import json

import pytest

from entity_entropy.corpus import (CorpusIndex, DocumentRecord, EntityRecord, FactRecord,
                                   build_index)

START = dt.date(2024, 1, 1)


def make_index(tables: dict[str, dict[str, int]], dates: dict[str, int] | None = None,
               categories: dict[str, str] | None = None, extra_docs=()) -> CorpusIndex:
    """Build an index from ``{entity: {doc: count}}``; ``dates`` maps doc -> day offset."""
    doc_ids = sorted({d for t in tables.values() for d in t} | set(extra_docs))
    dates = dates or {}
    docs = {d: DocumentRecord(d, START + dt.timedelta(days=dates[d]) if d in dates else None)
            for d in doc_ids}
    ents = {e: EntityRecord(e, e, (categories or {}).get(e, "UNKNOWN")) for e in tables}
    facts = [FactRecord(f"{e}:{d}:{i}", e, d)
             for e, t in tables.items() for d, n in t.items() for i in range(n)]
    return build_index(docs, ents, facts)


def write_jsonl(path, rows):
    with open(path, "w") as fh:
        for r in rows:
            fh.write(json.dumps(r) + "\n")
    return path


@pytest.fixture
def corpus_files(tmp_path):
    """Writer for a corpus directory from ``{entity: {doc: count}}`` plus doc dates."""

    def _write(tables, dates=None, categories=None, extra_docs=()):
        dates = dates or {}
        doc_ids = sorted({d for t in tables.values() for d in t} | set(extra_docs))
        write_jsonl(tmp_path / "docs.jsonl",
                    [{"doc_id": d, "created_at": (START + dt.timedelta(days=dates[d])).isoformat()
                      if d in dates else None} for d in doc_ids])
        write_jsonl(tmp_path / "entities.jsonl",
                    [{"entity_id": e, "name": e.upper(),
                      "category": (categories or {}).get(e, "PRODUCT")} for e in tables])
        write_jsonl(tmp_path / "facts.jsonl",
                    [{"fact_id": f"{e}-{d}-{i}", "entity_id": e, "doc_id": d, "confidence": 0.9}
                     for e, t in tables.items() for d, n in t.items() for i in range(n)])
        return tmp_path

    return _write
