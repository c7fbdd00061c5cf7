"""Loading and indexing of document / entity / fact records.

Three JSONL files feed the index::

    docs:     {"doc_id": str, "created_at": "YYYY-MM-DD", "source": str?}
    entities: {"entity_id": str, "name": str, "category": str?}
    facts:    {"fact_id": str, "entity_id": str, "doc_id": str,
               "confidence": number?, "text": str?}

Every analytic in the package reads from a :class:`CorpusIndex`; the index is
immutable once built.
"""

from __future__ import annotations

import dataclasses
import datetime as dt
import json
from collections import Counter, defaultdict
from pathlib import Path
from types import MappingProxyType
from typing import Iterator, Mapping

UNKNOWN_CATEGORY = "UNKNOWN"


class CorpusError(ValueError):
    """Raised for malformed or inconsistent corpus input."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None,
                 field: str | None = None):
        self.path = path
        self.line = line
        self.field = field
        where = [str(p) for p in (path, line and f"line {line}") if p]
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


@dataclasses.dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    created_at: dt.date | None = None
    source: str | None = None


@dataclasses.dataclass(frozen=True)
class EntityRecord:
    entity_id: str
    name: str
    category: str = UNKNOWN_CATEGORY


@dataclasses.dataclass(frozen=True)
class FactRecord:
    fact_id: str
    entity_id: str
    doc_id: str
    confidence: float | None = None
    text: str | None = None


@dataclasses.dataclass(frozen=True)
class FactTable:
    """Per-document fact counts ``f_E(d)`` for one entity.

    Only documents with at least one fact are stored.
    """

    entity_id: str
    counts: Mapping[str, int]

    def __post_init__(self):
        items = sorted(self.counts.items())
        for doc_id, n in items:
            if n < 1:
                raise ValueError(f"fact count for {doc_id!r} must be >= 1, got {n}")
        object.__setattr__(self, "counts", MappingProxyType(dict(items)))

    @classmethod
    def from_counts(cls, entity_id: str, counts: Mapping[str, int]) -> "FactTable":
        """Build a table, silently dropping zero-count documents."""
        return cls(entity_id, {d: n for d, n in counts.items() if n > 0})

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def doc_ids(self) -> frozenset[str]:
        return frozenset(self.counts)

    def __len__(self) -> int:
        return len(self.counts)


@dataclasses.dataclass(frozen=True)
class CorpusIndex:
    """Cross-referenced, read-only view over a loaded corpus.

    ``tables`` holds only *admitted* entities, i.e. those with at least one
    fact (and passing any :func:`filter_entities` thresholds).
    """

    documents: Mapping[str, DocumentRecord]
    entities: Mapping[str, EntityRecord]
    tables: Mapping[str, FactTable]
    n_facts: int = 0

    def __post_init__(self):
        for name in ("documents", "entities", "tables"):
            value = getattr(self, name)
            object.__setattr__(self, name, MappingProxyType(dict(sorted(value.items()))))

    @property
    def n_docs(self) -> int:
        """Corpus size N."""
        return len(self.documents)

    @property
    def entity_ids(self) -> list[str]:
        """Admitted entity ids in canonical (sorted) order."""
        return list(self.tables)

    def category(self, entity_id: str) -> str:
        return self.entities[entity_id].category

    def doc_date(self, doc_id: str) -> dt.date | None:
        return self.documents[doc_id].created_at

    def __iter__(self) -> Iterator[FactTable]:
        return iter(self.tables.values())

    def __len__(self) -> int:
        return len(self.tables)


def _iter_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON ({exc.msg})", str(path), lineno) from None
            if not isinstance(obj, dict):
                raise CorpusError("record must be a JSON object", str(path), lineno)
            yield lineno, obj


def _req_str(obj: dict, field: str, path: Path, lineno: int) -> str:
    value = obj.get(field)
    if not isinstance(value, str) or not value:
        raise CorpusError("missing or non-string value", str(path), lineno, field)
    return value


def _opt_str(obj: dict, field: str, path: Path, lineno: int) -> str | None:
    value = obj.get(field)
    if value is None:
        return None
    if not isinstance(value, str):
        raise CorpusError("expected a string", str(path), lineno, field)
    return value


def parse_date(value: str) -> dt.date:
    """Parse an ISO date or datetime, truncated to the (UTC) day."""
    try:
        return dt.date.fromisoformat(value[:10])
    except ValueError:
        raise ValueError(f"unparseable date {value!r}") from None


def read_documents(path: str | Path) -> dict[str, DocumentRecord]:
    path = Path(path)
    docs: dict[str, DocumentRecord] = {}
    for lineno, obj in _iter_jsonl(path):
        doc_id = _req_str(obj, "doc_id", path, lineno)
        if doc_id in docs:
            raise CorpusError(f"duplicate doc_id {doc_id!r}", str(path), lineno, "doc_id")
        raw_date = obj.get("created_at")
        created = None
        if raw_date not in (None, ""):
            if not isinstance(raw_date, str):
                raise CorpusError("expected a YYYY-MM-DD string", str(path), lineno, "created_at")
            try:
                created = parse_date(raw_date)
            except ValueError as exc:
                raise CorpusError(str(exc), str(path), lineno, "created_at") from None
        docs[doc_id] = DocumentRecord(doc_id, created, _opt_str(obj, "source", path, lineno))
    return docs


def read_entities(path: str | Path) -> dict[str, EntityRecord]:
    path = Path(path)
    entities: dict[str, EntityRecord] = {}
    for lineno, obj in _iter_jsonl(path):
        entity_id = _req_str(obj, "entity_id", path, lineno)
        if entity_id in entities:
            raise CorpusError(f"duplicate entity_id {entity_id!r}", str(path), lineno, "entity_id")
        name = _opt_str(obj, "name", path, lineno) or entity_id
        category = _opt_str(obj, "category", path, lineno) or UNKNOWN_CATEGORY
        entities[entity_id] = EntityRecord(entity_id, name, category)
    return entities


def read_facts(path: str | Path) -> list[tuple[int, FactRecord]]:
    path = Path(path)
    facts: list[tuple[int, FactRecord]] = []
    seen: set[str] = set()
    for lineno, obj in _iter_jsonl(path):
        fact_id = _req_str(obj, "fact_id", path, lineno)
        if fact_id in seen:
            raise CorpusError(f"duplicate fact_id {fact_id!r}", str(path), lineno, "fact_id")
        seen.add(fact_id)
        confidence = obj.get("confidence")
        if confidence is not None:
            if isinstance(confidence, bool) or not isinstance(confidence, (int, float)):
                raise CorpusError("expected a number", str(path), lineno, "confidence")
            if not 0.0 <= confidence <= 1.0:
                raise CorpusError(f"confidence {confidence} outside [0, 1]", str(path), lineno,
                                  "confidence")
            confidence = float(confidence)
        facts.append((lineno, FactRecord(
            fact_id,
            _req_str(obj, "entity_id", path, lineno),
            _req_str(obj, "doc_id", path, lineno),
            confidence,
            _opt_str(obj, "text", path, lineno),
        )))
    return facts


def build_index(documents: Mapping[str, DocumentRecord],
                entities: Mapping[str, EntityRecord],
                facts: list[FactRecord] | list[tuple[int, FactRecord]],
                facts_path: str | None = None) -> CorpusIndex:
    """Cross-reference records and aggregate facts into per-entity tables.

    Repeated facts for the same (entity, document) pair accumulate.
    """
    per_entity: dict[str, Counter] = defaultdict(Counter)
    n_facts = 0
    for item in facts:
        lineno, fact = item if isinstance(item, tuple) else (None, item)
        if fact.doc_id not in documents:
            raise CorpusError(f"dangling doc reference {fact.doc_id!r}", facts_path, lineno,
                              "doc_id")
        if fact.entity_id not in entities:
            raise CorpusError(f"dangling entity reference {fact.entity_id!r}", facts_path,
                              lineno, "entity_id")
        per_entity[fact.entity_id][fact.doc_id] += 1
        n_facts += 1
    tables = {eid: FactTable(eid, dict(c)) for eid, c in per_entity.items()}
    return CorpusIndex(documents, entities, tables, n_facts)


def load_corpus(docs_path: str | Path, entities_path: str | Path,
                facts_path: str | Path) -> CorpusIndex:
    """Read the three record files and return a validated :class:`CorpusIndex`.

    Raises:
        CorpusError: on malformed lines (with line number and field),
            duplicate ids, or facts referencing unknown documents/entities.
    """
    for p in (docs_path, entities_path, facts_path):
        if not Path(p).is_file():
            raise CorpusError(f"file not found: {p}")
    documents = read_documents(docs_path)
    entities = read_entities(entities_path)
    facts = read_facts(facts_path)
    return build_index(documents, entities, facts, str(facts_path))


def filter_entities(index: CorpusIndex, min_facts: int = 1, min_docs: int = 1) -> CorpusIndex:
    """Keep entities with at least ``min_facts`` facts spread over ``min_docs`` documents."""
    if min_facts < 1 or min_docs < 1:
        raise ValueError("min_facts and min_docs must be >= 1")
    kept = {eid: t for eid, t in index.tables.items()
            if t.total >= min_facts and len(t) >= min_docs}
    return dataclasses.replace(index, tables=kept)


def write_corpus(directory: str | Path, documents, entities, facts) -> tuple[Path, Path, Path]:
    """Write records back out as the three JSONL files (docs, entities, facts)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = (directory / "docs.jsonl", directory / "entities.jsonl", directory / "facts.jsonl")

    def dump(path, rows):
        with open(path, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")

    dump(paths[0], ({"doc_id": d.doc_id,
                     "created_at": d.created_at.isoformat() if d.created_at else None,
                     **({"source": d.source} if d.source else {})} for d in documents))
    dump(paths[1], ({"entity_id": e.entity_id, "name": e.name, "category": e.category}
                    for e in entities))
    dump(paths[2], ({"fact_id": f.fact_id, "entity_id": f.entity_id, "doc_id": f.doc_id,
                     **({"confidence": f.confidence} if f.confidence is not None else {})}
                    for f in facts))
    return paths
