"""Synthetic corpora produced by running the growth model for several entities.

All entities share one stream of documents: day ``t`` creates
``schedule[t]`` documents, and each entity's simulated fact counts are
attached to those documents.
"""

from __future__ import annotations

import datetime as dt
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import (CorpusIndex, DocumentRecord, EntityRecord, FactRecord, build_index,
                     write_corpus)
from .genmodel import DocSchedule, GenParams, Mode, Window, simulate


def synthesize(entity_params: Mapping[str, GenParams], schedule: DocSchedule | Sequence[int],
               start: dt.date = dt.date(2024, 1, 1), seed: int = 0, mode: Mode = "stochastic",
               categories: Mapping[str, str] | None = None, window: Window = "day",
               scale: float = 1.0):
    """Return ``(documents, entities, facts)`` record lists.

    Fact counts are rounded to integers; in expectation mode ``scale``
    multiplies the real-valued masses before rounding.
    """
    counts = schedule.counts if isinstance(schedule, DocSchedule) else tuple(schedule)
    documents = []
    day_docs: list[list[str]] = []
    for t, n in enumerate(counts):
        ids = [f"d{t:04d}_{i:03d}" for i in range(n)]
        day_docs.append(ids)
        date = start + dt.timedelta(days=t)
        documents.extend(DocumentRecord(d, date, "synthetic") for d in ids)

    entities, facts = [], []
    seeds = np.random.SeedSequence(seed).spawn(len(entity_params))
    for (eid, params), ss in zip(sorted(entity_params.items()), seeds):
        category = (categories or {}).get(eid, "UNKNOWN")
        entities.append(EntityRecord(eid, eid, category))
        traj = simulate(params, counts, mode, np.random.default_rng(ss), window)
        for ids, day_facts in zip(day_docs, traj.doc_facts):
            for doc_id, f in zip(ids, day_facts):
                k = int(round(f * scale)) if mode == "expectation" else int(f)
                facts.extend(FactRecord(f"{eid}:{doc_id}:{j}", eid, doc_id)
                             for j in range(k))
    return documents, entities, facts


def synthesize_index(*args, **kwargs) -> CorpusIndex:
    documents, entities, facts = synthesize(*args, **kwargs)
    return build_index({d.doc_id: d for d in documents}, {e.entity_id: e for e in entities},
                       facts)


def write_synthetic_corpus(directory: str | Path, *args, **kwargs) -> tuple[Path, Path, Path]:
    """Synthesize a corpus and write ``docs.jsonl``, ``entities.jsonl``, ``facts.jsonl``."""
    return write_corpus(directory, *synthesize(*args, **kwargs))
