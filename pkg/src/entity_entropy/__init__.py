"""Entity entropy: how knowledge about an entity is spread over a document corpus."""

from .corpus import (CorpusError, CorpusIndex, DocumentRecord, EntityRecord, FactRecord,
                     FactTable, filter_entities, load_corpus)
from .entropy import (CategoryStats, EntityDistribution, EntropyProfile, build_distribution,
                      category_stats, coverage_count, coverage_rank_table, entropy,
                      entropy_profiles, max_corpus_entropy, size_entropy_pairs)
from .fitting import FitConfig, FitResult, fit_entity, fit_global_fact_params, fit_summary, rmse
from .genmodel import DocSchedule, GenParams, SimTrajectory, simulate
from .overlap import OverlapGraph, build_overlap, connectivity, top_k_subgraph
from .temporal import (EntropySeries, delta_series, detect_bursts, early_final_regression,
                       early_vs_final, entropy_series)

__version__ = "0.1.0"
