"""Consensus clustering for thresholded biomarker cohorts.

Thin Python veneer over the C++ core: dataset ingestion, imputation and
filtering, four clustering engines, validity-index based optimal-k selection,
cross-algorithm consensus, and a seeded synthetic-cohort generator.
"""

from ._core import (
    CohortError,
    Dataset,
    adjusted_rand_index,
    align_labels,
    build_consensus,
    evaluate_indices,
    fuzzy_cmeans,
    generate_synthetic,
    hierarchical,
    kmeans,
    load_dataset,
    pam,
    run_all_engines,
    select_k,
)

__version__ = "1.0.0"

__all__ = [
    "CohortError",
    "Dataset",
    "adjusted_rand_index",
    "align_labels",
    "build_consensus",
    "evaluate_indices",
    "fuzzy_cmeans",
    "generate_synthetic",
    "hierarchical",
    "kmeans",
    "load_dataset",
    "pam",
    "run_all_engines",
    "select_k",
    "__version__",
]
