"""spanforge: multiword-expression identification toolkit.

Boundary label projection, constraint-based span reconstruction from
per-token probabilities, threshold tuning, exact span-match evaluation,
and training-set augmentation, with file-based exchange formats for
plugging in an external scorer.
"""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    Corpus,
    CorpusFormat,
    MweAnnotation,
    MweType,
    Sentence,
    Split,
    Token,
    corpus_stats,
    is_contiguous,
    load_corpus,
    map_streusle_type,
    save_corpus,
)
from .projection import (  # noqa: F401
    LabelProjection,
    ProjectionArtifact,
    boundary_collisions,
    project,
    read_artifact,
    write_artifact,
)
from .features import (  # noqa: F401
    ChunkTags,
    DepDistanceMatrix,
    dep_distances,
    dep_distances_from_heads,
    heuristic_chunk_tags,
    load_chunk_tags,
    load_features,
    mean_dep_distance,
    validate_features,
)
from .scoring import (  # noqa: F401
    MweLexicon,
    TokenProbabilities,
    baseline_score,
    build_lexicon,
    load_probabilities,
    score_corpus,
    validate_probabilities,
    write_probabilities,
)
from .reconstruct import (  # noqa: F401
    OverlapPolicy,
    PredictedMwe,
    ReconstructionConfig,
    Thresholds,
    brute_force_reference,
    dep_filter,
    enumerate_candidates,
    load_predictions,
    reconstruct_corpus,
    reconstruct_sentence,
    resolve_overlaps,
    write_predictions,
)
from .tune import ThresholdGrid, TuneResult, carve_dev, grid_search  # noqa: F401
from .evaluate import (  # noqa: F401
    EvalReport,
    MatchCounts,
    continuity_metrics,
    evaluate,
    exact_match_counts,
    micro_prf,
    percent,
    type_recall,
)
from .augment import (  # noqa: F401
    AugmentConfig,
    AugmentStrategy,
    SubstitutionLexicon,
    lexical_substitute,
    load_substitution_lexicon,
    oversample,
)
