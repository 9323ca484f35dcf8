"""Collaborative filtering, diversity re-ranking, and user-disparity metrics."""

from .dataset import (
    CandidateSets,
    RatingsDataset,
    candidate_sets,
    load_ratings,
    parse_ratings,
    write_ratings,
)
from .errors import (
    CandidateShortfallError,
    DuplicateRatingError,
    FairrecError,
    FactorizationError,
    InvalidInputError,
    RatingParseError,
    RatingRangeError,
)
from .metrics import (
    DisparityReport,
    aggregate_diversity,
    disparity_report,
    gini,
    overlap_similarity,
    recommendation_disparity,
    satisfaction,
    score_disparity,
)
from .predictors import (
    KnnParams,
    NmfParams,
    ScoreGraph,
    fit_nmf,
    load_score_cache,
    predict_knn,
    predict_nmf,
    save_score_cache,
)
from .reranking import (
    GreedyParams,
    GreedyRerankResult,
    RandomParams,
    RecommendationSet,
    greedy_rerank,
    random_rerank,
    top_k,
    write_recommendations,
)
from .sweep import SweepConfig, build_config, emit_plot_data, run_sweep

__version__ = "0.1.0"

__all__ = [
    "CandidateSets",
    "CandidateShortfallError",
    "DisparityReport",
    "DuplicateRatingError",
    "FairrecError",
    "FactorizationError",
    "GreedyParams",
    "GreedyRerankResult",
    "InvalidInputError",
    "KnnParams",
    "NmfParams",
    "RandomParams",
    "RatingParseError",
    "RatingRangeError",
    "RatingsDataset",
    "RecommendationSet",
    "ScoreGraph",
    "SweepConfig",
    "aggregate_diversity",
    "build_config",
    "candidate_sets",
    "disparity_report",
    "emit_plot_data",
    "fit_nmf",
    "gini",
    "greedy_rerank",
    "load_ratings",
    "load_score_cache",
    "overlap_similarity",
    "parse_ratings",
    "predict_knn",
    "predict_nmf",
    "random_rerank",
    "recommendation_disparity",
    "run_sweep",
    "satisfaction",
    "save_score_cache",
    "score_disparity",
    "top_k",
    "write_ratings",
    "write_recommendations",
]
