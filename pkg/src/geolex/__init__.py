"""Token vocabularies, landmark-based mobility and baseline analytics for tweet streams."""

from .baseline import (
    cluster_baseline,
    moving_average,
    pearson,
    percent,
    silhouette,
    weekday_baseline,
    weekly_heatmap,
)
from .geo import haversine
from .mobility import (
    LandmarkSet,
    assign_landmark,
    build_landmarks,
    country_series,
    detect_trips,
    od_matrix,
)
from .records import MessageRecord, Store, ingest, parse_record, partition
from .text import TokenizerConfig, is_emoji, normalize, tokenize
from .vocabulary import (
    Vocabulary,
    build_day,
    common_words,
    day_words,
    jaccard,
    merge,
    pca_project,
    similarity_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "assign_landmark",
    "build_day",
    "build_landmarks",
    "cluster_baseline",
    "common_words",
    "country_series",
    "day_words",
    "detect_trips",
    "haversine",
    "ingest",
    "is_emoji",
    "jaccard",
    "LandmarkSet",
    "merge",
    "MessageRecord",
    "moving_average",
    "normalize",
    "od_matrix",
    "parse_record",
    "partition",
    "pca_project",
    "pearson",
    "percent",
    "silhouette",
    "similarity_matrix",
    "Store",
    "tokenize",
    "TokenizerConfig",
    "Vocabulary",
    "weekday_baseline",
    "weekly_heatmap",
]
