"""Detection and forecasting of positive/negative attitude patterns in
timestamped comment streams."""

from .batch import FeatureVector, PostTimeline, featurize, featurize_corpus, load_corpus
from .clustering import (
    ClusterModel,
    assign,
    describe_clusters,
    kmeans,
    minibatch_kmeans,
)
from .forecasting import (
    EvalReport,
    Forecast,
    cross_validate,
    mae,
    match_cluster,
    predict,
)
from .sentiment import (
    SentimentLexicon,
    SentimentScore,
    load_lexicon,
    score_text,
    tokenize,
)
from .stream import StreamConfig, StreamEvent, run_replay
from .synthfeed import ArchetypeSpec, archetype_curve, generate_corpus

__version__ = "0.1.0"

__all__ = [
    "ArchetypeSpec",
    "ClusterModel",
    "EvalReport",
    "FeatureVector",
    "Forecast",
    "PostTimeline",
    "SentimentLexicon",
    "SentimentScore",
    "StreamConfig",
    "StreamEvent",
    "archetype_curve",
    "assign",
    "cross_validate",
    "describe_clusters",
    "featurize",
    "featurize_corpus",
    "generate_corpus",
    "kmeans",
    "load_corpus",
    "load_lexicon",
    "mae",
    "match_cluster",
    "minibatch_kmeans",
    "predict",
    "run_replay",
    "score_text",
    "tokenize",
]
