"""Anomalous HTTP request detection via reconstruction error.

Requests are tokenized into character-class patterns, encoded as padded
integer sequences, and reconstructed by an ensemble of autoencoders trained
on normal traffic only. Requests whose reconstruction error meets a learned
threshold are flagged as malicious.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .detector import (
    ConfusionMatrix,
    MetricsReport,
    ThresholdPolicy,
    classify,
    confusion,
    metrics,
    resolve_threshold,
)
from .ensemble import (
    EnsembleModel,
    TrainConfig,
    TrainHistory,
    build_ensemble,
    load_checkpoint,
    save_checkpoint,
    score,
    score_matrix,
    train_ensemble,
)
from .errors import (
    ArtifactError,
    DataError,
    NumericError,
    ReqShieldError,
    StageError,
)
from .ingest import (
    CorpusFormat,
    Label,
    LabeledCorpus,
    RawRequest,
    load_corpus,
    parse_raw_http,
    split_corpus,
    synthesize_corpus,
)
from .lexer import KeepList, Token, TokenStream, build_keep_list, tokenize_request
from .lexer import classify as classify_token
from .pipeline import (
    LoadedArtifact,
    RunConfig,
    eval_pipeline,
    load_artifact,
    score_pipeline,
    synth_pipeline,
    train_pipeline,
)
from .sequencer import PaddedSequence, VocabMap, build_vocab, encode, pad_or_truncate

__all__ = [
    "__version__",
    "ArtifactError",
    "ConfusionMatrix",
    "CorpusFormat",
    "DataError",
    "EnsembleModel",
    "KeepList",
    "Label",
    "LabeledCorpus",
    "LoadedArtifact",
    "MetricsReport",
    "NumericError",
    "PaddedSequence",
    "RawRequest",
    "ReqShieldError",
    "RunConfig",
    "StageError",
    "ThresholdPolicy",
    "Token",
    "TokenStream",
    "TrainConfig",
    "TrainHistory",
    "VocabMap",
    "build_ensemble",
    "build_keep_list",
    "build_vocab",
    "classify",
    "classify_token",
    "confusion",
    "encode",
    "eval_pipeline",
    "load_artifact",
    "load_checkpoint",
    "load_corpus",
    "metrics",
    "pad_or_truncate",
    "parse_raw_http",
    "resolve_threshold",
    "save_checkpoint",
    "score",
    "score_matrix",
    "score_pipeline",
    "split_corpus",
    "synth_pipeline",
    "synthesize_corpus",
    "tokenize_request",
    "train_ensemble",
    "train_pipeline",
]
