"""End-to-end orchestration and the on-disk artifact.

A training run turns (config, dataset) into an artifact directory holding
everything scoring needs: keep list, vocabulary, model checkpoint, threshold,
training history, training scores, and the training split itself. Every file
is content-hashed into manifest.json and written atomically; no output embeds
wall-clock state, so identical inputs produce bit-identical artifacts.
"""

from __future__ import annotations

import dataclasses
import json
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import detector, ensemble, ingest, lexer, sequencer
from .errors import EXIT_USAGE, ArtifactMismatch, ReqShieldError, StageError
from .fileio import atomic_write_text, read_text_tolerant, sha256_file

MANIFEST_FORMAT_VERSION = 1

MANIFEST_NAME = "manifest.json"
KEEP_LIST_NAME = "keep_list.txt"
VOCAB_NAME = "vocab.tsv"
MODEL_NAME = "model.bin"
THRESHOLD_NAME = "threshold.json"
HISTORY_NAME = "history.csv"
TRAIN_SCORES_NAME = "train_scores.csv"
TRAIN_SPLIT_NAME = "train_split.jsonl"

HASHED_FILES = (
    KEEP_LIST_NAME,
    VOCAB_NAME,
    MODEL_NAME,
    THRESHOLD_NAME,
    HISTORY_NAME,
    TRAIN_SCORES_NAME,
    TRAIN_SPLIT_NAME,
)


@dataclass
class RunConfig:
    """Everything that, together with the dataset, determines a training run."""

    sequence_length: int = 50
    min_support: float = 0.1
    epochs: int = 90
    batch_size: int = 32
    learning_rate: float = 0.002
    seed: int = 7
    threshold: str = "quantile:0.995"
    train_fraction: float = 0.8
    validation_fraction: float = 0.2
    include_headers: bool = False
    scale_values: bool = False
    encoder_widths: tuple[int, int] = (50, 25)
    dataset_format: str = "auto"
    train_mode: str = "joint"
    filter_ambiguous: bool = False

    def __post_init__(self) -> None:
        self.encoder_widths = tuple(self.encoder_widths)
        if self.sequence_length < 1:
            raise ValueError("sequence_length must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if len(self.encoder_widths) != 2 or any(w < 1 for w in self.encoder_widths):
            raise ValueError("encoder_widths must be two positive integers")
        detector.ThresholdPolicy.parse(self.threshold)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["encoder_widths"] = list(self.encoder_widths)
        return out

    @staticmethod
    def from_dict(data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return RunConfig(**data)


_BOOL_STRINGS = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def parse_config_overrides(pairs: dict[str, str], base: RunConfig | None = None) -> RunConfig:
    """Apply key=value string overrides (config files, CLI) onto a RunConfig."""
    data = (base or RunConfig()).to_dict()
    field_types = {f.name: f for f in dataclasses.fields(RunConfig)}
    for key, raw in pairs.items():
        if key not in field_types:
            raise ValueError(f"unknown config key {key!r}")
        current = data[key]
        if key == "encoder_widths":
            data[key] = [int(part) for part in raw.split(",")]
        elif isinstance(current, bool):
            try:
                data[key] = _BOOL_STRINGS[raw.strip().lower()]
            except KeyError:
                raise ValueError(f"bad boolean for {key}: {raw!r}") from None
        elif isinstance(current, int):
            data[key] = int(raw)
        elif isinstance(current, float):
            data[key] = float(raw)
        else:
            data[key] = raw
    return RunConfig.from_dict(data)


def read_config_file(path: str | Path) -> dict[str, str]:
    """Read a key=value config file; blank lines and # comments are skipped."""
    pairs: dict[str, str] = {}
    for n, line in enumerate(read_text_tolerant(Path(path)).splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            raise ValueError(f"{path}:{n}: expected key=value, got {line!r}")
        pairs[key.strip()] = value.strip()
    return pairs


@contextmanager
def stage(name: str):
    """Tag any failure with the pipeline stage it happened in."""
    try:
        yield
    except StageError:
        raise
    except (ReqShieldError, OSError) as exc:
        raise StageError(name, exc) from exc
    except ValueError as exc:
        err = StageError(name, exc)
        err.exit_code = EXIT_USAGE
        raise err from exc


def _encode_matrix(
    corpus_entries,
    keep: lexer.KeepList,
    vocab: sequencer.VocabMap,
    config: RunConfig,
) -> np.ndarray:
    rows = np.zeros((len(corpus_entries), config.sequence_length), dtype=np.float64)
    for i, entry in enumerate(corpus_entries):
        stream = lexer.tokenize_request(entry.request, keep, config.include_headers)
        padded = sequencer.pad_or_truncate(
            sequencer.encode(stream, vocab), config.sequence_length
        )
        rows[i] = padded.values
    if config.scale_values:
        rows /= max(vocab.vocab_size - 1, 1)
    return rows


@dataclass
class TrainResult:
    artifact_dir: Path
    config: RunConfig
    model: ensemble.EnsembleModel
    history: ensemble.TrainHistory
    policy: detector.ThresholdPolicy
    threshold: float
    n_train: int
    n_held_out: int
    train_rows: list[detector.ScoreRow]


def train_pipeline(dataset: str | Path, out_dir: str | Path, config: RunConfig) -> TrainResult:
    """Load, split, tokenize, encode, train, resolve the threshold, and write
    the artifact directory."""
    out_dir = Path(out_dir)

    with stage("ingest"):
        corpus = ingest.load_corpus(dataset, config.dataset_format)
        if config.filter_ambiguous:
            corpus = ingest.filter_ambiguous(corpus)

    with stage("split"):
        train_corpus, held_out = ingest.split_corpus(
            corpus, config.train_fraction, config.seed
        )

    with stage("tokenize"):
        keep = lexer.build_keep_list(train_corpus, config.min_support, config.include_headers)
        streams = [
            lexer.tokenize_request(e.request, keep, config.include_headers)
            for e in train_corpus
        ]

    with stage("encode"):
        vocab = sequencer.build_vocab(streams)
        vocab_sha = sequencer.vocab_sha256(vocab, config.sequence_length)
        x = _encode_matrix(train_corpus.entries, keep, vocab, config)

    with stage("train"):
        model = ensemble.build_ensemble(
            config.sequence_length, config.seed, vocab_sha, config.encoder_widths
        )
        history = ensemble.train_ensemble(
            model,
            x,
            ensemble.TrainConfig(
                epochs=config.epochs,
                batch_size=config.batch_size,
                learning_rate=config.learning_rate,
                validation_fraction=config.validation_fraction,
                train_mode=config.train_mode,
            ),
        )

    with stage("threshold"):
        policy = detector.ThresholdPolicy.parse(config.threshold)
        train_scores = ensemble.score_matrix(model, x)
        threshold = detector.resolve_threshold(train_scores, policy)

    with stage("write"):
        train_rows = [
            detector.ScoreRow(
                request_id=entry.request_id,
                mae=float(s),
                label=entry.label,
                verdict=detector.classify(float(s), threshold),
            )
            for entry, s in zip(train_corpus.entries, train_scores)
        ]
        _write_artifact(out_dir, config, keep, vocab, model, policy, history, train_rows,
                        train_corpus)

    return TrainResult(
        artifact_dir=out_dir,
        config=config,
        model=model,
        history=history,
        policy=policy,
        threshold=threshold,
        n_train=len(train_corpus),
        n_held_out=len(held_out),
        train_rows=train_rows,
    )


def _threshold_json(policy: detector.ThresholdPolicy) -> str:
    payload = {
        "strategy": policy.strategy,
        "value": policy.value,
        "q": policy.q,
        "resolved_value": policy.resolved_value,
        "fallback_used": policy.fallback_used,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _write_artifact(
    out_dir: Path,
    config: RunConfig,
    keep: lexer.KeepList,
    vocab: sequencer.VocabMap,
    model: ensemble.EnsembleModel,
    policy: detector.ThresholdPolicy,
    history: ensemble.TrainHistory,
    train_rows: list[detector.ScoreRow],
    train_corpus: ingest.LabeledCorpus,
) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    lexer.save_keep_list(keep, out_dir / KEEP_LIST_NAME)
    sequencer.save_vocab(vocab, config.sequence_length, out_dir / VOCAB_NAME)
    ensemble.save_checkpoint(model, out_dir / MODEL_NAME)
    atomic_write_text(out_dir / THRESHOLD_NAME, _threshold_json(policy))
    atomic_write_text(out_dir / HISTORY_NAME, history.to_csv())
    atomic_write_text(out_dir / TRAIN_SCORES_NAME, detector.scores_to_csv(train_rows))
    ingest.write_corpus_cache(train_corpus, out_dir / TRAIN_SPLIT_NAME)

    manifest = {
        "format_version": MANIFEST_FORMAT_VERSION,
        "config": config.to_dict(),
        "vocab_sha256": model.vocab_sha256,
        "files": {name: sha256_file(out_dir / name) for name in HASHED_FILES},
    }
    atomic_write_text(out_dir / MANIFEST_NAME, json.dumps(manifest, sort_keys=True, indent=2) + "\n")


@dataclass
class LoadedArtifact:
    path: Path
    config: RunConfig
    keep: lexer.KeepList
    vocab: sequencer.VocabMap
    model: ensemble.EnsembleModel
    threshold: float
    threshold_info: dict

    def encode_corpus(self, entries) -> np.ndarray:
        return _encode_matrix(entries, self.keep, self.vocab, self.config)

    def score_entries(self, entries) -> list[detector.ScoreRow]:
        x = self.encode_corpus(entries)
        scores = ensemble.score_matrix(self.model, x)
        return [
            detector.ScoreRow(
                request_id=e.request_id,
                mae=float(s),
                label=e.label,
                verdict=detector.classify(float(s), self.threshold),
            )
            for e, s in zip(entries, scores)
        ]

    def score_texts(self, texts: list[str]) -> list[tuple[float, ingest.Label]]:
        """Score raw request texts (no labels): (mae, verdict) per text."""
        entries = [
            ingest.CorpusEntry(ingest.parse_raw_http(t), ingest.Label.NORMAL, f"inline#{i}")
            for i, t in enumerate(texts)
        ]
        x = self.encode_corpus(entries)
        scores = ensemble.score_matrix(self.model, x)
        return [
            (float(s), detector.classify(float(s), self.threshold)) for s in scores
        ]


def load_artifact(path: str | Path) -> LoadedArtifact:
    """Load and verify an artifact directory.

    Every hashed file must match its manifest digest, and the checkpoint must
    reference the vocabulary it sits next to; any mismatch refuses to load.
    """
    path = Path(path)
    with stage("artifact"):
        manifest_path = path / MANIFEST_NAME
        if not manifest_path.is_file():
            raise ArtifactMismatch(f"no {MANIFEST_NAME} in {path}")
        try:
            manifest = json.loads(read_text_tolerant(manifest_path))
        except json.JSONDecodeError as exc:
            raise ArtifactMismatch(f"bad manifest: {exc}") from exc
        if manifest.get("format_version") != MANIFEST_FORMAT_VERSION:
            raise ArtifactMismatch(
                f"unsupported manifest format_version {manifest.get('format_version')!r}"
            )
        for name, expected in manifest.get("files", {}).items():
            target = path / name
            if not target.is_file():
                raise ArtifactMismatch(f"artifact file {name} is missing")
            actual = sha256_file(target)
            if actual != expected:
                raise ArtifactMismatch(
                    f"artifact file {name} is corrupt (sha256 {actual[:12]}... != "
                    f"{expected[:12]}...)"
                )

        config = RunConfig.from_dict(manifest["config"])
        keep = lexer.load_keep_list(path / KEEP_LIST_NAME)
        vocab, length = sequencer.load_vocab(path / VOCAB_NAME)
        if length != config.sequence_length:
            raise ArtifactMismatch(
                f"vocab L={length} does not match config sequence_length="
                f"{config.sequence_length}"
            )
        vocab_sha = sequencer.vocab_sha256(vocab, length)
        model = ensemble.load_checkpoint(path / MODEL_NAME, expected_vocab_sha256=vocab_sha)
        if model.length != config.sequence_length:
            raise ArtifactMismatch("checkpoint length does not match config")

        threshold_info = json.loads(read_text_tolerant(path / THRESHOLD_NAME))
        resolved = threshold_info.get("resolved_value")
        if not isinstance(resolved, (int, float)) or resolved <= 0:
            raise ArtifactMismatch(f"threshold file has no usable resolved_value: {resolved!r}")

    return LoadedArtifact(
        path=path,
        config=config,
        keep=keep,
        vocab=vocab,
        model=model,
        threshold=float(resolved),
        threshold_info=threshold_info,
    )


@dataclass
class ScoreSummary:
    out_path: Path
    n_scored: int
    n_flagged: int


def score_pipeline(
    artifact_dir: str | Path,
    dataset: str | Path,
    out_path: str | Path,
    dataset_format: str = "auto",
) -> ScoreSummary:
    """Score a dataset with a stored artifact and write the scores CSV."""
    artifact = load_artifact(artifact_dir)
    with stage("ingest"):
        corpus = ingest.load_corpus(dataset, dataset_format)
    with stage("score"):
        rows = artifact.score_entries(corpus.entries)
    with stage("write"):
        out_path = Path(out_path)
        atomic_write_text(out_path, detector.scores_to_csv(rows))
    flagged = sum(1 for r in rows if r.verdict is ingest.Label.MALICIOUS)
    return ScoreSummary(out_path=out_path, n_scored=len(rows), n_flagged=flagged)


@dataclass
class EvalResult:
    confusion: detector.ConfusionMatrix
    report: detector.MetricsReport
    rows: list[detector.ScoreRow]
    outputs: dict[str, Path]


def eval_pipeline(
    artifact_dir: str | Path,
    dataset: str | Path,
    out_dir: str | Path,
    dataset_format: str = "auto",
    bins: int = detector.DEFAULT_HISTOGRAM_BINS,
    apply_filter: bool = False,
) -> EvalResult:
    """Score a labeled dataset, compare verdicts to labels, write reports."""
    artifact = load_artifact(artifact_dir)
    with stage("ingest"):
        corpus = ingest.load_corpus(dataset, dataset_format)
        if apply_filter:
            corpus = ingest.filter_ambiguous(corpus)
    with stage("score"):
        rows = artifact.score_entries(corpus.entries)
    with stage("evaluate"):
        cm = detector.confusion([r.label for r in rows], [r.verdict for r in rows])
        report = detector.metrics(cm)
        hist = detector.histogram(np.array([r.mae for r in rows]), bins=bins)
    with stage("write"):
        out_dir = Path(out_dir)
        outputs = {
            "scores_csv": out_dir / "scores.csv",
            "histogram_csv": out_dir / "histogram.csv",
            "metrics_json": out_dir / "metrics.json",
            "metrics_txt": out_dir / "metrics.txt",
        }
        atomic_write_text(outputs["scores_csv"], detector.scores_to_csv(rows))
        atomic_write_text(outputs["histogram_csv"], hist.to_csv())
        atomic_write_text(outputs["metrics_json"], report.to_json())
        atomic_write_text(outputs["metrics_txt"], report.to_key_value_text())
    return EvalResult(confusion=cm, report=report, rows=rows, outputs=outputs)


def synth_pipeline(
    n_normal: int, n_attack: int, seed: int, out_dir: str | Path
) -> dict[str, int]:
    """Generate and write a synthetic corpus under out_dir."""
    with stage("synth"):
        corpus = ingest.synthesize_corpus(n_normal, n_attack, seed)
        return ingest.write_corpus_dir(corpus, out_dir)
