"""Request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..pipeline import RunConfig


class TrainOptions(BaseModel):
    """Mirror of RunConfig for the wire; defaults match exactly."""

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

    def to_run_config(self) -> RunConfig:
        return RunConfig(**self.model_dump())


class HealthResponse(BaseModel):
    status: str
    version: str


class SynthRequest(BaseModel):
    out_dir: str
    n_normal: int = Field(ge=0)
    n_attack: int = Field(ge=0)
    seed: int = 0


class SynthResponse(BaseModel):
    out_dir: str
    n_normal: int
    n_anomalous: int


class TrainRequest(BaseModel):
    dataset: str
    out_dir: str
    options: TrainOptions = TrainOptions()


class TrainResponse(BaseModel):
    artifact_dir: str
    epochs: int
    final_train_mae: float
    final_val_mae: float | None
    threshold: float
    threshold_policy: str
    threshold_fallback_used: bool
    n_train: int
    n_held_out: int


class ScoreRequest(BaseModel):
    artifact_dir: str
    dataset: str
    out_path: str
    dataset_format: str = "auto"


class ScoreResponse(BaseModel):
    out_path: str
    n_scored: int
    n_flagged: int


class InlineScoreRequest(BaseModel):
    artifact_dir: str
    requests: list[str]


class InlineScoreItem(BaseModel):
    mae: float
    verdict: str


class InlineScoreResponse(BaseModel):
    threshold: float
    results: list[InlineScoreItem]


class EvalRequest(BaseModel):
    artifact_dir: str
    dataset: str
    out_dir: str
    dataset_format: str = "auto"
    bins: int = Field(default=100, ge=2)
    filter_ambiguous: bool = False


class EvalResponse(BaseModel):
    confusion: dict[str, int]
    metrics: dict[str, float]
    metrics_display: dict[str, float]
    undefined: dict[str, str]
    outputs: dict[str, str]
