"""Thresholding, verdicts, and evaluation metrics.

A request is Malicious when its reconstruction error reaches the threshold;
the boundary itself flags, so an exactly-at-threshold score never slips
through. Metrics expose full-precision values plus a display block that
truncates at four decimals (FPR at three) so a reported ratio never invents
digits the sample counts cannot support.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDistribution,
    EmptyScores,
    LengthMismatch,
    NonFiniteValue,
)
from .ingest import Label

DEFAULT_HISTOGRAM_BINS = 100
DEGENERATE_MARGIN = 1e-6


@dataclass
class ThresholdPolicy:
    """How the decision threshold comes to be.

    strategy "fixed" uses value as-is; "quantile" takes the q-quantile of
    training scores (linear interpolation); "valley" takes the midpoint of
    the lowest-density histogram bin between the primary mode and the score
    maximum. After resolution, resolved_value holds the number actually used
    and fallback_used records whether a degenerate distribution forced the
    max-plus-margin fallback.
    """

    strategy: str
    value: float | None = None
    q: float | None = None
    resolved_value: float | None = None
    fallback_used: bool = False

    def __post_init__(self) -> None:
        if self.strategy not in ("fixed", "quantile", "valley"):
            raise ValueError(f"unknown threshold strategy {self.strategy!r}")
        if self.strategy == "fixed":
            if self.value is None or not math.isfinite(self.value) or self.value <= 0:
                raise ValueError(f"fixed threshold must be finite and > 0, got {self.value}")
        if self.strategy == "quantile":
            if self.q is None or not 0.0 <= self.q <= 1.0:
                raise ValueError(f"quantile must be in [0, 1], got {self.q}")

    @staticmethod
    def parse(spec: str) -> "ThresholdPolicy":
        """Parse "fixed:<v>", "quantile:<q>", or "valley"."""
        name, _, arg = spec.partition(":")
        if name == "fixed":
            return ThresholdPolicy("fixed", value=float(arg))
        if name == "quantile":
            return ThresholdPolicy("quantile", q=float(arg))
        if name == "valley" and not arg:
            return ThresholdPolicy("valley")
        raise ValueError(f"cannot parse threshold spec {spec!r}")

    def describe(self) -> str:
        if self.strategy == "fixed":
            return f"fixed:{self.value!r}"
        if self.strategy == "quantile":
            return f"quantile:{self.q!r}"
        return "valley"


def resolve_threshold(train_scores: np.ndarray, policy: ThresholdPolicy) -> float:
    """Resolve a policy against training scores; records the result on the policy."""
    scores = np.asarray(train_scores, dtype=np.float64)
    if policy.strategy != "fixed":
        if scores.size == 0:
            raise EmptyScores("cannot resolve a threshold from no scores")
        if not np.isfinite(scores).all():
            raise NonFiniteValue("training scores contain non-finite values")

    if policy.strategy == "fixed":
        resolved = float(policy.value)
    elif bool(np.all(scores == scores[0])):
        # Every training score identical: no quantile or valley is
        # meaningful, so sit just above the shared value.
        resolved = float(scores[0]) + DEGENERATE_MARGIN
        policy.fallback_used = True
    elif policy.strategy == "quantile":
        resolved = float(np.quantile(scores, policy.q))
    else:
        resolved = _valley_threshold(scores, policy)

    if resolved <= 0:
        raise DegenerateDistribution(
            f"resolved threshold {resolved!r} is not positive; scores are too degenerate"
        )
    policy.resolved_value = resolved
    return resolved


def _valley_threshold(scores: np.ndarray, policy: ThresholdPolicy) -> float:
    densities, edges = np.histogram(scores, bins=DEFAULT_HISTOGRAM_BINS, density=True)
    mode = int(np.argmax(densities))
    right = densities[mode + 1 :]
    if right.size == 0:
        policy.fallback_used = True
        return float(scores.max()) + DEGENERATE_MARGIN
    k = mode + 1 + int(np.argmin(right))
    return float((edges[k] + edges[k + 1]) / 2.0)


def classify(score: float, threshold: float) -> Label:
    """score < threshold is Normal; the boundary and everything above flag."""
    if not math.isfinite(score):
        raise NonFiniteValue(f"cannot classify non-finite score {score!r}")
    return Label.MALICIOUS if score >= threshold else Label.NORMAL


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with Positive := Malicious."""

    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion(labels: list[Label], verdicts: list[Label]) -> ConfusionMatrix:
    if len(labels) != len(verdicts):
        raise LengthMismatch(f"{len(labels)} labels vs {len(verdicts)} verdicts")
    tp = tn = fp = fn = 0
    for label, verdict in zip(labels, verdicts):
        if label is Label.MALICIOUS:
            if verdict is Label.MALICIOUS:
                tp += 1
            else:
                fn += 1
        else:
            if verdict is Label.MALICIOUS:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


METRIC_NAMES = ("accuracy", "recall", "specificity", "precision", "fpr", "f1")


def _truncate(value: float, places: int) -> float:
    """Decimal truncation for display; rounds float dust away first."""
    text = f"{value:.{places + 8}f}"
    point = text.index(".")
    return float(text[: point + 1 + places])


@dataclass
class MetricsReport:
    confusion: ConfusionMatrix
    values: dict[str, float] = field(default_factory=dict)
    undefined: dict[str, str] = field(default_factory=dict)

    def display(self) -> dict[str, float]:
        """Truncated presentation: four decimals, FPR at three."""
        out = {}
        for name, value in self.values.items():
            out[name] = _truncate(value, 3 if name == "fpr" else 4)
        return out

    def to_json_dict(self) -> dict:
        cm = self.confusion
        return {
            "confusion": {"tp": cm.tp, "tn": cm.tn, "fp": cm.fp, "fn": cm.fn,
                          "total": cm.total},
            "display": self.display(),
            "full_precision": dict(self.values),
            "undefined": dict(self.undefined),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def to_key_value_text(self) -> str:
        cm = self.confusion
        lines = [
            f"tp={cm.tp}",
            f"tn={cm.tn}",
            f"fp={cm.fp}",
            f"fn={cm.fn}",
            f"total={cm.total}",
        ]
        display = self.display()
        for name in METRIC_NAMES:
            if name in self.undefined:
                lines.append(f"{name}=undefined:{self.undefined[name]}")
            else:
                lines.append(f"{name}={display[name]!r}")
        return "\n".join(lines) + "\n"


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """The six standard detection metrics; impossible ratios are flagged
    with a reason instead of being zeroed."""
    report = MetricsReport(confusion=cm)
    values, undefined = report.values, report.undefined

    if cm.total > 0:
        values["accuracy"] = (cm.tp + cm.tn) / cm.total
    else:
        undefined["accuracy"] = "no examples"
    if cm.tp + cm.fn > 0:
        values["recall"] = cm.tp / (cm.tp + cm.fn)
    else:
        undefined["recall"] = "no positive examples"
    if cm.tn + cm.fp > 0:
        values["specificity"] = cm.tn / (cm.tn + cm.fp)
        values["fpr"] = 1.0 - values["specificity"]
    else:
        undefined["specificity"] = "no negative examples"
        undefined["fpr"] = "no negative examples"
    if cm.tp + cm.fp > 0:
        values["precision"] = cm.tp / (cm.tp + cm.fp)
    else:
        undefined["precision"] = "no positive predictions"

    if "precision" in values and "recall" in values:
        p, r = values["precision"], values["recall"]
        if p + r > 0:
            values["f1"] = 2.0 * p * r / (p + r)
        else:
            undefined["f1"] = "precision and recall are both zero"
    else:
        undefined["f1"] = "precision or recall is undefined"
    return report


@dataclass
class ScoreHistogram:
    bin_edges: np.ndarray
    densities: np.ndarray
    n_samples: int

    def to_csv(self) -> str:
        lines = ["bin_lo,bin_hi,density"]
        for lo, hi, d in zip(self.bin_edges[:-1], self.bin_edges[1:], self.densities):
            lines.append(f"{float(lo)!r},{float(hi)!r},{float(d)!r}")
        return "\n".join(lines) + "\n"


def histogram(scores: np.ndarray, bins: int = DEFAULT_HISTOGRAM_BINS) -> ScoreHistogram:
    """Equal-width density histogram over [min, max]; densities integrate to 1."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise EmptyScores("cannot build a histogram from no scores")
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    if not np.isfinite(scores).all():
        raise NonFiniteValue("scores contain non-finite values")
    densities, edges = np.histogram(scores, bins=bins, density=True)
    return ScoreHistogram(bin_edges=edges, densities=densities, n_samples=scores.size)


@dataclass
class ScoreRow:
    request_id: str
    mae: float
    label: Label
    verdict: Label


def scores_to_csv(rows: list[ScoreRow]) -> str:
    """request_id,mae,label,verdict with full-precision error values."""
    lines = ["request_id,mae,label,verdict"]
    for row in rows:
        lines.append(f"{row.request_id},{row.mae!r},{row.label.value},{row.verdict.value}")
    return "\n".join(lines) + "\n"
