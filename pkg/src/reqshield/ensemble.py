"""The reconstruction ensemble and its training loop.

Three autoencoders read the same padded index sequence: an LSTM pair and a
GRU pair (two encoder layers, two mirrored decoder layers, a width-1
per-timestep projection) plus a stacked dense autoencoder on the flat
vector. Their three reconstructions concatenate into one vector that a final
linear compression layer folds back to the input's length; training minimizes
the mean absolute error of that combined reconstruction, and the same error
is the anomaly score at inference time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ArtifactMismatch,
    EmptyCorpus,
    NonFiniteLoss,
    ShapeMismatch,
)
from .neural.layers import Dense, GRULayer, LSTMLayer, TimeDistributedDense
from .neural.loss import mae_loss
from .neural.optim import Nadam
from .neural.tensorio import load_tensors, save_tensors
from .sequencer import PaddedSequence

DEFAULT_ENCODER_WIDTHS = (50, 25)
CHECKPOINT_KIND = "request-autoencoder-ensemble"

# Fixed chunk size for batched scoring. Scoring in deterministic chunks keeps
# every score byte-reproducible across train-time and CLI-time computation.
SCORE_BATCH = 256


class RecurrentAutoencoder:
    """Encoder widths (w1, w2), mirrored decoder, width-1 output projection."""

    def __init__(self, cell_cls, length: int, widths: tuple[int, int], *,
                 rng: np.random.Generator):
        w1, w2 = widths
        self.length = length
        self.enc1 = cell_cls(1, w1, rng=rng)
        self.enc2 = cell_cls(w1, w2, rng=rng)
        self.dec1 = cell_cls(w2, w2, rng=rng)
        self.dec2 = cell_cls(w2, w1, rng=rng)
        self.proj = TimeDistributedDense(w1, 1, "linear", rng=rng)

    def layers(self):
        return (
            ("enc1", self.enc1),
            ("enc2", self.enc2),
            ("dec1", self.dec1),
            ("dec2", self.dec2),
            ("proj", self.proj),
        )

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, tuple]:
        seq = x[:, :, None]
        h1, c1 = self.enc1.forward_sequence(seq)
        h2, c2 = self.enc2.forward_sequence(h1)
        d1, c3 = self.dec1.forward_sequence(h2)
        d2, c4 = self.dec2.forward_sequence(d1)
        y, c5 = self.proj.forward(d2)
        return y[:, :, 0], (c1, c2, c3, c4, c5)

    def backward(self, d_out: np.ndarray, cache: tuple) -> None:
        c1, c2, c3, c4, c5 = cache
        dd2 = self.proj.backward(d_out[:, :, None], c5)
        dd1 = self.dec2.backward_sequence(dd2, c4)
        dh2 = self.dec1.backward_sequence(dd1, c3)
        dh1 = self.enc2.backward_sequence(dh2, c2)
        self.enc1.backward_sequence(dh1, c1)


class StackedAutoencoder:
    """Linear dense chain w1-w2-w2-w1 on the flat vector, plus a projection
    back to the input length when w1 differs from it."""

    def __init__(self, length: int, widths: tuple[int, int], *, rng: np.random.Generator):
        w1, w2 = widths
        self.length = length
        dims = [length, w1, w2, w2, w1]
        if w1 != length:
            dims.append(length)
        self.denses = [
            Dense(dims[i], dims[i + 1], "linear", rng=rng) for i in range(len(dims) - 1)
        ]

    def layers(self):
        return tuple((f"d{i + 1}", layer) for i, layer in enumerate(self.denses))

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list]:
        caches = []
        out = x
        for layer in self.denses:
            out, cache = layer.forward(out)
            caches.append(cache)
        return out, caches

    def backward(self, d_out: np.ndarray, caches: list) -> None:
        grad = d_out
        for layer, cache in zip(reversed(self.denses), reversed(caches)):
            grad = layer.backward(grad, cache)


class EnsembleModel:
    """The full detector model: three autoencoders and a compression head."""

    def __init__(
        self,
        length: int,
        seed: int,
        vocab_sha256: str,
        encoder_widths: tuple[int, int] = DEFAULT_ENCODER_WIDTHS,
    ):
        if length < 1:
            raise ValueError(f"length must be >= 1, got {length}")
        self.length = length
        self.seed = seed
        self.vocab_sha256 = vocab_sha256
        self.encoder_widths = tuple(encoder_widths)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
        self.lstm = RecurrentAutoencoder(LSTMLayer, length, self.encoder_widths, rng=rng)
        self.gru = RecurrentAutoencoder(GRULayer, length, self.encoder_widths, rng=rng)
        self.stacked = StackedAutoencoder(length, self.encoder_widths, rng=rng)
        self.compression = Dense(3 * length, length, "linear", rng=rng)

    def submodels(self):
        return (("lstm", self.lstm), ("gru", self.gru), ("stacked", self.stacked))

    def _named_layers(self):
        for sub_name, sub in self.submodels():
            for layer_name, layer in sub.layers():
                yield f"{sub_name}.{layer_name}", layer
        yield "compression", self.compression

    def named_parameters(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for prefix, layer in self._named_layers():
            for pname, value in layer.params.items():
                out[f"{prefix}.{pname}"] = value
        return out

    def named_gradients(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for prefix, layer in self._named_layers():
            for pname, value in layer.grads.items():
                out[f"{prefix}.{pname}"] = value
        return out

    def zero_grads(self) -> None:
        for _, layer in self._named_layers():
            layer.zero_grads()

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, dict]:
        """x is (B, L); returns the combined reconstruction and a cache."""
        if x.ndim != 2 or x.shape[1] != self.length:
            raise ShapeMismatch(f"expected (B, {self.length}), got {x.shape}")
        parts = {}
        caches = {}
        for name, sub in self.submodels():
            parts[name], caches[name] = sub.forward(x)
        concat = np.concatenate([parts["lstm"], parts["gru"], parts["stacked"]], axis=1)
        x_hat, comp_cache = self.compression.forward(concat)
        caches["compression"] = comp_cache
        caches["parts"] = parts
        return x_hat, caches

    def backward(self, d_xhat: np.ndarray, caches: dict) -> None:
        d_concat = self.compression.backward(d_xhat, caches["compression"])
        L = self.length
        self.lstm.backward(d_concat[:, :L], caches["lstm"])
        self.gru.backward(d_concat[:, L : 2 * L], caches["gru"])
        self.stacked.backward(d_concat[:, 2 * L :], caches["stacked"])


def build_ensemble(
    length: int,
    seed: int,
    vocab_sha256: str,
    encoder_widths: tuple[int, int] = DEFAULT_ENCODER_WIDTHS,
) -> EnsembleModel:
    return EnsembleModel(length, seed, vocab_sha256, encoder_widths)


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------


def score_batch(model: EnsembleModel, x: np.ndarray) -> np.ndarray:
    """Per-row mean absolute reconstruction error for a (B, L) batch."""
    x_hat, _ = model.forward(x)
    return np.mean(np.abs(x_hat - x), axis=1)


def score_matrix(model: EnsembleModel, x: np.ndarray) -> np.ndarray:
    """Score (N, L) rows in fixed-size chunks; empty input scores to empty."""
    if x.ndim != 2 or x.shape[1] != model.length:
        raise ShapeMismatch(f"expected (N, {model.length}), got {x.shape}")
    if x.shape[0] == 0:
        return np.zeros(0, dtype=np.float64)
    chunks = [
        score_batch(model, x[i : i + SCORE_BATCH]) for i in range(0, x.shape[0], SCORE_BATCH)
    ]
    return np.concatenate(chunks)


def score(model: EnsembleModel, seq: PaddedSequence) -> float:
    """Anomaly score of one padded sequence."""
    if len(seq.values) != model.length:
        raise ShapeMismatch(
            f"sequence length {len(seq.values)} does not match model length {model.length}"
        )
    return float(score_batch(model, seq.values[None, :])[0])


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass
class TrainConfig:
    epochs: int = 90
    batch_size: int = 32
    learning_rate: float = 0.002
    validation_fraction: float = 0.2
    train_mode: str = "joint"  # or "pretrain"


@dataclass
class EpochStats:
    epoch: int
    train_mae: float
    val_mae: float


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["epoch,train_mae,val_mae"]
        for row in self.epochs:
            lines.append(f"{row.epoch},{row.train_mae!r},{row.val_mae!r}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_csv(text: str) -> "TrainHistory":
        lines = [ln for ln in text.splitlines() if ln]
        if not lines or lines[0] != "epoch,train_mae,val_mae":
            raise ArtifactMismatch("bad history header")
        history = TrainHistory()
        for line in lines[1:]:
            epoch, train_mae, val_mae = line.split(",")
            history.epochs.append(EpochStats(int(epoch), float(train_mae), float(val_mae)))
        return history


def _snapshot(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: v.copy() for k, v in params.items()}


def _restore(params: dict[str, np.ndarray], snapshot: dict[str, np.ndarray]) -> None:
    for k, v in params.items():
        v[...] = snapshot[k]


def _all_finite(params: dict[str, np.ndarray]) -> bool:
    return all(np.isfinite(v).all() for v in params.values())


def train_ensemble(
    model: EnsembleModel, x: np.ndarray, config: TrainConfig | None = None
) -> TrainHistory:
    """Train on (N, L) normal-traffic rows; returns per-epoch history.

    The last validation_fraction of rows is held aside for the val_mae
    column (callers pass rows in the split's shuffled order, so the slice is
    unbiased). Shuffling draws from a generator derived from the model seed,
    which makes two runs with the same data and config bit-identical. A
    non-finite loss or parameter aborts with the model restored to the last
    epoch boundary that was finite.
    """
    config = config or TrainConfig()
    if x.ndim != 2 or x.shape[1] != model.length:
        raise ShapeMismatch(f"expected (N, {model.length}), got {x.shape}")
    if x.shape[0] == 0:
        raise EmptyCorpus("training set is empty")
    if config.train_mode not in ("joint", "pretrain"):
        raise ValueError(f"unknown train_mode {config.train_mode!r}")
    if not 0.0 <= config.validation_fraction < 1.0:
        raise ValueError("validation_fraction must be in [0, 1)")

    n_val = int(x.shape[0] * config.validation_fraction)
    train_x = x[: x.shape[0] - n_val]
    val_x = x[x.shape[0] - n_val :]
    if train_x.shape[0] == 0:
        raise EmptyCorpus("validation split leaves no training rows")
    shuffle_rng = np.random.default_rng(np.random.SeedSequence(model.seed, spawn_key=(1,)))
    history = TrainHistory()

    if config.train_mode == "pretrain":
        # Each sub-autoencoder learns alone, then freezes while the
        # compression head trains on the combined reconstruction.
        for name, sub in model.submodels():
            params = {
                f"{name}.{layer_name}.{p}": arr
                for layer_name, layer in sub.layers()
                for p, arr in layer.params.items()
            }
            _train_phase(
                model, sub, params, train_x, val_x, config, shuffle_rng, history,
                phase_forward="sub",
            )
        head_params = {f"compression.{p}": arr for p, arr in model.compression.params.items()}
        _train_phase(
            model, None, head_params, train_x, val_x, config, shuffle_rng, history,
            phase_forward="full",
        )
        return history

    params = model.named_parameters()
    _train_phase(
        model, None, params, train_x, val_x, config, shuffle_rng, history,
        phase_forward="full",
    )
    return history


def _train_phase(
    model: EnsembleModel,
    sub,
    params: dict[str, np.ndarray],
    train_x: np.ndarray,
    val_x: np.ndarray,
    config: TrainConfig,
    shuffle_rng: np.random.Generator,
    history: TrainHistory,
    phase_forward: str,
) -> None:
    optimizer = Nadam(params, learning_rate=config.learning_rate)
    snapshot = _snapshot(params)
    n = train_x.shape[0]
    epoch_offset = history.epochs[-1].epoch if history.epochs else 0

    def forward_backward(xb: np.ndarray) -> float:
        model.zero_grads()
        if phase_forward == "sub":
            x_hat, caches = sub.forward(xb)
            loss, grad = mae_loss(x_hat, xb)
            if np.isfinite(loss):
                sub.backward(grad, caches)
        else:
            x_hat, caches = model.forward(xb)
            loss, grad = mae_loss(x_hat, xb)
            if np.isfinite(loss):
                model.backward(grad, caches)
        return loss

    def eval_mae(rows: np.ndarray) -> float:
        if phase_forward == "sub":
            x_hat, _ = sub.forward(rows)
        else:
            x_hat, _ = model.forward(rows)
        return float(np.mean(np.abs(x_hat - rows)))

    grads_all = model.named_gradients()
    grads = {k: grads_all[k] for k in params}
    for epoch in range(1, config.epochs + 1):
        perm = shuffle_rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, config.batch_size):
            xb = train_x[perm[start : start + config.batch_size]]
            loss = forward_backward(xb)
            if not np.isfinite(loss):
                _restore(params, snapshot)
                raise NonFiniteLoss(f"non-finite loss at epoch {epoch_offset + epoch}")
            optimizer.step(grads)
            loss_sum += loss * xb.shape[0]
        if not _all_finite(params):
            _restore(params, snapshot)
            raise NonFiniteLoss(f"non-finite parameters after epoch {epoch_offset + epoch}")
        snapshot = _snapshot(params)
        val_mae = eval_mae(val_x) if val_x.shape[0] else float("nan")
        history.epochs.append(EpochStats(epoch_offset + epoch, loss_sum / n, val_mae))


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(model: EnsembleModel, path) -> None:
    meta = {
        "kind": CHECKPOINT_KIND,
        "length": model.length,
        "seed": model.seed,
        "vocab_sha256": model.vocab_sha256,
        "encoder_widths": list(model.encoder_widths),
    }
    save_tensors(path, model.named_parameters(), meta)


def load_checkpoint(path, expected_vocab_sha256: str | None = None) -> EnsembleModel:
    """Rebuild a model from disk; refuses checkpoints paired with the wrong vocab."""
    tensors, meta = load_tensors(path)
    if meta.get("kind") != CHECKPOINT_KIND:
        raise ArtifactMismatch(f"checkpoint kind {meta.get('kind')!r} is not {CHECKPOINT_KIND!r}")
    if expected_vocab_sha256 is not None and meta.get("vocab_sha256") != expected_vocab_sha256:
        raise ArtifactMismatch("checkpoint was trained against a different vocabulary")
    model = EnsembleModel(
        length=int(meta["length"]),
        seed=int(meta["seed"]),
        vocab_sha256=meta["vocab_sha256"],
        encoder_widths=tuple(meta["encoder_widths"]),
    )
    params = model.named_parameters()
    if set(params) != set(tensors):
        raise ArtifactMismatch("checkpoint tensor names do not match the model")
    for name, arr in params.items():
        if tensors[name].shape != arr.shape:
            raise ArtifactMismatch(f"tensor {name!r} has shape {tensors[name].shape}")
        arr[...] = tensors[name]
    return model
