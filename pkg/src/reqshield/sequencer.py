"""Token streams to fixed-length integer sequences."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorpusFormatError, EmptyCorpus
from .fileio import atomic_write_text, read_text_tolerant, sha256_bytes
from .lexer import TokenStream

PAD_INDEX = 0
OOV_INDEX = 1

VOCAB_FORMAT_VERSION = 1


@dataclass(frozen=True)
class VocabMap:
    """Token-to-index mapping with reserved indices 0 (pad) and 1 (unseen)."""

    mapping: dict[str, int]

    @property
    def vocab_size(self) -> int:
        return len(self.mapping) + 2

    def lookup(self, token: str) -> int:
        return self.mapping.get(token, OOV_INDEX)


def build_vocab(streams: list[TokenStream]) -> VocabMap:
    """Index emitted tokens from 2 by descending frequency, ties by first appearance."""
    if not streams:
        raise EmptyCorpus("cannot build a vocabulary from no streams")
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    position = 0
    for stream in streams:
        for token in stream.emitted_sequence():
            counts[token] = counts.get(token, 0) + 1
            if token not in first_seen:
                first_seen[token] = position
            position += 1
    ordered = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    return VocabMap(mapping={token: i + 2 for i, token in enumerate(ordered)})


def encode(stream: TokenStream, vocab: VocabMap) -> list[int]:
    """Map a stream's emitted tokens to indices; unseen tokens become OOV."""
    return [vocab.lookup(token) for token in stream.emitted_sequence()]


@dataclass
class PaddedSequence:
    """A fixed-length float64 vector of token indices.

    Values are exact small integers stored as floats so they feed the model
    directly; positions past true_length hold the pad index 0.
    """

    values: np.ndarray
    true_length: int
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.values)


def pad_or_truncate(indices: list[int], length: int) -> PaddedSequence:
    """Post-pad with 0 up to length, or keep the first length indices."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    if any(i < 0 for i in indices):
        raise ValueError("indices must be non-negative")
    values = np.zeros(length, dtype=np.float64)
    kept = indices[:length]
    values[: len(kept)] = kept
    return PaddedSequence(
        values=values,
        true_length=min(len(indices), length),
        truncated=len(indices) > length,
    )


def save_vocab(vocab: VocabMap, length: int, path: str | Path) -> None:
    atomic_write_text(Path(path), vocab_file_text(vocab, length))


def vocab_file_text(vocab: VocabMap, length: int) -> str:
    """Header line, then token<TAB>index rows in index order."""
    lines = [f"vocab_version={VOCAB_FORMAT_VERSION}\tL={length}"]
    for token, index in sorted(vocab.mapping.items(), key=lambda kv: kv[1]):
        lines.append(f"{token}\t{index}")
    return "\n".join(lines) + "\n"


def vocab_sha256(vocab: VocabMap, length: int) -> str:
    return sha256_bytes(vocab_file_text(vocab, length).encode("utf-8"))


def load_vocab(path: str | Path) -> tuple[VocabMap, int]:
    path = Path(path)
    lines = read_text_tolerant(path).splitlines()
    if not lines:
        raise CorpusFormatError("empty vocab file", path=str(path))
    header = lines[0].split("\t")
    if (
        len(header) != 2
        or header[0] != f"vocab_version={VOCAB_FORMAT_VERSION}"
        or not header[1].startswith("L=")
    ):
        raise CorpusFormatError("bad vocab header", path=str(path), line=1)
    try:
        length = int(header[1][2:])
    except ValueError:
        raise CorpusFormatError("bad L in vocab header", path=str(path), line=1) from None
    mapping: dict[str, int] = {}
    for n, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise CorpusFormatError("expected token<TAB>index", path=str(path), line=n)
        try:
            index = int(parts[1])
        except ValueError:
            raise CorpusFormatError(f"bad index {parts[1]!r}", path=str(path), line=n) from None
        if index < 2 or parts[0] in mapping:
            raise CorpusFormatError("invalid or duplicate vocab row", path=str(path), line=n)
        mapping[parts[0]] = index
    if sorted(mapping.values()) != list(range(2, 2 + len(mapping))):
        raise CorpusFormatError("vocab indices must be contiguous from 2", path=str(path))
    return VocabMap(mapping=mapping), length
