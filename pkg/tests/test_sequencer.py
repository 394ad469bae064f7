from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reqshield.errors import CorpusFormatError, EmptyCorpus
from reqshield.lexer import segment
from reqshield.sequencer import (
    OOV_INDEX,
    PAD_INDEX,
    VocabMap,
    build_vocab,
    encode,
    load_vocab,
    pad_or_truncate,
    save_vocab,
    vocab_file_text,
    vocab_sha256,
)


def _streams(texts):
    return [segment(t) for t in texts]


def test_reserved_indices():
    assert PAD_INDEX == 0
    assert OOV_INDEX == 1


def test_build_vocab_frequency_then_first_appearance():
    # "a" appears twice, "b" once: a -> 2, b -> 3.
    vocab = build_vocab(_streams(["a b a"]))
    assert vocab.mapping == {"a": 2, "b": 3}
    assert vocab.vocab_size == 4


def test_build_vocab_tie_broken_by_first_appearance():
    vocab = build_vocab(_streams(["x y", "y x"]))
    assert vocab.mapping == {"x": 2, "y": 3}


def test_build_vocab_empty():
    with pytest.raises(EmptyCorpus):
        build_vocab([])


def test_encode_known_and_unknown():
    vocab = build_vocab(_streams(["a b a"]))
    assert encode(segment("a b z"), vocab) == [2, 3, OOV_INDEX]
    assert vocab.lookup("a") == 2
    assert vocab.lookup("zzz") == OOV_INDEX


def test_pad_pads_with_zero():
    seq = pad_or_truncate([2, 3, 4], 6)
    assert seq.values.dtype == np.float64
    assert seq.values.tolist() == [2.0, 3.0, 4.0, 0.0, 0.0, 0.0]
    assert seq.true_length == 3
    assert not seq.truncated


def test_truncate_keeps_prefix():
    seq = pad_or_truncate([2, 3, 4, 5], 2)
    assert seq.values.tolist() == [2.0, 3.0]
    assert seq.true_length == 2
    assert seq.truncated


def test_pad_validation():
    with pytest.raises(ValueError):
        pad_or_truncate([1], 0)
    with pytest.raises(ValueError):
        pad_or_truncate([-1], 4)


@given(
    st.lists(st.integers(min_value=0, max_value=500), max_size=80),
    st.integers(min_value=1, max_value=60),
)
def test_pad_or_truncate_properties(indices, length):
    seq = pad_or_truncate(indices, length)
    assert len(seq.values) == length
    assert seq.true_length == min(len(indices), length)
    assert seq.truncated == (len(indices) > length)
    assert seq.values[: seq.true_length].tolist() == [float(i) for i in indices[:length]]
    assert all(v == 0.0 for v in seq.values[seq.true_length :])


@given(st.lists(st.text(st.characters(min_codepoint=33, max_codepoint=126), min_size=1, max_size=6), min_size=1, max_size=40))
def test_encode_is_total_and_in_range(tokens):
    text = " ".join(tokens)
    streams = _streams([text])
    vocab = build_vocab(streams)
    indices = encode(streams[0], vocab)
    assert len(indices) == len(streams[0].tokens)
    assert all(2 <= i < vocab.vocab_size for i in indices)


def test_vocab_file_text_format():
    vocab = VocabMap(mapping={"LowerAlpha": 2, "/": 3})
    text = vocab_file_text(vocab, 50)
    assert text == "vocab_version=1\tL=50\nLowerAlpha\t2\n/\t3\n"


def test_vocab_round_trip(tmp_path):
    vocab = build_vocab(_streams(["GET /a/b?x=1", "GET /a/c?y=2"]))
    path = tmp_path / "vocab.tsv"
    save_vocab(vocab, 50, path)
    loaded, length = load_vocab(path)
    assert loaded == vocab
    assert length == 50
    assert vocab_sha256(loaded, length) == vocab_sha256(vocab, 50)


def test_vocab_sha_changes_with_length():
    vocab = VocabMap(mapping={"a": 2})
    assert vocab_sha256(vocab, 50) != vocab_sha256(vocab, 51)


@pytest.mark.parametrize(
    "content",
    [
        "",
        "vocab_version=2\tL=50\n",
        "vocab_version=1\tL=fifty\n",
        "vocab_version=1\tL=50\na\t1\n",
        "vocab_version=1\tL=50\na\t2\na\t3\n",
        "vocab_version=1\tL=50\na\t2\nb\t4\n",
        "vocab_version=1\tL=50\na\tx\n",
    ],
)
def test_load_vocab_rejects_malformed(tmp_path, content):
    path = tmp_path / "vocab.tsv"
    path.write_text(content)
    with pytest.raises(CorpusFormatError):
        load_vocab(path)
