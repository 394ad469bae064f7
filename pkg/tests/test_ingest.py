from __future__ import annotations

import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reqshield.errors import (
    CorpusFormatError,
    EmptyCorpus,
    InsufficientData,
    MalformedRequest,
)
from reqshield.ingest import (
    DEFAULT_ATTACK_RULES,
    OVERFLOW_PAYLOADS,
    SQLI_PAYLOADS,
    XSS_PAYLOADS,
    CorpusFormat,
    Label,
    filter_ambiguous,
    load_corpus,
    parse_label,
    parse_raw_http,
    serialize,
    split_corpus,
    synthesize_corpus,
    write_corpus_cache,
    write_corpus_dir,
)

SIMPLE_GET = "GET /tienda1/publico/productos.jsp?categoria=1 HTTP/1.1\r\nHost: localhost\r\n\r\n"
SIMPLE_POST = (
    "POST /tienda1/publico/pagar.jsp HTTP/1.1\r\n"
    "Host: localhost\r\n"
    "Content-Type: application/x-www-form-urlencoded\r\n"
    "Content-Length: 21\r\n"
    "\r\n"
    "modo=insertar&B1=Pasar"
)


# ---------------------------------------------------------------------------
# Raw request parsing
# ---------------------------------------------------------------------------


def test_parse_simple_get():
    req = parse_raw_http(SIMPLE_GET)
    assert req.method == "GET"
    assert req.target == "/tienda1/publico/productos.jsp?categoria=1"
    assert req.version == "HTTP/1.1"
    assert req.headers == [("Host", "localhost")]
    assert req.body == ""


def test_parse_post_body():
    req = parse_raw_http(SIMPLE_POST)
    assert req.method == "POST"
    assert req.body == "modo=insertar&B1=Pasar"
    assert ("Content-Length", "21") in req.headers


def test_parse_preserves_odd_spacing():
    text = "  GET   /x \tHTTP/1.1\nHost:  h \nX-No-Colon-Line\n\nbody stays\nverbatim"
    req = parse_raw_http(text)
    assert req.method == "GET"
    assert req.target == "/x"
    assert req.headers == [("Host", "h"), ("X-No-Colon-Line", "")]
    assert req.body == "body stays\nverbatim"
    assert serialize(req) == text


def test_parse_request_line_only():
    req = parse_raw_http("GET")
    assert req.method == "GET"
    assert req.target == ""
    assert req.version == ""
    assert serialize(req) == "GET"


def test_parse_rejects_empty_and_blank():
    with pytest.raises(MalformedRequest):
        parse_raw_http("")
    with pytest.raises(MalformedRequest):
        parse_raw_http("   \r\nGET /x HTTP/1.1\r\n\r\n")


@given(st.text(max_size=300))
def test_parse_round_trips_arbitrary_tails(tail):
    text = "GET /x HTTP/1.1\r\n" + tail
    assert serialize(parse_raw_http(text)) == text


@given(st.sampled_from(["\n", "\r\n"]), st.text(max_size=120), st.text(max_size=120))
def test_parse_round_trips_header_body_shapes(term, header_blob, body):
    text = f"POST /a HTTP/1.1{term}{header_blob}{term}{term}{body}"
    assert serialize(parse_raw_http(text)) == text


# ---------------------------------------------------------------------------
# Labels
# ---------------------------------------------------------------------------


def test_parse_label_aliases():
    for alias in ("normal", "valid", "Normal", "VALID"):
        assert parse_label(alias) is Label.NORMAL
    for alias in ("malicious", "anomalous", "attack", "Attack"):
        assert parse_label(alias) is Label.MALICIOUS
    with pytest.raises(CorpusFormatError):
        parse_label("benign-ish")


# ---------------------------------------------------------------------------
# Loading: directories, sidecars, caches
# ---------------------------------------------------------------------------


def _write_dataset_dir(root):
    (root / "normal").mkdir(parents=True)
    (root / "anomalous").mkdir()
    (root / "normal" / "a.txt").write_text(SIMPLE_GET)
    (root / "normal" / "b.txt").write_text(SIMPLE_POST)
    (root / "anomalous" / "evil.txt").write_text(
        "GET /x?id=1'%20OR%20'1'='1 HTTP/1.1\r\nHost: h\r\n\r\n"
    )


def test_load_corpus_directory(tmp_path):
    _write_dataset_dir(tmp_path)
    corpus = load_corpus(tmp_path)
    assert corpus.counts() == (2, 1)
    assert [e.request_id for e in corpus] == ["normal/a#0", "normal/b#0", "anomalous/evil#0"]
    assert corpus.entries[0].request.raw_text == SIMPLE_GET


def test_load_corpus_directory_requires_label_subdirs(tmp_path):
    (tmp_path / "stuff").mkdir()
    with pytest.raises(CorpusFormatError):
        load_corpus(tmp_path)


def test_load_corpus_missing_path(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "nothing")


def test_load_corpus_blank_line_records_with_sidecar(tmp_path):
    data = tmp_path / "traffic.txt"
    data.write_text(SIMPLE_GET + "\r\n" + SIMPLE_POST + "\n")
    sidecar = tmp_path / "traffic.txt.labels.tsv"
    sidecar.write_text("0\tnormal\n1\tattack\n")
    corpus = load_corpus(data)
    assert corpus.counts() == (1, 1)
    assert corpus.entries[0].label is Label.NORMAL
    assert corpus.entries[1].label is Label.MALICIOUS


def test_load_corpus_file_without_sidecar_fails(tmp_path):
    data = tmp_path / "traffic.txt"
    data.write_text(SIMPLE_GET)
    with pytest.raises(CorpusFormatError):
        load_corpus(data)


def test_load_corpus_sidecar_must_cover_every_record(tmp_path):
    data = tmp_path / "traffic.txt"
    data.write_text(SIMPLE_GET + "\r\n" + SIMPLE_GET)
    (tmp_path / "traffic.txt.labels.tsv").write_text("0\tnormal\n")
    with pytest.raises(CorpusFormatError):
        load_corpus(data)


def test_blank_line_split_keeps_post_bodies_attached(tmp_path):
    # A body containing "word' OR ..." must not be mistaken for a new record.
    attack = (
        "POST /login HTTP/1.1\r\nHost: h\r\n\r\nlogin=' OR '1'='1&pwd=x' OR 'a'='a"
    )
    data = tmp_path / "one.txt"
    data.write_text(attack + "\n\n" + SIMPLE_GET)
    (tmp_path / "one.txt.labels.tsv").write_text("0\tattack\n1\tnormal\n")
    corpus = load_corpus(data)
    assert len(corpus) == 2
    assert corpus.entries[0].request.body == "login=' OR '1'='1&pwd=x' OR 'a'='a\n"


def test_load_corpus_url_encoded_lines(tmp_path):
    data = tmp_path / "lines.txt"
    data.write_text(
        "GET%20/a%3Fx%3D1%20HTTP/1.1\n"
        "GET%20/b%20HTTP/1.1\n"
    )
    (tmp_path / "lines.txt.labels.tsv").write_text("0\tnormal\n1\tnormal\n")
    corpus = load_corpus(data, fmt=CorpusFormat.URL_ENCODED_LINES)
    assert corpus.entries[0].request.target == "/a?x=1"
    assert corpus.entries[1].request.target == "/b"


def test_corpus_cache_round_trip(tmp_path):
    original = synthesize_corpus(8, 4, seed=11)
    cache = tmp_path / "corpus.jsonl"
    write_corpus_cache(original, cache)
    loaded = load_corpus(cache)
    assert len(loaded) == len(original)
    for a, b in zip(original, loaded):
        assert a.request.raw_text == b.request.raw_text
        assert a.label is b.label
    first_line = cache.read_text().splitlines()[0]
    assert '"format_version": 1' in first_line


def test_corpus_cache_rejects_bad_version(tmp_path):
    cache = tmp_path / "corpus.jsonl"
    cache.write_text('{"format_version": 99}\n')
    with pytest.raises(CorpusFormatError):
        load_corpus(cache, fmt=CorpusFormat.CACHE)


# ---------------------------------------------------------------------------
# Ambiguity filtering and splitting
# ---------------------------------------------------------------------------


def test_filter_ambiguous_drops_unmatched_malicious():
    corpus = synthesize_corpus(5, 0, seed=1)
    benign_looking = parse_raw_http("GET /perfectly/fine HTTP/1.1\r\n\r\n")
    corpus.entries.append(
        type(corpus.entries[0])(benign_looking, Label.MALICIOUS, "anomalous/fake")
    )
    filtered = filter_ambiguous(corpus)
    assert filtered.counts() == (5, 0)
    assert filtered.filtered_out == 1


def test_filter_ambiguous_keeps_all_normals_and_real_attacks():
    corpus = synthesize_corpus(10, 10, seed=2)
    filtered = filter_ambiguous(corpus)
    assert filtered.counts() == (10, 10)
    assert filtered.filtered_out == 0


def test_filter_ambiguous_requires_rules():
    with pytest.raises(ValueError):
        filter_ambiguous(synthesize_corpus(2, 0, seed=0), rules=())


def test_split_corpus_counts_and_composition():
    corpus = synthesize_corpus(10, 4, seed=3)
    train, held = split_corpus(corpus, train_fraction=0.8, seed=9)
    assert len(train) == 8
    assert all(e.label is Label.NORMAL for e in train)
    assert len(held) == 2 + 4
    assert sum(1 for e in held if e.label is Label.MALICIOUS) == 4


def test_split_corpus_is_deterministic_and_seed_sensitive():
    corpus = synthesize_corpus(20, 0, seed=4)
    t1, _ = split_corpus(corpus, seed=7)
    t2, _ = split_corpus(corpus, seed=7)
    t3, _ = split_corpus(corpus, seed=8)
    ids = lambda c: [e.request_id for e in c]  # noqa: E731
    assert ids(t1) == ids(t2)
    assert ids(t1) != ids(t3)


def test_split_corpus_validation():
    with pytest.raises(EmptyCorpus):
        split_corpus(synthesize_corpus(0, 0, seed=0))
    with pytest.raises(InsufficientData):
        split_corpus(synthesize_corpus(1, 3, seed=0))
    corpus = synthesize_corpus(10, 0, seed=0)
    with pytest.raises(ValueError):
        split_corpus(corpus, train_fraction=0.0)
    with pytest.raises(ValueError):
        split_corpus(corpus, train_fraction=1.5)
    with pytest.raises(InsufficientData):
        split_corpus(corpus, train_fraction=0.05)


# ---------------------------------------------------------------------------
# Synthetic corpus
# ---------------------------------------------------------------------------


def test_synthesize_is_deterministic():
    a = synthesize_corpus(30, 15, seed=42)
    b = synthesize_corpus(30, 15, seed=42)
    c = synthesize_corpus(30, 15, seed=43)
    assert [e.request.raw_text for e in a] == [e.request.raw_text for e in b]
    assert [e.request.raw_text for e in a] != [e.request.raw_text for e in c]


def test_synthesize_counts_and_labels():
    corpus = synthesize_corpus(12, 5, seed=0)
    assert corpus.counts() == (12, 5)
    assert all(e.request.target.startswith("/tienda1/") for e in corpus)


def test_synthesized_attacks_all_match_a_rule():
    corpus = synthesize_corpus(0, 200, seed=6)
    for entry in corpus:
        text = entry.request.raw_text
        assert any(r.search(text) for r in DEFAULT_ATTACK_RULES)


def test_synthesized_attacks_cover_every_payload_family():
    corpus = synthesize_corpus(0, 300, seed=7)
    texts = [e.request.raw_text for e in corpus]
    assert any("' OR '1'='1" in t for t in texts)
    assert any("<script>" in t for t in texts)
    assert any(re.search(r"(.)\1{511,}", t, re.DOTALL) for t in texts)


def test_payload_banks_contain_published_examples():
    assert "' OR '1'='1" in SQLI_PAYLOADS
    assert any("<script>" in p for p in XSS_PAYLOADS)
    assert any(len(p) > 512 for p in OVERFLOW_PAYLOADS)


def test_write_corpus_dir_round_trip(tmp_path):
    corpus = synthesize_corpus(7, 3, seed=5)
    counts = write_corpus_dir(corpus, tmp_path)
    assert counts == {"normal": 7, "anomalous": 3}
    assert len(list((tmp_path / "normal").iterdir())) == 7
    loaded = load_corpus(tmp_path)
    assert [e.request.raw_text for e in loaded] == [e.request.raw_text for e in corpus]
    assert [e.label for e in loaded] == [e.label for e in corpus]
