"""Tokenization: word/punct segmentation and character-class substitution.

Requests collapse onto a small alphabet: structural words that recur across
training traffic stay verbatim, every other word is replaced by the shape of
its characters, and punctuation runs always pass through unchanged. Character
classes are ASCII-only by design; anything outside [0-9A-Za-z] counts as
punctuation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import CorpusFormatError, EmptyCorpus, EmptyToken
from .fileio import atomic_write_text, read_text_tolerant
from .ingest import Label, LabeledCorpus, RawRequest


class TokenKind(str, Enum):
    WORD = "word"
    PUNCT = "punct"


NUMERIC = "Numeric"
LOWER_ALPHA = "LowerAlpha"
UPPER_ALPHA = "UpperAlpha"
CAPITAL_LOWER_ALPHA = "CapitalLowerAlpha"
ALPHA_NUM = "AlphaNum"
SPECIAL_CHAR = "SpecialChar"
MIXED_OTHER = "MixedOther"

CHAR_CLASSES = (
    NUMERIC,
    LOWER_ALPHA,
    UPPER_ALPHA,
    CAPITAL_LOWER_ALPHA,
    ALPHA_NUM,
    SPECIAL_CHAR,
    MIXED_OTHER,
)

_DIGITS = frozenset("0123456789")
_LOWER = frozenset("abcdefghijklmnopqrstuvwxyz")
_UPPER = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZ")
_ALNUM = _DIGITS | _LOWER | _UPPER


def classify(text: str) -> str:
    """Map a token to its character class.

    The checks run in a fixed precedence order, so every non-empty string
    lands in exactly one class.
    """
    if not text:
        raise EmptyToken("cannot classify an empty token")
    chars = set(text)
    if chars <= _DIGITS:
        return NUMERIC
    if chars <= _LOWER:
        return LOWER_ALPHA
    if chars <= _UPPER:
        return UPPER_ALPHA
    if len(text) >= 2 and text[0] in _UPPER and set(text[1:]) <= _LOWER:
        return CAPITAL_LOWER_ALPHA
    if chars <= _ALNUM and (chars & _DIGITS) and (chars & (_LOWER | _UPPER)):
        return ALPHA_NUM
    if not (chars & _ALNUM):
        return SPECIAL_CHAR
    return MIXED_OTHER


@dataclass
class Token:
    text: str
    kind: TokenKind
    emitted: str


@dataclass
class TokenStream:
    """Tokens plus the whitespace between them.

    gaps has len(tokens)+1 entries: the run before the first token, between
    each pair, and after the last. Rejoining gaps and token texts reproduces
    the consumed text exactly.
    """

    tokens: list[Token] = field(default_factory=list)
    gaps: list[str] = field(default_factory=lambda: [""])
    origin: str = ""

    def rejoin(self) -> str:
        parts = [self.gaps[0]]
        for token, gap in zip(self.tokens, self.gaps[1:]):
            parts.append(token.text)
            parts.append(gap)
        return "".join(parts)

    def emitted_sequence(self) -> list[str]:
        return [t.emitted for t in self.tokens]


# Word = maximal run of ASCII alphanumerics; whitespace = the six ASCII blanks;
# Punct = maximal run of everything else (non-ASCII included).
_SEGMENT_RE = re.compile(r"([0-9A-Za-z]+)|([ \t\n\r\x0b\x0c]+)|([^0-9A-Za-z \t\n\r\x0b\x0c]+)")


def segment(text: str, origin: str = "") -> TokenStream:
    """Split text into alternating Word/Punct tokens, recording whitespace."""
    stream = TokenStream(origin=origin)
    for match in _SEGMENT_RE.finditer(text):
        word, ws, punct = match.groups()
        if ws is not None:
            stream.gaps[-1] += ws
            continue
        if word is not None:
            stream.tokens.append(Token(word, TokenKind.WORD, word))
        else:
            stream.tokens.append(Token(punct, TokenKind.PUNCT, punct))
        stream.gaps.append("")
    return stream


@dataclass(frozen=True)
class KeepList:
    """Words frequent enough across training traffic to stay verbatim."""

    verbatim_tokens: frozenset[str]
    min_support: float


def consumed_text(req: RawRequest, include_headers: bool = False) -> str:
    """The portion of a request the tokenizer sees.

    Header lines are skipped unless asked for; their values are dominated by
    client noise rather than application structure.
    """
    parts = [req.method, req.target]
    if include_headers:
        parts.extend(f"{name}: {value}" for name, value in req.headers)
    if req.body:
        parts.append(req.body)
    return "\n".join(parts)


def build_keep_list(
    corpus: LabeledCorpus, min_support: float = 0.1, include_headers: bool = False
) -> KeepList:
    """Collect Word tokens whose document frequency reaches min_support.

    Document frequency counts requests containing the word at least once,
    divided by the number of requests. min_support = 0.0 keeps every word.
    """
    if not 0.0 <= min_support <= 1.0:
        raise ValueError(f"min_support must be in [0, 1], got {min_support}")
    if not corpus.entries:
        raise EmptyCorpus("cannot build a keep list from an empty corpus")
    if any(e.label is not Label.NORMAL for e in corpus.entries):
        raise ValueError("keep list must be built from Normal entries only")
    doc_freq: dict[str, int] = {}
    for entry in corpus.entries:
        stream = segment(consumed_text(entry.request, include_headers))
        for word in {t.text for t in stream.tokens if t.kind is TokenKind.WORD}:
            doc_freq[word] = doc_freq.get(word, 0) + 1
    n = len(corpus.entries)
    kept = frozenset(w for w, c in doc_freq.items() if c / n >= min_support)
    return KeepList(verbatim_tokens=kept, min_support=min_support)


def tokenize_request(
    req: RawRequest, keep: KeepList, include_headers: bool = False
) -> TokenStream:
    """Tokenize a request into the emitted alphabet.

    Punctuation runs pass through verbatim; words on the keep list pass
    through verbatim; every other word is replaced by its character class.
    """
    stream = segment(consumed_text(req, include_headers))
    for token in stream.tokens:
        if token.kind is TokenKind.WORD and token.text not in keep.verbatim_tokens:
            token.emitted = classify(token.text)
    return stream


def save_keep_list(keep: KeepList, path: str | Path) -> None:
    """Serialize as a min_support= header plus sorted tokens, one per line."""
    lines = [f"min_support={keep.min_support!r}"]
    lines.extend(sorted(keep.verbatim_tokens))
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def load_keep_list(path: str | Path) -> KeepList:
    path = Path(path)
    lines = read_text_tolerant(path).splitlines()
    if not lines or not lines[0].startswith("min_support="):
        raise CorpusFormatError("missing min_support= header", path=str(path), line=1)
    try:
        min_support = float(lines[0].split("=", 1)[1])
    except ValueError:
        raise CorpusFormatError("bad min_support value", path=str(path), line=1) from None
    tokens = frozenset(line for line in lines[1:] if line != "")
    return KeepList(verbatim_tokens=tokens, min_support=min_support)
