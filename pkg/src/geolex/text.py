"""Text normalization and tokenization into words, word bigrams and q-grams.

Tokens are carried around as plain string keys so aggregation can use
``collections.Counter`` directly:

* word:    ``hola``
* bigram:  ``buenos~días``
* q-gram:  ``q3:os~`` (prefix ``q<q>:``; words never contain ``:``)
"""

from __future__ import annotations

import json
import re
import sys
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import NamedTuple

SEP = "~"

WORD, BIGRAM, QGRAM = "word", "bigram", "qgram"
_KIND_ORDER = {WORD: 0, BIGRAM: 1, QGRAM: 2}

_MENTION = re.compile(r"@\w+")
_URL = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)


@lru_cache(maxsize=1)
def _punct_table() -> dict[int, str | None]:
    table: dict[int, str | None] = {
        cp: None for cp in range(sys.maxunicode + 1) if unicodedata.category(chr(cp))[0] == "P"
    }
    # a literal separator in the input is treated as whitespace
    table[ord(SEP)] = " "
    return table


def normalize(text: str) -> str:
    text = _MENTION.sub(" ", text)
    text = _URL.sub(" ", text)
    text = text.lower().translate(_punct_table())
    return SEP.join(text.split())


@dataclass(frozen=True)
class TokenizerConfig:
    qgrams: tuple[int, ...] = (2, 3, 4)
    words: bool = True
    bigrams: bool = True

    @classmethod
    def from_mapping(cls, data: dict) -> "TokenizerConfig":
        unknown = set(data) - {"qgrams", "words", "bigrams"}
        if unknown:
            raise ValueError(f"unknown tokenizer options: {sorted(unknown)}")
        qgrams = tuple(int(q) for q in data.get("qgrams", cls.qgrams))
        if any(q < 1 for q in qgrams):
            raise ValueError("q-gram sizes must be positive")
        return cls(
            qgrams=tuple(sorted(set(qgrams))),
            words=bool(data.get("words", True)),
            bigrams=bool(data.get("bigrams", True)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "TokenizerConfig":
        path = Path(path)
        raw = path.read_bytes()
        if path.suffix == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            return cls.from_mapping(tomllib.loads(raw.decode("utf-8")))
        return cls.from_mapping(json.loads(raw))


WORDS_AND_BIGRAMS = TokenizerConfig(qgrams=())


class Token(NamedTuple):
    kind: str
    surface: str
    q: int = 0

    @property
    def key(self) -> str:
        return f"q{self.q}:{self.surface}" if self.kind == QGRAM else self.surface

    @classmethod
    def from_key(cls, key: str) -> "Token":
        head, colon, rest = key.partition(":")
        if colon and head[:1] == "q" and head[1:].isdigit():
            return cls(QGRAM, rest, int(head[1:]))
        return cls(BIGRAM if SEP in key else WORD, key)

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.q, self.surface)


def is_qgram_key(key: str) -> bool:
    return ":" in key


def token_kind(key: str) -> str:
    if ":" in key:
        return QGRAM
    return BIGRAM if SEP in key else WORD


class TokenBag(Counter):
    """Multiset of token keys."""

    def tokens(self) -> list[tuple[Token, int]]:
        items = [(Token.from_key(k), n) for k, n in self.items() if n > 0]
        items.sort(key=lambda kv: kv[0].sort_key())
        return items


def token_keys(text: str, config: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Token keys of one message, with repetition."""
    norm = normalize(text)
    if not norm:
        return []
    out: list[str] = []
    words = norm.split(SEP)
    if config.words:
        out.extend(words)
    if config.bigrams and len(words) > 1:
        out.extend([f"{a}{SEP}{b}" for a, b in zip(words, words[1:])])
    n = len(norm)
    for q in config.qgrams:
        prefix = f"q{q}:"
        out.extend([prefix + norm[i : i + q] for i in range(n - q + 1)])
    return out


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()) -> TokenBag:
    return TokenBag(token_keys(text, config))


# --- emoji ----------------------------------------------------------------

@dataclass(frozen=True)
class EmojiTable:
    ranges: tuple[tuple[int, int], ...]
    ignorable: tuple[tuple[int, int], ...] = field(default=())

    @classmethod
    def load(cls, path: str | Path | None = None) -> "EmojiTable":
        if path is None:
            raw = resources.files("geolex").joinpath("data/emoji_ranges.json").read_text("utf-8")
        else:
            raw = Path(path).read_text("utf-8")
        data = json.loads(raw)

        def spans(rows):
            return tuple((int(r[0], 16), int(r[1], 16)) for r in rows)

        return cls(spans(data["ranges"]), spans(data.get("ignorable", [])))

    @staticmethod
    def _within(cp: int, spans) -> bool:
        return any(lo <= cp <= hi for lo, hi in spans)

    def is_emoji(self, surface: str) -> bool:
        seen = False
        for ch in surface:
            cp = ord(ch)
            if self._within(cp, self.ignorable):
                continue
            if not self._within(cp, self.ranges):
                return False
            seen = True
        return seen


@lru_cache(maxsize=1)
def default_emoji_table() -> EmojiTable:
    return EmojiTable.load()


def is_emoji(token: Token | str, table: EmojiTable | None = None) -> bool:
    """True when every non-joiner character of the surface is an emoji code point."""
    if isinstance(token, str):
        token = Token.from_key(token)
    return (table or default_emoji_table()).is_emoji(token.surface)
