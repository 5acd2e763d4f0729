"""Tokenization, truecasing, corpus cleaning and vocabulary counting."""

from __future__ import annotations

import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import FormatError

ORIGINS = ("corpus", "list", "augmented-list")

# Scripts that never get truecased.
_CASELESS_LANGS = {"si", "ta"}


@dataclass(frozen=True)
class SentencePair:
    source: tuple[str, ...]
    target: tuple[str, ...]
    origin: str = "corpus"

    def __post_init__(self):
        object.__setattr__(self, "source", tuple(self.source))
        object.__setattr__(self, "target", tuple(self.target))
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")

    def swapped(self) -> "SentencePair":
        return SentencePair(self.target, self.source, self.origin)


@dataclass
class Vocabulary:
    counts: Counter = field(default_factory=Counter)
    side: str = "source"

    def __contains__(self, token):
        return token in self.counts

    def __len__(self):
        return len(self.counts)

    def __getitem__(self, token):
        return self.counts[token]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def sorted_items(self):
        return sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))

    def write_tsv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for token, count in self.sorted_items():
                fh.write(f"{token}\t{count}\n")

    @classmethod
    def read_tsv(cls, path, side="source") -> "Vocabulary":
        counts = Counter()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[1].isdigit():
                    raise FormatError(path, lineno, "expected token<TAB>count")
                counts[parts[0]] = int(parts[1])
        return cls(counts, side)


def _is_split_char(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "PS"


def tokenize(text: str, lang: str = "en") -> list[str]:
    """Split a raw line into tokens.

    Whitespace separates words; every punctuation or symbol character
    (Unicode categories P* and S*) becomes a token of its own.  Joiners and
    combining marks are never split points, so Sinhala conjuncts such as
    ``ප්‍ර`` survive intact.  ``lang`` is accepted for interface symmetry;
    all scripts are segmented by the same rule.
    """
    tokens = []
    for chunk in text.split():
        buf = []
        for ch in chunk:
            if _is_split_char(ch):
                if buf:
                    tokens.append("".join(buf))
                    buf = []
                tokens.append(ch)
            else:
                buf.append(ch)
        if buf:
            tokens.append("".join(buf))
    return tokens


def detokenize(tokens: Iterable[str]) -> str:
    return " ".join(tokens)


class TruecaseModel:
    """Per-token casing frequency table."""

    def __init__(self, table=None):
        # lowercased token -> Counter(surface form -> count)
        self.table: dict[str, Counter] = defaultdict(Counter)
        if table:
            for low, forms in table.items():
                self.table[low].update(forms)

    @classmethod
    def train(cls, sentences: Iterable[Sequence[str]]) -> "TruecaseModel":
        model = cls()
        for sent in sentences:
            for tok in sent:
                model.table[tok.lower()][tok] += 1
        return model

    def best(self, token: str) -> str:
        forms = self.table.get(token.lower())
        if not forms:
            return token.lower()
        return min(forms.items(), key=lambda kv: (-kv[1], kv[0]))[0]

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for low in sorted(self.table):
                forms = " ".join(f"{s}/{c}" for s, c in sorted(self.table[low].items()))
                fh.write(f"{low}\t{forms}\n")

    @classmethod
    def read(cls, path) -> "TruecaseModel":
        model = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                try:
                    low, forms = line.split("\t")
                    for item in forms.split(" "):
                        surface, count = item.rsplit("/", 1)
                        model.table[low][surface] = int(count)
                except ValueError:
                    raise FormatError(path, lineno, "expected token<TAB>form/count ...") from None
        return model


def truecase(tokens: Sequence[str], model: TruecaseModel, lang: str = "en") -> list[str]:
    """Replace the sentence-initial token by its most frequent training casing.

    Ties go to the lexicographically smallest surface form and unseen
    tokens are lowercased.  Caseless scripts pass through unchanged.
    """
    out = list(tokens)
    if not out or lang in _CASELESS_LANGS:
        return out
    out[0] = model.best(out[0])
    return out


def violates_clean(pair: SentencePair, max_len: int = 80, max_ratio: float = 9.0) -> str | None:
    """Return the reason a pair would be dropped by :func:`clean`, or None."""
    ns, nt = len(pair.source), len(pair.target)
    if ns == 0 or nt == 0:
        return "empty"
    if ns > max_len or nt > max_len:
        return "too-long"
    if max(ns, nt) / min(ns, nt) > max_ratio:
        return "ratio"
    return None


def clean(pairs: Iterable[SentencePair], max_len: int = 80, max_ratio: float = 9.0) -> list[SentencePair]:
    # ratio exactly equal to max_ratio is kept
    return [p for p in pairs if violates_clean(p, max_len, max_ratio) is None]


def build_vocab(pairs: Iterable[SentencePair], side: str = "source") -> Vocabulary:
    if side not in ("source", "target"):
        raise ValueError(f"side must be 'source' or 'target', not {side!r}")
    counts = Counter()
    for pair in pairs:
        counts.update(getattr(pair, side))
    return Vocabulary(counts, side)


def read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


def write_lines(path, lines: Iterable[str]):
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def read_parallel(src_path, tgt_path, origin="corpus") -> list[SentencePair]:
    """Load two line-aligned files of whitespace-tokenized text."""
    src = read_lines(src_path)
    tgt = read_lines(tgt_path)
    if len(src) != len(tgt):
        raise FormatError(
            tgt_path, min(len(src), len(tgt)) + 1,
            f"line count mismatch: {Path(src_path).name} has {len(src)} lines, "
            f"{Path(tgt_path).name} has {len(tgt)}",
        )
    return [SentencePair(s.split(), t.split(), origin) for s, t in zip(src, tgt)]


def write_parallel(pairs: Sequence[SentencePair], src_path, tgt_path):
    write_lines(src_path, (detokenize(p.source) for p in pairs))
    write_lines(tgt_path, (detokenize(p.target) for p in pairs))
