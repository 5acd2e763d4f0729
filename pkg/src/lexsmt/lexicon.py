"""Filtering bilingual lists against the training corpus and static integration."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .morphgen import LexiconEntry, format_lexicon_entry
from .textprep import SentencePair, Vocabulary

FILTER_MODES = ("token", "phrase")


@dataclass
class FilterReport:
    rows: list = field(default_factory=list)  # (entry, "kept"|"removed", reason)

    @property
    def kept(self) -> int:
        return sum(1 for _, status, _ in self.rows if status == "kept")

    @property
    def removed(self) -> int:
        return sum(1 for _, status, _ in self.rows if status == "removed")

    def reasons(self) -> Counter:
        return Counter(reason for _, _, reason in self.rows)

    def write_tsv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for entry, status, reason in self.rows:
                term = format_lexicon_entry(entry).replace("\t", " ||| ")
                fh.write(f"{term}\t{status}\t{reason}\n")


def _contains(sentence: Sequence[str], phrase: Sequence[str]) -> bool:
    n = len(phrase)
    return any(tuple(sentence[i:i + n]) == tuple(phrase) for i in range(len(sentence) - n + 1))


def filter_list(entries: Iterable[LexiconEntry], train_vocab: Vocabulary, mode: str = "token",
                sentences: Sequence[Sequence[str]] | None = None) -> tuple[list[LexiconEntry], FilterReport]:
    """Drop list entries the training corpus already covers.

    ``token`` mode removes an entry when every token of its source term is in
    ``train_vocab``.  ``phrase`` mode removes it only when the whole source
    term occurs contiguously in one of the training source ``sentences``.
    """
    if mode not in FILTER_MODES:
        raise ValueError(f"filter mode must be one of {FILTER_MODES}, not {mode!r}")
    if mode == "phrase" and sentences is None:
        raise ValueError("phrase mode needs the training source sentences")
    report = FilterReport()
    kept = []
    if mode == "phrase":
        # only sentences sharing the first token can contain the term
        by_first: dict[str, list] = {}
        for sent in sentences:
            for tok in set(sent):
                by_first.setdefault(tok, []).append(sent)
    for entry in entries:
        if mode == "token":
            covered = all(tok in train_vocab for tok in entry.source_term)
            reason = "all-tokens-known" if covered else "unknown-token"
        else:
            candidates = by_first.get(entry.source_term[0], ())
            covered = any(_contains(s, entry.source_term) for s in candidates)
            reason = "phrase-in-corpus" if covered else "phrase-absent"
        if covered:
            report.rows.append((entry, "removed", reason))
        else:
            report.rows.append((entry, "kept", reason))
            kept.append(entry)
    return kept, report


def integrate(train: Sequence[SentencePair], lists: Iterable[LexiconEntry]) -> list[SentencePair]:
    """Append each list entry once, as a sentence pair, after the corpus."""
    out = list(train)
    for entry in lists:
        out.append(SentencePair(entry.source_term, entry.target_term, entry.origin))
    return out
