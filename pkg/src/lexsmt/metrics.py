"""Corpus BLEU and out-of-vocabulary counts."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .phrase import PhraseTable

MAX_N = 4


@dataclass
class BleuResult:
    score: float
    precisions: list[float]
    matches: list[int]
    totals: list[int]
    brevity_penalty: float
    hyp_len: int
    ref_len: int

    @property
    def x100(self) -> float:
        return 100.0 * self.score


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def sentence_stats(candidate: Sequence[str], reference: Sequence[str], max_n: int = MAX_N) -> tuple[int, ...]:
    """Sufficient statistics: clipped matches 1..N, candidate n-gram counts 1..N, lengths."""
    matches, totals = [], []
    for n in range(1, max_n + 1):
        cand = _ngrams(candidate, n)
        ref = _ngrams(reference, n)
        matches.append(sum(min(c, ref[g]) for g, c in cand.items()))
        totals.append(max(len(candidate) - n + 1, 0))
    return tuple(matches + totals + [len(candidate), len(reference)])


def bleu_from_stats(stats: Sequence[int], max_n: int = MAX_N, smooth: bool = False) -> BleuResult:
    """Corpus BLEU from summed sentence statistics.

    With ``smooth`` set, an n-gram order with no matches contributes
    1 / (total + 1) instead of zeroing the score; this is only meant for
    tuning.
    """
    matches = list(stats[:max_n])
    totals = list(stats[max_n:2 * max_n])
    hyp_len, ref_len = stats[2 * max_n], stats[2 * max_n + 1]
    precisions = []
    for m, t in zip(matches, totals):
        if smooth and m == 0:
            precisions.append(1.0 / (t + 1))
        else:
            precisions.append(m / t if t else 0.0)
    if hyp_len == 0:
        bp = 0.0
    else:
        bp = min(1.0, math.exp(1.0 - ref_len / hyp_len))
    if min(precisions) <= 0.0:
        score = 0.0
    else:
        score = bp * math.exp(sum(math.log(p) for p in precisions) / max_n)
    return BleuResult(score, precisions, matches, totals, bp, hyp_len, ref_len)


def corpus_stats(candidates, references, max_n: int = MAX_N) -> list[int]:
    total = [0] * (2 * max_n + 2)
    for cand, ref in zip(candidates, references):
        for k, v in enumerate(sentence_stats(cand, ref, max_n)):
            total[k] += v
    return total


def bleu(candidates: Sequence[Sequence[str]], references: Sequence[Sequence[str]],
         max_n: int = MAX_N, smooth: bool = False) -> BleuResult:
    """Corpus-level BLEU with one reference per candidate."""
    if len(candidates) != len(references):
        raise ValueError(f"{len(candidates)} candidates but {len(references)} references")
    if not candidates:
        raise ValueError("BLEU needs at least one candidate")
    return bleu_from_stats(corpus_stats(candidates, references, max_n), max_n, smooth)


OOV_MODES = ("tokens", "types")


def oov_tokens(test_source: Sequence[Sequence[str]], table: PhraseTable) -> list[str]:
    vocab = table.source_vocab()
    return [tok for sent in test_source for tok in sent if tok not in vocab]


def oov_count(test_source: Sequence[Sequence[str]], table: PhraseTable, mode: str = "tokens") -> int:
    """Source tokens that occur in no source phrase of the table.

    ``tokens`` counts occurrences, ``types`` distinct words.
    """
    if mode not in OOV_MODES:
        raise ValueError(f"mode must be one of {OOV_MODES}, not {mode!r}")
    missing = oov_tokens(test_source, table)
    return len(missing) if mode == "tokens" else len(set(missing))


REPORT_HEADER = "config_id\tdirection\tbleu_x100\toov_tokens\toov_types"


def report_row(config_id: str, direction: str, result: BleuResult, oov_tok: int, oov_typ: int) -> str:
    return f"{config_id}\t{direction}\t{result.x100:.2f}\t{oov_tok}\t{oov_typ}"
