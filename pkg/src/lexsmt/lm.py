"""Katz backoff n-gram language model with Good-Turing discounting.

Probabilities and backoff weights are stored as log10 values, as in the
ARPA format.  A log10 value of -99 stands for probability zero.
"""

from __future__ import annotations

import math
import re
from collections import Counter, defaultdict
from typing import Iterable, Sequence

from .errors import FormatError

BOS, EOS, UNK = "<s>", "</s>", "<unk>"
LOG_ZERO = -99.0
# Katz discounting applies to counts <= KATZ_MAX (i.e. counts below 5).
KATZ_MAX = 4


def _log10(p: float) -> float:
    return math.log10(p) if p > 0 else LOG_ZERO


def katz_discounts(count_of_counts: dict, k: int = KATZ_MAX) -> dict[int, float]:
    """Katz discount ratios d_r for 1 <= r <= k.

    Good-Turing r* = (r+1) N_{r+1} / N_r is renormalized so that counts
    above k keep their mass.  If the coefficients are not all in (0, 1] the
    cutoff is lowered; when no cutoff >= 2 works the counts are left
    undiscounted (empty dict).
    """
    n1 = count_of_counts.get(1, 0)
    if n1 == 0:
        return {}
    for kk in range(k, 1, -1):
        common = (kk + 1) * count_of_counts.get(kk + 1, 0) / n1
        if common >= 1:
            continue
        discounts = {}
        for r in range(1, kk + 1):
            nr = count_of_counts.get(r, 0)
            if nr == 0:
                continue
            rstar = (r + 1) * count_of_counts.get(r + 1, 0) / nr
            d = (rstar / r - common) / (1 - common)
            if not 0 < d <= 1:
                break
            discounts[r] = d
        else:
            return discounts
    return {}


def _fmt(x: float) -> str:
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


class NGramModel:
    def __init__(self, order: int = 3):
        self.order = order
        # ngrams[n][tuple] = (log10 prob, log10 backoff)
        self.ngrams: list[dict[tuple[str, ...], tuple[float, float]]] = [dict() for _ in range(order + 1)]

    @property
    def vocab(self):
        return self.ngrams[1].keys()

    def _map(self, token):
        return token if (token,) in self.ngrams[1] else UNK

    def logprob(self, word: str, context: Sequence[str] = ()) -> float:
        """log10 p(word | context), following the backoff chain."""
        word = self._map(word)
        ctx = self.state(context)
        acc = 0.0
        while True:
            entry = self.ngrams[len(ctx) + 1].get(ctx + (word,))
            if entry is not None:
                return acc + entry[0]
            if not ctx:
                return acc + self.ngrams[1].get((UNK,), (LOG_ZERO, 0.0))[0]
            acc += self.ngrams[len(ctx)].get(ctx, (0.0, 0.0))[1]
            ctx = ctx[1:]

    def state(self, context: Sequence[str]) -> tuple[str, ...]:
        if self.order == 1:
            return ()
        return tuple(self._map(t) for t in context[-(self.order - 1):])

    def write_arpa(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n\\data\\\n")
            for n in range(1, self.order + 1):
                fh.write(f"ngram {n}={len(self.ngrams[n])}\n")
            for n in range(1, self.order + 1):
                fh.write(f"\n\\{n}-grams:\n")
                for gram in sorted(self.ngrams[n]):
                    prob, bow = self.ngrams[n][gram]
                    line = f"{_fmt(prob)}\t{' '.join(gram)}"
                    if n < self.order and _fmt(bow) != "0.000000":
                        line += f"\t{_fmt(bow)}"
                    fh.write(line + "\n")
            fh.write("\n\\end\\\n")

    @classmethod
    def read_arpa(cls, path) -> "NGramModel":
        with open(path, encoding="utf-8") as fh:
            lines = [line.rstrip("\n") for line in fh]
        declared = {}
        section = None
        model = None
        for lineno, line in enumerate(lines, 1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped == "\\data\\":
                section = "data"
                continue
            if stripped == "\\end\\":
                break
            m = re.fullmatch(r"\\(\d+)-grams:", stripped)
            if m:
                section = int(m.group(1))
                if model is None:
                    if not declared:
                        raise FormatError(path, lineno, "n-gram section before \\data\\ header")
                    model = cls(max(declared))
                continue
            if section == "data":
                m = re.fullmatch(r"ngram (\d+)=(\d+)", stripped)
                if not m:
                    raise FormatError(path, lineno, f"bad header line {stripped!r}")
                declared[int(m.group(1))] = int(m.group(2))
            elif isinstance(section, int):
                parts = stripped.split("\t")
                if len(parts) not in (2, 3):
                    raise FormatError(path, lineno, "expected prob<TAB>ngram[<TAB>backoff]")
                gram = tuple(parts[1].split())
                if len(gram) != section:
                    raise FormatError(path, lineno, f"expected a {section}-gram, got {len(gram)} tokens")
                try:
                    prob = float(parts[0])
                    bow = float(parts[2]) if len(parts) == 3 else 0.0
                except ValueError:
                    raise FormatError(path, lineno, "non-numeric probability") from None
                model.ngrams[section][gram] = (prob, bow)
            else:
                raise FormatError(path, lineno, f"unexpected line {stripped!r}")
        if model is None:
            raise FormatError(path, len(lines), "no n-gram sections")
        for n, count in declared.items():
            if len(model.ngrams[n]) != count:
                raise FormatError(path, len(lines), f"header declares {count} {n}-grams, found {len(model.ngrams[n])}")
        return model


def count_ngrams(corpus: Iterable[Sequence[str]], order: int = 3) -> list[Counter]:
    counts = [Counter() for _ in range(order + 1)]
    for sent in corpus:
        padded = (BOS,) + tuple(sent) + (EOS,)
        for n in range(1, order + 1):
            for i in range(len(padded) - n + 1):
                gram = padded[i:i + n]
                if n == 1 and gram[0] == BOS:
                    continue
                counts[n][gram] += 1
    return counts


def train_lm(corpus: Iterable[Sequence[str]], order: int = 3, katz_max: int = KATZ_MAX,
             reserve: bool = True) -> NGramModel:
    """Estimate a Katz backoff model.

    Counts up to ``katz_max`` are Good-Turing discounted per order; the
    unigram mass freed this way goes to ``<unk>``.  A context whose counts
    free no mass at all (e.g. only frequent continuations) gets one
    pseudo-count of backoff mass when ``reserve`` is set (the default);
    otherwise its backoff weight is zero, as in plain Katz estimation.
    ``<unk>`` always gets a pseudo-count if the unigram level frees nothing.
    """
    corpus = [tuple(s) for s in corpus]
    if not corpus:
        raise ValueError("cannot train a language model on an empty corpus")
    counts = count_ngrams(corpus, order)
    model = NGramModel(order)

    # unigrams
    uni = {gram[0]: c for gram, c in counts[1].items()}
    total = sum(uni.values())
    disc = katz_discounts(Counter(uni.values()), katz_max)
    probs = {w: disc.get(c, 1.0) * c / total for w, c in uni.items()}
    freed = 1.0 - sum(probs.values())
    if freed <= 1e-12:
        probs = {w: c / (total + 1) for w, c in uni.items()}
        freed = 1.0 / (total + 1)
    probs[UNK] = probs.get(UNK, 0.0) + freed
    for w, p in probs.items():
        model.ngrams[1][(w,)] = (_log10(p), 0.0)
    model.ngrams[1][(BOS,)] = (LOG_ZERO, 0.0)

    for n in range(2, order + 1):
        disc = katz_discounts(Counter(counts[n].values()), katz_max)
        by_ctx = defaultdict(dict)
        for gram, c in counts[n].items():
            by_ctx[gram[:-1]][gram[-1]] = c
        for ctx, conts in by_ctx.items():
            ctx_total = sum(conts.values())
            # orders below n are complete, so the model itself gives backed-off probabilities
            lower_mass = sum(10 ** model.logprob(w, ctx[1:]) for w in conts)
            denom = 1.0 - lower_mass
            seen = {w: disc.get(c, 1.0) * c / ctx_total for w, c in conts.items()}
            if denom <= 1e-12:
                # every word is already seen here: nothing to back off to
                seen_mass = sum(seen.values())
                seen = {w: p / seen_mass for w, p in seen.items()}
                alpha = 0.0
            else:
                if reserve and 1.0 - sum(seen.values()) <= 1e-12:
                    # no discounted mass: reserve one pseudo-count for unseen words
                    seen = {w: c / (ctx_total + 1) for w, c in conts.items()}
                alpha = (1.0 - sum(seen.values())) / denom
            for w, p in seen.items():
                model.ngrams[n][ctx + (w,)] = (_log10(p), 0.0)
            prob, _ = model.ngrams[n - 1][ctx]
            model.ngrams[n - 1][ctx] = (prob, _log10(alpha))
    return model


def score_sequence(model: NGramModel, tokens: Sequence[str]) -> float:
    """log10 probability of a sentence, including the end-of-sentence token."""
    context = [BOS]
    total = 0.0
    for tok in list(tokens) + [EOS]:
        total += model.logprob(tok, context)
        context.append(tok)
    return total
