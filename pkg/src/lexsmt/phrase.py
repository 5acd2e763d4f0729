"""Phrase-pair extraction and phrase-table scoring."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .align import NULL, PROB_FLOOR, TranslationTable, format_links, parse_links
from .errors import FormatError
from .textprep import SentencePair

GT_CUTOFF = 5
MAX_PHRASE_LEN = 7
SCORE_NAMES = ("phrase_fwd", "phrase_rev", "lex_fwd", "lex_rev")


@dataclass(frozen=True)
class ExtractedPhrase:
    source: tuple[str, ...]
    target: tuple[str, ...]
    alignment: tuple[tuple[int, int], ...]  # phrase-local (source, target) links
    src_span: tuple[int, int]  # inclusive
    tgt_span: tuple[int, int]


@dataclass
class PhraseEntry:
    target: tuple[str, ...]
    scores: tuple[float, float, float, float]  # φ(t|s), φ(s|t), lex(t|s), lex(s|t)
    alignment: tuple[tuple[int, int], ...] = ()
    counts: tuple[float, float, float] = (0, 0, 0)  # count(t), count(s), joint


def extract_phrases(pair: SentencePair, links, max_len: int = MAX_PHRASE_LEN) -> list[ExtractedPhrase]:
    """All phrase pairs consistent with the word alignment.

    A box is consistent when it holds at least one link and no link
    crosses its border.  Target spans are widened over unaligned boundary
    words; both sides are capped at ``max_len`` tokens.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    n, m = len(pair.source), len(pair.target)
    links = set(links)
    tgt_aligned = {j for _, j in links}
    by_src = defaultdict(list)
    by_tgt = defaultdict(list)
    for i, j in links:
        by_src[i].append(j)
        by_tgt[j].append(i)

    out = []
    for s1 in range(n):
        for s2 in range(s1, min(n, s1 + max_len)):
            tps = [j for i in range(s1, s2 + 1) for j in by_src[i]]
            if not tps:
                continue
            t1, t2 = min(tps), max(tps)
            if t2 - t1 + 1 > max_len:
                continue
            if any(not s1 <= i <= s2 for j in range(t1, t2 + 1) for i in by_tgt[j]):
                continue
            ts = t1
            while True:
                te = t2
                while te - ts + 1 <= max_len:
                    local = tuple(sorted((i - s1, j - ts) for i, j in links if s1 <= i <= s2))
                    out.append(ExtractedPhrase(
                        pair.source[s1:s2 + 1], pair.target[ts:te + 1], local, (s1, s2), (ts, te)))
                    te += 1
                    if te >= m or te in tgt_aligned:
                        break
                ts -= 1
                if ts < 0 or ts in tgt_aligned:
                    break
    return out


def good_turing_discount(histogram: Mapping[int, int], cutoff: int = GT_CUTOFF):
    """Good-Turing adjusted counts from a count-of-counts histogram.

    Returns a function r -> r* with r* = (r+1) N_{r+1} / N_r for r below the
    cutoff when N_r and N_{r+1} are both non-zero, and r* = r otherwise.
    An empty histogram gives the identity.
    """
    hist = {int(r): int(n) for r, n in histogram.items() if n > 0}

    def adjusted(r):
        if r < cutoff and hist.get(r, 0) > 0 and hist.get(r + 1, 0) > 0:
            return (r + 1) * hist[r + 1] / hist[r]
        return r

    return adjusted


def lexical_weight(words_out: Sequence[str], words_in: Sequence[str], links, prob) -> float:
    """Product over output words of the mean p(out|in) across their links.

    ``links`` pairs (in-index, out-index); ``prob(out_word, in_word)``.
    Unlinked output words are scored against NULL.
    """
    linked = defaultdict(list)
    for i, j in links:
        linked[j].append(i)
    weight = 1.0
    for j, word in enumerate(words_out):
        sources = linked.get(j)
        if sources:
            w = sum(prob(word, words_in[i]) for i in sources) / len(sources)
        else:
            w = prob(word, NULL)
        weight *= max(w, PROB_FLOOR)
    return weight


class PhraseTable:
    def __init__(self, entries: dict | None = None):
        self.entries: dict[tuple[str, ...], list[PhraseEntry]] = entries if entries is not None else {}
        self._vocab = None

    def __contains__(self, source):
        return tuple(source) in self.entries

    def __getitem__(self, source):
        return self.entries[tuple(source)]

    def get(self, source, default=()):
        return self.entries.get(tuple(source), default)

    def __len__(self):
        return sum(len(v) for v in self.entries.values())

    def add(self, source, target, scores, alignment=(), counts=(0, 0, 0)):
        self._vocab = None
        self.entries.setdefault(tuple(source), []).append(
            PhraseEntry(tuple(target), tuple(scores), tuple(alignment), tuple(counts)))

    @property
    def max_source_len(self) -> int:
        return max((len(s) for s in self.entries), default=0)

    def source_vocab(self) -> frozenset[str]:
        """Every word occurring in some source phrase."""
        if self._vocab is None:
            self._vocab = frozenset(tok for source in self.entries for tok in source)
        return self._vocab

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for source in sorted(self.entries):
                for e in sorted(self.entries[source], key=lambda e: e.target):
                    scores = " ".join(f"{x:.6g}" for x in e.scores)
                    counts = " ".join(f"{x:g}" for x in e.counts)
                    fh.write(f"{' '.join(source)} ||| {' '.join(e.target)} ||| {scores} ||| "
                             f"{format_links(e.alignment)} ||| {counts}\n")

    @classmethod
    def read(cls, path) -> "PhraseTable":
        table = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                fields = line.split(" ||| ")
                if len(fields) < 3:
                    raise FormatError(path, lineno, "expected 'source ||| target ||| scores ...'")
                try:
                    scores = tuple(float(x) for x in fields[2].split())
                    counts = tuple(float(x) for x in fields[4].split()) if len(fields) > 4 else (0, 0, 0)
                except ValueError:
                    raise FormatError(path, lineno, "non-numeric score or count") from None
                if len(scores) != 4:
                    raise FormatError(path, lineno, f"expected 4 scores, got {len(scores)}")
                alignment = sorted(parse_links(fields[3], path, lineno)) if len(fields) > 3 else ()
                table.add(fields[0].split(), fields[1].split(), scores, alignment, counts)
        return table


def score_phrases(extracted: Iterable[ExtractedPhrase], ttable_fwd: TranslationTable,
                  ttable_rev: TranslationTable, smoothing: bool = True,
                  cutoff: int = GT_CUTOFF) -> PhraseTable:
    """Turn extracted phrase pairs into a scored phrase table.

    ``ttable_fwd`` holds t(source|target) and ``ttable_rev`` t(target|source).
    Joint counts are Good-Turing adjusted (never upwards) before the
    relative-frequency estimates.  Lexical weights use the most frequent
    internal alignment of each pair.
    """
    joint = Counter()
    alignments = defaultdict(Counter)
    for ph in extracted:
        key = (ph.source, ph.target)
        joint[key] += 1
        alignments[key][ph.alignment] += 1

    src_count = Counter()
    tgt_count = Counter()
    for (s, t), c in joint.items():
        src_count[s] += c
        tgt_count[t] += c

    adjust = good_turing_discount(Counter(joint.values()), cutoff) if smoothing else (lambda r: r)

    table = PhraseTable()
    for (s, t) in sorted(joint):
        c = joint[(s, t)]
        adj = min(adjust(c), c)
        align = min(alignments[(s, t)].items(), key=lambda kv: (-kv[1], kv[0]))[0]
        rev_links = [(j, i) for i, j in align]
        lex_ts = lexical_weight(t, s, align, lambda out, inp: ttable_rev(out, inp))
        lex_st = lexical_weight(s, t, rev_links, lambda out, inp: ttable_fwd(out, inp))
        table.add(s, t, (adj / src_count[s], adj / tgt_count[t], lex_ts, lex_st),
                  align, (tgt_count[t], src_count[s], c))
    return table


def build_phrase_table(pairs: Sequence[SentencePair], alignments, ttable_fwd, ttable_rev,
                       max_len: int = MAX_PHRASE_LEN) -> PhraseTable:
    extracted = []
    for pair, links in zip(pairs, alignments):
        extracted.extend(extract_phrases(pair, links, max_len))
    return score_phrases(extracted, ttable_fwd, ttable_rev)
