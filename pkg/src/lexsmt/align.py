"""IBM Model 1 word alignment and grow-diag-final-and symmetrization."""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Iterable, Sequence

from .errors import FormatError
from .textprep import SentencePair

NULL = "<null>"
PROB_FLOOR = 1e-12

NEIGHBORS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


class TranslationTable:
    """Sparse t(f|e): probability of source word f given target word e.

    The empty word ``NULL`` is a target word like any other.
    """

    def __init__(self, probs=None):
        self.probs: dict[str, dict[str, float]] = probs if probs is not None else {}
        self.log_likelihoods: list[float] = []

    def __call__(self, f: str, e: str) -> float:
        return self.probs.get(e, {}).get(f, 0.0)

    def targets(self):
        return self.probs.keys()

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for e in sorted(self.probs):
                for f, p in sorted(self.probs[e].items()):
                    fh.write(f"{e}\t{f}\t{p!r}\n")

    @classmethod
    def read(cls, path) -> "TranslationTable":
        probs: dict[str, dict[str, float]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.rstrip("\n").split("\t")
                if len(parts) != 3:
                    raise FormatError(path, lineno, "expected target<TAB>source<TAB>prob")
                try:
                    probs.setdefault(parts[0], {})[parts[1]] = float(parts[2])
                except ValueError:
                    raise FormatError(path, lineno, f"bad probability {parts[2]!r}") from None
        return cls(probs)


def _log_likelihood(pairs, probs) -> float:
    ll = 0.0
    for pair in pairs:
        targets = (NULL,) + pair.target
        norm = math.log(len(targets))
        for f in pair.source:
            total = sum(probs[e].get(f, 0.0) for e in targets)
            ll += math.log(max(total, PROB_FLOOR)) - norm
    return ll


def train_model1(pairs: Sequence[SentencePair], iterations: int = 5) -> TranslationTable:
    """Estimate t(source|target) with EM over the whole corpus.

    Initialization is uniform over the source words each target word (and
    NULL) co-occurs with.  The corpus log-likelihood before every iteration
    and after the last one is kept in ``table.log_likelihoods``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    pairs = list(pairs)
    if not pairs:
        raise ValueError("cannot train Model 1 on an empty corpus")

    cooc: dict[str, dict[str, None]] = defaultdict(dict)
    for pair in pairs:
        for e in (NULL,) + pair.target:
            row = cooc[e]
            for f in pair.source:
                row[f] = None
    probs = {e: dict.fromkeys(fs, 1.0 / len(fs)) for e, fs in cooc.items()}

    table = TranslationTable(probs)
    for _ in range(iterations):
        counts: dict[str, dict[str, float]] = {e: dict.fromkeys(row, 0.0) for e, row in probs.items()}
        ll = 0.0
        for pair in pairs:
            targets = (NULL,) + pair.target
            norm = math.log(len(targets))
            for f in pair.source:
                weights = [probs[e][f] for e in targets]
                z = max(sum(weights), PROB_FLOOR)
                ll += math.log(z) - norm
                for e, w in zip(targets, weights):
                    counts[e][f] += w / z
        table.log_likelihoods.append(ll)
        for e, row in counts.items():
            total = max(sum(row.values()), PROB_FLOOR)
            probs[e] = {f: c / total for f, c in row.items()}
    table.probs = probs
    table.log_likelihoods.append(_log_likelihood(pairs, probs))
    return table


def viterbi_align(pair: SentencePair, table: TranslationTable) -> set[tuple[int, int]]:
    """Link each source token to its most probable target token.

    NULL sits at target position -1 and so wins ties; NULL links are left
    out of the result.
    """
    links = set()
    for i, f in enumerate(pair.source):
        best_j, best_p = -1, table(f, NULL)
        for j, e in enumerate(pair.target):
            p = table(f, e)
            if p > best_p:
                best_j, best_p = j, p
        if best_j >= 0:
            links.add((i, best_j))
    return links


def transpose(links: Iterable[tuple[int, int]]) -> set[tuple[int, int]]:
    return {(j, i) for i, j in links}


def grow_diag_final_and(fwd, rev, src_len=None, tgt_len=None) -> set[tuple[int, int]]:
    """Symmetrize two (source, target) link sets.

    Starts from the intersection, grows into union links that neighbour an
    existing link (diagonals included) while their row or column is still
    uncovered, then adds union links whose row and column are both
    uncovered.  Each round collects every qualifying link against the state
    at the start of the round and adds them together, so the result does not
    depend on scan order and commutes with swapping + transposing the inputs.
    """
    fwd, rev = set(fwd), set(rev)
    union = fwd | rev
    if src_len is None:
        src_len = 1 + max((i for i, _ in union), default=-1)
    if tgt_len is None:
        tgt_len = 1 + max((j for _, j in union), default=-1)
    for i, j in union:
        if not (0 <= i < src_len and 0 <= j < tgt_len):
            raise ValueError(f"link {i}-{j} outside a {src_len}x{tgt_len} sentence pair")

    alignment = fwd & rev
    while True:
        src_cov = {i for i, _ in alignment}
        tgt_cov = {j for _, j in alignment}
        grow = {
            (i + di, j + dj)
            for i, j in alignment
            for di, dj in NEIGHBORS
            if (i + di, j + dj) in union
            and (i + di not in src_cov or j + dj not in tgt_cov)
        } - alignment
        if not grow:
            break
        alignment |= grow

    src_cov = {i for i, _ in alignment}
    tgt_cov = {j for _, j in alignment}
    alignment |= {(i, j) for i, j in union if i not in src_cov and j not in tgt_cov}
    return alignment


def symmetrized_alignments(pairs: Sequence[SentencePair], fwd_table: TranslationTable,
                           rev_table: TranslationTable):
    """Per-pair (forward, reverse, symmetrized) link sets in (source, target) coordinates."""
    out = []
    for pair in pairs:
        fwd = viterbi_align(pair, fwd_table)
        rev = transpose(viterbi_align(pair.swapped(), rev_table))
        sym = grow_diag_final_and(fwd, rev, len(pair.source), len(pair.target))
        out.append((fwd, rev, sym))
    return out


def format_links(links) -> str:
    return " ".join(f"{i}-{j}" for i, j in sorted(links))


def parse_links(line: str, path="<alignment>", lineno=0) -> set[tuple[int, int]]:
    links = set()
    for item in line.split():
        try:
            i, j = item.split("-")
            links.add((int(i), int(j)))
        except ValueError:
            raise FormatError(path, lineno, f"bad link {item!r}") from None
    return links


def write_alignments(path, alignments):
    with open(path, "w", encoding="utf-8") as fh:
        for links in alignments:
            fh.write(format_links(links) + "\n")


def read_alignments(path) -> list[set[tuple[int, int]]]:
    with open(path, encoding="utf-8") as fh:
        return [parse_links(line, path, n) for n, line in enumerate(fh, 1)]
