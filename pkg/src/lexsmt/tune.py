"""Minimum error rate training over accumulated n-best lists.

Each weight is optimized by an exact line search: along one coordinate,
every hypothesis score is a line, the per-sentence winner changes only at
the breakpoints of the upper envelope, so corpus BLEU is piecewise
constant and can be evaluated once per interval.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .decoder import FEATURES, FeatureWeights
from .metrics import bleu, bleu_from_stats, sentence_stats

log = logging.getLogger(__name__)

GAIN_EPS = 1e-4
IMPROVE_EPS = 1e-12


@dataclass
class MertParams:
    nbest: int = 100
    max_iterations: int = 10
    restarts: int = 8
    seed: int = 1
    max_rounds: int = 50


class NbestPool:
    """Distinct hypotheses per dev sentence with their features and BLEU statistics."""

    def __init__(self, references: Sequence[Sequence[str]]):
        self.references = [list(r) for r in references]
        self.texts: list[list[str]] = [[] for _ in self.references]
        self._feats: list[list[tuple]] = [[] for _ in self.references]
        self._stats: list[list[tuple]] = [[] for _ in self.references]
        self._seen: list[set] = [set() for _ in self.references]
        self._arrays = None

    def __len__(self):
        return sum(len(t) for t in self.texts)

    def add(self, sent: int, tokens: Sequence[str], features: Sequence[float]) -> bool:
        text = " ".join(tokens)
        if text in self._seen[sent]:
            return False
        self._seen[sent].add(text)
        self.texts[sent].append(text)
        self._feats[sent].append(tuple(features))
        self._stats[sent].append(sentence_stats(list(tokens), self.references[sent]))
        self._arrays = None
        return True

    def arrays(self):
        """Per sentence: (features H x d, stats H x k, tie-break rank H)."""
        if self._arrays is None:
            out = []
            for texts, feats, stats in zip(self.texts, self._feats, self._stats):
                order = sorted(range(len(texts)), key=texts.__getitem__)
                rank = np.empty(len(texts), dtype=np.int64)
                rank[order] = np.arange(len(texts))
                out.append((np.array(feats, dtype=float), np.array(stats, dtype=np.int64), rank))
            self._arrays = out
        return self._arrays


def _argmax(scores: np.ndarray, rank: np.ndarray) -> int:
    best = scores.max()
    tied = np.flatnonzero(scores == best)
    return int(tied[np.argmin(rank[tied])]) if len(tied) > 1 else int(tied[0])


def pool_bleu(pool: NbestPool, weights: Sequence[float], smooth: bool = True) -> float:
    """Corpus BLEU of the per-sentence model-best hypotheses in the pool."""
    w = np.asarray(weights, dtype=float)
    total = None
    for feats, stats, rank in pool.arrays():
        if len(feats) == 0:
            continue
        row = stats[_argmax(feats @ w, rank)]
        total = row.copy() if total is None else total + row
    if total is None:
        return 0.0
    return bleu_from_stats(total.tolist(), smooth=smooth).score


def _envelope(slopes, intercepts, rank):
    """Upper envelope of lines as [(start, index)], start ascending (first start is -inf)."""
    order = np.lexsort((rank, -intercepts, slopes))
    hull: list[list] = []
    last_slope = None
    for idx in order:
        m, b = slopes[idx], intercepts[idx]
        if m == last_slope:
            continue  # parallel and not higher than the line already taken
        last_slope = m
        start = -math.inf
        while hull:
            top_start, top_idx = hull[-1]
            x = (intercepts[top_idx] - b) / (m - slopes[top_idx])
            if x <= top_start:
                hull.pop()
                continue
            start = x
            break
        hull.append([start, idx])
    return hull


def line_search(pool: NbestPool, weights: Sequence[float], dim: int, smooth: bool = True):
    """Best value for one weight with the others fixed.

    Returns ``(value, bleu)``.  Among intervals with equal BLEU, the one
    holding the current value is preferred, then the one nearest to it.
    """
    w = np.asarray(weights, dtype=float)
    current = float(w[dim])
    events = []
    total = None
    for sent, (feats, stats, rank) in enumerate(pool.arrays()):
        if len(feats) == 0:
            continue
        slopes = feats[:, dim]
        intercepts = feats @ w - slopes * current
        hull = _envelope(slopes, intercepts, rank)
        first = stats[hull[0][1]]
        total = first.copy() if total is None else total + first
        prev = hull[0][1]
        for start, idx in hull[1:]:
            events.append((start, sent, prev, idx))
            prev = idx
    if total is None:
        return current, 0.0
    events.sort(key=lambda e: e[0])
    arrays = pool.arrays()

    # intervals: (-inf, x1), (x1, x2), ..., (xk, inf)
    candidates = []  # (lo, hi, bleu)
    lo = -math.inf
    i = 0
    while True:
        hi = events[i][0] if i < len(events) else math.inf
        candidates.append((lo, hi, bleu_from_stats(total.tolist(), smooth=smooth).score))
        if i >= len(events):
            break
        x = events[i][0]
        while i < len(events) and events[i][0] == x:
            _, sent, old, new = events[i]
            sent_stats = arrays[sent][1]
            total = total - sent_stats[old] + sent_stats[new]
            i += 1
        lo = x

    best = max(c[2] for c in candidates)

    def distance(c):
        lo, hi, _ = c
        if lo < current < hi:
            return 0.0
        return min(abs(current - lo), abs(current - hi))

    lo, hi, score = min((c for c in candidates if c[2] == best), key=lambda c: (distance(c), c[0]))
    if lo < current < hi:
        value = current
    elif math.isinf(lo) and math.isinf(hi):
        value = current
    elif math.isinf(lo):
        value = hi - max(1.0, abs(hi)) * 0.5
    elif math.isinf(hi):
        value = lo + max(1.0, abs(lo)) * 0.5
    else:
        value = (lo + hi) / 2
    return value, score


def coordinate_ascent(pool: NbestPool, start: Sequence[float], max_rounds: int = 50,
                      smooth: bool = True) -> tuple[list[float], float]:
    """Repeatedly move the single weight whose line search helps most."""
    w = [float(x) for x in start]
    current = pool_bleu(pool, w, smooth)
    for _ in range(max_rounds):
        best = (current, None, None)
        for dim in range(len(w)):
            value, score = line_search(pool, w, dim, smooth)
            if score > best[0] + IMPROVE_EPS and value != w[dim]:
                best = (score, dim, value)
        if best[1] is None:
            break
        trial = list(w)
        trial[best[1]] = best[2]
        new = pool_bleu(pool, trial, smooth)
        if new <= current + IMPROVE_EPS:
            break
        w, current = trial, new
    return w, current


def normalize(weights: Sequence[float]) -> list[float]:
    """Scale so |lm weight| == 1 (or unit L1 norm if the lm weight is zero)."""
    lm = weights[FEATURES.index("lm")]
    scale = abs(lm) if lm != 0 else sum(abs(x) for x in weights)
    if scale == 0:
        return list(weights)
    return [x / scale for x in weights]


def optimize(pool: NbestPool, start: Sequence[float], restarts: int, rng: random.Random,
             max_rounds: int = 50) -> tuple[list[float], float]:
    """Coordinate ascent from ``start`` and from random points in [-1, 1]^d; keep the best."""
    best_w, best = coordinate_ascent(pool, start, max_rounds)
    for _ in range(restarts):
        point = [rng.uniform(-1.0, 1.0) for _ in start]
        w, score = coordinate_ascent(pool, point, max_rounds)
        if score > best + IMPROVE_EPS:
            best_w, best = w, score
    return best_w, best


@dataclass
class MertIteration:
    iteration: int
    pool_size: int
    decode_bleu: float
    pool_bleu_before: float
    pool_bleu_after: float
    weights: list[float]


@dataclass
class MertResult:
    weights: FeatureWeights
    trace: list[MertIteration] = field(default_factory=list)
    converged_weights: list[float] = field(default_factory=list)
    pool: NbestPool | None = None
    decoded: list[tuple[float, list[float]]] = field(default_factory=list)

    def write_trace(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("iteration\tpool_size\tdecode_bleu\tpool_bleu_before\tpool_bleu_after\tweights\n")
            for t in self.trace:
                weights = " ".join(f"{x:.6f}" for x in t.weights)
                fh.write(f"{t.iteration}\t{t.pool_size}\t{t.decode_bleu:.6f}\t"
                         f"{t.pool_bleu_before:.6f}\t{t.pool_bleu_after:.6f}\t{weights}\n")


DecodeBatch = Callable[[Sequence[Sequence[str]], FeatureWeights, int], list]


def mert(dev_sources: Sequence[Sequence[str]], dev_references: Sequence[Sequence[str]],
         initial: FeatureWeights, decode_batch: DecodeBatch,
         params: MertParams | None = None) -> MertResult:
    """Tune feature weights for corpus BLEU on a development set.

    ``decode_batch(sources, weights, n)`` returns an n-best list of
    translations per source.  Every outer iteration decodes with the current
    weights, merges the n-best lists into the pool and re-optimizes on the
    pool.  Tuning stops when the pool stops growing, the pool BLEU gain falls
    below 1e-4, or the iteration budget runs out.  The returned weights are
    the decoded ones with the best dev BLEU, normalized.
    """
    params = params or MertParams()
    if len(dev_sources) != len(dev_references) or not dev_sources:
        raise ValueError("dev set must be non-empty with one reference per source")
    if all(len(r) == 0 for r in dev_references):
        raise ValueError("degenerate dev set: every reference is empty")

    rng = random.Random(params.seed)
    pool = NbestPool(dev_references)
    w = list(initial.vector())
    result = MertResult(initial, pool=pool)

    def decode(weights):
        lists = decode_batch(dev_sources, FeatureWeights.from_vector(weights), params.nbest)
        best = [nb[0].tokens if nb else [] for nb in lists]
        score = bleu(best, dev_references, smooth=True).score
        result.decoded.append((score, list(weights)))
        return lists, score

    for iteration in range(1, params.max_iterations + 1):
        lists, decoded_bleu = decode(w)
        grew = False
        for sent, nb in enumerate(lists):
            for t in nb:
                grew |= pool.add(sent, t.tokens, [t.features[name] for name in FEATURES])
        if not grew:
            log.info("mert: pool stopped growing at iteration %d", iteration)
            break
        before = pool_bleu(pool, w)
        new_w, after = optimize(pool, w, params.restarts, rng, params.max_rounds)
        if after < before:
            new_w, after = w, before
        result.trace.append(MertIteration(iteration, len(pool), decoded_bleu, before, after, list(new_w)))
        log.info("mert iteration %d: pool %d, bleu %.4f -> %.4f", iteration, len(pool), before, after)
        w = new_w
        if after - before < GAIN_EPS:
            decode(w)
            break
    else:
        decode(w)

    result.converged_weights = list(w)
    best_score, best_w = result.decoded[0]
    for score, weights in result.decoded[1:]:
        if score >= best_score:
            best_score, best_w = score, weights
    result.weights = FeatureWeights.from_vector(normalize(best_w))
    return result
