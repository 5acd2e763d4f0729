"""Stack decoding under a log-linear phrase-based model.

Features (all in natural-log units where they are log probabilities):

* ``phrase_fwd`` / ``phrase_rev``: log φ(t|s), log φ(s|t)
* ``lex_fwd`` / ``lex_rev``: log lex(t|s), log lex(s|t)
* ``lm``: language-model log probability of the output, ``</s>`` included
* ``distortion``: minus the summed jump distance between consecutive phrases
* ``word_penalty``: number of output words
* ``phrase_penalty``: number of phrases

Source words absent from the phrase table are out of vocabulary.  They are
copied to the output unchanged, and nothing is reordered across them: a
passthrough is emitted only once everything to its left is translated, and
nothing to its right is translated before it.  A known word that no usable
phrase covers in this sentence is copied the same way but not flagged OOV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import FormatError
from .lm import EOS, BOS, NGramModel
from .phrase import PhraseTable

LN10 = math.log(10)
FEATURES = ("phrase_fwd", "phrase_rev", "lex_fwd", "lex_rev", "lm",
            "distortion", "word_penalty", "phrase_penalty")
NEG_INF = float("-inf")


@dataclass
class FeatureWeights:
    phrase_fwd: float = 1.0
    phrase_rev: float = 1.0
    lex_fwd: float = 1.0
    lex_rev: float = 1.0
    lm: float = 1.0
    distortion: float = 1.0
    word_penalty: float = -1.0
    phrase_penalty: float = 1.0

    def __post_init__(self):
        for name in FEATURES:
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"weight {name} must be finite")

    def vector(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in FEATURES)

    @classmethod
    def from_vector(cls, values) -> "FeatureWeights":
        return cls(*[float(v) for v in values])

    def scaled(self, factor: float) -> "FeatureWeights":
        return FeatureWeights.from_vector(v * factor for v in self.vector())

    def dot(self, feats) -> float:
        return sum(w * f for w, f in zip(self.vector(), feats))

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for name in FEATURES:
                fh.write(f"{name} = {getattr(self, name)!r}\n")

    @classmethod
    def read(cls, path) -> "FeatureWeights":
        values = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                name, sep, value = line.partition("=")
                name = name.strip()
                if not sep or name not in FEATURES:
                    raise FormatError(path, lineno, f"expected 'feature = value' with feature in {FEATURES}")
                try:
                    values[name] = float(value)
                except ValueError:
                    raise FormatError(path, lineno, f"bad weight {value.strip()!r}") from None
        return cls(**values)


@dataclass
class DecodeParams:
    stack_size: int | None = 100
    distortion_limit: int | None = 6
    table_limit: int | None = 20


@dataclass(frozen=True)
class Option:
    start: int
    end: int  # exclusive
    target: tuple[str, ...]
    features: tuple[float, ...]  # phrase-local features (no lm, no distortion)
    oov: bool = False
    passthrough: bool = False


@dataclass(eq=False)
class Hypothesis:
    coverage: int
    lm_state: tuple[str, ...]
    last_end: int  # exclusive end of the last source span
    features: tuple[float, ...]
    score: float
    text: str
    back: "Hypothesis | None" = None
    option: Option | None = None

    @property
    def covered(self) -> int:
        return bin(self.coverage).count("1")

    def phrases(self) -> list[Option]:
        out = []
        hyp = self
        while hyp is not None and hyp.option is not None:
            out.append(hyp.option)
            hyp = hyp.back
        return out[::-1]


@dataclass
class Translation:
    tokens: list[str]
    features: dict[str, float]
    total: float
    oov: list[bool] = field(default_factory=list)  # per output token
    phrases: list[Option] = field(default_factory=list)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)

    @property
    def oov_count(self) -> int:
        return sum(self.oov)


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def translation_options(source: Sequence[str], table: PhraseTable, weights: FeatureWeights,
                        lm: NGramModel, table_limit: int | None = None) -> dict[tuple[int, int], list[Option]]:
    vocab = table.source_vocab()
    n = len(source)
    oov = [tok not in vocab for tok in source]
    w = weights.vector()
    max_len = table.max_source_len
    options: dict[tuple[int, int], list[Option]] = {}
    for i in range(n):
        if oov[i]:
            options[(i, i + 1)] = [_passthrough(source, i, True)]
            continue
        for j in range(i + 1, min(n, i + max_len) + 1):
            if oov[j - 1]:
                break
            entries = table.get(source[i:j])
            if not entries:
                continue
            opts = []
            for e in entries:
                logs = tuple(math.log(x) for x in e.scores)
                feats = logs + (0.0, 0.0, float(len(e.target)), 1.0)
                opts.append(Option(i, j, e.target, feats))
            if table_limit is not None and len(opts) > table_limit:
                opts.sort(key=lambda o: (-(sum(a * b for a, b in zip(w, o.features))
                                           + w[4] * _lm_estimate(lm, o.target)), " ".join(o.target)))
                opts = opts[:table_limit]
            options[(i, j)] = opts
    covered = set()
    for i, j in options:
        covered.update(range(i, j))
    for i in range(n):
        if i not in covered:
            options[(i, i + 1)] = [_passthrough(source, i, False)]
    return options


def _passthrough(source, i, oov):
    return Option(i, i + 1, (source[i],), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0), oov, True)


def _lm_estimate(lm: NGramModel, target) -> float:
    return LN10 * sum(lm.logprob(t) for t in target)


def future_costs(n: int, options, weights: FeatureWeights, lm: NGramModel):
    """Best estimated score of every source span, from per-span options and unigram LM scores."""
    w = weights.vector()
    fc = [[NEG_INF] * (n + 1) for _ in range(n + 1)]
    for (i, j), opts in options.items():
        for o in opts:
            est = sum(a * b for a, b in zip(w, o.features)) + w[4] * _lm_estimate(lm, o.target)
            fc[i][j] = max(fc[i][j], est)
    for length in range(2, n + 1):
        for i in range(n - length + 1):
            j = i + length
            for k in range(i + 1, j):
                fc[i][j] = max(fc[i][j], fc[i][k] + fc[k][j])
    return fc


def _uncovered_cost(coverage: int, n: int, fc) -> float:
    total = 0.0
    i = 0
    while i < n:
        if coverage >> i & 1:
            i += 1
            continue
        j = i
        while j < n and not coverage >> j & 1:
            j += 1
        total += fc[i][j]
        i = j
    return total


class Decoder:
    def __init__(self, table: PhraseTable, lm: NGramModel, weights: FeatureWeights,
                 params: DecodeParams | None = None):
        self.table = table
        self.lm = lm
        self.weights = weights
        self.params = params or DecodeParams()

    def nbest(self, source: Sequence[str], n: int = 1) -> list[Translation]:
        if n < 1:
            raise ValueError("n must be >= 1")
        source = list(source)
        if not source:
            feats = [0.0] * len(FEATURES)
            feats[4] = LN10 * self.lm.logprob(EOS, [BOS])
            return [Translation([], dict(zip(FEATURES, feats)), self.weights.dot(feats))]
        finals = self._search(source, n, self.params.distortion_limit)
        if not finals and self.params.distortion_limit is not None:
            finals = self._search(source, n, None)
        return [self._translation(h) for h in finals[:n]]

    def decode(self, source: Sequence[str]) -> Translation:
        return self.nbest(source, 1)[0]

    def _translation(self, hyp: Hypothesis) -> Translation:
        tokens, flags = [], []
        phrases = hyp.phrases()
        for o in phrases:
            tokens.extend(o.target)
            flags.extend([o.oov] * len(o.target))
        feats = dict(zip(FEATURES, hyp.features))
        return Translation(tokens, feats, self.weights.dot(hyp.features), flags, phrases)

    def _search(self, source, n_keep, distortion_limit):
        p = self.params
        n = len(source)
        w = self.weights.vector()
        lm = self.lm
        options = translation_options(source, self.table, self.weights, lm, p.table_limit)
        fc = future_costs(n, options, self.weights, lm)
        walls = sorted(i for (i, j), opts in options.items() if opts[0].passthrough)
        full = (1 << n) - 1

        by_start: dict[int, list[Option]] = {}
        for (i, j), opts in sorted(options.items()):
            by_start.setdefault(i, []).extend(opts)

        empty = Hypothesis(0, lm.state([BOS]), 0, (0.0,) * len(FEATURES), 0.0, "")
        stacks: list[dict] = [dict() for _ in range(n + 1)]
        stacks[0][(0, empty.lm_state, 0)] = {"": empty}

        for size in range(n):
            stack = stacks[size]
            if not stack:
                continue
            ranked = sorted(stack.items(), key=lambda kv: self._state_key(kv[1], n, fc))
            if p.stack_size is not None:
                ranked = ranked[:p.stack_size]
            for (coverage, _, last_end), bucket in ranked:
                first_gap = next(i for i in range(n) if not coverage >> i & 1)
                wall = next((q for q in walls if not coverage >> q & 1), n)
                for start in range(first_gap, wall + 1):
                    if start >= n or coverage >> start & 1:
                        continue
                    jump = abs(start - last_end)
                    if distortion_limit is not None and jump > distortion_limit:
                        continue
                    for opt in by_start.get(start, ()):
                        span = ((1 << opt.end) - 1) ^ ((1 << start) - 1)
                        if coverage & span:
                            continue
                        if opt.passthrough and start != first_gap:
                            continue
                        new_cov = coverage | span
                        for hyp in bucket.values():
                            self._extend(hyp, opt, new_cov, jump, full, w, stacks, n_keep)

        finals = []
        for bucket in stacks[n].values():
            finals.extend(bucket.values())
        best = {}
        for h in finals:
            total = self.weights.dot(h.features)
            if h.text not in best or total > best[h.text][0]:
                best[h.text] = (total, h)
        return [h for _, h in sorted(best.values(), key=lambda th: (-th[0], th[1].text))]

    def _state_key(self, bucket, n, fc):
        top = max(bucket.values(), key=lambda h: (h.score, _neg_text(h.text)))
        return (-(top.score + _uncovered_cost(top.coverage, n, fc)), top.text)

    def _extend(self, hyp, opt, new_cov, jump, full, w, stacks, n_keep):
        lm = self.lm
        state = hyp.lm_state
        lm_score = 0.0
        for tok in opt.target:
            lm_score += lm.logprob(tok, state)
            state = lm.state(state + (tok,))
        if new_cov == full:
            lm_score += lm.logprob(EOS, state)
        delta = list(opt.features)
        delta[4] = LN10 * lm_score
        delta[5] = -float(jump)
        feats = _add(hyp.features, delta)
        score = hyp.score + sum(a * b for a, b in zip(w, delta))
        text = f"{hyp.text} {' '.join(opt.target)}" if hyp.text else " ".join(opt.target)
        new = Hypothesis(new_cov, state, opt.end, feats, score, text, hyp, opt)
        size = bin(new_cov).count("1")
        bucket = stacks[size].setdefault((new_cov, state, opt.end), {})
        old = bucket.get(text)
        if old is None or score > old.score:
            bucket[text] = new
            if len(bucket) > n_keep:
                worst = min(bucket.values(), key=lambda h: (h.score, _neg_text(h.text)))
                del bucket[worst.text]


class _neg_text(str):
    """String whose ordering is reversed, for max() with lexicographic tie-breaks."""

    def __lt__(self, other):
        return str.__gt__(self, other)

    def __gt__(self, other):
        return str.__lt__(self, other)


def decode(source, table, lm, weights, params=None) -> Translation:
    return Decoder(table, lm, weights, params).decode(source)


def nbest(source, table, lm, weights, params=None, n=100) -> list[Translation]:
    return Decoder(table, lm, weights, params).nbest(source, n)


def format_nbest(sent_id: int, translations: Sequence[Translation]) -> list[str]:
    lines = []
    for t in translations:
        feats = " ".join(f"{name}= {t.features[name]:.6f}" for name in FEATURES)
        lines.append(f"{sent_id} ||| {t.text} ||| {feats} ||| {t.total:.6f}")
    return lines


def parse_nbest_line(line: str, path="<nbest>", lineno=0):
    parts = line.rstrip("\n").split(" ||| ")
    if len(parts) != 4:
        raise FormatError(path, lineno, "expected 'id ||| target ||| features ||| total'")
    try:
        sent_id = int(parts[0])
        items = parts[2].split()
        feats = {}
        for name, value in zip(items[::2], items[1::2]):
            feats[name.rstrip("=")] = float(value)
        total = float(parts[3])
    except ValueError:
        raise FormatError(path, lineno, "non-numeric field") from None
    return sent_id, parts[1].split(), feats, total
