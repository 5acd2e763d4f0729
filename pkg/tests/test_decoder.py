import itertools
import math
import random

import pytest

from lexsmt.decoder import (FEATURES, LN10, DecodeParams, Decoder, FeatureWeights, decode,
                            format_nbest, nbest, parse_nbest_line)
from lexsmt.errors import FormatError
from lexsmt.lm import train_lm
from lexsmt.metrics import oov_count
from lexsmt.phrase import PhraseTable
from oracles import exhaustive_decode, lm_score

UNLIMITED = DecodeParams(stack_size=None, distortion_limit=None, table_limit=None)
GLOSS = ["ඉඩම්", "ප්‍රතිසංස්කරණ", "කොමිෂන්", "සභාව"]


def identity_table(words, synonyms=None):
    table = PhraseTable()
    for w in words:
        table.add([w], [w], (1.0, 1.0, 1.0, 1.0))
        for syn, score in (synonyms or {}).get(w, []):
            table.add([w], [syn], (score, score, score, score))
    return table


def uniform_lm(words):
    return train_lm([[w] for w in words], reserve=False)


class TestPassthrough:
    def setup_method(self):
        self.table = PhraseTable()
        self.table.add(GLOSS, ["Land", "Reform", "Commission"], (0.9, 0.9, 0.8, 0.8))
        for si, en in zip(GLOSS[:3], ["Land", "Reform", "Commission"]):
            self.table.add([si], [en], (0.5, 0.5, 0.5, 0.5))
        self.table.add(["සභාව"], ["Commission"], (0.5, 0.5, 0.5, 0.5))
        self.lm = train_lm([["Land", "Reform", "Commission"]])

    def test_unknown_inflection_copied_verbatim(self):
        out = decode(GLOSS[:3] + ["සභාවෙන්"], self.table, self.lm, FeatureWeights())
        assert "සභාවෙන්" in out.tokens
        assert out.oov_count == 1
        assert out.oov[out.tokens.index("සභාවෙන්")]

    def test_passthrough_stays_in_place(self):
        source = ["ඉඩම්", "zz", "කොමිෂන්"]
        out = decode(source, self.table, self.lm, FeatureWeights(distortion=0.0), UNLIMITED)
        assert out.tokens == ["Land", "zz", "Commission"]

    def test_known_token_without_usable_option_is_not_oov(self):
        table = PhraseTable()
        table.add(["a", "b"], ["x"], (1.0, 1.0, 1.0, 1.0))
        out = decode(["a", "c"], table, uniform_lm(["x"]), FeatureWeights())
        assert out.tokens == ["a", "c"]
        assert out.oov == [False, True]

    def test_empty_source(self):
        out = decode([], self.table, self.lm, FeatureWeights())
        assert out.tokens == []
        assert out.features["lm"] == pytest.approx(LN10 * lm_score(self.lm, []))


class TestSearch:
    def test_identity_decode_is_monotone(self):
        words = list("abcdef")
        source = ["c", "a", "f", "b", "e", "d"]
        out = decode(source, identity_table(words), uniform_lm(words), FeatureWeights())
        assert out.tokens == source
        assert out.features["distortion"] == 0.0

    def test_total_is_weighted_feature_sum(self):
        words = list("abcd")
        weights = FeatureWeights(0.3, 0.2, 0.1, 0.4, 0.7, 0.5, -0.2, 0.3)
        out = decode(["a", "b", "c"], identity_table(words), uniform_lm(words), weights)
        assert out.total == pytest.approx(weights.dot([out.features[f] for f in FEATURES]), abs=1e-9)

    @pytest.mark.parametrize("trial", range(100))
    def test_matches_exhaustive_search(self, trial):
        rng = random.Random(trial)
        words = list("abcde")
        outputs = list("uvwxyz")
        table = PhraseTable()
        for w in words:
            for t in rng.sample(outputs, rng.randint(1, 2)):
                table.add([w], [t], tuple(rng.uniform(0.05, 1.0) for _ in range(4)))
        for _ in range(4):
            src = [rng.choice(words) for _ in range(rng.randint(2, 3))]
            tgt = [rng.choice(outputs) for _ in range(rng.randint(1, 3))]
            table.add(src, tgt, tuple(rng.uniform(0.05, 1.0) for _ in range(4)))
        lm = train_lm([[rng.choice(outputs) for _ in range(rng.randint(1, 5))] for _ in range(8)])
        weights = FeatureWeights.from_vector(rng.uniform(-1, 1) if k != 4 else rng.uniform(0.1, 1)
                                             for k in range(len(FEATURES)))
        source = [rng.choice(words + ["OOV"]) for _ in range(rng.randint(1, 5))]
        expected, _ = exhaustive_decode(source, table, lm, weights)
        got = decode(source, table, lm, weights, UNLIMITED)
        assert got.total == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("factor", [0.5, 3.0, 17.0])
    def test_weight_scaling_keeps_argmax(self, factor):
        rng = random.Random(2)
        words, outputs = list("abcd"), list("wxyz")
        table = PhraseTable()
        for w in words:
            for t in rng.sample(outputs, 2):
                table.add([w], [t], tuple(rng.uniform(0.05, 1.0) for _ in range(4)))
        lm = train_lm([[rng.choice(outputs) for _ in range(4)] for _ in range(6)])
        weights = FeatureWeights(0.4, 0.2, 0.3, 0.1, 0.8, 0.3, -0.1, 0.2)
        for _ in range(20):
            source = [rng.choice(words) for _ in range(rng.randint(1, 5))]
            base = decode(source, table, lm, weights, UNLIMITED)
            scaled = decode(source, table, lm, weights.scaled(factor), UNLIMITED)
            assert scaled.tokens == base.tokens

    def test_distortion_limit_respected(self):
        words = list("abcd")
        table = identity_table(words)
        lm = train_lm([["d", "c", "b", "a"]] * 5)
        weights = FeatureWeights(distortion=0.0, lm=5.0)
        free = decode(list("abcd"), table, lm, weights, UNLIMITED)
        limited = decode(list("abcd"), table, lm, weights, DecodeParams(None, 0, None))
        assert free.tokens == ["d", "c", "b", "a"]
        assert limited.tokens == list("abcd")


class TestNbest:
    def setup_method(self):
        self.words = ["a", "b"]
        self.table = identity_table(self.words, {"a": [("A", 0.5)], "b": [("B", 0.25)]})
        self.lm = uniform_lm(["a", "b", "A", "B"])
        self.weights = FeatureWeights(1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0)

    def test_one_best_equals_decode(self):
        best = nbest(["a", "b"], self.table, self.lm, self.weights, n=1)
        single = decode(["a", "b"], self.table, self.lm, self.weights)
        assert len(best) == 1
        assert best[0].tokens == single.tokens
        assert best[0].total == single.total

    def test_enumerates_synonym_combinations_in_order(self):
        params = DecodeParams(stack_size=None, distortion_limit=0, table_limit=None)
        got = nbest(["a", "b"], self.table, self.lm, self.weights, params, n=4)
        lm_total = {}
        for x, y in itertools.product(["a", "A"], ["b", "B"]):
            lm_total[(x, y)] = LN10 * lm_score(self.lm, [x, y])
        phrase = {"a": 0.0, "b": 0.0, "A": math.log(0.5), "B": math.log(0.25)}
        expected = sorted(((phrase[x] + phrase[y] + lm_total[(x, y)], f"{x} {y}") for x, y in lm_total),
                          key=lambda p: (-p[0], p[1]))
        assert [t.text for t in got] == [text for _, text in expected]
        for t, (total, _) in zip(got, expected):
            assert t.total == pytest.approx(total, abs=1e-9)

    def test_short_list_not_padded(self):
        got = nbest(["a"], identity_table(["a"]), self.lm, self.weights, n=10)
        assert [t.text for t in got] == ["a"]

    def test_distinct_and_descending(self):
        got = nbest(["a", "b", "a"], self.table, self.lm, FeatureWeights(), n=50)
        texts = [t.text for t in got]
        assert len(texts) == len(set(texts))
        totals = [t.total for t in got]
        assert totals == sorted(totals, reverse=True)
        for t in got:
            assert t.total == pytest.approx(FeatureWeights().dot([t.features[f] for f in FEATURES]), abs=1e-9)

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            Decoder(self.table, self.lm, self.weights).nbest(["a"], 0)

    def test_format_round_trip(self):
        got = nbest(["a", "b"], self.table, self.lm, self.weights, n=3)
        for line in format_nbest(7, got):
            sent, tokens, feats, total = parse_nbest_line(line)
            assert sent == 7
            assert list(feats) == list(FEATURES)
            assert total == pytest.approx(self.weights.dot(feats.values()), abs=1e-5)
        assert format_nbest(7, got)[0].startswith("7 ||| ")

    def test_bad_nbest_line(self):
        with pytest.raises(FormatError):
            parse_nbest_line("1 ||| a b ||| x")


class TestConsistency:
    def test_oov_flags_match_oov_count(self, bundle):
        from lexsmt.textprep import read_lines
        train = [l.split() for l in read_lines(bundle / "train.si")][:40]
        table = PhraseTable()
        for sent in train:
            for tok in sent:
                if not table.get([tok]):
                    table.add([tok], [tok], (1.0, 1.0, 1.0, 1.0))
        test = [l.split() for l in read_lines(bundle / "test.si")]
        lm = uniform_lm(sorted(table.source_vocab()))
        decoder = Decoder(table, lm, FeatureWeights())
        flagged = sum(decoder.decode(s).oov_count for s in test)
        assert flagged == oov_count(test, table) > 0


class TestWeights:
    def test_file_round_trip(self, tmp_path):
        weights = FeatureWeights(0.1, -0.2, 1 / 3, 0.4, 1.0, -0.6, -0.7, 0.8)
        weights.write(tmp_path / "w.txt")
        assert FeatureWeights.read(tmp_path / "w.txt") == weights

    def test_defaults(self):
        assert FeatureWeights().vector() == (1.0,) * 6 + (-1.0, 1.0)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            FeatureWeights(lm=math.inf)

    def test_bad_file(self, tmp_path):
        (tmp_path / "w.txt").write_text("lm = 1\nbogus = 2\n")
        with pytest.raises(FormatError, match=":2:"):
            FeatureWeights.read(tmp_path / "w.txt")
