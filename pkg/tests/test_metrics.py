import math
import random

import pytest
from hypothesis import given, strategies as st

from lexsmt.metrics import (REPORT_HEADER, bleu, bleu_from_stats, oov_count, oov_tokens, report_row,
                            sentence_stats)
from lexsmt.phrase import PhraseTable
from oracles import brute_bleu

WORDS = list("abcdef")


def random_corpus(rng, size):
    def sent():
        return [rng.choice(WORDS) for _ in range(rng.randint(1, 12))]
    return [sent() for _ in range(size)], [sent() for _ in range(size)]


class TestBleu:
    @pytest.mark.parametrize("seed", range(20))
    def test_matches_brute_force(self, seed):
        rng = random.Random(seed)
        cands, refs = random_corpus(rng, rng.randint(1, 8))
        assert bleu(cands, refs).score == pytest.approx(brute_bleu(cands, refs), abs=1e-9)

    @given(st.lists(st.lists(st.sampled_from(WORDS), min_size=4, max_size=10), min_size=1, max_size=5))
    def test_identity_is_one(self, sents):
        assert bleu(sents, sents).score == 1.0

    def test_identity_long_sentences(self):
        sents = [["the", "man", "came", "home", "today"], ["we", "worked", "all", "day"]]
        assert bleu(sents, sents).score == 1.0

    def test_clipped_precision(self):
        # "the" occurs once in the reference, so only one of four matches counts
        result = bleu([["the"] * 4], [["the", "cat"]])
        assert result.precisions[0] == 0.25
        assert result.precisions[1:] == [0.0, 0.0, 0.0]
        assert result.score == 0.0

    def test_clipped_precision_two_references_tokens(self):
        result = bleu([["the"] * 4], [["the", "cat", "on", "the", "mat"]])
        assert result.precisions[0] == 0.5
        assert result.score == 0.0

    def test_brevity_penalty(self):
        result = bleu([list("abcd")], [list("abcdabcd")])
        assert result.brevity_penalty == pytest.approx(math.exp(-1.0))

    @pytest.mark.parametrize("seed", range(5))
    def test_pairing_order_irrelevant(self, seed):
        rng = random.Random(100 + seed)
        cands, refs = random_corpus(rng, 6)
        order = list(range(6))
        rng.shuffle(order)
        shuffled = bleu([cands[i] for i in order], [refs[i] for i in order]).score
        assert shuffled == pytest.approx(bleu(cands, refs).score, abs=1e-12)

    @given(st.lists(st.tuples(st.lists(st.sampled_from(WORDS), max_size=8),
                              st.lists(st.sampled_from(WORDS), max_size=8)), min_size=1, max_size=5))
    def test_in_unit_interval(self, pairs):
        cands, refs = zip(*pairs)
        assert 0.0 <= bleu(cands, refs).score <= 1.0

    def test_smoothing_only_when_requested(self):
        stats = sentence_stats(list("abxy"), list("abcd"))
        assert bleu_from_stats(stats).score == 0.0
        assert bleu_from_stats(stats, smooth=True).score > 0.0

    def test_smoothed_zero_order(self):
        result = bleu_from_stats(sentence_stats(list("abxy"), list("abcd")), smooth=True)
        # two trigram slots with no match -> 1 / 3
        assert result.precisions[2] == pytest.approx(1 / 3)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            bleu([["a"]], [])

    def test_empty(self):
        with pytest.raises(ValueError):
            bleu([], [])


class TestOov:
    def setup_method(self):
        self.table = PhraseTable()
        self.table.add(["ඉඩම්", "ප්‍රතිසංස්කරණ"], ["Land", "Reform"], (1, 1, 1, 1))
        self.table.add(["කොමිෂන්", "සභාව"], ["Commission"], (1, 1, 1, 1))

    def test_inflected_token_counts_once(self):
        source = [["ඉඩම්", "ප්‍රතිසංස්කරණ", "කොමිෂන්", "සභාවෙන්"]]
        assert oov_count(source, self.table) == 1
        assert oov_tokens(source, self.table) == ["සභාවෙන්"]

    def test_tokens_versus_types(self):
        source = [["x", "x", "සභාව"], ["x", "y"]]
        assert oov_count(source, self.table, "tokens") == 4
        assert oov_count(source, self.table, "types") == 2

    def test_non_increasing_under_growth(self):
        source = [["x", "y", "ඉඩම්"], ["z"]]
        before = oov_count(source, self.table)
        self.table.add(["y", "z"], ["q"], (1, 1, 1, 1))
        assert oov_count(source, self.table) == before - 2

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            oov_count([], self.table, "lines")


def test_report_row():
    result = bleu([list("abcd")], [list("abcd")])
    row = report_row("A1", "si-en", result, 3, 2)
    assert REPORT_HEADER.split("\t") == ["config_id", "direction", "bleu_x100", "oov_tokens", "oov_types"]
    assert row == "A1\tsi-en\t100.00\t3\t2"
