from collections import Counter

import pytest
from hypothesis import given, strategies as st

from lexsmt.errors import FormatError
from lexsmt.textprep import (SentencePair, TruecaseModel, Vocabulary, build_vocab, clean, detokenize,
                             read_parallel, tokenize, truecase, violates_clean, write_parallel)


def pair(ns, nt):
    return SentencePair(["s"] * ns, ["t"] * nt)


class TestTokenize:
    def test_terminal_punctuation(self):
        assert tokenize("Land Reform Commission.") == ["Land", "Reform", "Commission", "."]

    def test_sinhala_conjuncts_survive(self):
        # the zero-width joiner inside the second word is not a split point
        assert tokenize("ඉඩම් ප්‍රතිසංස්කරණ කොමිෂන් සභාව", "si") == ["ඉඩම්", "ප්‍රතිසංස්කරණ", "කොමිෂන්", "සභාව"]

    def test_empty(self):
        assert tokenize("") == []
        assert tokenize("   ") == []

    def test_symbols_and_apostrophes(self):
        assert tokenize("the man's $5") == ["the", "man", "'", "s", "$", "5"]

    def test_tamil_words_unsplit(self):
        assert tokenize("நிலச் சீர்திருத்த ஆணைக்குழு", "ta") == ["நிலச்", "சீர்திருத்த", "ஆணைக்குழு"]

    @given(st.text(alphabet=st.sampled_from("ab .,!'සභාව්‍ර"), max_size=30))
    def test_idempotent(self, text):
        once = tokenize(text, "si")
        assert tokenize(" ".join(once), "si") == once

    def test_detokenize_joins(self):
        assert detokenize(["a", "b"]) == "a b"


class TestTruecase:
    def test_frequent_lowercase_wins(self):
        model = TruecaseModel({"the": Counter({"the": 50})})
        assert truecase(["The", "man"], model) == ["the", "man"]

    def test_majority_casing(self):
        model = TruecaseModel({"commission": Counter({"Commission": 10, "commission": 2})})
        assert truecase(["Commission"], model) == ["Commission"]

    def test_unseen_lowercased(self):
        assert truecase(["Xyzzy", "said"], TruecaseModel()) == ["xyzzy", "said"]

    def test_tie_goes_to_smallest_form(self):
        model = TruecaseModel({"bank": Counter({"bank": 3, "Bank": 3})})
        assert truecase(["BANK"], model) == ["Bank"]

    def test_caseless_scripts_unchanged(self):
        assert truecase(["Xyzzy"], TruecaseModel(), "si") == ["Xyzzy"]

    def test_only_first_token(self):
        assert truecase(["The", "Central", "Bank"], TruecaseModel()) == ["the", "Central", "Bank"]

    def test_train_counts_every_position(self):
        model = TruecaseModel.train([["The", "Bank"], ["the", "bank"], ["a", "Bank"]])
        assert model.best("bank") == "Bank"
        assert model.best("THE") in ("The", "the")

    def test_round_trip(self, tmp_path):
        model = TruecaseModel.train([["The", "Bank"], ["the", "bank"], ["a", "Bank"]])
        model.write(tmp_path / "tc")
        again = TruecaseModel.read(tmp_path / "tc")
        for word in ("bank", "the", "a"):
            assert again.best(word) == model.best(word)


class TestClean:
    def test_ratio_ten_to_one_removed(self):
        assert clean([pair(10, 1)]) == []

    def test_ratio_nine_to_one_kept(self):
        assert clean([pair(9, 1)]) == [pair(9, 1)]

    def test_balanced_kept(self):
        assert clean([pair(3, 3)]) == [pair(3, 3)]

    def test_empty_and_long(self):
        assert violates_clean(pair(0, 2)) == "empty"
        assert violates_clean(pair(81, 80)) == "too-long"
        assert violates_clean(pair(80, 80)) is None

    @given(st.lists(st.tuples(st.integers(0, 100), st.integers(0, 100)), max_size=30))
    def test_matches_brute_force_refilter(self, sizes):
        pairs = [pair(a, b) for a, b in sizes]

        def keep(a, b):
            return a > 0 and b > 0 and a <= 80 and b <= 80 and max(a, b) / min(a, b) <= 9.0

        assert clean(pairs) == [pair(a, b) for a, b in sizes if keep(a, b)]


class TestVocabulary:
    def test_direct_count(self):
        pairs = [SentencePair(["a", "b"], ["x"]), SentencePair(["a"], ["y"])]
        assert build_vocab(pairs, "source").counts == Counter({"a": 2, "b": 1})

    def test_empty(self):
        assert len(build_vocab([], "target")) == 0

    def test_bad_side(self):
        with pytest.raises(ValueError):
            build_vocab([], "middle")

    def test_fixture_recount(self, bundle):
        pairs = read_parallel(bundle / "train.si", bundle / "train.en")
        vocab = build_vocab(pairs, "source")
        recount = {}
        with open(bundle / "train.si", encoding="utf-8") as fh:
            for line in fh:
                for tok in line.split():
                    recount[tok] = recount.get(tok, 0) + 1
        assert dict(vocab.counts) == recount
        assert vocab.total == sum(len(p.source) for p in pairs)

    def test_tsv_sorted_and_round_trips(self, tmp_path):
        vocab = Vocabulary(Counter({"b": 2, "a": 2, "c": 5}))
        vocab.write_tsv(tmp_path / "v.tsv")
        assert (tmp_path / "v.tsv").read_text().splitlines() == ["c\t5", "a\t2", "b\t2"]
        assert Vocabulary.read_tsv(tmp_path / "v.tsv").counts == vocab.counts

    def test_tsv_error_has_line_number(self, tmp_path):
        (tmp_path / "v.tsv").write_text("a\t1\nb\tx\n")
        with pytest.raises(FormatError, match=":2:"):
            Vocabulary.read_tsv(tmp_path / "v.tsv")


class TestParallelFiles:
    def test_round_trip(self, tmp_path):
        pairs = [SentencePair(["a", "b"], ["x"]), SentencePair(["c"], ["y", "z"])]
        write_parallel(pairs, tmp_path / "s", tmp_path / "t")
        assert read_parallel(tmp_path / "s", tmp_path / "t") == pairs

    def test_line_count_mismatch(self, tmp_path):
        (tmp_path / "s").write_text("a\nb\n")
        (tmp_path / "t").write_text("x\n")
        with pytest.raises(ValueError):
            read_parallel(tmp_path / "s", tmp_path / "t")

    def test_unknown_origin_rejected(self):
        with pytest.raises(ValueError):
            SentencePair(["a"], ["b"], "web")
