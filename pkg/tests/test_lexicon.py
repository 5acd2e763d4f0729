from collections import Counter

import pytest
from hypothesis import given, strategies as st

from lexsmt.lexicon import filter_list, integrate
from lexsmt.morphgen import LexiconEntry, read_lexicon
from lexsmt.textprep import SentencePair, Vocabulary, build_vocab, read_parallel


def entry(src, tgt="x"):
    return LexiconEntry(tuple(src.split()), tuple(tgt.split()))


VOCAB = Vocabulary(Counter({"සභාව": 3, "ඉඩම්": 1, "මහ": 2}))


class TestFilter:
    def test_absent_term_kept(self):
        kept, report = filter_list([entry("බැංකුව")], VOCAB)
        assert kept == [entry("බැංකුව")]
        assert report.kept == 1 and report.removed == 0

    def test_known_single_token_removed(self):
        kept, report = filter_list([entry("සභාව", "council")], VOCAB)
        assert kept == []
        assert report.rows[0][1:] == ("removed", "all-tokens-known")

    def test_empty_corpus_keeps_all(self):
        lexicon = [entry("සභාව"), entry("මහ බැංකුව")]
        assert filter_list(lexicon, Vocabulary())[0] == lexicon

    def test_token_mode_needs_every_token(self):
        kept, _ = filter_list([entry("මහ සභාව"), entry("මහ බැංකුව")], VOCAB)
        assert kept == [entry("මහ බැංකුව")]

    def test_phrase_mode_needs_contiguous_match(self):
        sentences = [("මහ", "x", "සභාව"), ("ඉඩම්", "සභාව")]
        kept, report = filter_list([entry("මහ සභාව"), entry("ඉඩම් සභාව")], VOCAB, "phrase", sentences)
        assert kept == [entry("මහ සභාව")]
        assert report.reasons() == Counter({"phrase-absent": 1, "phrase-in-corpus": 1})

    def test_phrase_mode_requires_sentences(self):
        with pytest.raises(ValueError):
            filter_list([], VOCAB, "phrase")

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            filter_list([], VOCAB, "fuzzy")

    @given(st.lists(st.sampled_from(["සභාව", "ඉඩම්", "මහ", "බැංකුව", "මහ බැංකුව", "ඉඩම් සභාව"]), max_size=12),
           st.sampled_from(["token", "phrase"]))
    def test_subset_and_idempotent(self, terms, mode):
        lexicon = [entry(t) for t in terms]
        sentences = [("මහ", "සභාව"), ("ඉඩම්",)]
        once, _ = filter_list(lexicon, VOCAB, mode, sentences)
        twice, _ = filter_list(once, VOCAB, mode, sentences)
        assert once == twice
        assert all(e in lexicon for e in once)

    def test_report_tsv(self, tmp_path):
        _, report = filter_list([entry("සභාව", "council"), entry("බැංකුව", "bank")], VOCAB)
        report.write_tsv(tmp_path / "r.tsv")
        lines = (tmp_path / "r.tsv").read_text(encoding="utf-8").splitlines()
        assert lines[0].split("\t")[-2:] == ["removed", "all-tokens-known"]
        assert lines[1].split("\t")[-2:] == ["kept", "unknown-token"]


class TestIntegrate:
    def test_appends_after_corpus(self):
        corpus = [SentencePair([f"s{i}"], [f"t{i}"]) for i in range(100)]
        lexicon = [entry(f"l{i}", f"m{i}") for i in range(10)]
        out = integrate(corpus, lexicon)
        assert len(out) == 110
        assert out[:100] == corpus
        assert [p.source for p in out[100:]] == [e.source_term for e in lexicon]
        assert {p.origin for p in out[100:]} == {"list"}

    def test_empty_list_is_identity(self):
        corpus = [SentencePair(["a"], ["b"])]
        assert integrate(corpus, []) == corpus

    def test_augmented_entries_marked(self):
        e = LexiconEntry(("මිනිසාට",), ("to", "the", "man"), "dictionary", {"augmented"})
        assert integrate([], [e])[0].origin == "augmented-list"

    def test_dictionary_grows_training_vocabulary(self, bundle):
        corpus = read_parallel(bundle / "train.si", bundle / "train.en")
        lexicon = read_lexicon(bundle / "dictionary.tsv")
        before = build_vocab(corpus, "source")
        after = build_vocab(integrate(corpus, lexicon), "source")
        assert len(after) > len(before)
