import numpy as np
import pytest

from distag import (Corpus, DataError, EvalTagMap, TokenizerConfig,
                    build_vocabulary, collapse_tag, load_gold, tokenize_stream)
from distag.corpus import EXCLUDED, EXCLUDED_ID

from conftest import make_gold


def forms_of(tokens, forms):
    return [forms[t.form_id] for t in tokens]


class TestTokenizer:
    def test_whitespace_and_punct_split(self):
        tokens, forms = tokenize_stream("the dog ran.")
        assert forms_of(tokens, forms) == ["the", "dog", "ran", "."]
        assert [t.is_punct for t in tokens] == [False, False, False, True]

    def test_empty_input(self):
        tokens, forms = tokenize_stream("")
        assert tokens == [] and forms == []

    def test_blank_line_sets_boundary(self):
        tokens, forms = tokenize_stream("one two\n\nthree four")
        assert forms_of(tokens, forms) == ["one", "two", "three", "four"]
        assert [t.boundary_before for t in tokens] == [True, False, True, False]

    def test_sentence_end_sets_boundary(self):
        tokens, forms = tokenize_stream("a. b")
        assert [t.boundary_before for t in tokens] == [True, False, True]

    def test_positions_consecutive(self):
        tokens, _ = tokenize_stream("a b c. d e")
        assert [t.position for t in tokens] == list(range(len(tokens)))

    def test_lowercase_flag(self):
        _, forms = tokenize_stream("The Dog", TokenizerConfig(lowercase=True))
        assert forms == ["the", "dog"]
        _, forms = tokenize_stream("The Dog")
        assert forms == ["The", "Dog"]


class TestVocabulary:
    def test_counts_and_ranks(self):
        tokens, forms = tokenize_stream("a b a")
        vocab = build_vocabulary(tokens, forms)
        assert vocab.freq[vocab.id_of("a")] == 2
        assert vocab.freq[vocab.id_of("b")] == 1
        assert vocab.rank[vocab.id_of("a")] == 1
        assert vocab.rank[vocab.id_of("b")] == 2

    def test_single_token(self):
        tokens, forms = tokenize_stream("x")
        vocab = build_vocabulary(tokens, forms)
        assert len(vocab) == 1 and vocab.rank[vocab.id_of("x")] == 1

    def test_tie_broken_by_first_occurrence(self):
        tokens, forms = tokenize_stream("a b")
        vocab = build_vocabulary(tokens, forms)
        assert vocab.rank[vocab.id_of("a")] == 1
        assert vocab.rank[vocab.id_of("b")] == 2

    def test_rank_is_permutation_and_sorted(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            words = [f"w{i}" for i in range(rng.integers(2, 30))]
            text = " ".join(rng.choice(words, size=rng.integers(10, 300)))
            tokens, forms = tokenize_stream(text)
            vocab = build_vocabulary(tokens, forms)
            assert sorted(vocab.rank) == list(range(1, len(vocab) + 1))
            by_rank = np.argsort(vocab.rank)
            freqs = vocab.freq[by_rank]
            assert all(freqs[i] >= freqs[i + 1] for i in range(len(freqs) - 1))
            assert vocab.freq.sum() == len(tokens)

    def test_top_words(self):
        tokens, forms = tokenize_stream("a a a b b c")
        vocab = build_vocabulary(tokens, forms)
        assert [forms[i] for i in vocab.top(2)] == ["a", "b"]
        with pytest.raises(ValueError):
            vocab.top(99)


class TestTagMap:
    def test_table_collapsing(self):
        m = EvalTagMap.default()
        assert collapse_tag("RBR", m) == "RB"
        assert collapse_tag("PDT", m) == "DT"
        assert collapse_tag("ADN", m) == "ADN"
        assert collapse_tag("VBZ", m) == "VBD"
        assert collapse_tag("TO", m) == "TO"
        assert collapse_tag(",", m) == EXCLUDED
        assert m.is_punct(",") and not m.is_punct("UH")

    def test_unknown_tag_raises(self):
        with pytest.raises(DataError, match="JJ"):
            collapse_tag("JJ", EvalTagMap.default())

    def test_load_rejects_bad_lines(self, tmp_path):
        path = tmp_path / "bad.map"
        path.write_text("NN\tN\nbroken line\n")
        with pytest.raises(DataError, match="bad.map:2"):
            EvalTagMap.load(str(path))

    def test_map_value_must_be_known(self):
        with pytest.raises(DataError):
            EvalTagMap({"NN": "NOUN"})


class TestLoadGold:
    def test_collapses_tags(self):
        corpus = make_gold([("walks", "VBZ"), ("to", "TO")],
                           mapping={"VBZ": "VBD", "TO": "TO"}, punct=())
        assert corpus.token(0).gold_tag == "VBD"
        assert corpus.token(1).gold_tag == "TO"

    def test_rare_source_tag_excluded(self):
        lines = [("w", "AA")] * 99 + [("v", "BB")] * 150
        corpus = make_gold(lines, mapping={"AA": "N", "BB": "VB"}, punct=(),
                           min_tag_count=100)
        assert corpus.token(0).gold_tag == EXCLUDED
        assert corpus.token(120).gold_tag == "VB"

    def test_rare_eval_tag_excluded(self):
        # two source tags of 60 each collapse to one eval tag of 120: the
        # sources are rare even though the collapsed tag is not
        lines = [("a", "AA")] * 60 + [("b", "BB")] * 60 + [("c", "CC")] * 150
        corpus = make_gold(lines, mapping={"AA": "N", "BB": "N", "CC": "CC"},
                           punct=(), min_tag_count=100)
        assert all(corpus.token(i).gold_tag == EXCLUDED for i in range(120))

    def test_malformed_line_reports_number(self):
        tag_map = EvalTagMap({"N": "N"})
        with pytest.raises(DataError, match=":2"):
            load_gold("a\tN\nmangled\n", tag_map)

    def test_unknown_source_tag_reports_number(self):
        tag_map = EvalTagMap({"N": "N"})
        with pytest.raises(DataError, match=":3"):
            load_gold("a\tN\nb\tN\nc\tXX\n", tag_map)

    def test_boundaries_from_blank_lines(self):
        corpus = make_gold([("a", "N"), None, ("b", "N")], min_tag_count=0)
        assert list(corpus.boundary_before) == [True, True]

    def test_punct_flag_from_map(self):
        corpus = make_gold([("a", "N"), (",", "PUNCT"), ("b", "N")],
                           min_tag_count=0)
        assert list(corpus.is_punct) == [False, True, False]
        assert corpus.token(1).gold_tag == EXCLUDED

    def test_every_token_has_gold(self):
        corpus = make_gold([("a", "N"), (",", "PUNCT")] * 60, min_tag_count=0)
        assert corpus.has_gold
        assert (corpus.gold >= 0).all()

    def test_round_trip_bytes(self):
        text = "the\tDT\ndog\tNN\n\nit\tPRP\nran\tVBD\n.\t.\n"
        tag_map = EvalTagMap.default()
        corpus = load_gold(text, tag_map, min_tag_count=0)
        assert corpus.gold_text() == text
        again = load_gold(corpus.gold_text(), tag_map, min_tag_count=0)
        assert again.gold_text() == text


def test_from_text_builds_columns():
    corpus = Corpus.from_text("a b. c\n\nd a")
    assert len(corpus) == 6
    assert corpus.vocab.freq.sum() == len(corpus)
    assert not corpus.has_gold
    assert corpus.is_punct[2]


def test_invalid_utf8_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_bytes(b"ok so far \xff\xfe not utf8")
    with pytest.raises(DataError, match="byte 10"):
        Corpus.from_file(str(path))
