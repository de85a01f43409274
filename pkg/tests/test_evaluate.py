import numpy as np
import pytest

from distag import (DataError, accuracy, f_measure, map_clusters_to_tags,
                    render_report, report_from_counts, score)
from distag.corpus import EVAL_TAGS, EXCLUDED_ID
from distag.evaluate import NONE_TAG, parse_delimited_report
from distag.induce import ASSIGNED, SKIPPED, UNASSIGNED_STATE, InducedTagging

from conftest import make_gold


def tagging_of(clusters, states=None):
    clusters = np.asarray(clusters, dtype=np.int32)
    if states is None:
        states = np.full(len(clusters), ASSIGNED, np.uint8)
        states[clusters < 0] = UNASSIGNED_STATE
    return InducedTagging(np.asarray(states, np.uint8), clusters)


def gold_corpus(tags):
    return make_gold([(f"w{i}", t) for i, t in enumerate(tags)],
                     min_tag_count=0)


class TestFMeasure:
    def test_published_rates(self):
        # correct/incorrect/frequency triples from the benchmark tables
        p, r = 38282 / (38282 + 19528), 38282 / 108586
        assert f_measure(p, r) == pytest.approx(0.46, abs=0.005)
        p, r = 25181 / 25208, 25181 / 25196
        assert f_measure(p, r) == pytest.approx(1.00, abs=0.005)

    def test_equal_arguments(self):
        for v in (0.2, 0.5, 0.9):
            assert f_measure(v, v) == pytest.approx(v)

    def test_zero_is_zero(self):
        assert f_measure(0.0, 0.9) == 0.0
        assert f_measure(0.9, 0.0) == 0.0

    def test_symmetry_at_half(self):
        assert f_measure(0.3, 0.8) == pytest.approx(f_measure(0.8, 0.3))

    def test_alpha_weighting(self):
        assert f_measure(0.5, 1.0, alpha=1.0) == pytest.approx(0.5)


class TestMapping:
    def test_majority(self):
        gold = gold_corpus(["N"] * 10 + ["VB"] * 2)
        tagging = tagging_of([0] * 12)
        mapping = map_clusters_to_tags(tagging, gold)
        assert EVAL_TAGS[mapping[0]] == "N"

    def test_empty_cluster_maps_to_none(self):
        gold = gold_corpus(["N", "N", "PUNCT"])
        gold.is_punct[:] = False
        tagging = tagging_of([0, 0, 1])  # cluster 1 has only EXCLUDED gold
        mapping = map_clusters_to_tags(tagging, gold)
        assert mapping[1] == NONE_TAG

    def test_tie_prefers_globally_rarer_tag(self):
        # cluster 0 splits 2/2 between N and VB; N is globally more common
        gold = gold_corpus(["N", "N", "VB", "VB", "N", "N"])
        tagging = tagging_of([0, 0, 0, 0, 1, 1])
        mapping = map_clusters_to_tags(tagging, gold)
        assert EVAL_TAGS[mapping[0]] == "VB"

    def test_no_eligible_tokens_is_error(self):
        gold = gold_corpus(["PUNCT", "PUNCT"])
        gold.is_punct[:] = False
        tagging = tagging_of([0, 0])
        with pytest.raises(DataError):
            map_clusters_to_tags(tagging, gold)

    def test_unassigned_tokens_do_not_vote(self):
        gold = gold_corpus(["N", "VB", "VB"])
        tagging = tagging_of([0, -1, -1])
        mapping = map_clusters_to_tags(tagging, gold)
        assert EVAL_TAGS[mapping[0]] == "N"

    def test_planted_clusters_recover_classes(self, planted_corpus):
        corpus = planted_corpus
        clusters = np.zeros(len(corpus), np.int32)
        clusters[corpus.gold == EVAL_TAGS.index("N")] = 1
        clusters[corpus.gold == EVAL_TAGS.index("VBD")] = 2
        mapping = map_clusters_to_tags(tagging_of(clusters), corpus)
        assert [EVAL_TAGS[mapping[c]] for c in (0, 1, 2)] == ["DT", "N", "VBD"]


class TestScore:
    def test_published_row_arithmetic(self):
        report = report_from_counts([("DT", 129626, 2, 125540, 31783)])
        row = report.row("DT")
        assert row.precision == pytest.approx(0.80, abs=0.005)
        assert row.recall == pytest.approx(0.97, abs=0.005)
        assert row.f == pytest.approx(0.87, abs=0.005)

    def test_zero_cluster_tag_scores_zero(self):
        report = report_from_counts([("CC", 36808, 0, 0, 0)])
        row = report.row("CC")
        assert (row.precision, row.recall, row.f) == (0.0, 0.0, 0.0)

    def test_perfect_tagging(self, planted_corpus):
        corpus = planted_corpus
        clusters = corpus.gold.astype(np.int32)
        report = score(tagging_of(clusters), corpus)
        for tag in ("DT", "N", "VBD"):
            row = report.row(tag)
            assert (row.precision, row.recall, row.f) == (1.0, 1.0, 1.0)
            assert row.n_classes == 1
        assert report.macro_f == 1.0

    def test_invariant_under_cluster_renumbering(self, planted_corpus):
        corpus = planted_corpus
        clusters = corpus.gold.astype(np.int32)
        one = score(tagging_of(clusters), corpus)
        two = score(tagging_of(19 - clusters), corpus)
        for r1, r2 in zip(one.rows, two.rows):
            assert (r1.correct, r1.incorrect, r1.f) == (r2.correct, r2.incorrect, r2.f)

    def test_correct_bounded_by_frequency(self, planted_corpus):
        corpus = planted_corpus
        rng = np.random.default_rng(0)
        clusters = rng.integers(0, 4, size=len(corpus)).astype(np.int32)
        report = score(tagging_of(clusters), corpus)
        for row in report.rows:
            assert row.correct <= row.frequency
            assert 0.0 <= row.recall <= 1.0
            assert 0.0 <= row.precision <= 1.0
        assert sum(r.n_classes for r in report.rows) <= 4

    def test_unassigned_stay_in_recall_denominator(self):
        gold = gold_corpus(["N"] * 10)
        clusters = np.array([0] * 6 + [-1] * 4, np.int32)
        report = score(tagging_of(clusters), gold)
        row = report.row("N")
        assert row.frequency == 10
        assert row.recall == pytest.approx(0.6)

    def test_skipped_leave_recall_denominator(self):
        gold = gold_corpus(["N"] * 10)
        states = np.array([ASSIGNED] * 6 + [SKIPPED] * 4, np.uint8)
        clusters = np.array([0] * 6 + [-1] * 4, np.int32)
        report = score(InducedTagging(states, clusters), gold)
        row = report.row("N")
        assert row.frequency == 6
        assert row.recall == pytest.approx(1.0)

    def test_misaligned_lengths_rejected(self):
        gold = gold_corpus(["N", "N"])
        with pytest.raises(DataError, match="tokens"):
            score(tagging_of([0]), gold)

    def test_macro_is_unweighted_mean_of_present_tags(self):
        report = report_from_counts([
            ("N", 100, 1, 80, 20),
            ("VB", 100, 1, 40, 10),
            ("CC", 50, 0, 0, 0),
        ])
        rows = {r.tag: r for r in report.rows}
        assert report.macro_precision == pytest.approx(
            (rows["N"].precision + rows["VB"].precision + 0.0) / 3)
        assert report.macro_f == pytest.approx(
            (rows["N"].f + rows["VB"].f + 0.0) / 3)


class TestAccuracy:
    def test_counts_unassigned_as_misses(self):
        gold = gold_corpus(["N"] * 8 + ["VB"] * 2)
        clusters = np.array([0] * 6 + [-1] * 2 + [1] * 2, np.int32)
        mapping = map_clusters_to_tags(tagging_of(clusters), gold)
        acc = accuracy(tagging_of(clusters), gold, mapping)
        assert acc == pytest.approx(0.8)

    def test_positions_subset(self):
        gold = gold_corpus(["N", "N", "VB", "VB"])
        clusters = np.array([0, 0, 0, 1], np.int32)
        mapping = map_clusters_to_tags(tagging_of(clusters), gold)
        acc = accuracy(tagging_of(clusters), gold, mapping,
                       positions=np.array([2, 3]))
        assert acc == pytest.approx(0.5)


class TestRendering:
    def test_text_row_matches_published_format(self):
        report = report_from_counts([("DT", 129626, 2, 125540, 31783)])
        text = render_report(report, "text")
        line = next(l for l in text.splitlines() if l.startswith("DT"))
        assert line.split() == ["DT", "129626", "2", "125540", "31783",
                                "0.80", "0.97", "0.87"]

    def test_empty_report(self):
        text = render_report(report_from_counts([]), "text")
        lines = text.splitlines()
        assert lines[0].split() == ["tag", "frequency", "classes", "correct",
                                    "incorrect", "precision", "recall", "F"]
        assert lines[1].split() == ["avg.", "0.00", "0.00", "0.00"]

    def test_delimited_round_trip(self):
        report = report_from_counts([
            ("DT", 129626, 2, 125540, 31783),
            ("N", 231434, 98, 193838, 79652),
            ("CC", 36808, 0, 0, 0),
        ], provenance={"seed": "7"})
        text = render_report(report, "tsv")
        back = parse_delimited_report(text)
        assert back.provenance["seed"] == "7"
        for before, after in zip(report.rows, back.rows):
            assert before == after
        assert back.macro_f == report.macro_f

    def test_provenance_in_text_output(self):
        report = report_from_counts([("N", 10, 1, 7, 1)],
                                    provenance={"config": "abc", "seed": 3})
        text = render_report(report, "text")
        assert "# config abc" in text and "# seed 3" in text
