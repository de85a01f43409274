"""Many-to-one evaluation of an induced tagging against gold tags.

Each cluster is mapped to the gold tag most frequent among its assigned,
evaluation-eligible tokens (ties toward the globally rarer tag, then
lexicographic). Per tag: precision is correct/(correct+incorrect) over the
tokens of that tag's clusters, recall divides correct by the tag's token
count within the experiment's scope. SKIPPED tokens are out of scope and do
not enter recall denominators; UNASSIGNED tokens stay in them as unrecalled
gold. Macro averages are unweighted means over the tags that occur.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .corpus import EVAL_TAGS, EXCLUDED_ID, Corpus
from .errors import DataError
from .induce import ASSIGNED, SKIPPED, InducedTagging

N_TAGS = len(EVAL_TAGS)
NONE_TAG = -1  # cluster has no eligible members


def f_measure(precision: float, recall: float, alpha: float = 0.5) -> float:
    """Weighted harmonic combination of precision and recall; 0 when either
    is 0 (the formula is singular there)."""
    if precision <= 0.0 or recall <= 0.0:
        return 0.0
    return 1.0 / (alpha / precision + (1.0 - alpha) / recall)


@dataclass
class TagRow:
    tag: str
    frequency: int
    n_classes: int
    correct: int
    incorrect: int
    precision: float
    recall: float
    f: float


@dataclass
class EvaluationReport:
    rows: list[TagRow]
    macro_precision: float
    macro_recall: float
    macro_f: float
    provenance: dict = field(default_factory=dict)

    def row(self, tag: str) -> TagRow:
        for r in self.rows:
            if r.tag == tag:
                return r
        raise KeyError(tag)


def _check_eligible(tagging: InducedTagging, corpus: Corpus) -> np.ndarray:
    if len(tagging) != len(corpus):
        raise DataError(f"tagging has {len(tagging)} tokens but the corpus "
                        f"has {len(corpus)}")
    if not corpus.has_gold:
        raise DataError("corpus has no gold tags to evaluate against")
    return ((tagging.states == ASSIGNED)
            & (corpus.gold >= 0) & (corpus.gold < N_TAGS))


def _contingency(tagging: InducedTagging, corpus: Corpus,
                 eligible: np.ndarray) -> np.ndarray:
    k = int(tagging.clusters[eligible].max()) + 1 if eligible.any() else 0
    table = np.zeros((k, N_TAGS), dtype=np.int64)
    np.add.at(table, (tagging.clusters[eligible], corpus.gold[eligible]), 1)
    return table


def map_clusters_to_tags(tagging: InducedTagging,
                         corpus: Corpus) -> dict[int, int]:
    """Majority-vote mapping from cluster id to gold tag id.

    Only assigned tokens whose gold tag is in the evaluation set vote.
    Ties break toward the tag with the smaller global eligible count, then
    by tag name. Clusters with no eligible members map to NONE_TAG.
    """
    eligible = _check_eligible(tagging, corpus)
    if not eligible.any():
        raise DataError("no eligible tokens: nothing is both assigned and "
                        "gold-tagged inside the evaluation set")
    table = _contingency(tagging, corpus, eligible)
    totals = table.sum(axis=0)
    mapping: dict[int, int] = {}
    for c in range(table.shape[0]):
        row = table[c]
        best = int(row.max())
        if best == 0:
            mapping[c] = NONE_TAG
            continue
        candidates = np.flatnonzero(row == best)
        mapping[c] = int(min(candidates,
                             key=lambda t: (totals[t], EVAL_TAGS[t])))
    return mapping


def score(tagging: InducedTagging, corpus: Corpus,
          mapping: Optional[dict[int, int]] = None,
          provenance: Optional[dict] = None) -> EvaluationReport:
    """Per-tag precision/recall/F plus macro averages."""
    if mapping is None:
        mapping = map_clusters_to_tags(tagging, corpus)
    eligible = _check_eligible(tagging, corpus)
    table = _contingency(tagging, corpus, eligible)
    in_scope = ((tagging.states != SKIPPED)
                & (corpus.gold >= 0) & (corpus.gold < N_TAGS))
    freq = np.bincount(corpus.gold[in_scope], minlength=N_TAGS)

    counts = []
    for t, tag in enumerate(EVAL_TAGS):
        members = [c for c, mt in mapping.items() if mt == t and c < len(table)]
        correct = int(sum(table[c, t] for c in members))
        incorrect = int(sum(table[c].sum() - table[c, t] for c in members))
        counts.append((tag, int(freq[t]), len(members), correct, incorrect))
    return report_from_counts(counts, provenance=provenance)


def report_from_counts(counts: Sequence[tuple],
                       provenance: Optional[dict] = None) -> EvaluationReport:
    """Build a report from (tag, frequency, n_classes, correct, incorrect)
    tuples; the arithmetic layer shared by scoring and count fixtures."""
    rows = []
    for tag, frequency, n_classes, correct, incorrect in counts:
        if correct + incorrect > 0:
            precision = correct / (correct + incorrect)
        else:
            precision = 0.0
        recall = correct / frequency if frequency > 0 else 0.0
        rows.append(TagRow(tag, int(frequency), int(n_classes), int(correct),
                           int(incorrect), precision, recall,
                           f_measure(precision, recall)))
    present = [r for r in rows if r.frequency > 0]
    if present:
        macro_p = sum(r.precision for r in present) / len(present)
        macro_r = sum(r.recall for r in present) / len(present)
        macro_f = sum(r.f for r in present) / len(present)
    else:
        macro_p = macro_r = macro_f = 0.0
    return EvaluationReport(rows, macro_p, macro_r, macro_f,
                            provenance=dict(provenance or {}))


def accuracy(tagging: InducedTagging, corpus: Corpus,
             mapping: dict[int, int],
             positions: Optional[np.ndarray] = None) -> float:
    """Fraction of gold-eligible tokens whose mapped cluster tag matches.

    Tokens that are UNASSIGNED or SKIPPED count as misses, so the figure is
    comparable across experiments with different coverage. ``positions``
    restricts the evaluation to a subset (boolean mask or index array).
    """
    sel = np.zeros(len(corpus), dtype=bool)
    if positions is None:
        sel[:] = True
    else:
        sel[positions] = True
    sel &= (corpus.gold >= 0) & (corpus.gold < N_TAGS)
    total = int(sel.sum())
    if total == 0:
        raise DataError("no eligible tokens selected")
    sel &= tagging.states == ASSIGNED
    mapped = np.array([mapping.get(int(c), NONE_TAG)
                       for c in tagging.clusters[sel]])
    hits = int((mapped == corpus.gold[sel]).sum())
    return hits / total


_COLUMNS = ("tag", "frequency", "classes", "correct", "incorrect",
            "precision", "recall", "F")


def render_report(report: EvaluationReport, fmt: str = "text") -> str:
    """Render as an aligned text table or a tab-separated file.

    Text rounds rates to two decimals; the delimited form keeps full
    precision and re-parses exactly via ``parse_delimited_report``.
    """
    lines = []
    for key in sorted(report.provenance):
        lines.append(f"# {key} {report.provenance[key]}")
    if fmt == "tsv":
        lines.append("\t".join(_COLUMNS))
        for r in report.rows:
            lines.append("\t".join([
                r.tag, str(r.frequency), str(r.n_classes), str(r.correct),
                str(r.incorrect), repr(r.precision), repr(r.recall), repr(r.f)]))
        lines.append("\t".join(["avg.", "", "", "", "",
                                repr(report.macro_precision),
                                repr(report.macro_recall),
                                repr(report.macro_f)]))
        return "\n".join(lines) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")

    body = [[r.tag, str(r.frequency), str(r.n_classes), str(r.correct),
             str(r.incorrect), f"{r.precision:.2f}", f"{r.recall:.2f}",
             f"{r.f:.2f}"] for r in report.rows]
    body.append(["avg.", "", "", "", "", f"{report.macro_precision:.2f}",
                 f"{report.macro_recall:.2f}", f"{report.macro_f:.2f}"])
    widths = [max(len(_COLUMNS[i]), max(len(row[i]) for row in body))
              for i in range(len(_COLUMNS))]
    def fmt_row(cells):
        tag_cell = cells[0].ljust(widths[0])
        rest = [c.rjust(widths[i + 1]) for i, c in enumerate(cells[1:])]
        return "  ".join([tag_cell] + rest)
    lines.append(fmt_row(list(_COLUMNS)))
    for row in body:
        lines.append(fmt_row(row))
    return "\n".join(lines) + "\n"


def parse_delimited_report(text: str) -> EvaluationReport:
    """Read back a tab-separated report produced by ``render_report``."""
    rows = []
    macro = None
    provenance = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            provenance[key] = value
            continue
        parts = line.split("\t")
        if parts[0] == _COLUMNS[0]:
            continue
        if parts[0] == "avg.":
            macro = (float(parts[5]), float(parts[6]), float(parts[7]))
            continue
        if len(parts) != len(_COLUMNS):
            raise DataError(f"bad report line: {line!r}")
        rows.append(TagRow(parts[0], int(parts[1]), int(parts[2]),
                           int(parts[3]), int(parts[4]), float(parts[5]),
                           float(parts[6]), float(parts[7])))
    if macro is None:
        raise DataError("report has no avg. row")
    return EvaluationReport(rows, macro[0], macro[1], macro[2],
                            provenance=provenance)
