"""Left/right context count matrices, word-based and class-generalized.

A context matrix has one row per vocabulary word. Column i of the left
matrix of word w counts corpus positions where feature i occurs immediately
to the left of an occurrence of w (symmetrically for right). Features are
either the f most frequent words or, for generalized vectors, the g classes
of a neighbor-class model built from the opposite side's word vectors.
Boundary-adjacent positions contribute nothing. All-zero rows are kept.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .cluster import UNASSIGNED, assign_batch, buckshot, default_sample_size
from .corpus import Corpus, Vocabulary
from .errors import DataError
from .svd import truncated_svd

LEFT = "left"
RIGHT = "right"
WORD = "word"
CLASS = "class"


def _check_side(side: str) -> str:
    if side not in (LEFT, RIGHT):
        raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}, got {side!r}")
    return side


@dataclass
class ContextFeatureSet:
    """What the matrix columns denote: top-f words, or g neighbor classes."""

    kind: str
    size: int
    word_ids: Optional[np.ndarray] = None  # WORD kind: feature index -> word id

    @classmethod
    def top_words(cls, vocab: Vocabulary, f: int) -> "ContextFeatureSet":
        return cls(kind=WORD, size=f, word_ids=vocab.top(f))

    @classmethod
    def classes(cls, g: int) -> "ContextFeatureSet":
        return cls(kind=CLASS, size=g)


@dataclass
class SparseCountMatrix:
    """Non-negative integer co-occurrence counts with feature metadata."""

    counts: sp.csr_matrix
    kind: str
    side: str
    features: ContextFeatureSet
    row_kind: str = "word"

    @property
    def n_rows(self) -> int:
        return self.counts.shape[0]

    @property
    def n_cols(self) -> int:
        return self.counts.shape[1]

    def total(self) -> int:
        return int(self.counts.sum())

    def row_nonzero(self) -> np.ndarray:
        """Boolean flag per row: does the row have any counts at all."""
        return np.diff(self.counts.indptr) > 0


def _adjacent_pairs(corpus: Corpus):
    """(left ids, right ids) of every token pair not crossing a boundary."""
    p = np.arange(1, len(corpus))
    keep = ~corpus.boundary_before[1:]
    left = corpus.form_ids[p - 1][keep]
    right = corpus.form_ids[p][keep]
    return left, right


def _pairs_to_matrix(rows, cols, shape) -> sp.csr_matrix:
    m = sp.coo_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=shape)
    m = m.tocsr()
    m.sum_duplicates()
    return m


def count_context_vectors(corpus: Corpus, features: ContextFeatureSet,
                          side: str) -> SparseCountMatrix:
    """Word-based context counts: V rows, one column per feature word."""
    _check_side(side)
    if features.kind != WORD:
        raise ValueError("count_context_vectors needs WORD features")
    v = len(corpus.vocab)
    feat_index = np.full(v, -1, dtype=np.int64)
    feat_index[features.word_ids] = np.arange(features.size)

    left, right = _adjacent_pairs(corpus)
    if side == LEFT:
        targets, neighbors = right, left
    else:
        targets, neighbors = left, right
    cols = feat_index[neighbors]
    keep = cols >= 0
    counts = _pairs_to_matrix(targets[keep], cols[keep], (v, features.size))
    return SparseCountMatrix(counts, WORD, side, features)


@dataclass
class NeighborClassModel:
    """Partition of the vocabulary into g classes of same-side context vectors.

    ``source_side`` names the side of the word-based vectors that were
    clustered; generalized vectors for a given side must use the model of the
    opposite side.
    """

    source_side: str
    g: int
    classes: np.ndarray  # word id -> class in 0..g-1
    seed: int


def build_neighbor_classes(matrix: SparseCountMatrix, dims: int, g: int,
                           seed: int,
                           sample_size: Optional[int] = None) -> NeighborClassModel:
    """Reduce a word-based context matrix and cluster every word into g classes.

    Sampled words keep their agglomerative labels; the rest are assigned to
    the nearest centroid. Words whose context vector is all zeros cannot be
    placed by similarity and fall into class 0, keeping the partition total.
    """
    if matrix.kind != WORD:
        raise ValueError("neighbor classes are built from word-based vectors")
    v = matrix.n_rows
    if not 1 <= g <= v:
        raise DataError(f"need 1 <= g <= {v} classes, got {g}")
    space = truncated_svd(matrix, min(dims, min(matrix.counts.shape)))
    points = space.row_embeddings
    model = buckshot(points, g, sample_size=sample_size, seed=seed)
    classes = assign_batch(points, model)
    classes[model.sample_ids] = model.sample_assignment
    classes[classes == UNASSIGNED] = 0
    return NeighborClassModel(source_side=matrix.side, g=g,
                              classes=classes.astype(np.int32), seed=seed)


def generalized_context_vectors(corpus: Corpus, model: NeighborClassModel,
                                side: str) -> SparseCountMatrix:
    """Context counts over neighbor classes instead of individual words.

    Every non-boundary adjacency is counted, since the classes cover the
    whole vocabulary. The class model must come from the opposite side:
    right vectors use classes of left context vectors and vice versa.
    """
    _check_side(side)
    opposite = LEFT if side == RIGHT else RIGHT
    if model.source_side != opposite:
        raise DataError(
            f"generalized {side} vectors need classes of {opposite} context "
            f"vectors, got a {model.source_side}-side model")
    if len(model.classes) != len(corpus.vocab):
        raise DataError("neighbor-class model does not cover this vocabulary")

    left, right = _adjacent_pairs(corpus)
    if side == LEFT:
        targets, neighbors = right, left
    else:
        targets, neighbors = left, right
    cols = model.classes[neighbors]
    counts = _pairs_to_matrix(targets, cols, (len(corpus.vocab), model.g))
    return SparseCountMatrix(counts, CLASS, side, ContextFeatureSet.classes(model.g))
