"""Tag induction experiments and corpus tagging.

Four experiments share one pipeline: build context count vectors, reduce
them with a truncated SVD, cluster with Buckshot, then label corpus tokens.

* ``type``: each word type is the concatenation of its left and right
  context vectors (2f raw dimensions); every occurrence of a type inherits
  the type's cluster, so ambiguous words get a single tag.
* ``token``: each occurrence is the concatenation of four vectors (right
  vector of the previous word, left and right vectors of the word itself,
  left vector of the next word; 4f raw dimensions). A seeded sample of
  occurrences is reduced and clustered; every token is then tagged by
  nearest centroid.
* ``natural``: like ``token`` but restricted, for training and tagging, to
  positions whose neighbors are neither punctuation nor rare words.
* ``generalized``: like ``token`` but the four blocks are generalized
  context vectors, whose features are classes of opposite-side word vectors
  rather than individual frequent words.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .cluster import UNASSIGNED, ClusterModel, assign_batch, buckshot
from .context import (
    CLASS, LEFT, RIGHT, WORD, ContextFeatureSet, NeighborClassModel,
    SparseCountMatrix, build_neighbor_classes, count_context_vectors,
    generalized_context_vectors,
)
from .corpus import Corpus, Vocabulary
from .errors import DataError
from .svd import ReducedSpace, truncated_svd, unit_rows

log = logging.getLogger(__name__)

TYPE = "type"
TOKEN = "token"
NATURAL = "natural"
GENERALIZED = "generalized"
EXPERIMENTS = (TYPE, TOKEN, NATURAL, GENERALIZED)

# Per-token tagging states.
ASSIGNED = 0
UNASSIGNED_STATE = 1
SKIPPED = 2
STATE_NAMES = {ASSIGNED: "A", UNASSIGNED_STATE: "U", SKIPPED: "S"}
STATE_IDS = {v: k for k, v in STATE_NAMES.items()}

# Seed-stream stages, so the stages of one run draw independent randomness.
_STAGE_CLASSES_LEFT = 1
_STAGE_CLASSES_RIGHT = 2
_STAGE_SAMPLE = 3
_STAGE_CLUSTER = 4


def stage_seed(seed: int, stage: int) -> int:
    return int(np.random.SeedSequence([seed, stage]).generate_state(1)[0])


@dataclass(frozen=True)
class InductionConfig:
    """Experiment parameters. The defaults are the standard setup:
    f=250 feature words, 50 dimensions, 200 clusters, 250 neighbor classes,
    20000 sampled occurrences, rare threshold 10."""

    experiment: str = TOKEN
    features: int = 250
    dims: int = 50
    clusters: int = 200
    neighbor_classes: int = 250
    sample: int = 20000
    rare_threshold: int = 10
    seed: int = 0
    centered: bool = False
    # agglomeration sample for Buckshot; None means sqrt(k*n)
    buckshot_sample: Optional[int] = None

    def validate(self) -> "InductionConfig":
        if self.experiment not in EXPERIMENTS:
            raise DataError(f"unknown experiment {self.experiment!r}; "
                            f"expected one of {', '.join(EXPERIMENTS)}")
        for name in ("features", "dims", "clusters", "neighbor_classes", "sample"):
            if getattr(self, name) < 1:
                raise DataError(f"{name} must be positive")
        if self.rare_threshold < 0:
            raise DataError("rare_threshold must be >= 0")
        return self


@dataclass
class InducedTagging:
    """One state per corpus token plus the cluster id for assigned tokens."""

    states: np.ndarray    # uint8, ASSIGNED/UNASSIGNED_STATE/SKIPPED
    clusters: np.ndarray  # int32, UNASSIGNED where not assigned

    def __len__(self) -> int:
        return len(self.states)

    def counts(self) -> dict:
        return {name: int((self.states == state).sum())
                for state, name in STATE_NAMES.items()}


@dataclass
class ContextMatrices:
    """Count matrices for one corpus: word-based always, generalized when
    the experiment calls for them. ``feature_left``/``feature_right`` are
    the pair the token features are drawn from."""

    word_left: SparseCountMatrix
    word_right: SparseCountMatrix
    feature_left: SparseCountMatrix
    feature_right: SparseCountMatrix
    left_classes: Optional[NeighborClassModel] = None
    right_classes: Optional[NeighborClassModel] = None


@dataclass
class InducedModel:
    config: InductionConfig
    space: ReducedSpace
    clusters: ClusterModel


def build_matrices(corpus: Corpus, cfg: InductionConfig) -> ContextMatrices:
    cfg.validate()
    if cfg.features > len(corpus.vocab):
        raise DataError(f"{cfg.features} feature words requested but the "
                        f"vocabulary has only {len(corpus.vocab)}")
    feats = ContextFeatureSet.top_words(corpus.vocab, cfg.features)
    word_left = count_context_vectors(corpus, feats, LEFT)
    word_right = count_context_vectors(corpus, feats, RIGHT)
    if cfg.experiment != GENERALIZED:
        return ContextMatrices(word_left, word_right, word_left, word_right)
    left_classes = build_neighbor_classes(
        word_left, cfg.dims, cfg.neighbor_classes,
        stage_seed(cfg.seed, _STAGE_CLASSES_LEFT))
    right_classes = build_neighbor_classes(
        word_right, cfg.dims, cfg.neighbor_classes,
        stage_seed(cfg.seed, _STAGE_CLASSES_RIGHT))
    gen_right = generalized_context_vectors(corpus, left_classes, RIGHT)
    gen_left = generalized_context_vectors(corpus, right_classes, LEFT)
    return ContextMatrices(word_left, word_right, gen_left, gen_right,
                           left_classes, right_classes)


def _neighbor_ids(corpus: Corpus):
    """Previous/next word id per position; the sentinel V marks a missing
    neighbor (corpus edge or sentence boundary)."""
    t = len(corpus)
    v = len(corpus.vocab)
    prev_ids = np.full(t, v, dtype=np.int64)
    next_ids = np.full(t, v, dtype=np.int64)
    link = ~corpus.boundary_before[1:]
    prev_ids[1:][link] = corpus.form_ids[:-1][link]
    next_ids[:-1][link] = corpus.form_ids[1:][link]
    return prev_ids, next_ids


def _with_zero_row(matrix: SparseCountMatrix) -> sp.csr_matrix:
    m = matrix.counts
    return sp.vstack([m, sp.csr_matrix((1, m.shape[1]), dtype=m.dtype)]).tocsr()


def is_natural_context(corpus: Corpus, position: int,
                       rare_threshold: int = 10) -> bool:
    """True when both immediate neighbors exist, are not punctuation, and
    are not rare (corpus frequency below ``rare_threshold``)."""
    return bool(natural_context_mask(corpus, rare_threshold)[position])


def natural_context_mask(corpus: Corpus, rare_threshold: int = 10) -> np.ndarray:
    t = len(corpus)
    freq = corpus.vocab.freq[corpus.form_ids]
    good = (~corpus.is_punct) & (freq >= rare_threshold)
    ok = np.zeros(t, dtype=bool)
    if t == 0:
        return ok
    link = ~corpus.boundary_before[1:]
    prev_ok = np.zeros(t, dtype=bool)
    prev_ok[1:] = link & good[:-1]
    next_ok = np.zeros(t, dtype=bool)
    next_ok[:-1] = link & good[1:]
    return prev_ok & next_ok


def token_feature_matrix(corpus: Corpus, positions: np.ndarray,
                         mats: ContextMatrices) -> sp.csr_matrix:
    """Stack the four-block feature vectors of the given positions.

    Block order is fixed: right vector of the previous word, left vector of
    the word, right vector of the word, left vector of the next word.
    Missing neighbors contribute zero blocks.
    """
    prev_ids, next_ids = _neighbor_ids(corpus)
    ml = _with_zero_row(mats.feature_left)
    mr = _with_zero_row(mats.feature_right)
    w = corpus.form_ids[positions]
    blocks = [mr[prev_ids[positions]], ml[w], mr[w], ml[next_ids[positions]]]
    return sp.hstack(blocks).tocsr()


def token_feature_vector(corpus: Corpus, position: int,
                         mats: ContextMatrices) -> np.ndarray:
    """Dense 4f feature vector of a single occurrence."""
    row = token_feature_matrix(corpus, np.array([position]), mats)
    return np.asarray(row.todense()).ravel()


def induce_type_model(corpus: Corpus, cfg: InductionConfig,
                      mats: ContextMatrices):
    """Cluster concatenated left+right vectors of all word types.

    Returns (space, cluster model, per-type tag). Sampled types keep their
    agglomerative labels, remaining types go to the nearest centroid, and
    types with all-zero vectors are UNASSIGNED.
    """
    concat = sp.hstack([mats.word_left.counts, mats.word_right.counts]).tocsr()
    space = truncated_svd(concat, min(cfg.dims, min(concat.shape)))
    sample_size = (min(cfg.buckshot_sample, concat.shape[0])
                   if cfg.buckshot_sample else None)
    model = buckshot(space.row_embeddings, cfg.clusters,
                     sample_size=sample_size,
                     seed=stage_seed(cfg.seed, _STAGE_CLUSTER),
                     centered=cfg.centered)
    type_tags = assign_batch(space.row_embeddings, model)
    type_tags[model.sample_ids] = model.sample_assignment
    nonzero = np.asarray((np.diff(concat.indptr) > 0))
    type_tags[~nonzero] = UNASSIGNED
    return space, model, type_tags


def induce_token_model(corpus: Corpus, cfg: InductionConfig,
                       mats: ContextMatrices):
    """Reduce and cluster a seeded sample of occurrence feature vectors.

    For the natural experiment only qualifying positions are sampled. Rows
    whose four blocks are all zero are dropped before the decomposition.
    Returns (space, cluster model, kept sample positions).
    """
    if cfg.experiment == NATURAL:
        pool = np.flatnonzero(natural_context_mask(corpus, cfg.rare_threshold))
        if len(pool) == 0:
            raise DataError("no natural contexts in this corpus")
    else:
        pool = np.arange(len(corpus))
    n = cfg.sample
    if len(pool) < n:
        log.warning("only %d qualifying positions for a sample of %d; using all",
                    len(pool), n)
        sampled = pool
    else:
        rng = np.random.default_rng(
            np.random.SeedSequence([cfg.seed, _STAGE_SAMPLE]))
        sampled = np.sort(rng.choice(pool, size=n, replace=False))
    feats = token_feature_matrix(corpus, sampled, mats)
    nonzero = np.diff(feats.indptr) > 0
    if not nonzero.all():
        log.info("dropping %d sampled occurrences with all-zero context",
                 int((~nonzero).sum()))
        feats = feats[nonzero]
        sampled = sampled[nonzero]
    if feats.shape[0] == 0:
        raise DataError("every sampled occurrence had an all-zero context")
    space = truncated_svd(feats, min(cfg.dims, min(feats.shape)))
    sample_size = (min(cfg.buckshot_sample, feats.shape[0])
                   if cfg.buckshot_sample else None)
    model = buckshot(space.row_embeddings, cfg.clusters,
                     sample_size=sample_size,
                     seed=stage_seed(cfg.seed, _STAGE_CLUSTER),
                     centered=cfg.centered)
    return space, model, sampled


def _projection_tables(mats: ContextMatrices, space: ReducedSpace):
    """Per-word reduced contributions of each of the four feature blocks.

    Tagging a token is then three table lookups and a sum, which is the
    linear projection of its raw 4f vector. Index V (the sentinel) is a zero
    row."""
    f = mats.feature_left.n_cols
    if space.n_cols != 4 * f:
        raise DataError(f"model expects {space.n_cols} raw dimensions but the "
                        f"matrices provide {4 * f}")
    d = space.basis
    ml = _with_zero_row(mats.feature_left)
    mr = _with_zero_row(mats.feature_right)
    tables = (
        mr @ d[0 * f:1 * f],
        ml @ d[1 * f:2 * f],
        mr @ d[2 * f:3 * f],
        ml @ d[3 * f:4 * f],
    )
    nz_left = np.append(mats.feature_left.row_nonzero(), False)
    nz_right = np.append(mats.feature_right.row_nonzero(), False)
    return tables, nz_left, nz_right


def tag_corpus(model: InducedModel, corpus: Corpus,
               mats: Optional[ContextMatrices] = None,
               threads: int = 1) -> InducedTagging:
    """Label every corpus token with a cluster id, UNASSIGNED, or SKIPPED.

    Out-of-scope positions (non-natural contexts in the natural experiment)
    are SKIPPED; in-scope tokens whose features are all zero are UNASSIGNED.
    """
    cfg = model.config
    if mats is None:
        mats = build_matrices(corpus, cfg)
    t = len(corpus)
    states = np.zeros(t, dtype=np.uint8)
    clusters = np.full(t, UNASSIGNED, dtype=np.int32)

    if cfg.experiment == TYPE:
        _, _, type_tags = induce_type_model(corpus, cfg, mats)
        clusters[:] = type_tags[corpus.form_ids]
        states[clusters == UNASSIGNED] = UNASSIGNED_STATE
        return InducedTagging(states, clusters)

    if cfg.experiment == NATURAL:
        states[~natural_context_mask(corpus, cfg.rare_threshold)] = SKIPPED
    scope = np.flatnonzero(states == ASSIGNED)

    tables, nz_left, nz_right = _projection_tables(mats, model.space)
    prev_ids, next_ids = _neighbor_ids(corpus)

    def tag_block(block: np.ndarray):
        w = corpus.form_ids[block]
        pv = prev_ids[block]
        nx = next_ids[block]
        emb = tables[0][pv] + tables[1][w] + tables[2][w] + tables[3][nx]
        labels = assign_batch(emb, model.clusters)
        has_any = nz_right[pv] | nz_left[w] | nz_right[w] | nz_left[nx]
        labels[~has_any] = UNASSIGNED
        return labels

    chunk = 65536
    pieces = [scope[i:i + chunk] for i in range(0, len(scope), chunk)]
    if threads > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(tag_block, pieces))
    else:
        results = [tag_block(p) for p in pieces]
    for block, labels in zip(pieces, results):
        clusters[block] = labels
    unassigned = (clusters == UNASSIGNED) & (states == ASSIGNED)
    states[unassigned] = UNASSIGNED_STATE
    return InducedTagging(states, clusters)


def induce(corpus: Corpus, cfg: InductionConfig,
           threads: int = 1) -> tuple[InducedModel, InducedTagging]:
    """Run one experiment end to end on a corpus."""
    cfg.validate()
    mats = build_matrices(corpus, cfg)
    if cfg.experiment == TYPE:
        space, clusters, _ = induce_type_model(corpus, cfg, mats)
    else:
        space, clusters, _ = induce_token_model(corpus, cfg, mats)
    model = InducedModel(config=cfg, space=space, clusters=clusters)
    tagging = tag_corpus(model, corpus, mats=mats, threads=threads)
    return model, tagging


def nearest_neighbors(space: ReducedSpace, vocab: Vocabulary, word: str,
                      n: int) -> list[tuple[str, float]]:
    """Words most similar to ``word`` in a reduced one-side space.

    Ranked by cosine over the row embeddings, the query itself excluded,
    ties broken by frequency rank.
    """
    if space.row_embeddings is None or space.row_embeddings.shape[0] != len(vocab):
        raise DataError("space does not carry embeddings for this vocabulary")
    if n < 0:
        raise ValueError("n must be >= 0")
    wid = vocab.id_of(word)
    if n == 0:
        return []
    emb = unit_rows(space.row_embeddings)
    sims = emb @ emb[wid]
    order = np.lexsort((vocab.rank, -sims))
    out = []
    for idx in order:
        if idx == wid:
            continue
        out.append((vocab.word_of(int(idx)), float(sims[idx])))
        if len(out) == n:
            break
    return out
