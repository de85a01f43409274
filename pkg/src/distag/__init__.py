"""Unsupervised part-of-speech induction from distributional statistics.

Pipeline: count left/right neighbor vectors over the most frequent words,
reduce them with a truncated SVD, cluster with Buckshot (group-average
agglomeration on a sample), tag word types or tokens-in-context by nearest
centroid, and evaluate against gold tags with per-tag precision/recall/F
reports.
"""

from .cluster import ClusterModel, UNASSIGNED, assign, assign_batch, buckshot
from .context import (ContextFeatureSet, NeighborClassModel, SparseCountMatrix,
                      build_neighbor_classes, count_context_vectors,
                      generalized_context_vectors, LEFT, RIGHT)
from .corpus import (Corpus, EvalTagMap, EVAL_TAGS, EXCLUDED, Token,
                     TokenizerConfig, Vocabulary, build_vocabulary,
                     collapse_tag, load_gold, tokenize_stream)
from .errors import DataError, DistagError, NumericError
from .evaluate import (EvaluationReport, accuracy, f_measure,
                       map_clusters_to_tags, render_report, report_from_counts,
                       score)
from .induce import (InducedModel, InducedTagging, InductionConfig, induce,
                     is_natural_context, natural_context_mask,
                     nearest_neighbors, tag_corpus, token_feature_vector)
from .svd import ReducedSpace, cosine, project, truncated_svd

__version__ = "0.1.0"
