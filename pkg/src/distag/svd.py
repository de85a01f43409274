"""Truncated singular value decomposition and similarity kernels.

The decomposition is an iterative block-Krylov subspace method: an
orthonormal right subspace V is grown with powers of (C'C) applied to a
random seed block, and singular triplets are read off a dense SVD of C@V.
Reading values from C@V (rather than from the Gram matrix V'C'CV) keeps
small singular values accurate to machine precision times the spectral
norm, which the test oracle relies on. Once the subspace spans the full
column space the factorization is exact, so small matrices are handled
without special cases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import NumericError

log = logging.getLogger(__name__)

# Relative threshold below which trailing singular values are treated as
# numerically zero (rank deficiency).
_RANK_RTOL = 1e-12


@dataclass
class ReducedSpace:
    """Truncated SVD factors of a count matrix.

    ``basis`` holds the right singular vectors as orthonormal columns
    (n_cols x m); ``row_embeddings`` is the training-row representation
    C @ basis (the left vectors scaled by the singular values). ``dims`` may
    be smaller than ``requested_dims`` when the matrix rank fell short.
    """

    singular_values: np.ndarray
    basis: np.ndarray
    row_embeddings: Optional[np.ndarray]
    requested_dims: int

    @property
    def dims(self) -> int:
        return len(self.singular_values)

    @property
    def n_cols(self) -> int:
        return self.basis.shape[0]


def _as_csr(matrix) -> sp.csr_matrix:
    if hasattr(matrix, "counts"):  # SparseCountMatrix
        matrix = matrix.counts
    if sp.issparse(matrix):
        return matrix.tocsr().astype(np.float64)
    return sp.csr_matrix(np.asarray(matrix, dtype=np.float64))


def _orthonormalize(block: np.ndarray, against: Optional[np.ndarray],
                    rng: np.random.Generator) -> np.ndarray:
    """Return an orthonormal block spanning block's novel directions.

    Directions already covered by ``against`` (or internally dependent) are
    replaced with fresh random ones where room remains, so degenerate inputs
    such as exactly rank-deficient count matrices keep the subspace growing.
    """
    dim = block.shape[0]
    have = 0 if against is None else against.shape[1]
    want = min(block.shape[1], dim - have)
    if want <= 0:
        return np.empty((dim, 0))
    cols = []
    candidates = list(block.T)
    attempts = 0
    while len(cols) < want and attempts < want * 4 + 8:
        attempts += 1
        v = candidates.pop(0) if candidates else rng.standard_normal(dim)
        v = v.astype(np.float64, copy=True)
        for _ in range(2):  # two-pass Gram-Schmidt
            if against is not None:
                v -= against @ (against.T @ v)
            for q in cols:
                v -= q * (q @ v)
        norm = np.linalg.norm(v)
        if norm > 1e-10:
            cols.append(v / norm)
    return np.column_stack(cols) if cols else np.empty((dim, 0))


def truncated_svd(matrix, dims: int, tol: float = 1e-8,
                  max_rounds: int = 1000,
                  keep_row_embeddings: bool = True) -> ReducedSpace:
    """Top-``dims`` singular triplets of a sparse count matrix.

    Raises NumericError for an all-zero matrix or if the singular values
    fail to stabilize within ``max_rounds`` subspace expansions. When the
    matrix rank is below ``dims`` the rank-many components are returned and
    the shortfall logged; ``requested_dims`` records what was asked for.
    """
    A = _as_csr(matrix)
    n, c = A.shape
    if not 1 <= dims <= min(n, c):
        raise ValueError(f"dims must be in 1..{min(n, c)}, got {dims}")
    if A.nnz == 0:
        raise NumericError("all-zero matrix has no singular structure")
    At = A.T.tocsr()
    rng = np.random.default_rng(0x5EED)

    block = min(c, dims + 16)
    V = _orthonormalize(rng.standard_normal((c, block)), None, rng)
    W = A @ V  # dense n x p, grown together with V
    prev: Optional[np.ndarray] = None
    for round_no in range(max_rounds):
        # Ritz extraction from the current subspace.
        _, sigma, Qt = np.linalg.svd(W, full_matrices=False)
        top = sigma[:dims]
        exact = V.shape[1] >= c
        if prev is not None and len(prev) == len(top):
            if np.max(np.abs(top - prev)) <= tol * max(sigma[0], np.finfo(float).tiny):
                break
        if exact:
            break
        prev = top
        fresh = _orthonormalize(At @ (A @ V[:, -block:]), V, rng)
        if fresh.shape[1] == 0:
            break  # no new directions reachable: subspace is invariant
        V = np.hstack([V, fresh])
        W = np.hstack([W, A @ fresh])
    else:
        raise NumericError(
            f"singular values did not stabilize within {max_rounds} rounds")

    sigma = sigma[:dims]
    basis = V @ Qt[:dims].T
    # rank cut: drop numerically-zero tail components
    keep = int(np.sum(sigma > sigma[0] * _RANK_RTOL)) if sigma[0] > 0 else 0
    if keep == 0:
        raise NumericError("matrix is numerically zero")
    if keep < dims:
        log.warning("rank %d below requested %d dimensions; returning %d "
                    "components", keep, dims, keep)
        sigma = sigma[:keep]
        basis = basis[:, :keep]

    # Fix signs so the largest-magnitude entry of every basis column is
    # positive; makes repeated runs bit-identical.
    flip = basis[np.argmax(np.abs(basis), axis=0), np.arange(basis.shape[1])] < 0
    basis[:, flip] *= -1.0

    rows = (A @ basis) if keep_row_embeddings else None
    return ReducedSpace(np.ascontiguousarray(sigma), np.ascontiguousarray(basis),
                        rows, requested_dims=dims)


def project(v, space: ReducedSpace) -> np.ndarray:
    """Fold a raw feature vector into the reduced space: v @ basis.

    Projecting training row i of the decomposed matrix reproduces
    ``row_embeddings[i]``.
    """
    if sp.issparse(v):
        if v.shape != (1, space.n_cols):
            raise ValueError(f"expected a 1x{space.n_cols} vector, got {v.shape}")
        return np.asarray((v @ space.basis)).ravel()
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (space.n_cols,):
        raise ValueError(f"expected length {space.n_cols}, got {v.shape}")
    return v @ space.basis


def cosine(u, v) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def unit_rows(points: np.ndarray) -> np.ndarray:
    """Rows scaled to unit norm; all-zero rows stay zero."""
    points = np.asarray(points, dtype=np.float64)
    norms = np.linalg.norm(points, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return points / safe


def center_rows(points: np.ndarray) -> np.ndarray:
    """Subtract each row's mean (turns cosine into Pearson correlation)."""
    points = np.asarray(points, dtype=np.float64)
    return points - points.mean(axis=1, keepdims=True)
