"""Versioned on-disk formats for every pipeline artifact.

Text artifacts start with a ``#%distag <kind> v<N>`` line followed by
``key value`` header lines and tab-separated records. Array artifacts use
the same first line, then one JSON metadata line, then raw ``.npy`` blocks
in the order the metadata lists them. Readers reject any kind or version
mismatch, naming the file and the expected version. All writers are
deterministic: identical inputs produce identical bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp

from .cluster import ClusterModel
from .context import (CLASS, WORD, ContextFeatureSet, SparseCountMatrix)
from .corpus import Corpus, Vocabulary
from .errors import DataError
from .induce import (STATE_IDS, STATE_NAMES, InducedTagging, InducedModel,
                     InductionConfig)
from .svd import ReducedSpace

MAGIC = "#%distag"
VERSIONS = {
    "vocab": 1,
    "matrix": 1,
    "space": 1,
    "clusters": 1,
    "tagging": 1,
    "bundle": 1,
}


def _expected_first_line(kind: str) -> str:
    return f"{MAGIC} {kind} v{VERSIONS[kind]}"


def _check_first_line(path: str, kind: str, line: str):
    if line.rstrip("\n") != _expected_first_line(kind):
        raise DataError(
            f"{path}: expected a '{_expected_first_line(kind)}' header, "
            f"found {line.strip()!r}")


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                h.update(chunk)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return h.hexdigest()


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_fingerprint(cfg: InductionConfig, extra: Optional[dict] = None) -> str:
    payload = {"induction": vars(cfg) | {}, "extra": extra or {}}
    return hashlib.sha256(canonical_json(payload).encode()).hexdigest()[:16]


# ---------------------------------------------------------------- text io

def _write_text(path: str, kind: str, header: dict, records: Iterable[str]):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_expected_first_line(kind) + "\n")
        for key, value in header.items():
            fh.write(f"{key} {value}\n")
        for rec in records:
            fh.write(rec + "\n")


def _read_text(path: str, kind: str, n_header: int):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: empty file, expected "
                        f"'{_expected_first_line(kind)}'")
    _check_first_line(path, kind, lines[0])
    header = {}
    for line in lines[1:1 + n_header]:
        key, _, value = line.partition(" ")
        header[key] = value
    return header, lines[1 + n_header:]


# --------------------------------------------------------------- vocab

def save_vocab(path: str, vocab: Vocabulary):
    recs = (f"{w}\t{i}\t{int(vocab.freq[i])}" for i, w in enumerate(vocab.words))
    _write_text(path, "vocab", {"entries": len(vocab)}, recs)


def load_vocab(path: str) -> Vocabulary:
    header, records = _read_text(path, "vocab", 1)
    n = int(header.get("entries", -1))
    words, freqs = [], []
    for rec in records:
        parts = rec.split("\t")
        if len(parts) != 3:
            raise DataError(f"{path}: bad vocab record {rec!r}")
        word, wid, freq = parts
        if int(wid) != len(words):
            raise DataError(f"{path}: ids must be dense and ordered")
        words.append(word)
        freqs.append(int(freq))
    if n != len(words):
        raise DataError(f"{path}: header claims {n} entries, found {len(words)}")
    return Vocabulary(words, freqs)


# --------------------------------------------------------------- matrix

def save_matrix(path: str, matrix: SparseCountMatrix):
    coo = matrix.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    header = {
        "kind": matrix.kind,
        "side": matrix.side,
        "rows": matrix.n_rows,
        "cols": matrix.n_cols,
        "rowkind": matrix.row_kind,
        "features": (" ".join(str(i) for i in matrix.features.word_ids)
                     if matrix.kind == WORD else str(matrix.features.size)),
        "nnz": coo.nnz,
    }
    recs = (f"{coo.row[i]}\t{coo.col[i]}\t{coo.data[i]}" for i in order)
    _write_text(path, "matrix", header, recs)


def load_matrix(path: str) -> SparseCountMatrix:
    header, records = _read_text(path, "matrix", 7)
    try:
        kind = header["kind"]
        side = header["side"]
        rows = int(header["rows"])
        cols = int(header["cols"])
        rowkind = header["rowkind"]
        nnz = int(header["nnz"])
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: bad matrix header: {exc}") from exc
    if kind == WORD:
        ids = np.array([int(x) for x in header["features"].split()], np.int64)
        if len(ids) != cols:
            raise DataError(f"{path}: {cols} columns but {len(ids)} feature ids")
        features = ContextFeatureSet(kind=WORD, size=cols, word_ids=ids)
    elif kind == CLASS:
        features = ContextFeatureSet.classes(cols)
    else:
        raise DataError(f"{path}: unknown matrix kind {kind!r}")
    triples = np.zeros((len(records), 3), dtype=np.int64)
    for i, rec in enumerate(records):
        parts = rec.split("\t")
        if len(parts) != 3:
            raise DataError(f"{path}: bad matrix record {rec!r}")
        triples[i] = [int(parts[0]), int(parts[1]), int(parts[2])]
    if len(triples) != nnz:
        raise DataError(f"{path}: header claims {nnz} records, found {len(triples)}")
    counts = sp.coo_matrix(
        (triples[:, 2], (triples[:, 0], triples[:, 1])),
        shape=(rows, cols)).tocsr()
    return SparseCountMatrix(counts, kind, side, features, row_kind=rowkind)


# ------------------------------------------------------- array containers

def _save_arrays(path: str, kind: str, meta: dict, arrays: dict):
    meta = dict(meta)
    meta["arrays"] = sorted(arrays)
    with open(path, "wb") as fh:
        fh.write((_expected_first_line(kind) + "\n").encode())
        fh.write((canonical_json(meta) + "\n").encode())
        for name in meta["arrays"]:
            np.lib.format.write_array(fh, np.ascontiguousarray(arrays[name]),
                                      allow_pickle=False)


def _load_arrays(path: str, kind: str):
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        first = fh.readline().decode("utf-8", "replace")
        _check_first_line(path, kind, first)
        try:
            meta = json.loads(fh.readline().decode())
            arrays = {name: np.lib.format.read_array(fh, allow_pickle=False)
                      for name in meta["arrays"]}
        except (ValueError, KeyError) as exc:
            raise DataError(f"{path}: corrupt container: {exc}") from exc
    return meta, arrays


def save_space(path: str, space: ReducedSpace):
    arrays = {"singular_values": space.singular_values, "basis": space.basis}
    if space.row_embeddings is not None:
        arrays["row_embeddings"] = space.row_embeddings
    _save_arrays(path, "space", {"requested_dims": space.requested_dims}, arrays)


def load_space(path: str) -> ReducedSpace:
    meta, arrays = _load_arrays(path, "space")
    return ReducedSpace(
        singular_values=arrays["singular_values"],
        basis=arrays["basis"],
        row_embeddings=arrays.get("row_embeddings"),
        requested_dims=int(meta["requested_dims"]),
    )


def save_clusters(path: str, model: ClusterModel):
    _save_arrays(path, "clusters",
                 {"k": model.k, "seed": model.seed,
                  "centered": model.centered},
                 {"centroids": model.centroids,
                  "sample_ids": model.sample_ids,
                  "sample_assignment": model.sample_assignment})


def load_clusters(path: str) -> ClusterModel:
    meta, arrays = _load_arrays(path, "clusters")
    return ClusterModel(
        k=int(meta["k"]),
        centroids=arrays["centroids"],
        sample_ids=arrays["sample_ids"],
        sample_assignment=arrays["sample_assignment"],
        seed=int(meta["seed"]),
        centered=bool(meta["centered"]),
    )


# --------------------------------------------------------------- tagging

def save_tagging(path: str, tagging: InducedTagging, provenance: dict):
    header = {key: provenance[key] for key in sorted(provenance)}
    header["tokens"] = len(tagging)
    recs = (f"{i}\t{STATE_NAMES[int(tagging.states[i])]}\t{int(tagging.clusters[i])}"
            for i in range(len(tagging)))
    _write_text(path, "tagging", header, recs)


def load_tagging(path: str) -> tuple[InducedTagging, dict]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise DataError(f"{path}: empty tagging file")
    _check_first_line(path, "tagging", lines[0])
    header = {}
    body_start = 1
    for line in lines[1:]:
        key, _, value = line.partition(" ")
        if key and "\t" not in line:
            header[key] = value
            body_start += 1
        else:
            break
    records = lines[body_start:]
    n = int(header.get("tokens", len(records)))
    if n != len(records):
        raise DataError(f"{path}: header claims {n} tokens, found {len(records)}")
    states = np.zeros(n, dtype=np.uint8)
    clusters = np.zeros(n, dtype=np.int32)
    for i, rec in enumerate(records):
        parts = rec.split("\t")
        if len(parts) != 3 or int(parts[0]) != i or parts[1] not in STATE_IDS:
            raise DataError(f"{path}: bad tagging record {rec!r}")
        states[i] = STATE_IDS[parts[1]]
        clusters[i] = int(parts[2])
    return InducedTagging(states, clusters), header


# --------------------------------------------------------------- bundles

BUNDLE_FILES = ("config.json", "manifest.json", "vocab.tsv", "space.npb",
                "clusters.npb", "tagging.tsv")


def save_bundle(directory: str, model: InducedModel, tagging: InducedTagging,
                corpus: Corpus, corpus_meta: dict, inputs: dict):
    """Write a complete experiment bundle into ``directory``.

    ``corpus_meta`` records how the corpus file was read (gold or raw,
    lowercasing); ``inputs`` maps input names to their file checksums so a
    run can be reproduced exactly.
    """
    os.makedirs(directory, exist_ok=True)
    cfg = model.config
    fingerprint = config_fingerprint(cfg, corpus_meta)
    config_doc = {
        "format": f"distag-bundle-v{VERSIONS['bundle']}",
        "induction": vars(cfg) | {},
        "corpus": corpus_meta,
    }
    with open(os.path.join(directory, "config.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json(config_doc) + "\n")
    manifest = {
        "format": f"distag-bundle-v{VERSIONS['bundle']}",
        "config_fingerprint": fingerprint,
        "seed": cfg.seed,
        "inputs": inputs,
        "artifacts": list(BUNDLE_FILES),
    }
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json(manifest) + "\n")
    save_vocab(os.path.join(directory, "vocab.tsv"), corpus.vocab)
    save_space(os.path.join(directory, "space.npb"), model.space)
    save_clusters(os.path.join(directory, "clusters.npb"), model.clusters)
    save_tagging(os.path.join(directory, "tagging.tsv"), tagging,
                 {"config": fingerprint, "seed": cfg.seed,
                  "experiment": cfg.experiment})


def load_bundle(directory: str):
    """Read a bundle back; returns (model, tagging, vocab, config doc, manifest)."""
    def path(name):
        p = os.path.join(directory, name)
        if not os.path.exists(p):
            raise DataError(f"bundle {directory} is missing {name}")
        return p

    try:
        with open(path("config.json"), "r", encoding="utf-8") as fh:
            config_doc = json.load(fh)
        with open(path("manifest.json"), "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, ValueError) as exc:
        raise DataError(f"bundle {directory}: unreadable metadata: {exc}") from exc
    expected = f"distag-bundle-v{VERSIONS['bundle']}"
    for doc, name in ((config_doc, "config.json"), (manifest, "manifest.json")):
        if doc.get("format") != expected:
            raise DataError(f"{os.path.join(directory, name)}: expected format "
                            f"{expected!r}, found {doc.get('format')!r}")
    cfg = InductionConfig(**config_doc["induction"]).validate()
    vocab = load_vocab(path("vocab.tsv"))
    space = load_space(path("space.npb"))
    clusters = load_clusters(path("clusters.npb"))
    tagging, _ = load_tagging(path("tagging.tsv"))
    model = InducedModel(config=cfg, space=space, clusters=clusters)
    return model, tagging, vocab, config_doc, manifest
