"""Command-line pipeline: vocab, vectors, induce, tag, eval, neighbors.

Every command is deterministic given identical inputs and seed. Exit codes:
0 success, 1 usage error, 2 data error (missing, malformed or
version-mismatched files), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import evaluate, induce, storage
from .context import LEFT, RIGHT, WORD
from .corpus import Corpus, EvalTagMap, TokenizerConfig
from .errors import DataError, NumericError
from .induce import GENERALIZED, InductionConfig

log = logging.getLogger("distag")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_tagmap(spec: str) -> EvalTagMap:
    if spec == "default":
        return EvalTagMap.default()
    return EvalTagMap.load(spec)


def _read_corpus(path: str, gold: bool, tagmap: str, lowercase: bool) -> Corpus:
    if gold:
        return Corpus.from_gold_file(path, _load_tagmap(tagmap),
                                     lowercase=lowercase)
    return Corpus.from_file(path, TokenizerConfig(lowercase=lowercase))


def _corpus_flags(p: argparse.ArgumentParser):
    p.add_argument("--gold", action="store_true",
                   help="corpus is in vertical form<TAB>tag format")
    p.add_argument("--tagmap", default="default",
                   help="tag map file, or 'default' for the built-in Penn map")
    p.add_argument("--lowercase", action="store_true",
                   help="fold surface forms to lower case")


def _induction_flags(p: argparse.ArgumentParser):
    p.add_argument("--experiment", default="token", choices=induce.EXPERIMENTS)
    p.add_argument("--features", type=int, default=250,
                   help="number of feature words f")
    p.add_argument("--dims", type=int, default=50, help="reduced dimensions")
    p.add_argument("--clusters", type=int, default=200, help="induced tags k")
    p.add_argument("--neighbor-classes", type=int, default=250,
                   help="classes g for generalized vectors")
    p.add_argument("--sample", type=int, default=20000,
                   help="sampled occurrences for token models")
    p.add_argument("--rare-threshold", type=int, default=10,
                   help="neighbors below this frequency break a natural context")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--centered", action="store_true",
                   help="mean-center vectors before similarity (correlation)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def _cfg_from_args(args) -> InductionConfig:
    return InductionConfig(
        experiment=args.experiment,
        features=args.features,
        dims=args.dims,
        clusters=args.clusters,
        neighbor_classes=args.neighbor_classes,
        sample=args.sample,
        rare_threshold=args.rare_threshold,
        seed=args.seed,
        centered=args.centered,
    ).validate()


def _write_out(args, text: str):
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_vocab(args) -> int:
    corpus = _read_corpus(args.corpus, args.gold, args.tagmap, args.lowercase)
    storage.save_vocab(args.out, corpus.vocab)
    log.info("%d entries, %d tokens -> %s", len(corpus.vocab), len(corpus),
             args.out)
    return EXIT_OK


def cmd_vectors(args) -> int:
    corpus = _read_corpus(args.corpus, args.gold, args.tagmap, args.lowercase)
    cfg = _cfg_from_args(args)
    if args.mode == GENERALIZED and cfg.experiment != GENERALIZED:
        cfg = InductionConfig(**(vars(cfg) | {"experiment": GENERALIZED}))
    elif args.mode == WORD and cfg.experiment == GENERALIZED:
        cfg = InductionConfig(**(vars(cfg) | {"experiment": "token"}))
    mats = induce.build_matrices(corpus, cfg)
    sides = (LEFT, RIGHT) if args.side == "both" else (args.side,)
    for side in sides:
        matrix = mats.feature_left if side == LEFT else mats.feature_right
        path = f"{args.out}.{side}.ctx"
        storage.save_matrix(path, matrix)
        log.info("%s matrix: %d x %d, %d counts -> %s", side, matrix.n_rows,
                 matrix.n_cols, matrix.total(), path)
    return EXIT_OK


def cmd_induce(args) -> int:
    corpus = _read_corpus(args.corpus, args.gold, args.tagmap, args.lowercase)
    cfg = _cfg_from_args(args)
    model, tagging = induce.induce(corpus, cfg, threads=args.threads)
    corpus_meta = {"gold": args.gold, "lowercase": args.lowercase}
    inputs = {"corpus": {"sha256": storage.sha256_file(args.corpus)}}
    if args.gold and args.tagmap != "default":
        inputs["tagmap"] = {"sha256": storage.sha256_file(args.tagmap)}
    storage.save_bundle(args.out, model, tagging, corpus, corpus_meta, inputs)
    log.info("experiment %s: %s -> %s", cfg.experiment, tagging.counts(),
             args.out)
    return EXIT_OK


def cmd_tag(args) -> int:
    model, _, vocab, config_doc, manifest = storage.load_bundle(args.bundle)
    expected = manifest["inputs"]["corpus"]["sha256"]
    actual = storage.sha256_file(args.corpus)
    if actual != expected:
        raise DataError(
            f"{args.corpus} does not match the corpus this bundle was built "
            f"from (sha256 {actual[:12]}... != {expected[:12]}...)")
    meta = config_doc["corpus"]
    corpus = _read_corpus(args.corpus, meta["gold"], args.tagmap,
                          meta["lowercase"])
    tagging = induce.tag_corpus(model, corpus, threads=args.threads)
    provenance = {"config": manifest["config_fingerprint"],
                  "seed": model.config.seed,
                  "experiment": model.config.experiment}
    storage.save_tagging(args.out, tagging, provenance)
    log.info("tagged %d tokens: %s -> %s", len(tagging), tagging.counts(),
             args.out)
    return EXIT_OK


def _read_counts_file(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    counts = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if parts[0] == "tag":
            continue
        if len(parts) < 5:
            raise DataError(f"{path}:{lineno}: expected "
                            "tag<TAB>frequency<TAB>classes<TAB>correct<TAB>incorrect")
        counts.append((parts[0], int(parts[1]), int(parts[2]), int(parts[3]),
                       int(parts[4])))
    if not counts:
        raise DataError(f"{path}: no count records")
    return counts


def cmd_eval(args) -> int:
    if args.counts:
        report = evaluate.report_from_counts(_read_counts_file(args.counts))
    else:
        if not args.tagging or not args.corpus:
            raise DataError("eval needs a tagging file and a gold corpus "
                            "(or --counts)")
        tagging, header = storage.load_tagging(args.tagging)
        corpus = Corpus.from_gold_file(args.corpus, _load_tagmap(args.tagmap),
                                       lowercase=args.lowercase)
        provenance = {k: header[k] for k in ("config", "seed", "experiment")
                      if k in header}
        report = evaluate.score(tagging, corpus, provenance=provenance)
    _write_out(args, evaluate.render_report(report, args.format))
    return EXIT_OK


def cmd_neighbors(args) -> int:
    matrix = storage.load_matrix(args.vectors)
    vocab = storage.load_vocab(args.vocab)
    if matrix.n_rows != len(vocab):
        raise DataError(f"{args.vectors} has {matrix.n_rows} rows but the "
                        f"vocabulary has {len(vocab)} entries")
    from .svd import truncated_svd
    space = truncated_svd(matrix, min(args.dims, min(matrix.counts.shape)))
    found = induce.nearest_neighbors(space, vocab, args.word, args.n)
    lines = [f"{w}\t{sim:.4f}" for w, sim in found]
    _write_out(args, "".join(line + "\n" for line in lines))
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="distag",
                     description="Induce part-of-speech categories from "
                                 "unannotated text and evaluate them.")
    parser.add_argument("--verbose", action="store_true")
    parser.add_argument("--config",
                        help="JSON file of flag defaults; command line wins")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vocab", help="build and persist the vocabulary")
    p.add_argument("corpus")
    _corpus_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_vocab)

    p = sub.add_parser("vectors", help="build and persist context matrices")
    p.add_argument("corpus")
    _corpus_flags(p)
    _induction_flags(p)
    p.add_argument("--mode", choices=(WORD, GENERALIZED), default=WORD)
    p.add_argument("--side", choices=(LEFT, RIGHT, "both"), default="both")
    p.add_argument("--out", required=True, help="output path prefix")
    p.set_defaults(func=cmd_vectors)

    p = sub.add_parser("induce", help="run an induction experiment")
    p.add_argument("corpus")
    _corpus_flags(p)
    _induction_flags(p)
    p.add_argument("--out", required=True, help="bundle output directory")
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("tag", help="tag a corpus with an induced model")
    p.add_argument("bundle")
    p.add_argument("corpus")
    p.add_argument("--tagmap", default="default")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("eval", help="score a tagging against gold tags")
    p.add_argument("tagging", nargs="?")
    p.add_argument("corpus", nargs="?")
    p.add_argument("--tagmap", default="default")
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--counts", help="score a per-tag counts file instead")
    p.add_argument("--format", choices=("text", "tsv"), default="text")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("neighbors", help="most similar words in one side space")
    p.add_argument("vectors", help="context matrix file")
    p.add_argument("word")
    p.add_argument("--vocab", required=True)
    p.add_argument("--dims", type=int, default=50)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_neighbors)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if "--config" in argv:
        at = argv.index("--config")
        try:
            with open(argv[at + 1], "r", encoding="utf-8") as fh:
                defaults = json.load(fh)
        except (OSError, ValueError, IndexError) as exc:
            parser.error(f"cannot load --config: {exc}")
        bad = [k for k in defaults if not isinstance(k, str)]
        if bad:
            parser.error(f"--config keys must be strings: {bad}")
        for p in parser._subparsers._group_actions[0].choices.values():
            p.set_defaults(**defaults)
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DataError as exc:
        print(f"distag: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"distag: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
