"""Corpus ingestion: tokenization, vocabulary construction, gold-tag loading.

A corpus is a flat token stream. Each token knows its surface-form id, its
position, whether it is punctuation, whether a sentence/paragraph boundary
precedes it, and (for tagged corpora) its gold evaluation tag. Adjacency is
blocked by boundaries: a token with ``boundary_before`` has no left neighbor
and the token before it has no right neighbor.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import DataError

# The 16-tag evaluation scheme. Gold tags are stored as indices into this
# tuple; EXCLUDED_ID marks tokens outside the evaluation, NO_GOLD untagged text.
EVAL_TAGS = (
    "ADN", "CC", "CD", "DT", "IN", "ING", "MD", "N",
    "POS", "PRP", "RB", "TO", "VB", "VBD", "VBN", "WDT",
)
EXCLUDED = "EXCLUDED"
EXCLUDED_ID = len(EVAL_TAGS)
NO_GOLD = -1

_EVAL_TAG_IDS = {t: i for i, t in enumerate(EVAL_TAGS)}
_EVAL_TAG_IDS[EXCLUDED] = EXCLUDED_ID

DEFAULT_PUNCT_CHARS = ".,;:!?()[]{}\"'`"
DEFAULT_SENTENCE_ENDS = ".!?"

# Minimum instance count below which a tag is dropped from the evaluation.
MIN_TAG_COUNT = 100


def tag_name(tag_id: int) -> str:
    if tag_id == NO_GOLD:
        return "-"
    if tag_id == EXCLUDED_ID:
        return EXCLUDED
    return EVAL_TAGS[tag_id]


@dataclass(frozen=True)
class TokenizerConfig:
    """Options for splitting raw text.

    Characters in ``punct_chars`` are split off as single-character tokens
    flagged as punctuation. A token consisting of a ``sentence_ends`` character
    marks a sentence break: the following token gets ``boundary_before``.
    Blank lines always break.
    """

    punct_chars: str = DEFAULT_PUNCT_CHARS
    sentence_ends: str = DEFAULT_SENTENCE_ENDS
    lowercase: bool = False


@dataclass
class Token:
    form_id: int
    position: int
    gold_tag: Optional[str]
    is_punct: bool
    boundary_before: bool


class Vocabulary:
    """Dense word <-> id map with corpus frequencies and frequency ranks.

    Ids follow first occurrence in the corpus. Ranks are 1-based, descending
    by frequency, ties broken by id (i.e. first occurrence), so that the rank
    array is always a permutation of 1..V.
    """

    def __init__(self, words: Sequence[str], freqs: Sequence[int]):
        if len(words) != len(freqs):
            raise ValueError("words and freqs length mismatch")
        if len(words) == 0:
            raise ValueError("empty vocabulary")
        self.words = list(words)
        self.index = {w: i for i, w in enumerate(self.words)}
        if len(self.index) != len(self.words):
            raise ValueError("duplicate surface forms")
        self.freq = np.asarray(freqs, dtype=np.int64)
        # stable sort keeps ascending id order within equal frequencies
        self._by_rank = np.argsort(-self.freq, kind="stable")
        self.rank = np.empty(len(self.words), dtype=np.int64)
        self.rank[self._by_rank] = np.arange(1, len(self.words) + 1)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def id_of(self, word: str) -> int:
        try:
            return self.index[word]
        except KeyError:
            raise DataError(f"unknown word: {word!r}") from None

    def word_of(self, word_id: int) -> str:
        return self.words[word_id]

    def top(self, f: int) -> np.ndarray:
        """Ids of the f most frequent words (ranks 1..f)."""
        if not 0 < f <= len(self.words):
            raise ValueError(f"need 1 <= f <= {len(self.words)}, got {f}")
        return self._by_rank[:f].copy()

    @property
    def total_tokens(self) -> int:
        return int(self.freq.sum())


def tokenize_stream(text: str, config: TokenizerConfig = TokenizerConfig()):
    """Split raw text into tokens, interning surface forms.

    Returns ``(tokens, forms)`` where ``forms[token.form_id]`` is the surface
    string. Punctuation characters become separate one-character tokens with
    ``is_punct`` set; blank lines and sentence-end punctuation put a boundary
    before the next token. The first token of a non-empty stream always has
    ``boundary_before``.
    """
    punct = set(config.punct_chars)
    ends = set(config.sentence_ends)
    forms: list[str] = []
    ids: dict[str, int] = {}
    tokens: list[Token] = []
    pending_boundary = True

    def intern(form: str) -> int:
        fid = ids.get(form)
        if fid is None:
            fid = len(forms)
            ids[form] = fid
            forms.append(form)
        return fid

    def emit(form: str, is_punct: bool):
        nonlocal pending_boundary
        tokens.append(Token(intern(form), len(tokens), None, is_punct, pending_boundary))
        pending_boundary = False

    for line in text.splitlines():
        if not line.strip():
            pending_boundary = True
            continue
        if config.lowercase:
            line = line.lower()
        for chunk in line.split():
            word = []
            for ch in chunk:
                if ch in punct:
                    if word:
                        emit("".join(word), False)
                        word = []
                    emit(ch, True)
                    if ch in ends:
                        pending_boundary = True
                else:
                    word.append(ch)
            if word:
                emit("".join(word), False)
    return tokens, forms


def build_vocabulary(tokens: Sequence[Token], forms: Sequence[str]) -> Vocabulary:
    """Count every surface form and assign descending-frequency ranks."""
    if not tokens:
        raise DataError("cannot build a vocabulary from an empty token sequence")
    counts = np.zeros(len(forms), dtype=np.int64)
    for tok in tokens:
        counts[tok.form_id] += 1
    return Vocabulary(forms, counts)


class EvalTagMap:
    """Total map from source tag strings to the 16-tag evaluation scheme.

    ``punct_tags`` lists source tags that are punctuation; their tokens get
    ``is_punct`` in addition to the EXCLUDED gold tag.
    """

    def __init__(self, mapping: dict[str, str], punct_tags: Sequence[str] = ()):
        for src, tag in mapping.items():
            if tag not in _EVAL_TAG_IDS:
                raise DataError(f"tag map sends {src!r} to unknown tag {tag!r}")
        self.mapping = dict(mapping)
        self.punct_tags = set(punct_tags)
        unknown_punct = self.punct_tags - set(self.mapping)
        if unknown_punct:
            raise DataError(f"punct tags not in map: {sorted(unknown_punct)}")

    def collapse(self, source: str) -> str:
        """Collapse a source tag to its evaluation tag. Unknown tags raise."""
        try:
            return self.mapping[source]
        except KeyError:
            raise DataError(f"source tag not in tag map: {source!r}") from None

    def is_punct(self, source: str) -> bool:
        return source in self.punct_tags

    @classmethod
    def load(cls, path: str) -> "EvalTagMap":
        """Read a tag map file: one ``source<TAB>eval[<TAB>punct]`` per line.

        Lines that are empty or start with ``# `` (hash space, or a lone hash)
        are comments, which leaves ``#`` usable as a source tag.
        """
        mapping: dict[str, str] = {}
        punct: list[str] = []
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise DataError(f"cannot read tag map {path}: {exc}") from exc
        for lineno, line in enumerate(lines, 1):
            if not line.strip():
                continue
            if line == "#" or line.startswith("# ") or line.startswith("##"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise DataError(f"{path}:{lineno}: expected source<TAB>eval[<TAB>punct]")
            src, tag = parts[0], parts[1]
            if src in mapping:
                raise DataError(f"{path}:{lineno}: duplicate source tag {src!r}")
            mapping[src] = tag
            if len(parts) == 3:
                if parts[2] != "punct":
                    raise DataError(f"{path}:{lineno}: third column must be 'punct'")
                punct.append(src)
        if not mapping:
            raise DataError(f"tag map {path} is empty")
        return cls(mapping, punct)

    @classmethod
    def default(cls) -> "EvalTagMap":
        here = os.path.dirname(__file__)
        return cls.load(os.path.join(here, "data", "penn16.map"))


def collapse_tag(source: str, tag_map: EvalTagMap) -> str:
    return tag_map.collapse(source)


@dataclass
class Corpus:
    """Immutable token stream in columnar form.

    ``gold`` holds evaluation tag ids (NO_GOLD for untagged text) and
    ``source_tags`` the original tag strings of a gold corpus, kept so the
    vertical format round-trips byte-identically.
    """

    vocab: Vocabulary
    form_ids: np.ndarray
    is_punct: np.ndarray
    boundary_before: np.ndarray
    gold: np.ndarray
    source_tags: Optional[list[str]] = None
    lowercased: bool = False

    def __len__(self) -> int:
        return len(self.form_ids)

    def __iter__(self) -> Iterator[Token]:
        for i in range(len(self)):
            yield self.token(i)

    def token(self, i: int) -> Token:
        gid = int(self.gold[i])
        return Token(
            form_id=int(self.form_ids[i]),
            position=i,
            gold_tag=None if gid == NO_GOLD else tag_name(gid),
            is_punct=bool(self.is_punct[i]),
            boundary_before=bool(self.boundary_before[i]),
        )

    @property
    def has_gold(self) -> bool:
        return bool((self.gold != NO_GOLD).all()) and len(self) > 0

    @classmethod
    def from_text(cls, text: str, config: TokenizerConfig = TokenizerConfig()) -> "Corpus":
        tokens, forms = tokenize_stream(text, config)
        if not tokens:
            raise DataError("corpus is empty after tokenization")
        vocab = build_vocabulary(tokens, forms)
        n = len(tokens)
        return cls(
            vocab=vocab,
            form_ids=np.fromiter((t.form_id for t in tokens), np.int32, n),
            is_punct=np.fromiter((t.is_punct for t in tokens), np.bool_, n),
            boundary_before=np.fromiter((t.boundary_before for t in tokens), np.bool_, n),
            gold=np.full(n, NO_GOLD, np.int8),
            lowercased=config.lowercase,
        )

    @classmethod
    def from_file(cls, path: str, config: TokenizerConfig = TokenizerConfig()) -> "Corpus":
        return cls.from_text(_read_text(path), config)

    @classmethod
    def from_gold_text(cls, text: str, tag_map: EvalTagMap,
                       min_tag_count: int = MIN_TAG_COUNT,
                       lowercase: bool = False,
                       source_name: str = "<gold>") -> "Corpus":
        return load_gold(text, tag_map, min_tag_count=min_tag_count,
                         lowercase=lowercase, source_name=source_name)

    @classmethod
    def from_gold_file(cls, path: str, tag_map: EvalTagMap,
                       min_tag_count: int = MIN_TAG_COUNT,
                       lowercase: bool = False) -> "Corpus":
        return load_gold(_read_text(path), tag_map, min_tag_count=min_tag_count,
                         lowercase=lowercase, source_name=path)

    def gold_text(self) -> str:
        """Serialize back to the vertical ``form<TAB>tag`` format."""
        if self.source_tags is None:
            raise DataError("corpus was not loaded from a tagged file")
        out = []
        for i in range(len(self)):
            if i > 0 and self.boundary_before[i]:
                out.append("")
            out.append(f"{self.vocab.word_of(int(self.form_ids[i]))}\t{self.source_tags[i]}")
        return "\n".join(out) + "\n"


def _read_text(path: str) -> str:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: not valid UTF-8 at byte {exc.start}") from exc


def load_gold(text: str, tag_map: EvalTagMap,
              min_tag_count: int = MIN_TAG_COUNT,
              lowercase: bool = False,
              source_name: str = "<gold>") -> Corpus:
    """Parse a tagged corpus in vertical format.

    One token per line as ``form<TAB>source-tag``; a blank line is a sentence
    boundary. Source tags are collapsed through the tag map. Source tags with
    fewer than ``min_tag_count`` instances are excluded from the evaluation,
    as is any evaluation tag left with fewer than ``min_tag_count`` tokens.
    """
    forms: list[str] = []
    ids: dict[str, int] = {}
    form_ids: list[int] = []
    srcs: list[str] = []
    boundaries: list[bool] = []
    pending = True
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            pending = True
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0]:
            raise DataError(f"{source_name}:{lineno}: expected form<TAB>tag")
        form, src = parts
        try:
            tag_map.collapse(src)
        except DataError as exc:
            raise DataError(f"{source_name}:{lineno}: {exc}") from None
        if lowercase:
            form = form.lower()
        fid = ids.get(form)
        if fid is None:
            fid = len(forms)
            ids[form] = fid
            forms.append(form)
        form_ids.append(fid)
        srcs.append(src)
        boundaries.append(pending)
        pending = False
    if not form_ids:
        raise DataError(f"{source_name}: no tokens")

    src_counts = Counter(srcs)
    rare_sources = {s for s, c in src_counts.items() if c < min_tag_count}
    collapsed = [
        EXCLUDED if s in rare_sources else tag_map.collapse(s) for s in srcs
    ]
    eval_counts = Counter(collapsed)
    rare_evals = {t for t, c in eval_counts.items()
                  if t != EXCLUDED and c < min_tag_count}
    gold = np.fromiter(
        (_EVAL_TAG_IDS[EXCLUDED if t in rare_evals else t] for t in collapsed),
        np.int8, len(collapsed))

    n = len(form_ids)
    counts = np.zeros(len(forms), dtype=np.int64)
    np.add.at(counts, np.asarray(form_ids), 1)
    return Corpus(
        vocab=Vocabulary(forms, counts),
        form_ids=np.asarray(form_ids, np.int32),
        is_punct=np.fromiter((tag_map.is_punct(s) for s in srcs), np.bool_, n),
        boundary_before=np.asarray(boundaries, np.bool_),
        gold=gold,
        source_tags=srcs,
        lowercased=lowercase,
    )
