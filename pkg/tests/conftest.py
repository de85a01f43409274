import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from distag import Corpus, EvalTagMap, load_gold

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")


def make_gold(lines, mapping=None, punct=("PUNCT",), min_tag_count=0):
    """Corpus from (form, tag) pairs; None marks a sentence boundary."""
    if mapping is None:
        tags = {t for _, t in (p for p in lines if p is not None)}
        mapping = {t: t for t in tags if t != "PUNCT"}
        mapping["PUNCT"] = "EXCLUDED"
    text = "\n".join("" if p is None else f"{p[0]}\t{p[1]}" for p in lines) + "\n"
    tag_map = EvalTagMap(mapping, punct_tags=[p for p in punct if p in mapping])
    return load_gold(text, tag_map, min_tag_count=min_tag_count)


@pytest.fixture(scope="session")
def planted_corpus():
    """Small three-class corpus with fully deterministic class contexts."""
    rng = np.random.default_rng(11)
    dets = [f"d{i}" for i in range(4)]
    nouns = [f"n{i}" for i in range(12)]
    verbs = [f"v{i}" for i in range(8)]
    lines = []
    for _ in range(1500):
        lines.append((rng.choice(dets), "DT"))
        lines.append((rng.choice(nouns), "N"))
        lines.append((rng.choice(verbs), "VBD"))
        lines.append((rng.choice(dets), "DT"))
        lines.append((rng.choice(nouns), "N"))
        lines.append(None)
    return make_gold(lines)
