"""Shared fixtures: toy and full-scale manifests, synthetic score grids,
and on-disk run/qrels corpora for the ingest and CLI tests."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from gridsankey.grid import ScoreGrid, export_scores
from gridsankey.ingest import AXES, parse_manifest

settings.register_profile("suite", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("suite")

TOY_TOPICS = ("301", "302", "303", "304")

FULL_STOPLISTS = ("nostop", "indri", "lucene", "snowball", "smart", "terrier")
FULL_STEMMERS = ("nolug", "weakPorter", "porter", "snowballPorter", "krovetz", "lovins")
FULL_MODELS = (
    "bb2", "bm25", "dfiz", "dfree", "dirichletlm", "dlh", "dph",
    "hiemstralm", "ifb2", "inb2", "inl2", "inexpb2", "jskls",
    "lemurtfidf", "lgd", "pl2", "tfidf",
)
FULL_FAMILIES = {
    "vector_space": ["tfidf", "lemurtfidf"],
    "language_model": ["dirichletlm", "hiemstralm", "jskls", "lgd"],
    "probabilistic": [
        "bb2", "bm25", "dfiz", "dfree", "dlh", "dph",
        "ifb2", "inb2", "inl2", "inexpb2", "pl2",
    ],
}


def toy_manifest_raw() -> dict:
    return {
        "collection": {"id": "TOY", "topics": list(TOY_TOPICS)},
        "axes": {
            "stoplist": ["nostop", "indri", "lucene"],
            "stemmer": ["nolug", "porter", "krovetz"],
            "model": ["bm25", "tfidf", "dirichletlm"],
        },
        "model_families": {
            "vector_space": ["tfidf"],
            "probabilistic": ["bm25"],
            "language_model": ["dirichletlm"],
        },
    }


def full_manifest_raw() -> dict:
    return {
        "collection": {"id": "T07", "topics": [str(t) for t in range(301, 351)]},
        "axes": {
            "stoplist": list(FULL_STOPLISTS),
            "stemmer": list(FULL_STEMMERS),
            "model": list(FULL_MODELS),
        },
        "model_families": {fam: list(members) for fam, members in FULL_FAMILIES.items()},
    }


def make_synthetic_grid(manifest, measure_ids=("AP", "P@10"), seed=0, loaded=None) -> ScoreGrid:
    rng = np.random.default_rng(seed)
    shape = (manifest.system_count, len(measure_ids), len(manifest.topic_ids))
    scores = rng.random(shape)
    if loaded is None:
        loaded = np.ones(manifest.system_count, dtype=bool)
    scores = scores * loaded[:, None, None]  # unloaded rows hold zeros
    return ScoreGrid(manifest, measure_ids, scores, loaded)


@pytest.fixture
def toy_manifest():
    return parse_manifest(toy_manifest_raw())


@pytest.fixture
def toy_grid(toy_manifest):
    return make_synthetic_grid(toy_manifest, seed=7)


@pytest.fixture(scope="session")
def full_manifest():
    return parse_manifest(full_manifest_raw())


@pytest.fixture(scope="session")
def full_grid(full_manifest):
    measures = ("AP", "P@10", "Rprec", "RBP", "nDCG", "nDCG@20", "ERR")
    return make_synthetic_grid(full_manifest, measure_ids=measures, seed=11)


# --- on-disk corpora --------------------------------------------------------


def manifest_to_toml(raw: dict) -> str:
    coll = raw["collection"]
    lines = ["[collection]", f'id = "{coll["id"]}"']
    lines.append("topics = [" + ", ".join(f'"{t}"' for t in coll["topics"]) + "]")
    if "separator" in coll:
        lines.append(f'separator = "{coll["separator"]}"')
    for key in ("depth", "max_grade"):
        if key in coll:
            lines.append(f"{key} = {coll[key]}")
    if "rbp_p" in coll:
        lines.append(f"rbp_p = {coll['rbp_p']}")
    lines += ["", "[axes]"]
    for axis in AXES:
        lines.append(axis + " = [" + ", ".join(f'"{x}"' for x in raw["axes"][axis]) + "]")
    lines += ["", "[model_families]"]
    for family, members in raw["model_families"].items():
        lines.append(family + " = [" + ", ".join(f'"{m}"' for m in members) + "]")
    if "paths" in raw:
        lines += ["", "[paths]"]
        for key, value in raw["paths"].items():
            lines.append(f'{key} = "{value}"')
    return "\n".join(lines) + "\n"


def build_run_corpus(root: Path, raw: dict, *, seed=5, drop=(), n_docs=30, run_len=20) -> Path:
    """Write runs/*.txt plus qrels.txt for every system in the manifest
    (minus ``drop``) and return the manifest path."""
    raw = dict(raw)
    raw["paths"] = {"runs": "runs/*.txt", "qrels": "qrels.txt"}
    runs_dir = root / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    topics = [str(t) for t in raw["collection"]["topics"]]
    docs = [f"d{i:03d}" for i in range(n_docs)]
    separator = raw["collection"].get("separator", "_")

    qrels_lines = []
    for topic in topics:
        relevant = set(rng.sample(docs, 6))
        for doc in docs:
            qrels_lines.append(f"{topic} 0 {doc} {1 if doc in relevant else 0}")
    (root / "qrels.txt").write_text("\n".join(qrels_lines) + "\n")

    axes = raw["axes"]
    for combo in itertools.product(axes["stoplist"], axes["stemmer"], axes["model"]):
        system_id = separator.join(combo)
        if system_id in drop:
            continue
        lines = []
        for topic in topics:
            ranked = rng.sample(docs, run_len)
            for rank, doc in enumerate(ranked, start=1):
                score = 100 - rank + rng.random()
                lines.append(f"{topic} Q0 {doc} {rank} {score:.4f} {system_id}")
        (runs_dir / f"{system_id}.txt").write_text("\n".join(lines) + "\n")

    manifest_path = root / "manifest.toml"
    manifest_path.write_text(manifest_to_toml(raw))
    return manifest_path


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory) -> Path:
    """A complete 27-system toy collection on disk; returns the manifest path."""
    root = tmp_path_factory.mktemp("toy_corpus")
    return build_run_corpus(root, toy_manifest_raw())


def write_collection_dir(parent: Path, raw: dict, grid: ScoreGrid, name="coll") -> Path:
    """Lay out <parent>/<name>/{manifest.toml,scores.csv} as the server
    expects; returns the data directory (the parent)."""
    coll_dir = parent / name
    coll_dir.mkdir(parents=True, exist_ok=True)
    (coll_dir / "manifest.toml").write_text(manifest_to_toml(raw))
    export_scores(grid, coll_dir / "scores.csv")
    return parent
