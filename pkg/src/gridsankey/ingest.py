"""Ingestion of TREC-format runs and qrels plus the collection manifest.

A collection is described by a single TOML manifest declaring the factor
axes (stoplist, stemmer, model), the topic set, the model sub-family map
and where to find the run and qrels files.  Run files are named after the
system they belong to: the file stem is the system id, i.e. the three
level ids joined by the manifest's separator (``indri_krovetz_bm25.txt``).

Manifest schema::

    [collection]
    id = "T07"
    topics = ["301", "302", ...]
    separator = "_"          # optional, default "_"
    depth = 1000             # optional, ranking truncation depth
    max_grade = 1            # optional, relevance grade ceiling (ERR)
    rbp_p = 0.8              # optional, RBP persistence

    [axes]
    stoplist = ["nostop", "indri", ...]
    stemmer = ["nolug", "porter", ...]
    model = ["bm25", "tfidf", ...]

    [model_families]
    vector_space = ["tfidf", ...]
    probabilistic = ["bm25", ...]
    language_model = ["dirichletlm", ...]

    [paths]
    runs = "runs/*.txt"      # glob, relative to the manifest
    qrels = "qrels.txt"
"""

from __future__ import annotations

import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import DataError, ManifestError, ParseError, UnknownAxisError, UnknownLevelError

AXES = ("stoplist", "stemmer", "model")
MODEL_FAMILIES = ("vector_space", "probabilistic", "language_model")

DEFAULT_SEPARATOR = "_"
DEFAULT_DEPTH = 1000


@dataclass(frozen=True)
class SystemConfig:
    """One point of the grid: a (stoplist, stemmer, model) level triple."""

    stoplist: str
    stemmer: str
    model: str

    def level(self, axis: str) -> str:
        if axis not in AXES:
            raise UnknownAxisError(f"unknown axis: {axis!r}", field="axis")
        return getattr(self, axis)

    def levels(self) -> tuple[str, str, str]:
        return (self.stoplist, self.stemmer, self.model)


@dataclass(frozen=True)
class CollectionManifest:
    collection_id: str
    topic_ids: tuple[str, ...]
    axes: Mapping[str, tuple[str, ...]]
    model_families: Mapping[str, str]  # model level -> family name
    runs_glob: str | None = None
    qrels_path: str | None = None
    separator: str = DEFAULT_SEPARATOR
    depth: int = DEFAULT_DEPTH
    max_grade: int = 1
    rbp_p: float | None = None
    base_dir: Path = field(default_factory=Path, compare=False)

    @property
    def system_count(self) -> int:
        n = 1
        for levels in self.axes.values():
            n *= len(levels)
        return n

    def systems(self) -> Iterator[SystemConfig]:
        """All declared systems, row-major in axis declaration order."""
        for sl in self.axes["stoplist"]:
            for st in self.axes["stemmer"]:
                for mo in self.axes["model"]:
                    yield SystemConfig(sl, st, mo)

    def format_system_id(self, config: SystemConfig) -> str:
        return self.separator.join(config.levels())

    def parse_system_id(self, name: str) -> SystemConfig:
        parts = name.split(self.separator)
        if len(parts) != 3:
            raise ParseError(
                f"system id {name!r}: expected 3 parts separated by "
                f"{self.separator!r}, got {len(parts)}",
                field="system",
            )
        for axis, token in zip(AXES, parts):
            if token not in self.axes[axis]:
                raise UnknownLevelError(
                    f"system id {name!r}: unknown {axis} level {token!r}", field=axis
                )
        return SystemConfig(*parts)

    def resolve(self, relative: str) -> Path:
        p = Path(relative)
        return p if p.is_absolute() else self.base_dir / p


def load_manifest(path: str | Path) -> CollectionManifest:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ManifestError(f"invalid TOML in {path}: {exc}") from exc
    return parse_manifest(raw, base_dir=path.parent)


def parse_manifest(raw: Mapping, *, base_dir: Path = Path(".")) -> CollectionManifest:
    coll = raw.get("collection")
    if not isinstance(coll, Mapping) or "id" not in coll:
        raise ManifestError("manifest needs a [collection] table with an 'id'")
    topics = tuple(str(t) for t in coll.get("topics", ()))
    if not topics:
        raise ManifestError("manifest declares no topics")
    if len(set(topics)) != len(topics):
        raise ManifestError("duplicate topic ids in manifest")

    axes_raw = raw.get("axes")
    if not isinstance(axes_raw, Mapping):
        raise ManifestError("manifest needs an [axes] table")
    axes: dict[str, tuple[str, ...]] = {}
    for axis in AXES:
        levels = tuple(str(x) for x in axes_raw.get(axis, ()))
        if not levels:
            raise ManifestError(f"axis {axis!r} declares no levels")
        if len(set(levels)) != len(levels):
            raise ManifestError(f"axis {axis!r} has duplicate levels")
        axes[axis] = levels
    for extra in set(axes_raw) - set(AXES):
        raise ManifestError(f"unknown axis {extra!r} in manifest")

    fam_raw = raw.get("model_families", {})
    families: dict[str, str] = {}
    for family, members in fam_raw.items():
        if family not in MODEL_FAMILIES:
            raise ManifestError(f"unknown model family {family!r}")
        for level in members:
            if level not in axes["model"]:
                raise ManifestError(f"model family {family!r} names unknown model {level!r}")
            if level in families:
                raise ManifestError(f"model {level!r} assigned to two families")
            families[str(level)] = family
    missing = [m for m in axes["model"] if m not in families]
    if missing:
        raise ManifestError(f"models without a sub-family: {', '.join(missing)}")

    paths = raw.get("paths", {})
    separator = str(coll.get("separator", DEFAULT_SEPARATOR))
    if not separator:
        raise ManifestError("separator must be non-empty")
    depth = int(coll.get("depth", DEFAULT_DEPTH))
    if depth < 1:
        raise ManifestError("depth must be >= 1")
    max_grade = int(coll.get("max_grade", 1))
    if max_grade < 1:
        raise ManifestError("max_grade must be >= 1")
    rbp_p = coll.get("rbp_p")
    if rbp_p is not None:
        rbp_p = float(rbp_p)
        if not 0.0 < rbp_p < 1.0:
            raise ManifestError("rbp_p must lie in (0, 1)")

    return CollectionManifest(
        collection_id=str(coll["id"]),
        topic_ids=topics,
        axes=axes,
        model_families=families,
        runs_glob=paths.get("runs"),
        qrels_path=paths.get("qrels"),
        separator=separator,
        depth=depth,
        max_grade=max_grade,
        rbp_p=rbp_p,
        base_dir=Path(base_dir),
    )


# --- run / qrels parsing ---------------------------------------------------


def _iter_lines(stream) -> Iterator[str]:
    if isinstance(stream, bytes):
        yield from stream.decode("utf-8").splitlines()
        return
    if isinstance(stream, str):
        yield from stream.splitlines()
        return
    for line in stream:
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        yield line.rstrip("\r\n")


def parse_run(stream: IO[bytes] | bytes | str | Iterable, *, depth: int = DEFAULT_DEPTH) -> dict[str, list[str]]:
    """Parse a TREC run into normalized per-topic rankings.

    Lines carry six whitespace-separated fields (topic, iteration token,
    doc, rank, score, tag).  Per topic the documents are re-sorted by
    descending score with ties broken by descending doc id, ranks are
    implicitly renumbered 1..n by list position, and the ranking is
    truncated to ``depth``.
    """
    per_topic: dict[str, list[tuple[float, str]]] = {}
    seen: set[tuple[str, str]] = set()
    for line_no, line in enumerate(_iter_lines(stream), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 6:
            raise ParseError(f"expected 6 fields, got {len(parts)}", line_no=line_no)
        topic, _iter, doc, rank, score_s, _tag = parts
        try:
            int(rank)
        except ValueError:
            raise ParseError(f"unparseable rank {rank!r}", line_no=line_no) from None
        try:
            score = float(score_s)
        except ValueError:
            raise ParseError(f"unparseable score {score_s!r}", line_no=line_no) from None
        if score != score or score in (float("inf"), float("-inf")):
            raise ParseError(f"unparseable score {score_s!r} (non-finite)", line_no=line_no)
        if (topic, doc) in seen:
            raise ParseError(f"duplicate document {doc!r} for topic {topic!r}", line_no=line_no)
        seen.add((topic, doc))
        per_topic.setdefault(topic, []).append((score, doc))

    rankings: dict[str, list[str]] = {}
    for topic, entries in per_topic.items():
        entries.sort(key=lambda e: (e[0], e[1]), reverse=True)
        rankings[topic] = [doc for _, doc in entries[:depth]]
    return rankings


class Qrels:
    """Relevance judgments: (topic, doc) -> grade, absent pairs grade 0."""

    def __init__(self, grades: Mapping[tuple[str, str], int]):
        self._by_topic: dict[str, dict[str, int]] = {}
        for (topic, doc), grade in grades.items():
            self._by_topic.setdefault(topic, {})[doc] = int(grade)
        self._n_relevant = {
            topic: sum(1 for g in docs.values() if g >= 1)
            for topic, docs in self._by_topic.items()
        }

    def grade(self, topic: str, doc: str) -> int:
        return self._by_topic.get(topic, {}).get(doc, 0)

    def topic_judgments(self, topic: str) -> dict[str, int]:
        return self._by_topic.get(topic, {})

    def relevant_count(self, topic: str) -> int:
        return self._n_relevant.get(topic, 0)

    @property
    def topics(self) -> tuple[str, ...]:
        return tuple(self._by_topic)

    @property
    def max_grade(self) -> int:
        grades = [g for docs in self._by_topic.values() for g in docs.values()]
        return max(grades, default=0)

    def __len__(self) -> int:
        return sum(len(d) for d in self._by_topic.values())


def parse_qrels(stream: IO[bytes] | bytes | str | Iterable) -> Qrels:
    """Parse qrels lines: topic, iteration token, doc, grade."""
    grades: dict[tuple[str, str], int] = {}
    for line_no, line in enumerate(_iter_lines(stream), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields, got {len(parts)}", line_no=line_no)
        topic, _iter, doc, grade_s = parts
        try:
            grade = int(grade_s)
        except ValueError:
            raise ParseError(f"unparseable grade {grade_s!r}", line_no=line_no) from None
        if grade < 0:
            raise ParseError(f"negative grade for topic {topic!r} doc {doc!r}", line_no=line_no)
        key = (topic, doc)
        if key in grades and grades[key] != grade:
            raise ParseError(
                f"conflicting grades for topic {topic!r} doc {doc!r}", line_no=line_no
            )
        grades[key] = grade
    return Qrels(grades)


# --- collection loading ----------------------------------------------------


@dataclass(frozen=True)
class LoadedCollection:
    manifest: CollectionManifest
    runs: Mapping[SystemConfig, Mapping[str, list[str]]]
    qrels: Qrels
    missing: tuple[SystemConfig, ...]

    @property
    def completeness(self) -> float:
        return len(self.runs) / self.manifest.system_count

    def completeness_report(self) -> dict:
        return {
            "collection_id": self.manifest.collection_id,
            "declared": self.manifest.system_count,
            "loaded": len(self.runs),
            "completeness": self.completeness,
            "missing": sorted(self.manifest.format_system_id(c) for c in self.missing),
        }


def load_collection(manifest: CollectionManifest, *, workers: int | None = None) -> LoadedCollection:
    """Load every run file matched by the manifest glob, plus the qrels.

    Missing run files are reported through the completeness fields, not
    raised; an unreadable qrels file or an empty run set is fatal.
    """
    if manifest.qrels_path is None:
        raise ManifestError("manifest declares no qrels path")
    if manifest.runs_glob is None:
        raise ManifestError("manifest declares no runs glob")

    qrels_file = manifest.resolve(manifest.qrels_path)
    try:
        qrels = parse_qrels(qrels_file.read_bytes())
    except OSError as exc:
        raise DataError(f"cannot read qrels {qrels_file}: {exc}") from exc

    pattern = manifest.resolve(manifest.runs_glob)
    run_files = sorted(pattern.parent.glob(pattern.name))
    if not run_files:
        raise DataError(f"no run files match {pattern}")

    by_config: dict[SystemConfig, Path] = {}
    for path in run_files:
        config = manifest.parse_system_id(path.stem)
        by_config[config] = path

    def _parse_one(item: tuple[SystemConfig, Path]) -> tuple[SystemConfig, dict[str, list[str]]]:
        config, path = item
        try:
            return config, parse_run(path.read_bytes(), depth=manifest.depth)
        except ParseError as exc:
            raise ParseError(f"{path.name}: {exc}", field="runs") from exc

    items = sorted(by_config.items(), key=lambda kv: manifest.format_system_id(kv[0]))
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parsed = list(pool.map(_parse_one, items))
    else:
        parsed = [_parse_one(item) for item in items]

    runs = dict(sorted(parsed, key=lambda kv: manifest.format_system_id(kv[0])))
    missing = tuple(c for c in manifest.systems() if c not in runs)
    return LoadedCollection(manifest=manifest, runs=runs, qrels=qrels, missing=missing)
