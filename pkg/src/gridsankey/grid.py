"""The score tensor (system x measure x topic) and filtered views.

A ScoreGrid is dense and immutable: absent runs occupy zero-filled rows
flagged off in the ``loaded`` mask and are excluded from views.  Topic
columns are stored in ascending topic-id order, and every mean in the
package accumulates in that fixed order so equality checks against
brute-force oracles can be exact rather than tolerance-based.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Mapping, Sequence

import numpy as np

from .errors import (
    DataError,
    EmptyAxisError,
    ParseError,
    UnknownAxisError,
    UnknownLevelError,
    UnknownMeasureError,
    UnknownTopicError,
)
from .ingest import AXES, CollectionManifest, LoadedCollection, SystemConfig
from .measures import MeasureRegistry, default_registry, evaluate_run

CSV_HEADER = ("system", "stoplist", "stemmer", "model", "measure", "topic", "score")


class ScoreGrid:
    """Immutable dense tensor of scores plus factor metadata."""

    def __init__(
        self,
        manifest: CollectionManifest,
        measure_ids: Sequence[str],
        scores: np.ndarray,
        loaded: np.ndarray,
    ):
        self.manifest = manifest
        self.collection_id = manifest.collection_id
        self.measure_ids = tuple(measure_ids)
        self.topic_ids = tuple(sorted(manifest.topic_ids))
        self.systems = tuple(manifest.systems())

        shape = (len(self.systems), len(self.measure_ids), len(self.topic_ids))
        scores = np.asarray(scores, dtype=np.float64)
        if scores.shape != shape:
            raise DataError(f"score tensor shape {scores.shape} != expected {shape}")
        if scores.size and (scores.min() < 0.0 or scores.max() > 1.0):
            raise DataError("scores must lie in [0, 1]")
        loaded = np.asarray(loaded, dtype=bool)
        if loaded.shape != (len(self.systems),):
            raise DataError("loaded mask length mismatch")

        self._scores = scores.copy()
        self._scores.setflags(write=False)
        self._loaded = loaded.copy()
        self._loaded.setflags(write=False)

        self._system_index = {cfg: i for i, cfg in enumerate(self.systems)}
        self._measure_index = {m.casefold(): i for i, m in enumerate(self.measure_ids)}
        self._topic_index = {t: i for i, t in enumerate(self.topic_ids)}
        # per-axis level code of each system, for fast mask building
        self._axis_codes = {}
        for axis in AXES:
            lookup = {lv: i for i, lv in enumerate(manifest.axes[axis])}
            self._axis_codes[axis] = np.array(
                [lookup[cfg.level(axis)] for cfg in self.systems], dtype=np.int32
            )

    @property
    def scores(self) -> np.ndarray:
        return self._scores

    @property
    def loaded(self) -> np.ndarray:
        return self._loaded

    @property
    def completeness(self) -> float:
        return float(self._loaded.sum()) / len(self.systems)

    @property
    def cell_count(self) -> int:
        return self._scores.size

    def system_index(self, config: SystemConfig) -> int:
        return self._system_index[config]

    def measure_index(self, measure_id: str) -> int:
        idx = self._measure_index.get(measure_id.casefold())
        if idx is None:
            raise UnknownMeasureError(f"unknown measure: {measure_id}", field="measure_id")
        return idx

    def topic_index(self, topic_id: str) -> int:
        idx = self._topic_index.get(topic_id)
        if idx is None:
            raise UnknownTopicError(f"unknown topic: {topic_id}", field="topic_id")
        return idx

    def missing_systems(self) -> tuple[SystemConfig, ...]:
        return tuple(cfg for i, cfg in enumerate(self.systems) if not self._loaded[i])


def build_grid(
    loaded: LoadedCollection,
    measure_ids: Sequence[str] | None = None,
    registry: MeasureRegistry | None = None,
) -> ScoreGrid:
    """Evaluate every loaded run on every measure and topic."""
    manifest = loaded.manifest
    if not loaded.runs:
        raise DataError("no systems loaded")
    if registry is None:
        registry = default_registry(
            rbp_p=manifest.rbp_p if manifest.rbp_p is not None else 0.8,
            max_grade=manifest.max_grade,
        )
    if measure_ids is None:
        measure_ids = registry.ids()
    measure_ids = [registry.canonical_id(m) for m in measure_ids]

    topic_ids = tuple(sorted(manifest.topic_ids))
    systems = tuple(manifest.systems())
    scores = np.zeros((len(systems), len(measure_ids), len(topic_ids)))
    mask = np.zeros(len(systems), dtype=bool)

    for s_idx, config in enumerate(systems):
        run = loaded.runs.get(config)
        if run is None:
            continue
        mask[s_idx] = True
        for m_idx, measure in enumerate(measure_ids):
            try:
                topic_scores = evaluate_run(run, loaded.qrels, measure, topic_ids, registry)
            except ValueError as exc:
                raise DataError(
                    f"system {manifest.format_system_id(config)}, measure {measure}: {exc}"
                ) from exc
            for t_idx, ts in enumerate(topic_scores):
                scores[s_idx, m_idx, t_idx] = ts.value

    return ScoreGrid(manifest, measure_ids, scores, mask)


# --- views -------------------------------------------------------------------

TOPIC_AVERAGE = None  # topic_id value meaning "average over all topics"


@dataclass(frozen=True)
class GridView:
    """A grid plus filter state: visible levels, measure, topic mode, axis order.

    Cheap value object; create a new one per change (see apply_filter).
    """

    grid: ScoreGrid = field(repr=False)
    measure_id: str
    visible: Mapping[str, frozenset[str]]
    topic_id: str | None = TOPIC_AVERAGE
    axis_order: tuple[str, ...] = AXES

    def __post_init__(self):
        grid = self.grid
        grid.measure_index(self.measure_id)  # validates
        if self.topic_id is not None:
            grid.topic_index(self.topic_id)
        if sorted(self.axis_order) != sorted(AXES):
            raise UnknownAxisError(
                f"axis_order must be a permutation of {AXES}", field="axis_order"
            )
        for axis in AXES:
            levels = self.visible.get(axis)
            if not levels:
                raise EmptyAxisError(f"axis {axis!r} cannot be emptied", field=axis)
            unknown = set(levels) - set(grid.manifest.axes[axis])
            if unknown:
                raise UnknownLevelError(
                    f"unknown {axis} level(s): {', '.join(sorted(unknown))}", field=axis
                )

    def visible_levels(self, axis: str) -> tuple[str, ...]:
        """Visible levels of an axis, in manifest declaration order."""
        if axis not in AXES:
            raise UnknownAxisError(f"unknown axis: {axis!r}", field="axis")
        return tuple(lv for lv in self.grid.manifest.axes[axis] if lv in self.visible[axis])


def default_view(
    grid: ScoreGrid,
    measure_id: str,
    *,
    topic_id: str | None = TOPIC_AVERAGE,
    axis_order: Sequence[str] = AXES,
) -> GridView:
    visible = {axis: frozenset(grid.manifest.axes[axis]) for axis in AXES}
    return GridView(
        grid=grid,
        measure_id=measure_id,
        visible=visible,
        topic_id=topic_id,
        axis_order=tuple(axis_order),
    )


def apply_filter(view: GridView, axis: str, level: str, visible: bool) -> GridView:
    """Toggle one level's visibility; returns a new view, original untouched."""
    if axis not in AXES:
        raise UnknownAxisError(f"unknown axis: {axis!r}", field="axis")
    if level not in view.grid.manifest.axes[axis]:
        raise UnknownLevelError(f"unknown {axis} level: {level!r}", field=axis)
    current = view.visible[axis]
    updated = current | {level} if visible else current - {level}
    if not updated:
        raise EmptyAxisError(f"axis {axis!r} cannot be emptied", field=axis)
    new_visible = dict(view.visible)
    new_visible[axis] = frozenset(updated)
    return GridView(
        grid=view.grid,
        measure_id=view.measure_id,
        visible=new_visible,
        topic_id=view.topic_id,
        axis_order=view.axis_order,
    )


def visible_mask(view: GridView) -> np.ndarray:
    """Boolean mask over grid systems: loaded and on every visible level."""
    grid = view.grid
    mask = grid.loaded.copy()
    for axis in AXES:
        levels = view.visible[axis]
        declared = grid.manifest.axes[axis]
        if len(levels) == len(declared):
            continue
        wanted = {i for i, lv in enumerate(declared) if lv in levels}
        mask &= np.isin(grid._axis_codes[axis], list(wanted))
    return mask


def score_vector(view: GridView) -> dict[SystemConfig, float]:
    """Per-system score under the view's measure and topic mode.

    Average mode accumulates topics in ascending topic-id order (the
    storage order), keeping the mean bit-identical to the sequential sum
    of per-topic vectors.  Keys appear in grid (row-major) order.
    """
    grid = view.grid
    m = grid.measure_index(view.measure_id)
    if view.topic_id is not None:
        values = grid.scores[:, m, grid.topic_index(view.topic_id)]
    else:
        acc = np.zeros(len(grid.systems))
        for t in range(len(grid.topic_ids)):
            acc += grid.scores[:, m, t]
        values = acc / len(grid.topic_ids)
    mask = visible_mask(view)
    return {
        cfg: float(values[i]) for i, cfg in enumerate(grid.systems) if mask[i]
    }


def topic_rows(view: GridView, configs: Sequence[SystemConfig]) -> np.ndarray:
    """Per-topic score rows (len(configs) x topics) for the view's measure."""
    grid = view.grid
    m = grid.measure_index(view.measure_id)
    idx = [grid.system_index(c) for c in configs]
    return grid.scores[idx, m, :]


# --- CSV interchange ----------------------------------------------------------


def export_scores(grid: ScoreGrid, dest: IO[str] | str | Path) -> None:
    """One row per loaded (system, measure, topic) cell, 17-significant-digit
    scores so import round-trips bit-for-bit."""
    own = isinstance(dest, (str, Path))
    fh = open(dest, "w", encoding="utf-8", newline="") if own else dest
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        manifest = grid.manifest
        for s_idx, cfg in enumerate(grid.systems):
            if not grid.loaded[s_idx]:
                continue
            system_id = manifest.format_system_id(cfg)
            for m_idx, measure in enumerate(grid.measure_ids):
                for t_idx, topic in enumerate(grid.topic_ids):
                    writer.writerow(
                        (
                            system_id,
                            cfg.stoplist,
                            cfg.stemmer,
                            cfg.model,
                            measure,
                            topic,
                            format(grid.scores[s_idx, m_idx, t_idx], ".17g"),
                        )
                    )
    finally:
        if own:
            fh.close()


def import_scores(
    src: IO[str] | str | Path,
    manifest: CollectionManifest,
    *,
    measure_ids: Sequence[str] | None = None,
) -> ScoreGrid:
    """Rebuild a ScoreGrid from the CSV interchange format.

    Measures are ordered by first appearance unless ``measure_ids`` pins
    the order.  Every system present in the file must cover the full
    measure x topic block; systems absent from the file stay unloaded.
    """
    own = isinstance(src, (str, Path))
    fh = open(src, "r", encoding="utf-8", newline="") if own else src
    try:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise ParseError(
                f"bad CSV header: expected {','.join(CSV_HEADER)}", line_no=1
            )

        topic_ids = tuple(sorted(manifest.topic_ids))
        topic_index = {t: i for i, t in enumerate(topic_ids)}
        systems = tuple(manifest.systems())
        system_index = {manifest.format_system_id(c): i for i, c in enumerate(systems)}

        measure_order: list[str] = list(measure_ids) if measure_ids else []
        measure_index = {m.casefold(): i for i, m in enumerate(measure_order)}
        cells: dict[tuple[int, int, int], float] = {}

        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise ParseError(f"expected {len(CSV_HEADER)} columns, got {len(row)}", line_no=line_no)
            system_id, stoplist, stemmer, model, measure, topic, score_s = row
            s_idx = system_index.get(system_id)
            if s_idx is None:
                # name the first offending token for the error message
                manifest.parse_system_id(system_id)
                raise ParseError(f"system id {system_id!r} not in manifest grid", line_no=line_no)
            cfg = systems[s_idx]
            if (stoplist, stemmer, model) != cfg.levels():
                raise ParseError(
                    f"level columns disagree with system id {system_id!r}", line_no=line_no
                )
            m_key = measure.casefold()
            if m_key not in measure_index:
                if measure_ids is not None:
                    raise UnknownMeasureError(
                        f"unknown measure: {measure}", field="measure"
                    )
                measure_index[m_key] = len(measure_order)
                measure_order.append(measure)
            m_idx = measure_index[m_key]
            t_idx = topic_index.get(topic)
            if t_idx is None:
                raise ParseError(f"topic {topic!r} not in manifest", line_no=line_no)
            try:
                value = float(score_s)
            except ValueError:
                raise ParseError(f"non-numeric score {score_s!r}", line_no=line_no) from None
            if not 0.0 <= value <= 1.0:
                raise ParseError(f"score {score_s} outside [0, 1]", line_no=line_no)
            key = (s_idx, m_idx, t_idx)
            if key in cells:
                raise ParseError(
                    f"duplicate cell ({system_id}, {measure}, {topic})", line_no=line_no
                )
            cells[key] = value
    finally:
        if own:
            fh.close()

    if not cells:
        raise DataError("score CSV contains no data rows")

    scores = np.zeros((len(systems), len(measure_order), len(topic_ids)))
    mask = np.zeros(len(systems), dtype=bool)
    covered: dict[int, int] = {}
    for (s_idx, m_idx, t_idx), value in cells.items():
        scores[s_idx, m_idx, t_idx] = value
        covered[s_idx] = covered.get(s_idx, 0) + 1

    expected = len(measure_order) * len(topic_ids)
    for s_idx, count in covered.items():
        if count != expected:
            system_id = manifest.format_system_id(systems[s_idx])
            raise ParseError(
                f"system {system_id!r} covers {count} cells, expected {expected}"
            )
        mask[s_idx] = True

    return ScoreGrid(manifest, measure_order, scores, mask)


def import_scores_text(text: str, manifest: CollectionManifest, **kwargs) -> ScoreGrid:
    return import_scores(io.StringIO(text), manifest, **kwargs)


def export_scores_text(grid: ScoreGrid) -> str:
    buf = io.StringIO()
    export_scores(grid, buf)
    return buf.getvalue()
