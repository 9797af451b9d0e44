"""Build the renderable diagram document from a view plus display options.

The document is pure data: ordered component axes with weighted nodes, a
measure axis of 25 equal-width score bins, stage links aggregating the
component-pair interactions, one final link per visible system, and the
highlighted-path set for the current selection.  The client renders it
verbatim and computes nothing.

``canonical_json`` defines the wire form: floats rounded to 6 fractional
digits, no whitespace, fixed field order — identical inputs serialize to
identical bytes, which makes responses cacheable and diffable.
"""

from __future__ import annotations

import colorsys
import json
import math
from dataclasses import dataclass
from typing import Mapping

from .errors import BadRequestError, DataError, UnknownAxisError
from .grid import GridView, score_vector
from .ingest import AXES, CollectionManifest, SystemConfig
from .stats import marginal_means, pair_means, require_visible

N_BINS = 25
SCALING_MODES = ("full_range", "min_max")
COLOR_SCHEMAS = ("by_component", "by_value")
DEFAULT_CURVE_SHAPE = "cubic"

# hue/lightness bands per component family (hue in [0,1])
_AXIS_HUES = {"stoplist": 300 / 360, "stemmer": 120 / 360}  # fuchsia, green
_AXIS_LIGHTNESS = (0.35, 0.70)
_MODEL_FAMILY_BANDS = {
    "vector_space": (200 / 360, 0.58, 0.80),  # light blue
    "probabilistic": (220 / 360, 0.20, 0.42),  # dark blue
    "language_model": (270 / 360, 0.40, 0.62),  # purple
}
_SATURATION = 0.65


@dataclass(frozen=True)
class DisplayOptions:
    """Client-controlled rendering knobs, orthogonal to the view filter."""

    scaling: str = "full_range"
    color_schema: str = "by_component"
    curve_shape: str = DEFAULT_CURVE_SHAPE  # opaque token, echoed to the client
    selected: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self):
        if self.scaling not in SCALING_MODES:
            raise BadRequestError(
                f"scaling must be one of {SCALING_MODES}, got {self.scaling!r}",
                field="scaling",
            )
        if self.color_schema not in COLOR_SCHEMAS:
            raise BadRequestError(
                f"color_schema must be one of {COLOR_SCHEMAS}, got {self.color_schema!r}",
                field="color_schema",
            )
        if not self.curve_shape:
            raise BadRequestError("curve_shape must be non-empty", field="curve_shape")


# --- colors --------------------------------------------------------------------


def _hex(r: float, g: float, b: float) -> str:
    return "#{:02x}{:02x}{:02x}".format(
        int(round(r * 255)), int(round(g * 255)), int(round(b * 255))
    )


def _ramp(lo: float, hi: float, index: int, count: int) -> float:
    if count <= 1:
        return (lo + hi) / 2.0
    return lo + (hi - lo) * index / (count - 1)


def component_color(manifest: CollectionManifest, axis: str, level: str) -> str:
    """Family hue with a lightness ramp across the axis's levels; model
    levels take their sub-family hue and ramp within the sub-family."""
    if axis in _AXIS_HUES:
        levels = manifest.axes[axis]
        hue = _AXIS_HUES[axis]
        lightness = _ramp(*_AXIS_LIGHTNESS, levels.index(level), len(levels))
    elif axis == "model":
        family = manifest.model_families[level]
        hue, lo, hi = _MODEL_FAMILY_BANDS[family]
        members = [m for m in manifest.axes["model"] if manifest.model_families[m] == family]
        lightness = _ramp(lo, hi, members.index(level), len(members))
    else:
        raise UnknownAxisError(f"unknown axis: {axis!r}", field="axis")
    return _hex(*colorsys.hls_to_rgb(hue, lightness, _SATURATION))


def value_color(fraction: float) -> str:
    """Red -> yellow -> green ramp, piecewise linear in the RGB channels.

    fraction 0 is #ff0000, 0.5 exactly #ffff00, 1 is #00ff00; each
    channel is monotone in the fraction.
    """
    x = min(max(fraction, 0.0), 1.0)
    if x <= 0.5:
        return "#{:02x}{:02x}00".format(255, int(round(510 * x)))
    return "#{:02x}{:02x}00".format(int(round(510 * (1.0 - x))), 255)


# --- binning and scaling --------------------------------------------------------


def bin_index(score: float, lo: float, hi: float) -> int:
    """Left-closed equal-width bin over [lo, hi]; hi itself lands in the
    last bin.  Scores outside the range clamp to the nearest bin."""
    if lo >= hi:
        raise ValueError("bin range must have lo < hi")
    if score <= lo:
        return 0
    if score >= hi:
        return N_BINS - 1
    idx = int(math.floor(N_BINS * (score - lo) / (hi - lo)))
    return min(idx, N_BINS - 1)


def scaling_range(view: GridView, options: DisplayOptions) -> tuple[float, float]:
    """full_range -> [0, 1]; min_max -> the visible score extremes, widened
    by 0.02 on each side (and clamped to [0, 1]) when they coincide."""
    if options.scaling == "full_range":
        return (0.0, 1.0)
    vector = score_vector(view)
    if not vector:
        raise DataError("no visible systems in view")
    values = list(vector.values())
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = max(0.0, lo - 0.02), min(1.0, hi + 0.02)
    return (lo, hi)


# --- document -------------------------------------------------------------------


@dataclass(frozen=True)
class NodeDoc:
    axis: str
    level: str
    weight: float
    color: str
    mean: float
    n_systems: int


@dataclass(frozen=True)
class AxisDoc:
    axis: str
    nodes: tuple[NodeDoc, ...]


@dataclass(frozen=True)
class BinDoc:
    index: int
    lo: float
    hi: float
    count: int
    color: str


@dataclass(frozen=True)
class StageLinkDoc:
    source: str  # level on the stage's source axis
    target: str  # level on the stage's target axis
    weight: float
    n_systems: int
    color: str


@dataclass(frozen=True)
class StageDoc:
    source_axis: str
    target_axis: str
    links: tuple[StageLinkDoc, ...]


@dataclass(frozen=True)
class FinalLinkDoc:
    system_id: str
    levels: tuple[str, str, str]  # in canonical axis order
    score: float
    bin: int
    color: str


@dataclass(frozen=True)
class SankeyDoc:
    collection_id: str
    measure_id: str
    topic_id: str | None
    axis_order: tuple[str, ...]
    scaling: str
    color_schema: str
    curve_shape: str
    range_lo: float
    range_hi: float
    axes: tuple[AxisDoc, ...]
    bins: tuple[BinDoc, ...]
    stages: tuple[StageDoc, ...]
    final_links: tuple[FinalLinkDoc, ...]
    highlighted: tuple[str, ...]
    selected: tuple[tuple[str, str], ...]


def _normalized_weights(means: list[float]) -> list[float]:
    """Share of each mean in the total; all-zero means fall back to a
    uniform split so the axis still renders."""
    total = 0.0
    for m in means:
        total += m
    if total == 0.0:
        return [1.0 / len(means)] * len(means)
    return [m / total for m in means]


def _canonical_selection(
    manifest: CollectionManifest, selected: frozenset[tuple[str, str]]
) -> tuple[tuple[str, str], ...]:
    def key(item):
        axis, level = item
        return (AXES.index(axis), manifest.axes[axis].index(level))

    return tuple(sorted(selected, key=key))


def _matches_selection(
    config: SystemConfig, by_axis: Mapping[str, set[str]]
) -> bool:
    # disjunction within an axis, conjunction across axes
    return all(config.level(axis) in levels for axis, levels in by_axis.items())


def build_diagram(view: GridView, options: DisplayOptions) -> SankeyDoc:
    """Assemble the full document for one (view, options) pair.

    Node weights are each level's share of its axis's marginal-mean
    total; stage link weights are pair-mean shares within the stage;
    the final stage maps every visible system to its score bin.
    """
    manifest = view.grid.manifest
    for axis, level in options.selected:
        require_visible(view, axis, level)

    vector = score_vector(view)
    if not vector:
        raise DataError("no visible systems in view")
    lo, hi = scaling_range(view, options)
    span = hi - lo

    axes_docs = []
    for axis in view.axis_order:
        stats = marginal_means(view, axis)
        weights = _normalized_weights([s.mean for s in stats])
        nodes = tuple(
            NodeDoc(
                axis=axis,
                level=s.level,
                weight=w,
                color=component_color(manifest, axis, s.level),
                mean=s.mean,
                n_systems=s.n_systems,
            )
            for s, w in zip(stats, weights)
        )
        axes_docs.append(AxisDoc(axis=axis, nodes=nodes))

    stages = []
    for source_axis, target_axis in zip(view.axis_order, view.axis_order[1:]):
        pstats = pair_means(view, source_axis, target_axis)
        weights = _normalized_weights([p.mean for p in pstats])
        links = []
        for p, w in zip(pstats, weights):
            if options.color_schema == "by_value":
                color = value_color((p.mean - lo) / span)
            else:
                color = component_color(manifest, source_axis, p.level_a)
            links.append(
                StageLinkDoc(
                    source=p.level_a,
                    target=p.level_b,
                    weight=w,
                    n_systems=p.n_systems,
                    color=color,
                )
            )
        stages.append(StageDoc(source_axis, target_axis, tuple(links)))

    last_axis = view.axis_order[-1]
    fmt = manifest.format_system_id
    final_links = []
    for config, score in vector.items():
        if options.color_schema == "by_value":
            color = value_color((score - lo) / span)
        else:
            color = component_color(manifest, last_axis, config.level(last_axis))
        final_links.append(
            FinalLinkDoc(
                system_id=fmt(config),
                levels=config.levels(),
                score=score,
                bin=bin_index(score, lo, hi),
                color=color,
            )
        )

    counts = [0] * N_BINS
    for link in final_links:
        counts[link.bin] += 1
    bins = tuple(
        BinDoc(
            index=i,
            lo=lo + span * i / N_BINS,
            hi=lo + span * (i + 1) / N_BINS,
            count=counts[i],
            color=value_color(i / (N_BINS - 1)),
        )
        for i in range(N_BINS)
    )

    highlighted: tuple[str, ...] = ()
    if options.selected:
        by_axis: dict[str, set[str]] = {}
        for axis, level in options.selected:
            by_axis.setdefault(axis, set()).add(level)
        highlighted = tuple(
            fmt(config) for config in vector if _matches_selection(config, by_axis)
        )

    return SankeyDoc(
        collection_id=view.grid.collection_id,
        measure_id=view.grid.measure_ids[view.grid.measure_index(view.measure_id)],
        topic_id=view.topic_id,
        axis_order=tuple(view.axis_order),
        scaling=options.scaling,
        color_schema=options.color_schema,
        curve_shape=options.curve_shape,
        range_lo=lo,
        range_hi=hi,
        axes=tuple(axes_docs),
        bins=bins,
        stages=tuple(stages),
        final_links=tuple(final_links),
        highlighted=highlighted,
        selected=_canonical_selection(manifest, options.selected),
    )


def doc_to_dict(doc: SankeyDoc) -> dict:
    """Wire form of the document with fixed field order."""
    return {
        "collection_id": doc.collection_id,
        "measure_id": doc.measure_id,
        "topic_id": doc.topic_id,
        "axis_order": list(doc.axis_order),
        "scaling": doc.scaling,
        "color_schema": doc.color_schema,
        "curve_shape": doc.curve_shape,
        "range": {"lo": doc.range_lo, "hi": doc.range_hi},
        "axes": [
            {
                "axis": a.axis,
                "nodes": [
                    {
                        "level": n.level,
                        "weight": n.weight,
                        "color": n.color,
                        "mean": n.mean,
                        "systems": n.n_systems,
                    }
                    for n in a.nodes
                ],
            }
            for a in doc.axes
        ],
        "bins": [
            {"index": b.index, "lo": b.lo, "hi": b.hi, "count": b.count, "color": b.color}
            for b in doc.bins
        ],
        "stages": [
            {
                "source_axis": s.source_axis,
                "target_axis": s.target_axis,
                "links": [
                    {
                        "source": l.source,
                        "target": l.target,
                        "weight": l.weight,
                        "systems": l.n_systems,
                        "color": l.color,
                    }
                    for l in s.links
                ],
            }
            for s in doc.stages
        ],
        "final_links": [
            {
                "system": f.system_id,
                "levels": {axis: level for axis, level in zip(AXES, f.levels)},
                "score": f.score,
                "bin": f.bin,
                "color": f.color,
            }
            for f in doc.final_links
        ],
        "highlighted": list(doc.highlighted),
        "selected": [{"axis": axis, "level": level} for axis, level in doc.selected],
    }


# --- canonical serialization ----------------------------------------------------


def _round_floats(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        rounded = round(value, 6)
        return 0.0 if rounded == 0.0 else rounded
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def canonical_json(value) -> str:
    """Deterministic JSON: floats rounded to 6 fractional digits, compact
    separators, insertion-ordered keys.  Non-finite numbers are rejected."""
    return json.dumps(_round_floats(value), separators=(",", ":"), allow_nan=False)
