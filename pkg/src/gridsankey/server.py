"""HTTP JSON API over the loaded score grids, plus static UI hosting.

The server is stateless: every request carries the full exploration
state, so responses are pure functions of (request, loaded data) and the
diagram endpoint can be cached by the canonical request hash.  The only
mutable state is a pair of insert-only caches (diagram bodies, Dunnett
critical values).

Endpoints
    GET  /api/health
    GET  /api/catalog
    POST /api/diagram                       (ExplorationRequest body)
    GET  /api/tooltip/component?axis&level&state
    GET  /api/tooltip/link?axisA&levelA&axisB&levelB&state
plus the static UI bundle at / when a static directory is configured.

Errors use one envelope: ``{"error": {"code", "field", "message"}}``.
An emptied axis maps to 422, loading to 503, everything else to 400.
"""

from __future__ import annotations

import json
import math
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .config import ServiceConfig, load_config
from .errors import (
    BadRequestError,
    DataError,
    EmptyAxisError,
    GridSankeyError,
    LoadingError,
    NotAdjacentError,
    UnknownAxisError,
    UnknownCollectionError,
    UnknownLevelError,
)
from .grid import GridView, ScoreGrid, import_scores
from .ingest import AXES, load_manifest
from .measures import MeasureRegistry
from .sankey import (
    DisplayOptions,
    build_diagram,
    canonical_json,
    doc_to_dict,
)
from .stats import (
    CriticalValueCache,
    DunnettResult,
    dunnett_for_view,
    marginal_mean,
    pair_mean,
    require_visible,
    systems_matching,
    top_systems,
)

_REQUEST_KEYS = frozenset(
    (
        "collection_id",
        "measure_id",
        "topic_mode",
        "topic_id",
        "visible_levels",
        "axis_order",
        "scaling",
        "color_schema",
        "curve_shape",
        "selected",
    )
)


# --- request parsing (shared with the CLI's export command) ---------------------


def parse_exploration_request(
    grid: ScoreGrid, payload
) -> tuple[GridView, DisplayOptions, dict]:
    """Validate a raw request body against the grid and normalize it.

    Returns the view, the display options, and the canonical request
    dict — the latter is what diagram responses are cached under, so two
    requests that differ only in defaulted fields share one cache entry.
    """
    if not isinstance(payload, dict):
        raise BadRequestError("request body must be a JSON object")
    unknown = sorted(set(payload) - _REQUEST_KEYS)
    if unknown:
        raise BadRequestError(
            f"unknown request field(s): {', '.join(unknown)}", field=unknown[0]
        )

    collection_id = payload.get("collection_id")
    if not isinstance(collection_id, str) or not collection_id:
        raise BadRequestError(
            "collection_id must be a non-empty string", field="collection_id"
        )
    if collection_id != grid.collection_id:
        raise UnknownCollectionError(
            f"unknown collection: {collection_id}", field="collection_id"
        )

    measure_raw = payload.get("measure_id")
    if not isinstance(measure_raw, str) or not measure_raw:
        raise BadRequestError("measure_id must be a non-empty string", field="measure_id")
    measure_id = grid.measure_ids[grid.measure_index(measure_raw)]

    topic_mode = payload.get("topic_mode")
    topic_id = payload.get("topic_id")
    if topic_mode is None:
        topic_mode = "average" if topic_id is None else "single"
    if topic_mode not in ("average", "single"):
        raise BadRequestError(
            f"topic_mode must be 'average' or 'single', got {topic_mode!r}",
            field="topic_mode",
        )
    if topic_mode == "single":
        if not isinstance(topic_id, str) or not topic_id:
            raise BadRequestError(
                "topic_id is required when topic_mode is 'single'", field="topic_id"
            )
    elif topic_id is not None:
        raise BadRequestError(
            "topic_id given but topic_mode is 'average'", field="topic_id"
        )

    visible_raw = payload.get("visible_levels")
    if visible_raw is None:
        visible_raw = {}
    if not isinstance(visible_raw, dict):
        raise BadRequestError("visible_levels must be an object", field="visible_levels")
    for key in visible_raw:
        if key not in AXES:
            raise UnknownAxisError(f"unknown axis: {key!r}", field="visible_levels")
    visible: dict[str, frozenset[str]] = {}
    for axis in AXES:
        declared = grid.manifest.axes[axis]
        if axis not in visible_raw:
            visible[axis] = frozenset(declared)
            continue
        levels = visible_raw[axis]
        if not isinstance(levels, list) or not all(isinstance(x, str) for x in levels):
            raise BadRequestError(
                f"visible_levels.{axis} must be a list of strings", field=axis
            )
        if not levels:
            raise EmptyAxisError(f"axis {axis!r} cannot be emptied", field=axis)
        bad = sorted(set(levels) - set(declared))
        if bad:
            raise UnknownLevelError(
                f"unknown {axis} level(s): {', '.join(bad)}", field=axis
            )
        visible[axis] = frozenset(levels)

    order_raw = payload.get("axis_order")
    if order_raw is None:
        axis_order = AXES
    else:
        if not isinstance(order_raw, list) or not all(isinstance(x, str) for x in order_raw):
            raise BadRequestError("axis_order must be a list of axis names", field="axis_order")
        for name in order_raw:
            if name not in AXES:
                raise UnknownAxisError(f"unknown axis: {name!r}", field="axis_order")
        if sorted(order_raw) != sorted(AXES):
            raise BadRequestError(
                f"axis_order must be a permutation of {list(AXES)}", field="axis_order"
            )
        axis_order = tuple(order_raw)

    selected_raw = payload.get("selected", [])
    if not isinstance(selected_raw, list):
        raise BadRequestError("selected must be a list", field="selected")
    selected = set()
    for item in selected_raw:
        if (
            not isinstance(item, dict)
            or not isinstance(item.get("axis"), str)
            or not isinstance(item.get("level"), str)
        ):
            raise BadRequestError(
                "selected items must be {\"axis\": ..., \"level\": ...} objects",
                field="selected",
            )
        selected.add((item["axis"], item["level"]))

    view = GridView(
        grid=grid,
        measure_id=measure_id,
        visible=visible,
        topic_id=topic_id if topic_mode == "single" else None,
        axis_order=axis_order,
    )
    options = DisplayOptions(
        scaling=payload.get("scaling", "full_range"),
        color_schema=payload.get("color_schema", "by_component"),
        curve_shape=payload.get("curve_shape", "cubic"),
        selected=frozenset(selected),
    )
    for axis, level in options.selected:
        require_visible(view, axis, level)

    canonical = {
        "collection_id": grid.collection_id,
        "measure_id": measure_id,
        "topic_mode": topic_mode,
        "topic_id": view.topic_id,
        "visible_levels": {
            axis: [lv for lv in grid.manifest.axes[axis] if lv in visible[axis]]
            for axis in AXES
        },
        "axis_order": list(axis_order),
        "scaling": options.scaling,
        "color_schema": options.color_schema,
        "curve_shape": options.curve_shape,
        "selected": [
            {"axis": a, "level": lv}
            for a, lv in sorted(
                selected,
                key=lambda s: (AXES.index(s[0]), grid.manifest.axes[s[0]].index(s[1])),
            )
        ],
    }
    return view, options, canonical


def diagram_response_text(grid: ScoreGrid, payload) -> str:
    """Canonical diagram JSON for a request — the single code path behind
    both POST /api/diagram and `gridsankey export`, so the two agree
    byte-for-byte."""
    view, options, _ = parse_exploration_request(grid, payload)
    doc = build_diagram(view, options)
    return canonical_json(doc_to_dict(doc))


# --- tooltip statistics ----------------------------------------------------------


def _dunnett_dict(result: DunnettResult) -> dict:
    return {
        "control": result.control,
        "alpha": result.alpha,
        "df": result.df,
        "n_topics": result.n_topics,
        "critical_value": result.critical_value,
        "top_group": list(result.top_group),
        "entries": [
            {
                "system": e.system_id,
                "mean": e.mean,
                "t": None if math.isinf(e.t) else e.t,
                "significant": e.significant,
                "is_control": e.is_control,
                "in_top_group": e.is_control or not e.significant,
            }
            for e in result.entries
        ],
    }


def component_tooltip_dict(
    grid: ScoreGrid,
    state: dict,
    axis: str,
    level: str,
    *,
    alpha: float,
    cv_cache: CriticalValueCache | None = None,
) -> dict:
    view, _options, _ = parse_exploration_request(grid, state)
    require_visible(view, axis, level)
    stat = marginal_mean(view, axis, level)
    top = top_systems(view, {axis: level}, k=5)
    configs = systems_matching(view, {axis: level})
    dunnett = dunnett_for_view(view, configs, alpha, cache=cv_cache)
    return {
        "axis": axis,
        "level": level,
        "mean": stat.mean,
        "systems": stat.n_systems,
        "best": {"system": top[0].system_id, "score": top[0].score},
        "top": [{"system": t.system_id, "score": t.score} for t in top],
        "dunnett": _dunnett_dict(dunnett),
    }


def link_tooltip_dict(
    grid: ScoreGrid,
    state: dict,
    axis_a: str,
    level_a: str,
    axis_b: str,
    level_b: str,
    *,
    alpha: float,
    cv_cache: CriticalValueCache | None = None,
) -> dict:
    view, _options, _ = parse_exploration_request(grid, state)
    require_visible(view, axis_a, level_a)
    require_visible(view, axis_b, level_b)
    if axis_a == axis_b:
        raise UnknownAxisError("pair axes must be distinct", field="axisB")
    order = view.axis_order
    if abs(order.index(axis_a) - order.index(axis_b)) != 1:
        raise NotAdjacentError(
            f"axes {axis_a!r} and {axis_b!r} are not adjacent in order {list(order)}",
            field="axisB",
        )
    stat = pair_mean(view, (axis_a, level_a), (axis_b, level_b))
    top = top_systems(view, {axis_a: level_a, axis_b: level_b}, k=5)
    configs = systems_matching(view, {axis_a: level_a, axis_b: level_b})
    dunnett = dunnett_for_view(view, configs, alpha, cache=cv_cache)
    return {
        "axis_a": axis_a,
        "level_a": level_a,
        "axis_b": axis_b,
        "level_b": level_b,
        "mean": stat.mean,
        "systems": stat.n_systems,
        "best": {"system": top[0].system_id, "score": top[0].score},
        "top": [{"system": t.system_id, "score": t.score} for t in top],
        "dunnett": _dunnett_dict(dunnett),
    }


# --- data repository -------------------------------------------------------------


class DataRepository:
    """Loads one grid per collection sub-directory of the data dir.

    Each collection lives in ``<data_dir>/<name>/`` with a
    ``manifest.toml`` and a precomputed ``scores.csv`` (see the ingest
    command).  Grids are immutable once loaded; ``ready`` flips exactly
    once.
    """

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self._grids: dict[str, ScoreGrid] = {}
        self._ready = threading.Event()

    def scan(self) -> None:
        if not self.data_dir.is_dir():
            raise DataError(f"data directory {self.data_dir} does not exist")
        grids: dict[str, ScoreGrid] = {}
        for manifest_path in sorted(self.data_dir.glob("*/manifest.toml")):
            manifest = load_manifest(manifest_path)
            csv_path = manifest_path.parent / "scores.csv"
            if not csv_path.is_file():
                raise DataError(f"{manifest_path.parent} has no scores.csv")
            if manifest.collection_id in grids:
                raise DataError(f"duplicate collection id {manifest.collection_id!r}")
            grids[manifest.collection_id] = import_scores(csv_path, manifest)
        if not grids:
            raise DataError(f"no collections found under {self.data_dir}")
        self._grids = grids
        self._ready.set()

    @property
    def ready(self) -> bool:
        return self._ready.is_set()

    def collection_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._grids))

    def grid(self, collection_id) -> ScoreGrid:
        if not isinstance(collection_id, str) or not collection_id:
            raise BadRequestError(
                "collection_id must be a non-empty string", field="collection_id"
            )
        grid = self._grids.get(collection_id)
        if grid is None:
            raise UnknownCollectionError(
                f"unknown collection: {collection_id}", field="collection_id"
            )
        return grid


def catalog_dict(repo: DataRepository) -> dict:
    collections = []
    for cid in repo.collection_ids():
        grid = repo.grid(cid)
        manifest = grid.manifest
        collections.append(
            {
                "collection_id": cid,
                "topics": list(grid.topic_ids),
                "axes": {axis: list(manifest.axes[axis]) for axis in AXES},
                "model_families": {
                    level: manifest.model_families[level] for level in manifest.axes["model"]
                },
                "measures": list(grid.measure_ids),
                "reserved_measures": list(MeasureRegistry.RESERVED_IDS),
                "separator": manifest.separator,
                "systems": len(grid.systems),
                "loaded_systems": int(grid.loaded.sum()),
            }
        )
    return {"axes": list(AXES), "collections": collections}


# --- application ------------------------------------------------------------------


_ERROR_STATUS = {"empty_axis": 422, "loading": 503}


def _error_response(exc: GridSankeyError) -> JSONResponse:
    status = _ERROR_STATUS.get(exc.code, 400)
    headers = {"Retry-After": "1"} if exc.code == "loading" else None
    return JSONResponse(
        status_code=status,
        content={"error": {"code": exc.code, "field": exc.field, "message": str(exc)}},
        headers=headers,
    )


def create_app(config: ServiceConfig | None = None, *, defer_load: bool = False) -> FastAPI:
    """Build the application; grids load synchronously unless deferred.

    ``defer_load=True`` leaves the repository empty (endpoints answer
    503) until ``app.state.repository.scan()`` is called — used to
    exercise the loading behavior in tests.
    """
    if config is None:
        config = load_config()
    repo = DataRepository(config.data_dir)
    cv_cache = CriticalValueCache(replicates=config.mc_replicates, seed=config.mc_seed)
    diagram_cache: dict[str, str] = {}
    cache_lock = threading.Lock()

    app = FastAPI(title="gridsankey", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.config = config
    app.state.repository = repo
    app.state.cv_cache = cv_cache
    app.state.diagram_cache = diagram_cache

    @app.exception_handler(GridSankeyError)
    async def _domain_error(_request, exc: GridSankeyError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request, exc: RequestValidationError):
        return _error_response(BadRequestError(str(exc)))

    def _require_ready() -> None:
        if not repo.ready:
            raise LoadingError("collections are still loading; retry shortly")

    def _query(request: Request, name: str) -> str:
        value = request.query_params.get(name)
        if not value:
            raise BadRequestError(f"missing query parameter {name!r}", field=name)
        return value

    def _state(request: Request) -> dict:
        raw = _query(request, "state")
        try:
            state = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise BadRequestError(f"state is not valid JSON: {exc}", field="state") from exc
        if not isinstance(state, dict):
            raise BadRequestError("state must be a JSON object", field="state")
        return state

    @app.get("/api/health")
    def health():
        return Response(
            canonical_json(
                {
                    "status": "ok",
                    "ready": repo.ready,
                    "collections": len(repo.collection_ids()),
                }
            ),
            media_type="application/json",
        )

    @app.get("/api/catalog")
    def catalog():
        _require_ready()
        return Response(canonical_json(catalog_dict(repo)), media_type="application/json")

    @app.post("/api/diagram")
    async def diagram(request: Request):
        _require_ready()
        try:
            payload = await request.json()
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise BadRequestError(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise BadRequestError("request body must be a JSON object")
        grid = repo.grid(payload.get("collection_id"))
        view, options, canonical = parse_exploration_request(grid, payload)
        key = canonical_json(canonical)
        text = diagram_cache.get(key)
        if text is None:
            doc = build_diagram(view, options)
            text = canonical_json(doc_to_dict(doc))
            with cache_lock:
                diagram_cache.setdefault(key, text)
        return Response(text, media_type="application/json")

    @app.get("/api/tooltip/component")
    def tooltip_component(request: Request):
        _require_ready()
        state = _state(request)
        axis = _query(request, "axis")
        level = _query(request, "level")
        grid = repo.grid(state.get("collection_id"))
        body = component_tooltip_dict(
            grid, state, axis, level, alpha=config.alpha, cv_cache=cv_cache
        )
        return Response(canonical_json(body), media_type="application/json")

    @app.get("/api/tooltip/link")
    def tooltip_link(request: Request):
        _require_ready()
        state = _state(request)
        axis_a = _query(request, "axisA")
        level_a = _query(request, "levelA")
        axis_b = _query(request, "axisB")
        level_b = _query(request, "levelB")
        grid = repo.grid(state.get("collection_id"))
        body = link_tooltip_dict(
            grid, state, axis_a, level_a, axis_b, level_b,
            alpha=config.alpha, cv_cache=cv_cache,
        )
        return Response(canonical_json(body), media_type="application/json")

    static_dir = config.static_dir
    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")
    else:

        @app.get("/")
        def index():
            return {"service": "gridsankey", "api": "/api/catalog"}

    if not defer_load:
        repo.scan()
    return app
