/** UI state and its pure transitions.
 *
 * A UiState is a superset of an ExplorationRequest: the request fields in
 * client-side form plus transient interaction state (hover target, drag in
 * progress) that never leaves the browser. `toRequest` / `fromRequest`
 * convert losslessly between the two, and the URL hash carries the request
 * so any view is shareable as a link.
 */

import {
  AXES,
  Axis,
  Catalog,
  CollectionInfo,
  ColorSchema,
  ComponentRef,
  ExplorationRequest,
  Scaling,
  TopicMode,
} from "./types";

export interface HoverTarget {
  kind: "node" | "link";
  axis: Axis;
  level: string;
  axisB?: Axis;
  levelB?: string;
}

export interface DragState {
  axis: Axis;
  fromIndex: number;
}

export interface UiState {
  collectionId: string;
  measureId: string;
  topicMode: TopicMode;
  topicId: string | null;
  /** explicit per-axis visible levels, in catalog order */
  visibleLevels: Record<Axis, string[]>;
  axisOrder: [Axis, Axis, Axis];
  scaling: Scaling;
  colorSchema: ColorSchema;
  curveShape: string;
  selected: ComponentRef[];
  /** transient; excluded from the request and the URL */
  hover: HoverTarget | null;
  drag: DragState | null;
}

/** A rejected transition, mirroring the API's error envelope shape. */
export interface StateError {
  error: string;
}

export function isStateError(value: UiState | StateError): value is StateError {
  return "error" in value;
}

export function collectionInfo(catalog: Catalog, collectionId: string): CollectionInfo {
  const info = catalog.collections.find((c) => c.collection_id === collectionId);
  if (!info) throw new Error(`unknown collection: ${collectionId}`);
  return info;
}

export function defaultState(catalog: Catalog, collectionId?: string): UiState {
  const info = collectionInfo(
    catalog,
    collectionId ?? catalog.collections[0].collection_id,
  );
  return {
    collectionId: info.collection_id,
    measureId: info.measures[0],
    topicMode: "average",
    topicId: null,
    visibleLevels: {
      stoplist: [...info.axes.stoplist],
      stemmer: [...info.axes.stemmer],
      model: [...info.axes.model],
    },
    axisOrder: [...AXES] as [Axis, Axis, Axis],
    scaling: "full_range",
    colorSchema: "by_component",
    curveShape: "cubic",
    selected: [],
    hover: null,
    drag: null,
  };
}

// --- request (de)serialization ------------------------------------------------

export function toRequest(state: UiState): ExplorationRequest {
  const request: ExplorationRequest = {
    collection_id: state.collectionId,
    measure_id: state.measureId,
    topic_mode: state.topicMode,
    visible_levels: {
      stoplist: [...state.visibleLevels.stoplist],
      stemmer: [...state.visibleLevels.stemmer],
      model: [...state.visibleLevels.model],
    },
    axis_order: [...state.axisOrder],
    scaling: state.scaling,
    color_schema: state.colorSchema,
    curve_shape: state.curveShape,
    selected: state.selected.map((s) => ({ ...s })),
  };
  if (state.topicMode === "single" && state.topicId !== null) {
    request.topic_id = state.topicId;
  }
  return request;
}

/** Rebuild a UiState from a request, validating against the catalog.
 * Fields the request omits take their defaults, exactly as the API would. */
export function fromRequest(request: ExplorationRequest, catalog: Catalog): UiState {
  const state = defaultState(catalog, request.collection_id);
  const info = collectionInfo(catalog, request.collection_id);

  if (!info.measures.some((m) => m.toLowerCase() === request.measure_id.toLowerCase())) {
    throw new Error(`unknown measure: ${request.measure_id}`);
  }
  state.measureId =
    info.measures.find((m) => m.toLowerCase() === request.measure_id.toLowerCase()) ??
    request.measure_id;

  state.topicMode = request.topic_mode ?? (request.topic_id ? "single" : "average");
  state.topicId = request.topic_id ?? null;
  if (state.topicMode === "single" && state.topicId === null) {
    throw new Error("topic_id is required when topic_mode is 'single'");
  }

  for (const axis of AXES) {
    const levels = request.visible_levels?.[axis];
    if (levels === undefined) continue;
    if (levels.length === 0) throw new Error(`axis '${axis}' cannot be emptied`);
    for (const level of levels) {
      if (!info.axes[axis].includes(level)) {
        throw new Error(`unknown ${axis} level: ${level}`);
      }
    }
    // keep catalog order regardless of the order in the request
    state.visibleLevels[axis] = info.axes[axis].filter((l) => levels.includes(l));
  }

  if (request.axis_order) {
    if ([...request.axis_order].sort().join() !== [...AXES].sort().join()) {
      throw new Error("axis_order must be a permutation of the component axes");
    }
    state.axisOrder = [...request.axis_order] as [Axis, Axis, Axis];
  }
  if (request.scaling) state.scaling = request.scaling;
  if (request.color_schema) state.colorSchema = request.color_schema;
  if (request.curve_shape) state.curveShape = request.curve_shape;
  if (request.selected) {
    for (const sel of request.selected) {
      if (!state.visibleLevels[sel.axis]?.includes(sel.level)) {
        throw new Error(`selected level is not visible: ${sel.axis}=${sel.level}`);
      }
    }
    state.selected = request.selected.map((s) => ({ ...s }));
  }
  return state;
}

// --- URL encoding ---------------------------------------------------------------

export function encodeHash(state: UiState): string {
  return "#q=" + encodeURIComponent(JSON.stringify(toRequest(state)));
}

export function decodeHash(hash: string, catalog: Catalog): UiState | null {
  const match = /^#q=(.+)$/.exec(hash);
  if (!match) return null;
  try {
    const request = JSON.parse(decodeURIComponent(match[1])) as ExplorationRequest;
    return fromRequest(request, catalog);
  } catch {
    return null;
  }
}

// --- transitions ------------------------------------------------------------------

function selectionKey(ref: ComponentRef): string {
  return `${ref.axis} ${ref.level}`;
}

export function toggleSelection(state: UiState, axis: Axis, level: string): UiState {
  const key = selectionKey({ axis, level });
  const kept = state.selected.filter((s) => selectionKey(s) !== key);
  const selected =
    kept.length === state.selected.length ? [...kept, { axis, level }] : kept;
  return { ...state, selected };
}

export function clearSelection(state: UiState): UiState {
  return state.selected.length === 0 ? state : { ...state, selected: [] };
}

/** Show or hide one level. Hiding the last visible level of an axis is
 * rejected client-side with the same rule the API enforces (422). */
export function toggleLevel(
  state: UiState,
  catalog: Catalog,
  axis: Axis,
  level: string,
): UiState | StateError {
  const info = collectionInfo(catalog, state.collectionId);
  const visible = state.visibleLevels[axis];
  let next: string[];
  if (visible.includes(level)) {
    if (visible.length === 1) {
      return { error: `at least one ${axis} level must stay visible` };
    }
    next = visible.filter((l) => l !== level);
  } else {
    next = info.axes[axis].filter((l) => visible.includes(l) || l === level);
  }
  // a hidden level cannot stay selected
  const selected = state.selected.filter(
    (s) => s.axis !== axis || next.includes(s.level),
  );
  return {
    ...state,
    visibleLevels: { ...state.visibleLevels, [axis]: next },
    selected,
  };
}

/** Move the axis at `from` to position `to` among the three component
 * axes. Dropping an axis back on its own slot returns the state
 * unchanged (same reference) so callers can skip the re-fetch. */
export function reorderAxes(state: UiState, from: number, to: number): UiState {
  if (from === to || from < 0 || to < 0 || from > 2 || to > 2) return state;
  const order = [...state.axisOrder];
  const [moved] = order.splice(from, 1);
  order.splice(to, 0, moved);
  return { ...state, axisOrder: order as [Axis, Axis, Axis] };
}

export function setMeasure(state: UiState, measureId: string): UiState {
  return { ...state, measureId };
}

export function setTopicMode(state: UiState, mode: TopicMode, topicId: string | null): UiState {
  return {
    ...state,
    topicMode: mode,
    topicId: mode === "single" ? topicId : null,
  };
}

export function setScaling(state: UiState, scaling: Scaling): UiState {
  return { ...state, scaling };
}

export function setColorSchema(state: UiState, colorSchema: ColorSchema): UiState {
  return { ...state, colorSchema };
}

export function setCurveShape(state: UiState, curveShape: string): UiState {
  return { ...state, curveShape };
}

export function setCollection(state: UiState, catalog: Catalog, collectionId: string): UiState {
  if (collectionId === state.collectionId) return state;
  // a new grid invalidates levels, topics, and selection: start fresh
  const fresh = defaultState(catalog, collectionId);
  const info = collectionInfo(catalog, collectionId);
  if (info.measures.some((m) => m.toLowerCase() === state.measureId.toLowerCase())) {
    fresh.measureId = state.measureId;
  }
  fresh.scaling = state.scaling;
  fresh.colorSchema = state.colorSchema;
  fresh.curveShape = state.curveShape;
  fresh.axisOrder = [...state.axisOrder] as [Axis, Axis, Axis];
  return fresh;
}
