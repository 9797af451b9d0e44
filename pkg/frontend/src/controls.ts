/** The parameter-selection area: collection, measure, topic mode and
 * picker, scaling, color schema, curve shape, the per-axis family/level
 * filter panel, and the legend. Pure DOM construction; every change is
 * reported through a callback and the panel is re-rendered from state. */

import { Axis, AXES, Catalog, ColorSchema, SankeyDoc, Scaling, TopicMode } from "./types";
import { collectionInfo, UiState } from "./state";

export interface ControlHandlers {
  onCollection(id: string): void;
  onMeasure(id: string): void;
  onTopicMode(mode: TopicMode): void;
  onTopic(topicId: string): void;
  onScaling(scaling: Scaling): void;
  onColorSchema(schema: ColorSchema): void;
  onCurveShape(shape: string): void;
  onToggleLevel(axis: Axis, level: string): void;
  onClearSelection(): void;
}

export function renderControls(
  container: HTMLElement,
  catalog: Catalog,
  state: UiState,
  doc: SankeyDoc | null,
  handlers: ControlHandlers,
): void {
  const info = collectionInfo(catalog, state.collectionId);
  container.replaceChildren();

  const row = document.createElement("div");
  row.className = "control-row";

  row.appendChild(
    selectControl(
      "collection",
      catalog.collections.map((c) => c.collection_id),
      state.collectionId,
      handlers.onCollection,
    ),
  );
  row.appendChild(
    selectControl("measure", info.measures, state.measureId, handlers.onMeasure),
  );

  // topic-by-topic toggle + picker
  const topicWrap = document.createElement("label");
  topicWrap.className = "control topic-toggle";
  const topicCheck = document.createElement("input");
  topicCheck.type = "checkbox";
  topicCheck.checked = state.topicMode === "single";
  topicCheck.dataset.control = "topic-mode";
  topicCheck.addEventListener("change", () =>
    handlers.onTopicMode(topicCheck.checked ? "single" : "average"),
  );
  topicWrap.append(topicCheck, document.createTextNode(" topic-by-topic"));
  row.appendChild(topicWrap);

  const topicSelect = selectControl(
    "topic",
    info.topics,
    state.topicId ?? info.topics[0],
    handlers.onTopic,
  );
  (topicSelect.querySelector("select") as HTMLSelectElement).disabled =
    state.topicMode !== "single";
  row.appendChild(topicSelect);

  row.appendChild(
    selectControl(
      "scaling",
      ["full_range", "min_max"],
      state.scaling,
      (v) => handlers.onScaling(v as Scaling),
    ),
  );
  row.appendChild(
    selectControl(
      "colors",
      ["by_component", "by_value"],
      state.colorSchema,
      (v) => handlers.onColorSchema(v as ColorSchema),
    ),
  );
  row.appendChild(
    selectControl(
      "curve",
      ["cubic", "linear"],
      state.curveShape,
      handlers.onCurveShape,
    ),
  );

  const clear = document.createElement("button");
  clear.type = "button";
  clear.dataset.control = "clear-selection";
  clear.textContent = `clear selection (${state.selected.length})`;
  clear.disabled = state.selected.length === 0;
  clear.addEventListener("click", () => handlers.onClearSelection());
  row.appendChild(clear);

  container.appendChild(row);
  container.appendChild(filterPanel(info, state, handlers));
  if (doc) container.appendChild(legend(info, doc));
}

function selectControl(
  name: string,
  options: string[],
  value: string,
  onChange: (value: string) => void,
): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = `control control-${name}`;
  wrap.append(document.createTextNode(`${name} `));
  const select = document.createElement("select");
  select.dataset.control = name;
  for (const option of options) {
    const el = document.createElement("option");
    el.value = option;
    el.textContent = option;
    el.selected = option === value;
    select.appendChild(el);
  }
  select.addEventListener("change", () => onChange(select.value));
  wrap.appendChild(select);
  return wrap;
}

/** Per-axis visibility checkboxes; model levels grouped by family. */
function filterPanel(
  info: ReturnType<typeof collectionInfo>,
  state: UiState,
  handlers: ControlHandlers,
): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "filter-panel";

  for (const axis of AXES) {
    const group = document.createElement("fieldset");
    group.className = "filter-group";
    group.dataset.axis = axis;
    const title = document.createElement("legend");
    title.textContent = axis;
    group.appendChild(title);

    if (axis === "model") {
      const families = new Map<string, string[]>();
      for (const level of info.axes.model) {
        const family = info.model_families[level] ?? "other";
        const members = families.get(family) ?? [];
        members.push(level);
        families.set(family, members);
      }
      for (const [family, members] of families) {
        const sub = document.createElement("div");
        sub.className = "family";
        sub.dataset.family = family;
        const name = document.createElement("span");
        name.className = "family-name";
        name.textContent = family;
        sub.appendChild(name);
        for (const level of members) {
          sub.appendChild(levelCheckbox(axis, level, state, handlers));
        }
        group.appendChild(sub);
      }
    } else {
      for (const level of info.axes[axis]) {
        group.appendChild(levelCheckbox(axis, level, state, handlers));
      }
    }
    panel.appendChild(group);
  }
  return panel;
}

function levelCheckbox(
  axis: Axis,
  level: string,
  state: UiState,
  handlers: ControlHandlers,
): HTMLElement {
  const wrap = document.createElement("label");
  wrap.className = "level-toggle";
  const box = document.createElement("input");
  box.type = "checkbox";
  box.checked = state.visibleLevels[axis].includes(level);
  box.dataset.axis = axis;
  box.dataset.level = level;
  box.addEventListener("change", () => handlers.onToggleLevel(axis, level));
  wrap.append(box, document.createTextNode(` ${level}`));
  return wrap;
}

/** Colors as the document defines them: per-axis level swatches (model
 * swatches grouped by family) plus the score ramp of the 25 bins. */
function legend(
  info: ReturnType<typeof collectionInfo>,
  doc: SankeyDoc,
): HTMLElement {
  const block = document.createElement("div");
  block.className = "legend";

  for (const axisDoc of doc.axes) {
    const row = document.createElement("div");
    row.className = "legend-row";
    row.dataset.axis = axisDoc.axis;
    const name = document.createElement("span");
    name.className = "legend-axis";
    name.textContent = axisDoc.axis;
    row.appendChild(name);
    for (const node of axisDoc.nodes) {
      const entry = document.createElement("span");
      entry.className = "legend-entry";
      entry.title =
        axisDoc.axis === "model"
          ? `${node.level} (${info.model_families[node.level] ?? "?"})`
          : node.level;
      const swatch = document.createElement("span");
      swatch.className = "swatch";
      swatch.style.backgroundColor = node.color;
      entry.append(swatch, document.createTextNode(node.level));
      row.appendChild(entry);
    }
    block.appendChild(row);
  }

  const ramp = document.createElement("div");
  ramp.className = "legend-row legend-ramp";
  const name = document.createElement("span");
  name.className = "legend-axis";
  name.textContent = "score";
  ramp.appendChild(name);
  for (const bin of doc.bins) {
    const cell = document.createElement("span");
    cell.className = "ramp-cell";
    cell.style.backgroundColor = bin.color;
    cell.title = `${bin.lo.toFixed(2)}–${bin.hi.toFixed(2)}`;
    ramp.appendChild(cell);
  }
  block.appendChild(ramp);
  return block;
}
