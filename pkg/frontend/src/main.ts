/** Application shell: owns the UiState, performs exactly one diagram
 * fetch per accepted state transition (latest-wins when transitions
 * overlap), and keeps the URL hash in sync so every view is shareable. */

import {
  ApiError,
  fetchCatalog,
  fetchComponentTooltip,
  fetchDiagram,
  fetchLinkTooltip,
  isAbort,
  LatestWins,
} from "./api";
import { renderControls } from "./controls";
import { AxisDragController } from "./drag";
import { computeLayout, DEFAULT_LAYOUT, LayoutOptions } from "./layout";
import { renderDiagram, showError } from "./render";
import {
  clearSelection,
  decodeHash,
  defaultState,
  encodeHash,
  isStateError,
  reorderAxes,
  setCollection,
  setColorSchema,
  setCurveShape,
  setMeasure,
  setScaling,
  setTopicMode,
  StateError,
  toggleLevel,
  toggleSelection,
  toRequest,
  UiState,
} from "./state";
import { TooltipController } from "./tooltip";
import { Axis, Catalog, SankeyDoc } from "./types";

export class App {
  state!: UiState;
  catalog!: Catalog;
  doc: SankeyDoc | null = null;

  readonly controlsEl: HTMLElement;
  readonly diagramEl: HTMLElement;
  readonly statusEl: HTMLElement;
  readonly tooltipEl: HTMLElement;

  private readonly inflight = new LatestWins();
  private readonly tooltip: TooltipController;
  private drag: AxisDragController | null = null;

  constructor(
    root: HTMLElement,
    private readonly layoutOptions: LayoutOptions = DEFAULT_LAYOUT,
    tooltipDelayMs?: number,
  ) {
    root.replaceChildren();
    this.controlsEl = div("controls");
    this.statusEl = div("status");
    this.diagramEl = div("diagram");
    this.tooltipEl = div("tooltip");
    root.append(this.controlsEl, this.statusEl, this.diagramEl, this.tooltipEl);

    this.tooltip = new TooltipController(
      this.tooltipEl,
      {
        component: (axis, level, signal) =>
          fetchComponentTooltip(toRequest(this.state), axis, level, signal),
        link: (axisA, levelA, axisB, levelB, signal) =>
          fetchLinkTooltip(toRequest(this.state), axisA, levelA, axisB, levelB, signal),
      },
      tooltipDelayMs,
    );
  }

  async init(): Promise<void> {
    this.catalog = await fetchCatalog();
    this.state = decodeHash(location.hash, this.catalog) ?? defaultState(this.catalog);
    await this.refresh();
  }

  /** Accept a transition (or surface its rejection) and re-fetch once. */
  apply(next: UiState | StateError): void {
    if (isStateError(next)) {
      this.flash(next.error);
      this.renderControls(); // snap the offending control back to the state
      return;
    }
    if (next === this.state) return; // no-op transition: no re-fetch
    this.state = next;
    this.flash(null);
    void this.refresh();
  }

  async refresh(): Promise<void> {
    this.renderControls();
    try {
      const doc = await this.inflight.run((signal) =>
        fetchDiagram(toRequest(this.state), signal),
      );
      this.doc = doc;
      this.renderControls();
      this.renderDiagram();
      history.replaceState(null, "", encodeHash(this.state));
    } catch (error) {
      if (isAbort(error)) return;
      const message =
        error instanceof ApiError
          ? `${error.code}: ${error.message}`
          : error instanceof Error
            ? error.message
            : String(error);
      showError(this.diagramEl, message);
    }
  }

  private renderDiagram(): void {
    if (!this.doc) return;
    this.tooltip.leave();
    renderDiagram(
      this.diagramEl,
      this.doc,
      {
        onNodeClick: (axis, level) => this.apply(toggleSelection(this.state, axis, level)),
        onNodeEnter: (axis, level, event) => this.tooltip.hoverNode(axis, level, event),
        onLinkEnter: (axisA, levelA, axisB, levelB, event) =>
          this.tooltip.hoverLink(axisA, levelA, axisB, levelB, event),
        onHoverLeave: () => this.tooltip.leave(),
      },
      this.layoutOptions,
    );

    const svg = this.diagramEl.querySelector("svg");
    this.drag?.dispose();
    this.drag = null;
    if (svg) {
      const layout = computeLayout(this.doc, this.layoutOptions);
      const centers = this.doc.axes.map(
        (a) => layout.columnX.get(a.axis)! + this.layoutOptions.nodeWidth / 2,
      );
      this.drag = new AxisDragController(
        svg as SVGSVGElement,
        centers,
        this.layoutOptions.width,
        (from, to) => this.handleReorder(from, to),
      );
    }
  }

  private renderControls(): void {
    renderControls(this.controlsEl, this.catalog, this.state, this.doc, {
      onCollection: (id) => this.apply(setCollection(this.state, this.catalog, id)),
      onMeasure: (id) => this.apply(setMeasure(this.state, id)),
      onTopicMode: (mode) =>
        this.apply(
          setTopicMode(
            this.state,
            mode,
            mode === "single"
              ? (this.state.topicId ??
                  this.catalog.collections.find(
                    (c) => c.collection_id === this.state.collectionId,
                  )!.topics[0])
              : null,
          ),
        ),
      onTopic: (topicId) => this.apply(setTopicMode(this.state, "single", topicId)),
      onScaling: (scaling) => this.apply(setScaling(this.state, scaling)),
      onColorSchema: (schema) => this.apply(setColorSchema(this.state, schema)),
      onCurveShape: (shape) => this.apply(setCurveShape(this.state, shape)),
      onToggleLevel: (axis, level) =>
        this.apply(toggleLevel(this.state, this.catalog, axis, level)),
      onClearSelection: () => this.apply(clearSelection(this.state)),
    });
  }

  /** Axis header dropped on another slot; a same-slot drop never reaches
   * here (the drag controller filters it), and reorderAxes returns the
   * identical state for any residual no-op, so no request is issued. */
  handleReorder(from: number, to: number): void {
    this.apply(reorderAxes(this.state, from, to));
  }

  handleSelect(axis: Axis, level: string): void {
    this.apply(toggleSelection(this.state, axis, level));
  }

  private flash(message: string | null): void {
    this.statusEl.textContent = message ?? "";
    this.statusEl.classList.toggle("status-error", message !== null);
  }
}

function div(className: string): HTMLElement {
  const node = document.createElement("div");
  node.className = className;
  return node;
}

function bootstrap(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const app = new App(root);
  void app.init().catch((error) => {
    showError(root, error instanceof Error ? error.message : String(error));
  });
}

if (typeof document !== "undefined") bootstrap();
