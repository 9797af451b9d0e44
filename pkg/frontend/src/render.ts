/** SVG rendering of a diagram document.
 *
 * The document is drawn exactly as received: node colors, link colors,
 * bin boundaries, and the highlighted system set all come from the
 * service. A malformed document produces an error banner and no partial
 * picture (the SVG is only attached once it is fully built).
 */

import { computeLayout, DEFAULT_LAYOUT, LayoutOptions, ribbonPath } from "./layout";
import { Axis, FinalLinkDoc, SankeyDoc } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface RenderHandlers {
  onNodeClick?(axis: Axis, level: string): void;
  onNodeEnter?(axis: Axis, level: string, event: MouseEvent): void;
  onLinkEnter?(
    axisA: Axis,
    levelA: string,
    axisB: Axis,
    levelB: string,
    event: MouseEvent,
  ): void;
  onHoverLeave?(): void;
}

function fail(reason: string): never {
  throw new Error(`malformed document: ${reason}`);
}

/** Structural check over every field the renderer dereferences. */
export function validateDoc(doc: unknown): SankeyDoc {
  const d = doc as SankeyDoc;
  if (!d || typeof d !== "object") fail("not an object");
  if (typeof d.collection_id !== "string") fail("missing collection_id");
  if (typeof d.measure_id !== "string") fail("missing measure_id");
  if (!Array.isArray(d.axes) || d.axes.length === 0) fail("missing axes");
  for (const axisDoc of d.axes) {
    if (!axisDoc || typeof axisDoc.axis !== "string") fail("axis entry without a name");
    if (!Array.isArray(axisDoc.nodes)) fail(`axis ${axisDoc.axis} has no nodes`);
    for (const node of axisDoc.nodes) {
      if (typeof node.level !== "string" || typeof node.weight !== "number") {
        fail(`bad node on axis ${axisDoc.axis}`);
      }
      if (typeof node.color !== "string") fail(`node ${node.level} has no color`);
    }
  }
  if (!Array.isArray(d.bins) || d.bins.length !== 25) fail("expected 25 bins");
  for (const bin of d.bins) {
    if (typeof bin.index !== "number" || typeof bin.count !== "number") fail("bad bin");
  }
  if (!Array.isArray(d.stages) || d.stages.length !== d.axes.length - 1) {
    fail("stage count does not match axes");
  }
  for (const stage of d.stages) {
    if (!Array.isArray(stage.links)) fail("stage without links");
  }
  if (!Array.isArray(d.final_links)) fail("missing final_links");
  for (const link of d.final_links) {
    if (typeof link.system !== "string" || typeof link.bin !== "number") {
      fail("bad final link");
    }
    if (!link.levels || typeof link.levels !== "object") fail("final link without levels");
  }
  if (!Array.isArray(d.highlighted)) fail("missing highlighted");
  if (!d.range || typeof d.range.lo !== "number" || typeof d.range.hi !== "number") {
    fail("missing range");
  }
  return d;
}

export function showError(container: HTMLElement, message: string): void {
  container.replaceChildren();
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.setAttribute("role", "alert");
  banner.textContent = message;
  container.appendChild(banner);
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

const round2 = (v: number): string => String(Math.round(v * 100) / 100);

export function renderDiagram(
  container: HTMLElement,
  doc: SankeyDoc,
  handlers: RenderHandlers = {},
  layoutOptions: LayoutOptions = DEFAULT_LAYOUT,
): void {
  let svg: SVGSVGElement;
  try {
    const valid = validateDoc(doc);
    svg = buildSvg(valid, handlers, layoutOptions);
  } catch (error) {
    showError(container, error instanceof Error ? error.message : String(error));
    return;
  }
  container.replaceChildren(svg);
}

function buildSvg(
  doc: SankeyDoc,
  handlers: RenderHandlers,
  layoutOptions: LayoutOptions,
): SVGSVGElement {
  const layout = computeLayout(doc, layoutOptions);
  const highlighted = new Set(doc.highlighted);
  const dimming = highlighted.size > 0;
  const byId = new Map<string, FinalLinkDoc>(doc.final_links.map((f) => [f.system, f]));

  const svg = el("svg", {
    class: "sankey",
    viewBox: `0 0 ${layoutOptions.width} ${layoutOptions.height}`,
    width: String(layoutOptions.width),
    height: String(layoutOptions.height),
  });

  // stage ribbons
  const stagesGroup = el("g", { class: "stages" });
  doc.stages.forEach((stage, i) => {
    const stageGroup = el("g", {
      class: "stage",
      "data-source-axis": stage.source_axis,
      "data-target-axis": stage.target_axis,
    });
    for (const ribbon of layout.stageRibbons[i]) {
      const path = el("path", {
        class: "stage-link" + (dimming ? " dimmed" : ""),
        d: ribbonPath(ribbon, doc.curve_shape),
        fill: ribbon.color,
        "data-source": ribbon.link.source,
        "data-target": ribbon.link.target,
      });
      path.addEventListener("mouseenter", (event) =>
        handlers.onLinkEnter?.(
          stage.source_axis,
          ribbon.link.source,
          stage.target_axis,
          ribbon.link.target,
          event as MouseEvent,
        ),
      );
      path.addEventListener("mouseleave", () => handlers.onHoverLeave?.());
      stageGroup.appendChild(path);
    }
    stagesGroup.appendChild(stageGroup);
  });
  svg.appendChild(stagesGroup);

  // final stage: one ribbon per visible system into its score bin
  const finalGroup = el("g", { class: "final-links" });
  for (const ribbon of layout.finalRibbons) {
    const isHighlighted = highlighted.has(ribbon.link.system);
    const path = el("path", {
      class:
        "final-link" +
        (isHighlighted ? " highlighted" : "") +
        (dimming && !isHighlighted ? " dimmed" : ""),
      d: ribbonPath(ribbon, doc.curve_shape),
      fill: ribbon.color,
      "data-system": ribbon.link.system,
      "data-bin": String(ribbon.link.bin),
    });
    finalGroup.appendChild(path);
  }
  svg.appendChild(finalGroup);

  // emphasized paths for the highlighted systems, drawn over the stages
  if (dimming) {
    svg.appendChild(buildHighlightOverlay(doc, layout, byId));
  }

  // component nodes
  const nodesGroup = el("g", { class: "axes" });
  const selected = new Set(doc.selected.map((s) => `${s.axis} ${s.level}`));
  for (const box of layout.nodes) {
    const group = el("g", { class: "node", "data-axis": box.axis, "data-level": box.level });
    const rect = el("rect", {
      class:
        "node-rect" + (selected.has(`${box.axis} ${box.level}`) ? " selected" : ""),
      x: round2(box.x),
      y: round2(box.y),
      width: round2(box.width),
      height: round2(box.height),
      fill: box.node.color,
    });
    rect.addEventListener("click", () => handlers.onNodeClick?.(box.axis, box.level));
    rect.addEventListener("mouseenter", (event) =>
      handlers.onNodeEnter?.(box.axis, box.level, event as MouseEvent),
    );
    rect.addEventListener("mouseleave", () => handlers.onHoverLeave?.());
    group.appendChild(rect);

    const label = el("text", {
      class: "node-label",
      x: round2(box.x - 4),
      y: round2(box.y + box.height / 2),
      "text-anchor": "end",
      "dominant-baseline": "middle",
    });
    label.textContent = box.level;
    group.appendChild(label);
    nodesGroup.appendChild(group);
  }
  svg.appendChild(nodesGroup);

  // measure scale: 25 score bins, low at the bottom
  const binsGroup = el("g", { class: "bins" });
  for (const box of layout.bins) {
    const rect = el("rect", {
      class: "bin-rect",
      x: round2(box.x),
      y: round2(box.y),
      width: round2(box.width),
      height: round2(box.height),
      fill: box.bin.color,
      "data-bin": String(box.bin.index),
      "data-count": String(box.bin.count),
    });
    binsGroup.appendChild(rect);
    if (box.bin.index % 6 === 0 || box.bin.index === 24) {
      const tick = el("text", {
        class: "bin-tick",
        x: round2(box.x + box.width + 4),
        y: round2(box.y + box.height),
        "dominant-baseline": "middle",
      });
      tick.textContent = box.bin.lo.toFixed(2);
      binsGroup.appendChild(tick);
      if (box.bin.index === 24) {
        const top = el("text", {
          class: "bin-tick",
          x: round2(box.x + box.width + 4),
          y: round2(box.y),
          "dominant-baseline": "middle",
        });
        top.textContent = box.bin.hi.toFixed(2);
        binsGroup.appendChild(top);
      }
    }
  }
  svg.appendChild(binsGroup);

  // axis headers: the drag handles for re-ordering (the measure scale is fixed)
  const headersGroup = el("g", { class: "axis-headers" });
  doc.axes.forEach((axisDoc, index) => {
    const x = layout.columnX.get(axisDoc.axis)!;
    const header = el("text", {
      class: "axis-header",
      x: round2(x + layoutOptions.nodeWidth / 2),
      y: String(layoutOptions.marginTop - 14),
      "text-anchor": "middle",
      "data-axis": axisDoc.axis,
      "data-index": String(index),
    });
    header.textContent = axisDoc.axis;
    headersGroup.appendChild(header);
  });
  const measureHeader = el("text", {
    class: "axis-header measure-header",
    x: round2(layout.binX + layoutOptions.nodeWidth / 2),
    y: String(layoutOptions.marginTop - 14),
    "text-anchor": "middle",
  });
  measureHeader.textContent = doc.measure_id;
  headersGroup.appendChild(measureHeader);
  svg.appendChild(headersGroup);

  return svg;
}

/** Thin per-system ribbons tracing each highlighted system through every
 * stage — pure lookups over final_links; no client-side statistics. */
function buildHighlightOverlay(
  doc: SankeyDoc,
  layout: ReturnType<typeof computeLayout>,
  byId: Map<string, FinalLinkDoc>,
): SVGGElement {
  const overlay = el("g", { class: "highlights" });
  const offsets = new Map<string, number>();
  for (let i = 0; i + 1 < doc.axes.length; i++) {
    const sourceAxis = doc.axes[i].axis;
    const targetAxis = doc.axes[i + 1].axis;
    for (const system of doc.highlighted) {
      const link = byId.get(system);
      if (!link) continue;
      const source = layout.nodeAt(sourceAxis, link.levels[sourceAxis]);
      const target = layout.nodeAt(targetAxis, link.levels[targetAxis]);
      const sThick = source.height / Math.max(source.node.systems, 1);
      const tThick = target.height / Math.max(target.node.systems, 1);
      const sKey = `${i}:s:${link.levels[sourceAxis]}`;
      const tKey = `${i}:t:${link.levels[targetAxis]}`;
      const sOff = offsets.get(sKey) ?? 0;
      const tOff = offsets.get(tKey) ?? 0;
      offsets.set(sKey, sOff + sThick);
      offsets.set(tKey, tOff + tThick);
      const path = el("path", {
        class: "highlight-ribbon highlighted",
        d: ribbonPath(
          {
            x0: source.x + source.width,
            y0Top: source.y + sOff,
            y0Bottom: source.y + sOff + sThick,
            x1: target.x,
            y1Top: target.y + tOff,
            y1Bottom: target.y + tOff + tThick,
            color: "",
          },
          doc.curve_shape,
        ),
        "data-system": system,
      });
      overlay.appendChild(path);
    }
  }
  return overlay;
}
