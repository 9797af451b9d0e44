/** Pure geometry: document -> rectangles and ribbons.
 *
 * No DOM access here so every measurement is unit-testable. Node heights
 * are exactly proportional to the document's weights (the renderer never
 * rounds them), stage ribbons pack each node in document order, and the
 * rightmost column is always the measure scale: 25 score bins.
 */

import { Axis, BinDoc, FinalLinkDoc, NodeDoc, SankeyDoc, StageLinkDoc } from "./types";

export interface LayoutOptions {
  width: number;
  height: number;
  marginTop: number;
  marginRight: number;
  marginBottom: number;
  marginLeft: number;
  nodeWidth: number;
  nodeGap: number;
  binGap: number;
}

export const DEFAULT_LAYOUT: LayoutOptions = {
  width: 1160,
  height: 640,
  marginTop: 40,
  marginRight: 70,
  marginBottom: 18,
  marginLeft: 16,
  nodeWidth: 16,
  nodeGap: 6,
  binGap: 2,
};

export interface NodeBox {
  axis: Axis;
  level: string;
  x: number;
  y: number;
  width: number;
  height: number;
  node: NodeDoc;
}

export interface BinBox {
  x: number;
  y: number;
  width: number;
  height: number;
  bin: BinDoc;
}

/** A ribbon between two vertical segments; either a stage link or a
 * system's final link into its score bin. */
export interface Ribbon {
  x0: number;
  y0Top: number;
  y0Bottom: number;
  x1: number;
  y1Top: number;
  y1Bottom: number;
  color: string;
}

export interface StageRibbon extends Ribbon {
  sourceAxis: Axis;
  targetAxis: Axis;
  link: StageLinkDoc;
}

export interface FinalRibbon extends Ribbon {
  link: FinalLinkDoc;
}

export interface Layout {
  options: LayoutOptions;
  axisHeight: number;
  /** x of each component axis column, in render order */
  columnX: Map<Axis, number>;
  binX: number;
  nodes: NodeBox[];
  bins: BinBox[];
  stageRibbons: StageRibbon[][];
  finalRibbons: FinalRibbon[];
  nodeAt(axis: Axis, level: string): NodeBox;
}

function nodeKey(axis: Axis, level: string): string {
  return `${axis} ${level}`;
}

export function computeLayout(
  doc: SankeyDoc,
  options: LayoutOptions = DEFAULT_LAYOUT,
): Layout {
  const axisHeight = options.height - options.marginTop - options.marginBottom;
  const innerWidth = options.width - options.marginLeft - options.marginRight;
  const columns = doc.axes.length + 1; // component axes + the measure scale
  const step = (innerWidth - options.nodeWidth) / (columns - 1);

  const columnX = new Map<Axis, number>();
  doc.axes.forEach((axisDoc, i) => {
    columnX.set(axisDoc.axis, options.marginLeft + i * step);
  });
  const binX = options.marginLeft + (columns - 1) * step;

  // nodes: height exactly proportional to weight within the gap-free span
  const nodes: NodeBox[] = [];
  const byKey = new Map<string, NodeBox>();
  for (const axisDoc of doc.axes) {
    const n = axisDoc.nodes.length;
    const usable = axisHeight - options.nodeGap * (n - 1);
    let y = options.marginTop;
    for (const node of axisDoc.nodes) {
      const box: NodeBox = {
        axis: axisDoc.axis,
        level: node.level,
        x: columnX.get(axisDoc.axis)!,
        y,
        width: options.nodeWidth,
        height: node.weight * usable,
        node,
      };
      nodes.push(box);
      byKey.set(nodeKey(axisDoc.axis, node.level), box);
      y += box.height + options.nodeGap;
    }
  }

  // bins: low scores at the bottom, bin 24 on top
  const binHeight = (axisHeight - options.binGap * (doc.bins.length - 1)) / doc.bins.length;
  const bins: BinBox[] = doc.bins.map((bin) => ({
    x: binX,
    y:
      options.marginTop +
      axisHeight -
      (bin.index + 1) * binHeight -
      bin.index * options.binGap,
    width: options.nodeWidth,
    height: binHeight,
    bin,
  }));

  // stage ribbons: pack each node's edge in document link order
  const stageRibbons: StageRibbon[][] = doc.stages.map((stage) => {
    const outSum = new Map<string, number>();
    const inSum = new Map<string, number>();
    for (const link of stage.links) {
      outSum.set(link.source, (outSum.get(link.source) ?? 0) + link.weight);
      inSum.set(link.target, (inSum.get(link.target) ?? 0) + link.weight);
    }
    const outOffset = new Map<string, number>();
    const inOffset = new Map<string, number>();
    return stage.links.map((link) => {
      const source = byKey.get(nodeKey(stage.source_axis, link.source))!;
      const target = byKey.get(nodeKey(stage.target_axis, link.target))!;
      const sThick = source.height * (link.weight / (outSum.get(link.source) || 1));
      const tThick = target.height * (link.weight / (inSum.get(link.target) || 1));
      const sOff = outOffset.get(link.source) ?? 0;
      const tOff = inOffset.get(link.target) ?? 0;
      outOffset.set(link.source, sOff + sThick);
      inOffset.set(link.target, tOff + tThick);
      return {
        sourceAxis: stage.source_axis,
        targetAxis: stage.target_axis,
        link,
        color: link.color,
        x0: source.x + source.width,
        y0Top: source.y + sOff,
        y0Bottom: source.y + sOff + sThick,
        x1: target.x,
        y1Top: target.y + tOff,
        y1Bottom: target.y + tOff + tThick,
      };
    });
  });

  // final ribbons: every system gets an equal slice of its node and of its bin
  const lastAxis = doc.axes[doc.axes.length - 1]?.axis;
  const levelOffset = new Map<string, number>();
  const binOffset = new Map<number, number>();
  const finalRibbons: FinalRibbon[] = doc.final_links.map((link) => {
    const source = byKey.get(nodeKey(lastAxis, link.levels[lastAxis]))!;
    const binBox = bins[link.bin];
    const sThick = source.height / Math.max(source.node.systems, 1);
    const tThick = binBox.height / Math.max(binBox.bin.count, 1);
    const sOff = levelOffset.get(link.levels[lastAxis]) ?? 0;
    const tOff = binOffset.get(link.bin) ?? 0;
    levelOffset.set(link.levels[lastAxis], sOff + sThick);
    binOffset.set(link.bin, tOff + tThick);
    return {
      link,
      color: link.color,
      x0: source.x + source.width,
      y0Top: source.y + sOff,
      y0Bottom: source.y + sOff + sThick,
      x1: binBox.x,
      y1Top: binBox.y + tOff,
      y1Bottom: binBox.y + tOff + tThick,
    };
  });

  return {
    options,
    axisHeight,
    columnX,
    binX,
    nodes,
    bins,
    stageRibbons,
    finalRibbons,
    nodeAt(axis, level) {
      const box = byKey.get(nodeKey(axis, level));
      if (!box) throw new Error(`no node for ${axis}=${level}`);
      return box;
    },
  };
}

const fmt = (v: number): string => String(Math.round(v * 100) / 100);

/** SVG path for a ribbon. `cubic` draws the usual smooth sankey band;
 * anything else falls back to straight edges (the token is cosmetic). */
export function ribbonPath(ribbon: Ribbon, curveShape: string): string {
  const { x0, y0Top, y0Bottom, x1, y1Top, y1Bottom } = ribbon;
  if (curveShape === "cubic") {
    const mx = fmt((x0 + x1) / 2);
    return (
      `M${fmt(x0)},${fmt(y0Top)}` +
      `C${mx},${fmt(y0Top)} ${mx},${fmt(y1Top)} ${fmt(x1)},${fmt(y1Top)}` +
      `L${fmt(x1)},${fmt(y1Bottom)}` +
      `C${mx},${fmt(y1Bottom)} ${mx},${fmt(y0Bottom)} ${fmt(x0)},${fmt(y0Bottom)}Z`
    );
  }
  return (
    `M${fmt(x0)},${fmt(y0Top)}L${fmt(x1)},${fmt(y1Top)}` +
    `L${fmt(x1)},${fmt(y1Bottom)}L${fmt(x0)},${fmt(y0Bottom)}Z`
  );
}
