/** Debounced hover tooltips.
 *
 * A hover only fetches after the pointer has rested 150 ms on a target,
 * so sweeping across the diagram costs at most one request. The panel
 * prints the endpoint's numbers verbatim — the client never reformats,
 * rounds, or recomputes a statistic.
 */

import { isAbort, LatestWins } from "./api";
import { Axis, ComponentTooltip, DunnettResponse, LinkTooltip, ScoredSystem } from "./types";

export const HOVER_DELAY_MS = 150;

export interface TooltipFetchers {
  component(axis: Axis, level: string, signal: AbortSignal): Promise<ComponentTooltip>;
  link(
    axisA: Axis,
    levelA: string,
    axisB: Axis,
    levelB: string,
    signal: AbortSignal,
  ): Promise<LinkTooltip>;
}

type PendingTarget =
  | { kind: "node"; axis: Axis; level: string }
  | { kind: "link"; axisA: Axis; levelA: string; axisB: Axis; levelB: string };

export class TooltipController {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight = new LatestWins();

  constructor(
    private readonly panel: HTMLElement,
    private readonly fetchers: TooltipFetchers,
    private readonly delayMs: number = HOVER_DELAY_MS,
  ) {
    panel.classList.add("hidden");
  }

  hoverNode(axis: Axis, level: string, event?: MouseEvent): void {
    this.schedule({ kind: "node", axis, level }, event);
  }

  hoverLink(
    axisA: Axis,
    levelA: string,
    axisB: Axis,
    levelB: string,
    event?: MouseEvent,
  ): void {
    this.schedule({ kind: "link", axisA, levelA, axisB, levelB }, event);
  }

  leave(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.inflight.abort();
    this.panel.classList.add("hidden");
  }

  private schedule(target: PendingTarget, event?: MouseEvent): void {
    if (this.timer !== null) clearTimeout(this.timer);
    if (event) this.position(event);
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.load(target);
    }, this.delayMs);
  }

  private position(event: MouseEvent): void {
    this.panel.style.left = `${event.clientX + 14}px`;
    this.panel.style.top = `${event.clientY + 14}px`;
  }

  private async load(target: PendingTarget): Promise<void> {
    try {
      if (target.kind === "node") {
        const data = await this.inflight.run((signal) =>
          this.fetchers.component(target.axis, target.level, signal),
        );
        this.renderComponent(data);
      } else {
        const data = await this.inflight.run((signal) =>
          this.fetchers.link(
            target.axisA,
            target.levelA,
            target.axisB,
            target.levelB,
            signal,
          ),
        );
        this.renderLink(data);
      }
    } catch (error) {
      if (isAbort(error)) return;
      this.panel.replaceChildren(text("p", "statistics unavailable", "tooltip-error"));
      this.panel.classList.remove("hidden");
    }
  }

  private renderComponent(data: ComponentTooltip): void {
    this.panel.replaceChildren(
      text("h3", `${data.axis}: ${data.level}`),
      ...summaryRows(data.mean, data.systems, data.best),
      topList(data.top),
      dunnettBlock(data.dunnett),
    );
    this.panel.classList.remove("hidden");
  }

  private renderLink(data: LinkTooltip): void {
    this.panel.replaceChildren(
      text("h3", `${data.axis_a}: ${data.level_a} × ${data.axis_b}: ${data.level_b}`),
      ...summaryRows(data.mean, data.systems, data.best),
      topList(data.top),
      dunnettBlock(data.dunnett),
    );
    this.panel.classList.remove("hidden");
  }
}

function text(tag: string, content: string, className?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  node.textContent = content;
  return node;
}

function field(name: string, value: string): HTMLElement {
  const row = document.createElement("div");
  row.className = "tooltip-field";
  const label = text("span", name, "field-name");
  const val = text("span", value, "field-value");
  val.dataset.field = name;
  row.append(label, val);
  return row;
}

function summaryRows(
  mean: number,
  systems: number,
  best: ScoredSystem,
): HTMLElement[] {
  return [
    field("mean", String(mean)),
    field("systems", String(systems)),
    field("best", `${best.system} (${best.score})`),
  ];
}

function topList(top: ScoredSystem[]): HTMLElement {
  const block = document.createElement("div");
  block.className = "tooltip-top";
  block.appendChild(text("h4", "top systems"));
  const list = document.createElement("ol");
  for (const entry of top) {
    const item = text("li", `${entry.system} — ${entry.score}`);
    item.dataset.system = entry.system;
    list.appendChild(item);
  }
  block.appendChild(list);
  return block;
}

function dunnettBlock(dunnett: DunnettResponse): HTMLElement {
  const block = document.createElement("div");
  block.className = "tooltip-dunnett";
  block.appendChild(
    text(
      "h4",
      `top group (α=${dunnett.alpha}, df=${dunnett.df}, ` +
        `critical=${dunnett.critical_value === null ? "—" : dunnett.critical_value})`,
    ),
  );
  const list = document.createElement("ul");
  list.className = "top-group";
  for (const system of dunnett.top_group) {
    const item = text("li", system);
    item.dataset.system = system;
    list.appendChild(item);
  }
  block.appendChild(list);
  return block;
}
