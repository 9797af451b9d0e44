/** Drag-and-drop re-ordering of the component axes.
 *
 * Only the three component headers are drag handles; the measure scale
 * stays rightmost and is not draggable. Dropping a header back on its
 * own slot (or anywhere that is not another slot) snaps back without a
 * re-fetch — the reorder callback simply never fires for a no-op.
 */

export type ReorderCallback = (fromIndex: number, toIndex: number) => void;

/** Nearest component-axis slot for an x coordinate (in diagram units). */
export function slotForX(x: number, columnCenters: number[]): number {
  let best = 0;
  let bestDistance = Infinity;
  columnCenters.forEach((center, index) => {
    const distance = Math.abs(x - center);
    if (distance < bestDistance) {
      bestDistance = distance;
      best = index;
    }
  });
  return best;
}

export class AxisDragController {
  private fromIndex: number | null = null;
  private handle: Element | null = null;

  constructor(
    private readonly svg: SVGSVGElement,
    private readonly columnCenters: number[],
    private readonly viewWidth: number,
    private readonly onReorder: ReorderCallback,
  ) {
    svg.addEventListener("mousedown", this.onDown);
  }

  dispose(): void {
    this.svg.removeEventListener("mousedown", this.onDown);
    this.detach();
  }

  private onDown = (event: Event): void => {
    const target = (event.target as Element | null)?.closest?.(".axis-header");
    if (!target || target.classList.contains("measure-header")) return;
    const index = Number(target.getAttribute("data-index"));
    if (!Number.isInteger(index)) return;
    this.fromIndex = index;
    this.handle = target;
    target.classList.add("dragging");
    document.addEventListener("mouseup", this.onUp);
    document.addEventListener("keydown", this.onKey);
  };

  private onUp = (event: MouseEvent): void => {
    const from = this.fromIndex;
    this.detach();
    if (from === null) return;
    const to = slotForX(this.toDiagramX(event.clientX), this.columnCenters);
    if (to !== from) this.onReorder(from, to);
  };

  private onKey = (event: KeyboardEvent): void => {
    if (event.key === "Escape") this.detach(); // snap back
  };

  private detach(): void {
    this.handle?.classList.remove("dragging");
    this.handle = null;
    this.fromIndex = null;
    document.removeEventListener("mouseup", this.onUp);
    document.removeEventListener("keydown", this.onKey);
  }

  private toDiagramX(clientX: number): number {
    const rect = this.svg.getBoundingClientRect();
    const scale = rect.width > 0 ? this.viewWidth / rect.width : 1;
    return (clientX - rect.left) * scale;
  }
}
