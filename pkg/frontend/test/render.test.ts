import { beforeEach, describe, expect, it, vi } from "vitest";
import { renderDiagram, validateDoc } from "../src/render";
import { makeDoc } from "./helpers";

let container: HTMLElement;

beforeEach(() => {
  container = document.createElement("div");
  document.body.replaceChildren(container);
});

function highlightedSystems(): Set<string> {
  return new Set(
    Array.from(container.querySelectorAll("path.final-link.highlighted")).map(
      (p) => p.getAttribute("data-system")!,
    ),
  );
}

describe("basic structure", () => {
  it("draws nodes, stages, final links, bins, and headers", () => {
    renderDiagram(container, makeDoc());
    const svg = container.querySelector("svg.sankey");
    expect(svg).not.toBeNull();
    expect(container.querySelectorAll("g.node")).toHaveLength(7); // 2+3+2 levels
    expect(container.querySelectorAll("path.final-link")).toHaveLength(12);
    expect(container.querySelectorAll("rect.bin-rect")).toHaveLength(25);

    const stages = Array.from(container.querySelectorAll("g.stage"));
    expect(stages.map((s) => s.getAttribute("data-source-axis"))).toEqual([
      "stoplist",
      "stemmer",
    ]);
    expect(stages.map((s) => s.getAttribute("data-target-axis"))).toEqual([
      "stemmer",
      "model",
    ]);

    const headers = Array.from(container.querySelectorAll("text.axis-header"));
    expect(headers).toHaveLength(4); // three draggable + the measure scale
    const draggable = headers.filter((h) => h.hasAttribute("data-index"));
    expect(draggable.map((h) => h.textContent)).toEqual([
      "stoplist",
      "stemmer",
      "model",
    ]);
    const measure = container.querySelector("text.measure-header")!;
    expect(measure.textContent).toBe("AP");
    expect(measure.hasAttribute("data-index")).toBe(false);
  });

  it("mirrors a reordered axis_order in stage attributes", () => {
    renderDiagram(container, makeDoc({ axisOrder: ["model", "stoplist", "stemmer"] }));
    const stages = Array.from(container.querySelectorAll("g.stage"));
    expect(stages.map((s) => s.getAttribute("data-source-axis"))).toEqual([
      "model",
      "stoplist",
    ]);
  });

  it("scales to a full 6x6x17 grid document", () => {
    const doc = makeDoc({
      axesLevels: {
        stoplist: Array.from({ length: 6 }, (_, i) => `sl${i}`),
        stemmer: Array.from({ length: 6 }, (_, i) => `st${i}`),
        model: Array.from({ length: 17 }, (_, i) => `mo${i}`),
      },
    });
    expect(doc.final_links).toHaveLength(612);
    renderDiagram(container, doc);
    expect(container.querySelectorAll("path.final-link")).toHaveLength(612);
    expect(container.querySelectorAll("g.node")).toHaveLength(29);
  });
});

describe("highlighting", () => {
  it("marks exactly the systems at the intersection of cross-axis picks", () => {
    renderDiagram(
      container,
      makeDoc({
        selected: [
          { axis: "stoplist", level: "indri" },
          { axis: "stemmer", level: "krovetz" },
        ],
      }),
    );
    expect(highlightedSystems()).toEqual(
      new Set(["indri_krovetz_bm25", "indri_krovetz_tfidf"]),
    );
    // every other system ribbon is dimmed, the two picked ones are not
    const dimmed = Array.from(container.querySelectorAll("path.final-link.dimmed"));
    expect(dimmed).toHaveLength(10);
    for (const p of dimmed) expect(p.classList.contains("highlighted")).toBe(false);
    // overlay traces each highlighted system through both stages
    expect(container.querySelectorAll("path.highlight-ribbon")).toHaveLength(4);
  });

  it("unions picks made on the same axis", () => {
    renderDiagram(
      container,
      makeDoc({
        selected: [
          { axis: "stemmer", level: "porter" },
          { axis: "stemmer", level: "krovetz" },
        ],
      }),
    );
    const ids = highlightedSystems();
    expect(ids.size).toBe(8);
    for (const id of ids) expect(id).toMatch(/_(porter|krovetz)_/);
  });

  it("renders no emphasis or dimming when nothing is selected", () => {
    renderDiagram(container, makeDoc());
    expect(container.querySelectorAll(".highlighted")).toHaveLength(0);
    expect(container.querySelectorAll(".dimmed")).toHaveLength(0);
    expect(container.querySelector("g.highlights")).toBeNull();
  });

  it("marks the picked node rectangles as selected", () => {
    renderDiagram(
      container,
      makeDoc({ selected: [{ axis: "stoplist", level: "indri" }] }),
    );
    const selectedRects = Array.from(
      container.querySelectorAll("rect.node-rect.selected"),
    ).map((r) => r.parentElement!.getAttribute("data-level"));
    expect(selectedRects).toEqual(["indri"]);
  });
});

describe("malformed documents", () => {
  it.each([
    [null, /not an object/],
    [{ ...makeDoc(), bins: makeDoc().bins.slice(0, 24) }, /expected 25 bins/],
    [{ ...makeDoc(), stages: [] }, /stage count/],
    [{ ...makeDoc(), range: undefined }, /missing range/],
    [{ ...makeDoc(), highlighted: undefined }, /missing highlighted/],
  ])("rejects %#", (doc, message) => {
    expect(() => validateDoc(doc)).toThrowError(message);
  });

  it("shows a banner and never a partial picture", () => {
    renderDiagram(container, makeDoc());
    expect(container.querySelector("svg")).not.toBeNull();

    const broken = { ...makeDoc(), bins: makeDoc().bins.slice(0, 24) };
    renderDiagram(container, broken as never);
    expect(container.querySelector("svg")).toBeNull();
    const banner = container.querySelector(".error-banner")!;
    expect(banner.getAttribute("role")).toBe("alert");
    expect(banner.textContent).toMatch(/malformed document/);
  });
});

describe("pointer handlers", () => {
  it("reports node clicks and hovers with axis and level", () => {
    const onNodeClick = vi.fn();
    const onNodeEnter = vi.fn();
    renderDiagram(container, makeDoc(), { onNodeClick, onNodeEnter });
    const rect = container.querySelector(
      'g.node[data-axis="stemmer"][data-level="porter"] rect',
    )!;
    rect.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    expect(onNodeClick).toHaveBeenCalledWith("stemmer", "porter");
    rect.dispatchEvent(new MouseEvent("mouseenter"));
    expect(onNodeEnter).toHaveBeenCalledWith(
      "stemmer",
      "porter",
      expect.any(MouseEvent),
    );
  });

  it("reports link hovers with both endpoints and leave events", () => {
    const onLinkEnter = vi.fn();
    const onHoverLeave = vi.fn();
    renderDiagram(container, makeDoc(), { onLinkEnter, onHoverLeave });
    const link = container.querySelector(
      'g.stage[data-source-axis="stoplist"] path[data-source="indri"][data-target="krovetz"]',
    )!;
    link.dispatchEvent(new MouseEvent("mouseenter"));
    expect(onLinkEnter).toHaveBeenCalledWith(
      "stoplist",
      "indri",
      "stemmer",
      "krovetz",
      expect.any(MouseEvent),
    );
    link.dispatchEvent(new MouseEvent("mouseleave"));
    expect(onHoverLeave).toHaveBeenCalledTimes(1);
  });
});
