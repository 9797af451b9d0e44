/** Fixtures: a small catalog, a deterministic document builder that
 * applies the same visibility/highlight rules as the service, and a
 * scripted `fetch` so App tests can count and inspect every request. */

import { vi } from "vitest";
import {
  Axis,
  AXES,
  Catalog,
  ComponentRef,
  ComponentTooltip,
  ExplorationRequest,
  FinalLinkDoc,
  SankeyDoc,
  StageDoc,
} from "../src/types";

export const CATALOG: Catalog = {
  axes: ["stoplist", "stemmer", "model"],
  collections: [
    {
      collection_id: "TOY",
      topics: ["301", "302", "303", "304"],
      axes: {
        stoplist: ["nostop", "indri"],
        stemmer: ["nolug", "porter", "krovetz"],
        model: ["bm25", "tfidf"],
      },
      model_families: { bm25: "probabilistic", tfidf: "vector_space" },
      measures: ["AP", "P@10", "Rprec", "RBP", "nDCG", "nDCG@20", "ERR"],
      reserved_measures: ["Twist"],
      separator: "_",
      systems: 12,
      loaded_systems: 12,
    },
  ],
};

interface SystemRow {
  id: string;
  levels: Record<Axis, string>;
  score: number;
}

function visibleSystems(
  declared: Record<Axis, string[]>,
  visible: Record<Axis, string[]>,
): SystemRow[] {
  const rows: SystemRow[] = [];
  for (const sl of declared.stoplist) {
    for (const st of declared.stemmer) {
      for (const mo of declared.model) {
        if (
          !visible.stoplist.includes(sl) ||
          !visible.stemmer.includes(st) ||
          !visible.model.includes(mo)
        ) {
          continue;
        }
        rows.push({
          id: `${sl}_${st}_${mo}`,
          levels: { stoplist: sl, stemmer: st, model: mo },
          score: 0, // filled below so scores depend only on the id
        });
      }
    }
  }
  rows.forEach((row, i) => {
    row.score = (i + 1) / (rows.length + 1);
  });
  return rows;
}

function matches(row: SystemRow, selected: ComponentRef[]): boolean {
  const byAxis = new Map<Axis, Set<string>>();
  for (const ref of selected) {
    const set = byAxis.get(ref.axis) ?? new Set();
    set.add(ref.level);
    byAxis.set(ref.axis, set);
  }
  for (const [axis, levels] of byAxis) {
    if (!levels.has(row.levels[axis])) return false;
  }
  return true;
}

/** Build a self-consistent document the way the service would, for the
 * TOY catalog. Options mirror the request fields the tests vary. */
export function makeDoc(options: {
  axisOrder?: Axis[];
  visible?: Partial<Record<Axis, string[]>>;
  selected?: ComponentRef[];
  weights?: Partial<Record<Axis, number[]>>;
  measureId?: string;
  curveShape?: string;
  /** level declarations other than the TOY catalog's (e.g. a 6x6x17 grid) */
  axesLevels?: Record<Axis, string[]>;
} = {}): SankeyDoc {
  const info = CATALOG.collections[0];
  const declared = options.axesLevels ?? info.axes;
  const axisOrder = options.axisOrder ?? [...AXES];
  const visible: Record<Axis, string[]> = {
    stoplist: options.visible?.stoplist ?? [...declared.stoplist],
    stemmer: options.visible?.stemmer ?? [...declared.stemmer],
    model: options.visible?.model ?? [...declared.model],
  };
  const systems = visibleSystems(declared, visible);
  const selected = options.selected ?? [];

  const axes = axisOrder.map((axis) => {
    const levels = visible[axis];
    const explicit = options.weights?.[axis];
    return {
      axis,
      nodes: levels.map((level, i) => {
        const share =
          systems.filter((s) => s.levels[axis] === level).length / systems.length;
        return {
          level,
          weight: explicit ? explicit[i] : share,
          color: "#7788aa",
          mean: 0.4 + i * 0.01,
          systems: systems.filter((s) => s.levels[axis] === level).length,
        };
      }),
    };
  });

  const stages: StageDoc[] = [];
  for (let i = 0; i + 1 < axisOrder.length; i++) {
    const [a, b] = [axisOrder[i], axisOrder[i + 1]];
    const links = [];
    for (const la of visible[a]) {
      for (const lb of visible[b]) {
        const count = systems.filter(
          (s) => s.levels[a] === la && s.levels[b] === lb,
        ).length;
        if (count === 0) continue;
        links.push({
          source: la,
          target: lb,
          weight: count / systems.length,
          systems: count,
          color: "#99aabb",
        });
      }
    }
    stages.push({ source_axis: a, target_axis: b, links });
  }

  const finalLinks: FinalLinkDoc[] = systems.map((s) => ({
    system: s.id,
    levels: { ...s.levels },
    score: s.score,
    bin: Math.min(Math.floor(s.score * 25), 24),
    color: "#5566cc",
  }));
  const counts = new Array(25).fill(0);
  for (const link of finalLinks) counts[link.bin] += 1;

  return {
    collection_id: info.collection_id,
    measure_id: options.measureId ?? "AP",
    topic_id: null,
    axis_order: axisOrder,
    scaling: "full_range",
    color_schema: "by_component",
    curve_shape: options.curveShape ?? "cubic",
    range: { lo: 0, hi: 1 },
    axes,
    bins: Array.from({ length: 25 }, (_, i) => ({
      index: i,
      lo: i / 25,
      hi: (i + 1) / 25,
      count: counts[i],
      color: "#cccccc",
    })),
    stages,
    final_links: finalLinks,
    highlighted:
      selected.length === 0
        ? []
        : systems.filter((s) => matches(s, selected)).map((s) => s.id),
    selected,
  };
}

// --- scripted fetch ----------------------------------------------------------

export interface RecordedRequest {
  method: string;
  url: string;
  body: ExplorationRequest | null;
}

export interface FakeService {
  calls: RecordedRequest[];
  diagramCalls(): RecordedRequest[];
  tooltipCalls(): RecordedRequest[];
  /** override the component-tooltip payload */
  componentTooltip: ComponentTooltip | null;
  /** when set, the next matching request fails with this status/envelope */
  failNext: { status: number; code: string; message: string } | null;
  restore(): void;
}

function jsonResponse(status: number, body: unknown) {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => body,
    text: async () => JSON.stringify(body),
    headers: { get: () => null },
  };
}

/** Replace global fetch with a scripted service over the TOY catalog. */
export function installFakeService(): FakeService {
  const original = globalThis.fetch;
  const service: FakeService = {
    calls: [],
    componentTooltip: null,
    failNext: null,
    diagramCalls: () => service.calls.filter((c) => c.url.startsWith("/api/diagram")),
    tooltipCalls: () => service.calls.filter((c) => c.url.includes("/api/tooltip")),
    restore: () => {
      globalThis.fetch = original;
    },
  };

  globalThis.fetch = vi.fn(async (input: unknown, init?: RequestInit) => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const body = init?.body ? (JSON.parse(String(init.body)) as ExplorationRequest) : null;
    service.calls.push({ method, url, body });

    if (service.failNext) {
      const { status, code, message } = service.failNext;
      service.failNext = null;
      return jsonResponse(status, { error: { code, field: null, message } });
    }
    if (url.startsWith("/api/catalog")) return jsonResponse(200, CATALOG);
    if (url.startsWith("/api/diagram")) {
      const request = body!;
      const doc = makeDoc({
        axisOrder: request.axis_order,
        visible: request.visible_levels,
        selected: request.selected,
        measureId: request.measure_id,
        curveShape: request.curve_shape,
      });
      return jsonResponse(200, doc);
    }
    if (url.startsWith("/api/tooltip/component")) {
      return jsonResponse(200, service.componentTooltip ?? SAMPLE_COMPONENT_TOOLTIP);
    }
    if (url.startsWith("/api/tooltip/link")) {
      return jsonResponse(200, SAMPLE_LINK_TOOLTIP);
    }
    return jsonResponse(404, { error: { code: "error", field: null, message: "no route" } });
  }) as unknown as typeof fetch;

  return service;
}

/** Field-for-field the shape the component tooltip endpoint returns. */
export const SAMPLE_COMPONENT_TOOLTIP: ComponentTooltip = {
  axis: "stoplist",
  level: "indri",
  mean: 0.276123,
  systems: 6,
  best: { system: "indri_krovetz_bm25", score: 0.412345 },
  top: [
    { system: "indri_krovetz_bm25", score: 0.412345 },
    { system: "indri_porter_bm25", score: 0.398765 },
    { system: "indri_krovetz_tfidf", score: 0.381234 },
    { system: "indri_nolug_bm25", score: 0.352211 },
    { system: "indri_porter_tfidf", score: 0.341199 },
  ],
  dunnett: {
    control: "indri_krovetz_bm25",
    alpha: 0.05,
    df: 18,
    n_topics: 4,
    critical_value: 2.540112,
    top_group: ["indri_krovetz_bm25", "indri_porter_bm25"],
    entries: [
      {
        system: "indri_krovetz_bm25",
        mean: 0.412345,
        t: null,
        significant: false,
        is_control: true,
        in_top_group: true,
      },
      {
        system: "indri_porter_bm25",
        mean: 0.398765,
        t: 1.102345,
        significant: false,
        is_control: false,
        in_top_group: true,
      },
      {
        system: "indri_krovetz_tfidf",
        mean: 0.381234,
        t: 2.998877,
        significant: true,
        is_control: false,
        in_top_group: false,
      },
    ],
  },
};

export const SAMPLE_LINK_TOOLTIP = {
  axis_a: "stoplist" as const,
  level_a: "nostop",
  axis_b: "stemmer" as const,
  level_b: "nolug",
  mean: 0.301555,
  systems: 2,
  best: { system: "nostop_nolug_bm25", score: 0.322111 },
  top: [
    { system: "nostop_nolug_bm25", score: 0.322111 },
    { system: "nostop_nolug_tfidf", score: 0.280999 },
  ],
  dunnett: SAMPLE_COMPONENT_TOOLTIP.dunnett,
};

/** Let queued microtasks and zero-delay timers run. */
export async function settle(): Promise<void> {
  for (let i = 0; i < 3; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}
