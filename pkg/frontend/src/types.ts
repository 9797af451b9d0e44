/** Wire types mirroring the service's JSON schemas. The UI never computes
 * statistics: everything below arrives fully evaluated from the API. */

export type Axis = "stoplist" | "stemmer" | "model";
export const AXES: readonly Axis[] = ["stoplist", "stemmer", "model"];

export type TopicMode = "average" | "single";
export type Scaling = "full_range" | "min_max";
export type ColorSchema = "by_component" | "by_value";

export interface ComponentRef {
  axis: Axis;
  level: string;
}

/** Body of POST /api/diagram; also the `state` query parameter of the
 * tooltip endpoints (JSON-encoded). */
export interface ExplorationRequest {
  collection_id: string;
  measure_id: string;
  topic_mode?: TopicMode;
  topic_id?: string;
  visible_levels?: Partial<Record<Axis, string[]>>;
  axis_order?: Axis[];
  scaling?: Scaling;
  color_schema?: ColorSchema;
  curve_shape?: string;
  selected?: ComponentRef[];
}

// --- catalog ---------------------------------------------------------------

export interface CollectionInfo {
  collection_id: string;
  topics: string[];
  axes: Record<Axis, string[]>;
  /** model level -> family name */
  model_families: Record<string, string>;
  measures: string[];
  reserved_measures: string[];
  separator: string;
  systems: number;
  loaded_systems: number;
}

export interface Catalog {
  axes: Axis[];
  collections: CollectionInfo[];
}

// --- diagram document --------------------------------------------------------

export interface NodeDoc {
  level: string;
  weight: number;
  color: string;
  mean: number;
  systems: number;
}

export interface AxisDoc {
  axis: Axis;
  nodes: NodeDoc[];
}

export interface BinDoc {
  index: number;
  lo: number;
  hi: number;
  count: number;
  color: string;
}

export interface StageLinkDoc {
  source: string;
  target: string;
  weight: number;
  systems: number;
  color: string;
}

export interface StageDoc {
  source_axis: Axis;
  target_axis: Axis;
  links: StageLinkDoc[];
}

export interface FinalLinkDoc {
  system: string;
  levels: Record<Axis, string>;
  score: number;
  bin: number;
  color: string;
}

export interface SankeyDoc {
  collection_id: string;
  measure_id: string;
  topic_id: string | null;
  axis_order: Axis[];
  scaling: Scaling;
  color_schema: ColorSchema;
  curve_shape: string;
  range: { lo: number; hi: number };
  axes: AxisDoc[];
  bins: BinDoc[];
  stages: StageDoc[];
  final_links: FinalLinkDoc[];
  highlighted: string[];
  selected: ComponentRef[];
}

// --- tooltips ----------------------------------------------------------------

export interface ScoredSystem {
  system: string;
  score: number;
}

export interface DunnettEntry {
  system: string;
  mean: number;
  /** null when the pooled variance is zero (an infinite statistic) */
  t: number | null;
  significant: boolean;
  is_control: boolean;
  in_top_group: boolean;
}

export interface DunnettResponse {
  control: string;
  alpha: number;
  df: number;
  n_topics: number;
  /** null when there is a single system and nothing to compare */
  critical_value: number | null;
  top_group: string[];
  entries: DunnettEntry[];
}

export interface ComponentTooltip {
  axis: Axis;
  level: string;
  mean: number;
  systems: number;
  best: ScoredSystem;
  top: ScoredSystem[];
  dunnett: DunnettResponse;
}

export interface LinkTooltip {
  axis_a: Axis;
  level_a: string;
  axis_b: Axis;
  level_b: string;
  mean: number;
  systems: number;
  best: ScoredSystem;
  top: ScoredSystem[];
  dunnett: DunnettResponse;
}

export interface ErrorEnvelope {
  error: { code: string; field: string | null; message: string };
}
