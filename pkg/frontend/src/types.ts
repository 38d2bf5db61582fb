/** Shapes of the per-trial JSON documents the pipeline emits
 * (schema tag `serpaoi.trial_result@1`). */

export interface TrialMeta {
  trial_id: string;
  viewport_width: number;
  viewport_height: number;
  screenshot_width: number;
  screenshot_height: number;
  query_text?: string;
  entry_timestamp?: number | null;
}

export interface Aoi {
  aoi_id: string;
  etype: string;
  position: number;
  x: number;
  y: number;
  w: number;
  h: number;
  flavor: string;
  source: string;
  fixated?: boolean;
  n_fixations?: number;
  regressive?: boolean;
  above_fold?: boolean;
  n_clicks_attributed?: number;
}

export interface Fixation {
  x: number;
  y: number;
  start: number;
  end: number;
}

export interface CursorPoint {
  t: number;
  x: number;
  y: number;
  kind: string;
}

export interface Click {
  t: number;
  x: number;
  y: number;
  is_final: boolean;
}

export interface Replay {
  screenshot?: string;
  fixations: Fixation[];
  cursor: CursorPoint[];
  clicks: Click[];
  ad_rects?: unknown[];
  channels?: Record<string, number[]>;
}

export interface TrialDoc {
  schema: string;
  trial_id: string;
  meta: TrialMeta | null;
  dropped: boolean;
  click_status: { main_axis: boolean; reason: string };
  aois: Record<string, Aoi[]>;
  replay: Replay;
  [extra: string]: unknown;
}

export type Flavor = "typed" | "typed_gapfill" | "organic_hybrid";

export const FLAVORS: Flavor[] = ["typed", "typed_gapfill", "organic_hybrid"];
