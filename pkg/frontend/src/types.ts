/** Wire types mirroring the review-service REST API. */

export interface QueueEntry {
  item_id: string;
  category: string;
  state: string;
  revision: number;
  question: string;
}

export interface PanelBox {
  panel_id: string;
  label: string | null;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface FigureInfo {
  image_url: string;
  width: number;
  height: number;
  panels: PanelBox[];
}

export interface WireVerdict {
  rater_id: string;
  decision: string;
  scores: Scores | null;
  revision: number;
  timestamp: number;
}

export interface ItemDetail {
  item_id: string;
  category: string;
  state: string;
  revision: number;
  record: InstructionRecord;
  verdicts: WireVerdict[];
  figure: FigureInfo | null;
}

export interface InstructionRecord {
  record_id: string;
  task_type: string;
  images: string[];
  context: string;
  question: string;
  answer: string;
  options: string[] | null;
  correct_option: string | null;
  provenance: Record<string, unknown>;
}

export type Score = 1 | 3 | 5;

export interface Scores {
  correctness: Score;
  completeness: Score;
  clarity: Score;
}

export type Decision = "accept" | "reject";

export interface VerdictResponse {
  item_id: string;
  state: string;
  revision: number;
}

export interface StageMeans {
  [stage: string]: {
    [dimension: string]: { mean: number; sd: number; rendered: string };
  };
}

export interface RatingsReport {
  icc_overall: number;
  icc_correctness: number;
  icc_completeness: number;
  icc_clarity: number;
  exact_pct: number;
  within_one_pct: number;
  per_stage_means: StageMeans;
}

export interface StatsSnapshot {
  per_state: Record<string, number>;
  agreement_pct: number | null;
  ratings_report: RatingsReport | null;
}
