/** Wire types mirroring the review service's JSON responses. */

export type Decision = "pending" | "accepted" | "excluded";

export interface ItemSummary {
  id: string;
  burn_location: string;
  decision: Decision;
  has_mask: boolean;
  has_report: boolean;
}

export interface ItemsPage {
  items: ItemSummary[];
  total: number;
  page: number;
  page_size: number;
  pages: number;
}

/** TOPSIS selection report: criteria is [proposal][criterion]. */
export interface SelectionReport {
  criteria: number[][];
  weights: number[];
  closeness: number[];
  chosen: number;
}

export interface PointEntry {
  x: number;
  y: number;
  mean: number;
  dist: number | null;
}

export interface PointsFile {
  tau: number | null;
  positives: PointEntry[];
  negatives: PointEntry[];
  edge_pixels: number;
}

export interface ItemImages {
  rgb: string;
  thermal: string;
  tiff: string;
  overlays: string[];
  chosen_overlay: string;
}

export interface ItemDetail extends ItemSummary {
  reason: string | null;
  images: ItemImages;
  report: SelectionReport | null;
  points: PointsFile | null;
}

export interface Tally {
  excluded: number;
  final: number;
  pending: number;
}

export interface CountsResponse {
  locations: Record<string, Tally>;
  total: Tally;
}

export interface DecisionRequest {
  decision: "accepted" | "excluded";
  chosen_override?: number;
  reason?: string;
}

export interface DecisionResponse extends ItemSummary {
  reason: string | null;
  mask_path: string;
}
