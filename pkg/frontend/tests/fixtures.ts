import type { CountsResponse, ItemDetail, ItemSummary, SelectionReport } from "../src/types";

export function summary(id: string, decision: ItemSummary["decision"] = "pending"): ItemSummary {
  return { id, burn_location: "north_burn", decision, has_mask: true, has_report: true };
}

/** Numbers chosen to have non-trivial decimal expansions so "verbatim"
 * rendering is actually exercised. */
export const REPORT: SelectionReport = {
  criteria: [
    [1.0, 0.8571428571428571, 0.0, 0.9, 1.0],
    [0.6428571428571429, 0.55, 12.053571428571429, 0.95, 0.8128342245989305],
    [0.41025641025641024, 0.35, 500.0, 0.99, 0.6014319809068711],
  ],
  weights: [0.15, 0.4, 0.15, 0.15, 0.15],
  closeness: [0.9045179903966981, 0.7974218904307739, 0.0373082473901443],
  chosen: 0,
};

export function detail(id: string, overrides: Partial<ItemDetail> = {}): ItemDetail {
  return {
    ...summary(id),
    reason: null,
    images: {
      rgb: `/items/${id}/image/rgb`,
      thermal: `/items/${id}/image/thermal`,
      tiff: `/items/${id}/image/tiff`,
      overlays: [0, 1, 2].map((k) => `/items/${id}/image/overlay_p${k}`),
      chosen_overlay: `/items/${id}/image/overlay_chosen`,
    },
    report: REPORT,
    points: {
      tau: 27.34375,
      positives: [
        { x: 22, y: 22, mean: 401.2, dist: 3.0 },
        { x: 27, y: 27, mean: 399.9, dist: 7.0 },
      ],
      negatives: [{ x: 4, y: 4, mean: 19.8, dist: 11.4 }],
      edge_pixels: 52,
    },
    ...overrides,
  };
}

export const COUNTS: CountsResponse = {
  locations: { north_burn: { excluded: 1, final: 2, pending: 3 } },
  total: { excluded: 1, final: 2, pending: 3 },
};

export const resolve = (path: string, base?: "rgb" | "tiff") =>
  `http://svc${path}${base ? `?base=${base}` : ""}`;
