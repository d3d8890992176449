/** View state and its pure transitions.
 *
 * The UI is a function of (server data, ViewState); every transition here
 * returns a fresh state object and never talks to the network, so the whole
 * triage flow is unit-testable without a browser.
 */

import type { CountsResponse, ItemDetail, ItemSummary } from "./types";

export interface LayerToggles {
  rgb: boolean;
  thermal: boolean;
  tiff: boolean;
  overlay: boolean;
  points: boolean;
}

export interface Banner {
  kind: "error" | "retry";
  message: string;
}

export interface ViewState {
  items: ItemSummary[];
  queue: string[]; // pending ids, manifest order
  currentId: string | null;
  current: ItemDetail | null;
  layers: LayerToggles;
  selectedProposal: number;
  pendingSave: boolean;
  banner: Banner | null;
  counts: CountsResponse | null;
}

export function initialState(): ViewState {
  return {
    items: [],
    queue: [],
    currentId: null,
    current: null,
    layers: { rgb: true, thermal: true, tiff: true, overlay: true, points: true },
    selectedProposal: 0,
    pendingSave: false,
    banner: null,
    counts: null,
  };
}

/** Queue order = manifest order filtered to pending. */
export function buildQueue(items: ItemSummary[]): string[] {
  return items.filter((i) => i.decision === "pending" && i.has_mask).map((i) => i.id);
}

export function withItems(state: ViewState, items: ItemSummary[]): ViewState {
  const queue = buildQueue(items);
  const currentId =
    state.currentId && items.some((i) => i.id === state.currentId)
      ? state.currentId
      : (queue[0] ?? null);
  return { ...state, items, queue, currentId };
}

/** Selected proposal defaults to the TOPSIS-chosen index. */
export function withDetail(state: ViewState, detail: ItemDetail): ViewState {
  return {
    ...state,
    currentId: detail.id,
    current: detail,
    selectedProposal: detail.report ? detail.report.chosen : 0,
    pendingSave: false,
  };
}

export function withCounts(state: ViewState, counts: CountsResponse): ViewState {
  return { ...state, counts };
}

export function toggleLayer(state: ViewState, layer: keyof LayerToggles): ViewState {
  return { ...state, layers: { ...state.layers, [layer]: !state.layers[layer] } };
}

export function selectProposal(state: ViewState, index: number): ViewState {
  if (index < 0 || index > 2) return state;
  return { ...state, selectedProposal: index };
}

/** Next pending id after `fromId` (wrapping to earlier items), or null. */
export function nextPending(queue: string[], fromId: string | null): string | null {
  if (queue.length === 0) return null;
  if (fromId === null) return queue[0];
  const at = queue.indexOf(fromId);
  if (at === -1) return queue[0];
  return queue[(at + 1) % queue.length] === fromId ? null : queue[(at + 1) % queue.length];
}

/** Arrow-key navigation within the queue, no wrap. */
export function navigate(state: ViewState, delta: -1 | 1): string | null {
  if (state.queue.length === 0) return null;
  const at = state.currentId ? state.queue.indexOf(state.currentId) : -1;
  const next = at === -1 ? 0 : Math.min(Math.max(at + delta, 0), state.queue.length - 1);
  return state.queue[next];
}

/** A 200-acknowledged decision: update the item, drop it from the queue. */
export function applyDecision(
  state: ViewState,
  id: string,
  decision: "accepted" | "excluded",
): ViewState {
  const items = state.items.map((i) => (i.id === id ? { ...i, decision } : i));
  return { ...state, items, queue: state.queue.filter((q) => q !== id), banner: null };
}

export type KeyAction =
  | { type: "decide"; decision: "accepted" | "excluded" }
  | { type: "select"; index: number }
  | { type: "nav"; delta: -1 | 1 }
  | null;

/** Keyboard: A = accept, X = exclude, 1/2/3 = select proposal, arrows = navigate. */
export function keyAction(key: string): KeyAction {
  switch (key) {
    case "a":
    case "A":
      return { type: "decide", decision: "accepted" };
    case "x":
    case "X":
      return { type: "decide", decision: "excluded" };
    case "1":
    case "2":
    case "3":
      return { type: "select", index: Number(key) - 1 };
    case "ArrowRight":
    case "ArrowDown":
      return { type: "nav", delta: 1 };
    case "ArrowLeft":
    case "ArrowUp":
      return { type: "nav", delta: -1 };
    default:
      return null;
  }
}

/** The override sent with a decision: only when the reviewer picked a
 * proposal other than the TOPSIS choice. */
export function overrideFor(state: ViewState): number | undefined {
  const report = state.current?.report;
  if (!report) return undefined;
  return state.selectedProposal === report.chosen ? undefined : state.selectedProposal;
}
