/** Controller wiring the API client, view state, and renderer together.
 *
 * At most one decision POST is in flight; the UI advances optimistically on
 * a 200 and rolls back to a banner (queue position untouched) on HTTP
 * errors or network failure, so no decision ever exists client-side only.
 */

import { ApiError, ReviewApi } from "./api";
import {
  applyDecision,
  initialState,
  keyAction,
  navigate,
  nextPending,
  overrideFor,
  selectProposal,
  toggleLayer,
  ViewState,
  withCounts,
  withDetail,
  withItems,
} from "./state";
import type { LayerToggles } from "./state";

/** The slice of ReviewApi the controller needs (swap in a fake for tests). */
export type ReviewClient = Pick<
  ReviewApi,
  "listAllItems" | "getItem" | "postDecision" | "getCounts" | "imageUrl"
>;

export class App {
  state: ViewState = initialState();
  onChange: (state: ViewState) => void = () => {};

  constructor(private readonly api: ReviewClient) {}

  private set(next: ViewState): void {
    this.state = next;
    this.onChange(next);
  }

  async load(): Promise<void> {
    const items = await this.api.listAllItems();
    this.set(withItems(this.state, items));
    this.set(withCounts(this.state, await this.api.getCounts()));
    if (this.state.currentId) {
      await this.open(this.state.currentId);
    }
  }

  async open(id: string): Promise<void> {
    try {
      const detail = await this.api.getItem(id);
      this.set(withDetail(this.state, detail));
    } catch (err) {
      if (err instanceof ApiError) {
        this.set({
          ...this.state,
          currentId: id,
          current: null,
          banner: { kind: "error", message: `${id}: ${err.message}` },
        });
        return;
      }
      this.set({
        ...this.state,
        banner: { kind: "retry", message: "failed to fetch item; check the connection" },
      });
    }
  }

  toggle(layer: keyof LayerToggles): void {
    this.set(toggleLayer(this.state, layer));
  }

  select(index: number): void {
    this.set(selectProposal(this.state, index));
  }

  async nav(delta: -1 | 1): Promise<void> {
    const id = navigate(this.state, delta);
    if (id && id !== this.state.currentId) {
      await this.open(id);
    }
  }

  /** Accept/exclude the current item; on 200 advance to the next pending. */
  async submit(decision: "accepted" | "excluded", reason?: string): Promise<void> {
    const current = this.state.current;
    if (!current || this.state.pendingSave) return;
    const override = overrideFor(this.state);
    this.set({ ...this.state, pendingSave: true });
    try {
      await this.api.postDecision(current.id, {
        decision,
        ...(override !== undefined ? { chosen_override: override } : {}),
        ...(reason !== undefined ? { reason } : {}),
      });
    } catch (err) {
      if (err instanceof ApiError) {
        // 409/422: surface inline, keep the queue position
        this.set({
          ...this.state,
          pendingSave: false,
          banner: { kind: "error", message: err.message },
        });
      } else {
        // transport failure: nothing was recorded; offer retry, drop nothing
        this.set({
          ...this.state,
          pendingSave: false,
          banner: { kind: "retry", message: "decision not saved (offline?); retry" },
        });
      }
      return;
    }
    const position = this.state.queue.indexOf(current.id);
    const afterDecision = applyDecision(
      { ...this.state, pendingSave: false },
      current.id,
      decision,
    );
    // advance to the item that followed the decided one in manifest order
    const queue = afterDecision.queue;
    const nextId =
      queue.length === 0
        ? null
        : (queue[Math.min(Math.max(position, 0), queue.length - 1)] ?? nextPending(queue, null));
    this.set(afterDecision);
    try {
      this.set(withCounts(this.state, await this.api.getCounts()));
    } catch {
      // counts refresh is cosmetic; the decision is already durable
    }
    if (nextId) {
      await this.open(nextId);
    } else {
      this.set({ ...this.state, currentId: null, current: null });
    }
  }

  /** Keyboard dispatch: A accept, X exclude, 1/2/3 proposal, arrows navigate. */
  async handleKey(key: string): Promise<void> {
    const action = keyAction(key);
    if (!action) return;
    if (action.type === "decide") {
      await this.submit(action.decision);
    } else if (action.type === "select") {
      this.select(action.index);
    } else {
      await this.nav(action.delta);
    }
  }
}
