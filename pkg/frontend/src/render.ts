/** Pure view builders: (server data, view state) -> VNode tree.
 *
 * No fetching, no mutation; the score panel prints the selection report's
 * numbers verbatim so what the reviewer sees is exactly what the pipeline
 * recorded.
 */

import type { CountsResponse, ItemDetail, PointsFile } from "./types";
import type { ViewState } from "./state";
import { h, VNode } from "./vdom";

export const CRITERION_NAMES = [
  "IoU vs Otsu",
  "IoU vs thermal",
  "Mean temp diff (C)",
  "Confidence",
  "SSIM vs Otsu",
];

export type UrlResolver = (path: string, base?: "rgb" | "tiff") => string;

export function renderCountsWidget(counts: CountsResponse | null): VNode {
  if (!counts) return h("div", { class: "counts-widget" }, "counts unavailable");
  const t = counts.total;
  return h(
    "div",
    { class: "counts-widget" },
    h("span", { class: "count-pending" }, `pending ${t.pending}`),
    h("span", { class: "count-final" }, `accepted ${t.final}`),
    h("span", { class: "count-excluded" }, `excluded ${t.excluded}`),
  );
}

export function renderBanner(state: ViewState): VNode | null {
  if (!state.banner) return null;
  return h(
    "div",
    { class: `banner banner-${state.banner.kind}`, role: "alert" },
    state.banner.message,
    state.banner.kind === "retry"
      ? h("button", { class: "retry-button", "data-action": "retry" }, "retry")
      : "",
  );
}

function pointMarkers(points: PointsFile | null): VNode[] {
  if (!points) return [];
  const mark = (cls: string, p: { x: number; y: number; dist: number | null }) =>
    h("div", {
      class: `point-marker ${cls}`,
      "data-x": String(p.x),
      "data-y": String(p.y),
      title: `(${p.x}, ${p.y}) dist ${p.dist ?? "-"}`,
    });
  return [
    ...points.positives.map((p) => mark("point-positive", p)),
    ...points.negatives.map((p) => mark("point-negative", p)),
  ];
}

function pane(
  name: string,
  src: string,
  visible: boolean,
  markers: VNode[] = [],
): VNode {
  return h(
    "div",
    { class: `pane pane-${name}${visible ? "" : " hidden"}`, "data-pane": name },
    h("div", { class: "pane-label" }, name),
    h(
      "div",
      { class: "pane-body" },
      h("img", { class: "pane-image", src, alt: name, draggable: "false" }),
      ...(markers.length ? [h("div", { class: "points-layer" }, ...markers)] : []),
    ),
  );
}

export function renderPanes(detail: ItemDetail, state: ViewState, resolve: UrlResolver): VNode {
  const k = state.selectedProposal;
  const overlayOn = state.layers.overlay && detail.report !== null;
  const rgbSrc = overlayOn
    ? resolve(detail.images.overlays[k], "rgb")
    : resolve(detail.images.rgb);
  const tiffSrc = overlayOn
    ? resolve(detail.images.overlays[k], "tiff")
    : resolve(detail.images.tiff);
  const markers = state.layers.points ? pointMarkers(detail.points) : [];
  return h(
    "div",
    { class: "panes" },
    pane("rgb", rgbSrc, state.layers.rgb, markers),
    pane("thermal", resolve(detail.images.thermal), state.layers.thermal),
    pane("tiff", tiffSrc, state.layers.tiff),
  );
}

export function renderProposalTabs(detail: ItemDetail, state: ViewState): VNode {
  const report = detail.report;
  if (!report) {
    return h("div", { class: "proposal-tabs empty" }, "no proposals (no-fire frame)");
  }
  const tabs = report.closeness.map((c, k) => {
    const classes = ["proposal-tab"];
    if (k === state.selectedProposal) classes.push("selected");
    if (k === report.chosen) classes.push("chosen");
    return h(
      "button",
      { class: classes.join(" "), "data-action": "select-proposal", "data-index": String(k) },
      h("span", { class: "tab-title" }, `Proposal ${k + 1}`),
      h("span", { class: "tab-closeness" }, String(c)),
      k === report.chosen ? h("span", { class: "tab-star" }, " *") : "",
    );
  });
  return h("div", { class: "proposal-tabs" }, ...tabs);
}

export function renderScorePanel(detail: ItemDetail, state: ViewState): VNode {
  const report = detail.report;
  if (!report) return h("div", { class: "score-panel empty" }, "no selection report");
  const header = h(
    "tr",
    {},
    h("th", {}, "criterion"),
    h("th", {}, "weight"),
    ...report.closeness.map((_, k) =>
      h("th", { class: k === report.chosen ? "chosen" : "" }, `P${k + 1}`),
    ),
  );
  const rows = CRITERION_NAMES.map((name, j) =>
    h(
      "tr",
      {},
      h("td", { class: "criterion-name" }, name),
      h("td", { class: "criterion-weight" }, String(report.weights[j])),
      ...report.criteria.map((row, k) =>
        h(
          "td",
          { class: `criterion-value${k === report.chosen ? " chosen" : ""}` },
          String(row[j]),
        ),
      ),
    ),
  );
  const closenessRow = h(
    "tr",
    { class: "closeness-row" },
    h("td", {}, "closeness"),
    h("td", {}, ""),
    ...report.closeness.map((c, k) =>
      h("td", { class: `closeness-value${k === report.chosen ? " chosen" : ""}` }, String(c)),
    ),
  );
  return h(
    "div",
    { class: "score-panel" },
    h("table", { class: "score-table" }, header, ...rows, closenessRow),
  );
}

function hasPrompts(points: PointsFile | null): boolean {
  return !!points && points.positives.length + points.negatives.length > 0;
}

export function renderItem(detail: ItemDetail, state: ViewState, resolve: UrlResolver): VNode {
  const position = state.queue.indexOf(detail.id);
  return h(
    "div",
    { class: "item-view", "data-item-id": detail.id },
    h(
      "div",
      { class: "item-header" },
      h("span", { class: "item-id" }, detail.id),
      h("span", { class: "item-location" }, detail.burn_location),
      h("span", { class: `decision decision-${detail.decision}` }, detail.decision),
      hasPrompts(detail.points) ? "" : h("span", { class: "badge no-prompts" }, "no prompts"),
      position >= 0
        ? h("span", { class: "queue-position" }, `${position + 1}/${state.queue.length} pending`)
        : "",
      state.pendingSave ? h("span", { class: "badge pending-save" }, "saving...") : "",
    ),
    renderBanner(state) ?? "",
    h(
      "div",
      { class: "layer-bar" },
      ...(["rgb", "thermal", "tiff", "overlay", "points"] as const).map((layer) =>
        h(
          "button",
          {
            class: `layer-toggle${state.layers[layer] ? " active" : ""}`,
            "data-action": "toggle-layer",
            "data-layer": layer,
          },
          layer,
        ),
      ),
    ),
    renderPanes(detail, state, resolve),
    renderProposalTabs(detail, state),
    renderScorePanel(detail, state),
    h(
      "div",
      { class: "decision-bar" },
      h("button", { class: "accept-button", "data-action": "accept" }, "Accept (A)"),
      h("button", { class: "exclude-button", "data-action": "exclude" }, "Exclude (X)"),
      h("span", { class: "hint" }, "1/2/3 pick proposal, arrows navigate"),
    ),
  );
}

export function renderApp(state: ViewState, resolve: UrlResolver): VNode {
  const body = state.current
    ? renderItem(state.current, state, resolve)
    : h(
        "div",
        { class: "empty-queue" },
        state.items.length === 0 ? "loading..." : "queue empty: nothing pending",
      );
  return h(
    "div",
    { class: "app" },
    h(
      "div",
      { class: "app-header" },
      h("span", { class: "app-title" }, "firelabel review"),
      renderCountsWidget(state.counts),
    ),
    body,
  );
}
