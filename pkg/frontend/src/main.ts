/** Browser bootstrap: full re-render on every state change (the view is a
 * pure function of state, so this stays correct by construction). */

import { ReviewApi } from "./api";
import { App } from "./app";
import { renderApp } from "./render";
import { toDom } from "./vdom";

function serviceBase(): string {
  const param = new URLSearchParams(window.location.search).get("service");
  return param ?? window.location.origin;
}

function positionPointMarkers(root: HTMLElement): void {
  for (const layer of root.querySelectorAll<HTMLElement>(".points-layer")) {
    const img = layer.parentElement?.querySelector<HTMLImageElement>(".pane-image");
    if (!img) continue;
    const place = () => {
      if (!img.naturalWidth || !img.naturalHeight) return;
      for (const marker of layer.querySelectorAll<HTMLElement>(".point-marker")) {
        const x = Number(marker.dataset.x);
        const y = Number(marker.dataset.y);
        marker.style.left = `${(x / img.naturalWidth) * 100}%`;
        marker.style.top = `${(y / img.naturalHeight) * 100}%`;
      }
    };
    if (img.complete) place();
    else img.addEventListener("load", place, { once: true });
  }
}

function mount(): void {
  const api = new ReviewApi(serviceBase());
  const app = new App(api);
  const rootEl = document.getElementById("app");
  if (!rootEl) throw new Error("missing #app element");

  const rerender = () => {
    const tree = renderApp(app.state, (path, base) => api.imageUrl(path, base));
    rootEl.replaceChildren(toDom(tree));
    positionPointMarkers(rootEl);
  };
  app.onChange = rerender;

  rootEl.addEventListener("click", (ev) => {
    const target = (ev.target as HTMLElement).closest<HTMLElement>("[data-action]");
    if (!target) return;
    const action = target.dataset.action;
    if (action === "toggle-layer") {
      app.toggle(target.dataset.layer as never);
    } else if (action === "select-proposal") {
      app.select(Number(target.dataset.index));
    } else if (action === "accept") {
      void app.submit("accepted");
    } else if (action === "exclude") {
      void app.submit("excluded");
    } else if (action === "retry") {
      void app.load();
    }
  });

  window.addEventListener("keydown", (ev) => {
    if (ev.target instanceof HTMLInputElement || ev.target instanceof HTMLTextAreaElement) {
      return;
    }
    void app.handleKey(ev.key);
  });

  rerender();
  void app.load();
}

mount();
