/** Thin typed client over the review service HTTP/JSON API. */

import type {
  CountsResponse,
  Decision,
  DecisionRequest,
  DecisionResponse,
  ItemDetail,
  ItemsPage,
} from "./types";

/** Non-2xx response; carries the HTTP status and the server's error text. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ListParams {
  status?: Decision;
  location?: string;
  page?: number;
  page_size?: number;
}

export class ReviewApi {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    let body: unknown = null;
    try {
      body = await resp.json();
    } catch {
      body = null;
    }
    if (!resp.ok) {
      const message =
        body && typeof body === "object" && "error" in body
          ? String((body as { error: unknown }).error)
          : `HTTP ${resp.status}`;
      throw new ApiError(resp.status, message);
    }
    return body as T;
  }

  listItems(params: ListParams = {}): Promise<ItemsPage> {
    const q = new URLSearchParams();
    if (params.status) q.set("status", params.status);
    if (params.location) q.set("location", params.location);
    if (params.page !== undefined) q.set("page", String(params.page));
    if (params.page_size !== undefined) q.set("page_size", String(params.page_size));
    const qs = q.toString();
    return this.request<ItemsPage>(`/items${qs ? `?${qs}` : ""}`);
  }

  /** Every pending item in manifest order (walks all pages). */
  async listAllItems(): Promise<ItemsPage["items"]> {
    const first = await this.listItems({ page: 1, page_size: 200 });
    const items = [...first.items];
    for (let page = 2; page <= first.pages; page++) {
      const next = await this.listItems({ page, page_size: 200 });
      items.push(...next.items);
    }
    return items;
  }

  getItem(id: string): Promise<ItemDetail> {
    return this.request<ItemDetail>(`/items/${encodeURIComponent(id)}`);
  }

  postDecision(id: string, body: DecisionRequest): Promise<DecisionResponse> {
    return this.request<DecisionResponse>(`/items/${encodeURIComponent(id)}/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getCounts(): Promise<CountsResponse> {
    return this.request<CountsResponse>("/counts");
  }

  imageUrl(path: string, base?: "rgb" | "tiff"): string {
    return this.base + path + (base ? `?base=${base}` : "");
  }
}
