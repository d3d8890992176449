import { describe, expect, it } from "vitest";

import { ApiError, ReviewApi } from "../src/api";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function recordingFetch(responses: Response[]) {
  const calls: { url: string; init?: RequestInit }[] = [];
  const fn = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    const next = responses.shift();
    if (!next) throw new TypeError("fetch failed");
    return next;
  };
  return { calls, fn };
}

describe("ReviewApi", () => {
  it("builds the items query string", async () => {
    const { calls, fn } = recordingFetch([
      jsonResponse(200, { items: [], total: 0, page: 2, page_size: 10, pages: 1 }),
    ]);
    const api = new ReviewApi("http://svc/", fn);
    await api.listItems({ status: "excluded", location: "north", page: 2, page_size: 10 });
    expect(calls[0].url).toBe("http://svc/items?status=excluded&location=north&page=2&page_size=10");
  });

  it("posts decisions as JSON with the override", async () => {
    const { calls, fn } = recordingFetch([jsonResponse(200, { id: "a" })]);
    const api = new ReviewApi("http://svc", fn);
    await api.postDecision("a", { decision: "accepted", chosen_override: 2 });
    expect(calls[0].url).toBe("http://svc/items/a/decision");
    expect(calls[0].init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      decision: "accepted",
      chosen_override: 2,
    });
  });

  it("surfaces server errors with status and message", async () => {
    const { fn } = recordingFetch([jsonResponse(409, { error: "illegal transition" })]);
    const api = new ReviewApi("http://svc", fn);
    const err = await api.postDecision("a", { decision: "accepted" }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.message).toBe("illegal transition");
  });

  it("propagates transport failures as-is (not ApiError)", async () => {
    const { fn } = recordingFetch([]);
    const api = new ReviewApi("http://svc", fn);
    const err = await api.getCounts().catch((e) => e);
    expect(err).toBeInstanceOf(TypeError);
  });

  it("walks all pages in listAllItems", async () => {
    const mk = (ids: string[], page: number) =>
      jsonResponse(200, {
        items: ids.map((id) => ({
          id,
          burn_location: "x",
          decision: "pending",
          has_mask: true,
          has_report: true,
        })),
        total: 3,
        page,
        page_size: 200,
        pages: 2,
      });
    const { fn } = recordingFetch([mk(["a", "b"], 1), mk(["c"], 2)]);
    const api = new ReviewApi("http://svc", fn);
    const items = await api.listAllItems();
    expect(items.map((i) => i.id)).toEqual(["a", "b", "c"]);
  });

  it("builds image URLs with an optional base", () => {
    const api = new ReviewApi("http://svc");
    expect(api.imageUrl("/items/a/image/rgb")).toBe("http://svc/items/a/image/rgb");
    expect(api.imageUrl("/items/a/image/overlay_p1", "tiff")).toBe(
      "http://svc/items/a/image/overlay_p1?base=tiff",
    );
  });
});
