import { describe, expect, it } from "vitest";

import { ApiError, OfflineError, ReviewApi, StaleRevisionError } from "../src/api.js";

function fakeFetch(status: number, body: unknown) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const impl = async (url: string, init?: RequestInit) => {
    calls.push({ url, init });
    return new Response(JSON.stringify(body), { status });
  };
  return { impl, calls };
}

describe("ReviewApi", () => {
  it("builds queue requests with the rater id", async () => {
    const { impl, calls } = fakeFetch(200, []);
    const api = new ReviewApi("http://svc", impl);
    await api.queue("alice smith");
    expect(calls[0]!.url).toBe("http://svc/api/queue?rater_id=alice%20smith");
  });

  it("posts verdicts with the exact revision and scores", async () => {
    const { impl, calls } = fakeFetch(200, { item_id: "i", state: "in_review", revision: 0 });
    const api = new ReviewApi("", impl);
    await api.submitVerdict("i", "alice", "accept", 3,
      { correctness: 5, completeness: 3, clarity: 1 });
    const body = JSON.parse(String(calls[0]!.init!.body));
    expect(body).toEqual({
      rater_id: "alice",
      decision: "accept",
      scores: { correctness: 5, completeness: 3, clarity: 1 },
      revision: 3,
    });
  });

  it("maps 409 to StaleRevisionError with the service detail", async () => {
    const { impl } = fakeFetch(409, { detail: "item is at revision 1" });
    const api = new ReviewApi("", impl);
    await expect(api.submitVerdict("i", "a", "accept", 0, null))
      .rejects.toThrowError(StaleRevisionError);
  });

  it("maps other failures to ApiError with status", async () => {
    const { impl } = fakeFetch(404, { detail: "no curation item" });
    const api = new ReviewApi("", impl);
    const failure = api.item("missing");
    await expect(failure).rejects.toThrowError(ApiError);
    await expect(failure).rejects.toMatchObject({ status: 404 });
  });

  it("wraps transport failures as OfflineError", async () => {
    const api = new ReviewApi("", async () => {
      throw new TypeError("fetch failed");
    });
    await expect(api.stats()).rejects.toThrowError(OfflineError);
  });
});
