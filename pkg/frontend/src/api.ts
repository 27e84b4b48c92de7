/** Typed client for the review-service REST API.
 *
 * The fetch implementation is injectable so tests can fake the transport.
 * A 409 (stale revision, duplicate vote, terminal item) surfaces as
 * StaleRevisionError so callers can run the reload-and-retry flow.
 */
import type {
  Decision,
  ItemDetail,
  QueueEntry,
  Scores,
  StatsSnapshot,
  VerdictResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export class StaleRevisionError extends ApiError {
  constructor(message: string) {
    super(409, message);
    this.name = "StaleRevisionError";
  }
}

export class OfflineError extends Error {
  constructor(cause: unknown) {
    super(`review service unreachable: ${String(cause)}`);
    this.name = "OfflineError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ReviewApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (cause) {
      throw new OfflineError(cause);
    }
    const body = await response.text();
    if (response.status === 409) {
      throw new StaleRevisionError(detailOf(body));
    }
    if (!response.ok) {
      throw new ApiError(response.status, detailOf(body));
    }
    return JSON.parse(body) as T;
  }

  queue(raterId: string): Promise<QueueEntry[]> {
    return this.request(`/api/queue?rater_id=${encodeURIComponent(raterId)}`);
  }

  item(itemId: string): Promise<ItemDetail> {
    return this.request(`/api/items/${encodeURIComponent(itemId)}`);
  }

  submitVerdict(
    itemId: string,
    raterId: string,
    decision: Decision,
    revision: number,
    scores: Scores | null,
  ): Promise<VerdictResponse> {
    return this.request(`/api/items/${encodeURIComponent(itemId)}/verdict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ rater_id: raterId, decision, scores, revision }),
    });
  }

  revise(itemId: string, raterId: string, revision: number): Promise<VerdictResponse> {
    return this.request(`/api/items/${encodeURIComponent(itemId)}/revise`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ rater_id: raterId, revision }),
    });
  }

  adjudicate(
    itemId: string,
    raterId: string,
    decision: Decision,
    revision: number,
  ): Promise<VerdictResponse> {
    return this.request(`/api/items/${encodeURIComponent(itemId)}/adjudicate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ rater_id: raterId, decision, revision }),
    });
  }

  stats(): Promise<StatsSnapshot> {
    return this.request("/api/stats");
  }

  figureUrl(imageUrl: string): string {
    return `${this.baseUrl}${imageUrl}`;
  }
}

function detailOf(body: string): string {
  try {
    const parsed = JSON.parse(body) as { detail?: unknown };
    if (typeof parsed.detail === "string") return parsed.detail;
    return JSON.stringify(parsed.detail ?? body);
  } catch {
    return body;
  }
}
