import { afterEach, beforeEach, describe, expect, it } from "vitest";
import {
  ApiError,
  fetchCatalog,
  fetchComponentTooltip,
  fetchDiagram,
  isAbort,
  LatestWins,
} from "../src/api";
import { toRequest, defaultState } from "../src/state";
import { CATALOG, FakeService, installFakeService } from "./helpers";

describe("LatestWins", () => {
  it("aborts the older call when a newer one starts", async () => {
    const wins = new LatestWins();
    let resolveFirst!: (value: string) => void;
    let firstSignal!: AbortSignal;

    const first = wins.run(
      (signal) =>
        new Promise<string>((resolve) => {
          firstSignal = signal;
          resolveFirst = resolve;
        }),
    );
    const second = wins.run(async () => "second");

    expect(firstSignal.aborted).toBe(true);
    resolveFirst("first"); // arrives late: must not be delivered
    await expect(first).rejects.toSatisfy(isAbort);
    await expect(second).resolves.toBe("second");
  });

  it("abort() cancels the in-flight call", async () => {
    const wins = new LatestWins();
    let resolve!: (value: number) => void;
    const pending = wins.run(
      (signal) =>
        new Promise<number>((r) => {
          resolve = r;
          void signal;
        }),
    );
    wins.abort();
    resolve(7);
    await expect(pending).rejects.toSatisfy(isAbort);
  });

  it("delivers sequential calls normally", async () => {
    const wins = new LatestWins();
    await expect(wins.run(async () => 1)).resolves.toBe(1);
    await expect(wins.run(async () => 2)).resolves.toBe(2);
  });
});

describe("isAbort", () => {
  it("matches only AbortError exceptions", () => {
    expect(isAbort(new DOMException("x", "AbortError"))).toBe(true);
    expect(isAbort(new DOMException("x", "NotFoundError"))).toBe(false);
    expect(isAbort(new Error("AbortError"))).toBe(false);
  });
});

describe("client", () => {
  let service: FakeService;

  beforeEach(() => {
    service = installFakeService();
  });

  afterEach(() => {
    service.restore();
  });

  it("fetches the catalog", async () => {
    await expect(fetchCatalog()).resolves.toEqual(CATALOG);
  });

  it("raises ApiError with the envelope's code, field, and status", async () => {
    service.failNext = {
      status: 422,
      code: "empty_axis",
      message: "axis 'model' has no visible levels",
    };
    const request = toRequest(defaultState(CATALOG));
    const error = await fetchDiagram(request).then(
      () => null,
      (e: unknown) => e,
    );
    expect(error).toBeInstanceOf(ApiError);
    const apiError = error as ApiError;
    expect(apiError.status).toBe(422);
    expect(apiError.code).toBe("empty_axis");
    expect(apiError.field).toBeNull();
    expect(apiError.message).toBe("axis 'model' has no visible levels");
  });

  it("sends the view state alongside tooltip coordinates", async () => {
    const request = toRequest(defaultState(CATALOG));
    await fetchComponentTooltip(request, "stemmer", "porter");
    const params = new URL(service.calls[0].url, "http://localhost").searchParams;
    expect(params.get("axis")).toBe("stemmer");
    expect(params.get("level")).toBe("porter");
    expect(JSON.parse(params.get("state")!)).toEqual(request);
  });
});
