import { describe, expect, it } from "vitest";

import { MAX_PINNED, SessionState } from "../src/state";
import type { GeneratedSample, GenerateRequest, GenerateResponse } from "../src/types";
import generateFixture from "./fixtures/generate.json";

const request = generateFixture.request as GenerateRequest;
const response = generateFixture.response as GenerateResponse;
const sample: GeneratedSample = response.samples[0];

describe("SessionState", () => {
  it("appends history entries in order", () => {
    const s = new SessionState();
    s.pushHistory(request, response);
    s.pushHistory({ ...request, n: 1 }, response);
    expect(s.history.length).toBe(2);
    expect(s.history[0].request.n).toBe(2);
    expect(s.history[1].request.n).toBe(1);
  });

  it("exposes no way to rewrite history", () => {
    const s = new SessionState();
    s.pushHistory(request, response);
    const mutators = Object.getOwnPropertyNames(SessionState.prototype)
        .filter((name) => /pop|shift|splice|clear|remove|reset/i.test(name));
    expect(mutators).toEqual([]);
  });

  it("caps pinned results at four", () => {
    const s = new SessionState();
    for (let i = 0; i < MAX_PINNED; i++) {
      expect(s.pin(request, { ...sample, seed_used: i })).toBe(true);
    }
    expect(s.pin(request, sample)).toBe(false);
    expect(s.pinned.length).toBe(MAX_PINNED);
    expect(s.pinned.map((p) => p.sample.seed_used)).toEqual([0, 1, 2, 3]);
  });

  it("enables compare only with two or more pins", () => {
    const s = new SessionState();
    expect(s.canCompare()).toBe(false);
    s.pin(request, sample);
    expect(s.canCompare()).toBe(false);
    s.pin(request, sample);
    expect(s.canCompare()).toBe(true);
    s.unpin(1);
    expect(s.canCompare()).toBe(false);
  });

  it("unpins by index and ignores out-of-range indices", () => {
    const s = new SessionState();
    s.pin(request, { ...sample, seed_used: 1 });
    s.pin(request, { ...sample, seed_used: 2 });
    s.unpin(5);
    expect(s.pinned.length).toBe(2);
    s.unpin(0);
    expect(s.pinned.length).toBe(1);
    expect(s.pinned[0].sample.seed_used).toBe(2);
  });

  it("keeps the seed on every pinned result", () => {
    const s = new SessionState();
    s.pin(request, sample);
    expect(s.pinned[0].sample.seed_used).toBe(response.seed_used);
  });
});
