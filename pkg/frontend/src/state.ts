/** Session state: append-only history of (request, response) pairs and up
 * to four pinned results for the compare view. Every pinned entry keeps the
 * sample's seed so nothing on screen loses its reproduction recipe.
 */

import type { GeneratedSample, GenerateRequest, GenerateResponse } from "./types";

export const MAX_PINNED = 4;

export interface HistoryEntry {
  request: GenerateRequest;
  response: GenerateResponse;
}

export interface PinnedResult {
  request: GenerateRequest;
  sample: GeneratedSample;
}

export class SessionState {
  private readonly _history: HistoryEntry[] = [];
  private readonly _pinned: PinnedResult[] = [];

  get history(): readonly HistoryEntry[] {
    return this._history;
  }

  get pinned(): readonly PinnedResult[] {
    return this._pinned;
  }

  pushHistory(request: GenerateRequest, response: GenerateResponse): void {
    this._history.push({ request, response });
  }

  /** Returns false (and changes nothing) when the pin board is full. */
  pin(request: GenerateRequest, sample: GeneratedSample): boolean {
    if (this._pinned.length >= MAX_PINNED) return false;
    this._pinned.push({ request, sample });
    return true;
  }

  unpin(index: number): void {
    if (index >= 0 && index < this._pinned.length) {
      this._pinned.splice(index, 1);
    }
  }

  canCompare(): boolean {
    return this._pinned.length >= 2;
  }
}
