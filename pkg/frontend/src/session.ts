import { resultFileHash } from "./raw.js";
import type {
  ConditionFileV1,
  ConditionWeights,
  ErrorPayload,
  GraphSummary,
  Keyframe,
  SearchResultDoc,
  TimelineDoc,
} from "./types.js";

/**
 * Client-side editing state. The server is stateless; everything the user
 * does lives here and is exportable as a ConditionFileV1 so a session can be
 * replayed through the CLI byte-for-byte. The session never computes paths:
 * the displayed result is always a parsed server response, and resultHash is
 * the sha256 of the exact result bytes the server sent (comparable with a
 * hash of the CLI's result file).
 */
export class ViewerSession {
  summary: GraphSummary | null = null;
  pins: Keyframe[] = [];
  weights: ConditionWeights = { edge: 1, beat: 1, struct: 1, tag: 1, ext: 1 };
  sigmaS = 0.1;
  dScale = 0.1;
  durationS = 2.0;
  musicBeats: number[] = [];

  result: SearchResultDoc | null = null;
  timeline: TimelineDoc | null = null;
  resultHash: string | null = null;
  lastError: ErrorPayload | null = null;

  playbackCursor = 0; // frame index into the current timeline

  setSummary(summary: GraphSummary) {
    this.summary = summary;
    this.durationS = Math.max(this.durationS, 1 / summary.fps);
  }

  /** Insert or move a pin; pins stay sorted by target time. */
  setPin(timeS: number, frame: number) {
    if (timeS < 0) throw new Error("pin time must be >= 0");
    if (this.summary && (frame < 0 || frame >= this.summary.node_count)) {
      throw new Error(`pin frame ${frame} outside the source range`);
    }
    const existing = this.pins.findIndex((p) => p.time_s === timeS);
    if (existing >= 0) this.pins[existing] = { time_s: timeS, frame };
    else this.pins.push({ time_s: timeS, frame });
    this.pins.sort((a, b) => a.time_s - b.time_s);
    this.durationS = Math.max(this.durationS, ...this.pins.map((p) => p.time_s));
  }

  movePin(index: number, newTimeS: number) {
    const pin = this.pins[index];
    if (!pin) throw new Error(`no pin at index ${index}`);
    this.pins.splice(index, 1);
    this.setPin(newTimeS, pin.frame);
  }

  removePin(index: number) {
    if (!this.pins[index]) throw new Error(`no pin at index ${index}`);
    this.pins.splice(index, 1);
  }

  /** The full query state as a ConditionFileV1 document (CLI-compatible). */
  exportCondition(): ConditionFileV1 {
    const doc: ConditionFileV1 = {
      version: 1,
      duration_s: this.durationS,
      keyframes: this.pins.map((p) => ({ ...p })),
      weights: { ...this.weights },
      sigma_s: this.sigmaS,
      d_scale: this.dScale,
    };
    if (this.musicBeats.length) doc.beats = { times: [...this.musicBeats] };
    return doc;
  }

  async applySearchResponse(rawBody: string) {
    const parsed = JSON.parse(rawBody) as { result: SearchResultDoc; timeline: TimelineDoc };
    this.result = parsed.result;
    this.timeline = parsed.timeline;
    this.resultHash = await resultFileHash(rawBody);
    this.lastError = null;
    this.playbackCursor = 0;
  }

  /** Surface a server error (e.g. an infeasible 409) verbatim. */
  applyErrorPayload(payload: ErrorPayload) {
    this.lastError = payload;
  }

  /** Human-readable banner for the inline error strip. */
  errorBanner(): string | null {
    if (!this.lastError) return null;
    const detail = this.lastError.detail ?? {};
    const hops = detail["requested_hops"];
    const min = detail["min_hops"];
    let text = `error ${this.lastError.code}: ${this.lastError.message}`;
    if (Array.isArray(hops)) text += ` (requested hops ${hops[0]}..${hops[1]}`;
    if (typeof min === "number") text += `, shortest bridge ${min})`;
    else if (Array.isArray(hops)) text += ")";
    return text;
  }

  /**
   * Advance the playback cursor by wall-clock time using the timeline's fps
   * metadata (never assumes one frame per render tick).
   */
  advancePlayback(dtMs: number): number {
    if (!this.timeline || this.timeline.frames.length === 0) return 0;
    const frames = this.timeline.frames.length;
    this.playbackCursor = (this.playbackCursor + (dtMs / 1000) * this.timeline.fps) % frames;
    return Math.floor(this.playbackCursor);
  }
}
