/**
 * Annotation state machine, kept free of DOM so it is unit-testable.
 *
 * Click flow: three left clicks stage points a, b, c (b is the bifurcation);
 * on the third click the angle is resolved through the injected angle
 * function (the service endpoint in production) and the annotation commits.
 * Right click deletes the nearest annotation within a small hit radius, or
 * cancels an in-progress staging.
 */

import type { AnnotationDoc, AnnotationRecord, Channel } from "./api";

export interface Point {
  x: number;
  y: number;
}

export type AngleFn = (
  a: [number, number],
  b: [number, number],
  c: [number, number],
) => Promise<number>;

export const HIT_RADIUS = 6;

function dist(p: Point, q: [number, number]): number {
  return Math.hypot(p.x - q[0], p.y - q[1]);
}

export class Annotator {
  imageId = "";
  width = 0;
  height = 0;
  schemaVersion = 1;
  channel: Channel = "rgb";
  annotations: AnnotationRecord[] = [];
  suggestions: AnnotationRecord[] = [];
  staged: Point[] = [];
  dirty = false;

  constructor(private readonly angleFn: AngleFn) {}

  loadDocument(doc: AnnotationDoc): void {
    this.imageId = doc.image_id;
    this.width = doc.width;
    this.height = doc.height;
    this.schemaVersion = doc.schema_version;
    this.annotations = doc.annotations.map((r) => ({ ...r }));
    this.staged = [];
    this.suggestions = [];
    this.dirty = false;
  }

  toDocument(): AnnotationDoc {
    return {
      image_id: this.imageId,
      width: this.width,
      height: this.height,
      schema_version: this.schemaVersion,
      annotations: this.annotations.map((r) => ({ ...r })),
    };
  }

  private inBounds(p: Point): boolean {
    return p.x >= 0 && p.x < this.width && p.y >= 0 && p.y < this.height;
  }

  /**
   * Left click. Returns the committed annotation when this click was the
   * third of a triple, null while still staging or for a rejected click.
   */
  async addPoint(p: Point): Promise<AnnotationRecord | null> {
    if (!this.inBounds(p)) return null;
    if (this.staged.length === 1) {
      const b = this.staged[0];
      if (p.x === b.x && p.y === b.y) return null; // a != b required later
    }
    this.staged.push({ x: p.x, y: p.y });
    if (this.staged.length < 3) return null;
    const [a, b, c] = this.staged;
    if (c.x === b.x && c.y === b.y) {
      this.staged.pop();
      return null;
    }
    const angle = await this.angleFn([a.x, a.y], [b.x, b.y], [c.x, c.y]);
    const record: AnnotationRecord = {
      a: [a.x, a.y],
      b: [b.x, b.y],
      c: [c.x, c.y],
      angle_deg: angle,
    };
    this.annotations.push(record);
    this.staged = [];
    this.dirty = true;
    return record;
  }

  /** Angle preview for the cursor position once a and b are staged. */
  async previewAngle(cursor: Point): Promise<number | null> {
    if (this.staged.length !== 2) return null;
    const [a, b] = this.staged;
    if (cursor.x === b.x && cursor.y === b.y) return null;
    return this.angleFn([a.x, a.y], [b.x, b.y], [cursor.x, cursor.y]);
  }

  /**
   * Right click: cancel staging if any, otherwise delete the annotation
   * whose nearest point is within the hit radius. Returns true when state
   * changed.
   */
  deleteAt(p: Point, radius: number = HIT_RADIUS): boolean {
    if (this.staged.length > 0) {
      this.staged = [];
      return true;
    }
    let bestIdx = -1;
    let bestDist = radius;
    this.annotations.forEach((rec, i) => {
      const d = Math.min(dist(p, rec.a), dist(p, rec.b), dist(p, rec.c));
      if (d <= bestDist) {
        bestDist = d;
        bestIdx = i;
      }
    });
    if (bestIdx < 0) return false;
    this.annotations.splice(bestIdx, 1);
    this.dirty = true;
    return true;
  }

  /** Channel changes affect the backdrop only; overlay state is untouched. */
  setChannel(channel: Channel): void {
    this.channel = channel;
  }

  setSuggestions(doc: AnnotationDoc): void {
    this.suggestions = doc.annotations.map((r) => ({ ...r }));
  }

  promoteSuggestion(index: number): AnnotationRecord | null {
    const rec = this.suggestions[index];
    if (!rec) return null;
    this.suggestions.splice(index, 1);
    const copy = { ...rec };
    this.annotations.push(copy);
    this.dirty = true;
    return copy;
  }

  dismissSuggestion(index: number): boolean {
    if (!this.suggestions[index]) return false;
    this.suggestions.splice(index, 1);
    return true;
  }

  markSaved(): void {
    this.dirty = false;
  }
}
