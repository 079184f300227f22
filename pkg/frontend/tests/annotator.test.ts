import { describe, expect, it } from "vitest";

import type { AnnotationDoc } from "../src/api";
import { Annotator } from "../src/annotator";

/** Local angle math used ONLY as the test stub for the service endpoint. */
async function stubAngle(
  a: [number, number],
  b: [number, number],
  c: [number, number],
): Promise<number> {
  const v1 = [a[0] - b[0], a[1] - b[1]];
  const v2 = [c[0] - b[0], c[1] - b[1]];
  const dot = v1[0] * v2[0] + v1[1] * v2[1];
  const n = Math.hypot(...v1) * Math.hypot(...v2);
  return (Math.acos(Math.min(1, Math.max(-1, dot / n))) * 180) / Math.PI;
}

function emptyDoc(): AnnotationDoc {
  return {
    image_id: "im01",
    width: 100,
    height: 100,
    schema_version: 1,
    annotations: [],
  };
}

function freshAnnotator(): Annotator {
  const ann = new Annotator(stubAngle);
  ann.loadDocument(emptyDoc());
  return ann;
}

describe("three-click annotation flow", () => {
  it("stages two points then commits on the third", async () => {
    const ann = freshAnnotator();
    expect(await ann.addPoint({ x: 30, y: 20 })).toBeNull();
    expect(ann.staged.length).toBe(1);
    expect(await ann.addPoint({ x: 20, y: 20 })).toBeNull();
    expect(ann.staged.length).toBe(2);
    const rec = await ann.addPoint({ x: 20, y: 10 });
    expect(rec).not.toBeNull();
    expect(rec!.b).toEqual([20, 20]);
    expect(rec!.angle_deg).toBeCloseTo(90.0, 6);
    expect(ann.staged.length).toBe(0);
    expect(ann.annotations.length).toBe(1);
    expect(ann.dirty).toBe(true);
  });

  it("right-angle fixture reads 90.0", async () => {
    const ann = freshAnnotator();
    await ann.addPoint({ x: 80, y: 60 });
    await ann.addPoint({ x: 70, y: 70 });
    const rec = await ann.addPoint({ x: 60, y: 60 });
    expect(rec!.angle_deg.toFixed(1)).toBe("90.0");
  });

  it("ignores clicks outside the image", async () => {
    const ann = freshAnnotator();
    expect(await ann.addPoint({ x: -1, y: 5 })).toBeNull();
    expect(await ann.addPoint({ x: 5, y: 100 })).toBeNull();
    expect(ann.staged.length).toBe(0);
  });

  it("rejects branch points that coincide with the bifurcation", async () => {
    const ann = freshAnnotator();
    await ann.addPoint({ x: 10, y: 10 });
    await ann.addPoint({ x: 20, y: 20 });
    expect(await ann.addPoint({ x: 20, y: 20 })).toBeNull();
    expect(ann.staged.length).toBe(2); // still waiting for a valid c
  });

  it("previews the angle after two staged points", async () => {
    const ann = freshAnnotator();
    await ann.addPoint({ x: 30, y: 20 });
    expect(await ann.previewAngle({ x: 50, y: 50 })).toBeNull();
    await ann.addPoint({ x: 20, y: 20 });
    const angle = await ann.previewAngle({ x: 20, y: 10 });
    expect(angle).toBeCloseTo(90.0, 6);
  });
});

describe("right-click deletion", () => {
  it("cancels staging first", async () => {
    const ann = freshAnnotator();
    await ann.addPoint({ x: 10, y: 10 });
    expect(ann.deleteAt({ x: 99, y: 99 })).toBe(true);
    expect(ann.staged.length).toBe(0);
    expect(ann.annotations.length).toBe(0);
  });

  it("removes the annotation within the 6 px hit radius", async () => {
    const ann = freshAnnotator();
    await ann.addPoint({ x: 30, y: 20 });
    await ann.addPoint({ x: 20, y: 20 });
    await ann.addPoint({ x: 20, y: 10 });
    expect(ann.deleteAt({ x: 24, y: 24 })).toBe(true); // 5.66 px from b
    expect(ann.annotations.length).toBe(0);
  });

  it("leaves annotations beyond the radius alone", async () => {
    const ann = freshAnnotator();
    await ann.addPoint({ x: 30, y: 20 });
    await ann.addPoint({ x: 20, y: 20 });
    await ann.addPoint({ x: 20, y: 10 });
    expect(ann.deleteAt({ x: 40, y: 40 })).toBe(false);
    expect(ann.annotations.length).toBe(1);
  });

  it("deletes the nearest when several are in range", async () => {
    const ann = freshAnnotator();
    for (const bx of [20, 26]) {
      await ann.addPoint({ x: bx + 10, y: 20 });
      await ann.addPoint({ x: bx, y: 20 });
      await ann.addPoint({ x: bx, y: 10 });
    }
    expect(ann.deleteAt({ x: 27, y: 20 })).toBe(true);
    expect(ann.annotations[0].b).toEqual([20, 20]);
  });
});

describe("channel toggle", () => {
  it("keeps overlay state when the channel changes", async () => {
    const ann = freshAnnotator();
    await ann.addPoint({ x: 30, y: 20 });
    await ann.addPoint({ x: 20, y: 20 });
    await ann.addPoint({ x: 20, y: 10 });
    ann.setSuggestions({ ...emptyDoc(), annotations: ann.toDocument().annotations });
    ann.setChannel("edges");
    expect(ann.channel).toBe("edges");
    expect(ann.annotations.length).toBe(1);
    expect(ann.suggestions.length).toBe(1);
  });
});

describe("detection suggestions", () => {
  const suggestion = {
    a: [30, 20] as [number, number],
    b: [40, 30] as [number, number],
    c: [50, 20] as [number, number],
    angle_deg: 90.0,
  };

  it("promotes a suggestion into the annotation set", () => {
    const ann = freshAnnotator();
    ann.setSuggestions({ ...emptyDoc(), annotations: [suggestion] });
    const rec = ann.promoteSuggestion(0);
    expect(rec).toEqual(suggestion);
    expect(ann.suggestions.length).toBe(0);
    expect(ann.annotations.length).toBe(1);
    expect(ann.dirty).toBe(true);
  });

  it("dismisses without touching annotations", () => {
    const ann = freshAnnotator();
    ann.setSuggestions({ ...emptyDoc(), annotations: [suggestion] });
    expect(ann.dismissSuggestion(0)).toBe(true);
    expect(ann.dismissSuggestion(0)).toBe(false);
    expect(ann.annotations.length).toBe(0);
    expect(ann.dirty).toBe(false);
  });
});

describe("document round trip", () => {
  it("serializes exactly what was loaded plus edits", async () => {
    const ann = freshAnnotator();
    await ann.addPoint({ x: 30, y: 20 });
    await ann.addPoint({ x: 20, y: 20 });
    await ann.addPoint({ x: 20, y: 10 });
    const doc = ann.toDocument();
    expect(doc.image_id).toBe("im01");
    expect(doc.schema_version).toBe(1);
    expect(doc.annotations).toHaveLength(1);

    const ann2 = new Annotator(stubAngle);
    ann2.loadDocument(doc);
    expect(ann2.toDocument()).toEqual(doc);
    expect(ann2.dirty).toBe(false);
  });

  it("deep-copies records so edits never alias the source doc", () => {
    const doc = emptyDoc();
    doc.annotations.push({ a: [1, 1], b: [2, 2], c: [3, 1], angle_deg: 90 });
    const ann = new Annotator(stubAngle);
    ann.loadDocument(doc);
    ann.annotations[0].angle_deg = 45;
    expect(doc.annotations[0].angle_deg).toBe(90);
  });
});
