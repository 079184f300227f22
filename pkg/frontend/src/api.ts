/**
 * Typed client for the annotation service. Everything the UI knows about the
 * backend goes through these calls; no image math happens in the browser.
 */

export type Channel = "rgb" | "green" | "edges" | "highpass";

export const CHANNELS: Channel[] = ["rgb", "green", "edges", "highpass"];

export interface AnnotationRecord {
  a: [number, number];
  b: [number, number];
  c: [number, number];
  angle_deg: number;
}

export interface AnnotationDoc {
  image_id: string;
  width: number;
  height: number;
  schema_version: number;
  annotations: AnnotationRecord[];
}

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function asJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      /* non-JSON error body; keep statusText */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ApiClient {
  constructor(private readonly base: string = "") {}

  async listImages(): Promise<string[]> {
    return asJson(await fetch(`${this.base}/api/images`));
  }

  imageUrl(imageId: string, channel: Channel): string {
    return `${this.base}/api/images/${encodeURIComponent(imageId)}?channel=${channel}`;
  }

  async getAnnotations(imageId: string): Promise<AnnotationDoc> {
    return asJson(
      await fetch(`${this.base}/api/annotations/${encodeURIComponent(imageId)}`),
    );
  }

  async putAnnotations(doc: AnnotationDoc): Promise<AnnotationDoc> {
    return asJson(
      await fetch(`${this.base}/api/annotations/${encodeURIComponent(doc.image_id)}`, {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(doc),
      }),
    );
  }

  /** Server-side angle so the displayed value never drifts from the backend math. */
  async computeAngle(
    a: [number, number],
    b: [number, number],
    c: [number, number],
  ): Promise<number> {
    const body = await asJson<{ angle_deg: number }>(
      await fetch(`${this.base}/api/angle`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ a, b, c }),
      }),
    );
    return body.angle_deg;
  }

  async detect(imageId: string): Promise<AnnotationDoc> {
    return asJson(
      await fetch(`${this.base}/api/detect/${encodeURIComponent(imageId)}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({}),
      }),
    );
  }
}
