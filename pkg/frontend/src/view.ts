/**
 * Zoom/pan transform between screen and image coordinates, plus the canvas
 * overlay renderer. Pure math here is testable; drawing is kept dumb.
 */

import type { AnnotationRecord } from "./api";
import type { Annotator, Point } from "./annotator";

export class Viewport {
  scale = 1;
  offsetX = 0;
  offsetY = 0;

  screenToImage(p: Point): Point {
    return {
      x: (p.x - this.offsetX) / this.scale,
      y: (p.y - this.offsetY) / this.scale,
    };
  }

  imageToScreen(p: Point): Point {
    return {
      x: p.x * this.scale + this.offsetX,
      y: p.y * this.scale + this.offsetY,
    };
  }

  /** Zoom by a factor keeping the given screen point fixed. */
  zoomAt(screen: Point, factor: number): void {
    const next = Math.min(Math.max(this.scale * factor, 0.25), 16);
    const applied = next / this.scale;
    this.offsetX = screen.x - (screen.x - this.offsetX) * applied;
    this.offsetY = screen.y - (screen.y - this.offsetY) * applied;
    this.scale = next;
  }

  panBy(dx: number, dy: number): void {
    this.offsetX += dx;
    this.offsetY += dy;
  }

  reset(): void {
    this.scale = 1;
    this.offsetX = 0;
    this.offsetY = 0;
  }
}

const COLORS = {
  committed: "#ffd24d",
  suggestion: "#4db8ff",
  staged: "#ff5d5d",
};

function drawRecord(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  rec: AnnotationRecord,
  color: string,
): void {
  const a = vp.imageToScreen({ x: rec.a[0], y: rec.a[1] });
  const b = vp.imageToScreen({ x: rec.b[0], y: rec.b[1] });
  const c = vp.imageToScreen({ x: rec.c[0], y: rec.c[1] });
  ctx.strokeStyle = color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  ctx.moveTo(a.x, a.y);
  ctx.lineTo(b.x, b.y);
  ctx.lineTo(c.x, c.y);
  ctx.stroke();
  for (const p of [a, b, c]) {
    ctx.beginPath();
    ctx.arc(p.x, p.y, 3, 0, Math.PI * 2);
    ctx.fillStyle = color;
    ctx.fill();
  }
  ctx.fillStyle = color;
  ctx.font = "12px sans-serif";
  ctx.fillText(`${rec.angle_deg.toFixed(1)}°`, b.x + 6, b.y - 6);
}

export function renderOverlay(
  ctx: CanvasRenderingContext2D,
  vp: Viewport,
  state: Annotator,
  backdrop: CanvasImageSource | null,
): void {
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  if (backdrop) {
    ctx.save();
    ctx.imageSmoothingEnabled = vp.scale < 1;
    ctx.setTransform(vp.scale, 0, 0, vp.scale, vp.offsetX, vp.offsetY);
    ctx.drawImage(backdrop, 0, 0);
    ctx.restore();
  }
  for (const rec of state.suggestions) {
    drawRecord(ctx, vp, rec, COLORS.suggestion);
  }
  for (const rec of state.annotations) {
    drawRecord(ctx, vp, rec, COLORS.committed);
  }
  if (state.staged.length > 0) {
    ctx.strokeStyle = COLORS.staged;
    ctx.fillStyle = COLORS.staged;
    ctx.lineWidth = 1;
    ctx.beginPath();
    state.staged.forEach((p, i) => {
      const s = vp.imageToScreen(p);
      if (i === 0) ctx.moveTo(s.x, s.y);
      else ctx.lineTo(s.x, s.y);
    });
    ctx.stroke();
    for (const p of state.staged) {
      const s = vp.imageToScreen(p);
      ctx.beginPath();
      ctx.arc(s.x, s.y, 3, 0, Math.PI * 2);
      ctx.fill();
    }
  }
}
