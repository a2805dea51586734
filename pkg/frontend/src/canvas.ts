/** Nearest-neighbor micrograph rendering. */

import type { PgmImage } from "./pgm";

export interface RgbaImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
}

/** Integer upscale with pixel replication; pure so tests can check bytes. */
export function upscaleGray(img: PgmImage, scale: number): RgbaImage {
  const w = img.width * scale;
  const h = img.height * scale;
  const rgba = new Uint8ClampedArray(w * h * 4);
  for (let y = 0; y < h; y++) {
    const srcRow = Math.floor(y / scale) * img.width;
    for (let x = 0; x < w; x++) {
      const v = img.pixels[srcRow + Math.floor(x / scale)];
      const o = (y * w + x) * 4;
      rgba[o] = v;
      rgba[o + 1] = v;
      rgba[o + 2] = v;
      rgba[o + 3] = 255;
    }
  }
  return { width: w, height: h, rgba };
}

export const MICROGRAPH_SCALE = 8;

export function drawMicrograph(canvas: HTMLCanvasElement, img: PgmImage,
                               scale: number = MICROGRAPH_SCALE): void {
  const up = upscaleGray(img, scale);
  canvas.width = up.width;
  canvas.height = up.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) return; // jsdom has no 2d context; sizing still observable
  ctx.putImageData(new ImageData(up.rgba, up.width, up.height), 0, 0);
}
