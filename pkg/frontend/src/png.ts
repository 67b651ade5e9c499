/**
 * Minimal PNG writer: rasterize the PlotModel onto an RGB buffer and encode
 * with node's zlib (deflate).  No native canvas dependency; output bytes are
 * deterministic for identical inputs.
 */

import { deflateSync } from "zlib";

import { FRAME, Mapper, PlotModel, fmtTick, makeMapper } from "./plot.js";
import { FONT5x7 } from "./font.js";

const W = FRAME.width;
const H = FRAME.height;

class Raster {
  data: Uint8Array;

  constructor() {
    this.data = new Uint8Array(W * H * 3).fill(255);
  }

  set(x: number, y: number, rgb: [number, number, number]): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || xi >= W || yi < 0 || yi >= H) return;
    const o = (yi * W + xi) * 3;
    this.data[o] = rgb[0];
    this.data[o + 1] = rgb[1];
    this.data[o + 2] = rgb[2];
  }

  line(x0: number, y0: number, x1: number, y1: number,
       rgb: [number, number, number], dotted = false): void {
    const steps = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0), 1) | 0;
    for (let i = 0; i <= steps; i++) {
      if (dotted && i % 6 >= 3) continue;
      const t = i / steps;
      this.set(x0 + t * (x1 - x0), y0 + t * (y1 - y0), rgb);
    }
  }

  disc(x: number, y: number, r: number, rgb: [number, number, number]): void {
    for (let dx = -r; dx <= r; dx++) {
      for (let dy = -r; dy <= r; dy++) {
        if (dx * dx + dy * dy <= r * r) this.set(x + dx, y + dy, rgb);
      }
    }
  }

  text(x: number, y: number, s: string, rgb: [number, number, number]): void {
    let cx = Math.round(x);
    for (const ch of s) {
      const glyph = FONT5x7[ch] ?? FONT5x7[ch.toUpperCase()] ?? FONT5x7["?"];
      for (let row = 0; row < 7; row++) {
        for (let col = 0; col < 5; col++) {
          if ((glyph[row] >> (4 - col)) & 1) this.set(cx + col, y + row, rgb);
        }
      }
      cx += 6;
    }
  }
}

function hexColor(c: string): [number, number, number] {
  const h = c.replace("#", "");
  return [parseInt(h.slice(0, 2), 16), parseInt(h.slice(2, 4), 16), parseInt(h.slice(4, 6), 16)];
}

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Uint8Array): number {
  let c = 0xffffffff;
  for (const b of buf) c = CRC_TABLE[(c ^ b) & 0xff] ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, payload: Uint8Array): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(payload.length, 0);
  head.write(type, 4, "latin1");
  const body = Buffer.concat([Buffer.from(type, "latin1"), Buffer.from(payload)]);
  const tail = Buffer.alloc(4);
  tail.writeUInt32BE(crc32(body), 0);
  return Buffer.concat([head, Buffer.from(payload), tail]);
}

export function encodePng(raster: Raster): Buffer {
  const sig = Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(W, 0);
  ihdr.writeUInt32BE(H, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 2; // RGB
  // filter 0 on every scanline
  const rawLines = Buffer.alloc(H * (1 + W * 3));
  for (let y = 0; y < H; y++) {
    const o = y * (1 + W * 3);
    rawLines[o] = 0;
    rawLines.set(raster.data.subarray(y * W * 3, (y + 1) * W * 3), o + 1);
  }
  const idat = deflateSync(rawLines, { level: 6 });
  const crcBody = Buffer.concat([
    chunk("IHDR", ihdr),
    chunk("IDAT", idat),
    chunk("IEND", new Uint8Array(0)),
  ]);
  return Buffer.concat([sig, crcBody]);
}

export function renderPng(model: PlotModel): Buffer {
  const f = FRAME;
  const m: Mapper = makeMapper(model);
  const raster = new Raster();
  const fg = hexColor("#222222");
  const grid = hexColor("#dddddd");

  for (const t of m.xTicks) {
    const x = m.sx(t);
    raster.line(x, f.top, x, f.height - f.bottom, grid);
    raster.text(x - 3 * fmtTick(t).length, f.height - f.bottom + 8, fmtTick(t), fg);
  }
  for (const t of m.yTicks) {
    const y = m.sy(t);
    raster.line(f.left, y, f.width - f.right, y, grid);
    raster.text(f.left - 6 * fmtTick(t).length - 8, y - 3, fmtTick(t), fg);
  }
  raster.line(f.left, f.top, f.width - f.right, f.top, fg);
  raster.line(f.left, f.height - f.bottom, f.width - f.right, f.height - f.bottom, fg);
  raster.line(f.left, f.top, f.left, f.height - f.bottom, fg);
  raster.line(f.width - f.right, f.top, f.width - f.right, f.height - f.bottom, fg);

  for (const s of model.series) {
    const rgb = hexColor(s.color);
    let prev: [number, number] | null = null;
    for (let i = 0; i < s.x.length; i++) {
      const vx = s.x[i];
      const vy = s.y[i];
      if (!Number.isFinite(vx) || !Number.isFinite(vy)
          || (model.logX && vx <= 0) || (model.logY && vy <= 0)) {
        prev = null;
        continue;
      }
      const p: [number, number] = [m.sx(vx), m.sy(vy)];
      if (s.kind === "line") {
        if (prev) raster.line(prev[0], prev[1], p[0], p[1], rgb, Boolean(s.dash));
        prev = p;
      } else {
        raster.disc(p[0], p[1], 2, rgb);
      }
    }
  }

  raster.text(f.width / 2 - 3 * model.title.length, 14, model.title, fg);
  raster.text(f.width / 2 - 3 * model.xLabel.length, f.height - 22, model.xLabel, fg);
  raster.text(6, 14, model.yLabel, fg);
  let ly = f.top + 8;
  for (const s of model.series) {
    const lx = f.width - f.right - 170;
    raster.line(lx, ly + 3, lx + 24, ly + 3, hexColor(s.color), Boolean(s.dash));
    raster.text(lx + 30, ly, s.label, fg);
    ly += 14;
  }
  return encodePng(raster);
}
