/** Tiny deterministic SVG builder: fixed viewport, fixed decimal precision,
 * no timestamps or randomness, so identical inputs give identical bytes. */

export const WIDTH = 720;
export const HEIGHT = 440;
export const MARGIN = { left: 64, right: 20, top: 28, bottom: 44 };

export function fmt(v: number): string {
  return v.toFixed(2);
}

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = [d0, d1];
  return f;
}

export function logScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const l0 = Math.log10(d0);
  const span = Math.log10(d1) - l0 || 1;
  const f = ((v: number) => r0 + ((Math.log10(v) - l0) / span) * (r1 - r0)) as Scale;
  f.domain = [d0, d1];
  return f;
}

export function plotArea(): { x0: number; x1: number; y0: number; y1: number } {
  return { x0: MARGIN.left, x1: WIDTH - MARGIN.right,
           y0: HEIGHT - MARGIN.bottom, y1: MARGIN.top };
}

export function openSvg(title: string): string[] {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="18" text-anchor="middle" font-size="14">${title}</text>`,
  ];
}

export function polyline(points: Array<[number, number]>, stroke: string,
                         width = 1.5, dash = ""): string {
  const attr = dash ? ` stroke-dasharray="${dash}"` : "";
  const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
  return `<polyline fill="none" stroke="${stroke}" stroke-width="${width}"${attr} points="${pts}"/>`;
}

export function circle(x: number, y: number, r: number, fill: string,
                       extra = ""): string {
  return `<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${r}" fill="${fill}"${extra}/>`;
}

export function rect(x: number, y: number, w: number, h: number, fill: string,
                     extra = ""): string {
  return `<rect x="${fmt(x)}" y="${fmt(y)}" width="${fmt(w)}" height="${fmt(h)}" ` +
         `fill="${fill}"${extra}/>`;
}

export function line(x1: number, y1: number, x2: number, y2: number,
                     stroke: string, dash = ""): string {
  const attr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ` +
         `stroke="${stroke}" stroke-width="1"${attr}/>`;
}

export function text(x: number, y: number, s: string, anchor = "middle",
                     extra = ""): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}"${extra}>${s}</text>`;
}

export function ticks(lo: number, hi: number, count = 6): number[] {
  const rawStep = (hi - lo) / Math.max(count, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(Math.abs(rawStep) || 1)));
  const step = [1, 2, 5, 10].map((m) => m * mag)
    .find((s) => (hi - lo) / s <= count) ?? mag * 10;
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-12; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

export function axes(sx: Scale, sy: Scale, xLabel: string, yLabel: string,
                     yTicks?: Array<[number, string]>): string[] {
  const a = plotArea();
  const parts: string[] = [];
  parts.push(line(a.x0, a.y0, a.x1, a.y0, "#333"));
  parts.push(line(a.x0, a.y0, a.x0, a.y1, "#333"));
  for (const t of ticks(sx.domain[0], sx.domain[1])) {
    const x = sx(t);
    parts.push(line(x, a.y0, x, a.y0 + 4, "#333"));
    parts.push(text(x, a.y0 + 18, trimNum(t)));
  }
  const yy = yTicks ?? ticks(sy.domain[0], sy.domain[1]).map(
    (t) => [t, trimNum(t)] as [number, string]);
  for (const [t, label] of yy) {
    const y = sy(t);
    parts.push(line(a.x0 - 4, y, a.x0, y, "#333"));
    parts.push(text(a.x0 - 8, y + 4, label, "end"));
  }
  parts.push(text((a.x0 + a.x1) / 2, HEIGHT - 8, xLabel));
  parts.push(`<text x="16" y="${(a.y0 + a.y1) / 2}" text-anchor="middle" ` +
             `transform="rotate(-90 16 ${(a.y0 + a.y1) / 2})">${yLabel}</text>`);
  return parts;
}

export function trimNum(v: number): string {
  const s = v.toPrecision(6);
  return String(Number(s));
}
