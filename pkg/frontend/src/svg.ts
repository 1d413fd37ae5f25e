/** Tiny deterministic SVG scene builder: fixed canvas, fonts by name. */

export const WIDTH = 720;
export const HEIGHT = 480;
export const MARGIN = { top: 44, right: 28, bottom: 56, left: 68 };

export interface Scale {
  (v: number): number;
  domain: [number, number];
}

export function fmt(v: number): string {
  if (v === 0) return "0";
  const s = v.toPrecision(6);
  return s.includes(".") ? s.replace(/\.?0+($|e)/, "$1") : s;
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const f = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  f.domain = domain;
  return f;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

export function ticks(domain: [number, number], count = 6): number[] {
  const [lo, hi] = domain;
  const span = hi - lo || 1;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const unit = err >= 7.5 ? step * 10 : err >= 3.5 ? step * 5 : err >= 1.5 ? step * 2 : step;
  const out: number[] = [];
  for (let v = Math.ceil(lo / unit) * unit; v <= hi + unit * 1e-9; v += unit) {
    out.push(Math.abs(v) < unit * 1e-9 ? 0 : v);
  }
  return out;
}

export function polyline(xs: number[], ys: number[], sx: Scale, sy: Scale,
                         stroke: string, dash = ""): string {
  const pts = xs.map((x, i) => `${fmt(sx(x))},${fmt(sy(ys[i]))}`).join(" ");
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline fill="none" stroke="${stroke}" stroke-width="1.8"${dashAttr} points="${pts}"/>`;
}

export function text(x: number, y: number, s: string, anchor = "middle",
                     size = 13, extra = ""): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" ` +
    `font-family="Helvetica, sans-serif" font-size="${size}"${extra}>${s}</text>`;
}

export function axes(sx: Scale, sy: Scale, xlabel: string, ylabel: string,
                     title: string): string {
  const parts: string[] = [];
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(`<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#222" stroke-width="1"/>`);
  for (const t of ticks(sx.domain)) {
    const px = sx(t);
    parts.push(`<line x1="${fmt(px)}" y1="${y0}" x2="${fmt(px)}" y2="${y0 + 5}" stroke="#222"/>`);
    parts.push(text(px, y0 + 20, fmt(t)));
  }
  for (const t of ticks(sy.domain)) {
    const py = sy(t);
    parts.push(`<line x1="${x0 - 5}" y1="${fmt(py)}" x2="${x0}" y2="${fmt(py)}" stroke="#222"/>`);
    parts.push(text(x0 - 9, py + 4, fmt(t), "end", 12));
  }
  parts.push(text((x0 + x1) / 2, HEIGHT - 14, xlabel));
  parts.push(text(18, (y0 + y1) / 2, ylabel, "middle", 13,
    ` transform="rotate(-90 18 ${(y0 + y1) / 2})"`));
  parts.push(text((x0 + x1) / 2, 26, title, "middle", 15, ' font-weight="bold"'));
  return parts.join("\n");
}

export function document(body: string): string {
  const defs = `<defs><clipPath id="plot"><rect x="${MARGIN.left}" y="${MARGIN.top}" ` +
    `width="${WIDTH - MARGIN.left - MARGIN.right}" ` +
    `height="${HEIGHT - MARGIN.top - MARGIN.bottom}"/></clipPath></defs>`;
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">\n` +
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>\n${defs}\n${body}\n</svg>\n`;
}

/** Wrap drawing commands so they stay inside the plot area. */
export function clipped(body: string): string {
  return `<g clip-path="url(#plot)">\n${body}\n</g>`;
}

/** Diverging blue-white-red map on [-1, 1]. */
export function divergingColor(v: number): string {
  const x = Math.max(-1, Math.min(1, v));
  const up = Math.round(255 * Math.min(1, 1 + x));
  const down = Math.round(255 * Math.min(1, 1 - x));
  return `rgb(${up},${Math.min(up, down)},${down})`;
}

export const SERIES_COLORS = ["#1f4e9c", "#c23b22", "#2a8a43", "#8a2aa0", "#b8860b"];
