/** Figure renderers, one per artifact kind.  Each consumes the documented
 * CSV schema of its emitting subcommand and never recomputes statistics:
 * fitted lines and noise floors come from the JSON sidecar when given. */

import { Table, numbers, requireColumns } from "./csv";
import { HEIGHT, Scale, axes, circle, line, linearScale, logScale,
         openSvg, plotArea, polyline, rect, text, trimNum } from "./svg";

export interface TvMeta {
  fitted_rate?: number | null;
  noise_floor?: number | null;
  fit_window?: [number, number] | null;
}

export function renderTvDecay(table: Table, meta: TvMeta = {}): string {
  requireColumns(table, ["n", "tv", "stderr"], "tv_decay.csv");
  const n = numbers(table, "n");
  const tv = numbers(table, "tv");
  const a = plotArea();
  const positive = tv.filter((v) => v > 0);
  const lo = Math.min(...positive, meta.noise_floor || Infinity) * 0.5;
  const hi = Math.max(...tv) * 2;
  const sx = linearScale(Math.min(...n), Math.max(...n), a.x0, a.x1);
  const sy = logScale(lo, hi, a.y0, a.y1);
  const decades: Array<[number, string]> = [];
  for (let e = Math.ceil(Math.log10(lo)); e <= Math.floor(Math.log10(hi)); e++) {
    decades.push([Math.pow(10, e), `1e${e}`]);
  }
  const parts = openSvg("total variation between start laws");
  parts.push(...axes(sx, sy, "cycle index n", "TV (log scale)", decades));
  parts.push(polyline(n.map((v, i) => [sx(v), sy(Math.max(tv[i], lo))]), "#1f77b4"));
  for (let i = 0; i < n.length; i++) {
    parts.push(circle(sx(n[i]), sy(Math.max(tv[i], lo)), 3, "#1f77b4"));
  }
  if (meta.noise_floor) {
    const y = sy(meta.noise_floor);
    parts.push(line(a.x0, y, a.x1, y, "#999", "4 3"));
    parts.push(text(a.x1 - 4, y - 4, "noise floor", "end", ' fill="#666"'));
  }
  if (meta.fitted_rate != null && meta.fit_window) {
    const [w0, w1] = meta.fit_window;
    const i0 = n.indexOf(w0);
    if (i0 >= 0) {
      const c = Math.log(tv[i0]) - meta.fitted_rate * w0;
      const seg = [w0, w1].map((v) =>
        [sx(v), sy(Math.exp(meta.fitted_rate! * v + c))] as [number, number]);
      parts.push(polyline(seg, "#d62728", 1.5, "6 3"));
      parts.push(text(sx(w1), sy(Math.exp(meta.fitted_rate * w1 + c)) - 8,
                      `rate ${trimNum(meta.fitted_rate)}`, "middle", ' fill="#d62728"'));
    }
  }
  parts.push("</svg>");
  return parts.join("\n");
}

export function renderLlnTrace(table: Table): string {
  requireColumns(table, ["cycle", "phi", "running_mean"], "lln.csv");
  const cycle = numbers(table, "cycle");
  const mean = numbers(table, "running_mean");
  const phi = numbers(table, "phi");
  const a = plotArea();
  const lo = Math.min(...phi);
  const hi = Math.max(...phi);
  const sx = linearScale(cycle[0], cycle[cycle.length - 1], a.x0, a.x1);
  const sy = linearScale(lo, hi, a.y0, a.y1);
  const parts = openSvg("running ergodic average");
  parts.push(...axes(sx, sy, "cycle", "average"));
  parts.push(polyline(cycle.map((c, i) => [sx(c), sy(phi[i])]), "#c7dcef", 1));
  parts.push(polyline(cycle.map((c, i) => [sx(c), sy(mean[i])]), "#1f77b4", 2));
  const final = mean[mean.length - 1];
  parts.push(line(a.x0, sy(final), a.x1, sy(final), "#999", "4 3"));
  parts.push(text(a.x1 - 4, sy(final) - 6, `final ${trimNum(final)}`, "end",
                  ' fill="#666"'));
  parts.push("</svg>");
  return parts.join("\n");
}

export function renderOvershootHist(table: Table, binCount = 20): string {
  requireColumns(table, ["index", "l_idx", "x_at_l", "o"], "overshoots.csv");
  const o = numbers(table, "o");
  const hi = Math.max(...o);
  const width = hi / binCount || 1;
  const counts = new Array<number>(binCount).fill(0);
  for (const v of o) {
    counts[Math.min(Math.floor(v / width), binCount - 1)] += 1;
  }
  const a = plotArea();
  const sx = linearScale(0, hi, a.x0, a.x1);
  const sy = linearScale(0, Math.max(...counts), a.y0, a.y1);
  const parts = openSvg(`overshoot histogram (${o.length} records)`);
  parts.push(...axes(sx, sy, "overshoot value", "count"));
  counts.forEach((c, i) => {
    parts.push(rect(sx(i * width), sy(c), sx(width) - sx(0),
                    a.y0 - sy(c), "#1f77b4", ' fill-opacity="0.7"'));
  });
  parts.push("</svg>");
  return parts.join("\n");
}

export function renderSurface(table: Table): string {
  requireColumns(table, ["theta_lower", "theta_upper", "mean", "stderr", "n_cycles"],
                 "surface.csv");
  const lows = numbers(table, "theta_lower");
  const highs = numbers(table, "theta_upper");
  const means = numbers(table, "mean");
  const uLow = [...new Set(lows)].sort((a, b) => a - b);
  const uHigh = [...new Set(highs)].sort((a, b) => a - b);
  const a = plotArea();
  const sx = linearScale(0, uLow.length, a.x0, a.x1);
  const sy = linearScale(0, uHigh.length, a.y0, a.y1);
  const lo = Math.min(...means);
  const hi = Math.max(...means);
  const span = hi - lo || 1;
  const parts = openSvg("objective surface over thresholds");
  let best = 0;
  means.forEach((m, i) => { if (m > means[best]) best = i; });
  for (let i = 0; i < means.length; i++) {
    const xi = uLow.indexOf(lows[i]);
    const yi = uHigh.indexOf(highs[i]);
    const t = (means[i] - lo) / span;
    const shade = Math.round(235 - 175 * t);
    parts.push(rect(sx(xi), sy(yi + 1), sx(1) - sx(0), sy(0) - sy(1),
                    `rgb(${shade},${shade},255)`,
                    ` data-mean="${means[i]}"`));
  }
  const bx = uLow.indexOf(lows[best]);
  const by = uHigh.indexOf(highs[best]);
  parts.push(circle(sx(bx + 0.5), sy(by + 0.5), 6, "none",
                    ' stroke="#d62728" stroke-width="2" data-role="argmax"'));
  uLow.forEach((v, i) => parts.push(
    text(sx(i + 0.5), a.y0 + 18, trimNum(v))));
  uHigh.forEach((v, i) => parts.push(
    text(a.x0 - 8, sy(i + 0.5) + 4, trimNum(v), "end")));
  parts.push(text((a.x0 + a.x1) / 2, HEIGHT - 8, "lower threshold"));
  parts.push(`<text x="16" y="${(a.y0 + a.y1) / 2}" text-anchor="middle" ` +
             `transform="rotate(-90 16 ${(a.y0 + a.y1) / 2})">upper threshold</text>`);
  parts.push("</svg>");
  return parts.join("\n");
}

export function renderKwTrace(table: Table): string {
  requireColumns(table, ["iter", "theta_lower", "theta_upper", "grad_lower",
                         "grad_upper", "value"], "kw_trace.csv");
  const it = numbers(table, "iter");
  const lo = numbers(table, "theta_lower");
  const hi = numbers(table, "theta_upper");
  const a = plotArea();
  const sx = linearScale(it[0], it[it.length - 1] || 1, a.x0, a.x1);
  const all = [...lo, ...hi];
  const sy = linearScale(Math.min(...all), Math.max(...all), a.y0, a.y1);
  const parts = openSvg("Kiefer-Wolfowitz threshold iterates");
  parts.push(...axes(sx, sy, "iteration", "threshold"));
  parts.push(polyline(it.map((v, i) => [sx(v), sy(lo[i])]), "#d62728", 2));
  parts.push(polyline(it.map((v, i) => [sx(v), sy(hi[i])]), "#1f77b4", 2));
  parts.push(text(a.x1 - 4, sy(lo[lo.length - 1]) + 14, "lower", "end",
                  ' fill="#d62728"'));
  parts.push(text(a.x1 - 4, sy(hi[hi.length - 1]) - 6, "upper", "end",
                  ' fill="#1f77b4"'));
  parts.push("</svg>");
  return parts.join("\n");
}

export interface PathOptions {
  thetaLower?: number;
  thetaUpper?: number;
}

export function pathScales(steps: number[], values: number[],
                           opts: PathOptions): { sx: Scale; sy: Scale } {
  const a = plotArea();
  const levels = [opts.thetaLower ?? Infinity, opts.thetaUpper ?? -Infinity];
  const lo = Math.min(...values, ...levels.filter((v) => isFinite(v)));
  const hi = Math.max(...values, ...levels.filter((v) => isFinite(v)));
  const pad = 0.05 * (hi - lo || 1);
  return {
    sx: linearScale(steps[0], steps[steps.length - 1], a.x0, a.x1),
    sy: linearScale(lo - pad, hi + pad, a.y0, a.y1),
  };
}

export function renderPathWithCrossings(path: Table, crossings: Table,
                                        opts: PathOptions = {}): string {
  requireColumns(path, ["step", "x", "s", "regen"], "path.csv");
  requireColumns(crossings, ["index", "t_idx", "l_idx", "x_at_t", "s_at_t",
                             "x_at_l", "s_at_l", "duration", "in_state_space"],
                 "crossings.csv");
  const steps = numbers(path, "step");
  const s = numbers(path, "s");
  const { sx, sy } = pathScales(steps, s, opts);
  const a = plotArea();
  const parts = openSvg("walk with buy/sell crossings");
  parts.push(...axes(sx, sy, "step", "level"));
  for (const [level, color, label] of [
    [opts.thetaLower, "#d62728", "lower"] as const,
    [opts.thetaUpper, "#2ca02c", "upper"] as const,
  ]) {
    if (level !== undefined) {
      parts.push(line(a.x0, sy(level), a.x1, sy(level), color, "5 4"));
      parts.push(text(a.x1 - 4, sy(level) - 4, `${label} ${trimNum(level)}`,
                      "end", ` fill="${color}"`));
    }
  }
  parts.push(polyline(steps.map((v, i) => [sx(v), sy(s[i])]), "#1f77b4", 1.5));
  for (const row of crossings.rows) {
    const t = Number(row.t_idx);
    const l = Number(row.l_idx);
    parts.push(circle(sx(t), sy(Number(row.s_at_t)), 5, "#d62728",
                      ` data-role="buy" data-step="${t}"`));
    parts.push(circle(sx(l), sy(Number(row.s_at_l)), 5, "#2ca02c",
                      ` data-role="sell" data-step="${l}"`));
  }
  parts.push("</svg>");
  return parts.join("\n");
}
