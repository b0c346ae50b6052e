import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { SchemaMismatchError, parseCsv, numbers } from "../src/csv";
import { pathScales } from "../src/figures";
import { main, renderToString } from "../src/render";

const FIX = join(__dirname, "..", "fixtures");

const JOBS: Array<{ kind: string; inputs: string[]; extra?: string[] }> = [
  { kind: "TvDecay", inputs: ["tv_decay.csv", "tv_decay.json"] },
  { kind: "LlnTrace", inputs: ["lln.csv"] },
  { kind: "OvershootHist", inputs: ["overshoots.csv"] },
  { kind: "Surface", inputs: ["surface.csv"] },
  { kind: "KwTrace", inputs: ["kw_trace.csv"] },
  { kind: "PathWithCrossings", inputs: ["path.csv", "crossings.csv"],
    extra: ["--theta-lower", "-0.3", "--theta-upper", "0.3"] },
];

function argsFor(job: (typeof JOBS)[number], out: string): string[] {
  const argv = ["--kind", job.kind, "--in", join(FIX, job.inputs[0])];
  if (job.inputs[1]) argv.push("--in2", join(FIX, job.inputs[1]));
  argv.push("--out", out);
  return argv.concat(job.extra ?? []);
}

describe("figure rendering", () => {
  const dir = mkdtempSync(join(tmpdir(), "figs-"));

  for (const job of JOBS) {
    it(`renders ${job.kind} and is byte-stable`, () => {
      const out1 = join(dir, `${job.kind}-1.svg`);
      const out2 = join(dir, `${job.kind}-2.svg`);
      expect(main(argsFor(job, out1))).toBe(0);
      expect(main(argsFor(job, out2))).toBe(0);
      const svg = readFileSync(out1, "utf8");
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
      expect(svg.length).toBeGreaterThan(500);
      expect(readFileSync(out2, "utf8")).toBe(svg);
    });
  }

  it("marks buys and sells exactly at the fixture crossing times", () => {
    const pathTable = parseCsv(readFileSync(join(FIX, "path.csv"), "utf8"));
    const crossings = parseCsv(readFileSync(join(FIX, "crossings.csv"), "utf8"));
    const svg = renderToString({
      kind: "PathWithCrossings",
      inputs: [join(FIX, "path.csv"), join(FIX, "crossings.csv")],
      out: "",
      thetaLower: -0.3,
      thetaUpper: 0.3,
    });
    const { sx, sy } = pathScales(numbers(pathTable, "step"),
                                  numbers(pathTable, "s"),
                                  { thetaLower: -0.3, thetaUpper: 0.3 });
    const first = crossings.rows[0];
    expect(Number(first.t_idx)).toBe(3);
    expect(Number(first.l_idx)).toBe(5);
    const buy = svg.match(/<circle[^>]*data-role="buy"[^>]*>/)![0];
    const sell = svg.match(/<circle[^>]*data-role="sell"[^>]*>/)![0];
    expect(buy).toContain(`data-step="3"`);
    expect(sell).toContain(`data-step="5"`);
    const cx = Number(buy.match(/cx="([^"]+)"/)![1]);
    const cy = Number(buy.match(/cy="([^"]+)"/)![1]);
    expect(cx).toBeCloseTo(sx(3), 1);
    expect(cy).toBeCloseTo(sy(Number(first.s_at_t)), 1);
    const scx = Number(sell.match(/cx="([^"]+)"/)![1]);
    expect(scx).toBeCloseTo(sx(5), 1);
  });

  it("argmax marker sits on the best surface cell", () => {
    const svg = renderToString({ kind: "Surface",
                                 inputs: [join(FIX, "surface.csv")], out: "" });
    expect(svg).toContain('data-role="argmax"');
  });

  it("rejects an empty CSV with a schema error", () => {
    const empty = join(dir, "empty.csv");
    writeFileSync(empty, "");
    expect(() => renderToString({ kind: "LlnTrace", inputs: [empty], out: "" }))
      .toThrow(SchemaMismatchError);
  });

  it("names the missing column", () => {
    const wrong = join(dir, "wrong.csv");
    writeFileSync(wrong, "cycle,phi\n1,0.5\n");
    expect(() => renderToString({ kind: "LlnTrace", inputs: [wrong], out: "" }))
      .toThrow(/running_mean/);
  });

  it("rejects unknown kinds and missing flags", () => {
    expect(main(["--kind", "Sparkline", "--in", "x", "--out", "y"])).toBe(2);
    expect(main(["--kind", "LlnTrace"])).toBe(2);
  });

  it("returns 1 on schema mismatch from the CLI", () => {
    const wrong = join(dir, "wrong2.csv");
    writeFileSync(wrong, "a,b\n1,2\n");
    expect(main(["--kind", "KwTrace", "--in", wrong,
                 "--out", join(dir, "never.svg")])).toBe(1);
  });
});
