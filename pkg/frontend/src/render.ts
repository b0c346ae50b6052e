/** CLI: render --kind K --in PATH [--in2 PATH] --out PATH [options]
 *
 * Kinds: TvDecay, LlnTrace, OvershootHist, Surface, KwTrace,
 * PathWithCrossings.  The second input carries the crossings CSV for
 * PathWithCrossings and the JSON sidecar (fitted rate, noise floor) for
 * TvDecay.  Inputs are read-only; the only write is the output SVG.
 */

import { readFileSync, writeFileSync } from "fs";
import { SchemaMismatchError, parseCsv } from "./csv";
import { renderKwTrace, renderLlnTrace, renderOvershootHist,
         renderPathWithCrossings, renderSurface, renderTvDecay } from "./figures";

const KINDS = ["TvDecay", "LlnTrace", "OvershootHist", "Surface", "KwTrace",
               "PathWithCrossings"];

export interface Args {
  kind: string;
  inputs: string[];
  out: string;
  thetaLower?: number;
  thetaUpper?: number;
}

export function parseArgs(argv: string[]): Args {
  const args: Args = { kind: "", inputs: [], out: "" };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[i + 1];
    switch (flag) {
      case "--kind": args.kind = value; i++; break;
      case "--in": args.inputs.push(value); i++; break;
      case "--in2": args.inputs.push(value); i++; break;
      case "--out": args.out = value; i++; break;
      case "--theta-lower": args.thetaLower = Number(value); i++; break;
      case "--theta-upper": args.thetaUpper = Number(value); i++; break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  if (!KINDS.includes(args.kind)) {
    throw new Error(`--kind must be one of ${KINDS.join(", ")}`);
  }
  if (args.inputs.length === 0 || !args.out) {
    throw new Error("--in and --out are required");
  }
  return args;
}

export function renderToString(args: Args): string {
  const primary = parseCsv(readFileSync(args.inputs[0], "utf8"));
  switch (args.kind) {
    case "TvDecay": {
      const meta = args.inputs[1]
        ? JSON.parse(readFileSync(args.inputs[1], "utf8"))
        : {};
      return renderTvDecay(primary, meta);
    }
    case "LlnTrace":
      return renderLlnTrace(primary);
    case "OvershootHist":
      return renderOvershootHist(primary);
    case "Surface":
      return renderSurface(primary);
    case "KwTrace":
      return renderKwTrace(primary);
    case "PathWithCrossings": {
      if (!args.inputs[1]) {
        throw new Error("PathWithCrossings needs --in2 crossings.csv");
      }
      const crossings = parseCsv(readFileSync(args.inputs[1], "utf8"));
      return renderPathWithCrossings(primary, crossings,
                                     { thetaLower: args.thetaLower,
                                       thetaUpper: args.thetaUpper });
    }
    default:
      throw new Error(`unhandled kind ${args.kind}`);
  }
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
  try {
    writeFileSync(args.out, renderToString(args));
  } catch (err) {
    if (err instanceof SchemaMismatchError) {
      console.error(`schema mismatch: ${err.message}`);
      return 1;
    }
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
  return 0;
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
