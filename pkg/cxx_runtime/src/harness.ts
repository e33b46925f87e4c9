// Helpers for the compile-smoke harness: drive the compiler CLI, build the
// emitted sources against the serial stub, and parse driver/trace output.
import { spawnSync } from "node:child_process";
import { existsSync, mkdirSync, readdirSync, writeFileSync } from "node:fs";
import { dirname, join, resolve } from "node:path";

export const REPO_ROOT = resolve(__dirname, "..", "..");
export const FIXTURE_DIR = join(REPO_ROOT, "tests", "fixtures");
export const INCLUDE_DIR = join(REPO_ROOT, "cxx_runtime", "include");
export const DRIVER_DIR = join(REPO_ROOT, "cxx_runtime", "drivers");

const PYTHON = process.env.PYTHON ?? "python3";
const CXX = process.env.CXX ?? "clang++";

export interface RunResult {
  status: number;
  stdout: string;
  stderr: string;
}

export function lapisCli(args: string[], stdin?: string): RunResult {
  const proc = spawnSync(PYTHON, ["-m", "lapis.cli", ...args], {
    cwd: REPO_ROOT,
    input: stdin,
    encoding: "utf8",
    env: { ...process.env, PYTHONPATH: join(REPO_ROOT, "src") },
  });
  return { status: proc.status ?? -1, stdout: proc.stdout ?? "", stderr: proc.stderr ?? "" };
}

export function fixtureNames(): string[] {
  return readdirSync(FIXTURE_DIR)
    .filter((f) => f.endsWith(".mlir"))
    .map((f) => f.replace(/\.mlir$/, ""))
    .sort();
}

export function lowerFixture(name: string): string {
  const result = lapisCli([
    "opt",
    "--sparse-compiler-kokkos",
    join(FIXTURE_DIR, `${name}.mlir`),
  ]);
  if (result.status !== 0) {
    throw new Error(`opt failed for ${name}: ${result.stderr}`);
  }
  return result.stdout;
}

export function emitFixture(name: string, outDir: string): string {
  mkdirSync(outDir, { recursive: true });
  const header = join(outDir, `${name}.hpp`);
  const runtime = join(outDir, "lapis_dualview_runtime.hpp");
  const result = lapisCli(
    [
      "translate",
      "--header-name",
      name,
      "-o",
      header,
      ...(existsSync(runtime) ? [] : ["--emit-runtime-header", runtime]),
    ],
    lowerFixture(name),
  );
  if (result.status !== 0) {
    throw new Error(`translate failed for ${name}: ${result.stderr}`);
  }
  return header;
}

export interface CompileRequest {
  sources: string[];
  output: string;
  includeDirs: string[];
  syntaxOnly?: boolean;
}

export function compileCpp(req: CompileRequest): RunResult {
  const args = [
    "-std=c++17",
    "-Wall",
    "-DLAPIS_USE_SERIAL_STUB",
    ...req.includeDirs.map((d) => `-I${d}`),
    ...(req.syntaxOnly ? ["-fsyntax-only"] : ["-o", req.output]),
    ...req.sources,
  ];
  const proc = spawnSync(CXX, args, { encoding: "utf8" });
  return { status: proc.status ?? -1, stdout: proc.stdout ?? "", stderr: proc.stderr ?? "" };
}

export function runExecutable(path: string): RunResult {
  const proc = spawnSync(path, [], { encoding: "utf8" });
  return { status: proc.status ?? -1, stdout: proc.stdout ?? "", stderr: proc.stderr ?? "" };
}

export function writeMainIncluding(headerName: string, outDir: string): string {
  const tu = join(outDir, `tu_${headerName}.cpp`);
  writeFileSync(tu, `#include "${headerName}.hpp"\nint main() { return 0; }\n`);
  return tu;
}

export interface TransferCounts {
  h2dCount: number;
  d2hCount: number;
  h2dBytes: number;
  d2hBytes: number;
}

// Aggregates `H2D root=<name> bytes=<n>` / `D2H ...` lines from `lapis run --trace`.
export function countTraceLines(text: string): TransferCounts {
  const counts: TransferCounts = { h2dCount: 0, d2hCount: 0, h2dBytes: 0, d2hBytes: 0 };
  for (const line of text.split("\n")) {
    const match = line.match(/^(H2D|D2H) root=\S+ bytes=(\d+)$/);
    if (!match) continue;
    const bytes = Number(match[2]);
    if (match[1] === "H2D") {
      counts.h2dCount += 1;
      counts.h2dBytes += bytes;
    } else {
      counts.d2hCount += 1;
      counts.d2hBytes += bytes;
    }
  }
  return counts;
}

// Parses the driver's `transfers: h2d_count=.. d2h_count=.. ...` line.
export function parseDriverCounts(text: string): TransferCounts {
  const match = text.match(
    /transfers: h2d_count=(\d+) d2h_count=(\d+) h2d_bytes=(\d+) d2h_bytes=(\d+)/,
  );
  if (!match) throw new Error(`no transfer counters in driver output:\n${text}`);
  return {
    h2dCount: Number(match[1]),
    d2hCount: Number(match[2]),
    h2dBytes: Number(match[3]),
    d2hBytes: Number(match[4]),
  };
}

export function parseDriverVector(text: string): number[] {
  const match = text.match(/^y: (.+)$/m);
  if (!match) throw new Error(`no result vector in driver output:\n${text}`);
  return match[1].trim().split(/\s+/).map(Number);
}

export function parseRunOutputs(text: string): number[][] {
  const out: number[][] = [];
  for (const line of text.split("\n")) {
    const match = line.match(/^shape: \[[^\]]*\] data: \[([^\]]*)\]$/);
    if (match) {
      out.push(match[1].split(",").map((t) => Number(t.trim())));
    }
  }
  return out;
}
