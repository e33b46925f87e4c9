import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { beforeAll, describe, expect, it } from "vitest";

import {
  DRIVER_DIR,
  FIXTURE_DIR,
  INCLUDE_DIR,
  compileCpp,
  countTraceLines,
  emitFixture,
  fixtureNames,
  lapisCli,
  lowerFixture,
  parseDriverCounts,
  parseDriverVector,
  parseRunOutputs,
  runExecutable,
  writeMainIncluding,
} from "../src/harness";

const workDir = mkdtempSync(join(tmpdir(), "lapis-smoke-"));
const includes = [workDir, INCLUDE_DIR];

beforeAll(() => {
  const header = lapisCli(["translate", "--emit-runtime-header", join(workDir, "lapis_dualview_runtime.hpp"), "-o", join(workDir, "noop.hpp")], "func @noop() { func.return }\n");
  expect(header.status, header.stderr).toBe(0);
});

describe("runtime header", () => {
  it("compiles alone in an empty translation unit", () => {
    const tu = join(workDir, "tu_header_only.cpp");
    writeFileSync(tu, '#include "lapis_dualview_runtime.hpp"\nint main() { return 0; }\n');
    const result = compileCpp({ sources: [tu], output: "", includeDirs: includes, syntaxOnly: true });
    expect(result.status, result.stderr).toBe(0);
  });

  it("performs zero copies for repeated syncs on a clean wrapper", () => {
    const exe = join(workDir, "sync_probe");
    const compiled = compileCpp({
      sources: [join(DRIVER_DIR, "sync_probe.cpp")],
      output: exe,
      includeDirs: includes,
    });
    expect(compiled.status, compiled.stderr).toBe(0);
    const run = runExecutable(exe);
    expect(run.stdout, run.stdout).toContain("sync_probe: OK");
    expect(run.status).toBe(0);
  });
});

describe("compile smoke over the fixture corpus", () => {
  it.each(fixtureNames())("emitted %s compiles against the serial stub", (name) => {
    emitFixture(name, workDir);
    const tu = writeMainIncluding(name, workDir);
    const result = compileCpp({ sources: [tu], output: "", includeDirs: includes, syntaxOnly: true });
    expect(result.status, result.stderr).toBe(0);
  }, 60000);

  it("rejects a deliberately corrupted emitted file", () => {
    const header = emitFixture("depth1", workDir);
    const corrupted = join(workDir, "depth1_corrupted.hpp");
    writeFileSync(corrupted, readFileSync(header, "utf8").replace("parallel_for", "parallel_fro"));
    const tu = join(workDir, "tu_corrupted.cpp");
    writeFileSync(tu, '#include "depth1_corrupted.hpp"\nint main() { return 0; }\n');
    const result = compileCpp({ sources: [tu], output: "", includeDirs: includes, syntaxOnly: true });
    expect(result.status).not.toBe(0);
    expect(result.stderr).toContain("parallel_fro");
  });
});

interface ParityCase {
  fixture: string;
  driver: string;
  argsText: string;
}

// each driver builds the same inputs its args text describes, so outputs and
// transfer counters must agree with `lapis run --trace` line for line
const PARITY_CASES: ParityCase[] = [
  {
    fixture: "spmv",
    driver: "spmv_driver.cpp",
    argsText: [
      "shape: [5] data: [0, 2, 3, 3, 5]",
      "shape: [5] data: [0, 1, 2, 0, 3]",
      "shape: [5] data: [1.0, 2.0, 3.0, 4.0, 5.0]",
      "shape: [4] data: [1.0, 1.0, 1.0, 1.0]",
      "shape: [4] data: [0.0, 0.0, 0.0, 0.0]",
      "",
    ].join("\n"),
  },
  {
    fixture: "two_kernel",
    driver: "two_kernel_driver.cpp",
    argsText:
      "shape: [64] data: [" +
      Array.from({ length: 64 }, (_, i) => (0.5 * i).toFixed(1)).join(", ") +
      "]\n",
  },
  {
    fixture: "globals",
    driver: "globals_driver.cpp",
    argsText: "shape: [4] data: [1.0, 2.0, 3.0, 4.0]\n",
  },
];

describe("driver parity with the interpreter", () => {
  it.each(PARITY_CASES)(
    "$fixture driver reproduces outputs and transfer counts exactly",
    ({ fixture, driver, argsText }) => {
      emitFixture(fixture, workDir);
      const exe = join(workDir, `${fixture}_driver`);
      const compiled = compileCpp({
        sources: [join(DRIVER_DIR, driver)],
        output: exe,
        includeDirs: includes,
      });
      expect(compiled.status, compiled.stderr).toBe(0);

      const run = runExecutable(exe);
      expect(run.status, run.stderr).toBe(0);
      const y = parseDriverVector(run.stdout);
      const driverCounts = parseDriverCounts(run.stdout);

      const argsPath = join(workDir, `${fixture}.args`);
      writeFileSync(argsPath, argsText);
      const interp = lapisCli(
        ["run", "--args", argsPath, "--trace"],
        lowerFixture(fixture),
      );
      expect(interp.status, interp.stderr).toBe(0);
      const expected = parseRunOutputs(interp.stdout)[0];
      expect(y).toEqual(expected.slice(0, y.length));

      const traceCounts = countTraceLines(interp.stdout);
      expect(driverCounts).toEqual(traceCounts);
    },
    60000,
  );
});
