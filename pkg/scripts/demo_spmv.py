#!/usr/bin/env python3
"""End-to-end walkthrough on the SpMV fixture.

Lowers the CSR matrix-vector product through the full preset, prints the IR
after each pass, interprets the original and lowered programs on a small
matrix, and compares the lazy transfer trace against the eager baseline.
"""

from pathlib import Path

import numpy as np

from lapis.emitter import EmitOptions, emit
from lapis.interp import copy_events, diff_outputs, run, run_eager_baseline
from lapis.parser import parse_file
from lapis.passes import PassPipeline, TargetConfig, run_pipeline

ROOT = Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "tests" / "fixtures" / "spmv.mlir"


def main() -> None:
    program = parse_file(str(FIXTURE))
    result = run_pipeline(program, PassPipeline.preset(), TargetConfig())
    for name, snapshot in result.snapshots:
        print(f"// ----- after {name}")
        print(snapshot)

    rowptr = np.array([0, 2, 3, 3, 5], dtype=np.int64)
    colind = np.array([0, 1, 2, 0, 3], dtype=np.int64)
    values = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    x = np.ones(4)
    args = [rowptr, colind, values, x, np.zeros(4)]

    pre = run(program, "spmv", [a.copy() for a in args])
    post = run(result.program, "spmv", [a.copy() for a in args])
    eager = run_eager_baseline(result.program, "spmv", [a.copy() for a in args])

    print("y (original) =", pre.outputs[0])
    print("y (lowered)  =", post.outputs[0])
    print("outputs:", diff_outputs(pre.outputs, post.outputs))
    print(f"lazy transfers:  {[str(e) for e in copy_events(post.trace)]}")
    print(f"eager transfers: {len(copy_events(eager.trace))} copies "
          f"(lazy saves {len(copy_events(eager.trace)) - len(copy_events(post.trace))})")

    emitted = emit(result.program, EmitOptions(header_name="spmv"))
    print("\n// ----- emitted C++")
    print(emitted.source)


if __name__ == "__main__":
    main()
