#!/usr/bin/env python3
"""Sweep the vector-length heuristic over synthetic CSR row statistics.

For a range of mean-nonzeros-per-row values, builds a synthetic CSR matrix
with that mean, runs the lowered SpMV under the interpreter, and reports the
vector length the inserted runtime estimate chose; useful for eyeballing the
rounding and capping behavior.

    python3 scripts/hint_sweep.py [mean ...] [--max-vector-length N]
"""

import argparse
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from conftest import csr_with_mean  # noqa: E402

from lapis.interp import run  # noqa: E402
from lapis.parser import parse_file  # noqa: E402
from lapis.passes import PassPipeline, TargetConfig, run_pipeline  # noqa: E402

DEFAULT_MEANS = [0.5, 1.0, 2.0, 3.7, 7.0, 14.34, 24.0, 48.0, 80.0, 130.0]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("means", nargs="*", type=float, default=None)
    ap.add_argument("--max-vector-length", type=int, default=32)
    ap.add_argument("--rows", type=int, default=256)
    args = ap.parse_args()
    means = args.means or DEFAULT_MEANS

    program = parse_file(str(ROOT / "tests" / "fixtures" / "spmv.mlir"))
    lowered = run_pipeline(program, PassPipeline.preset(),
                           TargetConfig(max_vector_length=args.max_vector_length)).program

    rng = np.random.default_rng(0)
    cols = max(4096, args.rows)
    print(f"rows={args.rows}  cap={args.max_vector_length}")
    print(f"{'nnz_mean':>10} {'nnz_total':>10} {'hint':>6}")
    for mean in means:
        nnz = max(0, int(round(mean * args.rows)))
        rowptr, colind, values = csr_with_mean(rng, args.rows, nnz, cols)
        x = rng.uniform(-1.0, 1.0, cols)
        result = run(lowered, "spmv", [rowptr, colind, values, x, np.zeros(args.rows)])
        (hint,) = result.counters["hint"].values()
        print(f"{mean:>10.2f} {nnz:>10} {hint:>6}")


if __name__ == "__main__":
    main()
