import functools
from pathlib import Path

import numpy as np

from lapis.ir import DYNAMIC, MemRefType, Program
from lapis.parser import parse_file
from lapis.passes import PassPipeline, TargetConfig, run_pipeline

FIXTURE_DIR = Path(__file__).parent / "fixtures"
GOLDEN_DIR = Path(__file__).parent / "golden"

FIXTURE_NAMES = sorted(p.stem for p in FIXTURE_DIR.glob("*.mlir"))

NUMPY_DTYPES = {
    "f16": np.float16, "f32": np.float32, "f64": np.float64,
    "i1": np.uint8, "i32": np.int32, "i64": np.int64, "index": np.int64,
}


def fixture_path(name: str) -> Path:
    return FIXTURE_DIR / f"{name}.mlir"


def load_fixture(name: str) -> Program:
    return parse_file(str(fixture_path(name)))


@functools.lru_cache(maxsize=None)
def preset_outputs(name: str):
    """(original, lowered, snapshots) for a fixture; cached, do not mutate."""
    program = load_fixture(name)
    result = run_pipeline(program, PassPipeline.preset(), TargetConfig())
    return program, result.program, tuple(result.snapshots)


def entry_name(program: Program) -> str:
    return program.funcs()[0].attrs["sym_name"]


def random_inputs(program: Program, rng: np.random.Generator, dynamic_extent: int = 8):
    """Random arguments matching the sole function's signature."""
    func = program.funcs()[0]
    out = []
    for arg in func.region(0).args:
        t = arg.type
        if isinstance(t, MemRefType):
            shape = tuple(dynamic_extent if d == DYNAMIC else d for d in t.shape)
            dtype = NUMPY_DTYPES[t.element.kind]
            if t.element.is_float:
                out.append(rng.uniform(-2.0, 2.0, shape).astype(dtype))
            else:
                out.append(rng.integers(-50, 50, shape).astype(dtype))
        else:
            out.append(int(rng.integers(1, 8)))
    return out


def spmv4_inputs():
    return [
        np.array([0, 2, 3, 3, 5], dtype=np.int64),
        np.array([0, 1, 2, 0, 3], dtype=np.int64),
        np.array([1.0, 2.0, 3.0, 4.0, 5.0]),
        np.ones(4),
        np.zeros(4),
    ]


SPMV4_EXPECTED = np.array([3.0, 3.0, 0.0, 9.0])


def random_csr(rng: np.random.Generator, rows: int, cols: int, density: float):
    """(rowptr, colind, values, dense) with exact per-row draws."""
    counts = rng.binomial(cols, density, size=rows)
    rowptr = np.zeros(rows + 1, dtype=np.int64)
    rowptr[1:] = np.cumsum(counts)
    colind = np.concatenate(
        [np.sort(rng.choice(cols, size=c, replace=False)) for c in counts]
        or [np.zeros(0, dtype=np.int64)]).astype(np.int64)
    values = rng.uniform(-1.0, 1.0, rowptr[-1])
    dense = np.zeros((rows, cols))
    for i in range(rows):
        for j in range(rowptr[i], rowptr[i + 1]):
            dense[i, colind[j]] = values[j]
    return rowptr, colind, values, dense


def csr_with_mean(rng: np.random.Generator, rows: int, nnz_total: int, cols: int):
    """CSR structure with an exact total nonzero count spread over rows."""
    counts = np.full(rows, nnz_total // rows, dtype=np.int64)
    for i in rng.choice(rows, size=nnz_total % rows, replace=False):
        counts[i] += 1
    counts = np.minimum(counts, cols)
    deficit = nnz_total - int(counts.sum())
    i = 0
    while deficit > 0:
        if counts[i % rows] < cols:
            counts[i % rows] += 1
            deficit -= 1
        i += 1
    rowptr = np.zeros(rows + 1, dtype=np.int64)
    rowptr[1:] = np.cumsum(counts)
    colind = np.concatenate(
        [np.sort(rng.choice(cols, size=int(c), replace=False)) for c in counts]).astype(np.int64)
    values = rng.uniform(-1.0, 1.0, rowptr[-1])
    return rowptr, colind, values
