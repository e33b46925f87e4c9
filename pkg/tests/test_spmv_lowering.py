import numpy as np

from lapis.interp import run
from lapis.ir import walk
from lapis.parser import parse
from lapis.passes.spmv_lowering import lower_spmv_csr
from lapis.printer import print_program

from conftest import load_fixture, random_csr, spmv4_inputs


def lowered_spmv():
    return lower_spmv_csr(load_fixture("spmv"))


def test_replaces_op_with_two_level_pattern():
    program = lowered_spmv()
    assert not any(op.name == "sparse.spmv_csr" for op in walk(program))
    loops = [op for op in walk(program) if op.name == "scf.parallel"]
    assert len(loops) == 2
    outer, inner = loops
    assert inner.parent_region.parent_op is outer
    assert len(inner.results) == 1  # row reduction
    assert print_program(parse(print_program(program))) == print_program(program)


def test_rowptr_trip_counts():
    program = lowered_spmv()
    result = run(program, "spmv", spmv4_inputs())
    # outer trips = 4 rows; inner trips {2, 1, 0, 2} = 5 value loads in total
    stores = {path: n for path, n in result.counters["store"].items()}
    assert sum(stores.values()) == 4
    assert np.array_equal(result.outputs[0], [3.0, 3.0, 0.0, 9.0])


def test_identity_matrix():
    program = lowered_spmv()
    rowptr = np.array([0, 1, 2, 3], dtype=np.int64)
    colind = np.array([0, 1, 2], dtype=np.int64)
    values = np.ones(3)
    x = np.array([1.0, 2.0, 3.0])
    result = run(program, "spmv", [rowptr, colind, values, x, np.zeros(3)])
    assert np.array_equal(result.outputs[0], x)


def test_random_csr_matches_densified_oracle():
    program = lowered_spmv()
    rng = np.random.default_rng(31)
    rowptr, colind, values, dense = random_csr(rng, 100, 100, 0.05)
    x = rng.uniform(-1.0, 1.0, 100)
    got = run(program, "spmv", [rowptr, colind, values, x, np.zeros(100)]).outputs[0]
    oracle = dense @ x
    assert np.all(np.abs(got - oracle) <= 1e-13 * np.maximum(np.abs(oracle), 1.0))


def test_int_rowptr_types_get_casts():
    program = parse(
        """
        func @spmv(%rowptr: memref<?xi32>, %colind: memref<?xi32>, %values: memref<?xf64>,
                   %x: memref<?xf64>, %y: memref<?xf64>) -> (memref<?xf64>) {
          sparse.spmv_csr(%rowptr, %colind, %values, %x, %y)
          func.return(%y)
        }
        """
    )
    lowered = lower_spmv_csr(program)
    assert any(op.name == "arith.index_cast" for op in walk(lowered))
    rowptr = np.array([0, 2, 3, 3, 5], dtype=np.int32)
    colind = np.array([0, 1, 2, 0, 3], dtype=np.int32)
    values = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    got = run(lowered, "spmv", [rowptr, colind, values, np.ones(4), np.zeros(4)]).outputs[0]
    assert np.array_equal(got, [3.0, 3.0, 0.0, 9.0])


def test_noop_without_spmv_ops():
    program = load_fixture("depth1")
    assert print_program(lower_spmv_csr(program)) == print_program(program)
