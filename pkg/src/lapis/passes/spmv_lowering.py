"""Rewrite sparse.spmv_csr into the two-level row/entry parallel pattern.

The outer loop runs over rows (bound = extent(rowptr) - 1); the body loads
the row's begin/end offsets and reduces the products over that row's entries,
storing into y. The generated loops are already normalized (0..n step 1), so
the inner bound has the exact shape the vector-length estimator recognizes.
"""

from __future__ import annotations

from ..ir import INDEX, Builder, Operation, Program, Region, ScalarType, Value
from . import common


def _to_index(b: Builder, v: Value) -> Value:
    if v.type == INDEX:
        return v
    return b.op("arith.index_cast", [v], [INDEX]).result


def lower_spmv_csr(program: Program) -> Program:
    program = program.clone()
    for func in program.funcs():
        _lower_in_region(func.region(0))
    return program


def _lower_in_region(region) -> None:
    i = 0
    while i < len(region.ops):
        op = region.ops[i]
        for sub in op.regions:
            _lower_in_region(sub)
        if op.name == "sparse.spmv_csr":
            common.splice(region, i, _expand(op))
        i += 1


def _expand(op: Operation) -> list[Operation]:
    rowptr, colind, values, x, y = op.operands
    elem: ScalarType = values.type.element
    staging = Region()
    b = Builder(staging)

    c0 = b.const_index(0)
    c1 = b.const_index(1)
    n_bounds = b.op("memref.dim", [rowptr], [INDEX], {"index": 0}).result
    n_rows = b.op("arith.subi", [n_bounds, c1], [INDEX]).result

    body = Region([INDEX])
    row = body.args[0]
    ib = Builder(body)
    begin_raw = ib.op("memref.load", [rowptr, row], [rowptr.type.element]).result
    next_row = ib.op("arith.addi", [row, c1], [INDEX]).result
    end_raw = ib.op("memref.load", [rowptr, next_row], [rowptr.type.element]).result
    begin = _to_index(ib, begin_raw)
    end = _to_index(ib, end_raw)
    length = ib.op("arith.subi", [end, begin], [INDEX]).result
    zero = ib.constant(common.identity_literal("add", elem), elem)

    def entry_body(eb: Builder, jj: Value) -> Value:
        j = eb.op("arith.addi", [begin, jj], [INDEX]).result
        v = eb.op("memref.load", [values, j], [elem]).result
        col_raw = eb.op("memref.load", [colind, j], [colind.type.element]).result
        col = _to_index(eb, col_raw)
        xv = eb.op("memref.load", [x, col], [elem]).result
        name = "arith.mulf" if elem.is_float else "arith.muli"
        return eb.op(name, [v, xv], [elem]).result

    row_sum = common.make_parallel_reduce(ib, length, zero, "add", elem, entry_body)
    ib.op("memref.store", [row_sum, y, row])
    ib.op("scf.yield")

    outer = Operation("scf.parallel", [c0, n_rows, c1], [], {"dims": 1})
    common.adopt_region(outer, body)
    b.insert(outer)
    return list(staging.ops)
