"""Lower the dense linear-algebra ops.

`lower_linalg_to_kernels` rewrites matmul/matvec into kernel-library calls
(kokkos.gemm / kokkos.gemv) when the target enables them. `lower_dense_linalg`
replaces the remaining linalg ops with normalized scf.parallel nests:

    matmul       parallel(i) > parallel(j) > parallel-reduce(k, add)
    matvec       parallel(i) > parallel-reduce(j, add)
    batch_matmul parallel(b) > parallel(i) > parallel(j) > parallel-reduce(k)
    fill         one rank-deep multi-dimensional parallel (plain store, rank 0)
    elementwise  one rank-deep multi-dimensional parallel over the output
    reduce       parallel over kept axes wrapping a reduce over dropped axes
"""

from __future__ import annotations

from ..dialect import Diagnostic
from ..ir import (
    INDEX,
    Builder,
    MemRefType,
    Operation,
    Program,
    Region,
    ScalarType,
    Value,
    clone_op,
    op_path,
)
from . import PassError, TargetConfig, common

_KERNEL_REWRITES = {"linalg.matmul": "kokkos.gemm", "linalg.matvec": "kokkos.gemv"}


def lower_linalg_to_kernels(program: Program, config: TargetConfig) -> Program:
    if not config.kernel_library_calls:
        return program
    program = program.clone()
    for func in program.funcs():
        for region, i, op in _indexed_ops(func.region(0)):
            new_name = _KERNEL_REWRITES.get(op.name)
            if new_name is not None:
                replacement = Operation(new_name, list(op.operands))
                common.splice(region, i, [replacement])
    return program


def lower_dense_linalg(program: Program, config: TargetConfig) -> Program:
    program = program.clone()
    expanders = {
        "linalg.matmul": _expand_matmul,
        "linalg.matvec": _expand_matvec,
        "linalg.batch_matmul": _expand_batch_matmul,
        "linalg.fill": _expand_fill,
        "linalg.elementwise": _expand_elementwise,
        "linalg.reduce": _expand_reduce,
    }
    for func in program.funcs():
        for region, i, op in _indexed_ops(func.region(0)):
            expand = expanders.get(op.name)
            if expand is None:
                if op.dialect == "linalg":
                    raise PassError([Diagnostic(op_path(op, program),
                                                f"unsupported linalg op {op.name}", op)],
                                    "lower_dense_linalg")
                continue
            common.splice(region, i, expand(op))
    return program


def _indexed_ops(region):
    """(region, index, op) triples, innermost regions first, snapshot order."""
    out = []

    def visit(r):
        for i, op in enumerate(list(r.ops)):
            for sub in op.regions:
                visit(sub)
            out.append((r, i, op))

    visit(region)
    # indices stay valid because each splice replaces exactly one op in place;
    # process in reverse so earlier indices are unaffected by later growth
    return reversed(out)


def _mul_op(elem: ScalarType) -> str:
    return "arith.mulf" if elem.is_float else "arith.muli"


def _load(b: Builder, view: Value, idx: list[Value]) -> Value:
    return b.op("memref.load", [view, *idx], [view.type.element]).result


def _expand_matmul(op: Operation) -> list[Operation]:
    a, bm, c = op.operands
    elem = c.type.element
    staging = Region()
    b = Builder(staging)
    m = common.dim_or_const(b, a, 0)
    n = common.dim_or_const(b, bm, 1)
    k = common.dim_or_const(b, a, 1)

    def body(ib: Builder, ivs: list[Value]) -> None:
        _emit_dot_rows(ib, a, bm, c, ivs, k, elem, batch=None)

    _nest_two(b, m, n, body)
    return list(staging.ops)


def _nest_two(b: Builder, m: Value, n: Value, body) -> None:
    def outer(ob: Builder, i_ivs: list[Value]) -> None:
        common.make_parallel_nest(ob, [n], lambda jb, j_ivs: body(jb, [i_ivs[0], j_ivs[0]]))

    common.make_parallel_nest(b, [m], outer)


def _emit_dot_rows(ib: Builder, a: Value, bm: Value, c: Value, ivs: list[Value],
                   k: Value, elem: ScalarType, batch: Value | None) -> None:
    zero = ib.constant(common.identity_literal("add", elem), elem)

    def contribution(kb: Builder, kk: Value) -> Value:
        a_idx = [batch, ivs[0], kk] if batch is not None else [ivs[0], kk]
        b_idx = [batch, kk, ivs[1]] if batch is not None else [kk, ivs[1]]
        av = _load(kb, a, a_idx)
        bv = _load(kb, bm, b_idx)
        return kb.op(_mul_op(elem), [av, bv], [elem]).result

    acc = common.make_parallel_reduce(ib, k, zero, "add", elem, contribution)
    c_idx = [batch, *ivs] if batch is not None else list(ivs)
    ib.op("memref.store", [acc, c, *c_idx])


def _expand_matvec(op: Operation) -> list[Operation]:
    a, x, y = op.operands
    elem = y.type.element
    staging = Region()
    b = Builder(staging)
    m = common.dim_or_const(b, a, 0)
    n = common.dim_or_const(b, a, 1)

    def body(ib: Builder, ivs: list[Value]) -> None:
        i = ivs[0]
        zero = ib.constant(common.identity_literal("add", elem), elem)

        def contribution(jb: Builder, j: Value) -> Value:
            av = _load(jb, a, [i, j])
            xv = _load(jb, x, [j])
            return jb.op(_mul_op(elem), [av, xv], [elem]).result

        acc = common.make_parallel_reduce(ib, n, zero, "add", elem, contribution)
        ib.op("memref.store", [acc, y, i])

    common.make_parallel_nest(b, [m], body)
    return list(staging.ops)


def _expand_batch_matmul(op: Operation) -> list[Operation]:
    a, bm, c = op.operands
    elem = c.type.element
    staging = Region()
    b = Builder(staging)
    nb = common.dim_or_const(b, a, 0)
    m = common.dim_or_const(b, a, 1)
    n = common.dim_or_const(b, bm, 2)
    k = common.dim_or_const(b, a, 2)

    def batch_body(ob: Builder, b_ivs: list[Value]) -> None:
        batch = b_ivs[0]
        _nest_two(ob, m, n, lambda ib, ivs: _emit_dot_rows(ib, a, bm, c, ivs, k, elem, batch=batch))

    common.make_parallel_nest(b, [nb], batch_body)
    return list(staging.ops)


def _expand_fill(op: Operation) -> list[Operation]:
    value, out = op.operands
    t: MemRefType = out.type
    staging = Region()
    b = Builder(staging)
    if t.rank == 0:
        b.op("memref.store", [value, out])
        return list(staging.ops)
    ubs = [common.dim_or_const(b, out, d) for d in range(t.rank)]
    common.make_parallel_nest(b, ubs, lambda ib, ivs: ib.op("memref.store", [value, out, *ivs]))
    return list(staging.ops)


def _expand_elementwise(op: Operation) -> list[Operation]:
    ins = op.operands[:-1]
    out = op.operands[-1]
    t: MemRefType = out.type
    body_region = op.region(0)
    staging = Region()
    b = Builder(staging)

    def emit_body(ib: Builder, ivs: list[Value]) -> None:
        value_map = {}
        for arg, view in zip(body_region.args, ins):
            value_map[arg] = _load(ib, view, ivs)
        for inner in body_region.ops[:-1]:
            ib.insert(clone_op(inner, value_map))
        yielded = body_region.ops[-1].operands[0]
        ib.op("memref.store", [value_map.get(yielded, yielded), out, *ivs])

    if t.rank == 0:
        emit_body(b, [])
        return list(staging.ops)
    ubs = [common.dim_or_const(b, out, d) for d in range(t.rank)]
    common.make_parallel_nest(b, ubs, emit_body)
    return list(staging.ops)


def _expand_reduce(op: Operation) -> list[Operation]:
    src, dst = op.operands
    t: MemRefType = src.type
    axes = list(op.attrs["axes"])
    combiner = op.attrs["combiner"]
    elem = t.element
    kept = [d for d in range(t.rank) if d not in axes]
    staging = Region()
    b = Builder(staging)
    ubs = {d: common.dim_or_const(b, src, d) for d in range(t.rank)}

    def emit_reduction(ib: Builder, kept_ivs: list[Value]) -> None:
        init = ib.constant(common.identity_literal(combiner, elem), elem)
        red_region = Region([INDEX] * len(axes))
        rb = Builder(red_region)
        full = [None] * t.rank
        for d, iv in zip(kept, kept_ivs):
            full[d] = iv
        for d, iv in zip(axes, red_region.args):
            full[d] = iv
        contrib = _load(rb, src, full)
        reduce = Operation("scf.reduce", [contrib])
        common.adopt_region(reduce, common.make_combiner_region(combiner, elem))
        rb.insert(reduce)
        c0 = ib.const_index(0)
        c1 = ib.const_index(1)
        k = len(axes)
        loop = Operation("scf.parallel",
                         [c0] * k + [ubs[d] for d in axes] + [c1] * k + [init],
                         [elem], {"dims": k})
        common.adopt_region(loop, red_region)
        ib.insert(loop)
        ib.op("memref.store", [loop.result, dst, *kept_ivs])

    if not kept:
        emit_reduction(b, [])
        return list(staging.ops)
    common.make_parallel_nest(b, [ubs[d] for d in kept], emit_reduction)
    return list(staging.ops)
