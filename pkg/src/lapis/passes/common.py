"""Shared rewriting helpers for the lowering passes."""

from __future__ import annotations

from ..dialect import COMBINER_KINDS, constant_int_value
from ..ir import DYNAMIC, INDEX, I1, Builder, MemRefType, Operation, Region, ScalarType, Value, walk


def replace_uses(root, old: Value, new: Value) -> None:
    for op in walk(root):
        for i, v in enumerate(op.operands):
            if v is old:
                op.operands[i] = new


def adopt_results(new_op: Operation, old_op: Operation) -> None:
    """Transfer the old op's result values onto its replacement (no RAUW needed)."""
    new_op.results = old_op.results
    for i, r in enumerate(new_op.results):
        r.owner = new_op
        r.index = i


def adopt_region(new_op: Operation, region: Region) -> Region:
    region.parent_op = new_op
    new_op.regions.append(region)
    return region


def splice(region: Region, index: int, replacement: list[Operation]) -> None:
    """Replace the op at `index` with a list of ops."""
    for op in replacement:
        op.parent_region = region
    region.ops[index:index + 1] = replacement


def dim_or_const(b: Builder, view: Value, axis: int) -> Value:
    """Extent of `view` along `axis`: a constant for static dims, memref.dim otherwise."""
    t: MemRefType = view.type
    if t.shape[axis] != DYNAMIC:
        return b.const_index(t.shape[axis])
    return b.op("memref.dim", [view], [INDEX], {"index": axis}).result


def make_combiner_region(kind: str, elem: ScalarType) -> Region:
    """Two-argument combiner region for scf.reduce: add/mul/min/max."""
    assert kind in COMBINER_KINDS
    region = Region([elem, elem])
    a, c = region.args
    b = Builder(region)
    if kind in ("add", "mul"):
        name = ("arith.addf" if kind == "add" else "arith.mulf") if elem.is_float else \
               ("arith.addi" if kind == "add" else "arith.muli")
        out = b.op(name, [a, c], [elem]).result
    else:
        if elem.is_float:
            pred = "olt" if kind == "min" else "ogt"
            cond = b.op("arith.cmpf", [a, c], [I1], {"predicate": pred}).result
        else:
            pred = "slt" if kind == "min" else "sgt"
            cond = b.op("arith.cmpi", [a, c], [I1], {"predicate": pred}).result
        out = b.op("arith.select", [cond, a, c], [elem]).result
    b.op("scf.reduce.return", [out])
    return region


def identity_literal(kind: str, elem: ScalarType):
    if elem.is_float:
        if kind == "add":
            return 0.0
        if kind == "mul":
            return 1.0
        return float("inf") if kind == "min" else float("-inf")
    if kind == "add":
        return 0
    if kind == "mul":
        return 1
    w = 1 if elem.kind == "i1" else (32 if elem.kind == "i32" else 64)
    return (1 << (w - 1)) - 1 if kind == "min" else -(1 << (w - 1))


def make_parallel_reduce(b: Builder, ub: Value, init: Value, combiner: str,
                         elem: ScalarType, body_build) -> Value:
    """Emit a normalized 1-D scf.parallel carrying one reduction.

    `body_build(builder, iv) -> Value` produces the per-iteration contribution.
    """
    c0 = b.const_index(0)
    c1 = b.const_index(1)
    region = Region([INDEX])
    inner = Builder(region)
    contrib = body_build(inner, region.args[0])
    reduce = Operation("scf.reduce", [contrib])
    adopt_region(reduce, make_combiner_region(combiner, elem))
    inner.insert(reduce)
    loop = Operation("scf.parallel", [c0, ub, c1, init], [elem], {"dims": 1})
    adopt_region(loop, region)
    b.insert(loop)
    return loop.result


def make_parallel_nest(b: Builder, ubs: list[Value], body_build) -> None:
    """Emit one normalized multi-dimensional scf.parallel (no reductions).

    `body_build(builder, ivs)` fills the loop body; the yield is appended."""
    c0 = b.const_index(0)
    c1 = b.const_index(1)
    k = len(ubs)
    region = Region([INDEX] * k)
    inner = Builder(region)
    body_build(inner, list(region.args))
    inner.op("scf.yield")
    loop = Operation("scf.parallel", [c0] * k + list(ubs) + [c1] * k, [], {"dims": k})
    adopt_region(loop, region)
    b.insert(loop)


def loop_is_normalized(op: Operation) -> bool:
    from ..dialect import scf_parallel_bounds

    lows, _, steps, _ = scf_parallel_bounds(op)
    return all(constant_int_value(v) == 0 for v in lows) and \
        all(constant_int_value(v) == 1 for v in steps)


def next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (n - 1).bit_length()
