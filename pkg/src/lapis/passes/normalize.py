"""Rewrite every scf.parallel to run from 0 with step 1.

The original index is reconstructed in the body as lo + i*step (folded when
lo is 0 or step is 1); trip counts are preserved. Bounds that are all
compile-time constants fold to a constant trip count so downstream
parallelism estimation still sees constant bounds.
"""

from __future__ import annotations

from ..dialect import Diagnostic, constant_int_value, scf_parallel_bounds
from ..ir import INDEX, Builder, Operation, Program, Value, op_path, walk
from . import PassError
from .common import replace_uses


def normalize_loops(program: Program) -> Program:
    program = program.clone()
    diags: list[Diagnostic] = []
    for op in walk(program):
        if op.name == "scf.parallel":
            _normalize(op, program, diags)
    if diags:
        raise PassError(diags, "normalize_loops")
    return program


def _normalize(op: Operation, program: Program, diags: list[Diagnostic]) -> None:
    lows, ups, steps, inits = scf_parallel_bounds(op)
    k = op.attrs.get("dims", 1)
    dims = []
    needs_work = False
    for d in range(k):
        lo_c = constant_int_value(lows[d])
        st_c = constant_int_value(steps[d])
        if st_c is not None and st_c <= 0:
            diags.append(Diagnostic(op_path(op, program), f"non-positive step {st_c} in dim {d}", op))
            return
        normalized = lo_c == 0 and st_c == 1
        dims.append((lo_c, st_c, normalized))
        needs_work = needs_work or not normalized
    if not needs_work:
        return

    parent = op.parent_region
    b = Builder(parent, parent.ops.index(op))
    c0 = b.const_index(0)
    c1 = b.const_index(1)
    body = op.region(0)
    prologue = Builder(body, 0)

    new_lows, new_ups, new_steps = [], [], []
    for d in range(k):
        lo_c, st_c, normalized = dims[d]
        if normalized:
            new_lows.append(lows[d])
            new_ups.append(ups[d])
            new_steps.append(steps[d])
            continue
        up_c = constant_int_value(ups[d])
        if lo_c is not None and st_c is not None and up_c is not None:
            trips = max(0, -((lo_c - up_c) // st_c))
            trip_v = b.const_index(trips)
        else:
            span = b.op("arith.subi", [ups[d], lows[d]], [INDEX]).result
            trip_v = b.op("arith.ceildivsi", [span, steps[d]], [INDEX]).result
        new_lows.append(c0)
        new_ups.append(trip_v)
        new_steps.append(c1)

        old_arg = body.args[d]
        new_arg = Value(INDEX, body, d, old_arg.name_hint)
        body.args[d] = new_arg
        if st_c == 1:
            orig = prologue.op("arith.addi", [lows[d], new_arg], [INDEX]).result
        elif lo_c == 0:
            orig = prologue.op("arith.muli", [new_arg, steps[d]], [INDEX]).result
        else:
            scaled = prologue.op("arith.muli", [new_arg, steps[d]], [INDEX]).result
            orig = prologue.op("arith.addi", [lows[d], scaled], [INDEX]).result
        replace_uses(body, old_arg, orig)

    op.operands = [*new_lows, *new_ups, *new_steps, *inits]
