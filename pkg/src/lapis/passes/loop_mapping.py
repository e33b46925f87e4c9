"""Map scf.parallel nests onto hierarchical kokkos parallel loops.

Four sub-steps per top-level nest, in order:

1. Host eligibility: a nest that allocates memory anywhere inside must run
   on the host; everything else targets the device.
2. Depth mapping: depth 1 becomes range_parallel (toprange, or topmdrange
   for a multi-dimensional loop); depth 2 becomes thread_parallel over the
   outer loop with threadvector range_parallel loops inside; depth 3+
   becomes team_parallel / teamthread / sequential scf.for / threadvector.
3. Vector-length hints: estimated from the loop that became the
   threadvector loop; constant bounds give min(nextPow2(n), maxVectorLength),
   the CSR begin/end pattern inserts a runtime estimate (mean entries per
   row, rounded up to the next power of two, capped), anything else gives no
   hint. Team sizes are always left to the runtime.
4. Synchronization: side-effecting ops between parallel nesting levels are
   wrapped in kokkos.single; a team_barrier follows every non-reducing
   teamthread loop (reductions already imply synchronization, and
   threadvector loops synchronize implicitly).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..dialect import Diagnostic, constant_int_value, scf_parallel_bounds
from ..ir import (
    INDEX,
    I1,
    TEAM_HANDLE,
    Builder,
    Operation,
    Program,
    Region,
    Value,
    op_path,
    walk,
)
from . import PassError, TargetConfig
from .common import adopt_region, adopt_results, loop_is_normalized, next_pow2, replace_uses, splice

_SIDE_EFFECT_WRAPPABLE = ("memref.store", "memref.copy", "memref.dealloc")


def map_loops(program: Program, config: TargetConfig) -> Program:
    program = program.clone()
    diags: list[Diagnostic] = []
    for op in walk(program):
        if op.dialect == "linalg":
            diags.append(Diagnostic(op_path(op, program), "linalg ops present; lower them first", op))
        elif op.name == "scf.parallel" and not loop_is_normalized(op):
            diags.append(Diagnostic(op_path(op, program), "scf.parallel not normalized", op))
    if diags:
        raise PassError(diags, "map_loops")
    for func in program.funcs():
        _map_in_region(func.region(0), config, program, diags)
    if diags:
        raise PassError(diags, "map_loops")
    return program


def _map_in_region(region: Region, config: TargetConfig, program: Program,
                   diags: list[Diagnostic]) -> None:
    i = 0
    while i < len(region.ops):
        op = region.ops[i]
        if op.name == "scf.parallel":
            _map_nest(op, config, program, diags)
        else:
            for sub in op.regions:
                _map_in_region(sub, config, program, diags)
        i += 1


# --- nest analysis --------------------------------------------------------------

@dataclass
class _LoopInfo:
    op: Operation
    level: int
    is_leaf: bool
    role: str = ""  # toprange | topmdrange | thread | team | teamthread | threadvector | seq


def _collect_nest(root: Operation) -> list[_LoopInfo]:
    """Pre-order loop infos for the nest rooted at `root`."""
    infos: list[_LoopInfo] = []

    def visit(op: Operation, level: int) -> None:
        info = _LoopInfo(op, level, is_leaf=True)
        infos.append(info)
        info.is_leaf = not descend(op, level)

    def descend(op: Operation, level: int) -> bool:
        found = False
        for region in op.regions:
            for inner in region.ops:
                if inner.name == "scf.parallel":
                    visit(inner, level + 1)
                    found = True
                elif descend(inner, level):
                    found = True
        return found

    visit(root, 1)
    return infos


def _assign_roles(infos: list[_LoopInfo], diags: list[Diagnostic], program: Program) -> bool:
    depth = max(i.level for i in infos)
    root = infos[0]
    k = root.op.attrs.get("dims", 1)
    if depth == 1:
        root.role = "topmdrange" if k > 1 else "toprange"
        return True
    root.role = "thread" if depth == 2 else "team"
    ok = True
    for info in infos[1:]:
        if info.level == 2:
            info.role = "threadvector" if depth == 2 else "teamthread"
        elif info.is_leaf:
            info.role = "threadvector"
        else:
            info.role = "seq"
        if info.role == "seq" and info.op.results:
            diags.append(Diagnostic(op_path(info.op, program),
                                    "cannot sequentialize a reducing middle loop", info.op))
            ok = False
    return ok


# --- estimate planning -------------------------------------------------------------

@dataclass
class ParallelismEstimate:
    kind: str  # constant | runtime | unknown
    constant: int = 0
    rowptr: Value | None = None


def estimate_parallelism(loop: Operation, program: Program | None = None) -> ParallelismEstimate:
    """Estimate the iteration count of a normalized scf.parallel loop.

    Constant bounds give constant(n); the CSR begin/end pattern (bound is
    load(P[i+1]) - load(P[i]) over the parent loop's index) is recognized for
    a runtime estimate; anything else is unknown.
    """
    _, ups, _, _ = scf_parallel_bounds(loop)
    consts = [constant_int_value(u) for u in ups]
    if all(c is not None for c in consts):
        n = 1
        for c in consts:
            n *= c
        return ParallelismEstimate("constant", constant=max(n, 0))
    if len(ups) == 1:
        rowptr = _match_csr_bound(loop, ups[0])
        if rowptr is not None:
            return ParallelismEstimate("runtime", rowptr=rowptr)
    return ParallelismEstimate("unknown")


def _peel_casts(v: Value) -> Value:
    while True:
        d = v.defining_op()
        if d is not None and d.name == "arith.index_cast":
            v = d.operands[0]
        else:
            return v


def _match_csr_bound(loop: Operation, ub: Value) -> Value | None:
    parent = loop.parent_region.parent_op if loop.parent_region else None
    if parent is None or parent.name != "scf.parallel":
        return None
    row_var = parent.region(0).args[0] if parent.region(0).args else None
    if row_var is None:
        return None
    sub = _peel_casts(ub).defining_op()
    if sub is None or sub.name != "arith.subi":
        return None
    hi = _peel_casts(sub.operands[0]).defining_op()
    lo = _peel_casts(sub.operands[1]).defining_op()
    if hi is None or lo is None or hi.name != "memref.load" or lo.name != "memref.load":
        return None
    if hi.operands[0] is not lo.operands[0]:
        return None
    rowptr = hi.operands[0]
    if rowptr.type.rank != 1:
        return None
    if lo.operands[1] is not row_var:
        return None
    nxt = hi.operands[1].defining_op()
    if nxt is None or nxt.name != "arith.addi":
        return None
    a, bv = nxt.operands
    plus_one = (a is row_var and constant_int_value(bv) == 1) or \
               (bv is row_var and constant_int_value(a) == 1)
    if not plus_one:
        return None
    return rowptr


def _value_dominates(value: Value, op: Operation) -> bool:
    d = value.defining_op()
    if d is None:
        owner = value.owner
        cur = op
        while cur is not None:
            if cur.parent_region is owner:
                return True
            cur = cur.parent_region.parent_op if cur.parent_region else None
        return owner is None
    cur = op
    while cur is not None:
        r = cur.parent_region
        if r is None:
            return False
        if r is d.parent_region:
            return r.ops.index(d) < r.ops.index(cur)
        cur = r.parent_op
    return False


def _emit_hint(b: Builder, estimate: ParallelismEstimate, config: TargetConfig) -> Value | None:
    cap = config.max_vector_length
    if estimate.kind == "constant":
        return b.const_index(min(next_pow2(estimate.constant), cap))
    if estimate.kind != "runtime":
        return None
    rowptr = estimate.rowptr
    c1 = b.const_index(1)
    n_bounds = b.op("memref.dim", [rowptr], [INDEX], {"index": 0}).result
    n_rows = b.op("arith.subi", [n_bounds, c1], [INDEX]).result
    nnz_raw = b.op("memref.load", [rowptr, n_rows], [rowptr.type.element]).result
    nnz = nnz_raw if nnz_raw.type == INDEX else b.op("arith.index_cast", [nnz_raw], [INDEX]).result
    # guard the division against an empty matrix; the estimate is moot then
    rows_floor = b.op("arith.maxsi", [n_rows, c1], [INDEX]).result
    k = b.op("arith.ceildivsi", [nnz, rows_floor], [INDEX]).result
    acc = b.const_index(cap)
    p = cap // 2
    while p >= 1:
        pc = b.const_index(p)
        cond = b.op("arith.cmpi", [k, pc], [I1], {"predicate": "sle"}).result
        acc = b.op("arith.select", [cond, pc, acc], [INDEX]).result
        p //= 2
    return acc


# --- conversion -----------------------------------------------------------------

def _swap_terminator(region: Region) -> None:
    term = region.ops[-1]
    if term.name == "scf.yield":
        kyield = Operation("kokkos.yield")
        kyield.parent_region = region
        region.ops[-1] = kyield


def _flatten(loop: Operation) -> None:
    """Rewrite a k-D normalized scf.parallel into an equivalent 1-D one."""
    k = loop.attrs.get("dims", 1)
    if k == 1:
        return
    _, ups, _, inits = scf_parallel_bounds(loop)
    parent = loop.parent_region
    b = Builder(parent, parent.ops.index(loop))
    c0 = b.const_index(0)
    c1 = b.const_index(1)
    total = ups[0]
    for u in ups[1:]:
        total = b.op("arith.muli", [total, u], [INDEX]).result
    strides: list[Value | None] = [None] * k
    acc: Value | None = None
    for d in range(k - 2, -1, -1):
        acc = ups[d + 1] if acc is None else b.op("arith.muli", [acc, ups[d + 1]], [INDEX]).result
        strides[d] = acc

    body = loop.region(0)
    old_args = list(body.args)
    flat = Value(INDEX, body, 0, "flat")
    body.args = [flat]
    pb = Builder(body, 0)
    rem = flat
    for d in range(k):
        if d < k - 1:
            i_d = pb.op("arith.divi", [rem, strides[d]], [INDEX]).result
            scaled = pb.op("arith.muli", [i_d, strides[d]], [INDEX]).result
            rem = pb.op("arith.subi", [rem, scaled], [INDEX]).result
        else:
            i_d = rem
        replace_uses(body, old_args[d], i_d)
    loop.operands = [c0, total, c1, *inits]
    loop.attrs["dims"] = 1


def _convert_to_range(loop: Operation, level: str, exec_space: str | None) -> Operation:
    if level in ("teamthread", "threadvector"):
        _flatten(loop)
    _, ups, _, inits = scf_parallel_bounds(loop)
    attrs = {"dims": loop.attrs.get("dims", 1), "parallelLevel": level}
    if exec_space is not None:
        attrs["executionSpace"] = exec_space
    new = Operation("kokkos.range_parallel", [*ups, *inits], [], attrs)
    adopt_results(new, loop)
    region = loop.region(0)
    adopt_region(new, region)
    _swap_terminator(region)
    parent = loop.parent_region
    splice(parent, parent.ops.index(loop), [new])
    return new


def _convert_top(loop: Operation, kind: str, exec_space: str) -> Operation:
    _flatten(loop)
    _, ups, _, inits = scf_parallel_bounds(loop)
    name = "kokkos.team_parallel" if kind == "team" else "kokkos.thread_parallel"
    attrs = {"dims": 1, "executionSpace": exec_space}
    new = Operation(name, [*ups, *inits], [], attrs)
    adopt_results(new, loop)
    region = loop.region(0)
    if kind == "team":
        region.add_arg(TEAM_HANDLE, "team")
    adopt_region(new, region)
    _swap_terminator(region)
    parent = loop.parent_region
    splice(parent, parent.ops.index(loop), [new])
    return new


def _sequentialize(loop: Operation) -> None:
    k = loop.attrs.get("dims", 1)
    _, ups, _, _ = scf_parallel_bounds(loop)
    parent = loop.parent_region
    b = Builder(parent, parent.ops.index(loop))
    c0 = b.const_index(0)
    c1 = b.const_index(1)
    body = loop.region(0)
    old_args = list(body.args)

    innermost = Region([INDEX])
    innermost.ops = body.ops
    for op in innermost.ops:
        op.parent_region = innermost
    replace_uses(innermost, old_args[k - 1], innermost.args[0])

    current = innermost
    for d in range(k - 2, -1, -1):
        inner_for = Operation("scf.for", [c0, ups[d + 1], c1])
        adopt_region(inner_for, current)
        wrapper = Region([INDEX])
        wrapper.append(inner_for)
        wrapper.append(Operation("scf.yield"))
        replace_uses(wrapper, old_args[d], wrapper.args[0])
        current = wrapper
    outer = Operation("scf.for", [c0, ups[0], c1])
    adopt_region(outer, current)
    splice(parent, parent.ops.index(loop), [outer])


# --- synchronization ------------------------------------------------------------

def _nearest_parallel_within(op: Operation, root: Operation) -> Operation | None:
    cur = op.parent_region.parent_op if op.parent_region else None
    while cur is not None:
        if cur.name in ("kokkos.range_parallel", "kokkos.team_parallel", "kokkos.thread_parallel"):
            return cur
        if cur is root:
            return None
        cur = cur.parent_region.parent_op if cur.parent_region else None
    return None


def _inside_single(op: Operation, root: Operation) -> bool:
    cur = op.parent_region.parent_op if op.parent_region else None
    while cur is not None and cur is not root:
        if cur.name == "kokkos.single":
            return True
        cur = cur.parent_region.parent_op if cur.parent_region else None
    return False


def _insert_synchronization(root: Operation) -> None:
    if root.name not in ("kokkos.team_parallel", "kokkos.thread_parallel"):
        return
    # wrap side effects that sit between parallel nesting levels
    candidates = []
    for op in walk(root):
        if op is root:
            continue
        wrappable = op.name in _SIDE_EFFECT_WRAPPABLE or \
            (op.name == "func.call" and not op.results)
        if not wrappable:
            continue
        enclosing = _nearest_parallel_within(op, root)
        at = enclosing if enclosing is not None else root
        if at.name == "kokkos.range_parallel" and at.attrs.get("parallelLevel") == "threadvector":
            continue  # inside the innermost parallel loop
        if _inside_single(op, root):
            continue
        level = "perTeam" if at.name == "kokkos.team_parallel" else "perThread"
        candidates.append((op, level))
    for op, level in candidates:
        region = op.parent_region
        idx = region.ops.index(op)
        single = Operation("kokkos.single", attrs={"level": level})
        body = Region()
        body.append(op)
        body.append(Operation("kokkos.yield"))
        adopt_region(single, body)
        single.parent_region = region
        region.ops[idx] = single

    # conservative barriers after non-reducing teamthread loops
    if root.name != "kokkos.team_parallel":
        return
    targets = []
    for op in walk(root):
        if op.name == "kokkos.range_parallel" and op.attrs.get("parallelLevel") == "teamthread":
            if op.region(0).ops[-1].name != "scf.reduce":
                targets.append(op)
    for op in targets:
        region = op.parent_region
        barrier = Operation("kokkos.team_barrier")
        barrier.parent_region = region
        region.ops.insert(region.ops.index(op) + 1, barrier)


# --- per-nest driver ---------------------------------------------------------------

def _map_nest(root: Operation, config: TargetConfig, program: Program,
              diags: list[Diagnostic]) -> None:
    infos = _collect_nest(root)
    if not _assign_roles(infos, diags, program):
        return
    exec_space = "device"
    for op in walk(root):
        if op.name == "memref.alloc":
            exec_space = "host"
            break

    # plan the vector-length hint before the scf structure is rewritten
    estimate = None
    tv_first = next((i for i in infos if i.role == "threadvector"), None)
    if tv_first is not None:
        est = estimate_parallelism(tv_first.op, program)
        if est.kind == "runtime" and not _value_dominates(est.rowptr, root):
            est = ParallelismEstimate("unknown")
        estimate = est

    parent = root.parent_region
    converted_root: Operation | None = None
    for info in sorted(infos, key=lambda i: -i.level):
        if info.role in ("toprange", "topmdrange"):
            converted_root = _convert_to_range(info.op, info.role, exec_space)
        elif info.role in ("teamthread", "threadvector"):
            _convert_to_range(info.op, info.role, None)
        elif info.role in ("team", "thread"):
            converted_root = _convert_top(info.op, info.role, exec_space)
        elif info.role == "seq":
            _sequentialize(info.op)

    if converted_root is not None and estimate is not None and converted_root.name in (
            "kokkos.team_parallel", "kokkos.thread_parallel"):
        b = Builder(parent, parent.ops.index(converted_root))
        hint = _emit_hint(b, estimate, config)
        if hint is not None:
            dims = converted_root.attrs.get("dims", 1)
            converted_root.operands.insert(dims, hint)
            converted_root.attrs["has_vector_length_hint"] = 1

    if converted_root is not None:
        _insert_synchronization(converted_root)
