"""Assign memory spaces and insert lazy host/device coherence operations.

Every memref root (function parameter, allocation, global, call result) gets
a space: device when touched only inside device kernels, host when touched
only by host code, dualview when both sides touch it or it crosses a
function boundary. Around each device kernel and each maximal host
straight-line run, the pass inserts kokkos.sync before first reads and
kokkos.modify after writes, tracking an abstract synced-state per root so a
buffer is never synced twice in the same direction without an intervening
modify of the other side. The syncs are lazy at runtime either way: a sync
whose source side is unmodified only costs a flag check.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..dialect import Diagnostic
from ..ir import MemRefType, Operation, Program, Region, Value, op_path, walk
from . import PassError, TargetConfig

_DATA_ACCESS = {
    "memref.load": ((0, False),),
    "memref.store": ((1, True),),
    "memref.copy": ((0, False), (1, True)),
    "kokkos.gemm": ((0, False), (1, False), (2, True)),
    "kokkos.gemv": ((0, False), (1, False), (2, True)),
    "linalg.matmul": ((0, False), (1, False), (2, True)),
    "linalg.matvec": ((0, False), (1, False), (2, True)),
    "sparse.spmv_csr": ((0, False), (1, False), (2, False), (3, False), (4, True)),
}

_KERNEL_OPS = ("kokkos.gemm", "kokkos.gemv")


def _is_device_kernel(op: Operation) -> bool:
    if op.name in _KERNEL_OPS:
        return True
    return op.name in ("kokkos.range_parallel", "kokkos.team_parallel", "kokkos.thread_parallel") \
        and op.attrs.get("executionSpace") == "device"


def _contains_device_kernel(op: Operation) -> bool:
    return any(_is_device_kernel(inner) for inner in walk(op) if inner is not op)


def manage_dualviews(program: Program, config: TargetConfig) -> Program:
    program = program.clone()
    diags: list[Diagnostic] = []
    for op in walk(program):
        if op.name == "scf.parallel":
            diags.append(Diagnostic(op_path(op, program), "scf.parallel present; map loops first", op))
    for op in walk(program):
        for v in [*op.results, *(a for r in op.regions for a in r.args)]:
            if isinstance(v.type, MemRefType) and v.type.space != "unassigned":
                diags.append(Diagnostic(op_path(op, program),
                                        f"memory space already assigned ({v.type.space})", op))
                break
    if diags:
        raise PassError(diags, "manage_dualviews")
    for g in program.ops:
        if g.name == "memref.global":
            g.attrs["type"] = g.attrs["type"].with_space("dualview")
    for func in program.funcs():
        _Manager(func, program, diags).run()
    if diags:
        raise PassError(diags, "manage_dualviews")
    return program


@dataclass
class _RootInfo:
    key: object
    value: Value | None  # representative SSA value (None for globals)
    device_access: bool = False
    host_access: bool = False
    boundary: bool = False
    space: str = ""


@dataclass
class _State:
    """Abstract per-root coherence: which side is known current."""

    synced_host: dict = field(default_factory=dict)
    synced_device: dict = field(default_factory=dict)

    def copy(self) -> "_State":
        return _State(dict(self.synced_host), dict(self.synced_device))

    def register(self, key, host: bool, device: bool) -> None:
        self.synced_host.setdefault(key, host)
        self.synced_device.setdefault(key, device)

    def merge(self, other: "_State") -> "_State":
        keys = set(self.synced_host) | set(other.synced_host)
        return _State(
            {k: self.synced_host.get(k, False) and other.synced_host.get(k, False) for k in keys},
            {k: self.synced_device.get(k, False) and other.synced_device.get(k, False) for k in keys},
        )


class _Manager:
    def __init__(self, func: Operation, program: Program, diags: list[Diagnostic]):
        self.func = func
        self.program = program
        self.diags = diags
        self.alias: dict[Value, object] = {}
        self.roots: dict[object, _RootInfo] = {}

    # -- alias and access analysis ------------------------------------------------

    def _root_of(self, v: Value) -> object | None:
        return self.alias.get(v)

    def _add_root(self, key, value: Value | None) -> None:
        if key not in self.roots:
            self.roots[key] = _RootInfo(key, value)

    def analyze(self) -> None:
        body = self.func.region(0)
        for arg in body.args:
            if isinstance(arg.type, MemRefType):
                self.alias[arg] = arg
                self._add_root(arg, arg)
                self.roots[arg].boundary = True
        for op in walk(self.func):
            if op.name == "memref.alloc":
                self.alias[op.results[0]] = op.results[0]
                self._add_root(op.results[0], op.results[0])
            elif op.name in ("memref.subview", "memref.cast"):
                base = self.alias.get(op.operands[0])
                if base is not None:
                    self.alias[op.results[0]] = base
            elif op.name == "memref.get_global":
                key = ("global", op.attrs["symbol"])
                self.alias[op.results[0]] = key
                self._add_root(key, None)
                self.roots[key].boundary = True
            elif op.name == "func.call":
                for r in op.results:
                    if isinstance(r.type, MemRefType):
                        self.alias[r] = r
                        self._add_root(r, r)
                        self.roots[r].boundary = True
        self._classify(self.func.region(0), device=False)
        term = self.func.region(0).ops[-1]
        if term.name == "func.return":
            for v in term.operands:
                key = self._root_of(v)
                if key is not None:
                    self.roots[key].boundary = True
        for info in self.roots.values():
            if info.boundary:
                info.space = "dualview"
            elif info.device_access and info.host_access:
                info.space = "dualview"
            elif info.device_access:
                info.space = "device"
            else:
                info.space = "host"

    def _classify(self, region: Region, device: bool) -> None:
        for op in region.ops:
            on_device = device or _is_device_kernel(op)
            for idx, _w in _DATA_ACCESS.get(op.name, ()):
                key = self._root_of(op.operands[idx])
                if key is None:
                    continue
                info = self.roots[key]
                if on_device:
                    info.device_access = True
                else:
                    info.host_access = True
            if op.name == "func.call":
                for v in op.operands:
                    key = self._root_of(v)
                    if key is not None:
                        self.roots[key].host_access = True
                        self.roots[key].boundary = True
            for sub in op.regions:
                self._classify(sub, on_device)

    # -- type rewriting ----------------------------------------------------------

    def rewrite_types(self) -> None:
        for op in walk(self.func):
            for v in op.results:
                self._rewrite_value(v)
            for region in op.regions:
                for a in region.args:
                    self._rewrite_value(a)
        for a in self.func.region(0).args:
            self._rewrite_value(a)
        term = self.func.region(0).ops[-1]
        if term.name == "func.return":
            self.func.attrs["result_types"] = tuple(v.type for v in term.operands)
        # sanity: assignment must match observed accesses
        for info in self.roots.values():
            if info.space == "device" and info.host_access:
                self.diags.append(Diagnostic(op_path(self.func, self.program),
                                             "device-space buffer has host accesses", self.func))
            if info.space == "host" and info.device_access:
                self.diags.append(Diagnostic(op_path(self.func, self.program),
                                             "host-space buffer has device accesses", self.func))

    def _rewrite_value(self, v: Value) -> None:
        if not isinstance(v.type, MemRefType):
            return
        key = self._root_of(v)
        if key is None:
            return
        v.type = v.type.with_space(self.roots[key].space)

    # -- sync/modify insertion ------------------------------------------------------

    def run(self) -> None:
        self.analyze()
        self.rewrite_types()
        state = _State()
        body = self.func.region(0)
        for arg in body.args:
            if isinstance(arg.type, MemRefType):
                state.register(arg, host=True, device=False)
        self.process_block(body, state, insert=True)

    def _dualview(self, key) -> bool:
        return self.roots[key].space == "dualview"

    def _kernel_accesses(self, op: Operation):
        reads: dict = {}
        writes: dict = {}
        for inner in walk(op):
            for idx, is_write in _DATA_ACCESS.get(inner.name, ()):
                key = self._root_of(inner.operands[idx])
                if key is not None and self._dualview(key):
                    (writes if is_write else reads).setdefault(key, True)
        return list(reads), list(writes)

    def _host_accesses(self, op: Operation, reads: dict, writes: dict) -> None:
        """Accumulate host-side accesses of `op`, skipping device-kernel subtrees."""
        if _is_device_kernel(op):
            return
        for idx, is_write in _DATA_ACCESS.get(op.name, ()):
            key = self._root_of(op.operands[idx])
            if key is not None and self._dualview(key):
                (writes if is_write else reads).setdefault(key, True)
        if op.name == "func.call":
            for v in op.operands:
                key = self._root_of(v)
                if key is not None and self._dualview(key):
                    reads.setdefault(key, True)
                    writes.setdefault(key, True)
        for region in op.regions:
            for inner in region.ops:
                self._host_accesses(inner, reads, writes)

    def _sync_ops(self, key, space: str) -> list[Operation]:
        info = self.roots[key]
        if info.value is not None:
            return [Operation("kokkos.sync", [info.value], attrs={"space": space})]
        sym = key[1]
        g = self.program.find_global(sym)
        getter = Operation("memref.get_global", result_types=[g.attrs["type"]], attrs={"symbol": sym})
        return [getter, Operation("kokkos.sync", [getter.results[0]], attrs={"space": space})]

    def _modify_ops(self, key, space: str) -> list[Operation]:
        info = self.roots[key]
        if info.value is not None:
            return [Operation("kokkos.modify", [info.value], attrs={"space": space})]
        sym = key[1]
        g = self.program.find_global(sym)
        getter = Operation("memref.get_global", result_types=[g.attrs["type"]], attrs={"symbol": sym})
        return [getter, Operation("kokkos.modify", [getter.results[0]], attrs={"space": space})]

    def _ensure_registered(self, state: _State, key) -> None:
        if key in state.synced_host:
            return
        info = self.roots[key]
        if isinstance(key, tuple):  # global: populated on the host at initialization
            state.register(key, host=True, device=False)
        elif info.value is not None and info.value.is_block_arg:
            state.register(key, host=True, device=False)
        else:  # call results: unknown provenance, runtime flags decide
            state.register(key, host=False, device=False)

    def process_block(self, region: Region, state: _State, insert: bool) -> _State:
        insertions: list[tuple[int, Operation]] = []
        run_start: int | None = None
        run_reads: dict = {}
        run_writes: dict = {}

        def flush(end_index: int) -> None:
            nonlocal run_start, run_reads, run_writes
            if run_start is None:
                return
            for key in run_reads:
                self._ensure_registered(state, key)
                if not state.synced_host.get(key, False):
                    for new in self._sync_ops(key, "host"):
                        insertions.append((run_start, new))
                    state.synced_host[key] = True
            for key in run_writes:
                self._ensure_registered(state, key)
                for new in self._modify_ops(key, "host"):
                    insertions.append((end_index, new))
                state.synced_host[key] = True
                state.synced_device[key] = False
            run_start = None
            run_reads = {}
            run_writes = {}

        ops = list(region.ops)
        for i, op in enumerate(ops):
            if op.name == "memref.alloc":
                state.register(op.results[0], host=True, device=True)
            if _is_device_kernel(op):
                flush(i)
                reads, writes = self._kernel_accesses(op)
                for key in reads:
                    self._ensure_registered(state, key)
                    if not state.synced_device.get(key, False):
                        for new in self._sync_ops(key, "device"):
                            insertions.append((i, new))
                        state.synced_device[key] = True
                for key in writes:
                    self._ensure_registered(state, key)
                    for new in self._modify_ops(key, "device"):
                        insertions.append((i + 1, new))
                    state.synced_device[key] = True
                    state.synced_host[key] = False
            elif op.regions and _contains_device_kernel(op):
                flush(i)
                # conservatively hoist the syncs the interior will need
                for target_space, getter in (("device", self._interior_device_reads),
                                             ("host", self._interior_host_reads)):
                    for key in getter(op):
                        self._ensure_registered(state, key)
                        synced = state.synced_device if target_space == "device" else state.synced_host
                        if not synced.get(key, False):
                            for new in self._sync_ops(key, target_space):
                                insertions.append((i, new))
                            synced[key] = True
                if op.name == "scf.if":
                    exits = [self.process_block(sub, state.copy(), insert) for sub in op.regions]
                    if len(exits) == 1:
                        exits.append(state)
                    state = exits[0].merge(exits[1])
                elif op.name == "scf.for":
                    pre = state.copy()
                    probe = self.process_block(op.region(0), state.copy(), insert=False)
                    entry = pre.merge(probe)
                    exit_state = self.process_block(op.region(0), entry.copy(), insert)
                    state = pre.merge(exit_state)
                else:
                    for sub in op.regions:
                        state = self.process_block(sub, state, insert)
            else:
                if run_start is None:
                    run_start = i
                self._host_accesses(op, run_reads, run_writes)
        flush(len(ops) - 1 if ops and _is_terminator(ops[-1]) else len(ops))
        if insert:
            grouped: dict[int, list[Operation]] = {}
            for pos, new in insertions:
                grouped.setdefault(pos, []).append(new)
            for pos in sorted(grouped, reverse=True):
                for new in grouped[pos]:
                    new.parent_region = region
                region.ops[pos:pos] = grouped[pos]
        return state

    def _interior_device_reads(self, op: Operation):
        out: dict = {}
        for inner in walk(op):
            if _is_device_kernel(inner):
                reads, _ = self._kernel_accesses(inner)
                for key in reads:
                    out.setdefault(key, True)
        return list(out)

    def _interior_host_reads(self, op: Operation):
        reads: dict = {}
        writes: dict = {}
        self._host_accesses(op, reads, writes)
        return list(reads)


def _is_terminator(op: Operation) -> bool:
    from ..dialect import schema_for

    schema = schema_for(op.name)
    return schema is not None and schema.terminator
