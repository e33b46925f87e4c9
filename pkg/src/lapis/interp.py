"""Reference interpreter and two-space machine simulator.

Executes programs deterministically (all parallel loops run sequentially in
ascending lexicographic index order; reductions combine in ascending index
order) and simulates a host/device machine with per-buffer modified flags,
recording every host<->device transfer. This is the semantic oracle for the
lowering passes and the verifier of lazy-transfer behavior.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .dialect import classify_combiner, parallel_hint_operands, parallel_init_operands, scf_parallel_bounds
from .ir import (
    DYNAMIC,
    MemRefType,
    Operation,
    Program,
    Region,
    ScalarType,
    Value,
    func_result_types,
    op_path,
    walk,
)

TRIP_LIMIT = 1 << 31

NUMPY_DTYPES = {
    "f16": np.float16, "f32": np.float32, "f64": np.float64,
    "i1": np.uint8, "i32": np.int32, "i64": np.int64, "index": np.int64,
}
ELEM_BYTES = {"f16": 2, "f32": 4, "f64": 8, "i1": 1, "i32": 4, "i64": 8, "index": 8}


class InterpError(Exception):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{message}" + (f" at {path}" if path else ""))
        self.path = path


class StaleAccessError(InterpError):
    pass


@dataclass
class ExecConfig:
    league_size_for_sim: int = 4
    strict_stale_checking: bool = True
    seed: int = 0
    has_separate_device_memory: bool = True

    def __post_init__(self) -> None:
        if self.league_size_for_sim < 1:
            raise ValueError("league_size_for_sim must be >= 1")


# --- transfer trace ----------------------------------------------------------

@dataclass(frozen=True)
class TransferEvent:
    kind: str  # H2D | D2H | SyncNoop | StaleAccess
    root: str
    bytes: int = 0
    space: str = ""
    path: str = ""

    def __str__(self) -> str:
        if self.kind in ("H2D", "D2H"):
            return f"{self.kind} root={self.root} bytes={self.bytes}"
        if self.kind == "SyncNoop":
            return f"SyncNoop root={self.root} space={self.space}"
        return f"StaleAccess root={self.root} space={self.space} op={self.path}"


def copy_events(trace: list[TransferEvent]) -> list[TransferEvent]:
    return [e for e in trace if e.kind in ("H2D", "D2H")]


def format_trace(trace: list[TransferEvent]) -> str:
    return "".join(str(e) + "\n" for e in trace)


# --- simulated buffers ---------------------------------------------------------

class SimBuffer:
    """Root allocation: paired host/device storage plus shared modified flags."""

    __slots__ = ("name", "kind", "extents", "host", "device", "modified_host",
                 "modified_device", "refcount", "freed", "space")

    def __init__(self, name: str, kind: str, extents: tuple[int, ...], space: str,
                 host_data=None, single_memory: bool = False):
        self.name = name
        self.kind = kind
        self.extents = extents
        n = 1
        for e in extents:
            n *= e
        self.host = list(host_data) if host_data is not None else [_zero(kind)] * n
        self.device = self.host if single_memory else [_zero(kind)] * n
        self.modified_host = False
        self.modified_device = False
        self.refcount = 1
        self.freed = False
        self.space = space

    @property
    def nbytes(self) -> int:
        n = 1
        for e in self.extents:
            n *= e
        return n * ELEM_BYTES[self.kind]

    def strides(self) -> tuple[int, ...]:
        out = [1] * len(self.extents)
        for i in range(len(self.extents) - 2, -1, -1):
            out[i] = out[i + 1] * self.extents[i + 1]
        return tuple(out)


@dataclass(frozen=True)
class ViewRef:
    """A memref value at runtime: a window into a root buffer."""

    root: SimBuffer
    offsets: tuple[int, ...]
    shape: tuple[int, ...]

    @staticmethod
    def whole(root: SimBuffer) -> "ViewRef":
        return ViewRef(root, (0,) * len(root.extents), root.extents)


def _zero(kind: str):
    return 0.0 if kind in ("f16", "f32", "f64") else 0


# --- scalar arithmetic ---------------------------------------------------------

def _wrap_int(v: int, kind: str) -> int:
    if kind == "i1":
        return v & 1
    w = 32 if kind == "i32" else 64
    v &= (1 << w) - 1
    if v >= 1 << (w - 1):
        v -= 1 << w
    return v


def _round_float(v: float, kind: str) -> float:
    if kind == "f64":
        return float(v)
    if kind == "f32":
        return float(np.float32(v))
    return float(np.float16(v))


def _unsigned(v: int, kind: str) -> int:
    w = 32 if kind == "i32" else 64
    return v & ((1 << w) - 1)


def coerce_scalar(v, kind: str):
    if kind in ("f16", "f32", "f64"):
        return _round_float(float(v), kind)
    return _wrap_int(int(v), kind)


def combine(acc, contrib, combiner: str, kind: str):
    if combiner == "add":
        r = acc + contrib
    elif combiner == "mul":
        r = acc * contrib
    elif combiner == "min":
        return acc if acc <= contrib else contrib
    else:
        return acc if acc >= contrib else contrib
    return coerce_scalar(r, kind)


def combiner_identity(combiner: str, kind: str):
    is_float = kind in ("f16", "f32", "f64")
    if combiner == "add":
        return 0.0 if is_float else 0
    if combiner == "mul":
        return 1.0 if is_float else 1
    if is_float:
        return float("inf") if combiner == "min" else float("-inf")
    w = 1 if kind == "i1" else (32 if kind == "i32" else 64)
    return (1 << (w - 1)) - 1 if combiner == "min" else -(1 << (w - 1))


# --- results ---------------------------------------------------------------------

@dataclass
class RunResult:
    outputs: list
    trace: list[TransferEvent]
    counters: dict = field(default_factory=dict)


@dataclass
class DiffReport:
    match: bool
    message: str = "match"

    def __str__(self) -> str:
        return self.message


# --- the machine -------------------------------------------------------------------

class _Machine:
    def __init__(self, program: Program, config: ExecConfig, eager: bool = False):
        self.program = program
        self.config = config
        self.eager = eager
        self.trace: list[TransferEvent] = []
        self.counters: dict = {"single": {}, "barrier": {}, "store": {}, "hint": {}}
        self.ctx = "host"
        self._paths: dict[int, str] = {}
        self._combiners: dict[int, str | None] = {}
        self._alloc_serial = 0
        self.globals: dict[str, SimBuffer] = {}
        self.funcs = {f.attrs["sym_name"]: f for f in program.funcs()}
        single = not config.has_separate_device_memory
        for op in program.ops:
            if op.name == "memref.global":
                t: MemRefType = op.attrs["type"]
                data = [coerce_scalar(v, t.element.kind) for v in op.attrs["value"].elements]
                buf = SimBuffer(f"@{op.attrs['sym_name']}", t.element.kind, t.shape, t.space,
                                host_data=data, single_memory=single)
                buf.modified_host = True
                self.globals[op.attrs["sym_name"]] = buf

    # -- plumbing

    def path(self, op: Operation) -> str:
        p = self._paths.get(id(op))
        if p is None:
            p = op_path(op, self.program)
            self._paths[id(op)] = p
        return p

    def fail(self, op: Operation, message: str):
        raise InterpError(message, self.path(op))

    # -- buffer access

    def _storage(self, root: SimBuffer, write: bool, op: Operation):
        if root.freed or root.refcount < 1:
            self.fail(op, f"access to freed buffer {root.name}")
        if not self.config.has_separate_device_memory:
            return root.host
        if self.eager:
            use_device = self.ctx == "device"
        else:
            space = root.space
            if space == "dualview":
                use_device = self.ctx == "device"
            elif space == "device":
                if self.ctx != "device":
                    self.fail(op, f"host access to device-space buffer {root.name}")
                use_device = True
            else:  # host or unassigned: a single logical storage
                use_device = False
        if use_device:
            if not write and root.modified_host and root.space == "dualview" and not self.eager:
                self._stale(root, "device", op)
            return root.device
        if not write and root.modified_device and root.space == "dualview" and not self.eager:
            self._stale(root, "host", op)
        return root.host

    def _stale(self, root: SimBuffer, space: str, op: Operation):
        event = TransferEvent("StaleAccess", root.name, space=space, path=self.path(op))
        self.trace.append(event)
        if self.config.strict_stale_checking:
            raise StaleAccessError(f"stale {space} read of {root.name}", self.path(op))

    def _flat_index(self, view: ViewRef, idx: tuple[int, ...], op: Operation) -> int:
        for i, (x, extent) in enumerate(zip(idx, view.shape)):
            if not (0 <= x < extent):
                self.fail(op, f"index {x} out of bounds for extent {extent} in dim {i}")
        strides = view.root.strides()
        flat = 0
        for x, off, s in zip(idx, view.offsets, strides):
            flat += (off + x) * s
        return flat

    def load_element(self, view: ViewRef, idx: tuple[int, ...], op: Operation):
        data = self._storage(view.root, write=False, op=op)
        return data[self._flat_index(view, idx, op)]

    def store_element(self, view: ViewRef, idx: tuple[int, ...], value, op: Operation):
        data = self._storage(view.root, write=True, op=op)
        data[self._flat_index(view, idx, op)] = value

    def sync(self, root: SimBuffer, space: str, op: Operation | None = None):
        """Copy the opposite buffer into `space`'s buffer if it was modified."""
        if not self.config.has_separate_device_memory:
            self.trace.append(TransferEvent("SyncNoop", root.name, space=space))
            return
        if space == "device":
            if root.modified_host:
                root.device[:] = root.host
                root.modified_host = False
                self.trace.append(TransferEvent("H2D", root.name, bytes=root.nbytes))
            else:
                self.trace.append(TransferEvent("SyncNoop", root.name, space=space))
        else:
            if root.modified_device:
                root.host[:] = root.device
                root.modified_device = False
                self.trace.append(TransferEvent("D2H", root.name, bytes=root.nbytes))
            else:
                self.trace.append(TransferEvent("SyncNoop", root.name, space=space))

    # -- entry ----------------------------------------------------------------

    def run_entry(self, entry: str, inputs: list) -> RunResult:
        func = self.funcs.get(entry)
        if func is None:
            raise InterpError(f"no function named @{entry}")
        params = func.region(0).args
        if len(inputs) != len(params):
            raise InterpError(f"@{entry} takes {len(params)} arguments, got {len(inputs)}")
        env: dict[Value, object] = {}
        single = not self.config.has_separate_device_memory
        for i, (param, value) in enumerate(zip(params, inputs)):
            t = param.type
            if isinstance(t, MemRefType):
                arr = np.asarray(value)
                if arr.ndim != t.rank:
                    raise InterpError(f"argument {i}: rank {arr.ndim} does not match {t}")
                for d, (have, want) in enumerate(zip(arr.shape, t.shape)):
                    if want != DYNAMIC and have != want:
                        raise InterpError(f"argument {i}: extent {have} in dim {d} does not match {t}")
                kind = t.element.kind
                flat = [coerce_scalar(v, kind) for v in arr.reshape(-1).tolist()]
                buf = SimBuffer(f"arg{i}", kind, tuple(int(d) for d in arr.shape), t.space,
                                host_data=flat, single_memory=single)
                buf.modified_host = True
                env[param] = ViewRef.whole(buf)
            elif isinstance(t, ScalarType):
                env[param] = coerce_scalar(value, t.kind)
            else:
                raise InterpError(f"argument {i}: unsupported parameter type {t}")
        returned = self.exec_region(func.region(0), env)
        if returned is None:
            returned = []
        outputs = []
        for v, t in zip(returned, func_result_types(func)):
            if isinstance(t, MemRefType):
                view: ViewRef = v
                # reading results is a host access; materializing a
                # device-modified dual buffer costs exactly one D2H copy
                if (self.config.has_separate_device_memory and not self.eager
                        and view.root.space == "dualview" and view.root.modified_device):
                    self.sync(view.root, "host")
                outputs.append(self._materialize(view))
            else:
                outputs.append(v)
        return RunResult(outputs, self.trace, self.counters)

    def _materialize(self, view: ViewRef) -> np.ndarray:
        dtype = NUMPY_DTYPES[view.root.kind]
        data = view.root.device if view.root.space == "device" else view.root.host
        if not view.root.extents:
            return np.asarray(data[0], dtype=dtype).reshape(())
        root_arr = np.asarray(data, dtype=dtype).reshape(view.root.extents)
        window = tuple(slice(o, o + s) for o, s in zip(view.offsets, view.shape))
        return root_arr[window].copy()

    # -- region execution ---------------------------------------------------------

    def exec_region(self, region: Region, env: dict):
        """Execute ops in order; returns func.return operand values (or None)."""
        for op in region.ops:
            name = op.name
            if name == "func.return":
                return [env[v] for v in op.operands]
            self.exec_op(op, env)
        return None

    def exec_op(self, op: Operation, env: dict):
        handler = _DISPATCH.get(op.name)
        if handler is None:
            self.fail(op, f"cannot interpret op {op.name}")
        handler(self, op, env)

    # -- loops ----------------------------------------------------------------------

    def _check_trips(self, total: int, op: Operation):
        if total > TRIP_LIMIT:
            self.fail(op, f"trip count {total} exceeds the 2^31 simulation guard")

    def _combiner_kinds(self, term: Operation) -> list[str]:
        kinds = self._combiners.get(id(term))
        if kinds is None:
            kinds = []
            for region in term.regions:
                c = classify_combiner(region)
                kinds.append(c)
            self._combiners[id(term)] = kinds
        return kinds

    def _run_loop_body(self, op: Operation, env: dict, index_args: list[Value],
                       index_values: tuple[int, ...], accs: list, inits: list[Value]):
        body = op.region(0)
        for a, v in zip(index_args, index_values):
            env[a] = v
        term = body.ops[-1]
        for inner in body.ops[:-1]:
            self.exec_op(inner, env)
        if term.name == "scf.reduce":
            kinds = self._combiner_kinds(term)
            for i, contrib_v in enumerate(term.operands):
                contrib = env[contrib_v]
                kind = inits[i].type.kind
                c = kinds[i]
                if c is not None:
                    accs[i] = combine(accs[i], contrib, c, kind)
                else:
                    accs[i] = self._run_combiner(term.regions[i], accs[i], contrib)
        elif term.name in ("scf.yield", "kokkos.yield"):
            pass
        else:
            self.exec_op(term, env)

    def _run_combiner(self, region: Region, acc, contrib):
        env = {region.args[0]: acc, region.args[1]: contrib}
        for inner in region.ops[:-1]:
            self.exec_op(inner, env)
        return env[region.ops[-1].operands[0]]

    def _exec_parallel_common(self, op: Operation, env: dict, ubs: list[int],
                              lbs: list[int] | None, steps: list[int] | None,
                              inits: list[Value], index_args: list[Value]):
        ranges = []
        total = 1
        for d in range(len(ubs)):
            lo = lbs[d] if lbs else 0
            st = steps[d] if steps else 1
            if st <= 0:
                self.fail(op, f"non-positive step {st}")
            r = range(lo, ubs[d], st)
            ranges.append(r)
            total *= len(r)
        self._check_trips(total, op)
        accs = [env[v] for v in inits]
        if len(ranges) == 1:
            for i in ranges[0]:
                self._run_loop_body(op, env, index_args, (i,), accs, inits)
        else:
            for idx in itertools.product(*ranges):
                self._run_loop_body(op, env, index_args, idx, accs, inits)
        for r, acc in zip(op.results, accs):
            env[r] = acc


# --- op handlers -----------------------------------------------------------------

def _int_binop(fn):
    def handler(m: _Machine, op: Operation, env: dict):
        a, b = env[op.operands[0]], env[op.operands[1]]
        kind = op.results[0].type.kind
        env[op.results[0]] = _wrap_int(fn(m, op, a, b), kind)
    return handler


def _float_binop(fn):
    def handler(m: _Machine, op: Operation, env: dict):
        a, b = env[op.operands[0]], env[op.operands[1]]
        kind = op.results[0].type.kind
        env[op.results[0]] = _round_float(fn(m, op, a, b), kind)
    return handler


def _divi(m, op, a, b):
    if b == 0:
        m.fail(op, "division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _ceildivsi(m, op, a, b):
    if b == 0:
        m.fail(op, "division by zero")
    return -((-a) // b)


def _shli(m, op, a, b):
    if b < 0:
        m.fail(op, "negative shift amount")
    return 0 if b >= 64 else a << b


def _divf(m, op, a, b):
    if b == 0.0:
        m.fail(op, "division by zero")
    return a / b


_CMPI = {
    "eq": lambda a, b, k: a == b, "ne": lambda a, b, k: a != b,
    "slt": lambda a, b, k: a < b, "sle": lambda a, b, k: a <= b,
    "sgt": lambda a, b, k: a > b, "sge": lambda a, b, k: a >= b,
    "ult": lambda a, b, k: _unsigned(a, k) < _unsigned(b, k),
    "ule": lambda a, b, k: _unsigned(a, k) <= _unsigned(b, k),
    "ugt": lambda a, b, k: _unsigned(a, k) > _unsigned(b, k),
    "uge": lambda a, b, k: _unsigned(a, k) >= _unsigned(b, k),
}

_CMPF = {
    "oeq": lambda a, b: a == b, "one": lambda a, b: a != b,
    "olt": lambda a, b: a < b, "ole": lambda a, b: a <= b,
    "ogt": lambda a, b: a > b, "oge": lambda a, b: a >= b,
}


def _h_constant(m, op, env):
    t = op.results[0].type
    env[op.results[0]] = coerce_scalar(op.attrs["value"], t.kind)


def _h_cmpi(m, op, env):
    a, b = env[op.operands[0]], env[op.operands[1]]
    kind = op.operands[0].type.kind
    env[op.results[0]] = 1 if _CMPI[op.attrs["predicate"]](a, b, kind) else 0


def _h_cmpf(m, op, env):
    a, b = env[op.operands[0]], env[op.operands[1]]
    env[op.results[0]] = 1 if _CMPF[op.attrs["predicate"]](a, b) else 0


def _h_select(m, op, env):
    c = env[op.operands[0]]
    env[op.results[0]] = env[op.operands[1]] if c else env[op.operands[2]]


def _h_index_cast(m, op, env):
    env[op.results[0]] = _wrap_int(env[op.operands[0]], op.results[0].type.kind)


def _h_minui(m, op, env):
    a, b = env[op.operands[0]], env[op.operands[1]]
    kind = op.results[0].type.kind
    env[op.results[0]] = a if _unsigned(a, kind) <= _unsigned(b, kind) else b


def _h_maxsi(m, op, env):
    a, b = env[op.operands[0]], env[op.operands[1]]
    env[op.results[0]] = a if a >= b else b


# memref ----------------------------------------------------------------------

def _h_alloc(m: _Machine, op, env):
    t: MemRefType = op.results[0].type
    extents = []
    dyn = iter(op.operands)
    for d in t.shape:
        if d == DYNAMIC:
            e = int(env[next(dyn)])
            if e < 0:
                m.fail(op, f"negative allocation extent {e}")
            extents.append(e)
        else:
            extents.append(d)
    m._alloc_serial += 1
    name = f"alloc{m._alloc_serial}({m.path(op)})"
    buf = SimBuffer(name, t.element.kind, tuple(extents), t.space,
                    single_memory=not m.config.has_separate_device_memory)
    env[op.results[0]] = ViewRef.whole(buf)


def _h_dealloc(m: _Machine, op, env):
    view: ViewRef = env[op.operands[0]]
    view.root.refcount -= 1
    if view.root.refcount <= 0:
        view.root.freed = True


def _h_load(m: _Machine, op, env):
    view: ViewRef = env[op.operands[0]]
    idx = tuple(env[v] for v in op.operands[1:])
    env[op.results[0]] = m.load_element(view, idx, op)


def _h_store(m: _Machine, op, env):
    value = env[op.operands[0]]
    view: ViewRef = env[op.operands[1]]
    idx = tuple(env[v] for v in op.operands[2:])
    m.store_element(view, idx, value, op)
    key = m.path(op)
    m.counters["store"][key] = m.counters["store"].get(key, 0) + 1


def _h_dim(m: _Machine, op, env):
    view: ViewRef = env[op.operands[0]]
    env[op.results[0]] = view.shape[op.attrs["index"]]


def _h_subview(m: _Machine, op, env):
    base: ViewRef = env[op.operands[0]]
    rank = len(base.shape)
    offs = tuple(env[v] for v in op.operands[1:1 + rank])
    sizes = tuple(env[v] for v in op.operands[1 + rank:])
    for d, (o, s) in enumerate(zip(offs, sizes)):
        if o < 0 or s < 0 or o + s > base.shape[d]:
            m.fail(op, f"subview [{o}, {o + s}) out of bounds for extent {base.shape[d]} in dim {d}")
    base.root.refcount += 1
    env[op.results[0]] = ViewRef(base.root, tuple(a + b for a, b in zip(base.offsets, offs)), sizes)


def _h_cast(m: _Machine, op, env):
    base: ViewRef = env[op.operands[0]]
    base.root.refcount += 1
    t: MemRefType = op.results[0].type
    for have, want in zip(base.shape, t.shape):
        if want != DYNAMIC and have != want:
            m.fail(op, f"cast extent mismatch: runtime {have} vs static {want}")
    env[op.results[0]] = base


def _h_copy(m: _Machine, op, env):
    src: ViewRef = env[op.operands[0]]
    dst: ViewRef = env[op.operands[1]]
    if src.shape != dst.shape:
        m.fail(op, f"copy shape mismatch {src.shape} vs {dst.shape}")
    for idx in itertools.product(*(range(e) for e in src.shape)) if src.shape else [()]:
        m.store_element(dst, idx, m.load_element(src, idx, op), op)


def _h_get_global(m: _Machine, op, env):
    buf = m.globals[op.attrs["symbol"]]
    buf.refcount += 1
    env[op.results[0]] = ViewRef.whole(buf)


# scf ------------------------------------------------------------------------------

def _h_scf_parallel(m: _Machine, op, env):
    lows, ups, steps, inits = scf_parallel_bounds(op)
    m._exec_parallel_common(
        op, env,
        ubs=[env[v] for v in ups],
        lbs=[env[v] for v in lows],
        steps=[env[v] for v in steps],
        inits=list(inits),
        index_args=op.region(0).args,
    )


def _h_scf_for(m: _Machine, op, env):
    lo, hi, step = (env[v] for v in op.operands)
    if step <= 0:
        m.fail(op, f"non-positive step {step}")
    r = range(lo, hi, step)
    m._check_trips(len(r), op)
    body = op.region(0)
    iv = body.args[0]
    for i in r:
        env[iv] = i
        for inner in body.ops[:-1]:
            m.exec_op(inner, env)


def _h_scf_if(m: _Machine, op, env):
    cond = env[op.operands[0]]
    if cond:
        region = op.region(0)
    elif len(op.regions) > 1:
        region = op.region(1)
    else:
        return
    for inner in region.ops[:-1]:
        m.exec_op(inner, env)


# func --------------------------------------------------------------------------------

def _h_call(m: _Machine, op, env):
    callee = m.funcs.get(op.attrs["callee"])
    if callee is None:
        m.fail(op, f"unknown function @{op.attrs['callee']}")
    inner_env: dict[Value, object] = {}
    for param, arg in zip(callee.region(0).args, op.operands):
        inner_env[param] = env[arg]
    returned = m.exec_region(callee.region(0), inner_env)
    for r, v in zip(op.results, returned or []):
        env[r] = v


# linalg / sparse / kernel-library ------------------------------------------------------

def _h_fill(m: _Machine, op, env):
    value = env[op.operands[0]]
    out: ViewRef = env[op.operands[1]]
    for idx in itertools.product(*(range(e) for e in out.shape)) if out.shape else [()]:
        m.store_element(out, idx, value, op)


def _matmul_impl(m: _Machine, op, env, a: ViewRef, b: ViewRef, c: ViewRef):
    (mm, kk), (kk2, nn) = a.shape, b.shape
    if kk != kk2 or c.shape != (mm, nn):
        m.fail(op, f"matmul shape mismatch {a.shape} x {b.shape} -> {c.shape}")
    kind = c.root.kind
    for i in range(mm):
        for j in range(nn):
            acc = _zero(kind)
            for k in range(kk):
                prod = coerce_scalar(m.load_element(a, (i, k), op) * m.load_element(b, (k, j), op), kind)
                acc = coerce_scalar(acc + prod, kind)
            m.store_element(c, (i, j), acc, op)


def _h_matmul(m: _Machine, op, env):
    _matmul_impl(m, op, env, env[op.operands[0]], env[op.operands[1]], env[op.operands[2]])


def _matvec_impl(m: _Machine, op, env, a: ViewRef, x: ViewRef, y: ViewRef):
    mm, nn = a.shape
    if x.shape != (nn,) or y.shape != (mm,):
        m.fail(op, f"matvec shape mismatch {a.shape} x {x.shape} -> {y.shape}")
    kind = y.root.kind
    for i in range(mm):
        acc = _zero(kind)
        for j in range(nn):
            prod = coerce_scalar(m.load_element(a, (i, j), op) * m.load_element(x, (j,), op), kind)
            acc = coerce_scalar(acc + prod, kind)
        m.store_element(y, (i,), acc, op)


def _h_matvec(m: _Machine, op, env):
    _matvec_impl(m, op, env, env[op.operands[0]], env[op.operands[1]], env[op.operands[2]])


def _h_batch_matmul(m: _Machine, op, env):
    a, b, c = (env[v] for v in op.operands)
    if not (a.shape[0] == b.shape[0] == c.shape[0]):
        m.fail(op, "batch extents must match")
    nb, mm, kk = a.shape
    if b.shape[1] != kk or c.shape[1:] != (mm, b.shape[2]):
        m.fail(op, f"batch_matmul shape mismatch {a.shape} x {b.shape} -> {c.shape}")
    nn = b.shape[2]
    kind = c.root.kind
    for t in range(nb):
        for i in range(mm):
            for j in range(nn):
                acc = _zero(kind)
                for k in range(kk):
                    prod = coerce_scalar(
                        m.load_element(a, (t, i, k), op) * m.load_element(b, (t, k, j), op), kind)
                    acc = coerce_scalar(acc + prod, kind)
                m.store_element(c, (t, i, j), acc, op)


def _h_elementwise(m: _Machine, op, env):
    ins = [env[v] for v in op.operands[:-1]]
    out: ViewRef = env[op.operands[-1]]
    body = op.region(0)
    term = body.ops[-1]
    for idx in itertools.product(*(range(e) for e in out.shape)) if out.shape else [()]:
        for arg, view in zip(body.args, ins):
            env[arg] = m.load_element(view, idx, op)
        for inner_op in body.ops[:-1]:
            m.exec_op(inner_op, env)
        m.store_element(out, idx, env[term.operands[0]], op)


def _h_linalg_reduce(m: _Machine, op, env):
    src: ViewRef = env[op.operands[0]]
    dst: ViewRef = env[op.operands[1]]
    axes = list(op.attrs["axes"])
    comb = op.attrs["combiner"]
    kind = src.root.kind
    kept = [d for d in range(len(src.shape)) if d not in axes]
    for out_idx in itertools.product(*(range(src.shape[d]) for d in kept)) if kept else [()]:
        acc = combiner_identity(comb, kind)
        for red_idx in itertools.product(*(range(src.shape[d]) for d in axes)):
            full = [0] * len(src.shape)
            for d, x in zip(kept, out_idx):
                full[d] = x
            for d, x in zip(axes, red_idx):
                full[d] = x
            acc = combine(acc, m.load_element(src, tuple(full), op), comb, kind)
        m.store_element(dst, tuple(out_idx), acc, op)


def _h_spmv_csr(m: _Machine, op, env):
    rowptr, colind, values, x, y = (env[v] for v in op.operands)
    nrows = rowptr.shape[0] - 1
    if y.shape[0] != nrows:
        m.fail(op, f"y has extent {y.shape[0]}, rowptr implies {nrows} rows")
    kind = y.root.kind
    for i in range(nrows):
        begin = m.load_element(rowptr, (i,), op)
        end = m.load_element(rowptr, (i + 1,), op)
        acc = _zero(kind)
        for j in range(begin, max(begin, end)):
            col = m.load_element(colind, (j,), op)
            prod = coerce_scalar(m.load_element(values, (j,), op) * m.load_element(x, (col,), op), kind)
            acc = coerce_scalar(acc + prod, kind)
        m.store_element(y, (i,), acc, op)


# kokkos --------------------------------------------------------------------------------

def _device_kernel_roots(m: _Machine, op: Operation, env: dict):
    """Memref roots accessed by a kernel: (reads, writes), resolved via env."""
    reads: dict[int, SimBuffer] = {}
    writes: dict[int, SimBuffer] = {}

    def note(value: Value, is_write: bool):
        v = env.get(value)
        if isinstance(v, ViewRef):
            (writes if is_write else reads)[id(v.root)] = v.root

    for inner in walk(op):
        name = inner.name
        if name == "memref.load":
            note(inner.operands[0], False)
        elif name == "memref.store":
            note(inner.operands[1], True)
        elif name == "memref.copy":
            note(inner.operands[0], False)
            note(inner.operands[1], True)
        elif name in ("kokkos.gemm", "kokkos.gemv", "linalg.matmul", "linalg.matvec"):
            note(inner.operands[0], False)
            note(inner.operands[1], False)
            note(inner.operands[2], True)
    return list(reads.values()), list(writes.values())


def _eager_kernel(m: _Machine, op: Operation, env: dict, body):
    reads, writes = _device_kernel_roots(m, op, env)
    touched: dict[int, SimBuffer] = {id(r): r for r in reads}
    for w in writes:
        touched[id(w)] = w
    if m.config.has_separate_device_memory:
        for root in touched.values():
            root.device[:] = root.host
            m.trace.append(TransferEvent("H2D", root.name, bytes=root.nbytes))
    body()
    if m.config.has_separate_device_memory:
        for root in writes:
            root.host[:] = root.device
            m.trace.append(TransferEvent("D2H", root.name, bytes=root.nbytes))


def _with_kernel_context(m: _Machine, op: Operation, env: dict, body):
    space = op.attrs.get("executionSpace")
    if space is None:
        body()
        return
    prev = m.ctx
    m.ctx = space
    try:
        if m.eager and space == "device" and prev == "host":
            _eager_kernel(m, op, env, body)
        else:
            body()
    finally:
        m.ctx = prev


def _h_range_parallel(m: _Machine, op, env):
    dims = op.attrs.get("dims", 1)
    ubs = [env[v] for v in op.operands[:dims]]
    inits = parallel_init_operands(op)

    def body():
        m._exec_parallel_common(op, env, ubs=ubs, lbs=None, steps=None,
                                inits=inits, index_args=op.region(0).args)

    _with_kernel_context(m, op, env, body)


def _h_team_parallel(m: _Machine, op, env):
    league = env[op.operands[0]]
    ts, vl = parallel_hint_operands(op)
    if vl is not None:
        m.counters["hint"][m.path(op)] = env[vl]
    inits = parallel_init_operands(op)
    args = op.region(0).args
    index_arg, handle_arg = args[0], args[1]

    def body():
        env[handle_arg] = ("team", m.path(op))
        m._exec_parallel_common(op, env, ubs=[league], lbs=None, steps=None,
                                inits=inits, index_args=[index_arg])

    _with_kernel_context(m, op, env, body)


def _h_thread_parallel(m: _Machine, op, env):
    n = env[op.operands[0]]
    ts, vl = parallel_hint_operands(op)
    if vl is not None:
        m.counters["hint"][m.path(op)] = env[vl]
    inits = parallel_init_operands(op)

    def body():
        m._exec_parallel_common(op, env, ubs=[n], lbs=None, steps=None,
                                inits=inits, index_args=op.region(0).args)

    _with_kernel_context(m, op, env, body)


def _h_single(m: _Machine, op, env):
    key = m.path(op)
    m.counters["single"][key] = m.counters["single"].get(key, 0) + 1
    for inner in op.region(0).ops[:-1]:
        m.exec_op(inner, env)


def _h_team_barrier(m: _Machine, op, env):
    key = m.path(op)
    m.counters["barrier"][key] = m.counters["barrier"].get(key, 0) + 1


def _h_sync(m: _Machine, op, env):
    if m.eager:
        return
    view: ViewRef = env[op.operands[0]]
    m.sync(view.root, op.attrs["space"], op)


def _h_modify(m: _Machine, op, env):
    if m.eager:
        return
    view: ViewRef = env[op.operands[0]]
    if not m.config.has_separate_device_memory:
        return
    if op.attrs["space"] == "device":
        view.root.modified_device = True
    else:
        view.root.modified_host = True


def _h_gemm(m: _Machine, op, env):
    def body():
        _matmul_impl(m, op, env, env[op.operands[0]], env[op.operands[1]], env[op.operands[2]])

    prev = m.ctx
    m.ctx = "device"
    try:
        if m.eager and prev == "host":
            _eager_kernel(m, op, env, body)
        else:
            body()
    finally:
        m.ctx = prev


def _h_gemv(m: _Machine, op, env):
    def body():
        _matvec_impl(m, op, env, env[op.operands[0]], env[op.operands[1]], env[op.operands[2]])

    prev = m.ctx
    m.ctx = "device"
    try:
        if m.eager and prev == "host":
            _eager_kernel(m, op, env, body)
        else:
            body()
    finally:
        m.ctx = prev


def _h_noop(m, op, env):
    pass


_DISPATCH = {
    "arith.constant": _h_constant,
    "arith.addi": _int_binop(lambda m, op, a, b: a + b),
    "arith.subi": _int_binop(lambda m, op, a, b: a - b),
    "arith.muli": _int_binop(lambda m, op, a, b: a * b),
    "arith.divi": _int_binop(_divi),
    "arith.ceildivsi": _int_binop(_ceildivsi),
    "arith.shli": _int_binop(_shli),
    "arith.addf": _float_binop(lambda m, op, a, b: a + b),
    "arith.subf": _float_binop(lambda m, op, a, b: a - b),
    "arith.mulf": _float_binop(lambda m, op, a, b: a * b),
    "arith.divf": _float_binop(_divf),
    "arith.cmpi": _h_cmpi,
    "arith.cmpf": _h_cmpf,
    "arith.select": _h_select,
    "arith.index_cast": _h_index_cast,
    "arith.minui": _h_minui,
    "arith.maxsi": _h_maxsi,
    "memref.alloc": _h_alloc,
    "memref.dealloc": _h_dealloc,
    "memref.load": _h_load,
    "memref.store": _h_store,
    "memref.dim": _h_dim,
    "memref.subview": _h_subview,
    "memref.cast": _h_cast,
    "memref.copy": _h_copy,
    "memref.get_global": _h_get_global,
    "scf.parallel": _h_scf_parallel,
    "scf.for": _h_scf_for,
    "scf.if": _h_scf_if,
    "scf.yield": _h_noop,
    "func.call": _h_call,
    "linalg.matmul": _h_matmul,
    "linalg.matvec": _h_matvec,
    "linalg.batch_matmul": _h_batch_matmul,
    "linalg.fill": _h_fill,
    "linalg.elementwise": _h_elementwise,
    "linalg.reduce": _h_linalg_reduce,
    "sparse.spmv_csr": _h_spmv_csr,
    "kokkos.range_parallel": _h_range_parallel,
    "kokkos.team_parallel": _h_team_parallel,
    "kokkos.thread_parallel": _h_thread_parallel,
    "kokkos.single": _h_single,
    "kokkos.team_barrier": _h_team_barrier,
    "kokkos.sync": _h_sync,
    "kokkos.modify": _h_modify,
    "kokkos.gemm": _h_gemm,
    "kokkos.gemv": _h_gemv,
    "kokkos.yield": _h_noop,
}


# --- public API --------------------------------------------------------------------

def run(program: Program, entry: str, inputs: list, config: ExecConfig | None = None) -> RunResult:
    """Execute `entry` with the given inputs under the lazy dual-buffer machine."""
    return _Machine(program, config or ExecConfig()).run_entry(entry, inputs)


def run_eager_baseline(program: Program, entry: str, inputs: list,
                       config: ExecConfig | None = None) -> RunResult:
    """Execute with the eager policy: copy every kernel-touched buffer to the
    device before each device kernel and every possibly-written buffer back
    afterwards, unconditionally."""
    return _Machine(program, config or ExecConfig(), eager=True).run_entry(entry, inputs)


def diff_outputs(a: list, b: list, rel_tol: float = 1e-12) -> DiffReport:
    """Integers compare exactly; floats by |x-y| <= rel_tol*max(|x|,|y|,1)."""
    if len(a) != len(b):
        return DiffReport(False, f"output arity {len(a)} vs {len(b)}")
    for i, (x, y) in enumerate(zip(a, b)):
        xa, ya = np.asarray(x), np.asarray(y)
        if xa.shape != ya.shape:
            return DiffReport(False, f"output {i}: shape {xa.shape} vs {ya.shape}")
        if xa.dtype.kind in "iub" and ya.dtype.kind in "iub":
            if not np.array_equal(xa, ya):
                bad = np.argwhere(xa != ya)[0]
                loc = tuple(int(v) for v in bad)
                return DiffReport(False, f"output {i} at {loc}: {xa[tuple(bad)]} vs {ya[tuple(bad)]}")
        else:
            xf, yf = xa.astype(np.float64), ya.astype(np.float64)
            tol = rel_tol * np.maximum(np.maximum(np.abs(xf), np.abs(yf)), 1.0)
            ok = np.abs(xf - yf) <= tol
            if not np.all(ok):
                bad = np.argwhere(~ok)[0]
                loc = tuple(int(v) for v in bad)
                return DiffReport(False, f"output {i} at {loc}: {xf[tuple(bad)]} vs {yf[tuple(bad)]}")
    return DiffReport(True)
