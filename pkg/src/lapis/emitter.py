"""Translate fully lowered programs into freestanding Kokkos C++ source.

One statement per operation in walk order; every SSA result lands in a fresh
`v<N>` variable except scalar constants, whose uses inline as literals. The
output is a single header-style translation unit that includes the fixed
dual-buffer runtime header and, when requested, defines lapis_initialize()
and lapis_finalize() for global constant data and runtime setup.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dialect import (
    classify_combiner,
    parallel_hint_operands,
    parallel_init_operands,
    verify,
)
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
from .printer import format_float
from .runtime_header import RUNTIME_HEADER_NAME, emit_runtime_header

__all__ = ["EmitOptions", "EmitResult", "EmissionError", "emit", "emit_runtime_header"]

_SCALAR_CPP = {
    "f16": "LAPIS::f16", "f32": "float", "f64": "double",
    "i1": "bool", "i32": "int32_t", "i64": "int64_t", "index": "int64_t",
}

_CMP_TOKENS = {
    "eq": "==", "ne": "!=", "slt": "<", "sle": "<=", "sgt": ">", "sge": ">=",
    "oeq": "==", "one": "!=", "olt": "<", "ole": "<=", "ogt": ">", "oge": ">=",
}

_INT_BIN_TOKENS = {
    "arith.addi": "+", "arith.subi": "-", "arith.muli": "*", "arith.divi": "/",
    "arith.shli": "<<",
    "arith.addf": "+", "arith.subf": "-", "arith.mulf": "*", "arith.divf": "/",
}


class EmissionError(Exception):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{message}" + (f" at {path}" if path else ""))
        self.path = path


@dataclass
class EmitOptions:
    emit_init_finalize: bool = True
    header_name: str = "lapis_module"
    kernel_library_headers: bool = False
    constant_sidecar_threshold: int = 64 * 1024


@dataclass
class EmitResult:
    source: str
    signatures: list[str] = field(default_factory=list)
    blobs: list[tuple[str, bytes]] = field(default_factory=list)


def _scalar_cpp(t: ScalarType) -> str:
    return _SCALAR_CPP[t.kind]


def _view_data_type(t: MemRefType) -> str:
    return _scalar_cpp(t.element) + "*" * t.rank


def _dualview_cpp(t: MemRefType) -> str:
    return f"LAPIS::DualView<{_view_data_type(t)}>"


def _int_literal(value: int, kind: str) -> str:
    value = int(value)
    if kind == "i1":
        return "true" if value else "false"
    if value == -(1 << 63):
        return "INT64_MIN"
    if kind in ("i64", "index") and not (-(1 << 31) <= value < (1 << 31)):
        return f"INT64_C({value})"
    return str(value)


def _float_literal(value: float, kind: str) -> str:
    value = float(value)
    if value != value:
        return "NAN"
    if value == float("inf"):
        return "INFINITY"
    if value == float("-inf"):
        return "-INFINITY"
    text = format_float(value, kind)
    if kind == "f32":
        return text + "f"
    if kind == "f16":
        return f"LAPIS::f16({text}f)"
    return text


def _scalar_literal(value, t: ScalarType) -> str:
    if t.is_float:
        return _float_literal(value, t.kind)
    return _int_literal(value, t.kind)


_NUMPY_BLOB_DTYPES = {
    "f16": "<f2", "f32": "<f4", "f64": "<f8",
    "i1": "<u1", "i32": "<i4", "i64": "<i8", "index": "<i8",
}


def emit(program: Program, options: EmitOptions | None = None) -> EmitResult:
    """Emit deterministic C++ for a fully lowered program."""
    options = options or EmitOptions()
    diags = verify(program)
    if diags:
        raise EmissionError(f"program does not verify: {diags[0]}")
    for op in walk(program):
        if op.name == "scf.parallel" or op.dialect in ("linalg", "sparse"):
            raise EmissionError(f"unlowered op {op.name}", op_path(op, program))
    for op in walk(program):
        for v in [*op.results, *(a for r in op.regions for a in r.args)]:
            if isinstance(v.type, MemRefType) and v.type.space == "unassigned":
                raise EmissionError(f"unassigned memory space on result of {op.name}",
                                    op_path(op, program))
    for f in program.funcs():
        for a in f.region(0).args:
            if isinstance(a.type, MemRefType) and a.type.space == "unassigned":
                raise EmissionError(f"unassigned memory space on parameter of @{f.attrs['sym_name']}")

    out = _ModuleEmitter(program, options)
    return out.run()


class _ModuleEmitter:
    def __init__(self, program: Program, options: EmitOptions):
        self.program = program
        self.options = options
        self.lines: list[str] = []
        self.signatures: list[str] = []
        self.blobs: list[tuple[str, bytes]] = []
        self.globals = [op for op in program.ops if op.name == "memref.global"]

    def line(self, depth: int, text: str = "") -> None:
        self.lines.append(("  " * depth + text) if text else "")

    def run(self) -> EmitResult:
        opt = self.options
        self.line(0, f"// {opt.header_name}.hpp: generated Kokkos C++; do not edit.")
        self.line(0, "#pragma once")
        self.line(0)
        self.line(0, f'#include "{RUNTIME_HEADER_NAME}"')
        self.line(0)
        self.line(0, "#include <cstdint>")
        if any(self._is_sidecar(g) for g in self.globals):
            self.line(0, "#include <fstream>")
            self.line(0, "#include <vector>")
        if opt.kernel_library_headers:
            self.line(0)
            self.line(0, "// kernel-library wrapper declarations (defined in the runtime header)")
            self.line(0, "namespace LAPIS {")
            self.line(0, "template <class VA, class VB, class VC> void gemm(const VA&, const VB&, const VC&);")
            self.line(0, "template <class VA, class VX, class VY> void gemv(const VA&, const VX&, const VY&);")
            self.line(0, "}  // namespace LAPIS")
        self.line(0)
        if self.globals:
            self.line(0, "namespace {")
            for g in self.globals:
                t: MemRefType = g.attrs["type"]
                self.line(0, f"{_dualview_cpp(t)} g_{g.attrs['sym_name']};")
            self.line(0, "}  // namespace")
            self.line(0)
        if opt.emit_init_finalize:
            self._emit_initialize()
            self._emit_finalize()
        for func in self.program.funcs():
            _FuncEmitter(self, func).run()
        return EmitResult("\n".join(self.lines) + "\n", self.signatures, self.blobs)

    def _is_sidecar(self, g: Operation) -> bool:
        t: MemRefType = g.attrs["type"]
        count = 1
        for d in t.shape:
            count *= d
        nbytes = count * np.dtype(_NUMPY_BLOB_DTYPES[t.element.kind]).itemsize
        return nbytes > self.options.constant_sidecar_threshold

    def _emit_initialize(self) -> None:
        self.line(0, "inline void lapis_initialize() {")
        self.line(1, "Kokkos::initialize();")
        for g in self.globals:
            t: MemRefType = g.attrs["type"]
            sym = g.attrs["sym_name"]
            extents = ", ".join(str(d) for d in t.shape)
            ctor = f'("{sym}"' + (f", {extents})" if t.shape else ")")
            self.line(1, f"g_{sym} = {_dualview_cpp(t)}{ctor};")
            self.line(1, "{")
            self.line(2, f"auto h = g_{sym}.host_view();")
            count = 1
            for d in t.shape:
                count *= d
            elem = _scalar_cpp(t.element)
            if self._is_sidecar(g):
                blob_name = f"{sym}.bin"
                data = np.array(g.attrs["value"].elements,
                                dtype=_NUMPY_BLOB_DTYPES[t.element.kind])
                self.blobs.append((blob_name, data.tobytes()))
                self.line(2, f"std::vector<{elem}> raw({count});")
                self.line(2, f'std::ifstream f("{blob_name}", std::ios::binary);')
                self.line(2, f"if (!f || !f.read(reinterpret_cast<char*>(raw.data()), "
                             f"std::streamsize(sizeof({elem}) * raw.size()))) {{")
                self.line(3, f'Kokkos::abort("cannot read {blob_name}");')
                self.line(2, "}")
                source = "raw"
            else:
                body = ", ".join(
                    _scalar_literal(v, t.element) for v in g.attrs["value"].elements)
                self.line(2, f"static const {elem} data[{max(count, 1)}] = {{{body}}};")
                source = "data"
            self._emit_fill_loops(t, source, 2)
            self.line(2, f"g_{sym}.modifyHost();")
            self.line(1, "}")
        self.line(0, "}")
        self.line(0)

    def _emit_fill_loops(self, t: MemRefType, source: str, depth: int) -> None:
        ivs = [f"i{d}" for d in range(t.rank)]
        for d, iv in enumerate(ivs):
            self.line(depth + d, f"for (int64_t {iv} = 0; {iv} < {t.shape[d]}; ++{iv}) {{")
        flat = "0"
        if t.rank:
            flat = ivs[0]
            for d in range(1, t.rank):
                flat = f"({flat}) * {t.shape[d]} + {ivs[d]}"
        self.line(depth + t.rank, f"h({', '.join(ivs)}) = {source}[{flat}];")
        for d in range(t.rank - 1, -1, -1):
            self.line(depth + d, "}")

    def _emit_finalize(self) -> None:
        self.line(0, "inline void lapis_finalize() {")
        for g in self.globals:
            t: MemRefType = g.attrs["type"]
            self.line(1, f"g_{g.attrs['sym_name']} = {_dualview_cpp(t)}();")
        self.line(1, "Kokkos::finalize();")
        self.line(0, "}")
        self.line(0)


class _FuncEmitter:
    def __init__(self, module: _ModuleEmitter, func: Operation):
        self.m = module
        self.func = func
        self.names: dict[Value, str] = {}
        self.mem_expr: dict[Value, str] = {}
        self.aux = 0
        self._number_values()

    # -- naming --------------------------------------------------------------

    def _number_values(self) -> None:
        counter = 0

        def assign(v: Value) -> None:
            nonlocal counter
            self.names[v] = f"v{counter}"
            counter += 1

        def visit(op: Operation) -> None:
            for r in op.results:
                assign(r)
            for region in op.regions:
                for a in region.args:
                    assign(a)
                for inner in region.ops:
                    visit(inner)

        for a in self.func.region(0).args:
            assign(a)
        for op in self.func.region(0).ops:
            visit(op)

    def fresh(self, prefix: str = "t") -> str:
        self.aux += 1
        return f"{prefix}{self.aux - 1}"

    def fail(self, op: Operation, message: str):
        raise EmissionError(message, op_path(op, self.m.program))

    # -- value rendering ---------------------------------------------------------

    def scalar(self, v: Value) -> str:
        d = v.defining_op()
        if d is not None and d.name == "arith.constant":
            return _scalar_literal(d.attrs["value"], v.type)
        return self.names[v]

    def accessor(self, v: Value, device: bool) -> str:
        """Element-indexable expression for a memref value."""
        if v in self.mem_expr:
            return self.mem_expr[v]
        t: MemRefType = v.type
        if t.space == "dualview":
            if device:
                raise KeyError(f"missing hoisted device view for {self.names[v]}")
            return f"{self.names[v]}.host_view()"
        return self.names[v]

    def object_name(self, v: Value) -> str:
        return self.names[v]

    # -- function shell ---------------------------------------------------------

    def signature(self) -> str:
        results = func_result_types(self.func)
        if len(results) > 1:
            raise EmissionError(f"@{self.func.attrs['sym_name']}: multiple results not supported")
        if not results:
            ret = "void"
        elif isinstance(results[0], MemRefType):
            ret = _dualview_cpp(results[0])
        else:
            ret = _scalar_cpp(results[0])
        params = []
        for a in self.func.region(0).args:
            if isinstance(a.type, MemRefType):
                params.append(f"{_dualview_cpp(a.type)} {self.names[a]}")
            else:
                params.append(f"{_scalar_cpp(a.type)} {self.names[a]}")
        return f"{ret} {self.func.attrs['sym_name']}({', '.join(params)})"

    def run(self) -> None:
        sig = self.signature()
        self.m.signatures.append(sig)
        self.m.line(0, f"inline {sig} {{")
        self.emit_region(self.func.region(0), 1, device=False, loop_depth=0)
        self.m.line(0, "}")
        self.m.line(0)

    # -- region / statement emission ------------------------------------------------

    def emit_region(self, region: Region, depth: int, device: bool, loop_depth: int) -> None:
        for op in region.ops:
            self.emit_op(op, depth, device, loop_depth)

    def emit_op(self, op: Operation, depth: int, device: bool, loop_depth: int) -> None:
        name = op.name
        handler = _STMT.get(name)
        if handler is None:
            self.fail(op, f"no emission rule for {name}")
        handler(self, op, depth, device, loop_depth)


# --- statement emitters (module-level, dispatched by op name) ---------------------


def _stmt_noop(e: _FuncEmitter, op, depth, device, loop_depth):
    pass


def _stmt_constant(e: _FuncEmitter, op, depth, device, loop_depth):
    pass  # uses inline as literals


def _stmt_int_binary(e: _FuncEmitter, op, depth, device, loop_depth):
    t = op.results[0].type
    tok = _INT_BIN_TOKENS[op.name]
    a, b = (e.scalar(v) for v in op.operands)
    e.m.line(depth, f"const {_scalar_cpp(t)} {e.names[op.results[0]]} = {a} {tok} {b};")


def _helper_call(helper):
    def handler(e: _FuncEmitter, op, depth, device, loop_depth):
        t = op.results[0].type
        cpp = _scalar_cpp(t)
        a, b = (e.scalar(v) for v in op.operands)
        e.m.line(depth, f"const {cpp} {e.names[op.results[0]]} = LAPIS::{helper}<{cpp}>({a}, {b});")
    return handler


_stmt_ceildiv = _helper_call("ceildivsi")
_stmt_minui = _helper_call("minui")
_stmt_maxsi = _helper_call("maxsi")


_UNSIGNED_PREDS = {"ult": "slt", "ule": "sle", "ugt": "sgt", "uge": "sge"}


def _stmt_cmp(e: _FuncEmitter, op, depth, device, loop_depth):
    pred = op.attrs["predicate"]
    a, b = (e.scalar(v) for v in op.operands)
    if pred in _UNSIGNED_PREDS:
        width = "uint32_t" if op.operands[0].type.kind == "i32" else "uint64_t"
        a = f"static_cast<{width}>({a})"
        b = f"static_cast<{width}>({b})"
        pred = _UNSIGNED_PREDS[pred]
    tok = _CMP_TOKENS[pred]
    e.m.line(depth, f"const bool {e.names[op.results[0]]} = {a} {tok} {b};")


def _stmt_select(e: _FuncEmitter, op, depth, device, loop_depth):
    t = op.results[0].type
    c, a, b = (e.scalar(v) for v in op.operands)
    e.m.line(depth, f"const {_scalar_cpp(t)} {e.names[op.results[0]]} = {c} ? {a} : {b};")


def _stmt_index_cast(e: _FuncEmitter, op, depth, device, loop_depth):
    t = op.results[0].type
    e.m.line(depth, f"const {_scalar_cpp(t)} {e.names[op.results[0]]} = "
                    f"static_cast<{_scalar_cpp(t)}>({e.scalar(op.operands[0])});")


def _stmt_alloc(e: _FuncEmitter, op, depth, device, loop_depth):
    if device:
        e.fail(op, "memref.alloc inside device code")
    t: MemRefType = op.results[0].type
    name = e.names[op.results[0]]
    extents = []
    dyn = iter(op.operands)
    for d in t.shape:
        extents.append(e.scalar(next(dyn)) if d == DYNAMIC else str(d))
    args = f'("{name}"' + (", " + ", ".join(extents) if extents else "") + ")"
    if t.space == "dualview":
        e.m.line(depth, f"{_dualview_cpp(t)} {name}{args};")
    else:
        space = "LAPIS::HostView" if t.space == "host" else "LAPIS::DeviceView"
        e.m.line(depth, f"{space}<{_view_data_type(t)}> {name}{args};")


def _stmt_dealloc(e: _FuncEmitter, op, depth, device, loop_depth):
    if device:
        e.fail(op, "memref.dealloc inside device code")
    e.m.line(depth, f"{e.object_name(op.operands[0])} = {{}};")


def _stmt_load(e: _FuncEmitter, op, depth, device, loop_depth):
    t = op.results[0].type
    acc = e.accessor(op.operands[0], device)
    idx = ", ".join(e.scalar(v) for v in op.operands[1:])
    e.m.line(depth, f"const {_scalar_cpp(t)} {e.names[op.results[0]]} = {acc}({idx});")


def _stmt_store(e: _FuncEmitter, op, depth, device, loop_depth):
    acc = e.accessor(op.operands[1], device)
    idx = ", ".join(e.scalar(v) for v in op.operands[2:])
    e.m.line(depth, f"{acc}({idx}) = {e.scalar(op.operands[0])};")


def _stmt_dim(e: _FuncEmitter, op, depth, device, loop_depth):
    v = op.operands[0]
    t: MemRefType = v.type
    if device or t.space != "dualview" or v in e.mem_expr:
        target = e.accessor(v, device)
    else:
        target = e.object_name(v)
    e.m.line(depth, f"const int64_t {e.names[op.results[0]]} = "
                    f"static_cast<int64_t>({target}.extent({op.attrs['index']}));")


def _stmt_subview(e: _FuncEmitter, op, depth, device, loop_depth):
    base = op.operands[0]
    t: MemRefType = base.type
    rank = t.rank
    offs = [e.scalar(v) for v in op.operands[1:1 + rank]]
    sizes = [e.scalar(v) for v in op.operands[1 + rank:]]
    name = e.names[op.results[0]]
    if not device and t.space == "dualview":
        args = ", ".join(f"{o}, {l}" for o, l in zip(offs, sizes))
        e.m.line(depth, f"auto {name} = {e.object_name(base)}.subview({args});")
        return
    pairs = ", ".join(
        f"Kokkos::make_pair(int64_t({o}), int64_t({o}) + int64_t({l}))" for o, l in zip(offs, sizes))
    acc = e.accessor(base, device)
    e.m.line(depth, f"auto {name} = Kokkos::subview({acc}, {pairs});")
    e.mem_expr[op.results[0]] = name


def _stmt_cast(e: _FuncEmitter, op, depth, device, loop_depth):
    base = op.operands[0]
    name = e.names[op.results[0]]
    if device:
        e.mem_expr[op.results[0]] = e.accessor(base, device)
        return
    e.m.line(depth, f"auto {name} = {e.object_name(base)};")


def _stmt_copy(e: _FuncEmitter, op, depth, device, loop_depth):
    if device:
        e.fail(op, "memref.copy inside device code")
    src = e.accessor(op.operands[0], device=False)
    dst = e.accessor(op.operands[1], device=False)
    e.m.line(depth, f"Kokkos::deep_copy({dst}, {src});")


def _stmt_get_global(e: _FuncEmitter, op, depth, device, loop_depth):
    name = e.names[op.results[0]]
    if device:
        # hoisting happens at the kernel boundary; nothing to emit here
        return
    e.m.line(depth, f"auto {name} = g_{op.attrs['symbol']};")


def _stmt_sync(e: _FuncEmitter, op, depth, device, loop_depth):
    method = "syncDevice" if op.attrs["space"] == "device" else "syncHost"
    e.m.line(depth, f"{e.object_name(op.operands[0])}.{method}();")


def _stmt_modify(e: _FuncEmitter, op, depth, device, loop_depth):
    method = "modifyDevice" if op.attrs["space"] == "device" else "modifyHost"
    e.m.line(depth, f"{e.object_name(op.operands[0])}.{method}();")


def _stmt_call(e: _FuncEmitter, op, depth, device, loop_depth):
    if device:
        e.fail(op, "func.call inside device code")
    args = ", ".join(
        e.scalar(v) if isinstance(v.type, ScalarType) else e.object_name(v) for v in op.operands)
    if not op.results:
        e.m.line(depth, f"{op.attrs['callee']}({args});")
    elif len(op.results) == 1:
        e.m.line(depth, f"auto {e.names[op.results[0]]} = {op.attrs['callee']}({args});")
    else:
        e.fail(op, "multi-result calls not supported")


def _stmt_return(e: _FuncEmitter, op, depth, device, loop_depth):
    if not op.operands:
        e.m.line(depth, "return;")
        return
    v = op.operands[0]
    text = e.scalar(v) if isinstance(v.type, ScalarType) else e.object_name(v)
    e.m.line(depth, f"return {text};")


def _stmt_gemm(e: _FuncEmitter, op, depth, device, loop_depth):
    a, b, c = (e.object_name(v) for v in op.operands)
    e.m.line(depth, f"LAPIS::gemm({a}, {b}, {c});")


def _stmt_gemv(e: _FuncEmitter, op, depth, device, loop_depth):
    a, x, y = (e.object_name(v) for v in op.operands)
    e.m.line(depth, f"LAPIS::gemv({a}, {x}, {y});")


def _stmt_scf_for(e: _FuncEmitter, op, depth, device, loop_depth):
    lo, hi, step = (e.scalar(v) for v in op.operands)
    iv = f"i{loop_depth}"
    e.names[op.region(0).args[0]] = iv
    e.m.line(depth, f"for (int64_t {iv} = {lo}; {iv} < {hi}; {iv} += {step}) {{")
    e.emit_region(op.region(0), depth + 1, device, loop_depth + 1)
    e.m.line(depth, "}")


def _stmt_scf_if(e: _FuncEmitter, op, depth, device, loop_depth):
    e.m.line(depth, f"if ({e.scalar(op.operands[0])}) {{")
    e.emit_region(op.region(0), depth + 1, device, loop_depth + 1)
    if len(op.regions) > 1:
        e.m.line(depth, "} else {")
        e.emit_region(op.region(1), depth + 1, device, loop_depth + 1)
    e.m.line(depth, "}")


def _stmt_single(e: _FuncEmitter, op, depth, device, loop_depth):
    scope = "PerTeam" if op.attrs["level"] == "perTeam" else "PerThread"
    e.m.line(depth, f"Kokkos::single(Kokkos::{scope}(team), [&]() {{")
    e.emit_region(op.region(0), depth + 1, device, loop_depth)
    e.m.line(depth, "});")


def _stmt_team_barrier(e: _FuncEmitter, op, depth, device, loop_depth):
    e.m.line(depth, "team.team_barrier();")


# --- kokkos parallel loop emission --------------------------------------------------


def _exec_space(op: Operation) -> str:
    return "LAPIS::DeviceExec" if op.attrs.get("executionSpace") == "device" else "LAPIS::HostExec"


def _hoist_device_views(e: _FuncEmitter, op: Operation, depth: int) -> None:
    """Pre-extract device views of every dual buffer the kernel touches.

    DualView objects hold a shared_ptr and must not be captured into device
    lambdas; the raw device-side views are pulled out before the kernel."""
    inside: set[Value] = set()
    for inner in walk(op):
        inside.update(inner.results)
        for region in inner.regions:
            inside.update(region.args)
    for inner in walk(op):
        if inner.name == "memref.get_global":
            name = e.fresh(f"g_{inner.attrs['symbol']}_d")
            e.m.line(depth, f"auto {name} = g_{inner.attrs['symbol']}.device_view();")
            e.mem_expr[inner.results[0]] = name
            continue
        for v in inner.operands:
            if not isinstance(v.type, MemRefType) or v.type.space != "dualview":
                continue
            if v in inside or v in e.mem_expr:
                continue
            name = e.fresh(f"{e.names[v]}_d")
            e.m.line(depth, f"auto {name} = {e.names[v]}.device_view();")
            e.mem_expr[v] = name


def _reduction_parts(e: _FuncEmitter, op: Operation):
    """(init value, elem type, combiner kind) for a single-reduction loop."""
    inits = parallel_init_operands(op)
    if not inits:
        return None
    if len(inits) > 1:
        e.fail(op, "multiple reductions on one loop not supported")
    term = op.region(0).ops[-1]
    kind = classify_combiner(term.regions[0])
    if kind is None:
        e.fail(op, "unrecognized reduction combiner")
    return inits[0], inits[0].type, kind


_REDUCERS = {"add": None, "mul": "Prod", "min": "Min", "max": "Max"}
_ACC_UPDATE = {"add": "{acc} += {v};", "mul": "{acc} *= {v};",
               "min": "{acc} = ({v} < {acc}) ? {v} : {acc};",
               "max": "{acc} = ({v} > {acc}) ? {v} : {acc};"}
_COMBINE = {"add": "{a} + {b}", "mul": "{a} * {b}",
            "min": "(({a}) < ({b}) ? ({a}) : ({b}))",
            "max": "(({a}) > ({b}) ? ({a}) : ({b}))"}


def _is_identity_init(init: Value, kind: str, elem: ScalarType) -> bool:
    from .passes.common import identity_literal

    d = init.defining_op()
    if d is None or d.name != "arith.constant":
        return False
    return d.attrs["value"] == identity_literal(kind, elem)


def _emit_parallel(e: _FuncEmitter, op: Operation, depth: int, policy: str,
                   lambda_args: str, body_device: bool, loop_depth: int,
                   outer_macro: bool) -> None:
    """Shared emission of parallel_for / parallel_reduce over one policy."""
    red = _reduction_parts(e, op)
    capture = "KOKKOS_LAMBDA" if outer_macro else "[&]"
    if red is None:
        e.m.line(depth, f"Kokkos::parallel_for({policy}, {capture}({lambda_args}) {{")
        e.emit_region(op.region(0), depth + 1, body_device, loop_depth + 1)
        e.m.line(depth, "});")
        return
    init, elem, kind = red
    cpp = _scalar_cpp(elem)
    result_name = e.names[op.results[0]]
    identity = _is_identity_init(init, kind, elem)
    rv = result_name if identity else e.fresh()
    e.m.line(depth, f"{cpp} {rv};")
    acc = f"acc{loop_depth}"
    e.m.line(depth, f"Kokkos::parallel_reduce({policy}, {capture}({lambda_args}, {cpp}& {acc}) {{")
    body = op.region(0)
    for inner in body.ops[:-1]:
        e.emit_op(inner, depth + 1, body_device, loop_depth + 1)
    contrib = e.scalar(body.ops[-1].operands[0])
    e.m.line(depth + 1, _ACC_UPDATE[kind].format(acc=acc, v=contrib))
    reducer = _REDUCERS[kind]
    closing = f"}}, {rv});" if reducer is None else f"}}, Kokkos::{reducer}<{cpp}>({rv}));"
    e.m.line(depth, closing)
    if not identity:
        e.m.line(depth, f"const {cpp} {result_name} = "
                        f"{_COMBINE[kind].format(a=e.scalar(init), b=rv)};")


def _stmt_range_parallel(e: _FuncEmitter, op, depth, device, loop_depth):
    level = op.attrs["parallelLevel"]
    dims = op.attrs.get("dims", 1)
    ubs = [e.scalar(v) for v in op.operands[:dims]]
    args = op.region(0).args
    if level in ("toprange", "topmdrange"):
        body_device = op.attrs.get("executionSpace") == "device"
        saved = dict(e.mem_expr)
        if body_device:
            _hoist_device_views(e, op, depth)
        if level == "toprange":
            iv = f"i{loop_depth}"
            e.names[args[0]] = iv
            policy = f"Kokkos::RangePolicy<{_exec_space(op)}>(0, {ubs[0]})"
            _emit_parallel(e, op, depth, policy, f"const int64_t {iv}", body_device,
                           loop_depth, outer_macro=True)
        else:
            ivs = [f"i{loop_depth}_{d}" for d in range(dims)]
            for a, n in zip(args, ivs):
                e.names[a] = n
            zeros = ", ".join("0" for _ in ubs)
            policy = (f"Kokkos::MDRangePolicy<{_exec_space(op)}, Kokkos::Rank<{dims}>>"
                      f"({{{zeros}}}, {{{', '.join(ubs)}}})")
            lam = ", ".join(f"const int64_t {n}" for n in ivs)
            _emit_parallel(e, op, depth, policy, lam, body_device, loop_depth, outer_macro=True)
        e.mem_expr = saved
        return
    # nested levels run inside an enclosing team/thread lambda
    iv = f"i{loop_depth}"
    e.names[args[0]] = iv
    range_kind = "TeamThreadRange" if level == "teamthread" else "ThreadVectorRange"
    policy = f"Kokkos::{range_kind}(team, {ubs[0]})"
    _emit_parallel(e, op, depth, policy, f"const int64_t {iv}", device, loop_depth,
                   outer_macro=False)


def _stmt_team_parallel(e: _FuncEmitter, op, depth, device, loop_depth):
    if op.results:
        e.fail(op, "reductions on team_parallel not supported")
    body_device = op.attrs.get("executionSpace") == "device"
    saved = dict(e.mem_expr)
    if body_device:
        _hoist_device_views(e, op, depth)
    league = e.scalar(op.operands[0])
    ts, vl = parallel_hint_operands(op)
    policy_args = [league, "Kokkos::AUTO"]
    if ts is not None:
        policy_args[1] = e.scalar(ts)
    if vl is not None:
        policy_args.append(e.scalar(vl))
    exec_space = _exec_space(op)
    args = op.region(0).args
    iv = f"i{loop_depth}"
    e.names[args[0]] = iv
    e.names[args[1]] = "team"
    policy = f"Kokkos::TeamPolicy<{exec_space}>({', '.join(policy_args)})"
    e.m.line(depth, f"Kokkos::parallel_for({policy}, "
                    f"KOKKOS_LAMBDA(const LAPIS::TeamMemberT<{exec_space}>& team) {{")
    e.m.line(depth + 1, f"const int64_t {iv} = team.league_rank();")
    e.emit_region(op.region(0), depth + 1, body_device, loop_depth + 1)
    e.m.line(depth, "});")
    e.mem_expr = saved


def _stmt_thread_parallel(e: _FuncEmitter, op, depth, device, loop_depth):
    if op.results:
        e.fail(op, "reductions on thread_parallel not supported")
    body_device = op.attrs.get("executionSpace") == "device"
    saved = dict(e.mem_expr)
    if body_device:
        _hoist_device_views(e, op, depth)
    n = e.scalar(op.operands[0])
    _, vl = parallel_hint_operands(op)
    exec_space = _exec_space(op)
    ts = e.fresh()
    league = e.fresh()
    tt = e.fresh()
    e.m.line(depth, f"const int64_t {ts} = LAPIS::recommendedTeamSize();")
    e.m.line(depth, f"const int64_t {league} = ({n} + {ts} - 1) / {ts};")
    policy_args = [league, ts] + ([e.scalar(vl)] if vl is not None else [])
    args = op.region(0).args
    iv = f"i{loop_depth}"
    e.names[args[0]] = iv
    policy = f"Kokkos::TeamPolicy<{exec_space}>({', '.join(policy_args)})"
    e.m.line(depth, f"Kokkos::parallel_for({policy}, "
                    f"KOKKOS_LAMBDA(const LAPIS::TeamMemberT<{exec_space}>& team) {{")
    e.m.line(depth + 1, f"Kokkos::parallel_for(Kokkos::TeamThreadRange(team, {ts}), "
                        f"[&](const int64_t {tt}) {{")
    e.m.line(depth + 2, f"const int64_t {iv} = team.league_rank() * {ts} + {tt};")
    e.m.line(depth + 2, f"if ({iv} < {n}) {{")
    e.emit_region(op.region(0), depth + 3, body_device, loop_depth + 1)
    e.m.line(depth + 2, "}")
    e.m.line(depth + 1, "});")
    e.m.line(depth, "});")
    e.mem_expr = saved


_STMT = {
    "arith.constant": _stmt_constant,
    "arith.addi": _stmt_int_binary,
    "arith.subi": _stmt_int_binary,
    "arith.muli": _stmt_int_binary,
    "arith.divi": _stmt_int_binary,
    "arith.addf": _stmt_int_binary,
    "arith.subf": _stmt_int_binary,
    "arith.mulf": _stmt_int_binary,
    "arith.divf": _stmt_int_binary,
    "arith.shli": _stmt_int_binary,
    "arith.ceildivsi": _stmt_ceildiv,
    "arith.minui": _stmt_minui,
    "arith.maxsi": _stmt_maxsi,
    "arith.cmpi": _stmt_cmp,
    "arith.cmpf": _stmt_cmp,
    "arith.select": _stmt_select,
    "arith.index_cast": _stmt_index_cast,
    "memref.alloc": _stmt_alloc,
    "memref.dealloc": _stmt_dealloc,
    "memref.load": _stmt_load,
    "memref.store": _stmt_store,
    "memref.dim": _stmt_dim,
    "memref.subview": _stmt_subview,
    "memref.cast": _stmt_cast,
    "memref.copy": _stmt_copy,
    "memref.get_global": _stmt_get_global,
    "kokkos.sync": _stmt_sync,
    "kokkos.modify": _stmt_modify,
    "kokkos.gemm": _stmt_gemm,
    "kokkos.gemv": _stmt_gemv,
    "kokkos.range_parallel": _stmt_range_parallel,
    "kokkos.team_parallel": _stmt_team_parallel,
    "kokkos.thread_parallel": _stmt_thread_parallel,
    "kokkos.single": _stmt_single,
    "kokkos.team_barrier": _stmt_team_barrier,
    "kokkos.yield": _stmt_noop,
    "scf.yield": _stmt_noop,
    "scf.for": _stmt_scf_for,
    "scf.if": _stmt_scf_if,
    "func.call": _stmt_call,
    "func.return": _stmt_return,
}
