"""Canonical textual form of programs.

SSA names are renumbered %0, %1, ... in walk order per function, attributes
print sorted by name, one op per line, two-space indent per region depth.
Loop ops print in sugared form; everything else prints generically as
`results = dialect.op(operands) {attrs} : types`.
"""

from __future__ import annotations

import json

import numpy as np

from .dialect import DenseValue, parallel_hint_operands, parallel_init_operands, scf_parallel_bounds
from .ir import Operation, Program, Region, ScalarType, Value

# attrs rendered through dedicated syntax rather than the {…} attr dict
_HIDDEN_ATTRS = {
    "func.func": ("sym_name", "result_types"),
    "memref.global": ("sym_name", "type"),
    "memref.get_global": ("symbol",),
    "func.call": ("callee",),
    "arith.constant": ("value",),
    "scf.parallel": ("dims",),
    "kokkos.range_parallel": ("dims",),
    "kokkos.team_parallel": ("dims", "has_team_size_hint", "has_vector_length_hint"),
    "kokkos.thread_parallel": ("dims", "has_team_size_hint", "has_vector_length_hint"),
}

# ops whose canonical form carries an explicit type annotation
_ANNOTATED = ("arith.constant", "arith.index_cast", "memref.alloc", "memref.cast", "memref.get_global")


def format_float(value: float, kind: str = "f64") -> str:
    """Shortest decimal that round-trips at the given precision."""
    if kind == "f32":
        s = repr(float(np.float32(value)))
    elif kind == "f16":
        s = repr(float(np.float16(value)))
    else:
        s = repr(float(value))
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def format_scalar_literal(value, type_: ScalarType) -> str:
    if type_.is_float:
        return format_float(value, type_.kind)
    return str(int(value))


class _Printer:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.names: dict[Value, int] = {}

    # -- numbering ----------------------------------------------------------

    def _number(self, func: Operation) -> None:
        self.names = {}
        counter = 0

        def add(v: Value) -> None:
            nonlocal counter
            self.names[v] = counter
            counter += 1

        def visit_op(op: Operation) -> None:
            for r in op.results:
                add(r)
            for region in op.regions:
                for a in region.args:
                    add(a)
                for inner in region.ops:
                    visit_op(inner)

        for a in func.region(0).args:
            add(a)
        for op in func.region(0).ops:
            visit_op(op)

    def val(self, v: Value) -> str:
        return f"%{self.names[v]}"

    def vals(self, vs) -> str:
        return ", ".join(self.val(v) for v in vs)

    # -- attribute / type formatting -----------------------------------------

    def attr_value(self, v) -> str:
        if isinstance(v, bool):
            return str(int(v))
        if isinstance(v, int):
            return str(v)
        if isinstance(v, float):
            return format_float(v)
        if isinstance(v, str):
            return v
        if isinstance(v, (list, tuple)):
            return "[" + ", ".join(self.attr_value(x) for x in v) + "]"
        if isinstance(v, DenseValue):
            if v.file_ref is not None:
                return f'@file({json.dumps(v.file_ref)})'
            return "dense<[" + ", ".join(
                format_float(x) if isinstance(x, float) else str(x) for x in v.elements) + "]>"
        raise TypeError(f"cannot print attribute {v!r}")

    def attr_dict(self, op: Operation) -> str:
        hidden = _HIDDEN_ATTRS.get(op.name, ())
        items = sorted((k, v) for k, v in op.attrs.items() if k not in hidden)
        if not items:
            return ""
        return " {" + ", ".join(f"{k} = {self.attr_value(v)}" for k, v in items) + "}"

    # -- op rendering ----------------------------------------------------------

    def emit(self, depth: int, text: str) -> None:
        self.lines.append("  " * depth + text)

    def print_region_body(self, region: Region, depth: int, caret: bool) -> None:
        if caret and region.args:
            args = ", ".join(f"{self.val(a)}: {a.type}" for a in region.args)
            self.emit(depth + 1, f"^({args}):")
        for op in region.ops:
            self.print_op(op, depth + 1)

    def print_op(self, op: Operation, depth: int) -> None:
        handler = getattr(self, "_print_" + op.name.replace(".", "_"), None)
        if handler is not None:
            handler(op, depth)
            return
        self.print_generic(op, depth)

    def print_generic(self, op: Operation, depth: int) -> None:
        head = ""
        if op.results:
            head += self.vals(op.results) + " = "
        head += op.name
        if op.operands:
            head += f"({self.vals(op.operands)})"
        head += self.attr_dict(op)
        if op.name in _ANNOTATED:
            head += f" : {op.results[0].type}"
        if not op.regions:
            self.emit(depth, head)
            return
        self.emit(depth, head + " {")
        for i, region in enumerate(op.regions):
            if i > 0:
                self.emit(depth, "} {")
            self.print_region_body(region, depth, caret=True)
        self.emit(depth, "}")

    # individual canonical forms ------------------------------------------------

    def _print_arith_constant(self, op: Operation, depth: int) -> None:
        t = op.results[0].type
        lit = format_scalar_literal(op.attrs["value"], t)
        self.emit(depth, f"{self.val(op.results[0])} = arith.constant {lit} : {t}")

    def _print_memref_load(self, op: Operation, depth: int) -> None:
        base, idx = op.operands[0], op.operands[1:]
        self.emit(depth, f"{self.val(op.results[0])} = memref.load {self.val(base)}[{self.vals(idx)}]")

    def _print_memref_store(self, op: Operation, depth: int) -> None:
        value, base = op.operands[0], op.operands[1]
        idx = op.operands[2:]
        self.emit(depth, f"memref.store {self.val(value)}, {self.val(base)}[{self.vals(idx)}]")

    def _print_memref_subview(self, op: Operation, depth: int) -> None:
        base = op.operands[0]
        rank = base.type.rank
        offs = op.operands[1:1 + rank]
        sizes = op.operands[1 + rank:]
        self.emit(depth, f"{self.val(op.results[0])} = memref.subview {self.val(base)}"
                         f"[{self.vals(offs)}][{self.vals(sizes)}]")

    def _print_memref_global(self, op: Operation, depth: int) -> None:
        value = self.attr_value(op.attrs["value"])
        self.emit(depth, f"memref.global @{op.attrs['sym_name']} {{value = {value}}} : {op.attrs['type']}")

    def _print_memref_get_global(self, op: Operation, depth: int) -> None:
        self.emit(depth, f"{self.val(op.results[0])} = memref.get_global @{op.attrs['symbol']}"
                         f" : {op.results[0].type}")

    def _print_func_call(self, op: Operation, depth: int) -> None:
        head = ""
        if op.results:
            head += self.vals(op.results) + " = "
        head += f"func.call @{op.attrs['callee']}({self.vals(op.operands)})"
        if op.results:
            head += " : (" + ", ".join(str(r.type) for r in op.results) + ")"
        self.emit(depth, head)

    def _print_func_func(self, op: Operation, depth: int) -> None:
        self._number(op)
        params = ", ".join(f"{self.val(a)}: {a.type}" for a in op.region(0).args)
        results = op.attrs.get("result_types", ())
        res = "" if not results else " -> (" + ", ".join(str(t) for t in results) + ")"
        self.emit(depth, f"func.func @{op.attrs['sym_name']}({params}){res} {{")
        self.print_region_body(op.region(0), depth, caret=False)
        self.emit(depth, "}")

    def _loop_header_bounds(self, vs) -> str:
        if len(vs) == 1:
            return self.val(vs[0])
        return "(" + self.vals(vs) + ")"

    def _print_scf_parallel(self, op: Operation, depth: int) -> None:
        lows, ups, steps, inits = scf_parallel_bounds(op)
        args = op.region(0).args
        head = ""
        if op.results:
            head += self.vals(op.results) + " = "
        head += (f"scf.parallel {self._loop_header_bounds(args)} = {self._loop_header_bounds(lows)}"
                 f" to {self._loop_header_bounds(ups)} step {self._loop_header_bounds(steps)}")
        if inits:
            head += f" init({self.vals(inits)})"
        head += self.attr_dict(op) + " {"
        self.emit(depth, head)
        self.print_region_body(op.region(0), depth, caret=False)
        self.emit(depth, "}")

    def _print_scf_for(self, op: Operation, depth: int) -> None:
        lo, hi, step = op.operands
        iv = op.region(0).args[0]
        self.emit(depth, f"scf.for {self.val(iv)} = {self.val(lo)} to {self.val(hi)}"
                         f" step {self.val(step)} {{")
        self.print_region_body(op.region(0), depth, caret=False)
        self.emit(depth, "}")

    def _print_scf_if(self, op: Operation, depth: int) -> None:
        self.emit(depth, f"scf.if {self.val(op.operands[0])} {{")
        self.print_region_body(op.region(0), depth, caret=False)
        if len(op.regions) > 1:
            self.emit(depth, "} else {")
            self.print_region_body(op.region(1), depth, caret=False)
        self.emit(depth, "}")

    def _kokkos_loop(self, op: Operation, depth: int, keyword: str, args_text: str) -> None:
        bounds = op.operands[: op.attrs.get("dims", 1)]
        ts, vl = parallel_hint_operands(op)
        inits = parallel_init_operands(op)
        head = ""
        if op.results:
            head += self.vals(op.results) + " = "
        head += f"{keyword} ({args_text}) in ({self.vals(bounds)})"
        if ts is not None:
            head += f" team_size({self.val(ts)})"
        if vl is not None:
            head += f" vector_length({self.val(vl)})"
        if inits:
            head += f" init({self.vals(inits)})"
        head += self.attr_dict(op) + " {"
        self.emit(depth, head)
        self.print_region_body(op.region(0), depth, caret=False)
        self.emit(depth, "}")

    def _print_kokkos_range_parallel(self, op: Operation, depth: int) -> None:
        self._kokkos_loop(op, depth, "kokkos.range_parallel", self.vals(op.region(0).args))

    def _print_kokkos_team_parallel(self, op: Operation, depth: int) -> None:
        self._kokkos_loop(op, depth, "kokkos.team_parallel", self.vals(op.region(0).args))

    def _print_kokkos_thread_parallel(self, op: Operation, depth: int) -> None:
        self._kokkos_loop(op, depth, "kokkos.thread_parallel", self.vals(op.region(0).args))

    # -- program ------------------------------------------------------------------

    def print_program(self, program: Program) -> str:
        for i, op in enumerate(program.ops):
            if i > 0:
                self.lines.append("")
            if op.name == "func.func":
                self._print_func_func(op, 0)
            else:
                self.names = {}
                self.print_op(op, 0)
        return "\n".join(self.lines) + "\n"


def print_program(program: Program) -> str:
    return _Printer().print_program(program)


def structurally_equal(a: Program, b: Program) -> bool:
    """True when both programs canonicalize to identical text."""
    return print_program(a) == print_program(b)
