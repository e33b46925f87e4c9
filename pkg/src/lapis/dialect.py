"""Op schema catalog and structural verifier.

One schema per operation in the dialect vocabulary (arith / memref / scf /
func / linalg subset / sparse / kokkos). `verify` returns a diagnostic list;
an empty list means the program is valid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ir import (
    DYNAMIC,
    FLOAT_KINDS,
    I1,
    INDEX,
    INT_KINDS,
    MemRefType,
    Operation,
    Program,
    Region,
    ScalarType,
    TeamHandleType,
    Value,
    func_result_types,
    op_path,
)

CMPI_PREDICATES = ("eq", "ne", "slt", "sle", "sgt", "sge", "ult", "ule", "ugt", "uge")
CMPF_PREDICATES = ("oeq", "one", "olt", "ole", "ogt", "oge")
PARALLEL_LEVELS = ("toprange", "topmdrange", "teamthread", "threadvector")
EXECUTION_SPACES = ("host", "device")
SINGLE_LEVELS = ("perTeam", "perThread")
SYNC_SPACES = ("host", "device")
COMBINER_KINDS = ("add", "mul", "min", "max")

INT_BINARY_OPS = (
    "arith.addi", "arith.subi", "arith.muli", "arith.divi",
    "arith.minui", "arith.maxsi", "arith.ceildivsi", "arith.shli",
)
FLOAT_BINARY_OPS = ("arith.addf", "arith.subf", "arith.mulf", "arith.divf")

TERMINATORS = ("scf.yield", "scf.reduce", "scf.reduce.return", "func.return", "kokkos.yield")

# Ops whose execution writes or otherwise affects observable state.
SIDE_EFFECT_OPS = (
    "memref.store", "memref.copy", "memref.alloc", "memref.dealloc",
    "func.call", "kokkos.gemm", "kokkos.gemv", "sparse.spmv_csr",
    "kokkos.sync", "kokkos.modify",
)

KOKKOS_PARALLEL_OPS = ("kokkos.range_parallel", "kokkos.team_parallel", "kokkos.thread_parallel")
PARALLEL_LOOP_OPS = ("scf.parallel",) + KOKKOS_PARALLEL_OPS


@dataclass(frozen=True)
class Diagnostic:
    path: str
    message: str
    op: Operation | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class DenseValue:
    """Payload of a dense<...> attribute: flat row-major elements."""

    elements: tuple
    file_ref: str | None = None


def is_kokkos_parallel(op: Operation) -> bool:
    return op.name in KOKKOS_PARALLEL_OPS


def is_parallel_loop(op: Operation) -> bool:
    return op.name in PARALLEL_LOOP_OPS


def nearest_enclosing_parallel(op: Operation) -> Operation | None:
    for anc in op.ancestors():
        if is_parallel_loop(anc):
            return anc
    return None


def is_top_level_kokkos(op: Operation) -> bool:
    return is_kokkos_parallel(op) and not any(is_kokkos_parallel(a) for a in op.ancestors())


def loop_dims(op: Operation) -> int:
    return op.attrs.get("dims", 1)


def parallel_bound_operands(op: Operation) -> list[Value]:
    """Upper-bound operand slice of a kokkos parallel loop."""
    assert is_kokkos_parallel(op)
    return op.operands[: loop_dims(op)]


def parallel_hint_operands(op: Operation) -> tuple[Value | None, Value | None]:
    """(teamSizeHint, vectorLengthHint) of a team/thread parallel op."""
    pos = loop_dims(op)
    ts = vl = None
    if op.attrs.get("has_team_size_hint"):
        ts = op.operands[pos]
        pos += 1
    if op.attrs.get("has_vector_length_hint"):
        vl = op.operands[pos]
    return ts, vl


def parallel_init_operands(op: Operation) -> list[Value]:
    pos = loop_dims(op)
    pos += 1 if op.attrs.get("has_team_size_hint") else 0
    pos += 1 if op.attrs.get("has_vector_length_hint") else 0
    return op.operands[pos:]


def scf_parallel_bounds(op: Operation) -> tuple[list[Value], list[Value], list[Value], list[Value]]:
    """(lower, upper, step, init) operand slices of an scf.parallel."""
    k = loop_dims(op)
    return op.operands[:k], op.operands[k:2 * k], op.operands[2 * k:3 * k], op.operands[3 * k:]


def classify_combiner(region: Region) -> str | None:
    """Recognize a reduce combiner region as one of add/mul/min/max."""
    if len(region.args) != 2 or not region.ops:
        return None
    term = region.ops[-1]
    if term.name not in ("scf.reduce.return", "scf.yield") or len(term.operands) != 1:
        return None
    a, b = region.args
    out = term.operands[0].defining_op()
    if out is None:
        return None
    if out.name in ("arith.addf", "arith.addi") and set(out.operands) == {a, b}:
        return "add"
    if out.name in ("arith.mulf", "arith.muli") and set(out.operands) == {a, b}:
        return "mul"
    if out.name == "arith.select":
        cond = out.operands[0].defining_op()
        if cond is None or cond.name not in ("arith.cmpi", "arith.cmpf"):
            return None
        pred = cond.attrs.get("predicate")
        if list(cond.operands) != [a, b] or list(out.operands[1:]) != [a, b]:
            return None
        if pred in ("olt", "slt", "ult"):
            return "min"
        if pred in ("ogt", "sgt", "ugt"):
            return "max"
    return None


def constant_int_value(value: Value) -> int | None:
    """The integer behind a value, when it is an arith.constant result."""
    op = value.defining_op()
    if op is not None and op.name == "arith.constant" and isinstance(value.type, ScalarType) and value.type.is_int:
        return int(op.attrs["value"])
    return None


# ---------------------------------------------------------------------------
# schemas

@dataclass(frozen=True)
class OpSchema:
    name: str
    terminator: bool = False
    top_level: bool = False
    has_regions: bool = False
    # enum attrs checked generically: name -> allowed values
    enum_attrs: dict = field(default_factory=dict)


_SCHEMAS: dict[str, OpSchema] = {}


def _schema(name: str, **kw) -> None:
    _SCHEMAS[name] = OpSchema(name, **kw)


_schema("arith.constant")
for _n in INT_BINARY_OPS + FLOAT_BINARY_OPS:
    _schema(_n)
_schema("arith.cmpi", enum_attrs={"predicate": CMPI_PREDICATES})
_schema("arith.cmpf", enum_attrs={"predicate": CMPF_PREDICATES})
_schema("arith.select")
_schema("arith.index_cast")

_schema("memref.alloc")
_schema("memref.dealloc")
_schema("memref.load")
_schema("memref.store")
_schema("memref.dim")
_schema("memref.subview")
_schema("memref.cast")
_schema("memref.copy")
_schema("memref.global", top_level=True)
_schema("memref.get_global")

_schema("scf.parallel", has_regions=True)
_schema("scf.for", has_regions=True)
_schema("scf.if", has_regions=True)
_schema("scf.yield", terminator=True)
_schema("scf.reduce", terminator=True, has_regions=True)
_schema("scf.reduce.return", terminator=True)

_schema("func.func", top_level=True, has_regions=True)
_schema("func.return", terminator=True)
_schema("func.call")

_schema("linalg.matmul")
_schema("linalg.matvec")
_schema("linalg.batch_matmul")
_schema("linalg.fill")
_schema("linalg.elementwise", has_regions=True)
_schema("linalg.reduce", enum_attrs={"combiner": COMBINER_KINDS})

_schema("sparse.spmv_csr")

_schema("kokkos.range_parallel", has_regions=True,
        enum_attrs={"parallelLevel": PARALLEL_LEVELS, "executionSpace": EXECUTION_SPACES})
_schema("kokkos.team_parallel", has_regions=True, enum_attrs={"executionSpace": EXECUTION_SPACES})
_schema("kokkos.thread_parallel", has_regions=True, enum_attrs={"executionSpace": EXECUTION_SPACES})
_schema("kokkos.single", has_regions=True, enum_attrs={"level": SINGLE_LEVELS})
_schema("kokkos.team_barrier")
_schema("kokkos.sync", enum_attrs={"space": SYNC_SPACES})
_schema("kokkos.modify", enum_attrs={"space": SYNC_SPACES})
_schema("kokkos.gemm")
_schema("kokkos.gemv")
_schema("kokkos.yield", terminator=True)

OP_SCHEMAS = _SCHEMAS


def schema_for(name: str) -> OpSchema | None:
    return _SCHEMAS.get(name)


# ---------------------------------------------------------------------------
# verifier

class _Verifier:
    def __init__(self, program: Program):
        self.program = program
        self.diags: list[Diagnostic] = []
        self.funcs = {op.attrs.get("sym_name"): op for op in program.ops if op.name == "func.func"}
        self.globals = {op.attrs.get("sym_name"): op for op in program.ops if op.name == "memref.global"}

    def error(self, op: Operation, message: str) -> None:
        self.diags.append(Diagnostic(op_path(op, self.program), message, op))

    # -- helpers

    def check_scalar(self, op, value: Value, kinds, what: str) -> bool:
        if not isinstance(value.type, ScalarType) or value.type.kind not in kinds:
            self.error(op, f"{what} must have type in {{{', '.join(kinds)}}}, got {value.type}")
            return False
        return True

    def check_memref(self, op, value: Value, what: str) -> MemRefType | None:
        if not isinstance(value.type, MemRefType):
            self.error(op, f"{what} must be a memref, got {value.type}")
            return None
        return value.type

    def check_operand_count(self, op, n: int) -> bool:
        if len(op.operands) != n:
            self.error(op, f"expected {n} operands, got {len(op.operands)}")
            return False
        return True

    def check_result_count(self, op, n: int) -> bool:
        if len(op.results) != n:
            self.error(op, f"expected {n} results, got {len(op.results)}")
            return False
        return True

    def check_region_count(self, op, lo: int, hi: int | None = None) -> bool:
        hi = lo if hi is None else hi
        if not (lo <= len(op.regions) <= hi):
            self.error(op, f"expected {lo}..{hi} regions, got {len(op.regions)}")
            return False
        return True

    def check_same_shape(self, op, a: MemRefType, b: MemRefType, what: str) -> None:
        if a.rank != b.rank:
            self.error(op, f"{what}: rank mismatch {a.rank} vs {b.rank}")
            return
        for da, db in zip(a.shape, b.shape):
            if da != DYNAMIC and db != DYNAMIC and da != db:
                self.error(op, f"{what}: static extent mismatch {a} vs {b}")
                return

    # -- entry

    def run(self) -> list[Diagnostic]:
        seen_defs: set[int] = set()
        names: dict[str, Operation] = {}
        for op in self.program.ops:
            schema = schema_for(op.name)
            if schema is None or not schema.top_level:
                self.error(op, f"op {op.name} not allowed at top level")
                continue
            sym = op.attrs.get("sym_name")
            if sym in names:
                self.error(op, f"duplicate symbol @{sym}")
            names[sym] = op
        for op in self.program.ops:
            if op.parent_region is not None:
                self.error(op, "top-level op has a parent region")
        for op in self.program.ops:
            if op.name == "func.func":
                self.verify_func(op, seen_defs)
            elif op.name == "memref.global":
                self.verify_global(op)
        return self.diags

    def verify_global(self, op: Operation) -> None:
        type_ = op.attrs.get("type")
        if not isinstance(type_, MemRefType):
            self.error(op, "memref.global requires a memref `type` attribute")
            return
        if not type_.has_static_shape:
            self.error(op, "memref.global shape must be static")
        value = op.attrs.get("value")
        if not isinstance(value, DenseValue):
            self.error(op, "memref.global requires a dense `value` attribute")
            return
        expected = 1
        for d in type_.shape:
            expected *= d
        if len(value.elements) != expected:
            self.error(op, f"dense value has {len(value.elements)} elements, shape needs {expected}")

    def verify_func(self, func: Operation, seen_defs: set[int]) -> None:
        if not self.check_region_count(func, 1):
            return
        self.verify_region(func, func.region(0), set(), seen_defs, terminator_kinds=("func.return",))

    def verify_region(self, owner: Operation, region: Region, visible: set[Value],
                      seen_defs: set[int], terminator_kinds: tuple[str, ...]) -> None:
        for arg in region.args:
            if id(arg) in seen_defs:
                self.error(owner, "value has more than one defining site")
            seen_defs.add(id(arg))
        if not region.ops:
            self.error(owner, "region has no terminator")
            return
        local: set[Value] = set(visible) | set(region.args)
        for i, op in enumerate(region.ops):
            is_last = i == len(region.ops) - 1
            schema = schema_for(op.name)
            if schema is None:
                self.error(op, f"unknown op {op.name}")
                continue
            if schema.terminator and not is_last:
                self.error(op, f"terminator {op.name} not at end of region")
            if is_last:
                if not schema.terminator:
                    self.error(op, f"region must end in a terminator, got {op.name}")
                elif op.name not in terminator_kinds:
                    self.error(op, f"terminator {op.name} not allowed here (expected {' or '.join(terminator_kinds)})")
            for v in op.operands:
                if isinstance(v.type, TeamHandleType):
                    self.error(op, "team handle tokens cannot be used as operands")
                if v not in local:
                    self.error(op, f"operand %{v.name_hint or '?'} used before definition")
            for r in op.results:
                if id(r) in seen_defs:
                    self.error(op, "value has more than one defining site")
                seen_defs.add(id(r))
            for attr, allowed in schema.enum_attrs.items():
                if attr in op.attrs and op.attrs[attr] not in allowed:
                    self.error(op, f"attribute {attr} must be one of {allowed}, got {op.attrs[attr]!r}")
            self.verify_op(op, local, seen_defs)
            local.update(op.results)

    # -- per-op structural checks

    def verify_op(self, op: Operation, visible: set[Value], seen_defs: set[int]) -> None:
        handler = getattr(self, "_verify_" + op.name.replace(".", "_"), None)
        if handler is not None:
            handler(op, visible, seen_defs)
        if op.regions and not schema_for(op.name).has_regions:
            self.error(op, f"{op.name} takes no regions")

    def _subregion(self, op, region_index: int, visible, seen_defs, terminators) -> None:
        self.verify_region(op, op.regions[region_index], visible, seen_defs, terminators)

    # arith ----------------------------------------------------------------

    def _verify_arith_constant(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 0) and self.check_result_count(op, 1)):
            return
        t = op.results[0].type
        if not isinstance(t, ScalarType):
            self.error(op, "constant result must be scalar")
            return
        v = op.attrs.get("value")
        if t.is_int and not isinstance(v, (int, bool)):
            self.error(op, f"integer constant needs an int value, got {v!r}")
        if t.is_float and not isinstance(v, (int, float)):
            self.error(op, f"float constant needs a numeric value, got {v!r}")

    def _verify_int_binary(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 2) and self.check_result_count(op, 1)):
            return
        a, b = op.operands
        kinds = ("i32", "i64", "index")
        if self.check_scalar(op, a, kinds, "lhs") and self.check_scalar(op, b, kinds, "rhs"):
            if a.type != b.type or op.results[0].type != a.type:
                self.error(op, "operand/result types must all match")

    def _verify_float_binary(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 2) and self.check_result_count(op, 1)):
            return
        a, b = op.operands
        if self.check_scalar(op, a, FLOAT_KINDS, "lhs") and self.check_scalar(op, b, FLOAT_KINDS, "rhs"):
            if a.type != b.type or op.results[0].type != a.type:
                self.error(op, "operand/result types must all match")

    def _verify_arith_cmpi(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 2) and self.check_result_count(op, 1)):
            return
        a, b = op.operands
        if self.check_scalar(op, a, INT_KINDS, "lhs") and self.check_scalar(op, b, INT_KINDS, "rhs"):
            if a.type != b.type:
                self.error(op, "cmpi operands must match")
        if op.results[0].type != I1:
            self.error(op, "cmpi result must be i1")
        if "predicate" not in op.attrs:
            self.error(op, "cmpi requires a predicate attribute")

    def _verify_arith_cmpf(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 2) and self.check_result_count(op, 1)):
            return
        a, b = op.operands
        if self.check_scalar(op, a, FLOAT_KINDS, "lhs") and self.check_scalar(op, b, FLOAT_KINDS, "rhs"):
            if a.type != b.type:
                self.error(op, "cmpf operands must match")
        if op.results[0].type != I1:
            self.error(op, "cmpf result must be i1")
        if "predicate" not in op.attrs:
            self.error(op, "cmpf requires a predicate attribute")

    def _verify_arith_select(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 3) and self.check_result_count(op, 1)):
            return
        c, a, b = op.operands
        if c.type != I1:
            self.error(op, "select condition must be i1")
        if not isinstance(a.type, ScalarType) or a.type != b.type or op.results[0].type != a.type:
            self.error(op, "select branches and result must share one scalar type")

    def _verify_arith_index_cast(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 1) and self.check_result_count(op, 1)):
            return
        src, dst = op.operands[0].type, op.results[0].type
        ok = (
            isinstance(src, ScalarType) and isinstance(dst, ScalarType)
            and {src.kind, dst.kind} != {"index"}
            and ((src.kind == "index" and dst.kind in ("i32", "i64"))
                 or (dst.kind == "index" and src.kind in ("i32", "i64")))
        )
        if not ok:
            self.error(op, f"index_cast must convert between index and i32/i64, got {src} -> {dst}")

    # memref ----------------------------------------------------------------

    def _verify_memref_alloc(self, op, visible, seen_defs):
        if not self.check_result_count(op, 1):
            return
        t = self.check_memref(op, op.results[0], "alloc result")
        if t is None:
            return
        n_dyn = sum(1 for d in t.shape if d == DYNAMIC)
        if len(op.operands) != n_dyn:
            self.error(op, f"alloc needs {n_dyn} dynamic-extent operands, got {len(op.operands)}")
        for v in op.operands:
            self.check_scalar(op, v, ("index",), "alloc extent")

    def _verify_memref_dealloc(self, op, visible, seen_defs):
        if self.check_operand_count(op, 1) and self.check_result_count(op, 0):
            self.check_memref(op, op.operands[0], "dealloc operand")

    def _verify_memref_load(self, op, visible, seen_defs):
        if not self.check_result_count(op, 1):
            return
        if not op.operands:
            self.error(op, "load needs a memref operand")
            return
        t = self.check_memref(op, op.operands[0], "load base")
        if t is None:
            return
        if len(op.operands) != 1 + t.rank:
            self.error(op, f"load needs {t.rank} subscripts, got {len(op.operands) - 1}")
            return
        for v in op.operands[1:]:
            self.check_scalar(op, v, ("index",), "subscript")
        if op.results[0].type != t.element:
            self.error(op, f"load result must be {t.element}")

    def _verify_memref_store(self, op, visible, seen_defs):
        if not self.check_result_count(op, 0) or len(op.operands) < 2:
            if len(op.operands) < 2:
                self.error(op, "store needs a value and a memref operand")
            return
        t = self.check_memref(op, op.operands[1], "store base")
        if t is None:
            return
        if len(op.operands) != 2 + t.rank:
            self.error(op, f"store needs {t.rank} subscripts, got {len(op.operands) - 2}")
            return
        for v in op.operands[2:]:
            self.check_scalar(op, v, ("index",), "subscript")
        if op.operands[0].type != t.element:
            self.error(op, f"stored value must be {t.element}, got {op.operands[0].type}")

    def _verify_memref_dim(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 1) and self.check_result_count(op, 1)):
            return
        t = self.check_memref(op, op.operands[0], "dim base")
        if t is None:
            return
        idx = op.attrs.get("index")
        if not isinstance(idx, int) or not (0 <= idx < t.rank):
            self.error(op, f"dim index must be in [0, {t.rank}), got {idx!r}")
        if op.results[0].type != INDEX:
            self.error(op, "dim result must be index")

    def _verify_memref_subview(self, op, visible, seen_defs):
        if not self.check_result_count(op, 1) or not op.operands:
            return
        t = self.check_memref(op, op.operands[0], "subview base")
        if t is None:
            return
        if len(op.operands) != 1 + 2 * t.rank:
            self.error(op, f"subview needs {t.rank} offsets and {t.rank} sizes")
            return
        for v in op.operands[1:]:
            self.check_scalar(op, v, ("index",), "subview operand")
        rt = self.check_memref(op, op.results[0], "subview result")
        if rt is None:
            return
        if rt.element != t.element or rt.rank != t.rank or rt.space != t.space:
            self.error(op, "subview result must match base element/rank/space")
            return
        for d, size in zip(rt.shape, op.operands[1 + t.rank:]):
            c = constant_int_value(size)
            if c is not None and d not in (c, DYNAMIC):
                self.error(op, f"subview result extent {d} contradicts constant size {c}")
            if c is None and d != DYNAMIC:
                self.error(op, "subview extent must be dynamic when size is not a constant")

    def _verify_memref_cast(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 1) and self.check_result_count(op, 1)):
            return
        src = self.check_memref(op, op.operands[0], "cast operand")
        dst = self.check_memref(op, op.results[0], "cast result")
        if src is None or dst is None:
            return
        if src.element != dst.element or src.rank != dst.rank or src.space != dst.space:
            self.error(op, "cast may only change static/dynamic extents")
            return
        for a, b in zip(src.shape, dst.shape):
            if a != DYNAMIC and b != DYNAMIC and a != b:
                self.error(op, f"cast between incompatible static extents {a} and {b}")

    def _verify_memref_copy(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 2) and self.check_result_count(op, 0)):
            return
        src = self.check_memref(op, op.operands[0], "copy source")
        dst = self.check_memref(op, op.operands[1], "copy destination")
        if src and dst:
            if src.element != dst.element:
                self.error(op, "copy element types must match")
            else:
                self.check_same_shape(op, src, dst, "copy")

    def _verify_memref_get_global(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 0) and self.check_result_count(op, 1)):
            return
        sym = op.attrs.get("symbol")
        g = self.globals.get(sym)
        if g is None:
            self.error(op, f"unknown global @{sym}")
            return
        t = self.check_memref(op, op.results[0], "get_global result")
        if t is not None and t.element != g.attrs["type"].element:
            self.error(op, "get_global element type mismatch")
        if t is not None:
            self.check_same_shape(op, t, g.attrs["type"], "get_global")

    # scf --------------------------------------------------------------------

    def _verify_scf_parallel(self, op, visible, seen_defs):
        k = loop_dims(op)
        if k < 1:
            self.error(op, "parallel loop needs at least one dimension")
            return
        lows, ups, steps, inits = scf_parallel_bounds(op)
        if len(op.operands) < 3 * k:
            self.error(op, f"scf.parallel needs {3 * k} bound operands")
            return
        for v in (*lows, *ups, *steps):
            self.check_scalar(op, v, ("index",), "loop bound")
        if len(op.results) != len(inits):
            self.error(op, f"{len(inits)} init operands but {len(op.results)} results")
            return
        for init, res in zip(inits, op.results):
            if init.type != res.type:
                self.error(op, "init and result types must match")
        if not self.check_region_count(op, 1):
            return
        body = op.region(0)
        if len(body.args) != k or any(a.type != INDEX for a in body.args):
            self.error(op, f"body must take {k} index arguments")
            return
        terms = ("scf.reduce",) if inits else ("scf.yield",)
        self._subregion(op, 0, visible, seen_defs, terms)
        term = body.terminator
        if inits and term is not None and term.name == "scf.reduce":
            self._check_reduce(term, [i.type for i in inits])
        if not inits and term is not None and term.name == "scf.yield" and term.operands:
            self.error(term, "loop yield takes no operands")

    def _check_reduce(self, term: Operation, types: list) -> None:
        if len(term.operands) != len(types):
            self.error(term, f"scf.reduce needs {len(types)} operands")
            return
        if len(term.regions) != len(types):
            self.error(term, f"scf.reduce needs {len(types)} combiner regions")
            return
        for v, t in zip(term.operands, types):
            if v.type != t:
                self.error(term, f"reduce operand type {v.type} does not match init {t}")
        for region, t in zip(term.regions, types):
            if len(region.args) != 2 or any(a.type != t for a in region.args):
                self.error(term, f"combiner must take two {t} arguments")
                continue
            # combiners see only their own arguments
            self.verify_region(term, region, set(), set(), ("scf.reduce.return",))
            ret = region.terminator
            if ret is not None and ret.name == "scf.reduce.return":
                if len(ret.operands) != 1 or ret.operands[0].type != t:
                    self.error(ret, f"combiner must return one {t}")

    def _verify_scf_for(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 3) and self.check_result_count(op, 0)):
            return
        for v in op.operands:
            self.check_scalar(op, v, ("index",), "loop bound")
        if not self.check_region_count(op, 1):
            return
        body = op.region(0)
        if len(body.args) != 1 or body.args[0].type != INDEX:
            self.error(op, "for body must take one index argument")
            return
        self._subregion(op, 0, visible, seen_defs, ("scf.yield",))

    def _verify_scf_if(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 1) and self.check_result_count(op, 0)):
            return
        if op.operands[0].type != I1:
            self.error(op, "if condition must be i1")
        if not self.check_region_count(op, 1, 2):
            return
        for i, region in enumerate(op.regions):
            if region.args:
                self.error(op, "if regions take no arguments")
            self._subregion(op, i, visible, seen_defs, ("scf.yield",))

    def _verify_scf_reduce(self, op, visible, seen_defs):
        parent = op.parent_op()
        if parent is None or not is_parallel_loop(parent):
            self.error(op, "scf.reduce must terminate a parallel loop body")

    def _verify_scf_reduce_return(self, op, visible, seen_defs):
        parent = op.parent_op()
        if parent is None or parent.name != "scf.reduce":
            self.error(op, "scf.reduce.return only terminates combiner regions")

    # func --------------------------------------------------------------------

    def _verify_func_func(self, op, visible, seen_defs):
        region = op.region(0)
        term = region.terminator
        expected = func_result_types(op)
        if term is not None and term.name == "func.return":
            got = [v.type for v in term.operands]
            if got != expected:
                self.error(term, f"return types {got} do not match function signature {expected}")

    def _verify_func_call(self, op, visible, seen_defs):
        callee = self.funcs.get(op.attrs.get("callee"))
        if callee is None:
            self.error(op, f"unknown function @{op.attrs.get('callee')}")
            return
        params = [a.type for a in callee.region(0).args]
        if [v.type for v in op.operands] != params:
            self.error(op, "call operand types do not match callee parameters")
        if [r.type for r in op.results] != func_result_types(callee):
            self.error(op, "call result types do not match callee results")

    # linalg -------------------------------------------------------------------

    def _matmul_like(self, op, ranks: tuple[int, int, int]) -> None:
        if not (self.check_operand_count(op, 3) and self.check_result_count(op, 0)):
            return
        ts = [self.check_memref(op, v, f"operand {i}") for i, v in enumerate(op.operands)]
        if any(t is None for t in ts):
            return
        a, b, c = ts
        if (a.rank, b.rank, c.rank) != ranks:
            self.error(op, f"expected operand ranks {ranks}, got {(a.rank, b.rank, c.rank)}")
            return
        if not (a.element == b.element == c.element):
            self.error(op, "element types must match")

    def _verify_linalg_matmul(self, op, visible, seen_defs):
        self._matmul_like(op, (2, 2, 2))

    def _verify_kokkos_gemm(self, op, visible, seen_defs):
        self._matmul_like(op, (2, 2, 2))

    def _verify_linalg_matvec(self, op, visible, seen_defs):
        self._matmul_like(op, (2, 1, 1))

    def _verify_kokkos_gemv(self, op, visible, seen_defs):
        self._matmul_like(op, (2, 1, 1))

    def _verify_linalg_batch_matmul(self, op, visible, seen_defs):
        self._matmul_like(op, (3, 3, 3))

    def _verify_linalg_fill(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 2) and self.check_result_count(op, 0)):
            return
        t = self.check_memref(op, op.operands[1], "fill destination")
        if t is not None and op.operands[0].type != t.element:
            self.error(op, f"fill value must be {t.element}")

    def _verify_linalg_elementwise(self, op, visible, seen_defs):
        if len(op.operands) < 2 or not self.check_result_count(op, 0):
            if len(op.operands) < 2:
                self.error(op, "elementwise needs at least one input and one output")
            return
        ts = [self.check_memref(op, v, "elementwise operand") for v in op.operands]
        if any(t is None for t in ts):
            return
        out = ts[-1]
        for t in ts[:-1]:
            self.check_same_shape(op, t, out, "elementwise")
        if not self.check_region_count(op, 1):
            return
        body = op.region(0)
        ins = ts[:-1]
        if len(body.args) != len(ins) or any(a.type != t.element for a, t in zip(body.args, ins)):
            self.error(op, "body must take one scalar per input")
            return
        self.verify_region(op, body, visible, seen_defs, ("scf.yield",))
        term = body.terminator
        if term is not None and term.name == "scf.yield":
            if len(term.operands) != 1 or term.operands[0].type != out.element:
                self.error(term, f"elementwise body must yield one {out.element}")

    def _verify_linalg_reduce(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 2) and self.check_result_count(op, 0)):
            return
        src = self.check_memref(op, op.operands[0], "reduce input")
        dst = self.check_memref(op, op.operands[1], "reduce output")
        if src is None or dst is None:
            return
        axes = op.attrs.get("axes")
        if not isinstance(axes, (list, tuple)) or not axes:
            self.error(op, "reduce needs a nonempty axes attribute")
            return
        axes = list(axes)
        if axes != sorted(set(axes)) or any(not (0 <= a < src.rank) for a in axes):
            self.error(op, f"axes must be strictly increasing within rank {src.rank}")
            return
        if op.attrs.get("combiner") not in COMBINER_KINDS:
            self.error(op, "reduce needs a combiner attribute")
        kept = [d for i, d in enumerate(src.shape) if i not in axes]
        if dst.rank != len(kept):
            self.error(op, f"output rank must be {len(kept)}")
            return
        for a, b in zip(kept, dst.shape):
            if a != DYNAMIC and b != DYNAMIC and a != b:
                self.error(op, "kept extents must match output shape")
        if src.element != dst.element:
            self.error(op, "element types must match")

    def _verify_sparse_spmv_csr(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 5) and self.check_result_count(op, 0)):
            return
        ts = [self.check_memref(op, v, n) for v, n in zip(op.operands, ("rowptr", "colind", "values", "x", "y"))]
        if any(t is None for t in ts):
            return
        rowptr, colind, values, x, y = ts
        for t, n in zip(ts, ("rowptr", "colind", "values", "x", "y")):
            if t.rank != 1:
                self.error(op, f"{n} must be rank 1")
                return
        for t, n in ((rowptr, "rowptr"), (colind, "colind")):
            if t.element.kind not in ("i32", "i64", "index"):
                self.error(op, f"{n} must hold integers")
        if not (values.element == x.element == y.element):
            self.error(op, "values/x/y element types must match")

    # kokkos --------------------------------------------------------------------

    def _check_exec_space(self, op) -> None:
        if "executionSpace" not in op.attrs:
            self.error(op, f"{op.name} requires an executionSpace attribute")
        if any(is_kokkos_parallel(a) for a in op.ancestors()):
            self.error(op, f"{op.name} must be a top-level parallel op")

    def _check_kokkos_loop_common(self, op, n_idx_args: int, extra_arg_types=()) -> bool:
        k = loop_dims(op)
        bounds = op.operands[:k]
        if len(op.operands) < k:
            self.error(op, f"needs {k} bound operands")
            return False
        for v in bounds:
            self.check_scalar(op, v, ("index",), "loop bound")
        ts, vl = parallel_hint_operands(op)
        for hint, what in ((ts, "team size hint"), (vl, "vector length hint")):
            if hint is not None:
                self.check_scalar(op, hint, ("index",), what)
        inits = parallel_init_operands(op)
        if len(op.results) != len(inits):
            self.error(op, f"{len(inits)} init operands but {len(op.results)} results")
            return False
        for init, res in zip(inits, op.results):
            if init.type != res.type:
                self.error(op, "init and result types must match")
        if not self.check_region_count(op, 1):
            return False
        body = op.region(0)
        expected = [INDEX] * n_idx_args + list(extra_arg_types)
        if [a.type for a in body.args] != expected:
            self.error(op, f"body must take arguments {[str(t) for t in expected]}")
            return False
        return True

    def _finish_kokkos_loop(self, op, visible, seen_defs):
        inits = parallel_init_operands(op)
        terms = ("scf.reduce",) if inits else ("kokkos.yield",)
        self._subregion(op, 0, visible, seen_defs, terms)
        term = op.region(0).terminator
        if inits and term is not None and term.name == "scf.reduce":
            self._check_reduce(term, [i.type for i in inits])

    def _verify_kokkos_range_parallel(self, op, visible, seen_defs):
        level = op.attrs.get("parallelLevel")
        if level is None:
            self.error(op, "range_parallel requires a parallelLevel attribute")
            return
        k = loop_dims(op)
        if level == "toprange" and k != 1:
            self.error(op, "toprange loops are one-dimensional")
        if level == "topmdrange" and k < 2:
            self.error(op, "topmdrange loops need at least two dimensions")
        if level in ("teamthread", "threadvector") and k != 1:
            self.error(op, f"{level} loops are one-dimensional (flattened)")
        if op.attrs.get("has_team_size_hint") or op.attrs.get("has_vector_length_hint"):
            self.error(op, "policy hints belong on team/thread parallel ops")
        if not self._check_kokkos_loop_common(op, k):
            return
        if level in ("toprange", "topmdrange"):
            self._check_exec_space(op)
        else:
            if "executionSpace" in op.attrs:
                self.error(op, "nested parallel levels carry no executionSpace")
            enclosing = nearest_enclosing_parallel(op)
            if level == "teamthread":
                if enclosing is None or enclosing.name != "kokkos.team_parallel":
                    self.error(op, "teamthread loop must be directly inside team_parallel")
            else:
                ok = enclosing is not None and (
                    enclosing.name in ("kokkos.team_parallel", "kokkos.thread_parallel")
                    or (enclosing.name == "kokkos.range_parallel"
                        and enclosing.attrs.get("parallelLevel") == "teamthread")
                )
                if not ok:
                    self.error(op, "threadvector loop must be inside team/thread parallelism")
        self._finish_kokkos_loop(op, visible, seen_defs)

    def _verify_kokkos_team_parallel(self, op, visible, seen_defs):
        if loop_dims(op) != 1:
            self.error(op, "team_parallel league is one-dimensional")
            return
        self._check_exec_space(op)
        if not self._check_kokkos_loop_common(op, 1, extra_arg_types=[TeamHandleType()]):
            return
        self._finish_kokkos_loop(op, visible, seen_defs)

    def _verify_kokkos_thread_parallel(self, op, visible, seen_defs):
        if loop_dims(op) != 1:
            self.error(op, "thread_parallel iterates a flattened 1-D range")
            return
        if op.attrs.get("has_team_size_hint"):
            self.error(op, "thread_parallel takes only a vector length hint")
        self._check_exec_space(op)
        if not self._check_kokkos_loop_common(op, 1):
            return
        self._finish_kokkos_loop(op, visible, seen_defs)

    def _verify_kokkos_single(self, op, visible, seen_defs):
        if not (self.check_operand_count(op, 0) and self.check_result_count(op, 0)):
            return
        if "level" not in op.attrs:
            self.error(op, "single requires a level attribute")
        if not any(a.name in ("kokkos.team_parallel", "kokkos.thread_parallel") for a in op.ancestors()):
            self.error(op, "single outside team_parallel/thread_parallel")
        if not self.check_region_count(op, 1):
            return
        if op.region(0).args:
            self.error(op, "single region takes no arguments")
        self._subregion(op, 0, visible, seen_defs, ("kokkos.yield",))

    def _verify_kokkos_team_barrier(self, op, visible, seen_defs):
        self.check_operand_count(op, 0)
        self.check_result_count(op, 0)
        enclosing = nearest_enclosing_parallel(op)
        if enclosing is None or enclosing.name != "kokkos.team_parallel":
            self.error(op, "team_barrier outside team_parallel")

    def _verify_kokkos_sync(self, op, visible, seen_defs):
        if self.check_operand_count(op, 1) and self.check_result_count(op, 0):
            self.check_memref(op, op.operands[0], "sync operand")
            if "space" not in op.attrs:
                self.error(op, "sync requires a space attribute")

    def _verify_kokkos_modify(self, op, visible, seen_defs):
        if self.check_operand_count(op, 1) and self.check_result_count(op, 0):
            self.check_memref(op, op.operands[0], "modify operand")
            if "space" not in op.attrs:
                self.error(op, "modify requires a space attribute")

    def _verify_kokkos_yield(self, op, visible, seen_defs):
        if op.operands:
            self.error(op, "kokkos.yield takes no operands")


for _name in INT_BINARY_OPS:
    setattr(_Verifier, "_verify_" + _name.replace(".", "_"), _Verifier._verify_int_binary)
for _name in FLOAT_BINARY_OPS:
    setattr(_Verifier, "_verify_" + _name.replace(".", "_"), _Verifier._verify_float_binary)


def verify(program: Program) -> list[Diagnostic]:
    """Structural verification; returns every violation found (empty = valid)."""
    try:
        return _Verifier(program).run()
    except Exception as exc:  # malformed in-memory graph
        return [Diagnostic("<program>", f"fatal: cannot traverse program ({exc})")]
