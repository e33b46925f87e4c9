"""SSA intermediate representation: types, values, operations, regions.

A program is a flat list of top-level operations (functions and globals).
Regions hold exactly one block: typed block arguments plus an ordered op
list that ends in a terminator. Values are identity objects: equality is
pointer equality, and every value has exactly one defining site (an
operation result slot or a region argument slot).
"""

from __future__ import annotations

from dataclasses import dataclass

SCALAR_KINDS = ("f16", "f32", "f64", "i1", "i32", "i64", "index")
FLOAT_KINDS = ("f16", "f32", "f64")
INT_KINDS = ("i1", "i32", "i64", "index")
INT_WIDTHS = {"i1": 1, "i32": 32, "i64": 64, "index": 64}
MEMORY_SPACES = ("unassigned", "host", "device", "dualview")

DYNAMIC = -1


@dataclass(frozen=True)
class ScalarType:
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in SCALAR_KINDS:
            raise ValueError(f"unknown scalar kind {self.kind!r}")

    @property
    def is_float(self) -> bool:
        return self.kind in FLOAT_KINDS

    @property
    def is_int(self) -> bool:
        return self.kind in INT_KINDS

    def __str__(self) -> str:
        return self.kind


F16 = ScalarType("f16")
F32 = ScalarType("f32")
F64 = ScalarType("f64")
I1 = ScalarType("i1")
I32 = ScalarType("i32")
I64 = ScalarType("i64")
INDEX = ScalarType("index")


@dataclass(frozen=True)
class TeamHandleType:
    """Opaque token exposed by team loops; never consumed as an operand."""

    def __str__(self) -> str:
        return "team_handle"


TEAM_HANDLE = TeamHandleType()


@dataclass(frozen=True)
class MemRefType:
    """Shaped row-major buffer type. Extent DYNAMIC (-1) means unknown."""

    element: ScalarType
    shape: tuple[int, ...]
    space: str = "unassigned"

    def __post_init__(self) -> None:
        if self.space not in MEMORY_SPACES:
            raise ValueError(f"unknown memory space {self.space!r}")
        for d in self.shape:
            if d < 0 and d != DYNAMIC:
                raise ValueError(f"negative extent {d}")

    @property
    def rank(self) -> int:
        return len(self.shape)

    @property
    def has_static_shape(self) -> bool:
        return all(d != DYNAMIC for d in self.shape)

    def with_space(self, space: str) -> MemRefType:
        return MemRefType(self.element, self.shape, space)

    def __str__(self) -> str:
        dims = "".join(("?" if d == DYNAMIC else str(d)) + "x" for d in self.shape)
        space = "" if self.space == "unassigned" else f", {self.space}"
        return f"memref<{dims}{self.element}{space}>"


Type = ScalarType | MemRefType | TeamHandleType


class Value:
    """An SSA value. `owner` is the defining Operation or Region."""

    __slots__ = ("type", "owner", "index", "name_hint")

    def __init__(self, type: Type, owner=None, index: int = 0, name_hint: str | None = None):
        self.type = type
        self.owner = owner
        self.index = index
        self.name_hint = name_hint

    @property
    def is_block_arg(self) -> bool:
        return isinstance(self.owner, Region)

    def defining_op(self) -> Operation | None:
        return self.owner if isinstance(self.owner, Operation) else None

    def __repr__(self) -> str:
        hint = self.name_hint or "?"
        return f"<Value %{hint}: {self.type}>"


class Region:
    """A single basic block: typed arguments plus an ordered op list."""

    __slots__ = ("args", "ops", "parent_op")

    def __init__(self, arg_types: list[Type] | None = None, arg_names: list[str | None] | None = None):
        arg_types = arg_types or []
        arg_names = arg_names or [None] * len(arg_types)
        self.args = [Value(t, self, i, n) for i, (t, n) in enumerate(zip(arg_types, arg_names))]
        self.ops: list[Operation] = []
        self.parent_op: Operation | None = None

    def add_arg(self, type: Type, name_hint: str | None = None) -> Value:
        v = Value(type, self, len(self.args), name_hint)
        self.args.append(v)
        return v

    def append(self, op: Operation) -> Operation:
        op.parent_region = self
        self.ops.append(op)
        return op

    def insert(self, index: int, op: Operation) -> Operation:
        op.parent_region = self
        self.ops.insert(index, op)
        return op

    @property
    def terminator(self) -> Operation | None:
        return self.ops[-1] if self.ops else None


class Operation:
    """A dialect operation: operands, results, attributes, nested regions."""

    __slots__ = ("name", "operands", "results", "attrs", "regions", "parent_region", "span")

    def __init__(
        self,
        name: str,
        operands: list[Value] | None = None,
        result_types: list[Type] | None = None,
        attrs: dict | None = None,
        regions: list[Region] | None = None,
        result_names: list[str | None] | None = None,
    ):
        self.name = name
        self.operands = list(operands or [])
        rts = result_types or []
        names = result_names or [None] * len(rts)
        self.results = [Value(t, self, i, n) for i, (t, n) in enumerate(zip(rts, names))]
        self.attrs = dict(attrs or {})
        self.regions = list(regions or [])
        for r in self.regions:
            r.parent_op = self
        self.parent_region: Region | None = None
        self.span = None

    @property
    def result(self) -> Value:
        assert len(self.results) == 1, f"{self.name} has {len(self.results)} results"
        return self.results[0]

    @property
    def dialect(self) -> str:
        return self.name.split(".", 1)[0]

    def region(self, i: int = 0) -> Region:
        return self.regions[i]

    def add_region(self, region: Region) -> Region:
        region.parent_op = self
        self.regions.append(region)
        return region

    def parent_op(self) -> Operation | None:
        return self.parent_region.parent_op if self.parent_region else None

    def ancestors(self):
        op = self.parent_op()
        while op is not None:
            yield op
            op = op.parent_op()

    def __repr__(self) -> str:
        return f"<Operation {self.name}>"


class Program:
    """An ordered list of top-level operations (func.func, memref.global)."""

    __slots__ = ("ops",)

    def __init__(self, ops: list[Operation] | None = None):
        self.ops = list(ops or [])

    def funcs(self) -> list[Operation]:
        return [op for op in self.ops if op.name == "func.func"]

    def find_func(self, name: str) -> Operation | None:
        for op in self.ops:
            if op.name == "func.func" and op.attrs.get("sym_name") == name:
                return op
        return None

    def find_global(self, name: str) -> Operation | None:
        for op in self.ops:
            if op.name == "memref.global" and op.attrs.get("sym_name") == name:
                return op
        return None

    def clone(self) -> Program:
        return clone_program(self)


# --- function signature helpers -------------------------------------------

def func_params(func: Operation) -> list[Value]:
    return func.region(0).args


def func_result_types(func: Operation) -> list[Type]:
    return list(func.attrs.get("result_types", ()))


# --- traversal -------------------------------------------------------------

def walk(root, visitor=None) -> "list[Operation]":
    """Pre-order, depth-first walk returning the visit order.

    Deterministic; the single traversal shared by passes and the emitter.
    When `visitor` is given it is called once per op, in order."""
    out: list[Operation] = []
    if isinstance(root, Program):
        stack = list(reversed(root.ops))
    elif isinstance(root, Operation):
        stack = [root]
    elif isinstance(root, Region):
        stack = list(reversed(root.ops))
    else:
        raise TypeError(f"cannot walk {type(root).__name__}")
    while stack:
        op = stack.pop()
        out.append(op)
        if visitor is not None:
            visitor(op)
        for region in reversed(op.regions):
            stack.extend(reversed(region.ops))
    return out


def op_path(op: Operation, program: Program | None = None) -> str:
    """Stable textual location of an op, e.g. `@spmv/4/r0/2`."""
    parts: list[str] = []
    cur = op
    while cur.parent_region is not None:
        region = cur.parent_region
        owner = region.parent_op
        assert owner is not None
        parts.append(str(region.ops.index(cur)))
        parts.append(f"r{owner.regions.index(region)}")
        cur = owner
    if cur.name == "func.func":
        head = f"@{cur.attrs.get('sym_name', '?')}"
    elif program is not None and cur in program.ops:
        head = f"top{program.ops.index(cur)}"
    else:
        head = cur.name
    parts.append(head)
    return "/".join(reversed(parts))


# --- structural cloning -----------------------------------------------------

def clone_region(region: Region, value_map: dict[Value, Value]) -> Region:
    new = Region()
    for arg in region.args:
        value_map[arg] = new.add_arg(arg.type, arg.name_hint)
    for op in region.ops:
        new.append(clone_op(op, value_map))
    return new


def clone_op(op: Operation, value_map: dict[Value, Value]) -> Operation:
    new = Operation(
        op.name,
        operands=[value_map.get(v, v) for v in op.operands],
        result_types=[r.type for r in op.results],
        attrs=dict(op.attrs),
        result_names=[r.name_hint for r in op.results],
    )
    for old_r, new_r in zip(op.results, new.results):
        value_map[old_r] = new_r
    for region in op.regions:
        new.add_region(clone_region(region, value_map))
    return new


def clone_program(program: Program) -> Program:
    value_map: dict[Value, Value] = {}
    return Program([clone_op(op, value_map) for op in program.ops])


# --- construction helper ----------------------------------------------------

class Builder:
    """Inserts ops into a region at a moving cursor."""

    def __init__(self, region: Region, index: int | None = None):
        self.region = region
        self.index = len(region.ops) if index is None else index

    def insert(self, op: Operation) -> Operation:
        self.region.insert(self.index, op)
        self.index += 1
        return op

    def op(self, name, operands=None, result_types=None, attrs=None, regions=None) -> Operation:
        return self.insert(Operation(name, operands, result_types, attrs, regions))

    def constant(self, value, type: ScalarType) -> Value:
        return self.op("arith.constant", attrs={"value": value}, result_types=[type]).result

    def const_index(self, value: int) -> Value:
        return self.constant(value, INDEX)
