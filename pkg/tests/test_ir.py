from lapis.dialect import verify
from lapis.ir import (
    F64,
    INDEX,
    Builder,
    MemRefType,
    Operation,
    Program,
    Region,
    Value,
    walk,
)
from lapis.parser import parse
from lapis.printer import print_program

from conftest import load_fixture


def make_func(name="f", result_types=()):
    region = Region()
    func = Operation("func.func", attrs={"sym_name": name, "result_types": tuple(result_types)})
    func.add_region(region)
    return func, Builder(region)


def test_valid_fixture_has_no_diagnostics():
    assert verify(load_fixture("spmv_loops")) == []


def test_team_barrier_outside_team_parallel():
    func, b = make_func()
    b.op("kokkos.team_barrier")
    b.op("func.return")
    diags = verify(Program([func]))
    assert any("team_barrier outside team_parallel" in d.message for d in diags)


def test_use_before_definition_is_caught():
    func, b = make_func()
    dangling = Value(INDEX)
    b.op("arith.addi", [dangling, dangling], [INDEX])
    b.op("func.return")
    diags = verify(Program([func]))
    assert any("used before definition" in d.message for d in diags)


def test_use_of_later_value_is_caught():
    func, b = make_func()
    add = Operation("arith.addi", [], [INDEX])
    late = Operation("arith.constant", attrs={"value": 1}, result_types=[INDEX])
    add.operands = [late.result, late.result]
    b.insert(add)
    b.insert(late)
    b.op("func.return")
    diags = verify(Program([func]))
    assert any("used before definition" in d.message for d in diags)


def test_missing_terminator():
    func, b = make_func()
    b.const_index(0)
    diags = verify(Program([func]))
    assert any("terminator" in d.message for d in diags)


def test_type_mismatch_in_store():
    func, b = make_func()
    buf = b.op("memref.alloc", [], [MemRefType(F64, (4,))]).result
    i = b.const_index(0)
    b.op("memref.store", [i, buf, i])  # storing an index into an f64 buffer
    b.op("func.return")
    diags = verify(Program([func]))
    assert any("stored value must be f64" in d.message for d in diags)


def test_verifier_idempotent():
    program = load_fixture("team_single_barrier")
    assert verify(program) == verify(program) == []


def test_double_definition_is_caught():
    func, b = make_func()
    c = b.const_index(3)
    dup = Operation("arith.addi", [c, c], [INDEX])
    dup.results = [c]  # graft an existing value as a second definition
    b.insert(dup)
    b.op("func.return")
    diags = verify(Program([func]))
    assert any("more than one defining site" in d.message for d in diags)


def test_walk_preorder_single_op():
    func, b = make_func()
    c = b.const_index(0)
    b.op("func.return")
    ops = walk(Program([func]))
    assert [op.name for op in ops] == ["func.func", "arith.constant", "func.return"]


def test_walk_nested_parallel_order():
    program = parse(
        """
        func @f(%n: index) {
          %c0 = arith.constant 0 : index
          %c1 = arith.constant 1 : index
          scf.parallel %i = %c0 to %n step %c1 {
            scf.parallel %j = %c0 to %n step %c1 {
              scf.yield
            }
            scf.yield
          }
          func.return
        }
        """
    )
    names = [op.name for op in walk(program)]
    outer = names.index("scf.parallel")
    assert names[outer + 1] == "scf.parallel"  # inner directly after outer
    assert names[outer + 2] == "scf.yield"


def test_walk_deterministic_on_fixture():
    program = load_fixture("spmv_loops")
    first = [op.name for op in walk(program)]
    second = [op.name for op in walk(program)]
    assert first == second


def test_clone_is_structurally_identical():
    program = load_fixture("team_single_barrier")
    clone = program.clone()
    assert print_program(clone) == print_program(program)
    assert clone.ops[0] is not program.ops[0]
