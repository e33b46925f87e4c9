import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lapis.parser import ParseFailure, parse, parse_file
from lapis.printer import print_program, structurally_equal

from conftest import FIXTURE_NAMES, fixture_path, load_fixture
from randgen import random_program


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_fixture_roundtrip(name):
    program = load_fixture(name)
    text = print_program(program)
    reparsed = parse(text)
    assert structurally_equal(program, reparsed)
    assert print_program(reparsed) == text  # canonical fixpoint


def test_empty_function_canonical_text():
    program = parse("func @f() { func.return }")
    assert print_program(program) == "func.func @f() {\n  func.return\n}\n"


def test_csr_loop_nest_parses_to_nested_parallels():
    program = load_fixture("spmv_loops")
    func = program.funcs()[0]
    outer = [op for op in func.region(0).ops if op.name == "scf.parallel"]
    assert len(outer) == 1
    inner = [op for op in outer[0].region(0).ops if op.name == "scf.parallel"]
    assert len(inner) == 1


def test_self_reference_is_use_before_definition():
    with pytest.raises(ParseFailure) as exc:
        parse("func @f() { %a = arith.addi(%a, %a)\n func.return }")
    assert "use before definition" in str(exc.value)


def test_duplicate_name_rejected():
    text = """
    func @f() {
      %a = arith.constant 1 : index
      %a = arith.constant 2 : index
      func.return
    }
    """
    with pytest.raises(ParseFailure) as exc:
        parse(text)
    assert "duplicate SSA name" in str(exc.value)


def test_unknown_op_rejected():
    with pytest.raises(ParseFailure) as exc:
        parse("func @f() { arith.bogus()\n func.return }")
    assert "unknown op name" in str(exc.value)


def test_errors_carry_locations():
    try:
        parse("func @f() {\n  %a = arith.addi(%zz, %zz)\n  func.return\n}")
    except ParseFailure as exc:
        assert exc.errors[0].span.line == 2
    else:
        pytest.fail("expected a parse failure")


def test_module_wrapper_accepted():
    program = parse("module { func @f() { func.return } }")
    assert print_program(program) == "func.func @f() {\n  func.return\n}\n"


def test_generic_form_parses_like_sugar():
    sugar = parse(
        """
        func @f(%n: index) {
          %c0 = arith.constant 0 : index
          %c1 = arith.constant 1 : index
          scf.parallel %i = %c0 to %n step %c1 {
            scf.yield
          }
          func.return
        }
        """
    )
    generic = parse(
        """
        func @f(%n: index) {
          %c0 = arith.constant() {value = 0} : index
          %c1 = arith.constant() {value = 1} : index
          scf.parallel(%c0, %n, %c1) {dims = 1} {
            ^(%i: index):
            scf.yield
          }
          func.return
        }
        """
    )
    assert structurally_equal(sugar, generic)


def test_sidecar_constant_roundtrip(tmp_path):
    data = np.arange(6, dtype="<f8")
    (tmp_path / "w.bin").write_bytes(data.tobytes())
    text = 'memref.global @w {value = @file("w.bin")} : memref<2x3xf64>\n'
    (tmp_path / "prog.mlir").write_text(text + "\nfunc @f() { func.return }\n")
    program = parse_file(str(tmp_path / "prog.mlir"))
    g = program.find_global("w")
    assert list(g.attrs["value"].elements) == data.tolist()
    printed = print_program(program)
    assert '@file("w.bin")' in printed


def test_sidecar_length_mismatch(tmp_path):
    (tmp_path / "w.bin").write_bytes(b"\x00" * 7)
    (tmp_path / "prog.mlir").write_text(
        'memref.global @w {value = @file("w.bin")} : memref<2xf64>\n')
    with pytest.raises(ParseFailure) as exc:
        parse_file(str(tmp_path / "prog.mlir"))
    assert "holds 7 bytes" in str(exc.value)


def test_float_literal_shortest_roundtrip():
    program = parse("func @f() -> (f64) { %c = arith.constant 0.1 : f64\n func.return(%c) }")
    text = print_program(program)
    assert "0.1 : f64" in text
    assert structurally_equal(program, parse(text))


def test_generated_program_roundtrip_sample():
    for seed in range(200):
        program = random_program(seed)
        text = print_program(program)
        assert print_program(parse(text)) == text, f"seed {seed}"


def test_mutated_inputs_never_crash_sample():
    rng = random.Random(0)
    seeds = [print_program(random_program(s)) for s in range(10)]
    seeds.append(fixture_path("spmv_loops").read_text())
    for i in range(1500):
        base = rng.choice(seeds)
        text = _mutate(base, rng)
        try:
            parse(text)
        except ParseFailure:
            pass  # any located error is acceptable; other exceptions are not


def _mutate(text: str, rng: random.Random) -> str:
    chars = list(text)
    for _ in range(rng.randrange(1, 5)):
        kind = rng.randrange(3)
        pos = rng.randrange(max(len(chars), 1))
        if kind == 0 and chars:
            chars[pos % len(chars)] = chr(rng.randrange(32, 127))
        elif kind == 1:
            chars.insert(pos, chr(rng.randrange(32, 127)))
        elif chars:
            del chars[pos % len(chars)]
    return "".join(chars)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_roundtrip_property(seed):
    program = random_program(seed)
    text = print_program(program)
    assert print_program(parse(text)) == text
