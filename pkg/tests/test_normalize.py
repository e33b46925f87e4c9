import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lapis.dialect import constant_int_value, scf_parallel_bounds
from lapis.interp import run
from lapis.ir import walk
from lapis.parser import parse
from lapis.passes import PassError
from lapis.passes.normalize import normalize_loops
from lapis.printer import print_program

from conftest import load_fixture


def the_parallel(program):
    loops = [op for op in walk(program) if op.name == "scf.parallel"]
    assert loops
    return loops[0]


def test_strided_loop_folds_to_constant_trip_count():
    normalized = normalize_loops(load_fixture("strided"))
    loop = the_parallel(normalized)
    lows, ups, steps, _ = scf_parallel_bounds(loop)
    assert constant_int_value(lows[0]) == 0
    assert constant_int_value(ups[0]) == 4  # ceil((11 - 3) / 2)
    assert constant_int_value(steps[0]) == 1


def test_already_normalized_is_fixpoint():
    program = load_fixture("depth1")
    assert print_program(normalize_loops(program)) == print_program(program)


def test_strided_semantics_preserved():
    program = load_fixture("strided")
    normalized = normalize_loops(program)
    y = np.zeros(16)
    pre = run(program, "strided", [y.copy()]).outputs[0]
    post = run(normalized, "strided", [y.copy()]).outputs[0]
    assert np.array_equal(pre, post)
    assert list(np.nonzero(pre)[0]) == [3, 5, 7, 9]


def test_non_positive_step_is_diagnosed():
    program = parse(
        """
        func @f(%y: memref<8xf64>) {
          %lo = arith.constant 0 : index
          %hi = arith.constant 8 : index
          %st = arith.constant 0 : index
          %v = arith.constant 1.0 : f64
          scf.parallel %i = %lo to %hi step %st {
            memref.store %v, %y[%i]
            scf.yield
          }
          func.return
        }
        """
    )
    with pytest.raises(PassError) as exc:
        normalize_loops(program)
    assert "non-positive step" in str(exc.value)


def _nest_program(lo0, hi0, st0, lo1, hi1, st1):
    return parse(
        f"""
        func @f(%y: memref<32x32xf64>) -> (memref<32x32xf64>) {{
          %lo0 = arith.constant {lo0} : index
          %hi0 = arith.constant {hi0} : index
          %st0 = arith.constant {st0} : index
          %lo1 = arith.constant {lo1} : index
          %hi1 = arith.constant {hi1} : index
          %st1 = arith.constant {st1} : index
          %one = arith.constant 1.0 : f64
          scf.parallel %i = %lo0 to %hi0 step %st0 {{
            scf.parallel %j = %lo1 to %hi1 step %st1 {{
              %old = memref.load %y[%i, %j]
              %new = arith.addf(%old, %one)
              memref.store %new, %y[%i, %j]
              scf.yield
            }}
            scf.yield
          }}
          func.return(%y)
        }}
        """
    )


@settings(max_examples=40, deadline=None)
@given(
    st.integers(0, 10), st.integers(0, 31), st.integers(1, 5),
    st.integers(0, 10), st.integers(0, 31), st.integers(1, 5),
)
def test_nested_normalization_preserves_store_pattern(lo0, hi0, st0, lo1, hi1, st1):
    program = _nest_program(lo0, hi0, st0, lo1, hi1, st1)
    normalized = normalize_loops(program)
    for loop in (op for op in walk(normalized) if op.name == "scf.parallel"):
        lows, _, steps, _ = scf_parallel_bounds(loop)
        assert constant_int_value(lows[0]) == 0
        assert constant_int_value(steps[0]) == 1
    pre = run(program, "f", [np.zeros((32, 32))]).outputs[0]
    post = run(normalized, "f", [np.zeros((32, 32))]).outputs[0]
    assert np.array_equal(pre, post)
    expected = np.zeros((32, 32))
    for i in range(lo0, hi0, st0):
        for j in range(lo1, hi1, st1):
            expected[i, j] += 1.0
    assert np.array_equal(pre, expected)


def test_dynamic_bounds_normalize_at_runtime():
    program = parse(
        """
        func @f(%y: memref<64xf64>, %lo: index, %hi: index, %st: index) -> (memref<64xf64>) {
          %one = arith.constant 1.0 : f64
          scf.parallel %i = %lo to %hi step %st {
            %old = memref.load %y[%i]
            %new = arith.addf(%old, %one)
            memref.store %new, %y[%i]
            scf.yield
          }
          func.return(%y)
        }
        """
    )
    normalized = normalize_loops(program)
    for lo, hi, stp in ((3, 20, 4), (5, 5, 1), (7, 3, 2)):
        pre = run(program, "f", [np.zeros(64), lo, hi, stp]).outputs[0]
        post = run(normalized, "f", [np.zeros(64), lo, hi, stp]).outputs[0]
        assert np.array_equal(pre, post), (lo, hi, stp)
