import numpy as np
import pytest

from lapis.interp import (
    ExecConfig,
    InterpError,
    StaleAccessError,
    copy_events,
    diff_outputs,
    format_trace,
    run,
    run_eager_baseline,
)
from lapis.parser import parse

from conftest import SPMV4_EXPECTED, load_fixture, spmv4_inputs


def test_spmv_hand_oracle():
    program = load_fixture("spmv_loops")
    result = run(program, "spmv", spmv4_inputs())
    assert np.array_equal(result.outputs[0], SPMV4_EXPECTED)


def test_spmv_op_matches_loops():
    op_version = run(load_fixture("spmv"), "spmv", spmv4_inputs())
    loop_version = run(load_fixture("spmv_loops"), "spmv", spmv4_inputs())
    assert np.array_equal(op_version.outputs[0], loop_version.outputs[0])


def test_host_only_program_has_empty_trace():
    program = parse(
        """
        func @f(%x: memref<4xf64>) -> (memref<4xf64>) {
          %c0 = arith.constant 0 : index
          %v = memref.load %x[%c0]
          memref.store %v, %x[%c0]
          func.return(%x)
        }
        """
    )
    lazy = run(program, "f", [np.ones(4)])
    eager = run_eager_baseline(program, "f", [np.ones(4)])
    assert lazy.trace == [] and eager.trace == []


STALE_READ = """
func @f(%x: memref<4xf64>) -> (memref<4xf64>) {
  %c0 = arith.constant 0 : index
  %c1 = arith.constant 1 : index
  %n = arith.constant 4 : index
  %two = arith.constant 2.0 : f64
  kokkos.sync(%x) {space = device}
  kokkos.range_parallel (%i) in (%n) {executionSpace = device, parallelLevel = toprange} {
    %v = memref.load %x[%i]
    %w = arith.mulf(%v, %two)
    memref.store %w, %x[%i]
    kokkos.yield
  }
  kokkos.modify(%x) {space = device}
  %r = memref.load %x[%c0]
  memref.store %r, %x[%c1]
  func.return(%x)
}
"""


def test_stale_host_read_aborts():
    # the host load after the kernel has no sync host in front of it
    text = STALE_READ.replace("%x: memref<4xf64>", "%x: memref<4xf64, dualview>")
    program = parse(text)
    with pytest.raises(StaleAccessError):
        run(program, "f", [np.ones(4)])


def test_stale_checking_can_be_relaxed():
    text = STALE_READ.replace("%x: memref<4xf64>", "%x: memref<4xf64, dualview>")
    program = parse(text)
    result = run(program, "f", [np.ones(4)], ExecConfig(strict_stale_checking=False))
    assert any(e.kind == "StaleAccess" for e in result.trace)


def test_sync_on_clean_is_noop():
    program = parse(
        """
        func @f(%x: memref<4xf64, dualview>) -> (memref<4xf64, dualview>) {
          kokkos.sync(%x) {space = host}
          kokkos.sync(%x) {space = host}
          func.return(%x)
        }
        """
    )
    result = run(program, "f", [np.ones(4)])
    noops = [e for e in result.trace if e.kind == "SyncNoop"]
    assert len(noops) == 2
    assert copy_events(result.trace) == []


def test_sync_idempotent_and_flag_algebra():
    program = parse(
        """
        func @f(%x: memref<4xf64, dualview>) -> (memref<4xf64, dualview>) {
          kokkos.sync(%x) {space = device}
          kokkos.sync(%x) {space = device}
          func.return(%x)
        }
        """
    )
    result = run(program, "f", [np.ones(4)])
    kinds = [e.kind for e in result.trace]
    assert kinds == ["H2D", "SyncNoop"]  # inputs arrive host-modified


def test_subview_aliases_parent():
    program = parse(
        """
        func @f(%x: memref<8xf64>) -> (f64) {
          %c2 = arith.constant 2 : index
          %c4 = arith.constant 4 : index
          %c1 = arith.constant 1 : index
          %c3 = arith.constant 3 : index
          %v = arith.constant 42.0 : f64
          %sub = memref.subview %x[%c2][%c4]
          memref.store %v, %sub[%c1]
          %out = memref.load %x[%c3]
          func.return(%out)
        }
        """
    )
    result = run(program, "f", [np.zeros(8)])
    assert result.outputs[0] == 42.0


def test_dealloc_with_live_child_keeps_storage():
    program = parse(
        """
        func @f() -> (f64) {
          %c0 = arith.constant 0 : index
          %c2 = arith.constant 2 : index
          %v = arith.constant 7.0 : f64
          %buf = memref.alloc() : memref<4xf64>
          %sub = memref.subview %buf[%c0][%c2]
          memref.dealloc(%buf)
          memref.store %v, %sub[%c0]
          %out = memref.load %sub[%c0]
          func.return(%out)
        }
        """
    )
    assert run(program, "f", []).outputs[0] == 7.0


def test_access_after_full_free_fails():
    program = parse(
        """
        func @f() -> (f64) {
          %c0 = arith.constant 0 : index
          %buf = memref.alloc() : memref<4xf64>
          memref.dealloc(%buf)
          %out = memref.load %buf[%c0]
          func.return(%out)
        }
        """
    )
    with pytest.raises(InterpError) as exc:
        run(program, "f", [])
    assert "freed buffer" in str(exc.value)


def test_out_of_bounds_reports_path():
    program = parse(
        """
        func @f(%x: memref<4xf64>) -> (f64) {
          %c9 = arith.constant 9 : index
          %out = memref.load %x[%c9]
          func.return(%out)
        }
        """
    )
    with pytest.raises(InterpError) as exc:
        run(program, "f", [np.zeros(4)])
    assert "out of bounds" in str(exc.value) and "@f" in str(exc.value)


def test_division_by_zero():
    program = parse(
        """
        func @f(%a: i64, %b: i64) -> (i64) {
          %q = arith.divi(%a, %b)
          func.return(%q)
        }
        """
    )
    with pytest.raises(InterpError) as exc:
        run(program, "f", [4, 0])
    assert "division by zero" in str(exc.value)


def test_trip_count_guard():
    program = parse(
        """
        func @f() {
          %c0 = arith.constant 0 : index
          %c1 = arith.constant 1 : index
          %n = arith.constant 4294967296 : index
          scf.parallel %i = %c0 to %n step %c1 {
            scf.yield
          }
          func.return
        }
        """
    )
    with pytest.raises(InterpError) as exc:
        run(program, "f", [])
    assert "2^31" in str(exc.value)


def test_integer_wraparound_two_complement():
    program = parse(
        """
        func @f(%a: i32, %b: i32) -> (i32) {
          %s = arith.addi(%a, %b)
          func.return(%s)
        }
        """
    )
    result = run(program, "f", [2**31 - 1, 1])
    assert result.outputs[0] == -(2**31)


def test_single_memory_space_makes_syncs_noops():
    program = parse(
        """
        func @f(%x: memref<4xf64, dualview>) -> (memref<4xf64, dualview>) {
          kokkos.sync(%x) {space = device}
          func.return(%x)
        }
        """
    )
    result = run(program, "f", [np.ones(4)], ExecConfig(has_separate_device_memory=False))
    assert copy_events(result.trace) == []


def test_trace_text_format():
    program = load_fixture("spmv")
    from lapis.passes import PassPipeline, TargetConfig, run_pipeline

    lowered = run_pipeline(program, PassPipeline.preset(), TargetConfig()).program
    result = run(lowered, "spmv", spmv4_inputs())
    text = format_trace(result.trace)
    assert "H2D root=arg0 bytes=40" in text
    assert "D2H root=arg4 bytes=32" in text


def test_diff_outputs_exact_int():
    a = [np.array([1, 2, 3], dtype=np.int32)]
    assert diff_outputs(a, [np.array([1, 2, 3], dtype=np.int32)]).match
    report = diff_outputs(a, [np.array([1, 2, 4], dtype=np.int32)])
    assert not report.match and "(2,)" in report.message


def test_diff_outputs_float_tolerance():
    a = [np.array([1.0, 2.0])]
    b = [np.array([1.0 + 1e-15, 2.0])]
    assert diff_outputs(a, b, rel_tol=1e-12).match
    assert not diff_outputs(a, [np.array([1.0 + 1e-9, 2.0])], rel_tol=1e-12).match


def test_diff_outputs_shape_mismatch():
    report = diff_outputs([np.zeros(3)], [np.zeros(4)])
    assert not report.match and "shape" in report.message


def test_run_determinism():
    program = load_fixture("spmv_loops")
    a = run(program, "spmv", spmv4_inputs())
    b = run(program, "spmv", spmv4_inputs())
    assert np.array_equal(a.outputs[0], b.outputs[0])
    assert [str(e) for e in a.trace] == [str(e) for e in b.trace]


def test_scf_if_branches():
    program = parse(
        """
        func @f(%a: i64, %b: i64) -> (memref<1xi64>) {
          %c0 = arith.constant 0 : index
          %out = memref.alloc() : memref<1xi64>
          %cond = arith.cmpi(%a, %b) {predicate = slt}
          scf.if %cond {
            memref.store %a, %out[%c0]
            scf.yield
          } else {
            memref.store %b, %out[%c0]
            scf.yield
          }
          func.return(%out)
        }
        """
    )
    assert run(program, "f", [3, 9]).outputs[0][0] == 3
    assert run(program, "f", [9, 3]).outputs[0][0] == 3


def test_function_calls_share_buffers():
    program = parse(
        """
        func @callee(%x: memref<4xf64>, %v: f64) {
          %c0 = arith.constant 0 : index
          memref.store %v, %x[%c0]
          func.return
        }

        func @caller(%x: memref<4xf64>) -> (f64) {
          %c0 = arith.constant 0 : index
          %v = arith.constant 5.5 : f64
          func.call @callee(%x, %v)
          %out = memref.load %x[%c0]
          func.return(%out)
        }
        """
    )
    assert run(program, "caller", [np.zeros(4)]).outputs[0] == 5.5


def test_sync_on_child_syncs_the_root():
    program = parse(
        """
        func @f(%x: memref<8xf64, dualview>) -> (memref<8xf64, dualview>) {
          %c2 = arith.constant 2 : index
          %c4 = arith.constant 4 : index
          %sub = memref.subview %x[%c2][%c4]
          kokkos.sync(%sub) {space = device}
          kokkos.sync(%x) {space = device}
          func.return(%x)
        }
        """
    )
    result = run(program, "f", [np.arange(8.0)])
    kinds = [e.kind for e in result.trace]
    assert kinds == ["H2D", "SyncNoop"]  # child sync moved the whole root
    assert result.trace[0].bytes == 8 * 8
