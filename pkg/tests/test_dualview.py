import numpy as np
import pytest

from lapis.interp import ExecConfig, copy_events, run, run_eager_baseline
from lapis.ir import MemRefType, walk
from lapis.parser import parse
from lapis.passes import PassError, TargetConfig
from lapis.passes.dualview import manage_dualviews

from conftest import load_fixture, preset_outputs, random_inputs, spmv4_inputs


def spaces_of(program):
    out = {}
    for func in program.funcs():
        for arg in func.region(0).args:
            if isinstance(arg.type, MemRefType):
                out[f"arg{arg.index}"] = arg.type.space
        for op in walk(func):
            if op.name == "memref.alloc":
                out[op.results[0].name_hint or "alloc"] = op.results[0].type.space
    return out


def count_ops(program, name):
    return sum(1 for op in walk(program) if op.name == name)


def test_no_unassigned_spaces_survive():
    for name in ("spmv", "two_kernel", "matmul_f64", "elementwise_chain", "alloc_host"):
        program = preset_outputs(name)[1]
        for op in walk(program):
            for v in op.results:
                if isinstance(v.type, MemRefType):
                    assert v.type.space != "unassigned"


def test_function_boundary_buffers_are_dualview():
    program = preset_outputs("spmv")[1]
    func = program.funcs()[0]
    for arg in func.region(0).args:
        assert arg.type.space == "dualview"
    assert func.attrs["result_types"][0].space == "dualview"


def test_two_kernel_space_assignment():
    program = preset_outputs("two_kernel")[1]
    spaces = spaces_of(program)
    # buf: host-written, device-read -> dualview; o1: device-only; o2: returned
    assert spaces["buf"] == "dualview"
    assert spaces["o1"] == "device"
    assert spaces["o2"] == "dualview"


def test_two_kernel_lazy_sync_counts():
    program = preset_outputs("two_kernel")[1]
    assert count_ops(program, "kokkos.sync") == 1  # one sync device for buf, second kernel elided
    result = run(program, "two_kernel", [np.ones(64)])
    copies = copy_events(result.trace)
    assert [e.kind for e in copies] == ["H2D", "D2H"]
    eager = run_eager_baseline(program, "two_kernel", [np.ones(64)])
    h2d = [e for e in eager.trace if e.kind == "H2D"]
    assert len(h2d) >= 2
    assert len(copy_events(eager.trace)) > len(copies)


def test_host_only_buffer_gets_no_syncs():
    program = parse(
        """
        func @f(%x: memref<8xf64>) -> (f64) {
          %c0 = arith.constant 0 : index
          %c1 = arith.constant 1 : index
          %n = arith.constant 8 : index
          %t = memref.alloc() : memref<8xf64>
          scf.for %i = %c0 to %n step %c1 {
            %v = memref.load %x[%i]
            memref.store %v, %t[%i]
            scf.yield
          }
          %out = memref.load %t[%c0]
          func.return(%out)
        }
        """
    )
    lowered = manage_dualviews(program, TargetConfig())
    alloc = next(op for op in walk(lowered) if op.name == "memref.alloc")
    assert alloc.results[0].type.space == "host"
    assert count_ops(lowered, "kokkos.sync") == 0
    assert count_ops(lowered, "kokkos.modify") == 0


def test_kernel_write_then_host_read_costs_one_d2h():
    program = preset_outputs("spmv")[1]
    result = run(program, "spmv", spmv4_inputs())
    copies = copy_events(result.trace)
    assert [e.kind for e in copies] == ["H2D", "H2D", "H2D", "H2D", "D2H"]
    assert count_ops(program, "kokkos.modify") == 1


def test_redundant_syncs_are_statically_elided():
    # two kernels reading the same buffer: one sync, no intervening modify
    program = preset_outputs("elementwise_chain")[1]
    syncs = [op for op in walk(program) if op.name == "kokkos.sync"]
    roots = {}
    for op in syncs:
        key = (id(op.operands[0]), op.attrs["space"])
        roots[key] = roots.get(key, 0) + 1
    assert all(n == 1 for n in roots.values())


def test_requires_mapped_input():
    with pytest.raises(PassError) as exc:
        manage_dualviews(load_fixture("depth1"), TargetConfig())
    assert "map loops first" in str(exc.value)


def test_rejects_preassigned_spaces():
    program = parse(
        """
        func @f(%x: memref<4xf64, device>) {
          func.return
        }
        """
    )
    with pytest.raises(PassError) as exc:
        manage_dualviews(program, TargetConfig())
    assert "already assigned" in str(exc.value)


def test_stale_access_freedom_across_fixtures():
    rng = np.random.default_rng(123)
    for name in ("spmv", "two_kernel", "matmul_f64", "elementwise_chain",
                 "team_single_barrier", "axis_reduce", "globals"):
        original, lowered, _ = preset_outputs(name)
        inputs = spmv4_inputs() if name == "spmv" else random_inputs(original, rng)
        result = run(lowered, name and original.funcs()[0].attrs["sym_name"], inputs)
        assert not [e for e in result.trace if e.kind == "StaleAccess"], name


def test_transfer_minimality_vs_eager():
    rng = np.random.default_rng(7)
    for name in ("spmv", "two_kernel", "matmul_f64", "elementwise_chain", "depth1"):
        original, lowered, _ = preset_outputs(name)
        entry = original.funcs()[0].attrs["sym_name"]
        inputs = spmv4_inputs() if name == "spmv" else random_inputs(original, rng)
        lazy = run(lowered, entry, [np.copy(v) if isinstance(v, np.ndarray) else v for v in inputs])
        eager = run_eager_baseline(lowered, entry,
                                   [np.copy(v) if isinstance(v, np.ndarray) else v for v in inputs])
        assert len(copy_events(lazy.trace)) <= len(copy_events(eager.trace)), name


def test_globals_become_dualview_and_sync():
    program = preset_outputs("globals")[1]
    g = program.find_global("weights")
    assert g.attrs["type"].space == "dualview"
    assert count_ops(program, "kokkos.sync") >= 1
    rng = np.random.default_rng(5)
    x = rng.uniform(-1, 1, 4)
    result = run(program, "apply_weights", [x])
    assert np.allclose(result.outputs[0], x * np.array([0.5, 1.5, 2.5, 3.5]))


def test_single_memory_space_config_runs_clean():
    program = preset_outputs("spmv")[1]
    result = run(program, "spmv", spmv4_inputs(), ExecConfig(has_separate_device_memory=False))
    assert copy_events(result.trace) == []
    assert np.array_equal(result.outputs[0], [3.0, 3.0, 0.0, 9.0])
