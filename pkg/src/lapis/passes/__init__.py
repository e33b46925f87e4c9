"""Lowering pass pipeline.

The preset `sparse-compiler-kokkos` runs, in order: lower_spmv_csr,
lower_linalg_to_kernels, lower_dense_linalg, normalize_loops, map_loops,
manage_dualviews. Each pass consumes a program and produces a new one; the
driver re-verifies after every pass and keeps a canonical snapshot per pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..dialect import Diagnostic, verify
from ..ir import Program
from ..printer import print_program

PRESET_NAME = "sparse-compiler-kokkos"
PRESET_PASSES = (
    "lower_spmv_csr",
    "lower_linalg_to_kernels",
    "lower_dense_linalg",
    "normalize_loops",
    "map_loops",
    "manage_dualviews",
)


class PassError(Exception):
    def __init__(self, diagnostics: list[Diagnostic], pass_name: str = ""):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = diagnostics
        self.pass_name = pass_name


@dataclass
class TargetConfig:
    max_vector_length: int = 32
    has_separate_device_memory: bool = True
    kernel_library_calls: bool = False

    def __post_init__(self) -> None:
        v = self.max_vector_length
        if not (1 <= v <= 1024 and (v & (v - 1)) == 0):
            raise ValueError("max_vector_length must be a power of two in [1, 1024]")


_OPTION_FIELDS = {
    "max-vector-length": ("max_vector_length", int),
    "kernel-library-calls": ("kernel_library_calls", lambda s: bool(int(s))),
    "single-memory-space": ("has_separate_device_memory", lambda s: not bool(int(s))),
}


def apply_options(config: TargetConfig, options: dict[str, str]) -> TargetConfig:
    kw = {}
    for key, raw in options.items():
        if key not in _OPTION_FIELDS:
            raise ValueError(f"unknown pass option {key!r}")
        name, conv = _OPTION_FIELDS[key]
        kw[name] = conv(raw)
    return replace(config, **kw) if kw else config


@dataclass(frozen=True)
class PassPipeline:
    """Ordered, named pass list with per-pass options."""

    passes: tuple[tuple[str, dict], ...]

    @staticmethod
    def parse(spec: str) -> "PassPipeline":
        items: list[tuple[str, dict]] = []
        for raw in _split_spec(spec):
            raw = raw.strip()
            if not raw:
                continue
            options: dict[str, str] = {}
            if "{" in raw:
                if not raw.endswith("}"):
                    raise ValueError(f"malformed pipeline item {raw!r}")
                name, body = raw[:-1].split("{", 1)
                for pair in body.split(","):
                    pair = pair.strip()
                    if not pair:
                        continue
                    if "=" not in pair:
                        raise ValueError(f"malformed option {pair!r}")
                    k, v = pair.split("=", 1)
                    options[k.strip()] = v.strip()
            else:
                name = raw
            items.append((name.strip(), options))
        return PassPipeline(tuple(items))

    @staticmethod
    def preset() -> "PassPipeline":
        return PassPipeline(tuple((name, {}) for name in PRESET_PASSES))

    def spec_string(self) -> str:
        """Serialized form; PassPipeline.parse round-trips it."""
        items = []
        for name, options in self.passes:
            if options:
                body = ",".join(f"{k}={v}" for k, v in sorted(options.items()))
                items.append(f"{name}{{{body}}}")
            else:
                items.append(name)
        return ",".join(items)


def _split_spec(spec: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in spec:
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


def registry() -> dict:
    from . import dualview, linalg_lowering, loop_mapping, normalize, spmv_lowering

    return {
        "lower_spmv_csr": lambda p, c: spmv_lowering.lower_spmv_csr(p),
        "lower_linalg_to_kernels": linalg_lowering.lower_linalg_to_kernels,
        "lower_dense_linalg": linalg_lowering.lower_dense_linalg,
        "normalize_loops": lambda p, c: normalize.normalize_loops(p),
        "map_loops": loop_mapping.map_loops,
        "manage_dualviews": dualview.manage_dualviews,
    }


@dataclass
class PipelineResult:
    program: Program
    snapshots: list[tuple[str, str]] = field(default_factory=list)


def run_pipeline(program: Program, pipeline: PassPipeline, config: TargetConfig | None = None) -> PipelineResult:
    """Apply passes in order, verifying after each; snapshots are canonical prints."""
    config = config or TargetConfig()
    diags = verify(program)
    if diags:
        raise PassError(diags, "<input>")
    passes = registry()
    result = PipelineResult(program)
    for name, options in pipeline.passes:
        if name == PRESET_NAME:
            cfg = apply_options(config, options)
            for inner in PRESET_PASSES:
                result = _run_one(result, passes, inner, cfg)
            continue
        if name not in passes:
            raise PassError([Diagnostic("<pipeline>", f"unknown pass {name!r}")], name)
        result = _run_one(result, passes, name, apply_options(config, options))
    return result


def _run_one(result: PipelineResult, passes: dict, name: str, config: TargetConfig) -> PipelineResult:
    try:
        program = passes[name](result.program, config)
    except PassError as exc:
        exc.pass_name = exc.pass_name or name
        raise
    diags = verify(program)
    if diags:
        raise PassError(
            [Diagnostic(d.path, f"program invalid after {name}: {d.message}", d.op) for d in diags], name)
    result.program = program
    result.snapshots.append((name, print_program(program)))
    return result
