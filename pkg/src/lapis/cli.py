"""Command-line interface: one binary with opt / translate / run subcommands.

    lapis opt --sparse-compiler-kokkos < input.mlir | lapis translate -o out.hpp

`lapis-opt` and `lapis-translate` install as aliases of the respective
subcommands so the two-tool pipe style works unchanged. Exit codes: 0 on
success, 1 when diagnostics were emitted, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import sys

from .emitter import EmissionError, EmitOptions, emit, emit_runtime_header
from .interp import ExecConfig, InterpError, diff_outputs, format_trace, run
from .ir import Program
from .parser import ParseFailure, parse
from .passes import PassError, PassPipeline, TargetConfig, run_pipeline
from .printer import print_program
from .tensors import TensorFormatError, format_outputs, load_args_file

EXIT_OK = 0
EXIT_DIAGNOSTICS = 1
EXIT_USAGE = 2


def _read_input(path: str | None) -> tuple[str, str]:
    if path is None or path == "-":
        return sys.stdin.read(), "<stdin>"
    with open(path, "r", encoding="utf-8") as f:
        return f.read(), path


def _write_output(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)


def _parse_or_fail(text: str, name: str) -> Program:
    try:
        return parse(text)
    except ParseFailure as exc:
        for err in exc.errors:
            print(f"{name}:{err}", file=sys.stderr)
        raise SystemExit(EXIT_DIAGNOSTICS)


def _target_config(args) -> TargetConfig:
    try:
        return TargetConfig(
            max_vector_length=args.max_vector_length,
            has_separate_device_memory=not args.single_memory_space,
            kernel_library_calls=args.kernel_library_calls,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_target_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-vector-length", type=int, default=32,
                   help="cap for vector length hints (power of two, default 32)")
    p.add_argument("--kernel-library-calls", action="store_true",
                   help="rewrite matmul/matvec into kernel-library calls")
    p.add_argument("--single-memory-space", action="store_true",
                   help="target has one memory space (syncs become no-ops)")


def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", nargs="?", default=None, help="input file (default stdin)")
    p.add_argument("-o", "--output", default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lapis", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p_opt = sub.add_parser("opt", help="run a lowering pipeline over textual IR")
    _add_io_flags(p_opt)
    _add_target_flags(p_opt)
    p_opt.add_argument("--pipeline", default=None,
                       help="comma-separated pass list, e.g. normalize_loops,map_loops{max-vector-length=64}")
    p_opt.add_argument("--sparse-compiler-kokkos", action="store_true",
                       help="run the full lowering preset")
    p_opt.add_argument("--print-after-each", action="store_true",
                       help="print the IR after every pass")

    p_tr = sub.add_parser("translate", help="emit Kokkos C++ from fully lowered IR")
    _add_io_flags(p_tr)
    p_tr.add_argument("--emit-runtime-header", metavar="PATH", default=None,
                      help="also write the fixed dual-buffer runtime header")
    p_tr.add_argument("--header-name", default=None, help="stem for the generated header")
    p_tr.add_argument("--no-init-finalize", action="store_true",
                      help="skip lapis_initialize/lapis_finalize emission")

    p_run = sub.add_parser("run", help="interpret a program on tensor arguments")
    _add_io_flags(p_run)
    p_run.add_argument("--entry", default=None, help="entry function name (default: sole function)")
    p_run.add_argument("--args", default=None, help="tensor arguments file")
    p_run.add_argument("--trace", action="store_true", help="append the transfer trace")
    p_run.add_argument("--compare-against", metavar="PATH", default=None,
                       help="run a second program on the same inputs and diff outputs")
    p_run.add_argument("--league-size", type=int, default=4, help="simulated league size")
    p_run.add_argument("--no-strict-stale", action="store_true",
                       help="record stale accesses instead of aborting")
    p_run.add_argument("--single-memory-space", action="store_true",
                       help="simulate a single-memory machine")
    return ap


def cmd_opt(args) -> int:
    config = _target_config(args)
    text, name = _read_input(args.input)
    program = _parse_or_fail(text, name)
    if args.sparse_compiler_kokkos and args.pipeline:
        print("error: --sparse-compiler-kokkos and --pipeline are exclusive", file=sys.stderr)
        return EXIT_USAGE
    if args.sparse_compiler_kokkos:
        pipeline = PassPipeline.preset()
    elif args.pipeline:
        try:
            pipeline = PassPipeline.parse(args.pipeline)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        from .passes import PRESET_NAME, registry
        known = set(registry()) | {PRESET_NAME}
        for pname, _ in pipeline.passes:
            if pname not in known:
                print(f"error: unknown pass {pname!r}", file=sys.stderr)
                return EXIT_USAGE
    else:
        pipeline = PassPipeline(())
    try:
        result = run_pipeline(program, pipeline, config)
    except PassError as exc:
        for d in exc.diagnostics:
            print(f"{name}: error[{exc.pass_name}]: {d}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    if args.print_after_each:
        chunks = []
        for pass_name, snapshot in result.snapshots:
            chunks.append(f"// ----- after {pass_name}\n{snapshot}")
        _write_output(args.output, "".join(chunks))
    else:
        _write_output(args.output, print_program(result.program))
    return EXIT_OK


def cmd_translate(args) -> int:
    text, name = _read_input(args.input)
    program = _parse_or_fail(text, name)
    stem = args.header_name
    if stem is None:
        stem = "lapis_module" if args.output in (None, "-") else \
            args.output.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    options = EmitOptions(emit_init_finalize=not args.no_init_finalize, header_name=stem)
    try:
        result = emit(program, options)
    except EmissionError as exc:
        print(f"{name}: error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    _write_output(args.output, result.source)
    if args.emit_runtime_header:
        _write_output(args.emit_runtime_header, emit_runtime_header())
    blob_dir = ""
    if args.output not in (None, "-") and "/" in args.output:
        blob_dir = args.output.rsplit("/", 1)[0] + "/"
    for blob_name, data in result.blobs:
        with open(blob_dir + blob_name, "wb") as f:
            f.write(data)
    return EXIT_OK


def _resolve_entry(program: Program, entry: str | None, name: str) -> str:
    funcs = program.funcs()
    if entry is not None:
        if program.find_func(entry) is None:
            print(f"{name}: error: no function named @{entry}", file=sys.stderr)
            raise SystemExit(EXIT_USAGE)
        return entry
    if len(funcs) != 1:
        print(f"{name}: error: --entry required when the program has {len(funcs)} functions",
              file=sys.stderr)
        raise SystemExit(EXIT_USAGE)
    return funcs[0].attrs["sym_name"]


def cmd_run(args) -> int:
    text, name = _read_input(args.input)
    program = _parse_or_fail(text, name)
    entry = _resolve_entry(program, args.entry, name)
    func = program.find_func(entry)
    param_types = [a.type for a in func.region(0).args]
    if args.args is None:
        if param_types:
            print(f"{name}: error: @{entry} takes arguments; use --args", file=sys.stderr)
            return EXIT_USAGE
        inputs = []
    else:
        try:
            inputs = load_args_file(args.args, param_types)
        except FileNotFoundError:
            print(f"error: arguments file not found: {args.args}", file=sys.stderr)
            return EXIT_USAGE
        except TensorFormatError as exc:
            print(f"{args.args}: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    config = ExecConfig(
        league_size_for_sim=args.league_size,
        strict_stale_checking=not args.no_strict_stale,
        has_separate_device_memory=not args.single_memory_space,
    )
    try:
        result = run(program, entry, inputs, config)
    except InterpError as exc:
        print(f"{name}: error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    out = format_outputs(result.outputs)
    if args.trace:
        out += format_trace(result.trace)
    if args.compare_against:
        other_text, other_name = _read_input(args.compare_against)
        other = _parse_or_fail(other_text, other_name)
        other_entry = _resolve_entry(other, args.entry, other_name)
        try:
            other_result = run(other, other_entry, inputs, config)
        except InterpError as exc:
            print(f"{other_name}: error: {exc}", file=sys.stderr)
            return EXIT_DIAGNOSTICS
        report = diff_outputs(result.outputs, other_result.outputs)
        out += f"{report}\n"
        if not report.match:
            _write_output(args.output, out)
            return EXIT_DIAGNOSTICS
    _write_output(args.output, out)
    return EXIT_OK


_COMMANDS = {"opt": cmd_opt, "translate": cmd_translate, "run": cmd_run}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK


def main_opt(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    return main(["opt", *argv])


def main_translate(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    return main(["translate", *argv])


if __name__ == "__main__":
    sys.exit(main())
