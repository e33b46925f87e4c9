#!/usr/bin/env python3
"""Regenerate the golden IR and C++ files from the fixture corpus.

Run from the repository root after an intentional output change, then review
the diff before committing:

    python3 scripts/regen_goldens.py
"""

from pathlib import Path

from lapis.emitter import EmitOptions, emit
from lapis.parser import parse_file
from lapis.passes import PassPipeline, TargetConfig, run_pipeline
from lapis.printer import print_program

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
GOLDEN_IR = ROOT / "tests" / "golden" / "ir"
GOLDEN_CPP = ROOT / "tests" / "golden" / "cpp"

# fixtures whose post-pipeline IR is pinned exactly (loop-mapping structure)
IR_GOLDEN_NAMES = ("depth1", "depth2", "depth4", "alloc_host", "spmv", "team_single_barrier")


def main() -> None:
    GOLDEN_IR.mkdir(parents=True, exist_ok=True)
    GOLDEN_CPP.mkdir(parents=True, exist_ok=True)
    for path in sorted(FIXTURES.glob("*.mlir")):
        program = parse_file(str(path))
        result = run_pipeline(program, PassPipeline.preset(), TargetConfig())
        if path.stem in IR_GOLDEN_NAMES:
            (GOLDEN_IR / f"{path.stem}.mlir").write_text(print_program(result.program))
        emitted = emit(result.program, EmitOptions(header_name=path.stem))
        (GOLDEN_CPP / f"{path.stem}.hpp").write_text(emitted.source)
        print(f"regenerated {path.stem}")


if __name__ == "__main__":
    main()
