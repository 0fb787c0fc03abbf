"""Bench-program language, record emission and program execution."""

from .dsl import BenchProgram, load_bench, parse_bench, serialize_bench
from .io import emit_csv, emit_json
from .program import compile_program, run_program
