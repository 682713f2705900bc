"""Command-line interface: ``dflo run | evolve | steady-state | validate | bench``.

Outputs are deterministic for fixed inputs and seed.  Failures print a JSON
error object ``{"error": {"code", "message", "location"}}`` to stderr and
exit with:

    1  validate found a deviation above tolerance
    2  unreadable or malformed input (ParseError)
    3  invalid content (ValidationError)
    4  numerical failure (NumericalError)
    5  no unique steady state
    6  too many modes for the dense oracle
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from . import __version__, bench, circuit, evolve, schema, validation
from .errors import (
    DfloError,
    NoUniqueSteadyState,
    ParseError,
    TooManyModes,
    ValidationError,
)
from .state import occupations

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4
EXIT_NO_STEADY_STATE = 5
EXIT_TOO_MANY_MODES = 6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message, "argv")


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, TooManyModes):
        return EXIT_TOO_MANY_MODES
    if isinstance(exc, NoUniqueSteadyState):
        return EXIT_NO_STEADY_STATE
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    return EXIT_NUMERICAL


def error_object(exc: DfloError) -> dict:
    location = getattr(exc, "path", "") or ""
    gate = getattr(exc, "gate_index", None)
    if not location and gate is not None:
        location = f"gates/{gate}"
    return {"error": {"code": exc.code, "message": str(exc), "location": location}}


# -- output helpers --------------------------------------------------------------


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _fmt(x: float) -> str:
    return "%.17g" % x


def _columns(modes: int) -> list[str]:
    dim = 2 * modes
    cols = [f"m_{j + 1}_{k + 1}" for j in range(dim) for k in range(j + 1, dim)]
    return cols + [f"n_{j + 1}" for j in range(modes)]


def _row(m: np.ndarray) -> list[float]:
    iu = np.triu_indices(m.shape[0], 1)
    return [float(v) for v in m[iu]] + [float(v) for v in occupations(m)]


def _csv(header: list[str], rows: list[list[float]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands --------------------------------------------------------------------


def cmd_run(args) -> int:
    program = schema.load_program(args.input)
    if args.shots < 1:
        raise ValidationError(f"--shots must be >= 1, got {args.shots}")
    if args.shots == 1:
        result = circuit.run(program, args.seed)
        payload = {"result": result.to_dict()}
    else:
        payload = {"histogram": circuit.sample_shots(program, args.shots, args.seed)}
    payload.update({"seed": args.seed, "shots": args.shots, "version": __version__})
    _emit(_dump_json(payload), args.output)
    return EXIT_OK


def _time_grid(args) -> list[float]:
    if args.points < 1:
        raise ValidationError(f"--points must be >= 1, got {args.points}")
    if args.points == 1:
        return [float(args.t0)]
    if not args.t1 > args.t0:
        raise ValidationError(f"--t1 ({args.t1}) must exceed --t0 ({args.t0})")
    return [float(t) for t in np.linspace(args.t0, args.t1, args.points)]


def _initial_state(args, modes: int) -> np.ndarray:
    if args.state:
        m = schema.load_state(args.state)
    elif args.bits is not None:
        m = schema.state_from_obj({"bits": args.bits})
    else:
        m = schema.state_from_obj({"bits": [0] * modes})
    return m


def cmd_evolve(args) -> int:
    model = schema.load_model(args.input)
    m = _initial_state(args, model.modes)
    times = _time_grid(args)
    states = evolve.trajectory(m, model, times, args.backend)
    if args.format == "csv":
        text = _csv(["t", *_columns(model.modes)], [[t, *_row(s)] for t, s in zip(times, states)])
    else:
        text = _dump_json(
            {
                "backend": evolve.resolve_backend(model, times[-1], args.backend).value,
                "times": times,
                "states": [s.tolist() for s in states],
                "occupations": [occupations(s).tolist() for s in states],
                "version": __version__,
            }
        )
    _emit(text, args.output)
    return EXIT_OK


def cmd_steady_state(args) -> int:
    model = schema.load_model(args.input)
    ss = evolve.steady_state(model)
    if args.format == "csv":
        text = _csv(_columns(model.modes), [_row(ss.m0)])
    else:
        text = _dump_json(
            {
                "m0": ss.m0.tolist(),
                "residual": ss.residual,
                "occupations": occupations(ss.m0).tolist(),
                "version": __version__,
            }
        )
    _emit(text, args.output)
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.input:
        obj = schema.load_json(args.input)
        if isinstance(obj, dict) and "gates" in obj:
            program = schema.load_program(args.input)
            results = validation.check_program(program, tol_scale=args.tol_scale)
        else:
            model = schema.load_model(args.input)
            results = validation.check_model(model, tol_scale=args.tol_scale)
    else:
        results = validation.check_random_suite(args.random, args.seed, tol_scale=args.tol_scale)
    ok = all(r.passed for r in results)
    if args.format == "json":
        text = _dump_json({"checks": [r.to_dict() for r in results], "passed": ok, "version": __version__})
    else:
        width = max(len(r.name) for r in results)
        lines = [f"{'check'.ljust(width)}  {'deviation':>10}  {'tolerance':>10}  result"]
        for r in results:
            lines.append(
                f"{r.name.ljust(width)}  {r.deviation:10.3e}  {r.tolerance:10.1e}  {'PASS' if r.passed else 'FAIL'}"
            )
        lines.append("all checks passed" if ok else "some checks FAILED")
        text = "\n".join(lines) + "\n"
    _emit(text, args.output)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_bench(args) -> int:
    report = bench.run_benchmark(
        lindblad_sizes=tuple(args.lindblad_sizes),
        measure_sizes=tuple(args.measure_sizes),
        lindblad_repeats=args.repeats,
    )
    _emit(_dump_json(report), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dflo", description="Dissipative fermionic linear optics simulator.")
    parser.add_argument("--version", action="version", version=f"dflo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt=True):
        p.add_argument("--output", "-o", help="write to this file instead of stdout")
        if fmt:
            p.add_argument("--format", choices=["json", "csv"], default="json")

    backends = [b.value for b in evolve.Backend if b is not evolve.Backend.UNITARY]

    p = sub.add_parser("run", help="execute a program file")
    p.add_argument("input", help="program JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shots", type=int, default=1)
    common(p, fmt=False)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("evolve", help="covariance trajectory of a model on a time grid")
    p.add_argument("input", help="model JSON")
    p.add_argument("--bits", type=int, nargs="+", help="initial number state (default: vacuum)")
    p.add_argument("--state", help="initial state JSON: {'bits': [...]}, {'covariance': [[...]]} or a matrix")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--points", type=int, default=11)
    p.add_argument("--backend", choices=backends, default="auto")
    common(p)
    p.set_defaults(func=cmd_evolve, format="csv")

    p = sub.add_parser("steady-state", help="fixed point of the covariance flow")
    p.add_argument("input", help="model JSON")
    common(p)
    p.set_defaults(func=cmd_steady_state)

    p = sub.add_parser("validate", help="compare against the dense oracle (N <= 5)")
    p.add_argument("input", nargs="?", help="model or program JSON (default: built-in random suite)")
    p.add_argument("--random", type=int, default=10, help="size of the built-in random suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-scale", type=float, default=1.0, help="multiply every tolerance by this factor")
    p.add_argument("--output", "-o")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="scaling benchmark with machine specs")
    p.add_argument("--lindblad-sizes", type=int, nargs=2, default=list(bench.LINDBLAD_SIZES))
    p.add_argument("--measure-sizes", type=int, nargs=2, default=list(bench.MEASURE_SIZES))
    p.add_argument("--repeats", type=int, default=5, help="repetitions per Lindblad timing")
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "tol_scale", 1.0) <= 0:
            raise ValidationError("--tol-scale must be positive")
        return args.func(args)
    except DfloError as exc:
        sys.stderr.write(json.dumps(error_object(exc), sort_keys=True) + "\n")
        return exit_code_for(exc)


def _entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    _entry()
