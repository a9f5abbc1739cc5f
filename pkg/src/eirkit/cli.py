"""``eirc``: generate, check, expand and simulate ensemble programs.

Exit codes: 0 success, 1 usage error, 2 parse/verify failure, 3 runtime
expansion error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .emit import EmitConfig, UnsupportedGateError, compute_stats, emit_jsonl, emit_qasm2, qasm_filename
from .expander import ExpansionError, PlanError, expand_parallel, expand_stream, plan
from .ir import Program
from .rng import MASK64, derive_stream
from .simulator import SimulationError, run_analytic, run_sampled
from .syntax import SourceError, parse_module, print_module
from .verifier import errors_only, verify
from .workloads import WORKLOADS, WorkloadSpec, build

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3

# Keeps shot sampling off the stream used to expand the same iteration.
SHOT_STREAM_SALT = 0x5EED5A4D1E5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # type: ignore[override]
        raise UsageError(message)


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value <= MASK64:
        raise argparse.ArgumentTypeError(f"seed {value} is not a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid count {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"{value} must be >= 1")
    return value


def _nonnegative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid iteration {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("iteration indices are nonnegative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eirc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"eirc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def seeded(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=_u64, default=None, help="master seed (default: $EIRC_SEED or 0)")
        p.add_argument("--iterations", type=_positive, help="override the ensemble loop trip count")

    gen = sub.add_parser("gen", help="write a built-in workload")
    gen.add_argument("name", choices=sorted(WORKLOADS))
    gen.add_argument("--iterations", type=_positive, default=100)
    gen.add_argument("--qubits", type=int, default=2, help="qubit count (ghz only)")
    gen.add_argument("--textbook", action="store_true", help="ghz: H on qubit 0 only")
    gen.add_argument("--low", type=float, help="rx_sweep: lower angle bound")
    gen.add_argument("--high", type=float, help="rx_sweep: upper angle bound")
    gen.add_argument("-o", "--out", type=Path)

    ver = sub.add_parser("verify", help="parse and verify a program")
    ver.add_argument("file", type=Path)

    fmt = sub.add_parser("fmt", help="print the canonical form")
    fmt.add_argument("file", type=Path)
    fmt.add_argument("-o", "--out", type=Path)

    exp = sub.add_parser("expand", help="materialize the ensemble's circuits")
    exp.add_argument("file", type=Path)
    seeded(exp)
    exp.add_argument("--format", choices=("qasm2", "jsonl"), default="qasm2")
    exp.add_argument("--iteration", type=_nonnegative, action="append", help="expand only this iteration (repeatable)")
    exp.add_argument("-o", "--out", type=Path, help="output directory (default: stdout)")
    exp.add_argument("--no-header", action="store_true", help="omit the seed/iteration header")
    exp.add_argument("--workers", type=_positive, default=1)

    sim = sub.add_parser("simulate", help="simulate expanded circuits")
    sim.add_argument("file", type=Path)
    seeded(sim)
    sim.add_argument("--iteration", type=_nonnegative, action="append")
    mode = sim.add_mutually_exclusive_group()
    mode.add_argument("--shots", type=_positive)
    mode.add_argument("--analytic", action="store_true")

    st = sub.add_parser("stats", help="IR size against enumerated circuit size")
    st.add_argument("file", type=Path)
    seeded(st)
    return parser


def _resolve_seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("EIRC_SEED")
    if env is None:
        return 0
    try:
        return _u64(env)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"EIRC_SEED: {exc}") from None


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load(path: Path) -> Program | None:
    """Parse and verify; print diagnostics and return None on failure."""
    text = _read(path)
    try:
        program = parse_module(text)
    except SourceError as exc:
        print(f"{path}:{exc.line}:{exc.column}: error[{exc.kind}]: {exc.message}", file=sys.stderr)
        return None
    diags = verify(program)
    for d in diags:
        print(d.render(str(path)), file=sys.stderr)
    return None if errors_only(diags) else program


def _plan(program: Program, args: argparse.Namespace):
    try:
        return plan(program, _resolve_seed(args), args.iteration if hasattr(args, "iteration") else None,
                    iterations=args.iterations)
    except PlanError as exc:
        if exc.kind == "runtime":
            print(f"eirc: {exc}", file=sys.stderr)
            raise SystemExit(EXIT_RUNTIME) from None
        raise UsageError(str(exc)) from None


def cmd_gen(args: argparse.Namespace) -> int:
    extra: dict = {}
    if args.textbook:
        if args.name != "ghz":
            raise UsageError("--textbook only applies to ghz")
        extra["textbook"] = True
    for key in ("low", "high"):
        if getattr(args, key) is not None:
            if args.name != "rx_sweep":
                raise UsageError(f"--{key} only applies to rx_sweep")
            extra[key] = getattr(args, key)
    try:
        text = build(WorkloadSpec(args.name, args.qubits, args.iterations, extra))
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    return EXIT_OK if _load(args.file) is not None else EXIT_INVALID


def cmd_fmt(args: argparse.Namespace) -> int:
    text = _read(args.file)
    try:
        out = print_module(parse_module(text))
    except SourceError as exc:
        print(f"{args.file}:{exc.line}:{exc.column}: error[{exc.kind}]: {exc.message}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        args.out.write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return EXIT_OK


def cmd_expand(args: argparse.Namespace) -> int:
    program = _load(args.file)
    if program is None:
        return EXIT_INVALID
    p = _plan(program, args)
    config = EmitConfig(args.format, include_header=not args.no_header, seed=p.master_seed)
    emit = emit_qasm2 if args.format == "qasm2" else emit_jsonl
    jsonl_file = None
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        if args.format == "jsonl":
            jsonl_file = (args.out / "ensemble.jsonl").open("w", encoding="utf-8", newline="\n")
    status = EXIT_OK
    # The sequential stream survives a failing iteration; the pool does not.
    circuits = expand_stream(p) if args.workers == 1 else expand_parallel(p, args.workers)
    try:
        while True:
            try:
                circuit = next(circuits)
            except StopIteration:
                break
            except ExpansionError as exc:
                print(f"{args.file}:{exc.loc[0]}:{exc.loc[1]}: {exc}", file=sys.stderr)
                status = EXIT_RUNTIME
                if args.workers > 1:
                    break
                continue
            try:
                text = emit(circuit, config)
            except UnsupportedGateError as exc:
                print(f"eirc: iteration {circuit.iteration_index}: {exc}", file=sys.stderr)
                status = EXIT_RUNTIME
                continue
            if jsonl_file is not None:
                jsonl_file.write(text)
            elif args.out:
                (args.out / qasm_filename(circuit.iteration_index)).write_text(text, encoding="utf-8", newline="\n")
            else:
                sys.stdout.write(text)
    finally:
        if jsonl_file is not None:
            jsonl_file.close()
    return status


def cmd_simulate(args: argparse.Namespace) -> int:
    program = _load(args.file)
    if program is None:
        return EXIT_INVALID
    p = _plan(program, args)
    shots = args.shots or 1024
    status = EXIT_OK
    circuits = expand_stream(p)
    while True:
        try:
            circuit = next(circuits)
        except StopIteration:
            break
        except ExpansionError as exc:
            print(f"{args.file}:{exc.loc[0]}:{exc.loc[1]}: {exc}", file=sys.stderr)
            status = EXIT_RUNTIME
            continue
        record: dict = {"iteration": circuit.iteration_index}
        try:
            if args.analytic:
                record["probabilities"] = run_analytic(circuit)
            else:
                stream = derive_stream(p.master_seed ^ SHOT_STREAM_SALT, circuit.iteration_index)
                record["shots"] = shots
                record["counts"] = run_sampled(circuit, shots, stream)
        except SimulationError as exc:
            print(f"eirc: iteration {circuit.iteration_index}: {exc}", file=sys.stderr)
            status = EXIT_RUNTIME
            continue
        print(json.dumps(record))
    return status


def cmd_stats(args: argparse.Namespace) -> int:
    program = _load(args.file)
    if program is None:
        return EXIT_INVALID
    p = _plan(program, args)
    try:
        stats = compute_stats(_read(args.file), p)
    except ExpansionError as exc:
        print(f"{args.file}:{exc.loc[0]}:{exc.loc[1]}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(stats.to_json())
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "verify": cmd_verify,
    "fmt": cmd_fmt,
    "expand": cmd_expand,
    "simulate": cmd_simulate,
    "stats": cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"eirc: error: {exc}", file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help / --version exit 0 through argparse; our own exits carry a code.
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
