"""Expansion of an ensemble program into its individual circuits.

Top-level definitions (gates, distributions, allocations, constants) are
evaluated once when the plan is made. Each iteration then replays the body
of the ensemble loop from that captured environment, with the induction
variable bound to the iteration index and a fresh random stream derived from
``(seed, iteration)``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .circuit import Event, FlatCircuit, GateEvent, MeasureEvent, ResetEvent
from .ir import Operation, Program, ValueId
from .rng import MASK64, RngError, RngStream, derive_stream
from .types import IntScalar
from .verifier import errors_only, verify

__all__ = [
    "ExpansionError",
    "PlanError",
    "ExpansionPlan",
    "QubitRef",
    "CBitRef",
    "GateRef",
    "GateDistRef",
    "plan",
    "expand_iteration",
    "expand_stream",
    "expand_parallel",
]


class ExpansionError(Exception):
    """A runtime failure while expanding one iteration."""

    def __init__(self, kind: str, message: str, iteration: int | None = None, loc: tuple[int, int] = (0, 0)):
        where = f"iteration {iteration}: " if iteration is not None else ""
        super().__init__(f"{where}{kind}: {message}")
        self.kind = kind
        self.message = message
        self.iteration = iteration
        self.loc = loc


class PlanError(ValueError):
    def __init__(self, kind: str, message: str, diagnostics: Sequence = ()):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.diagnostics = list(diagnostics)


@dataclass(frozen=True)
class QubitAlloc:
    offset: int
    shape: tuple[int, ...]


@dataclass(frozen=True)
class CBitAlloc:
    offset: int
    shape: tuple[int, ...]


@dataclass(frozen=True)
class QubitRef:
    index: int


@dataclass(frozen=True)
class CBitRef:
    index: int


@dataclass(frozen=True)
class GateRef:
    name: str
    arity: int
    params: tuple[float, ...]


@dataclass(frozen=True)
class GateDistRef:
    candidates: tuple[GateRef, ...]


@dataclass
class _Frame:
    """Mutable state of one evaluation: values, allocation counters, events."""

    env: dict[ValueId, object]
    n_qubits: int = 0
    n_cbits: int = 0
    stream: RngStream | None = None
    iteration: int | None = None
    events: list[Event] = field(default_factory=list)
    done: bool = False


@dataclass(frozen=True, eq=False)
class ExpansionPlan:
    program: Program
    master_seed: int
    iteration_range: tuple[int, int, int]
    filter: tuple[int, ...] | None = None
    loop: Operation = field(repr=False, default=None)  # type: ignore[assignment]
    captured: _Frame = field(repr=False, default=None)  # type: ignore[assignment]

    @property
    def indices(self) -> Sequence[int]:
        if self.filter is not None:
            return self.filter
        return range(*self.iteration_range)

    def __len__(self) -> int:
        return len(self.indices)


def _signed_rem(a: int, b: int) -> int:
    r = abs(a) % abs(b)
    return -r if a < 0 else r


class _Interpreter:
    def __init__(self, frame: _Frame):
        self.f = frame

    def fail(self, op: Operation, kind: str, message: str) -> ExpansionError:
        return ExpansionError(kind, message, self.f.iteration, op.loc)

    def run(self, ops: Iterable[Operation], skip: Operation | None = None) -> None:
        for op in ops:
            if op is skip:
                continue
            self.step(op)

    def step(self, op: Operation) -> None:
        env = self.f.env
        args = [env[v] for v in op.operands]
        name = op.opname
        value: object = None

        if name == "arith.constant":
            raw = op.attributes["value"]
            value = np.array(raw) if isinstance(raw, tuple) else raw
        elif name == "arith.remsi":
            a, b = (int(x) for x in args)  # type: ignore[call-overload]
            if b == 0:
                raise self.fail(op, "runtime-arith", "arith.remsi by zero")
            value = _signed_rem(a, b)
        elif name == "arith.index_cast":
            value = int(args[0])  # type: ignore[call-overload]
            target = op.result_types[0]
            if isinstance(target, IntScalar):
                lo, hi = -(1 << (target.width - 1)), (1 << (target.width - 1)) - 1
                if not lo <= value <= hi:
                    raise self.fail(op, "runtime-range", f"index_cast of {value} overflows {target}")
        elif name in ("eir.int_uniform", "eir.float_uniform"):
            if self.f.stream is None:
                raise self.fail(op, "runtime-range", f"{name} outside an iteration")
            shape = op.result_types[0].shape  # type: ignore[attr-defined]
            low, high = op.attributes["low"], op.attributes["high"]
            try:
                if name == "eir.int_uniform":
                    value = self.f.stream.int_uniform(low, high, shape)  # type: ignore[arg-type]
                else:
                    value = self.f.stream.float_uniform(low, high, shape)  # type: ignore[arg-type]
            except RngError as exc:
                raise self.fail(op, "runtime-range", str(exc)) from None
        elif name == "eir.program_alloc":
            shape = op.result_types[0].shape  # type: ignore[attr-defined]
            value = QubitAlloc(self.f.n_qubits, shape)
            self.f.n_qubits += math.prod(shape)
        elif name == "eir.alloc_cbits":
            shape = op.result_types[0].shape  # type: ignore[attr-defined]
            value = CBitAlloc(self.f.n_cbits, shape)
            self.f.n_cbits += math.prod(shape)
        elif name == "eir.extract":
            value = self.extract(op, args[0], [int(i) for i in args[1:]])  # type: ignore[call-overload]
        elif name == "eir.gate":
            params = self.gate_params(op, args)
            value = GateRef(op.attributes["name"], op.attributes["arity"], params)  # type: ignore[arg-type]
        elif name == "eir.gate_distribution":
            value = GateDistRef(tuple(args))  # type: ignore[arg-type]
        elif name == "eir.apply":
            self.emit_gate(op, args[0], args[1:])  # type: ignore[arg-type]
        elif name == "eir.apply_distribution":
            dist, sel = args[0], int(args[1])  # type: ignore[call-overload]
            n = len(dist.candidates)  # type: ignore[attr-defined]
            if not 0 <= sel < n:
                raise self.fail(op, "runtime-range", f"selector {sel} outside [0, {n}) for {n}-candidate distribution")
            self.emit_gate(op, dist.candidates[sel], args[2:])  # type: ignore[attr-defined]
        elif name == "eir.reset":
            self.f.events.append(ResetEvent(args[0].index))  # type: ignore[attr-defined]
        elif name == "eir.measure":
            self.f.events.append(MeasureEvent(args[0].index, args[1].index))  # type: ignore[attr-defined]
        elif name == "eir.transmit_results":
            self.f.done = True
        elif name == "eir.quantum_program_iteration":
            self.run(op.regions[0].ops)
        elif name == "scf.for":
            lo, hi, step = (int(x) for x in args)  # type: ignore[call-overload]
            if step < 1:
                raise self.fail(op, "runtime-range", f"scf.for step {step} is not positive")
            iv = op.regions[0].block.args[0][0]
            for i in range(lo, hi, step):
                env[iv] = i
                self.run(op.regions[0].ops)
        elif name == "scf.if":
            if int(args[0]) != 0:  # type: ignore[call-overload]
                self.run(op.regions[0].ops)
            elif len(op.regions) > 1:
                self.run(op.regions[1].ops)
        elif name == "scf.yield":
            pass
        else:  # pragma: no cover - registry and interpreter are kept in sync
            raise self.fail(op, "unsupported", f"cannot interpret {name}")

        if op.results:
            env[op.results[0][0]] = value

    def extract(self, op: Operation, source: object, idx: list[int]) -> object:
        shape = source.shape  # type: ignore[attr-defined]
        for axis, (i, extent) in enumerate(zip(idx, shape)):
            if not 0 <= i < extent:
                raise self.fail(op, "runtime-range", f"index {i} out of bounds for axis {axis} of extent {extent}")
        if isinstance(source, (QubitAlloc, CBitAlloc)):
            flat = int(np.ravel_multi_index(idx, shape))
            ref = QubitRef if isinstance(source, QubitAlloc) else CBitRef
            return ref(source.offset + flat)
        elem = source[tuple(idx)]  # type: ignore[index]
        return float(elem) if isinstance(elem, np.floating) else int(elem)

    def gate_params(self, op: Operation, dynamic: list[object]) -> tuple[float, ...]:
        n = op.result_types[0].n_params  # type: ignore[attr-defined]
        it = iter(dynamic)
        return tuple(
            float(op.attributes[f"param{i}"]) if f"param{i}" in op.attributes else float(next(it))  # type: ignore[arg-type]
            for i in range(n)
        )

    def emit_gate(self, op: Operation, gate: GateRef, qubits: Sequence[QubitRef]) -> None:
        indices = tuple(q.index for q in qubits)
        if len(set(indices)) != len(indices):
            raise self.fail(op, "runtime-operand", f"gate {gate.name} applied to repeated qubits {indices}")
        self.f.events.append(GateEvent(gate.name, gate.params, indices))


def _find_loop(program: Program) -> Operation:
    for op in program.ops:
        if op.opname == "scf.for" and any(
            o.opname == "eir.quantum_program_iteration" for o in op.regions[0].ops
        ):
            return op
    raise PlanError("unverified", "program has no ensemble loop")


def plan(
    program: Program,
    master_seed: int = 0,
    filter: Iterable[int] | None = None,
    *,
    iterations: int | None = None,
) -> ExpansionPlan:
    """Check ``program`` and prepare it for expansion.

    ``iterations`` overrides the ensemble loop's trip count while keeping its
    lower bound and step; the program itself is left untouched.
    """
    errors = errors_only(verify(program))
    if errors:
        raise PlanError("unverified", f"program has {len(errors)} verifier error(s)", errors)
    if not 0 <= master_seed <= MASK64:
        raise PlanError("invalid-seed", f"seed {master_seed} is not a 64-bit unsigned integer")
    loop = _find_loop(program)

    frame = _Frame(env={})
    interp = _Interpreter(frame)
    try:
        interp.run(program.ops, skip=loop)
    except ExpansionError as exc:
        raise PlanError("runtime", str(exc)) from None
    lo, hi, step = (int(frame.env[v]) for v in loop.operands)  # type: ignore[call-overload]
    if iterations is not None:
        if iterations < 1:
            raise PlanError("out-of-range", "iteration count must be >= 1")
        hi = lo + iterations * step
    selected = None
    if filter is not None:
        index_set = range(lo, hi, step)
        selected = tuple(sorted(set(filter)))
        bad = [i for i in selected if i not in index_set]
        if bad:
            raise PlanError("out-of-range", f"iteration(s) {bad} outside loop range {lo}..{hi} step {step}")
    return ExpansionPlan(program, master_seed, (lo, hi, step), selected, loop, frame)


def expand_iteration(plan: ExpansionPlan, iteration: int) -> FlatCircuit:
    """Materialize the circuit of one iteration, independent of all others."""
    lo, hi, step = plan.iteration_range
    if iteration not in range(lo, hi, step):
        raise ExpansionError("runtime-range", f"iteration {iteration} outside loop range", iteration)
    base = plan.captured
    frame = _Frame(
        env=dict(base.env),
        n_qubits=base.n_qubits,
        n_cbits=base.n_cbits,
        stream=derive_stream(plan.master_seed, iteration),
        iteration=iteration,
    )
    loop = plan.loop
    frame.env[loop.regions[0].block.args[0][0]] = iteration
    _Interpreter(frame).run(loop.regions[0].ops)
    if frame.n_qubits < 1:
        raise ExpansionError("runtime-range", "program allocates no qubits", iteration)
    try:
        return FlatCircuit(iteration, frame.n_qubits, frame.n_cbits, tuple(frame.events))
    except ValueError as exc:
        raise ExpansionError("runtime-range", str(exc), iteration) from None


class CircuitStream(Iterator[FlatCircuit]):
    """Lazy, ascending stream of circuits.

    A failing iteration raises :class:`ExpansionError` from ``next()``; the
    stream has already moved past it, so calling ``next()`` again continues
    with the following iteration.
    """

    def __init__(self, plan: ExpansionPlan):
        self.plan = plan
        self._indices = iter(plan.indices)

    def __iter__(self) -> CircuitStream:
        return self

    def __next__(self) -> FlatCircuit:
        iteration = next(self._indices)
        return expand_iteration(self.plan, iteration)


def expand_stream(plan: ExpansionPlan) -> CircuitStream:
    return CircuitStream(plan)


def _expand_one(args: tuple[ExpansionPlan, int]) -> FlatCircuit:
    return expand_iteration(*args)


def expand_parallel(plan: ExpansionPlan, workers: int = 2, chunksize: int = 16) -> Iterator[FlatCircuit]:
    """Same sequence as :func:`expand_stream`, computed in worker processes."""
    if workers <= 1:
        yield from expand_stream(plan)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        jobs = ((plan, i) for i in plan.indices)
        yield from pool.map(_expand_one, jobs, chunksize=chunksize)
