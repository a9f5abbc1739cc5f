"""Incremental construction of programs.

>>> b = Builder()
>>> qs = b.program_alloc(2)
>>> h = b.gate("h", 1)
>>> with b.ensemble_loop(b.const_index(0), b.const_index(10), b.const_index(1)) as i:
...     with b.iteration():
...         b.apply(h, b.extract(qs, b.const_index(0)))
...         b.transmit_results()
>>> program = b.finish()
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from contextlib import contextmanager

from .ir import Dynamic, Operation, Program, Region, Static, ValueId, build_gate_def, build_generic
from .types import (
    PHYSICAL,
    CBitTensor,
    EirType,
    FloatTensor,
    GateDistribution,
    Index,
    IntTensor,
    QubitTensor,
)

__all__ = ["Builder"]


class Builder:
    """Appends ops to the innermost open block; regions open as context managers.

    Value hints are made unique as they are handed out so the printed form
    keeps the requested names.
    """

    def __init__(self) -> None:
        self._stack: list[list[Operation]] = [[]]
        self._types: dict[ValueId, EirType] = {}
        self._hints: set[str] = set()
        self._consts: dict[tuple[str, object], ValueId] = {}

    # -- plumbing ------------------------------------------------------
    def _hint(self, hint: str) -> str:
        name, k = hint, 0
        while name in self._hints:
            k += 1
            name = f"{hint}_{k}"
        self._hints.add(name)
        return name

    def insert(self, op: Operation) -> Operation:
        self._stack[-1].append(op)
        for v, t in op.results:
            self._types[v] = t
        return op

    def op(
        self,
        opname: str,
        operands: Sequence[ValueId] = (),
        attributes: dict | None = None,
        result_types: Sequence[EirType] = (),
        hint: str | None = None,
    ) -> ValueId | None:
        hints = [self._hint(hint or "v")] * len(result_types)
        op = self.insert(build_generic(opname, operands, attributes, result_types, result_hints=hints))
        return op.results[0][0] if op.results else None

    def type_of(self, value: ValueId) -> EirType:
        return self._types[value]

    def finish(self) -> Program:
        if len(self._stack) != 1:
            raise RuntimeError("unclosed region")
        return Program(tuple(self._stack[0]))

    @contextmanager
    def _region(self) -> Iterator[list[Operation]]:
        ops: list[Operation] = []
        self._stack.append(ops)
        try:
            yield ops
        finally:
            self._stack.pop()

    # -- definitions ---------------------------------------------------
    def program_alloc(self, n: int, physicality: str = PHYSICAL, hint: str = "qubits") -> ValueId:
        return self.op("eir.program_alloc", (), None, [QubitTensor((n,), physicality)], hint)

    def alloc_cbits(self, n: int, hint: str = "cbits") -> ValueId:
        return self.op("eir.alloc_cbits", (), None, [CBitTensor((n,))], hint)

    def gate(self, name: str, arity: int, params: Sequence[float | ValueId] = (), hint: str | None = None) -> ValueId:
        specs = [Dynamic(p) if isinstance(p, ValueId) else Static(p) for p in params]
        op = build_gate_def(name, arity, specs, hint=self._hint(hint or name))
        self.insert(op)
        return op.result

    def gate_distribution(self, gates: Sequence[ValueId], hint: str = "dist") -> ValueId:
        arity = self._types[gates[0]].arity  # type: ignore[attr-defined]
        return self.op("eir.gate_distribution", gates, None, [GateDistribution(arity)], hint)

    def const_index(self, value: int, hint: str | None = None) -> ValueId:
        """Index constants are shared: one definition per value at the point of first use."""
        key = ("index", value)
        if key not in self._consts:
            assert len(self._stack) == 1, "shared constants must be created at top level"
            name = hint or (f"c{value}" if value >= 0 else f"cm{-value}")
            self._consts[key] = self.op("arith.constant", (), {"value": value}, [Index()], name)
        return self._consts[key]

    def constant(self, value, type_: EirType, hint: str = "cst") -> ValueId:
        return self.op("arith.constant", (), {"value": value}, [type_], hint)

    # -- randomness ----------------------------------------------------
    def int_uniform(self, low: int, high: int, shape: Sequence[int], width: int = 32, hint: str = "ints") -> ValueId:
        return self.op("eir.int_uniform", (), {"low": low, "high": high}, [IntTensor(tuple(shape), width)], hint)

    def float_uniform(self, low: float, high: float, shape: Sequence[int], hint: str = "floats") -> ValueId:
        attrs = {"low": float(low), "high": float(high)}
        return self.op("eir.float_uniform", (), attrs, [FloatTensor(tuple(shape))], hint)

    # -- data movement -------------------------------------------------
    def extract(self, tensor: ValueId, *indices: ValueId, hint: str | None = None) -> ValueId:
        elem = self._types[tensor].element  # type: ignore[attr-defined]
        return self.op("eir.extract", (tensor, *indices), None, [elem], hint or "e")

    def remsi(self, a: ValueId, b: ValueId, hint: str = "rem") -> ValueId:
        return self.op("arith.remsi", (a, b), None, [self._types[a]], hint)

    def index_cast(self, value: ValueId, to: EirType | None = None, hint: str = "idx") -> ValueId:
        target = to or Index()
        return self.op("arith.index_cast", (value,), None, [target], hint)

    # -- quantum effects -----------------------------------------------
    def apply(self, gate: ValueId, *qubits: ValueId) -> None:
        self.op("eir.apply", (gate, *qubits))

    def apply_distribution(self, dist: ValueId, selector: ValueId, *qubits: ValueId) -> None:
        self.op("eir.apply_distribution", (dist, selector, *qubits))

    def measure(self, qubit: ValueId, cbit: ValueId) -> None:
        self.op("eir.measure", (qubit, cbit))

    def reset(self, qubit: ValueId) -> None:
        self.op("eir.reset", (qubit,))

    def transmit_results(self) -> None:
        self.op("eir.transmit_results")

    # -- structured control flow ---------------------------------------
    @contextmanager
    def for_(self, lo: ValueId, hi: ValueId, step: ValueId, hint: str = "i") -> Iterator[ValueId]:
        iv = ValueId.fresh(self._hint(hint))
        self._types[iv] = Index()
        with self._region() as ops:
            yield iv
        self.insert(build_generic("scf.for", (lo, hi, step), None, (), [Region.of(ops, [(iv, Index())])]))

    ensemble_loop = for_

    @contextmanager
    def iteration(self) -> Iterator[None]:
        with self._region() as ops:
            yield
        self.insert(build_generic("eir.quantum_program_iteration", (), None, (), [Region.of(ops)]))

    @contextmanager
    def if_(self, cond: ValueId) -> Iterator[None]:
        """Then-branch; call :meth:`else_` right after the block to add one."""
        with self._region() as ops:
            yield
        self.insert(build_generic("scf.if", (cond,), None, (), [Region.of(ops)]))

    @contextmanager
    def else_(self) -> Iterator[None]:
        block = self._stack[-1]
        if not block or block[-1].opname != "scf.if" or len(block[-1].regions) != 1:
            raise RuntimeError("else_ must directly follow an if_ block")
        prev = block.pop()
        with self._region() as ops:
            yield
        block.append(build_generic("scf.if", prev.operands, None, (), [prev.regions[0], Region.of(ops)]))

