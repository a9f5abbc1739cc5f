"""Flat, branch-free circuits produced by expanding one ensemble iteration."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

__all__ = ["ResetEvent", "GateEvent", "MeasureEvent", "Event", "FlatCircuit"]


@dataclass(frozen=True)
class ResetEvent:
    qubit: int


@dataclass(frozen=True)
class GateEvent:
    name: str
    params: tuple[float, ...]
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class MeasureEvent:
    qubit: int
    cbit: int


Event = Union[ResetEvent, GateEvent, MeasureEvent]


@dataclass(frozen=True)
class FlatCircuit:
    iteration_index: int
    n_qubits: int
    n_cbits: int
    events: tuple[Event, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))
        if self.iteration_index < 0:
            raise ValueError("iteration index must be nonnegative")
        if self.n_qubits < 1 or self.n_cbits < 0:
            raise ValueError("need n_qubits >= 1 and n_cbits >= 0")
        for ev in self.events:
            qubits = ev.qubits if isinstance(ev, GateEvent) else (ev.qubit,)
            if any(not 0 <= q < self.n_qubits for q in qubits):
                raise ValueError(f"qubit index out of range in {ev}")
            if isinstance(ev, GateEvent) and len(set(ev.qubits)) != len(ev.qubits):
                raise ValueError(f"repeated qubit operand in {ev}")
            if isinstance(ev, MeasureEvent) and not 0 <= ev.cbit < self.n_cbits:
                raise ValueError(f"cbit index out of range in {ev}")

    @property
    def gates(self) -> list[GateEvent]:
        return [e for e in self.events if isinstance(e, GateEvent)]

    def without_nonunitary(self) -> FlatCircuit:
        """Drop resets and measurements, keeping the gate sequence."""
        return FlatCircuit(self.iteration_index, self.n_qubits, self.n_cbits, tuple(self.gates))
