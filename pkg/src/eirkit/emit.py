"""Serialization of flat circuits and ensemble size statistics."""

from __future__ import annotations

import json
import re
from collections.abc import Iterable
from dataclasses import asdict, dataclass

from . import __version__
from .circuit import FlatCircuit, MeasureEvent, ResetEvent
from .expander import ExpansionPlan, expand_stream
from .syntax import parse_module, print_module

__all__ = [
    "QASM2_GATES",
    "EmitConfig",
    "EnsembleStats",
    "UnsupportedGateError",
    "emit_qasm2",
    "emit_jsonl",
    "compute_stats",
    "check_qasm2",
    "qasm_filename",
]

# name -> number of angle parameters
QASM2_GATES = {
    "id": 0, "x": 0, "y": 0, "z": 0, "h": 0, "s": 0, "sdg": 0, "t": 0, "tdg": 0,
    "rx": 1, "ry": 1, "rz": 1,
    "cx": 0, "cz": 0, "rzz": 1,
}
_TWO_QUBIT = {"cx", "cz", "rzz"}


class UnsupportedGateError(ValueError):
    def __init__(self, name: str):
        super().__init__(f"unsupported-gate: {name!r} is not in the qasm2 vocabulary")
        self.gate = name


@dataclass(frozen=True)
class EmitConfig:
    format: str = "qasm2"
    include_header: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.format not in ("qasm2", "jsonl"):
            raise ValueError(f"unknown format {self.format!r}")


@dataclass(frozen=True)
class EnsembleStats:
    ir_bytes: int
    enumerated_bytes_total: int
    n_circuits: int
    mean_events: float
    min_events: int
    max_events: int
    compression_ratio: float

    def to_json(self) -> str:
        return json.dumps({"schema": 1, **asdict(self)})


def qasm_filename(iteration: int) -> str:
    return f"circuit_{iteration:06d}.qasm"


def _header_comment(circuit: FlatCircuit, config: EmitConfig) -> str:
    return f"// eirkit seed={config.seed} iteration={circuit.iteration_index} version={__version__}\n"


def emit_qasm2(circuit: FlatCircuit, config: EmitConfig = EmitConfig()) -> str:
    lines = []
    if config.include_header:
        lines.append(_header_comment(circuit, config))
    lines.append('OPENQASM 2.0;\ninclude "qelib1.inc";\n')
    lines.append(f"qreg q[{circuit.n_qubits}];\n")
    if circuit.n_cbits:
        lines.append(f"creg c[{circuit.n_cbits}];\n")
    for ev in circuit.events:
        if isinstance(ev, ResetEvent):
            lines.append(f"reset q[{ev.qubit}];\n")
        elif isinstance(ev, MeasureEvent):
            lines.append(f"measure q[{ev.qubit}] -> c[{ev.cbit}];\n")
        else:
            n_params = QASM2_GATES.get(ev.name)
            arity = 2 if ev.name in _TWO_QUBIT else 1
            if n_params is None or n_params != len(ev.params) or arity != len(ev.qubits):
                raise UnsupportedGateError(ev.name)
            text = ev.name
            if ev.params:
                text += "(" + ",".join(repr(float(p)) for p in ev.params) + ")"
            lines.append(text + " " + ",".join(f"q[{q}]" for q in ev.qubits) + ";\n")
    return "".join(lines)


def _event_record(ev) -> dict:
    if isinstance(ev, ResetEvent):
        return {"kind": "reset", "name": None, "params": [], "qubits": [ev.qubit], "cbit": None}
    if isinstance(ev, MeasureEvent):
        return {"kind": "measure", "name": None, "params": [], "qubits": [ev.qubit], "cbit": ev.cbit}
    return {"kind": "gate", "name": ev.name, "params": [float(p) for p in ev.params],
            "qubits": list(ev.qubits), "cbit": None}


def emit_jsonl(circuit: FlatCircuit, config: EmitConfig = EmitConfig(format="jsonl")) -> str:
    """One JSON object and a trailing newline. Header fields, if any, come last."""
    record: dict = {
        "iteration": circuit.iteration_index,
        "n_qubits": circuit.n_qubits,
        "n_cbits": circuit.n_cbits,
        "events": [_event_record(ev) for ev in circuit.events],
    }
    if config.include_header:
        record["seed"] = config.seed
        record["version"] = __version__
    return json.dumps(record, separators=(",", ":")) + "\n"


def compute_stats(program_text: str, plan: ExpansionPlan, circuits: Iterable[FlatCircuit] | None = None) -> EnsembleStats:
    """Canonical IR size against the total size of the enumerated QASM circuits."""
    ir_bytes = len(print_module(parse_module(program_text)).encode("utf-8"))
    total = n = events = 0
    lo = hi = None
    for circuit in circuits if circuits is not None else expand_stream(plan):
        size = len(circuit.events)
        total += len(emit_qasm2(circuit).encode("utf-8"))
        n += 1
        lo = size if lo is None else min(lo, size)
        hi = size if hi is None else max(hi, size)
        events += size
    return EnsembleStats(
        ir_bytes=ir_bytes,
        enumerated_bytes_total=total,
        n_circuits=n,
        mean_events=events / n if n else 0.0,
        min_events=lo or 0,
        max_events=hi or 0,
        compression_ratio=total / ir_bytes if ir_bytes else 0.0,
    )


_NUM = r"-?(?:\d+\.?\d*(?:[eE][+-]?\d+)?|inf|nan)"
_QASM_LINE = re.compile(
    r"(?P<reset>reset q\[(\d+)\];)"
    r"|(?P<measure>measure q\[(\d+)\] -> c\[(\d+)\];)"
    r"|(?P<gate>(?P<name>[a-z]+)(?:\((?P<params>" + _NUM + r"(?:," + _NUM + r")*)\))? "
    r"(?P<qubits>q\[\d+\](?:,q\[\d+\])*);)\Z"
)


def check_qasm2(text: str) -> None:
    """Validate ``text`` against the regular grammar of the emitted subset.

    Raises ValueError naming the first offending line.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    i = 0
    while i < len(lines) and lines[i].startswith("//"):
        i += 1

    def bad(msg: str) -> ValueError:
        return ValueError(f"line {i + 1}: {msg}: {lines[i] if i < len(lines) else '<eof>'!r}")

    for expected in ("OPENQASM 2.0;", 'include "qelib1.inc";'):
        if i >= len(lines) or lines[i] != expected:
            raise bad(f"expected {expected!r}")
        i += 1
    m = re.fullmatch(r"qreg q\[(\d+)\];", lines[i]) if i < len(lines) else None
    if not m or int(m.group(1)) < 1:
        raise bad("expected qreg declaration")
    n_qubits, n_cbits = int(m.group(1)), 0
    i += 1
    if i < len(lines):
        m = re.fullmatch(r"creg c\[(\d+)\];", lines[i])
        if m:
            n_cbits = int(m.group(1))
            i += 1
    while i < len(lines):
        m = _QASM_LINE.fullmatch(lines[i])
        if not m:
            raise bad("malformed statement")
        if m.group("reset"):
            qubits = [int(m.group(2))]
        elif m.group("measure"):
            qubits = [int(m.group(4))]
            if int(m.group(5)) >= n_cbits:
                raise bad("cbit out of range")
        else:
            name = m.group("name")
            params = m.group("params").split(",") if m.group("params") else []
            if QASM2_GATES.get(name) != len(params):
                raise bad(f"gate {name!r} unknown or with wrong parameter count")
            qubits = [int(q) for q in re.findall(r"\d+", m.group("qubits"))]
            if len(qubits) != (2 if name in _TWO_QUBIT else 1) or len(set(qubits)) != len(qubits):
                raise bad("wrong qubit operands")
        if any(q >= n_qubits for q in qubits):
            raise bad("qubit out of range")
        i += 1
