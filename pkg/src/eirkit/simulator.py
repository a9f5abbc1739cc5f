"""Dense statevector simulation of flat circuits, for checking expansions.

Qubit 0 is the least significant bit of a basis index. Outcome bitstrings
are written with cbit 0 rightmost, matching that ordering.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .circuit import FlatCircuit, GateEvent, MeasureEvent
from .rng import RngStream

__all__ = [
    "MAX_QUBITS",
    "MAX_EQUIV_QUBITS",
    "SimulationError",
    "StateVector",
    "gate_matrix",
    "run_analytic",
    "run_sampled",
    "final_state",
    "equivalent_up_to_global_phase",
    "total_variation",
]

MAX_QUBITS = 14
MAX_EQUIV_QUBITS = 10
NORM_TOL = 1e-10

_S2 = 1 / math.sqrt(2)
_FIXED = {
    "id": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "s": np.diag([1, 1j]).astype(complex),
    "sdg": np.diag([1, -1j]).astype(complex),
    "t": np.diag([1, cmath.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, cmath.exp(-1j * math.pi / 4)]),
    # Two-qubit matrices are indexed |first, second> with the first operand
    # as the high bit: CX's control is the first operand.
    "cx": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
}


class SimulationError(ValueError):
    pass


def _rx(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(t: float) -> np.ndarray:
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(t: float) -> np.ndarray:
    return np.diag([cmath.exp(-0.5j * t), cmath.exp(0.5j * t)])


def _rzz(t: float) -> np.ndarray:
    a, b = cmath.exp(-0.5j * t), cmath.exp(0.5j * t)
    return np.diag([a, b, b, a])


_PARAMETRIC = {"rx": _rx, "ry": _ry, "rz": _rz, "rzz": _rzz}


def gate_matrix(name: str, params=()) -> np.ndarray:
    if name in _FIXED and not params:
        return _FIXED[name]
    if name in _PARAMETRIC and len(params) == 1:
        return _PARAMETRIC[name](float(params[0]))
    raise SimulationError(f"unsupported gate {name!r} with {len(params)} parameter(s)")


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    @classmethod
    def zero(cls, n_qubits: int) -> StateVector:
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise SimulationError(f"{n_qubits} qubits outside the supported 1..{MAX_QUBITS}")
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> StateVector:
        state = cls.zero(n_qubits)
        state.amplitudes[0] = 0.0
        state.amplitudes[index] = 1.0
        return state

    def copy(self) -> StateVector:
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def _tensor(self) -> np.ndarray:
        # Axis k of the reshaped array is qubit n-1-k.
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def apply(self, matrix: np.ndarray, qubits: tuple[int, ...]) -> None:
        n, k = self.n_qubits, len(qubits)
        axes = [n - 1 - q for q in qubits]
        psi = np.moveaxis(self._tensor(), axes, range(k))
        psi = (matrix @ psi.reshape(2**k, -1)).reshape((2,) * n)
        self.amplitudes = np.moveaxis(psi, range(k), axes).reshape(-1)

    def prob_one(self, qubit: int) -> float:
        psi = np.moveaxis(self._tensor(), self.n_qubits - 1 - qubit, 0)
        return float(np.sum(np.abs(psi[1]) ** 2))

    def project(self, qubit: int, outcome: int) -> None:
        psi = np.moveaxis(self._tensor(), self.n_qubits - 1 - qubit, 0).copy()
        psi[1 - outcome] = 0.0
        norm = math.sqrt(float(np.sum(np.abs(psi) ** 2)))
        if norm == 0.0:
            raise SimulationError(f"projection of qubit {qubit} onto |{outcome}> has zero probability")
        psi /= norm
        self.amplitudes = np.moveaxis(psi, 0, self.n_qubits - 1 - qubit).reshape(-1)

    def flip(self, qubit: int) -> None:
        self.apply(_FIXED["x"], (qubit,))


def _apply_gate(state: StateVector, ev: GateEvent) -> None:
    state.apply(gate_matrix(ev.name, ev.params), ev.qubits)


def _check_size(circuit: FlatCircuit, limit: int = MAX_QUBITS) -> None:
    if circuit.n_qubits > limit:
        raise SimulationError(f"circuit has {circuit.n_qubits} qubits; the limit is {limit}")


def _split_terminal(circuit: FlatCircuit) -> tuple[list, list[MeasureEvent]]:
    """Separate the unitary body from terminal measurements, or raise if a
    measurement is followed by more activity on its qubit."""
    body, measures = [], []
    measured: set[int] = set()
    for ev in circuit.events:
        if isinstance(ev, MeasureEvent):
            measures.append(ev)
            measured.add(ev.qubit)
            continue
        touched = ev.qubits if isinstance(ev, GateEvent) else (ev.qubit,)
        if measured.intersection(touched):
            raise SimulationError("mid-circuit measurement; use run_sampled")
        body.append(ev)
    return body, measures


def _evolve(state: StateVector, events) -> StateVector:
    for ev in events:
        if isinstance(ev, GateEvent):
            _apply_gate(state, ev)
        else:
            # Analytic mode only supports resets of qubits already in |0>.
            if state.prob_one(ev.qubit) > NORM_TOL:
                raise SimulationError("reset of a qubit not in |0>; use run_sampled")
            state.project(ev.qubit, 0)
    return state


def final_state(circuit: FlatCircuit) -> StateVector:
    """Statevector after all events; measurements are not allowed."""
    _check_size(circuit)
    if any(isinstance(ev, MeasureEvent) for ev in circuit.events):
        raise SimulationError("statevector output requested for a circuit with measurements")
    return _evolve(StateVector.zero(circuit.n_qubits), circuit.events)


def _bitstring(bits: list[int]) -> str:
    return "".join(str(b) for b in reversed(bits))


def run_analytic(circuit: FlatCircuit, statevector: bool = False) -> dict[str, float] | StateVector:
    """Exact outcome distribution over the classical register (or the final
    state when ``statevector`` is set)."""
    if statevector:
        return final_state(circuit)
    _check_size(circuit)
    body, measures = _split_terminal(circuit)
    state = _evolve(StateVector.zero(circuit.n_qubits), body)
    probs = np.abs(state.amplitudes) ** 2
    dist: dict[str, float] = {}
    for index in np.flatnonzero(probs > 0):
        bits = [0] * circuit.n_cbits
        for m in measures:
            bits[m.cbit] = (int(index) >> m.qubit) & 1
        key = _bitstring(bits)
        dist[key] = dist.get(key, 0.0) + float(probs[index])
    return dict(sorted(dist.items()))


def _measure(state: StateVector, qubit: int, stream: RngStream) -> int:
    p1 = state.prob_one(qubit)
    if p1 <= 0.0:
        outcome = 0
    elif p1 >= 1.0:
        outcome = 1
    else:
        outcome = 1 if stream.next_float() < p1 else 0
    state.project(qubit, outcome)
    return outcome


def run_sampled(circuit: FlatCircuit, shots: int, stream: RngStream) -> dict[str, int]:
    """Shot-by-shot simulation; measurements and resets collapse per the Born rule.

    A projective step whose outcome is certain draws no random number, so
    the deterministic prefix of the circuit is simulated once and reused.
    """
    _check_size(circuit)
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    events = list(circuit.events)
    prefix = StateVector.zero(circuit.n_qubits)
    start = 0
    for ev in events:
        if isinstance(ev, GateEvent):
            _apply_gate(prefix, ev)
        else:
            p1 = prefix.prob_one(ev.qubit)
            if 0.0 < p1 < 1.0 or isinstance(ev, MeasureEvent):
                break
            if p1 >= 1.0:
                prefix.flip(ev.qubit)
        start += 1
    rest = events[start:]
    counts: Counter[str] = Counter()
    for _ in range(shots):
        state = prefix.copy()
        bits = [0] * circuit.n_cbits
        for ev in rest:
            if isinstance(ev, GateEvent):
                _apply_gate(state, ev)
            elif isinstance(ev, MeasureEvent):
                bits[ev.cbit] = _measure(state, ev.qubit, stream)
            else:
                if _measure(state, ev.qubit, stream):
                    state.flip(ev.qubit)
        counts[_bitstring(bits)] += 1
    return dict(sorted(counts.items()))


def equivalent_up_to_global_phase(a: FlatCircuit, b: FlatCircuit, tol: float = 1e-10) -> bool:
    """Whether the gate sequences of ``a`` and ``b`` implement the same unitary
    up to one global phase, checked column by column on basis inputs."""
    if a.n_qubits != b.n_qubits:
        raise SimulationError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    _check_size(a, MAX_EQUIV_QUBITS)
    for c in (a, b):
        if any(not isinstance(ev, GateEvent) for ev in c.events):
            raise SimulationError("strip measurements and resets before comparing circuits")
    phase = None
    for x in range(2**a.n_qubits):
        psi_a = _evolve(StateVector.basis(a.n_qubits, x), a.events).amplitudes
        psi_b = _evolve(StateVector.basis(b.n_qubits, x), b.events).amplitudes
        overlap = complex(np.vdot(psi_a, psi_b))
        if abs(overlap) ** 2 < 1 - tol:
            return False
        # Each column may only differ by the same phase.
        if phase is None:
            phase = overlap
        elif abs(overlap - phase) ** 2 > 4 * tol:
            return False
    return True


def total_variation(p: dict[str, float], q: dict[str, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
