from __future__ import annotations

import math
import random

import numpy as np
import pytest

from eirkit.circuit import FlatCircuit, GateEvent, MeasureEvent, ResetEvent
from eirkit.rng import RngStream
from eirkit.simulator import (
    MAX_QUBITS,
    SimulationError,
    StateVector,
    equivalent_up_to_global_phase,
    final_state,
    gate_matrix,
    run_analytic,
    run_sampled,
    total_variation,
)


def circuit(n_qubits: int, *events, n_cbits: int = 0) -> FlatCircuit:
    return FlatCircuit(0, n_qubits, n_cbits, tuple(events))


def g(name, *qubits, params=()):
    return GateEvent(name, tuple(params), tuple(qubits))


TEXTBOOK_GHZ = circuit(2, g("h", 0), g("cx", 0, 1), MeasureEvent(0, 0), MeasureEvent(1, 1), n_cbits=2)
# Distribution of reset; H on both; CX, from an independent dense-matrix script.
DOUBLE_H_GHZ_GOLDEN = {"00": 0.25, "01": 0.25, "10": 0.25, "11": 0.25}


def dense_unitary(c: FlatCircuit) -> np.ndarray:
    """Independent reference: full 2^n matrix built entry by entry."""
    dim = 2**c.n_qubits
    total = np.eye(dim, dtype=complex)
    for ev in c.events:
        m = gate_matrix(ev.name, ev.params)
        u = np.zeros((dim, dim), dtype=complex)
        qs = ev.qubits
        for x in range(dim):
            sub = 0
            for q in qs:
                sub = (sub << 1) | ((x >> q) & 1)
            for out in range(2 ** len(qs)):
                y = x
                for k, q in enumerate(qs):
                    bit = (out >> (len(qs) - 1 - k)) & 1
                    y = (y & ~(1 << q)) | (bit << q)
                u[y, x] += m[out, sub]
        total = u @ total
    return total


def test_hadamard_amplitudes():
    state = final_state(circuit(1, g("h", 0)))
    s = 1 / math.sqrt(2)
    assert np.allclose(state.amplitudes, [s, s], atol=1e-12, rtol=0)


def test_textbook_ghz_distribution():
    dist = run_analytic(TEXTBOOK_GHZ)
    assert set(dist) == {"00", "11"}
    assert abs(dist["00"] - 0.5) <= 1e-10 and abs(dist["11"] - 0.5) <= 1e-10


def test_double_hadamard_ghz_golden():
    c = circuit(2, ResetEvent(0), ResetEvent(1), g("h", 0), g("h", 1), g("cx", 0, 1),
                MeasureEvent(0, 0), MeasureEvent(1, 1), n_cbits=2)
    dist = run_analytic(c)
    assert dist.keys() == DOUBLE_H_GHZ_GOLDEN.keys()
    assert all(abs(dist[k] - v) <= 1e-12 for k, v in DOUBLE_H_GHZ_GOLDEN.items())


def test_cbit_zero_is_rightmost():
    dist = run_analytic(circuit(2, g("x", 0), MeasureEvent(0, 0), MeasureEvent(1, 1), n_cbits=2))
    assert dist == {"01": 1.0}


def test_cx_control_is_first_operand():
    dist = run_analytic(circuit(2, g("x", 1), g("cx", 1, 0), MeasureEvent(0, 0), MeasureEvent(1, 1), n_cbits=2))
    assert dist == {"11": 1.0}


@pytest.mark.parametrize("seed", range(8))
def test_matches_dense_reference(seed):
    rng = random.Random(seed)
    n = 3
    events = []
    for _ in range(12):
        name = rng.choice(["h", "x", "y", "z", "s", "t", "rx", "ry", "rz", "cx", "cz", "rzz"])
        if name in ("cx", "cz", "rzz"):
            qs = rng.sample(range(n), 2)
        else:
            qs = [rng.randrange(n)]
        params = (rng.uniform(-3, 3),) if name.startswith("r") else ()
        events.append(g(name, *qs, params=params))
    c = circuit(n, *events)
    expected = dense_unitary(c)[:, 0]
    assert np.allclose(final_state(c).amplitudes, expected, atol=1e-12)


def test_norm_preserved():
    rng = random.Random(1)
    events = [g("rx", rng.randrange(4), params=(rng.uniform(0, 6),)) for _ in range(20)]
    events += [g("cx", 0, 3), g("rzz", 2, 1, params=(0.3,))]
    assert abs(final_state(circuit(4, *events)).norm() - 1.0) <= 1e-12


def test_sampled_matches_analytic():
    shots = 40000
    counts = run_sampled(TEXTBOOK_GHZ, shots, RngStream(2024))
    assert abs(counts.get("00", 0) / shots - 0.5) <= 0.01
    empirical = {k: v / shots for k, v in counts.items()}
    assert total_variation(empirical, run_analytic(TEXTBOOK_GHZ)) <= 0.02


def test_sampled_is_deterministic():
    a = run_sampled(TEXTBOOK_GHZ, 500, RngStream(5))
    b = run_sampled(TEXTBOOK_GHZ, 500, RngStream(5))
    assert a == b


def test_resets_only():
    c = circuit(2, ResetEvent(0), ResetEvent(1), MeasureEvent(0, 0), MeasureEvent(1, 1), n_cbits=2)
    assert run_sampled(c, 100, RngStream(0)) == {"00": 100}


def test_reset_collapses_superposition():
    c = circuit(1, g("h", 0), ResetEvent(0), MeasureEvent(0, 0), n_cbits=1)
    assert run_sampled(c, 200, RngStream(3)) == {"0": 200}


def test_mid_circuit_measurement_collapses():
    c = circuit(1, g("h", 0), MeasureEvent(0, 0), g("h", 0), MeasureEvent(0, 1), n_cbits=2)
    shots = 20000
    counts = run_sampled(c, shots, RngStream(8))
    assert set(counts) == {"00", "01", "10", "11"}
    assert all(abs(v / shots - 0.25) <= 0.02 for v in counts.values())
    with pytest.raises(SimulationError):
        run_analytic(c)


def test_analytic_refuses_reset_of_excited_qubit():
    with pytest.raises(SimulationError):
        run_analytic(circuit(1, g("x", 0), ResetEvent(0), MeasureEvent(0, 0), n_cbits=1))


def test_statevector_refuses_measurements():
    with pytest.raises(SimulationError):
        final_state(TEXTBOOK_GHZ)


def test_unsupported_gate():
    with pytest.raises(SimulationError):
        final_state(circuit(1, g("u3", 0, params=(0.1, 0.2, 0.3))))


def test_qubit_limit():
    with pytest.raises(SimulationError):
        StateVector.zero(MAX_QUBITS + 1)


class TestEquivalence:
    def test_reflexive(self):
        c = circuit(2, g("h", 0), g("cx", 0, 1), g("rz", 1, params=(0.3,)))
        assert equivalent_up_to_global_phase(c, c)

    def test_zxz_equals_x(self):
        assert equivalent_up_to_global_phase(circuit(1, g("x", 0)), circuit(1, g("z", 0), g("x", 0), g("z", 0)))

    def test_y_is_ixz_up_to_phase(self):
        assert equivalent_up_to_global_phase(circuit(1, g("y", 0)), circuit(1, g("z", 0), g("x", 0)))

    def test_different_unitaries(self):
        assert not equivalent_up_to_global_phase(circuit(1, g("x", 0)), circuit(1, g("z", 0)))

    def test_relative_phase_between_columns_is_detected(self):
        # Z and I agree on every basis input up to a per-input phase only.
        assert not equivalent_up_to_global_phase(circuit(1, g("z", 0)), circuit(1, g("id", 0)))

    def test_rz_vs_phase_gate(self):
        # RZ(pi/2) = e^{-i pi/4} S: equal up to one global phase.
        assert equivalent_up_to_global_phase(circuit(1, g("rz", 0, params=(math.pi / 2,))), circuit(1, g("s", 0)))

    def test_qubit_count_mismatch(self):
        with pytest.raises(SimulationError):
            equivalent_up_to_global_phase(circuit(1), circuit(2))

    def test_requires_unitary_circuits(self):
        with pytest.raises(SimulationError):
            equivalent_up_to_global_phase(TEXTBOOK_GHZ, TEXTBOOK_GHZ)


def test_total_variation():
    assert total_variation({"0": 1.0}, {"1": 1.0}) == 1.0
    assert total_variation({"0": 0.5, "1": 0.5}, {"0": 0.5, "1": 0.5}) == 0.0
