from __future__ import annotations

import json

import pytest

from conftest import CORPUS_NAMES, corpus_text
from eirkit import __version__
from eirkit.circuit import FlatCircuit, GateEvent, MeasureEvent, ResetEvent
from eirkit.emit import (
    EmitConfig,
    UnsupportedGateError,
    check_qasm2,
    compute_stats,
    emit_jsonl,
    emit_qasm2,
    qasm_filename,
)
from eirkit.expander import expand_iteration, expand_stream, plan
from eirkit.syntax import parse_module

GHZ = FlatCircuit(
    5,
    2,
    2,
    (
        ResetEvent(0),
        ResetEvent(1),
        GateEvent("h", (), (0,)),
        GateEvent("h", (), (1,)),
        GateEvent("cx", (), (0, 1)),
        MeasureEvent(0, 0),
        MeasureEvent(1, 1),
    ),
)
EMPTY = FlatCircuit(0, 1, 0, ())

GHZ_QASM = """\
OPENQASM 2.0;
include "qelib1.inc";
qreg q[2];
creg c[2];
reset q[0];
reset q[1];
h q[0];
h q[1];
cx q[0],q[1];
measure q[0] -> c[0];
measure q[1] -> c[1];
"""


class TestQasm:
    def test_ghz(self):
        assert emit_qasm2(GHZ) == GHZ_QASM

    def test_empty(self):
        assert emit_qasm2(EMPTY) == 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\n'

    def test_rzz(self):
        c = FlatCircuit(0, 2, 0, (GateEvent("rzz", (0.5,), (0, 1)),))
        assert emit_qasm2(c).endswith("rzz(0.5) q[0],q[1];\n")

    @pytest.mark.parametrize("angle", [0.1, 1 / 3, 2.220446049250313e-16, -1.5707963267948966, 1e22])
    def test_angles_round_trip(self, angle):
        c = FlatCircuit(0, 1, 0, (GateEvent("rx", (angle,), (0,)),))
        line = emit_qasm2(c).splitlines()[-1]
        assert float(line[line.index("(") + 1 : line.index(")")]) == angle

    def test_header(self):
        text = emit_qasm2(GHZ, EmitConfig(include_header=True, seed=7))
        first, rest = text.split("\n", 1)
        assert first == f"// eirkit seed=7 iteration=5 version={__version__}"
        assert rest == GHZ_QASM

    @pytest.mark.parametrize(
        "event",
        [GateEvent("u3", (0.1, 0.2, 0.3), (0,)), GateEvent("rx", (), (0,)), GateEvent("h", (0.5,), (0,))],
    )
    def test_unsupported(self, event):
        with pytest.raises(UnsupportedGateError) as err:
            emit_qasm2(FlatCircuit(0, 2, 0, (event,)))
        assert event.name in str(err.value)

    def test_emitted_text_passes_checker(self):
        check_qasm2(emit_qasm2(GHZ))
        check_qasm2(emit_qasm2(EMPTY, EmitConfig(include_header=True)))

    @pytest.mark.parametrize(
        "broken",
        [
            GHZ_QASM.replace("OPENQASM 2.0;", "OPENQASM 3;"),
            GHZ_QASM.replace("cx q[0],q[1];", "cx q[0],q[0];"),
            GHZ_QASM.replace("h q[1];", "h q[2];"),
            GHZ_QASM.replace("measure q[1] -> c[1];", "measure q[1] -> c[2];"),
            GHZ_QASM.replace("h q[0];", "rx q[0];"),
            GHZ_QASM.replace("h q[0];", "h q[0]"),
        ],
    )
    def test_checker_rejects(self, broken):
        with pytest.raises(ValueError):
            check_qasm2(broken)

    @pytest.mark.parametrize("name", CORPUS_NAMES)
    def test_corpus_emission_is_well_formed(self, name):
        for c in expand_stream(plan(parse_module(corpus_text(name)), 3)):
            check_qasm2(emit_qasm2(c, EmitConfig(include_header=True, seed=3)))

    def test_filename(self):
        assert qasm_filename(57) == "circuit_000057.qasm"


class TestJsonl:
    def test_ghz(self):
        line = emit_jsonl(GHZ)
        assert line.endswith("\n") and line.count("\n") == 1
        record = json.loads(line)
        assert list(record) == ["iteration", "n_qubits", "n_cbits", "events"]
        assert len(record["events"]) == 7
        assert record["events"][4] == {"kind": "gate", "name": "cx", "params": [], "qubits": [0, 1], "cbit": None}
        assert record["events"][6] == {"kind": "measure", "name": None, "params": [], "qubits": [1], "cbit": 1}
        assert all(list(e) == ["kind", "name", "params", "qubits", "cbit"] for e in record["events"])

    def test_empty(self):
        assert '"events":[]' in emit_jsonl(EMPTY)

    def test_deterministic(self):
        assert emit_jsonl(GHZ) == emit_jsonl(GHZ)

    def test_floats_round_trip(self):
        c = FlatCircuit(0, 1, 0, (GateEvent("rx", (1 / 3,), (0,)),))
        assert json.loads(emit_jsonl(c))["events"][0]["params"] == [1 / 3]

    def test_header_fields_last(self):
        record = json.loads(emit_jsonl(GHZ, EmitConfig("jsonl", include_header=True, seed=9)))
        assert list(record)[-2:] == ["seed", "version"]
        assert record["seed"] == 9


class TestStats:
    def test_ghz(self):
        text = corpus_text("ghz")
        stats = compute_stats(text, plan(parse_module(text)))
        assert stats.n_circuits == 100
        assert stats.ir_bytes == len(text.encode())
        assert stats.enumerated_bytes_total == 100 * len(GHZ_QASM)
        assert (stats.min_events, stats.max_events, stats.mean_events) == (7, 7, 7.0)
        assert stats.compression_ratio == pytest.approx(stats.enumerated_bytes_total / stats.ir_bytes)

    def test_single_iteration(self):
        text = corpus_text("ghz_rc")
        p = plan(parse_module(text), 4, [13])
        stats = compute_stats(text, p)
        assert stats.enumerated_bytes_total == len(emit_qasm2(expand_iteration(p, 13)).encode())

    def test_ir_bytes_use_canonical_form(self):
        text = corpus_text("ghz")
        noisy = "// comment\n" + text.replace("  ", "    ")
        assert compute_stats(noisy, plan(parse_module(noisy))).ir_bytes == len(text.encode())

    def test_json_schema(self):
        text = corpus_text("rx_sweep")
        record = json.loads(compute_stats(text, plan(parse_module(text))).to_json())
        assert record["schema"] == 1
        assert set(record) == {
            "schema", "ir_bytes", "enumerated_bytes_total", "n_circuits",
            "mean_events", "min_events", "max_events", "compression_ratio",
        }
