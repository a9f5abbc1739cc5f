from __future__ import annotations

import json
import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import CORPUS_NAMES, DATA, corpus_text
from eirkit.syntax import SourceError, parse_module
from eirkit.verifier import RULES, Diagnostic, errors_only, verify
from eirkit.workloads import ghz

BASE = """\
%cbits = eir.alloc_cbits : tensor<1x!eir.cbit>
%qubits = eir.program_alloc : tensor<1x!eir.physical_qubit>
%x = eir.gate {name = "x", arity = 1} : !eir.gate<1, 0>
%c0 = arith.constant {value = 0} : index
%c1 = arith.constant {value = 1} : index
%n = arith.constant {value = 4} : index
scf.for %i = %c0 to %n step %c1 {
  eir.quantum_program_iteration {
    %q = eir.extract(%qubits, %c0) : !eir.physical_qubit
    %b = eir.extract(%cbits, %c0) : !eir.cbit
    eir.apply(%x, %q)
    eir.measure(%q, %b)
    eir.transmit_results
  }
}
"""


def mutate(*pairs: tuple[str, str]) -> str:
    text = BASE
    for old, new in pairs:
        assert old in text, old
        text = text.replace(old, new, 1)
    return text


# One failing fixture per rule; each must trigger that rule and no other error.
FIXTURES = {
    "V1": [
        mutate(("    %q = eir.extract(%qubits, %c0) : !eir.physical_qubit\n", ""),
               ("    eir.measure(%q, %b)\n", "    eir.measure(%q, %b)\n    %q = eir.extract(%qubits, %c0) : !eir.physical_qubit\n")),
        mutate(("  }\n}\n", "  }\n}\n%after = arith.remsi(%i, %c1) : index\n%again = arith.remsi(%after, %c1) : index\n")),
    ],
    "V2": [
        mutate(("!eir.gate<1, 0>", "!eir.gate<1, 1>")),
        mutate(("    eir.apply(%x, %q)\n", "    eir.apply(%x, %q)\n    scf.if %q {\n    }\n")),
    ],
    "V3": [
        mutate(("eir.extract(%qubits, %c0)", "eir.extract(%qubits, %c1)")),
        mutate(("eir.extract(%cbits, %c0)", "eir.extract(%cbits, %c0, %c0)")),
    ],
    "V4": [
        mutate(("eir.apply(%x, %q)", "eir.apply(%x, %q, %q)")),
        mutate(('%x = eir.gate {name = "x", arity = 1} : !eir.gate<1, 0>',
                '%x = eir.gate {name = "x", arity = 1} : !eir.gate<1, 0>\n'
                '%cx = eir.gate {name = "cx", arity = 2} : !eir.gate<2, 0>'),
               ("eir.apply(%x, %q)", "eir.apply(%cx, %q, %q)")),
    ],
    "V5": [
        mutate(('%x = eir.gate {name = "x", arity = 1} : !eir.gate<1, 0>',
                '%x = eir.gate {name = "x", arity = 1} : !eir.gate<1, 0>\n'
                '%cx = eir.gate {name = "cx", arity = 2} : !eir.gate<2, 0>\n'
                '%mixed = eir.gate_distribution(%x, %cx) : !eir.gate_distribution<1>'),
               ("    eir.apply(%x, %q)\n",
                "    %r = eir.int_uniform {low = 0, high = 1} : tensor<1xi32>\n"
                "    %s = eir.extract(%r, %c0) : i32\n"
                "    eir.apply_distribution(%mixed, %s, %q)\n")),
    ],
    "V6": [
        mutate(("    eir.transmit_results\n", "")),
        mutate(("    eir.apply(%x, %q)\n", "    eir.transmit_results\n    eir.apply(%x, %q)\n"), ("    eir.transmit_results\n  }", "  }")),
    ],
    "V7": [
        mutate(("eir.measure(%q, %b)", "eir.measure(%q, %q)")),
        mutate(("eir.measure(%q, %b)", "eir.measure(%b, %b)")),
    ],
    "V8": [
        mutate(("    eir.apply(%x, %q)\n",
                "    eir.apply(%x, %q)\n"
                "    %r = eir.int_uniform {low = 1, high = 2} : tensor<1xi32>\n"
                "    %s = eir.extract(%r, %c0) : i32\n"
                "    %m = arith.remsi(%i, %s) : index\n"
                "    %t = arith.remsi(%m, %c1) : index\n"
                "    scf.if %t {\n    }\n")),
    ],
    "V9": [
        mutate(("    eir.apply(%x, %q)\n",
                "    %r = eir.int_uniform {low = 3, high = 1} : tensor<1xi32>\n"
                "    %s = eir.extract(%r, %c0) : i32\n"
                "    scf.if %s {\n      eir.apply(%x, %q)\n    }\n")),
        mutate(("    eir.apply(%x, %q)\n",
                "    %f = eir.float_uniform {low = 1.0, high = 0.5} : tensor<1xf64>\n"
                "    %theta = eir.extract(%f, %c0) : f64\n"
                "    %rx = eir.gate(%theta) {name = \"rx\", arity = 1} : !eir.gate<1, 1>\n"
                "    eir.apply(%rx, %q)\n    eir.apply(%x, %q)\n")),
    ],
    "V10": [
        mutate(("%c0 = arith.constant {value = 0} : index", "%c0 = arith.constant {value = 0} : index\n%m1 = arith.constant {value = -1} : index"),
               ("scf.for %i = %c0 to", "scf.for %i = %m1 to")),
        mutate(("scf.for %i", "%q0 = eir.extract(%qubits, %c0) : !eir.physical_qubit\neir.apply(%x, %q0)\nscf.for %i")),
    ],
}


def test_base_fixture_is_clean():
    assert verify(parse_module(BASE)) == []


@pytest.mark.parametrize(
    "rule,index",
    [(rule, k) for rule, variants in FIXTURES.items() for k in range(len(variants))],
)
def test_rule_fixture_triggers_only_that_rule(rule, index):
    source = FIXTURES[rule][index]
    diags = verify(parse_module(source))
    assert {d.rule for d in errors_only(diags)} == {rule}, [d.render() for d in diags]


def test_catalog_is_covered():
    assert {f"V{k}" for k in range(1, 11)} <= set(FIXTURES)
    assert {f"V{k}" for k in range(1, 11)} <= set(RULES)


def test_corpus_is_clean(corpus_name):
    assert verify(parse_module(corpus_text(corpus_name))) == []


def test_ghz_builder_output_is_clean():
    assert verify(parse_module(ghz(2, 100))) == []


class TestWorkedCases:
    def test_mixed_arity_distribution(self):
        source = corpus_text("ghz_rc").replace(
            "eir.gate_distribution(%id, %x, %y, %z)", "eir.gate_distribution(%x, %cx)", 1
        )
        assert [d.rule for d in errors_only(verify(parse_module(source)))] == ["V5"]

    def test_cloned_cx_operand(self):
        source = corpus_text("ghz").replace("eir.apply(%cx, %q0, %q1)", "eir.apply(%cx, %q0, %q0)")
        assert [d.rule for d in verify(parse_module(source))] == ["V4"]

    def test_inverted_int_range(self):
        source = mutate(("    eir.apply(%x, %q)\n",
                         "    %r = eir.int_uniform {low = 3, high = 1} : tensor<1xi32>\n    eir.apply(%x, %q)\n"))
        diags = verify(parse_module(source))
        assert [d.rule for d in errors_only(diags)] == ["V9"]

    def test_empty_program(self):
        diags = verify(parse_module(""))
        assert [(d.rule, d.loc) for d in diags] == [("V10", (1, 1))]


def test_diagnostic_rendering_and_order():
    source = mutate(("eir.apply(%x, %q)", "eir.apply(%x, %q, %q)"), ("eir.measure(%q, %b)", "eir.measure(%q, %q)"))
    diags = verify(parse_module(source))
    assert [d.render("f.eir") for d in diags] == [
        "f.eir:10:5: warning[W1]: %b is never used",
        "f.eir:11:5: error[V4]: gate of arity 1 applied to 2 qubit(s)",
        "f.eir:12:5: error[V7]: eir.measure takes (qubit, cbit), got (!eir.physical_qubit, !eir.physical_qubit)",
    ]
    assert [d.sort_key for d in diags] == sorted(d.sort_key for d in diags)


def test_same_position_errors_before_warnings():
    w = Diagnostic("warning", "W1", (3, 1), "unused")
    e10 = Diagnostic("error", "V10", (3, 1), "loop")
    e2 = Diagnostic("error", "V2", (3, 1), "type")
    assert sorted([w, e10, e2], key=lambda d: d.sort_key) == [e2, e10, w]


def test_warnings_do_not_count_as_errors():
    source = mutate(("    eir.apply(%x, %q)\n", "    eir.apply(%x, %q)\n    %unused = eir.extract(%qubits, %c0) : !eir.physical_qubit\n"))
    diags = verify(parse_module(source))
    assert [d.rule for d in diags] == ["W1"]
    assert errors_only(diags) == []


def test_constant_selector_warning():
    source = corpus_text("ghz_rc").replace(
        "eir.apply_distribution(%paulis, %p0, %q0)", "eir.apply_distribution(%paulis, %c1, %q0)", 1
    )
    rules = [d.rule for d in verify(parse_module(source))]
    assert "W2" in rules and not any(r.startswith("V") for r in rules)


# -- mutation-derived negatives with frozen golden diagnostics --------------

MANIFEST = json.loads((DATA / "negatives" / "manifest.json").read_text())


def _diagnose(text: str, filename: str) -> list[str]:
    try:
        program = parse_module(text)
    except SourceError as exc:
        return [f"{filename}:{exc.line}:{exc.column}: error[{exc.kind}]: {exc.message}"]
    return [d.render(filename) for d in verify(program)]


def test_enough_negatives():
    assert len(MANIFEST) >= 20


@pytest.mark.parametrize("entry", MANIFEST, ids=[e["file"] for e in MANIFEST])
def test_negative_matches_golden(entry):
    path = DATA / "negatives" / entry["file"]
    golden = path.with_suffix(".expected").read_text().splitlines()
    got = _diagnose(path.read_text(), entry["file"])
    assert got == golden
    assert f"error[{entry['rule']}]" in got[0] or any(f"error[{entry['rule']}]" in g for g in got)


@pytest.mark.parametrize("entry", MANIFEST, ids=[e["file"] for e in MANIFEST])
def test_negative_is_a_single_edit_of_the_corpus(entry):
    base = corpus_text(entry["base"])
    mutated = (DATA / "negatives" / entry["file"]).read_text()
    assert mutated != base
    # A single contiguous replacement: shared prefix plus shared suffix covers the shorter text.
    prefix = 0
    while prefix < min(len(base), len(mutated)) and base[prefix] == mutated[prefix]:
        prefix += 1
    suffix = 0
    while (suffix < min(len(base), len(mutated)) - prefix
           and base[-1 - suffix] == mutated[-1 - suffix]):
        suffix += 1
    assert prefix + suffix >= min(len(base), len(mutated)) - 64


# -- robustness ---------------------------------------------------------------

_LINE_EDITS = st.sampled_from(["delete", "duplicate", "swap"])


@settings(max_examples=300, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(name=st.sampled_from(CORPUS_NAMES), seed=st.integers(0, 2**32 - 1), edit=_LINE_EDITS)
def test_verifier_never_crashes_on_line_mutations(name, seed, edit):
    lines = corpus_text(name).splitlines(keepends=True)
    rng = random.Random(seed)
    k = rng.randrange(len(lines))
    if edit == "delete":
        del lines[k]
    elif edit == "duplicate":
        lines.insert(k, lines[k])
    else:
        j = rng.randrange(len(lines))
        lines[k], lines[j] = lines[j], lines[k]
    try:
        program = parse_module("".join(lines))
    except SourceError:
        return
    for d in verify(program):
        assert d.rule in RULES
        assert d.severity in ("error", "warning")
