"""Semantic checks over a parsed program.

``verify`` returns diagnostics instead of raising. Each error names one
rule from :data:`RULES`; warnings (``W*``) never block expansion.
"""

from __future__ import annotations

import math
import re
from collections.abc import Sequence
from dataclasses import dataclass

from .ir import Operation, Program, ValueId, iter_ops
from .types import (
    CBit,
    CBitTensor,
    EirType,
    FloatScalar,
    FloatTensor,
    Gate,
    GateDistribution,
    Index,
    IntScalar,
    IntTensor,
    Qubit,
    QubitTensor,
)

__all__ = ["Diagnostic", "RULES", "verify", "errors_only"]

RULES = {
    "V1": "SSA dominance and single definition",
    "V2": "operand and result types match the op signature",
    "V3": "extract index count equals tensor rank; constant indices in bounds",
    "V4": "apply operand count equals gate arity; qubit operands distinct",
    "V5": "gates in one distribution share an arity",
    "V6": "one transmit_results per iteration region, as its final op",
    "V7": "measure takes (qubit, cbit)",
    "V8": "remsi operands are both index or same-width integers",
    "V9": "random ranges are non-empty",
    "V10": "exactly one ensemble loop nest at top level",
    "W1": "unused value",
    "W2": "constant distribution selector",
}

_QUANTUM_EFFECTS = {
    "eir.apply",
    "eir.apply_distribution",
    "eir.measure",
    "eir.reset",
    "eir.int_uniform",
    "eir.float_uniform",
}
_PARAM_RE = re.compile(r"param(\d+)\Z")


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    rule: str
    loc: tuple[int, int]
    message: str

    @property
    def sort_key(self) -> tuple:
        return (self.loc[0], self.loc[1], self.rule[0] != "V", int(self.rule[1:]))

    def render(self, filename: str = "<input>") -> str:
        line, col = self.loc
        return f"{filename}:{line}:{col}: {self.severity}[{self.rule}]: {self.message}"


def errors_only(diags: Sequence[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]


def _is_int_attr(v: object) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _nested_shape(value: object) -> tuple[int, ...] | None:
    """Shape of a rectangular nested tuple, or None if ragged."""
    if not isinstance(value, tuple):
        return ()
    if not value:
        return None
    shapes = {_nested_shape(v) for v in value}
    if len(shapes) != 1 or None in shapes:
        return None
    return (len(value), *shapes.pop())  # type: ignore[misc]


def _leaves(value: object):
    if isinstance(value, tuple):
        for v in value:
            yield from _leaves(v)
    else:
        yield value


class _Verifier:
    def __init__(self, program: Program):
        self.program = program
        self.types = program.value_types
        self.diags: list[Diagnostic] = []
        self.defined: set[ValueId] = set()
        self.constants: dict[ValueId, object] = {}
        self.used: set[ValueId] = set()
        self.undefined: set[ValueId] = set()

    def report(self, op: Operation | None, rule: str, message: str, severity: str = "error") -> None:
        loc = op.loc if op is not None else (1, 1)
        self.diags.append(Diagnostic(severity, rule, loc, message))

    def name(self, v: ValueId) -> str:
        return f"%{v.hint}" if v.hint else repr(v)

    def ty(self, v: ValueId) -> EirType | None:
        if v in self.undefined:
            return None
        return self.types.get(v)

    # -- V1 -------------------------------------------------------------
    def check_scopes(self, ops: Sequence[Operation], visible: frozenset[ValueId]) -> None:
        scope = set(visible)
        for op in ops:
            for v in op.operands:
                self.used.add(v)
                if v not in scope:
                    if v not in self.types:
                        self.report(op, "V1", f"use of undefined value {self.name(v)}")
                    else:
                        self.report(op, "V1", f"{self.name(v)} does not dominate this use")
                    self.undefined.add(v)
            for region in op.regions:
                inner = set(scope)
                for v, _ in region.block.args:
                    self.define(op, v)
                    inner.add(v)
                self.check_scopes(region.ops, frozenset(inner))
            for v, _ in op.results:
                self.define(op, v)
                scope.add(v)

    def define(self, op: Operation, v: ValueId) -> None:
        if v in self.defined:
            self.report(op, "V1", f"{self.name(v)} is defined more than once")
        self.defined.add(v)

    # -- per-op signatures ----------------------------------------------
    def check_ops(self, ops: Sequence[Operation], parent: str | None) -> None:
        for i, op in enumerate(ops):
            handler = getattr(self, "op_" + op.opname.replace(".", "_"), None)
            if handler is not None:
                handler(op)
            if op.opname == "scf.yield" and (parent not in ("scf.for", "scf.if") or i != len(ops) - 1):
                self.report(op, "V2", "scf.yield must terminate an scf.for or scf.if region")
            for region in op.regions:
                self.check_ops(region.ops, op.opname)

    def expect_operands(self, op: Operation, n: int) -> bool:
        if len(op.operands) != n:
            self.report(op, "V2", f"{op.opname} takes {n} operand(s), got {len(op.operands)}")
            return False
        return True

    def expect_result(self, op: Operation, kinds: tuple[type, ...]) -> EirType | None:
        t = op.result_types[0]
        if not isinstance(t, kinds):
            wanted = " or ".join(k.__name__ for k in kinds)
            self.report(op, "V2", f"{op.opname} result must be {wanted}, not {t}")
            return None
        return t

    def no_attrs(self, op: Operation) -> None:
        if op.attributes:
            self.report(op, "V2", f"{op.opname} takes no attributes")

    def op_eir_gate(self, op: Operation) -> None:
        attrs = op.attributes
        name, arity = attrs.get("name"), attrs.get("arity")
        if not isinstance(name, str) or not name:
            self.report(op, "V2", "eir.gate needs a nonempty string 'name'")
        if not _is_int_attr(arity) or arity < 1:  # type: ignore[operator]
            self.report(op, "V2", "eir.gate needs an integer 'arity' >= 1")
            arity = None
        t = self.expect_result(op, (Gate,))
        if t is None:
            return
        assert isinstance(t, Gate)
        if arity is not None and t.arity != arity:
            self.report(op, "V2", f"gate arity {arity} disagrees with result type {t}")
        statics = []
        for key, value in attrs.items():
            if key in ("name", "arity"):
                continue
            m = _PARAM_RE.match(key)
            if not m:
                self.report(op, "V2", f"eir.gate has unknown attribute {key!r}")
            elif not isinstance(value, float) or int(m.group(1)) >= t.n_params:
                self.report(op, "V2", f"static parameter {key!r} must be a float below n_params={t.n_params}")
            else:
                statics.append(key)
        if len(op.operands) != t.n_params - len(statics):
            self.report(op, "V2", f"{t} with {len(statics)} static parameter(s) needs {t.n_params - len(statics)} operand(s)")
        for v in op.operands:
            vt = self.ty(v)
            if vt is not None and not isinstance(vt, FloatScalar):
                self.report(op, "V2", f"dynamic gate parameter {self.name(v)} must be a float scalar, not {vt}")

    def op_eir_gate_distribution(self, op: Operation) -> None:
        self.no_attrs(op)
        if not op.operands:
            self.report(op, "V2", "eir.gate_distribution needs at least one gate")
            return
        arities = []
        for v in op.operands:
            vt = self.ty(v)
            if vt is None:
                continue
            if not isinstance(vt, Gate):
                self.report(op, "V2", f"distribution candidate {self.name(v)} is {vt}, not a gate")
                return
            arities.append(vt.arity)
        t = self.expect_result(op, (GateDistribution,))
        if len(set(arities)) > 1:
            self.report(op, "V5", f"distribution mixes gate arities {sorted(set(arities))}")
        elif arities and t is not None and t.arity != arities[0]:  # type: ignore[attr-defined]
            self.report(op, "V2", f"candidates have arity {arities[0]} but result type is {t}")

    def op_eir_int_uniform(self, op: Operation) -> None:
        self.expect_operands(op, 0)
        t = self.expect_result(op, (IntTensor,))
        low, high = op.attributes.get("low"), op.attributes.get("high")
        extra = set(op.attributes) - {"low", "high"}
        if extra or not (_is_int_attr(low) and _is_int_attr(high)):
            self.report(op, "V2", "eir.int_uniform takes integer 'low' and 'high' attributes only")
            return
        if t is not None:
            width = t.width  # type: ignore[attr-defined]
            lo_lim, hi_lim = -(1 << (width - 1)), (1 << (width - 1)) - 1
            if width > 1 and not (lo_lim <= low <= hi_lim and lo_lim <= high <= hi_lim):  # type: ignore[operator]
                self.report(op, "V2", f"range [{low}, {high}] does not fit i{width}")
        if low > high:  # type: ignore[operator]
            self.report(op, "V9", f"empty integer range [{low}, {high}]")

    def op_eir_float_uniform(self, op: Operation) -> None:
        self.expect_operands(op, 0)
        self.expect_result(op, (FloatTensor,))
        low, high = op.attributes.get("low"), op.attributes.get("high")
        extra = set(op.attributes) - {"low", "high"}
        if extra or not (isinstance(low, float) and isinstance(high, float)):
            self.report(op, "V2", "eir.float_uniform takes float 'low' and 'high' attributes only")
            return
        if not (math.isfinite(low) and math.isfinite(high)) or not low < high:
            self.report(op, "V9", f"empty float range [{low}, {high})")

    def op_eir_program_alloc(self, op: Operation) -> None:
        self.expect_operands(op, 0)
        self.no_attrs(op)
        self.expect_result(op, (QubitTensor,))

    def op_eir_alloc_cbits(self, op: Operation) -> None:
        self.expect_operands(op, 0)
        self.no_attrs(op)
        self.expect_result(op, (CBitTensor,))

    def op_eir_extract(self, op: Operation) -> None:
        self.no_attrs(op)
        if not op.operands:
            self.report(op, "V2", "eir.extract needs a tensor operand")
            return
        tensor, *indices = op.operands
        tt = self.ty(tensor)
        if tt is None:
            return
        if not tt.is_tensor:
            self.report(op, "V2", f"eir.extract source {self.name(tensor)} is {tt}, not a tensor")
            return
        shape = tt.shape  # type: ignore[attr-defined]
        for v in indices:
            vt = self.ty(v)
            if vt is not None and not vt.is_integral:
                self.report(op, "V2", f"index {self.name(v)} is {vt}, not an integer")
        if len(indices) != len(shape):
            self.report(op, "V3", f"{len(indices)} index(es) into a rank-{len(shape)} tensor")
        else:
            for axis, (v, extent) in enumerate(zip(indices, shape)):
                c = self.constants.get(v)
                if _is_int_attr(c) and not 0 <= c < extent:  # type: ignore[operator]
                    self.report(op, "V3", f"constant index {c} out of bounds for axis {axis} of extent {extent}")
        if op.result_types[0] != tt.element:  # type: ignore[attr-defined]
            self.report(op, "V2", f"extract from {tt} yields {tt.element}, annotated {op.result_types[0]}")  # type: ignore[attr-defined]

    def check_qubits(self, op: Operation, gate_arity: int | None, qubits: Sequence[ValueId]) -> None:
        ok_types = True
        for v in qubits:
            vt = self.ty(v)
            if vt is not None and not isinstance(vt, Qubit):
                self.report(op, "V2", f"operand {self.name(v)} is {vt}, not a qubit")
                ok_types = False
        if gate_arity is not None and len(qubits) != gate_arity:
            self.report(op, "V4", f"gate of arity {gate_arity} applied to {len(qubits)} qubit(s)")
        elif ok_types and len(set(qubits)) != len(qubits):
            self.report(op, "V4", "the same qubit appears twice in one application")

    def op_eir_apply(self, op: Operation) -> None:
        self.no_attrs(op)
        if not op.operands:
            self.report(op, "V2", "eir.apply needs a gate operand")
            return
        gate, *qubits = op.operands
        gt = self.ty(gate)
        if gt is not None and not isinstance(gt, Gate):
            self.report(op, "V2", f"{self.name(gate)} is {gt}, not a gate")
            gt = None
        self.check_qubits(op, gt.arity if gt else None, qubits)

    def op_eir_apply_distribution(self, op: Operation) -> None:
        self.no_attrs(op)
        if len(op.operands) < 2:
            self.report(op, "V2", "eir.apply_distribution needs a distribution and a selector")
            return
        dist, sel, *qubits = op.operands
        dt = self.ty(dist)
        if dt is not None and not isinstance(dt, GateDistribution):
            self.report(op, "V2", f"{self.name(dist)} is {dt}, not a gate distribution")
            dt = None
        st = self.ty(sel)
        if st is not None and not st.is_integral:
            self.report(op, "V2", f"selector {self.name(sel)} is {st}, not an integer")
        if sel in self.constants:
            self.report(op, "W2", f"selector {self.name(sel)} is a constant", "warning")
        self.check_qubits(op, dt.arity if dt else None, qubits)

    def op_eir_measure(self, op: Operation) -> None:
        self.no_attrs(op)
        types = [self.ty(v) for v in op.operands]
        if len(types) != 2:
            self.report(op, "V7", f"eir.measure takes (qubit, cbit), got {len(types)} operand(s)")
            return
        qt, ct = types
        if (qt is not None and not isinstance(qt, Qubit)) or (ct is not None and not isinstance(ct, CBit)):
            self.report(op, "V7", f"eir.measure takes (qubit, cbit), got ({qt}, {ct})")

    def op_eir_reset(self, op: Operation) -> None:
        self.no_attrs(op)
        if self.expect_operands(op, 1):
            t = self.ty(op.operands[0])
            if t is not None and not isinstance(t, Qubit):
                self.report(op, "V2", f"eir.reset takes a qubit, got {t}")

    def op_eir_transmit_results(self, op: Operation) -> None:
        self.no_attrs(op)
        self.expect_operands(op, 0)

    def op_scf_for(self, op: Operation) -> None:
        for v in op.operands:
            t = self.ty(v)
            if t is not None and not isinstance(t, Index):
                self.report(op, "V2", f"scf.for bound {self.name(v)} is {t}, not index")

    def op_scf_if(self, op: Operation) -> None:
        t = self.ty(op.operands[0])
        if t is not None and not t.is_integral:
            self.report(op, "V2", f"scf.if condition is {t}, not an integer")

    def op_scf_yield(self, op: Operation) -> None:
        self.no_attrs(op)
        self.expect_operands(op, 0)

    def op_arith_constant(self, op: Operation) -> None:
        self.expect_operands(op, 0)
        if set(op.attributes) != {"value"}:
            self.report(op, "V2", "arith.constant takes exactly one attribute, 'value'")
            return
        value = op.attributes["value"]
        t = op.result_types[0]
        if isinstance(t, (Index, IntScalar)):
            ok = _is_int_attr(value)
        elif isinstance(t, FloatScalar):
            ok = isinstance(value, float)
        elif isinstance(t, (IntTensor, FloatTensor)):
            leaf_ok = _is_int_attr if isinstance(t, IntTensor) else (lambda x: isinstance(x, float))
            ok = _nested_shape(value) == t.shape and all(leaf_ok(x) for x in _leaves(value))
        else:
            self.report(op, "V2", f"arith.constant cannot produce {t}")
            return
        if not ok:
            self.report(op, "V2", f"constant value {value!r} does not match {t}")

    def op_arith_remsi(self, op: Operation) -> None:
        self.no_attrs(op)
        if not self.expect_operands(op, 2):
            return
        a, b = (self.ty(v) for v in op.operands)
        if a is None or b is None:
            return
        same_index = isinstance(a, Index) and isinstance(b, Index)
        same_int = isinstance(a, IntScalar) and a == b
        if not (same_index or same_int):
            self.report(op, "V8", f"arith.remsi operands ({a}, {b}) must both be index or the same integer type")
        elif op.result_types[0] != a:
            self.report(op, "V2", f"arith.remsi result {op.result_types[0]} differs from operand type {a}")

    def op_arith_index_cast(self, op: Operation) -> None:
        self.no_attrs(op)
        if not self.expect_operands(op, 1):
            return
        src, dst = self.ty(op.operands[0]), op.result_types[0]
        if src is None:
            return
        if not (
            (isinstance(src, Index) and isinstance(dst, IntScalar))
            or (isinstance(src, IntScalar) and isinstance(dst, Index))
        ):
            self.report(op, "V2", f"arith.index_cast converts between index and integers, not {src} -> {dst}")

    # -- V6 / V10 -------------------------------------------------------
    def check_structure(self) -> None:
        iterations: list[tuple[Operation, tuple[Operation, ...]]] = []

        def scan(ops: Sequence[Operation], path: tuple[Operation, ...]) -> None:
            inside = any(p.opname == "eir.quantum_program_iteration" for p in path)
            for op in ops:
                if op.opname == "eir.quantum_program_iteration":
                    iterations.append((op, path))
                    body = op.regions[0].ops
                    transmits = [o for o in body if o.opname == "eir.transmit_results"]
                    if len(transmits) != 1 or body[-1] is not transmits[0]:
                        self.report(op, "V6", f"iteration region has {len(transmits)} transmit_results; "
                                    "exactly one is required, as the final op")
                elif op.opname == "eir.transmit_results":
                    if not inside:
                        self.report(op, "V6", "transmit_results outside an iteration region")
                    elif path[-1].opname != "eir.quantum_program_iteration":
                        self.report(op, "V6", "transmit_results nested below the iteration region")
                elif op.opname in _QUANTUM_EFFECTS and not inside:
                    self.report(op, "V10", f"{op.opname} outside the ensemble iteration region")
                for region in op.regions:
                    scan(region.ops, path + (op,))

        scan(self.program.ops, ())
        if not iterations:
            first = self.program.ops[0] if self.program.ops else None
            self.report(first, "V10", "program has no ensemble loop with an eir.quantum_program_iteration")
            return
        for op, _ in iterations[1:]:
            self.report(op, "V10", "more than one eir.quantum_program_iteration in the program")
        op, path = iterations[0]
        if len(path) != 1 or path[0].opname != "scf.for":
            self.report(op, "V10", "eir.quantum_program_iteration must sit directly in a top-level scf.for")
            return
        loop = path[0]
        top_constants = {
            v: o.attributes.get("value")
            for o in self.program.ops
            if o.opname == "arith.constant"
            for v, _ in o.results
        }
        bounds = []
        for v in loop.operands:
            c = top_constants.get(v)
            if not _is_int_attr(c):
                self.report(loop, "V10", f"ensemble loop bound {self.name(v)} is not a top-level integer constant")
                return
            bounds.append(c)
        lo, _, step = bounds
        if lo < 0 or step < 1:  # type: ignore[operator]
            self.report(loop, "V10", "ensemble loop needs a nonnegative lower bound and a positive step")

    def check_unused(self) -> None:
        for op in iter_ops(self.program.ops):
            for v, _ in op.results:
                if v not in self.used:
                    self.report(op, "W1", f"{self.name(v)} is never used", "warning")

    def run(self) -> list[Diagnostic]:
        self.check_scopes(self.program.ops, frozenset())
        for op in iter_ops(self.program.ops):
            if op.opname == "arith.constant":
                for v, _ in op.results:
                    self.constants.setdefault(v, op.attributes.get("value"))
        self.check_ops(self.program.ops, None)
        self.check_structure()
        self.check_unused()
        unique = {(d.loc, d.rule, d.message): d for d in self.diags}
        return sorted(unique.values(), key=lambda d: d.sort_key)


def verify(program: Program) -> list[Diagnostic]:
    """All diagnostics for ``program``, sorted by (line, column, rule)."""
    return _Verifier(program).run()
