"""In-memory SSA representation of ensemble programs.

Operations are generic: an op name, operand values, an ordered attribute
map, typed results and nested single-block regions. Everything is frozen
after construction; :class:`eirkit.builder.Builder` is the convenient way to
assemble a program incrementally.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Callable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Union

from .types import EirType, Gate

__all__ = [
    "ValueId",
    "Operation",
    "Block",
    "Region",
    "Program",
    "OpInfo",
    "OP_REGISTRY",
    "IRError",
    "Static",
    "Dynamic",
    "build_gate_def",
    "build_generic",
    "walk",
    "iter_ops",
    "structurally_equal",
]

Attribute = Union[int, float, str, EirType, tuple]

_ids = itertools.count()


class IRError(ValueError):
    """Malformed IR detected while constructing operations."""

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message


@dataclass(frozen=True)
class ValueId:
    """An SSA value. Identity is the numeric id; ``hint`` only guides printing."""

    id: int
    hint: str | None = field(default=None, compare=False)

    @classmethod
    def fresh(cls, hint: str | None = None) -> ValueId:
        return cls(next(_ids), hint)

    def __repr__(self) -> str:
        return f"%{self.hint or 'v'}#{self.id}"


@dataclass(frozen=True, eq=False)
class Block:
    args: tuple[tuple[ValueId, EirType], ...] = ()
    ops: tuple[Operation, ...] = ()


@dataclass(frozen=True, eq=False)
class Region:
    blocks: tuple[Block, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) != 1:
            raise IRError("malformed-op", "regions hold exactly one block")

    @property
    def block(self) -> Block:
        return self.blocks[0]

    @property
    def ops(self) -> tuple[Operation, ...]:
        return self.blocks[0].ops

    @classmethod
    def of(cls, ops: Sequence[Operation], args: Sequence[tuple[ValueId, EirType]] = ()) -> Region:
        return cls((Block(tuple(args), tuple(ops)),))


@dataclass(frozen=True, eq=False)
class Operation:
    opname: str
    operands: tuple[ValueId, ...] = ()
    attributes: Mapping[str, Attribute] = field(default_factory=dict)
    results: tuple[tuple[ValueId, EirType], ...] = ()
    regions: tuple[Region, ...] = ()
    loc: tuple[int, int] = (0, 0)

    @property
    def result(self) -> ValueId:
        if len(self.results) != 1:
            raise IRError("malformed-op", f"{self.opname} does not have a single result")
        return self.results[0][0]

    @property
    def result_types(self) -> tuple[EirType, ...]:
        return tuple(t for _, t in self.results)

    def __repr__(self) -> str:
        return f"Operation({self.opname!r}, line={self.loc[0]})"


@dataclass(frozen=True)
class OpInfo:
    n_results: int
    min_regions: int = 0
    max_regions: int = 0
    region_args: int = 0
    # Region-bearing ops have a custom textual form with a fixed operand
    # count and no attribute dictionary.
    custom_operands: int | None = None


OP_REGISTRY: dict[str, OpInfo] = {
    "eir.gate": OpInfo(1),
    "eir.gate_distribution": OpInfo(1),
    "eir.int_uniform": OpInfo(1),
    "eir.float_uniform": OpInfo(1),
    "eir.program_alloc": OpInfo(1),
    "eir.alloc_cbits": OpInfo(1),
    "eir.quantum_program_iteration": OpInfo(0, 1, 1, custom_operands=0),
    "eir.apply": OpInfo(0),
    "eir.apply_distribution": OpInfo(0),
    "eir.measure": OpInfo(0),
    "eir.reset": OpInfo(0),
    "eir.extract": OpInfo(1),
    "eir.transmit_results": OpInfo(0),
    "scf.for": OpInfo(0, 1, 1, region_args=1, custom_operands=3),
    "scf.if": OpInfo(0, 1, 2, custom_operands=1),
    "scf.yield": OpInfo(0),
    "arith.constant": OpInfo(1),
    "arith.remsi": OpInfo(1),
    "arith.index_cast": OpInfo(1),
}


def _check_attribute(name: str, value: object) -> None:
    if isinstance(value, bool):
        raise IRError("malformed-op", f"attribute {name!r}: booleans are not attributes")
    if isinstance(value, float) and not math.isfinite(value):
        raise IRError("malformed-op", f"attribute {name!r}: float must be finite")
    if isinstance(value, tuple):
        for item in value:
            _check_attribute(name, item)
    elif not isinstance(value, (int, float, str, EirType)):
        raise IRError("malformed-op", f"attribute {name!r}: unsupported value {value!r}")


def _freeze_attr(value: object) -> object:
    if isinstance(value, list):
        return tuple(_freeze_attr(v) for v in value)
    if isinstance(value, tuple):
        return tuple(_freeze_attr(v) for v in value)
    return value


def build_generic(
    opname: str,
    operands: Sequence[ValueId] = (),
    attributes: Mapping[str, object] | None = None,
    result_types: Sequence[EirType] = (),
    regions: Sequence[Region] = (),
    *,
    result_hints: Sequence[str | None] | None = None,
    results: Sequence[ValueId] | None = None,
    loc: tuple[int, int] = (0, 0),
) -> Operation:
    """Create a structurally well-formed operation.

    Only the shape is checked here (registered name, result and region
    counts, attribute kinds); typing rules belong to the verifier.
    """
    info = OP_REGISTRY.get(opname)
    if info is None:
        raise IRError("unknown-op", f"unknown operation {opname!r}")
    result_types = tuple(result_types)
    if len(result_types) != info.n_results:
        raise IRError(
            "malformed-op",
            f"{opname} produces {info.n_results} result(s), got {len(result_types)}",
        )
    if not info.min_regions <= len(regions) <= info.max_regions:
        raise IRError("malformed-op", f"{opname} takes {info.min_regions}..{info.max_regions} regions")
    for r in regions:
        if len(r.block.args) != info.region_args:
            raise IRError("malformed-op", f"{opname} region takes {info.region_args} block argument(s)")
    if info.custom_operands is not None:
        if len(operands) != info.custom_operands:
            raise IRError("malformed-op", f"{opname} takes {info.custom_operands} operand(s)")
        if attributes:
            raise IRError("malformed-op", f"{opname} carries no attributes")
    attrs: dict[str, Attribute] = {}
    for name, value in (attributes or {}).items():
        value = _freeze_attr(value)
        _check_attribute(name, value)
        attrs[name] = value  # type: ignore[assignment]
    if results is None:
        hints = list(result_hints or [None] * len(result_types))
        results = [ValueId.fresh(h) for h in hints]
    if len(results) != len(result_types):
        raise IRError("malformed-op", "result names and result types differ in length")
    return Operation(
        opname=opname,
        operands=tuple(operands),
        attributes=attrs,
        results=tuple(zip(results, result_types)),
        regions=tuple(regions),
        loc=loc,
    )


@dataclass(frozen=True)
class Static:
    value: float


@dataclass(frozen=True)
class Dynamic:
    value: ValueId


def build_gate_def(
    name: str,
    arity: int,
    params: Sequence[Static | Dynamic] = (),
    *,
    hint: str | None = None,
    loc: tuple[int, int] = (0, 0),
) -> Operation:
    """Define a gate. Static parameters become ``param<i>`` attributes and
    dynamic ones become operands, in parameter order."""
    if not name:
        raise IRError("invalid-gate-name", "gate name must be nonempty")
    if arity < 1:
        raise IRError("invalid-gate-arity", f"gate {name!r} has arity {arity}")
    attrs: dict[str, object] = {"name": name, "arity": arity}
    operands = []
    for i, p in enumerate(params):
        if isinstance(p, Static):
            attrs[f"param{i}"] = float(p.value)
        else:
            operands.append(p.value)
    return build_generic(
        "eir.gate",
        operands,
        attrs,
        [Gate(arity, len(params))],
        result_hints=[hint or name],
        loc=loc,
    )


@dataclass(frozen=True, eq=False)
class Program:
    ops: tuple[Operation, ...] = ()
    symbol_table: Mapping[ValueId, Operation] = field(init=False, repr=False)
    value_types: Mapping[ValueId, EirType] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        table: dict[ValueId, Operation] = {}
        types: dict[ValueId, EirType] = {}
        for op in iter_ops(self.ops):
            for v, t in op.results:
                table.setdefault(v, op)
                types.setdefault(v, t)
            for region in op.regions:
                for v, t in region.block.args:
                    table.setdefault(v, op)
                    types.setdefault(v, t)
        object.__setattr__(self, "symbol_table", table)
        object.__setattr__(self, "value_types", types)

    def __len__(self) -> int:
        return len(self.ops)


def iter_ops(ops: Sequence[Operation] | Program) -> Iterator[Operation]:
    """Pre-order traversal: each op, then the ops of its regions in order."""
    if isinstance(ops, Program):
        ops = ops.ops
    for op in ops:
        yield op
        for region in op.regions:
            yield from iter_ops(region.ops)


def walk(program: Program, visitor: Callable[[Operation], object] | None = None) -> list[Operation]:
    """Visit every op in textual order and return the visit sequence."""
    seen = []
    for op in iter_ops(program):
        if visitor is not None:
            visitor(op)
        seen.append(op)
    return seen


def _attr_equal(a: object, b: object) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, float):
        return a.hex() == b.hex()  # type: ignore[union-attr]
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_attr_equal(x, y) for x, y in zip(a, b))  # type: ignore[arg-type]
    return a == b


def structurally_equal(a: Program, b: Program) -> bool:
    """Equality up to a consistent renaming of SSA values; locations are ignored."""
    forward: dict[ValueId, ValueId] = {}
    backward: dict[ValueId, ValueId] = {}

    def bind(x: ValueId, y: ValueId) -> bool:
        if forward.setdefault(x, y) != y or backward.setdefault(y, x) != x:
            return False
        return True

    def same_ops(xs: Sequence[Operation], ys: Sequence[Operation]) -> bool:
        if len(xs) != len(ys):
            return False
        for x, y in zip(xs, ys):
            if x.opname != y.opname or len(x.operands) != len(y.operands):
                return False
            if list(x.attributes) != list(y.attributes):
                return False
            if not all(_attr_equal(x.attributes[k], y.attributes[k]) for k in x.attributes):
                return False
            if x.result_types != y.result_types or len(x.regions) != len(y.regions):
                return False
            if not all(bind(u, v) for u, v in zip(x.operands, y.operands)):
                return False
            if not all(bind(u, v) for (u, _), (v, _) in zip(x.results, y.results)):
                return False
            for rx, ry in zip(x.regions, y.regions):
                bx, by = rx.block, ry.block
                if [t for _, t in bx.args] != [t for _, t in by.args]:
                    return False
                if not all(bind(u, v) for (u, _), (v, _) in zip(bx.args, by.args)):
                    return False
                if not same_ops(bx.ops, by.ops):
                    return False
        return True

    return same_ops(a.ops, b.ops)
