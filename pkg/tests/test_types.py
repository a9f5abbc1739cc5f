from __future__ import annotations

import pytest

from eirkit.types import (
    PHYSICAL,
    VIRTUAL,
    CBit,
    CBitTensor,
    FloatScalar,
    FloatTensor,
    Gate,
    GateDistribution,
    Index,
    IntScalar,
    IntTensor,
    Qubit,
    QubitTensor,
    TypeSyntaxError,
    parse_type,
)

ROUND_TRIP = [
    (IntScalar(32), "i32"),
    (FloatScalar(64), "f64"),
    (Index(), "index"),
    (IntTensor((10,), 32), "tensor<10xi32>"),
    (IntTensor((4, 4), 64), "tensor<4x4xi64>"),
    (FloatTensor((10, 10), 64), "tensor<10x10xf64>"),
    (QubitTensor((2,), PHYSICAL), "tensor<2x!eir.physical_qubit>"),
    (QubitTensor((3,), VIRTUAL), "tensor<3x!eir.virtual_qubit>"),
    (CBitTensor((2,)), "tensor<2x!eir.cbit>"),
    (Qubit(PHYSICAL), "!eir.physical_qubit"),
    (CBit(), "!eir.cbit"),
    (Gate(1, 0), "!eir.gate<1, 0>"),
    (Gate(2, 1), "!eir.gate<2, 1>"),
    (GateDistribution(1), "!eir.gate_distribution<1>"),
]


@pytest.mark.parametrize("ty,text", ROUND_TRIP, ids=[t for _, t in ROUND_TRIP])
def test_print_and_parse_agree(ty, text):
    assert str(ty) == text
    assert parse_type(text) == ty


@pytest.mark.parametrize(
    "bad",
    ["i0", "tensor<0xi32>", "tensor<i32>", "!eir.gate<0, 0>", "!eir.gate_distribution<0>", "f16x", "", "tensor<2x!eir.qubit>"],
)
def test_rejects_malformed(bad):
    with pytest.raises(TypeSyntaxError):
        parse_type(bad)


@pytest.mark.parametrize(
    "make",
    [lambda: IntTensor((0,), 32), lambda: IntTensor((), 32), lambda: Gate(0, 0), lambda: Gate(1, -1), lambda: GateDistribution(0)],
)
def test_constructor_invariants(make):
    with pytest.raises(ValueError):
        make()


def test_classification():
    assert IntScalar(32).is_scalar and IntScalar(32).is_integral
    assert Index().is_integral
    assert not FloatScalar(64).is_integral
    t = FloatTensor((10, 10), 64)
    assert t.is_tensor and t.element == FloatScalar(64)
    assert QubitTensor((2,), PHYSICAL).element == Qubit(PHYSICAL)
    assert CBitTensor((2,)).element == CBit()
