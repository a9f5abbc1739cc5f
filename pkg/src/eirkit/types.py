"""Type lattice of the ensemble dialect and its textual form."""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = [
    "EirType",
    "IntScalar",
    "FloatScalar",
    "Index",
    "IntTensor",
    "FloatTensor",
    "QubitTensor",
    "CBitTensor",
    "Qubit",
    "CBit",
    "Gate",
    "GateDistribution",
    "TypeSyntaxError",
    "parse_type",
    "PHYSICAL",
    "VIRTUAL",
]

PHYSICAL = "physical"
VIRTUAL = "virtual"
_PHYSICALITIES = (PHYSICAL, VIRTUAL)


class TypeSyntaxError(ValueError):
    """Raised when a type literal cannot be parsed."""


def _check_shape(shape: tuple[int, ...]) -> tuple[int, ...]:
    shape = tuple(shape)
    if not shape:
        raise ValueError("tensor shapes must have rank >= 1")
    for d in shape:
        if not isinstance(d, int) or d < 1:
            raise ValueError(f"tensor extents must be positive integers, got {shape}")
    return shape


class EirType:
    """Base class; concrete kinds are frozen dataclasses below."""

    __slots__ = ()

    @property
    def is_scalar(self) -> bool:
        return isinstance(self, (IntScalar, FloatScalar, Index))

    @property
    def is_tensor(self) -> bool:
        return isinstance(self, (IntTensor, FloatTensor, QubitTensor, CBitTensor))

    @property
    def is_integral(self) -> bool:
        """Integer or index scalar, usable as a subscript or selector."""
        return isinstance(self, (IntScalar, Index))


@dataclass(frozen=True)
class IntScalar(EirType):
    width: int = 64

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError("integer width must be >= 1")

    def __str__(self) -> str:
        return f"i{self.width}"


@dataclass(frozen=True)
class FloatScalar(EirType):
    width: int = 64

    def __post_init__(self) -> None:
        if self.width not in (16, 32, 64):
            raise ValueError("float width must be 16, 32 or 64")

    def __str__(self) -> str:
        return f"f{self.width}"


@dataclass(frozen=True)
class Index(EirType):
    def __str__(self) -> str:
        return "index"


@dataclass(frozen=True)
class IntTensor(EirType):
    shape: tuple[int, ...]
    width: int = 64

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", _check_shape(self.shape))

    @property
    def element(self) -> IntScalar:
        return IntScalar(self.width)

    def __str__(self) -> str:
        return _tensor_str(self.shape, f"i{self.width}")


@dataclass(frozen=True)
class FloatTensor(EirType):
    shape: tuple[int, ...]
    width: int = 64

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", _check_shape(self.shape))

    @property
    def element(self) -> FloatScalar:
        return FloatScalar(self.width)

    def __str__(self) -> str:
        return _tensor_str(self.shape, f"f{self.width}")


@dataclass(frozen=True)
class Qubit(EirType):
    """A single qubit, the element type of a qubit tensor."""

    physicality: str = PHYSICAL

    def __post_init__(self) -> None:
        if self.physicality not in _PHYSICALITIES:
            raise ValueError(f"unknown qubit physicality {self.physicality!r}")

    def __str__(self) -> str:
        return f"!eir.{self.physicality}_qubit"


@dataclass(frozen=True)
class CBit(EirType):
    def __str__(self) -> str:
        return "!eir.cbit"


@dataclass(frozen=True)
class QubitTensor(EirType):
    shape: tuple[int, ...]
    physicality: str = PHYSICAL

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", _check_shape(self.shape))
        if self.physicality not in _PHYSICALITIES:
            raise ValueError(f"unknown qubit physicality {self.physicality!r}")

    @property
    def element(self) -> Qubit:
        return Qubit(self.physicality)

    def __str__(self) -> str:
        return _tensor_str(self.shape, str(self.element))


@dataclass(frozen=True)
class CBitTensor(EirType):
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", _check_shape(self.shape))

    @property
    def element(self) -> CBit:
        return CBit()

    def __str__(self) -> str:
        return _tensor_str(self.shape, "!eir.cbit")


@dataclass(frozen=True)
class Gate(EirType):
    arity: int
    n_params: int = 0

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError("gate arity must be >= 1")
        if self.n_params < 0:
            raise ValueError("gate parameter count must be >= 0")

    def __str__(self) -> str:
        return f"!eir.gate<{self.arity}, {self.n_params}>"


@dataclass(frozen=True)
class GateDistribution(EirType):
    arity: int

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError("gate distribution arity must be >= 1")

    def __str__(self) -> str:
        return f"!eir.gate_distribution<{self.arity}>"


def _tensor_str(shape: tuple[int, ...], elem: str) -> str:
    return "tensor<" + "x".join(str(d) for d in shape) + "x" + elem + ">"


_SCALAR_RE = re.compile(r"(?:i(\d+)|f(\d+)|(index))\Z")
_TENSOR_RE = re.compile(r"tensor<((?:\d+x)+)(.+)>\Z")
_GATE_RE = re.compile(r"!eir\.gate<\s*(\d+)\s*,\s*(\d+)\s*>\Z")
_DIST_RE = re.compile(r"!eir\.gate_distribution<\s*(\d+)\s*>\Z")


def _parse_scalar(text: str) -> EirType | None:
    m = _SCALAR_RE.match(text)
    if not m:
        return None
    if m.group(1):
        return IntScalar(int(m.group(1)))
    if m.group(2):
        return FloatScalar(int(m.group(2)))
    return Index()


def parse_type(text: str) -> EirType:
    """Parse a type literal such as ``tensor<25x!eir.physical_qubit>``."""
    text = text.strip()
    try:
        scalar = _parse_scalar(text)
        if scalar is not None:
            return scalar
        if text == "!eir.physical_qubit":
            return Qubit(PHYSICAL)
        if text == "!eir.virtual_qubit":
            return Qubit(VIRTUAL)
        if text == "!eir.cbit":
            return CBit()
        m = _GATE_RE.match(text)
        if m:
            return Gate(int(m.group(1)), int(m.group(2)))
        m = _DIST_RE.match(text)
        if m:
            return GateDistribution(int(m.group(1)))
        m = _TENSOR_RE.match(text)
        if m:
            shape = tuple(int(d) for d in m.group(1).split("x")[:-1])
            elem = m.group(2)
            inner = _parse_scalar(elem)
            if isinstance(inner, IntScalar):
                return IntTensor(shape, inner.width)
            if isinstance(inner, FloatScalar):
                return FloatTensor(shape, inner.width)
            if elem == "!eir.physical_qubit":
                return QubitTensor(shape, PHYSICAL)
            if elem == "!eir.virtual_qubit":
                return QubitTensor(shape, VIRTUAL)
            if elem == "!eir.cbit":
                return CBitTensor(shape)
    except ValueError as exc:
        raise TypeSyntaxError(f"invalid type {text!r}: {exc}") from None
    raise TypeSyntaxError(f"invalid type {text!r}")
