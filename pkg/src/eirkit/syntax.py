"""Textual form of ensemble programs: parser and canonical printer.

One operation per line in MLIR generic style::

    %r = opname(%a, %b) {key = value} : type

Region-bearing ops use structured forms::

    scf.for %i = %lo to %hi step %st {
      ...
    }
    scf.if %cond {
      ...
    } else {
      ...
    }
    eir.quantum_program_iteration {
      ...
    }

SSA names live in a single module-wide namespace. A name that is used but
never defined parses to a value without a definition; the verifier reports
it (rule V1).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .ir import OP_REGISTRY, IRError, Operation, Program, Region, ValueId, build_generic, iter_ops
from .types import EirType, Index, TypeSyntaxError, parse_type

__all__ = ["SourceError", "parse_module", "print_module", "format_attribute"]

# Attributes whose absence makes an op unparseable rather than ill-typed.
REQUIRED_ATTRIBUTES = {
    "eir.gate": ("name", "arity"),
    "eir.int_uniform": ("low", "high"),
    "eir.float_uniform": ("low", "high"),
    "arith.constant": ("value",),
}

_CUSTOM = {"scf.for", "scf.if", "eir.quantum_program_iteration"}


class SourceError(Exception):
    """First error found in a source text; ``line`` and ``column`` are 1-based."""

    KINDS = ("lex", "syntax", "type-annotation-mismatch", "unknown-op", "redefinition")

    def __init__(self, line: int, column: int, message: str, kind: str = "syntax"):
        assert kind in self.KINDS, kind
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message
        self.kind = kind


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_SPEC = [
    ("WS", r"[ \t\r]+"),
    ("COMMENT", r"//[^\n]*"),
    ("NEWLINE", r"\n"),
    ("VALUE", r"%[A-Za-z_][A-Za-z0-9_]*"),
    ("TYPE", r"tensor<[^<>\n]*>|!eir\.[A-Za-z_]+(?:<[^<>\n]*>)?"),
    ("NUMBER", r"-?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_.]*"),
    ("PUNCT", r"[(){}\[\],=:]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pat})" for name, pat in _TOKEN_SPEC))


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise SourceError(line, pos - line_start + 1, f"unexpected character {text[pos]!r}", "lex")
        kind = m.lastgroup
        assert kind is not None
        if kind == "NEWLINE":
            tokens.append(_Token(kind, "\n", line, pos - line_start + 1))
            line += 1
            line_start = m.end()
        elif kind not in ("WS", "COMMENT"):
            tokens.append(_Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("EOF", "", line, pos - line_start + 1))
    return tokens


def _describe(tok: _Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "NEWLINE":
        return "end of line"
    return repr(tok.text)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.values: dict[str, ValueId] = {}
        self.defined: set[str] = set()

    # -- token helpers -------------------------------------------------
    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, tok: _Token, message: str, kind: str = "syntax") -> SourceError:
        return SourceError(tok.line, tok.col, message, kind)

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            wanted = what or (repr(text) if text else kind.lower())
            raise self.error(tok, f"expected {wanted}, found {_describe(tok)}")
        return self.next()

    def expect_eol(self) -> None:
        tok = self.peek()
        if tok.kind == "EOF":
            return
        self.expect("NEWLINE", what="end of line")

    # -- values --------------------------------------------------------
    def use(self, tok: _Token) -> ValueId:
        name = tok.text[1:]
        if name not in self.values:
            self.values[name] = ValueId.fresh(name)
        return self.values[name]

    def define(self, tok: _Token) -> ValueId:
        name = tok.text[1:]
        if name in self.defined:
            raise self.error(tok, f"redefinition of %{name}", "redefinition")
        self.defined.add(name)
        return self.use(tok)

    # -- grammar -------------------------------------------------------
    def parse_module(self) -> Program:
        ops = self.parse_ops(top=True)
        return Program(tuple(ops))

    def parse_ops(self, top: bool) -> list[Operation]:
        ops = []
        while True:
            tok = self.peek()
            if tok.kind == "NEWLINE":
                self.next()
                continue
            if tok.kind == "EOF":
                if not top:
                    raise self.error(tok, "expected '}' to close region")
                return ops
            if tok.kind == "PUNCT" and tok.text == "}":
                if top:
                    raise self.error(tok, "unexpected '}'")
                return ops
            ops.append(self.parse_op())

    def parse_op(self) -> Operation:
        first = self.peek()
        result_toks = []
        if first.kind == "VALUE":
            result_toks.append(self.next())
            while self.at("PUNCT", ","):
                self.next()
                result_toks.append(self.expect("VALUE", what="result name"))
            self.expect("PUNCT", "=")
        name_tok = self.expect("IDENT", what="operation name")
        opname = name_tok.text
        info = OP_REGISTRY.get(opname)
        if info is None:
            raise self.error(name_tok, f"unknown operation {opname!r}", "unknown-op")
        loc = (first.line, first.col)
        if opname in _CUSTOM:
            if result_toks:
                raise self.error(first, f"{opname} produces no results")
            return self.parse_custom(opname, loc)

        operands = []
        if self.at("PUNCT", "("):
            self.next()
            if not self.at("PUNCT", ")"):
                operands.append(self.use(self.expect("VALUE", what="operand")))
                while self.at("PUNCT", ","):
                    self.next()
                    operands.append(self.use(self.expect("VALUE", what="operand")))
            self.expect("PUNCT", ")")
        attrs: dict[str, object] = {}
        if self.at("PUNCT", "{"):
            attrs = self.parse_attr_dict()
        types: list[EirType] = []
        colon = None
        if self.at("PUNCT", ":"):
            colon = self.next()
            types.append(self.parse_type())
            while self.at("PUNCT", ","):
                self.next()
                types.append(self.parse_type())
        end = self.peek()
        self.expect_eol()

        if len(result_toks) != info.n_results:
            raise self.error(first, f"{opname} produces {info.n_results} result(s), {len(result_toks)} named")
        if len(types) != len(result_toks):
            where = colon or end
            raise self.error(
                where,
                f"{opname}: {len(result_toks)} result(s) but {len(types)} annotated type(s)",
                "type-annotation-mismatch",
            )
        for key in REQUIRED_ATTRIBUTES.get(opname, ()):
            if key not in attrs:
                raise self.error(name_tok, f"{opname} requires attribute {key!r}")
        results = [self.define(t) for t in result_toks]
        return build_generic(opname, operands, attrs, types, results=results, loc=loc)

    def parse_custom(self, opname: str, loc: tuple[int, int]) -> Operation:
        if opname == "scf.for":
            iv_tok = self.expect("VALUE", what="induction variable")
            self.expect("PUNCT", "=")
            lo = self.use(self.expect("VALUE", what="lower bound"))
            self.expect("IDENT", "to")
            hi = self.use(self.expect("VALUE", what="upper bound"))
            self.expect("IDENT", "step")
            st = self.use(self.expect("VALUE", what="step"))
            iv = self.define(iv_tok)
            body = self.parse_region(args=[(iv, Index())])
            self.expect_eol()
            return build_generic(opname, [lo, hi, st], {}, [], [body], loc=loc)
        if opname == "scf.if":
            cond = self.use(self.expect("VALUE", what="condition"))
            regions = [self.parse_region()]
            if self.at("IDENT", "else"):
                self.next()
                regions.append(self.parse_region())
            self.expect_eol()
            return build_generic(opname, [cond], {}, [], regions, loc=loc)
        region = self.parse_region()
        self.expect_eol()
        return build_generic(opname, [], {}, [], [region], loc=loc)

    def parse_region(self, args=()) -> Region:
        self.expect("PUNCT", "{")
        self.expect("NEWLINE", what="end of line after '{'")
        ops = self.parse_ops(top=False)
        self.expect("PUNCT", "}")
        return Region.of(ops, args)

    def parse_type(self) -> EirType:
        tok = self.peek()
        if tok.kind not in ("TYPE", "IDENT"):
            raise self.error(tok, f"expected type, found {_describe(tok)}")
        self.next()
        try:
            return parse_type(tok.text)
        except TypeSyntaxError as exc:
            raise self.error(tok, str(exc)) from None

    def parse_attr_dict(self) -> dict[str, object]:
        self.expect("PUNCT", "{")
        attrs: dict[str, object] = {}
        if self.at("PUNCT", "}"):
            self.next()
            return attrs
        while True:
            key = self.expect("IDENT", what="attribute name")
            self.expect("PUNCT", "=")
            if key.text in attrs:
                raise self.error(key, f"duplicate attribute {key.text!r}")
            attrs[key.text] = self.parse_attr_value()
            if self.at("PUNCT", ","):
                self.next()
                continue
            self.expect("PUNCT", "}", what="',' or '}'")
            return attrs

    def parse_attr_value(self) -> object:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.next()
            if any(c in tok.text for c in ".eE"):
                return float(tok.text)
            return int(tok.text)
        if tok.kind == "STRING":
            self.next()
            try:
                return json.loads(tok.text)
            except json.JSONDecodeError:
                raise self.error(tok, "malformed string literal", "lex") from None
        if tok.kind == "PUNCT" and tok.text == "[":
            self.next()
            items = []
            if not self.at("PUNCT", "]"):
                items.append(self.parse_attr_value())
                while self.at("PUNCT", ","):
                    self.next()
                    items.append(self.parse_attr_value())
            self.expect("PUNCT", "]", what="',' or ']'")
            return tuple(items)
        if tok.kind in ("TYPE", "IDENT"):
            return self.parse_type()
        raise self.error(tok, f"expected attribute value, found {_describe(tok)}")


def parse_module(text: str) -> Program:
    """Parse source text into a :class:`Program`; raises :class:`SourceError`."""
    parser = _Parser(text)
    try:
        return parser.parse_module()
    except IRError as exc:
        # Structural problems the grammar lets through (e.g. a bad region shape).
        tok = parser.tokens[max(parser.pos - 1, 0)]
        raise SourceError(tok.line, tok.col, exc.message, "syntax") from None


# -- printing ----------------------------------------------------------

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def format_attribute(value: object) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not attributes")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, tuple):
        return "[" + ", ".join(format_attribute(v) for v in value) + "]"
    return str(value)


def _assign_names(program: Program) -> dict[ValueId, str]:
    names: dict[ValueId, str] = {}
    taken: set[str] = set()
    counter = 0

    def assign(v: ValueId) -> None:
        nonlocal counter
        if v in names:
            return
        base = v.hint if v.hint and _NAME_RE.match(v.hint) else None
        if base is None:
            while f"v{counter}" in taken:
                counter += 1
            base = f"v{counter}"
        name, k = base, 0
        while name in taken:
            k += 1
            name = f"{base}_{k}"
        taken.add(name)
        names[v] = name

    ops = list(iter_ops(program))
    for op in ops:
        for v, _ in op.results:
            assign(v)
        for region in op.regions:
            for v, _ in region.block.args:
                assign(v)
    for op in ops:
        for v in op.operands:
            assign(v)
    return names


def print_module(program: Program) -> str:
    """Canonical text: two-space indentation, one op per line, LF endings."""
    names = _assign_names(program)
    lines: list[str] = []

    def ref(v: ValueId) -> str:
        return "%" + names[v]

    def emit(ops, depth: int) -> None:
        pad = "  " * depth
        for op in ops:
            if op.opname == "scf.for":
                iv = op.regions[0].block.args[0][0]
                lo, hi, st = (ref(v) for v in op.operands)
                lines.append(f"{pad}scf.for {ref(iv)} = {lo} to {hi} step {st} {{")
                emit(op.regions[0].ops, depth + 1)
                lines.append(pad + "}")
            elif op.opname == "scf.if":
                lines.append(f"{pad}scf.if {ref(op.operands[0])} {{")
                emit(op.regions[0].ops, depth + 1)
                if len(op.regions) > 1:
                    lines.append(pad + "} else {")
                    emit(op.regions[1].ops, depth + 1)
                lines.append(pad + "}")
            elif op.opname == "eir.quantum_program_iteration":
                lines.append(f"{pad}{op.opname} {{")
                emit(op.regions[0].ops, depth + 1)
                lines.append(pad + "}")
            else:
                text = op.opname
                if op.results:
                    text = ", ".join(ref(v) for v, _ in op.results) + " = " + text
                if op.operands:
                    text += "(" + ", ".join(ref(v) for v in op.operands) + ")"
                if op.attributes:
                    items = (f"{k} = {format_attribute(v)}" for k, v in op.attributes.items())
                    text += " {" + ", ".join(items) + "}"
                if op.results:
                    text += " : " + ", ".join(str(t) for t in op.result_types)
                lines.append(pad + text)

    emit(program.ops, 0)
    return "".join(line + "\n" for line in lines)
