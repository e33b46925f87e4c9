"""Textual IR parser.

Accepts the canonical printed form plus sugar variants (an optional
`module { ... }` wrapper, bare `func` for `func.func`, generic call-style
spellings of sugared ops). Parsing is total: any input either produces a
program that passes the structural verifier or raises `ParseFailure`
carrying at least one located error.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass

import numpy as np

from . import dialect
from .dialect import DenseValue, verify
from .ir import (
    DYNAMIC,
    INDEX,
    MemRefType,
    Operation,
    Program,
    Region,
    ScalarType,
    TeamHandleType,
    Type,
    Value,
)

NUMPY_DTYPES = {
    "f16": np.dtype("<f2"), "f32": np.dtype("<f4"), "f64": np.dtype("<f8"),
    "i1": np.dtype("<u1"), "i32": np.dtype("<i4"), "i64": np.dtype("<i8"),
    "index": np.dtype("<i8"),
}


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: str | None = None

    def __str__(self) -> str:
        hint = f" (expected {self.expected})" if self.expected else ""
        return f"{self.span}: {self.message}{hint}"


class ParseFailure(Exception):
    def __init__(self, errors: list[ParseError]):
        super().__init__("; ".join(str(e) for e in errors))
        self.errors = errors


# --- lexer -------------------------------------------------------------------

_PUNCT = {"(", ")", "{", "}", "[", "]", "<", ">", ",", "=", ":", "^", "-"}
_IDENT_START = re.compile(r"[A-Za-z_]")
_IDENT_BODY = re.compile(r"[A-Za-z0-9_.]")
_NAME_BODY = re.compile(r"[A-Za-z0-9_]")


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, float, string, percent, at, punct, memref, arrow, eof
    text: str
    span: SourceSpan


class _Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def _span(self, start: int, start_line: int, start_col: int) -> SourceSpan:
        return SourceSpan(start, self.pos, start_line, start_col)

    def error(self, message: str) -> ParseError:
        return ParseError(SourceSpan(self.pos, self.pos + 1, self.line, self.col), message)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.text):
                if self.text[self.pos] == "\n":
                    self.line += 1
                    self.col = 1
                else:
                    self.col += 1
                self.pos += 1

    def _skip_trivia(self) -> None:
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in " \t\r\n":
                self._advance()
            elif self.text.startswith("//", self.pos):
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance()
            else:
                return

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        while True:
            self._skip_trivia()
            start, line, col = self.pos, self.line, self.col
            if self.pos >= len(self.text):
                out.append(Token("eof", "", self._span(start, line, col)))
                return out
            c = self.text[self.pos]
            if _IDENT_START.match(c):
                while self.pos < len(self.text) and _IDENT_BODY.match(self.text[self.pos]):
                    self._advance()
                word = self.text[start:self.pos]
                if word == "memref" and self.pos < len(self.text) and self.text[self.pos] == "<":
                    close = self.text.find(">", self.pos)
                    if close == -1:
                        raise ParseFailure([self.error("unterminated memref type")])
                    self._advance(close + 1 - self.pos)
                    out.append(Token("memref", self.text[start:self.pos], self._span(start, line, col)))
                else:
                    out.append(Token("ident", word, self._span(start, line, col)))
            elif c.isdigit():
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self._advance()
                kind = "int"
                if self.pos < len(self.text) and self.text[self.pos] == "." and \
                        self.pos + 1 < len(self.text) and self.text[self.pos + 1].isdigit():
                    kind = "float"
                    self._advance()
                    while self.pos < len(self.text) and self.text[self.pos].isdigit():
                        self._advance()
                if self.pos < len(self.text) and self.text[self.pos] in "eE":
                    probe = self.pos + 1
                    if probe < len(self.text) and self.text[probe] in "+-":
                        probe += 1
                    if probe < len(self.text) and self.text[probe].isdigit():
                        kind = "float"
                        self._advance(probe - self.pos)
                        while self.pos < len(self.text) and self.text[self.pos].isdigit():
                            self._advance()
                out.append(Token(kind, self.text[start:self.pos], self._span(start, line, col)))
            elif c == "%":
                self._advance()
                while self.pos < len(self.text) and _NAME_BODY.match(self.text[self.pos]):
                    self._advance()
                if self.pos == start + 1:
                    raise ParseFailure([self.error("expected a name after %")])
                out.append(Token("percent", self.text[start + 1:self.pos], self._span(start, line, col)))
            elif c == "@":
                self._advance()
                while self.pos < len(self.text) and _NAME_BODY.match(self.text[self.pos]):
                    self._advance()
                if self.pos == start + 1:
                    raise ParseFailure([self.error("expected a name after @")])
                out.append(Token("at", self.text[start + 1:self.pos], self._span(start, line, col)))
            elif c == '"':
                self._advance()
                while self.pos < len(self.text) and self.text[self.pos] != '"':
                    if self.text[self.pos] == "\\":
                        self._advance()
                    self._advance()
                if self.pos >= len(self.text):
                    raise ParseFailure([self.error("unterminated string")])
                self._advance()
                out.append(Token("string", self.text[start:self.pos], self._span(start, line, col)))
            elif self.text.startswith("->", self.pos):
                self._advance(2)
                out.append(Token("arrow", "->", self._span(start, line, col)))
            elif c in _PUNCT:
                self._advance()
                out.append(Token("punct", c, self._span(start, line, col)))
            else:
                raise ParseFailure([self.error(f"unexpected character {c!r}")])


# --- type parsing ------------------------------------------------------------

_MEMREF_RE = re.compile(
    r"memref<((?:(?:\d+|\?)x)*)(f16|f32|f64|i1|i32|i64|index)(?:,\s*(host|device|dualview|unassigned))?>$"
)


def parse_memref_text(text: str) -> MemRefType | None:
    m = _MEMREF_RE.match(text)
    if m is None:
        return None
    dims_text, elem, space = m.groups()
    shape = tuple(
        DYNAMIC if d == "?" else int(d)
        for d in dims_text.split("x") if d
    )
    return MemRefType(ScalarType(elem), shape, space or "unassigned")


# --- parser -------------------------------------------------------------------

_SUGARED_KEYWORDS = ("to", "step", "init", "in", "team_size", "vector_length", "else")

_FUNC_ALIASES = {"func": "func.func"}


class _Parser:
    def __init__(self, text: str, base_dir: str | None):
        self.tokens = _Lexer(text).tokens()
        self.idx = 0
        self.base_dir = base_dir
        self.scopes: list[dict[str, Value]] = []

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.idx]

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.idx + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.idx += 1
        return t

    def fail(self, message: str, expected: str | None = None, token: Token | None = None):
        token = token or self.tok
        raise ParseFailure([ParseError(token.span, message, expected)])

    def at_punct(self, ch: str) -> bool:
        return self.tok.kind == "punct" and self.tok.text == ch

    def at_ident(self, word: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text == word

    def expect_punct(self, ch: str) -> Token:
        if not self.at_punct(ch):
            self.fail(f"found {self.tok.text!r}", expected=repr(ch))
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            self.fail(f"found {self.tok.text!r}", expected=what)
        return self.advance()

    # scopes

    def push_scope(self) -> None:
        self.scopes.append({})

    def pop_scope(self) -> None:
        self.scopes.pop()

    def define(self, name: str, value: Value, token: Token) -> None:
        if name in self.scopes[-1]:
            self.fail(f"duplicate SSA name %{name}", token=token)
        value.name_hint = name
        self.scopes[-1][name] = value

    def lookup(self, token: Token) -> Value:
        for scope in reversed(self.scopes):
            if token.text in scope:
                return scope[token.text]
        self.fail(f"use before definition of %{token.text}", token=token)

    # types

    def parse_type(self) -> Type:
        t = self.tok
        if t.kind == "memref":
            self.advance()
            mt = parse_memref_text(t.text)
            if mt is None:
                self.fail(f"malformed memref type {t.text!r}", token=t)
            return mt
        if t.kind == "ident":
            if t.text == "team_handle":
                self.advance()
                return TeamHandleType()
            try:
                st = ScalarType(t.text)
            except ValueError:
                self.fail(f"unknown type {t.text!r}", token=t)
            self.advance()
            return st
        self.fail(f"found {t.text!r}", expected="a type")

    def parse_type_list(self) -> list[Type]:
        if self.at_punct("("):
            self.advance()
            types: list[Type] = []
            if not self.at_punct(")"):
                types.append(self.parse_type())
                while self.at_punct(","):
                    self.advance()
                    types.append(self.parse_type())
            self.expect_punct(")")
            return types
        return [self.parse_type()]

    # literals / attributes

    def parse_number(self):
        neg = False
        if self.at_punct("-"):
            neg = True
            self.advance()
        t = self.tok
        if t.kind == "int":
            self.advance()
            v = int(t.text)
            return -v if neg else v
        if t.kind == "float":
            self.advance()
            v = float(t.text)
            return -v if neg else v
        self.fail(f"found {t.text!r}", expected="a number")

    def parse_dense(self, token: Token) -> DenseValue:
        # dense<[...]>
        self.expect_punct("<")
        self.expect_punct("[")
        elements = []
        if not self.at_punct("]"):
            elements.append(self.parse_number())
            while self.at_punct(","):
                self.advance()
                elements.append(self.parse_number())
        self.expect_punct("]")
        self.expect_punct(">")
        return DenseValue(tuple(elements))

    def parse_file_ref(self, token: Token) -> tuple[str, Token]:
        self.expect_punct("(")
        s = self.expect_kind("string", "a file name string")
        self.expect_punct(")")
        return json.loads(s.text), s

    def parse_attr_value(self):
        t = self.tok
        if t.kind in ("int", "float") or self.at_punct("-"):
            return self.parse_number()
        if t.kind == "string":
            self.advance()
            return json.loads(t.text)
        if self.at_punct("["):
            self.advance()
            items = []
            if not self.at_punct("]"):
                items.append(self.parse_number())
                while self.at_punct(","):
                    self.advance()
                    items.append(self.parse_number())
            self.expect_punct("]")
            return items
        if t.kind == "ident" and t.text == "dense":
            self.advance()
            return self.parse_dense(t)
        if t.kind == "at" and t.text == "file":
            self.advance()
            name, tok = self.parse_file_ref(t)
            return ("@file", name, tok)  # resolved by the caller, which knows the type
        if t.kind == "ident":
            self.advance()
            return t.text
        self.fail(f"found {t.text!r}", expected="an attribute value")

    def parse_attr_dict(self) -> dict:
        attrs: dict = {}
        self.expect_punct("{")
        while not self.at_punct("}"):
            name = self.expect_kind("ident", "an attribute name")
            self.expect_punct("=")
            attrs[name.text] = self.parse_attr_value()
            if self.at_punct(","):
                self.advance()
            elif not self.at_punct("}"):
                self.fail(f"found {self.tok.text!r}", expected="',' or '}'")
        self.advance()
        return attrs

    def looks_like_attr_dict(self) -> bool:
        if not self.at_punct("{"):
            return False
        nxt = self.peek(1)
        if nxt.kind == "punct" and nxt.text == "}":
            return True
        return nxt.kind == "ident" and "." not in nxt.text and \
            self.peek(2).kind == "punct" and self.peek(2).text == "="

    # operand helpers

    def parse_operand(self) -> Value:
        t = self.expect_kind("percent", "an SSA value")
        return self.lookup(t)

    def parse_operand_list_parens(self) -> list[Value]:
        self.expect_punct("(")
        out = []
        if not self.at_punct(")"):
            out.append(self.parse_operand())
            while self.at_punct(","):
                self.advance()
                out.append(self.parse_operand())
        self.expect_punct(")")
        return out

    def parse_subscripts(self) -> list[Value]:
        self.expect_punct("[")
        out = []
        if not self.at_punct("]"):
            out.append(self.parse_operand())
            while self.at_punct(","):
                self.advance()
                out.append(self.parse_operand())
        self.expect_punct("]")
        return out

    # regions

    def parse_region(self, arg_values: list[Value] | None = None,
                     arg_names: list[Token] | None = None) -> Region:
        """Parse `{ [^(args):] ops }`. Pre-bound args come from loop sugar."""
        self.expect_punct("{")
        region = Region()
        self.push_scope()
        if arg_values is not None:
            for v, tok in zip(arg_values, arg_names or []):
                region.args.append(v)
                v.owner = region
                v.index = len(region.args) - 1
                self.define(tok.text, v, tok)
        elif self.at_punct("^"):
            self.advance()
            self.expect_punct("(")
            while not self.at_punct(")"):
                name = self.expect_kind("percent", "a block argument")
                self.expect_punct(":")
                t = self.parse_type()
                arg = region.add_arg(t)
                self.define(name.text, arg, name)
                if self.at_punct(","):
                    self.advance()
            self.advance()
            self.expect_punct(":")
        while not self.at_punct("}"):
            if self.tok.kind == "eof":
                self.fail("unterminated region", expected="'}'")
            region.append(self.parse_op())
        self.advance()
        self.pop_scope()
        return region

    # --- op parsing -----------------------------------------------------------

    def parse_op(self) -> Operation:
        result_tokens: list[Token] = []
        if self.tok.kind == "percent":
            result_tokens.append(self.advance())
            while self.at_punct(","):
                self.advance()
                result_tokens.append(self.expect_kind("percent", "a result name"))
            self.expect_punct("=")
        name_tok = self.expect_kind("ident", "an op name")
        name = _FUNC_ALIASES.get(name_tok.text, name_tok.text)
        if name not in dialect.OP_SCHEMAS:
            self.fail(f"unknown op name {name!r}", token=name_tok)

        handler = getattr(self, "_op_" + name.replace(".", "_"), None)
        if handler is not None:
            op = handler(result_tokens, name_tok)
        else:
            op = self.parse_generic(name, result_tokens, name_tok)
        op.span = name_tok.span
        return op

    def finish_op(self, op: Operation, result_tokens: list[Token]) -> Operation:
        if len(result_tokens) != len(op.results):
            self.fail(
                f"op {op.name} produces {len(op.results)} results, {len(result_tokens)} bound",
                token=result_tokens[0] if result_tokens else self.tok,
            )
        for tok, value in zip(result_tokens, op.results):
            self.define(tok.text, value, tok)
        return op

    def infer_result_types(self, name: str, operands: list[Value], attrs: dict,
                           annotated: list[Type] | None, n_results: int,
                           name_tok: Token) -> list[Type]:
        if annotated is not None:
            return annotated
        if name in dialect.INT_BINARY_OPS or name in dialect.FLOAT_BINARY_OPS or name == "arith.select":
            src = operands[-1] if operands else None
            return [src.type] if src is not None else []
        if name in ("arith.cmpi", "arith.cmpf"):
            return [ScalarType("i1")]
        if name == "memref.load":
            if operands and isinstance(operands[0].type, MemRefType):
                return [operands[0].type.element]
            return []
        if name == "memref.dim":
            return [INDEX]
        if name == "memref.subview":
            if operands and isinstance(operands[0].type, MemRefType):
                base = operands[0].type
                sizes = operands[1 + base.rank:]
                shape = []
                for s in sizes:
                    c = dialect.constant_int_value(s)
                    shape.append(DYNAMIC if c is None else c)
                if len(shape) == base.rank:
                    return [MemRefType(base.element, tuple(shape), base.space)]
            return []
        if name == "scf.parallel":
            k = attrs.get("dims", 1)
            return [v.type for v in operands[3 * k:]]
        if name in dialect.KOKKOS_PARALLEL_OPS:
            k = attrs.get("dims", 1)
            skip = k + (1 if attrs.get("has_team_size_hint") else 0) \
                     + (1 if attrs.get("has_vector_length_hint") else 0)
            return [v.type for v in operands[skip:]]
        if n_results:
            self.fail(f"op {name} requires a result type annotation", token=name_tok)
        return []

    def parse_generic(self, name: str, result_tokens: list[Token], name_tok: Token) -> Operation:
        operands: list[Value] = []
        if self.at_punct("("):
            operands = self.parse_operand_list_parens()
        attrs: dict = {}
        if self.looks_like_attr_dict():
            attrs = self.parse_attr_dict()
        annotated: list[Type] | None = None
        if self.at_punct(":"):
            self.advance()
            annotated = self.parse_type_list()
        types = self.infer_result_types(name, operands, attrs, annotated, len(result_tokens), name_tok)
        op = Operation(name, operands, types, attrs)
        while self.at_punct("{"):
            op.add_region(self.parse_region())
        return self.finish_op(op, result_tokens)

    # sugar: functions, globals, calls -----------------------------------------

    def _op_func_func(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        if self.tok.kind != "at":
            return self.parse_generic("func.func", result_tokens, name_tok)
        sym = self.advance()
        self.expect_punct("(")
        region = Region()
        self.push_scope()
        while not self.at_punct(")"):
            pname = self.expect_kind("percent", "a parameter name")
            self.expect_punct(":")
            ptype = self.parse_type()
            arg = region.add_arg(ptype)
            self.define(pname.text, arg, pname)
            if self.at_punct(","):
                self.advance()
        self.advance()
        result_types: list[Type] = []
        if self.tok.kind == "arrow":
            self.advance()
            result_types = self.parse_type_list()
        self.expect_punct("{")
        while not self.at_punct("}"):
            if self.tok.kind == "eof":
                self.fail("unterminated function body", expected="'}'")
            region.append(self.parse_op())
        self.advance()
        self.pop_scope()
        op = Operation("func.func", attrs={"sym_name": sym.text, "result_types": tuple(result_types)})
        op.add_region(region)
        return self.finish_op(op, result_tokens)

    def _op_memref_global(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        sym = self.expect_kind("at", "a global name")
        attrs = self.parse_attr_dict() if self.at_punct("{") else {}
        self.expect_punct(":")
        type_tok = self.tok
        type_ = self.parse_type()
        if not isinstance(type_, MemRefType):
            self.fail("global type must be a memref", token=type_tok)
        value = attrs.get("value")
        if isinstance(value, tuple) and value and value[0] == "@file":
            _, fname, ftok = value
            attrs["value"] = self._resolve_sidecar(fname, type_, ftok)
        elif isinstance(value, DenseValue):
            pass
        elif value is not None:
            self.fail("global value must be dense<[...]> or @file(...)", token=type_tok)
        attrs["sym_name"] = sym.text
        attrs["type"] = type_
        op = Operation("memref.global", attrs=attrs)
        return self.finish_op(op, result_tokens)

    def _resolve_sidecar(self, fname: str, type_: MemRefType, token: Token) -> DenseValue:
        path = os.path.join(self.base_dir or ".", fname)
        try:
            raw = open(path, "rb").read()
        except OSError as exc:
            self.fail(f"cannot read sidecar file {fname!r}: {exc}", token=token)
        dtype = NUMPY_DTYPES[type_.element.kind]
        count = 1
        for d in type_.shape:
            count *= d
        if len(raw) != count * dtype.itemsize:
            self.fail(
                f"sidecar file {fname!r} holds {len(raw)} bytes, expected {count * dtype.itemsize}",
                token=token,
            )
        data = np.frombuffer(raw, dtype=dtype)
        if type_.element.is_float:
            elements = tuple(float(x) for x in data)
        else:
            elements = tuple(int(x) for x in data)
        return DenseValue(elements, file_ref=fname)

    def _op_memref_get_global(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        if self.tok.kind != "at":
            return self.parse_generic("memref.get_global", result_tokens, name_tok)
        sym = self.advance()
        self.expect_punct(":")
        type_ = self.parse_type()
        op = Operation("memref.get_global", result_types=[type_], attrs={"symbol": sym.text})
        return self.finish_op(op, result_tokens)

    def _op_func_call(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        if self.tok.kind != "at":
            return self.parse_generic("func.call", result_tokens, name_tok)
        sym = self.advance()
        operands = self.parse_operand_list_parens()
        types: list[Type] = []
        if self.at_punct(":"):
            self.advance()
            types = self.parse_type_list()
        op = Operation("func.call", operands, types, attrs={"callee": sym.text})
        return self.finish_op(op, result_tokens)

    # sugar: memory ops -----------------------------------------------------------

    def _op_arith_constant(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        if self.at_punct("("):
            return self.parse_generic("arith.constant", result_tokens, name_tok)
        value = self.parse_number()
        self.expect_punct(":")
        type_tok = self.tok
        type_ = self.parse_type()
        if not isinstance(type_, ScalarType):
            self.fail("constant type must be scalar", token=type_tok)
        if type_.is_int:
            value = int(value)
        else:
            value = float(value)
        op = Operation("arith.constant", result_types=[type_], attrs={"value": value})
        return self.finish_op(op, result_tokens)

    def _op_memref_load(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        if self.at_punct("("):
            return self.parse_generic("memref.load", result_tokens, name_tok)
        base = self.parse_operand()
        idx = self.parse_subscripts()
        if not isinstance(base.type, MemRefType):
            self.fail("load base must be a memref", token=name_tok)
        op = Operation("memref.load", [base, *idx], [base.type.element])
        return self.finish_op(op, result_tokens)

    def _op_memref_store(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        if self.at_punct("("):
            return self.parse_generic("memref.store", result_tokens, name_tok)
        value = self.parse_operand()
        self.expect_punct(",")
        base = self.parse_operand()
        idx = self.parse_subscripts()
        op = Operation("memref.store", [value, base, *idx])
        return self.finish_op(op, result_tokens)

    def _op_memref_subview(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        if self.at_punct("("):
            return self.parse_generic("memref.subview", result_tokens, name_tok)
        base = self.parse_operand()
        offsets = self.parse_subscripts()
        sizes = self.parse_subscripts()
        if not isinstance(base.type, MemRefType):
            self.fail("subview base must be a memref", token=name_tok)
        shape = []
        for s in sizes:
            c = dialect.constant_int_value(s)
            shape.append(DYNAMIC if c is None else c)
        result = MemRefType(base.type.element, tuple(shape), base.type.space)
        op = Operation("memref.subview", [base, *offsets, *sizes], [result])
        return self.finish_op(op, result_tokens)

    # sugar: structured control flow -------------------------------------------------

    def _parse_iv_group(self) -> list[Token]:
        if self.tok.kind == "percent":
            return [self.advance()]
        self.expect_punct("(")
        out = [self.expect_kind("percent", "an induction variable")]
        while self.at_punct(","):
            self.advance()
            out.append(self.expect_kind("percent", "an induction variable"))
        self.expect_punct(")")
        return out

    def _parse_operand_group(self, n: int, what: str) -> list[Value]:
        if not self.at_punct("("):
            if n != 1:
                self.fail(f"expected {n} {what} operands")
            return [self.parse_operand()]
        vs = self.parse_operand_list_parens()
        if len(vs) != n:
            self.fail(f"expected {n} {what} operands, got {len(vs)}")
        return vs

    def _op_scf_parallel(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        sugar = self.tok.kind == "percent" or (
            self.at_punct("(") and self.peek(1).kind == "percent" and self._paren_group_is_binder()
        )
        if not sugar:
            return self.parse_generic("scf.parallel", result_tokens, name_tok)
        iv_tokens = self._parse_iv_group()
        k = len(iv_tokens)
        self.expect_punct("=")
        lows = self._parse_operand_group(k, "lower bound")
        if not self.at_ident("to"):
            self.fail(f"found {self.tok.text!r}", expected="'to'")
        self.advance()
        ups = self._parse_operand_group(k, "upper bound")
        if not self.at_ident("step"):
            self.fail(f"found {self.tok.text!r}", expected="'step'")
        self.advance()
        steps = self._parse_operand_group(k, "step")
        inits: list[Value] = []
        if self.at_ident("init"):
            self.advance()
            inits = self.parse_operand_list_parens()
        attrs = self.parse_attr_dict() if self.looks_like_attr_dict() else {}
        attrs["dims"] = k
        ivs = [Value(INDEX) for _ in iv_tokens]
        op = Operation("scf.parallel", [*lows, *ups, *steps, *inits],
                       [v.type for v in inits], attrs)
        op.add_region(self.parse_region(ivs, iv_tokens))
        return self.finish_op(op, result_tokens)

    def _token_after_paren_group(self) -> Token | None:
        """The token following the `( ... )` group starting at the cursor."""
        depth = 0
        i = self.idx
        while i < len(self.tokens):
            t = self.tokens[i]
            if t.kind == "punct" and t.text == "(":
                depth += 1
            elif t.kind == "punct" and t.text == ")":
                depth -= 1
                if depth == 0:
                    return self.tokens[min(i + 1, len(self.tokens) - 1)]
            elif t.kind == "eof":
                return None
            i += 1
        return None

    def _paren_group_is_binder(self) -> bool:
        nxt = self._token_after_paren_group()
        return nxt is not None and nxt.kind == "punct" and nxt.text == "="

    def _op_scf_for(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        if self.tok.kind != "percent":
            return self.parse_generic("scf.for", result_tokens, name_tok)
        iv_tok = self.advance()
        self.expect_punct("=")
        lo = self.parse_operand()
        if not self.at_ident("to"):
            self.fail(f"found {self.tok.text!r}", expected="'to'")
        self.advance()
        hi = self.parse_operand()
        if not self.at_ident("step"):
            self.fail(f"found {self.tok.text!r}", expected="'step'")
        self.advance()
        step = self.parse_operand()
        op = Operation("scf.for", [lo, hi, step])
        op.add_region(self.parse_region([Value(INDEX)], [iv_tok]))
        return self.finish_op(op, result_tokens)

    def _op_scf_if(self, result_tokens: list[Token], name_tok: Token) -> Operation:
        if self.tok.kind != "percent":
            return self.parse_generic("scf.if", result_tokens, name_tok)
        cond = self.parse_operand()
        op = Operation("scf.if", [cond])
        op.add_region(self.parse_region([], []))
        if self.at_ident("else"):
            self.advance()
            op.add_region(self.parse_region([], []))
        return self.finish_op(op, result_tokens)

    # sugar: kokkos loops -----------------------------------------------------------

    def _kokkos_loop(self, name: str, result_tokens: list[Token], name_tok: Token,
                     team_handle_arg: bool) -> Operation:
        after = self._token_after_paren_group() if self.at_punct("(") else None
        sugar = after is not None and after.kind == "ident" and after.text == "in"
        if not sugar:
            return self.parse_generic(name, result_tokens, name_tok)
        iv_tokens = self._parse_iv_group()
        if not self.at_ident("in"):
            self.fail(f"found {self.tok.text!r}", expected="'in'")
        self.advance()
        bounds = self.parse_operand_list_parens()
        attrs: dict = {"dims": len(bounds)}
        operands = list(bounds)
        if self.at_ident("team_size"):
            self.advance()
            self.expect_punct("(")
            operands.append(self.parse_operand())
            self.expect_punct(")")
            attrs["has_team_size_hint"] = 1
        if self.at_ident("vector_length"):
            self.advance()
            self.expect_punct("(")
            operands.append(self.parse_operand())
            self.expect_punct(")")
            attrs["has_vector_length_hint"] = 1
        inits: list[Value] = []
        if self.at_ident("init"):
            self.advance()
            inits = self.parse_operand_list_parens()
            operands.extend(inits)
        if self.looks_like_attr_dict():
            attrs.update(self.parse_attr_dict())
            attrs["dims"] = len(bounds)
        arg_values = [Value(INDEX) for _ in iv_tokens]
        if team_handle_arg and len(arg_values) == 2:
            arg_values[1] = Value(TeamHandleType())
        op = Operation(name, operands, [v.type for v in inits], attrs)
        op.add_region(self.parse_region(arg_values, iv_tokens))
        return self.finish_op(op, result_tokens)

    def _op_kokkos_range_parallel(self, result_tokens, name_tok):
        return self._kokkos_loop("kokkos.range_parallel", result_tokens, name_tok, False)

    def _op_kokkos_team_parallel(self, result_tokens, name_tok):
        return self._kokkos_loop("kokkos.team_parallel", result_tokens, name_tok, True)

    def _op_kokkos_thread_parallel(self, result_tokens, name_tok):
        return self._kokkos_loop("kokkos.thread_parallel", result_tokens, name_tok, False)

    # --- top level ---------------------------------------------------------------

    def parse_program(self) -> Program:
        self.push_scope()
        ops: list[Operation] = []
        wrapped = False
        if self.at_ident("module"):
            self.advance()
            self.expect_punct("{")
            wrapped = True
        while True:
            if self.tok.kind == "eof":
                if wrapped:
                    self.fail("unterminated module", expected="'}'")
                break
            if wrapped and self.at_punct("}"):
                self.advance()
                break
            op = self.parse_op()
            if op.name not in ("func.func", "memref.global"):
                self.fail(f"op {op.name} not allowed at top level",
                          token=self.tokens[max(self.idx - 1, 0)])
            ops.append(op)
        if wrapped and self.tok.kind != "eof":
            self.fail("content after module close")
        self.pop_scope()
        return Program(ops)


def parse(text: str, base_dir: str | None = None) -> Program:
    """Parse textual IR; raises ParseFailure (with locations) on any error.

    On success the returned program passes the structural verifier."""
    try:
        program = _Parser(text, base_dir).parse_program()
    except RecursionError:
        raise ParseFailure([ParseError(SourceSpan(0, 0, 1, 1), "nesting too deep")]) from None
    diags = verify(program)
    if diags:
        errors = []
        for d in diags:
            span = d.op.span if d.op is not None and d.op.span is not None else SourceSpan(0, 0, 1, 1)
            errors.append(ParseError(span, d.message))
        raise ParseFailure(errors)
    return program


def parse_file(path: str) -> Program:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return parse(text, base_dir=os.path.dirname(os.path.abspath(path)))
