"""Readable test source: rendering suites and reading them back.

Tests are written in the subject language's expression syntax:

    test test_deposit_1 focal deposit {
        // arrange
        var v0: string = "";
        var v1: float = 100.0;
        var v2: BankAccount = new BankAccount(v0, v1);
        var v3: float = 50.0;
        // act
        v2.deposit(v3);
        // assert
        assert v2.getBalance() == 150.0 within 0.01;
    }

``assert #k completes;`` and ``assert #k throws "text";`` check the
exception status of statement k (1-based). A trailing ``[fallback]`` marks
an assertion kept only because mutation analysis selected nothing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .assertions import Assertion
from .chromosome import defined_kind, validate
from .runtime import INSPECTOR, RETURN, STATUS, Normal, Observation, Raised
from .subject.lexer import ParseError, Token, TokenStream, escape, tokenize, unescape
from .subject.nodes import VALUE_KINDS, SubjectUnit
from .testcase import (
    BASELINE, FOCAL, Assignment, Construct, FieldRead, MethodCall, Primitive, TestCase,
)

INDENT = "    "


@dataclass(frozen=True)
class RenderedTest:
    name: str
    source: str


@dataclass(frozen=True)
class RenderedSuite:
    subject: str
    representation: str
    tests: tuple

    @property
    def text(self) -> str:
        parts = [f"// srgen suite: subject={self.subject} representation={self.representation}\n"]
        for t in self.tests:
            parts.append("\n" + t.source)
        return "".join(parts)


def test_names(tests: list) -> list:
    """test_<focal>_<k> (k per focal method) or test_<k>, in suite order."""
    counts = {}
    names = []
    plain = 0
    for t in tests:
        if t.is_focal:
            counts[t.focal_method] = counts.get(t.focal_method, 0) + 1
            names.append(f"test_{t.focal_method}_{counts[t.focal_method]}")
        else:
            plain += 1
            names.append(f"test_{plain}")
    return names


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return f'"{escape(value)}"'
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def render_statement(st, unit: SubjectUnit) -> str:
    if isinstance(st, Primitive):
        return f"var v{st.var}: {st.kind} = {format_value(st.value)};"
    if isinstance(st, Construct):
        args = ", ".join(f"v{a}" for a in st.args)
        return f"var v{st.var}: {unit.name} = new {unit.name}({args});"
    if isinstance(st, FieldRead):
        return f"var v{st.var}: {defined_kind(unit, st)} = v{st.receiver}.{st.field};"
    if isinstance(st, MethodCall):
        call = f"v{st.receiver}.{st.method}({', '.join(f'v{a}' for a in st.args)})"
        if st.var is None:
            return f"{call};"
        return f"var v{st.var}: {defined_kind(unit, st)} = {call};"
    if isinstance(st, Assignment):
        return f"v{st.target} = v{st.source};"
    raise TypeError(f"unknown statement {st!r}")


def render_assertion(a: Assertion, test: TestCase) -> str:
    o = a.observation
    if o.kind == STATUS:
        body = (f'#{o.statement} throws "{escape(a.expected.text)}"'
                if isinstance(a.expected, Raised) else f"#{o.statement} completes")
    else:
        if o.kind == INSPECTOR:
            lhs = f"v{o.receiver}.{o.inspector}()"
        else:
            var = test.statements[o.statement - 1].var
            lhs = f"v{var}" if var is not None else f"#{o.statement}"
        if isinstance(a.expected, Raised):
            body = f'{lhs} throws "{escape(a.expected.text)}"'
        else:
            body = f"{lhs} == {format_value(a.expected.value)}"
            if isinstance(a.expected.value, float):
                body += f" within {format_value(float(a.tolerance))}"
    marker = " [fallback]" if a.fallback else ""
    return f"assert {body}{marker};"


def render_test(name: str, test: TestCase, assertions: list, unit: SubjectUnit,
                aaa_comments: bool = True) -> str:
    header = f"test {name} focal {test.focal_method} {{" if test.is_focal else f"test {name} {{"
    lines = [header]
    sections = aaa_comments and test.is_focal
    for i, st in enumerate(test.statements):
        if sections and i == 0 and len(test) > 1:
            lines.append(INDENT + "// arrange")
        if sections and i == len(test) - 1:
            lines.append(INDENT + "// act")
        lines.append(INDENT + render_statement(st, unit))
    if assertions and sections:
        lines.append(INDENT + "// assert")
    for a in assertions:
        lines.append(INDENT + render_assertion(a, test))
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_suite(entries: list, unit: SubjectUnit, representation: str,
                 aaa_comments: bool = True) -> RenderedSuite:
    """``entries`` expose .name, .test and .assertions."""
    tests = tuple(RenderedTest(e.name, render_test(e.name, e.test, e.assertions, unit, aaa_comments))
                  for e in entries)
    return RenderedSuite(unit.name, representation, tests)


# -- reading ------------------------------------------------------------------

@dataclass
class ParsedTest:
    name: str
    test: TestCase
    assertions: list


def parse_suite(text: str, unit: SubjectUnit, tolerance: Optional[float] = None) -> list:
    """Tests and assertions from rendered suite text, checked against ``unit``.

    ``tolerance`` applies to real-valued assertions written without
    ``within``. Assertion ids follow the ``t<i>.a<k>`` scheme used at generation time.
    """
    ts = TokenStream(tokenize(text))
    out = []
    while ts.peek().type != "eof":
        out.append(_TestReader(ts, unit, len(out), tolerance).read())
    names = [p.name for p in out]
    if len(set(names)) != len(names):
        raise ParseError("duplicate test names")
    return out


class _TestReader:
    def __init__(self, ts: TokenStream, unit: SubjectUnit, index: int,
                 tolerance: Optional[float] = None):
        self.ts = ts
        self.tolerance = tolerance or 0.0
        self.unit = unit
        self.index = index
        self.names = {}  # source variable name -> id

    def _ident(self, what: str) -> Token:
        tok = self.ts.peek()
        if tok.type not in ("ident", "keyword"):
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col, expected=(what,))
        return self.ts.next()

    def _var(self, define: bool = False) -> int:
        tok = self._ident("variable")
        if define:
            if tok.text in self.names:
                raise ParseError(f"variable {tok.text} defined twice", tok.line, tok.col)
            self.names[tok.text] = len(self.names)
        elif tok.text not in self.names:
            raise ParseError(f"unknown variable {tok.text}", tok.line, tok.col)
        return self.names[tok.text]

    def read(self) -> ParsedTest:
        ts = self.ts
        tok = ts.peek()
        if not ts.accept("test"):
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col, expected=("test",))
        name = self._ident("test name").text
        focal = None
        if ts.accept("focal"):
            focal = self._ident("method name").text
        ts.expect("{")
        stmts = []
        raw_asserts = []
        while not ts.at("}"):
            if ts.at("assert"):
                raw_asserts.append(self._assertion_tokens())
            else:
                if raw_asserts:
                    t = ts.peek()
                    raise ParseError("statements must precede assertions", t.line, t.col)
                stmts.append(self._statement())
        ts.expect("}")
        test = TestCase(FOCAL if focal else BASELINE, tuple(stmts), focal)
        problems = validate(test, self.unit, max(len(stmts), 1))
        if problems:
            raise ParseError(f"test {name}: {problems[0]}", tok.line, tok.col)
        assertions = [self._assertion(test, raw, k) for k, raw in enumerate(raw_asserts)]
        return ParsedTest(name, test, assertions)

    def _statement(self):
        ts = self.ts
        if ts.accept("var"):
            var = self._var(define=True)
            ts.expect(":")
            kind = self._ident("kind").text
            ts.expect("=")
            if ts.accept("new"):
                unit_name = self._ident("unit name").text
                if unit_name != self.unit.name:
                    raise ParseError(f"unknown unit {unit_name}")
                args = self._args()
                st = Construct(var, tuple(args))
            elif kind in VALUE_KINDS and not self._at_receiver():
                value = self._literal()
                st = Primitive(var, kind, _coerce(kind, value))
            else:
                recv = self._var()
                ts.expect(".")
                member = self._ident("member").text
                if ts.at("("):
                    st = MethodCall(var, recv, member, tuple(self._args()))
                else:
                    st = FieldRead(var, recv, member)
            ts.expect(";")
            if kind != defined_kind_safe(self.unit, st):
                raise ParseError(f"v{var} declared {kind} but statement yields "
                                 f"{defined_kind_safe(self.unit, st)}")
            return st
        target = self._var()
        if ts.accept("="):
            source = self._var()
            ts.expect(";")
            return Assignment(target, source)
        ts.expect(".")
        method = self._ident("method").text
        args = self._args()
        ts.expect(";")
        return MethodCall(None, target, method, tuple(args))

    def _at_receiver(self) -> bool:
        tok = self.ts.peek()
        return tok.type == "ident" and tok.text in self.names and self.ts.at(".", 1)

    def _args(self) -> list:
        ts = self.ts
        ts.expect("(")
        args = []
        if not ts.at(")"):
            args.append(self._var())
            while ts.accept(","):
                args.append(self._var())
        ts.expect(")")
        return args

    def _literal(self):
        ts = self.ts
        tok = ts.peek()
        neg = ts.accept("-")
        tok = ts.next()
        if tok.type == "int":
            v = int(tok.text)
        elif tok.type == "float":
            v = float(tok.text)
        elif tok.type == "ident" and tok.text in ("inf", "nan"):
            v = float(tok.text)
        elif tok.text in ("true", "false") and not neg:
            return tok.text == "true"
        elif tok.type == "string" and not neg:
            return unescape(tok.text[1:-1])
        else:
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col, expected=("literal",))
        return -v if neg else v

    def _assertion_tokens(self) -> tuple:
        ts = self.ts
        start = ts.next()
        ref = None
        if ts.accept("#"):
            ref = ("stmt", int(ts.expect_type("int", "statement number").text))
        else:
            var_tok = self._ident("variable")
            if ts.accept("."):
                insp = self._ident("inspector").text
                ts.expect("(")
                ts.expect(")")
                ref = ("inspector", var_tok, insp)
            else:
                ref = ("var", var_tok)
        if ts.accept("completes"):
            check = ("completes",)
        elif ts.accept("throws"):
            check = ("throws", unescape(ts.expect_type("string", "exception text").text[1:-1]))
        else:
            ts.expect("==")
            value = self._literal()
            tol = None
            if ts.accept("within"):
                tol = float(self._literal())
            check = ("equals", value, tol)
        fallback = False
        if ts.accept("["):
            ts.expect("fallback")
            ts.expect("]")
            fallback = True
        ts.expect(";")
        return start, ref, check, fallback

    def _assertion(self, test: TestCase, raw, k: int) -> Assertion:
        start, ref, check, fallback = raw
        n = len(test)
        if ref[0] == "inspector":
            tok = ref[1]
            if tok.text not in self.names:
                raise ParseError(f"unknown variable {tok.text}", tok.line, tok.col)
            insp = {m.name: m for m in self.unit.inspectors}.get(ref[2])
            if insp is None:
                raise ParseError(f"{ref[2]} is not an inspector of {self.unit.name}",
                                 start.line, start.col)
            obs_kind, stmt, recv, name, vkind = INSPECTOR, n, self.names[tok.text], insp.name, insp.ret
        else:
            if ref[0] == "stmt":
                stmt = ref[1]
            else:
                tok = ref[1]
                if tok.text not in self.names:
                    raise ParseError(f"unknown variable {tok.text}", tok.line, tok.col)
                var = self.names[tok.text]
                stmt = next(i for i, st in enumerate(test.statements, 1) if st.var == var)
            if not 1 <= stmt <= n:
                raise ParseError(f"statement #{stmt} out of range", start.line, start.col)
            recv = name = None
            if check[0] == "equals":
                obs_kind, vkind = RETURN, defined_kind_safe(self.unit, test.statements[stmt - 1])
            else:
                obs_kind, vkind = STATUS, None
        if check[0] == "completes":
            expected = Normal(None)
        elif check[0] == "throws":
            expected = Raised(check[1])
        else:
            expected = Normal(_coerce(vkind, check[1]))
        tol = 0.0
        if check[0] == "equals" and isinstance(expected.value, float):
            tol = check[2] if check[2] is not None else self.tolerance
        obs = Observation(obs_kind, stmt, recv, name, expected, vkind)
        return Assertion(f"t{self.index}.a{k}", obs, expected, tol, fallback)


def defined_kind_safe(unit: SubjectUnit, st) -> Optional[str]:
    try:
        return defined_kind(unit, st)
    except KeyError:
        return None


def _coerce(kind: Optional[str], value):
    if kind == "float" and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    return value
