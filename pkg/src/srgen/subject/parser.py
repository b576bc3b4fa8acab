"""Recursive-descent parser and static checker for ``.sub`` subject files."""
from __future__ import annotations

from .lexer import (
    DuplicateError, KindError, ParseError, ResolutionError, TokenStream,
    tokenize, unescape,
)
from .nodes import (
    ARITH_OPS, CONSTRUCTOR, NUMERIC, VALUE_KINDS, Assign, Binary, Call,
    ExprStmt, FieldAssign, FieldDecl, FieldRef, If, Literal, MethodDecl, Name,
    Param, Return, SubjectUnit, Throw, Unary, VarDecl, While,
)

# lowest to highest
_PRECEDENCE = [("||",), ("&&",), ("==", "!="), ("<", "<=", ">", ">="), ("+", "-"), ("*", "/", "%")]


def parse_subject(source: str, path: str | None = None) -> SubjectUnit:
    """Parse and check subject source. Raises a SubjectError subclass on failure."""
    unit = _Parser(TokenStream(tokenize(source))).subject()
    unit.source_path = path
    Checker(unit).check()
    return unit


def parse_subject_file(path) -> SubjectUnit:
    with open(path, encoding="utf-8") as fh:
        return parse_subject(fh.read(), str(path))


class _Parser:
    def __init__(self, ts: TokenStream):
        self.ts = ts
        self._bid = 0
        self._decl = ""

    # -- declarations --------------------------------------------------------

    def subject(self) -> SubjectUnit:
        ts = self.ts
        ts.expect("unit")
        name = ts.expect_type("ident", "identifier").text
        ts.expect("{")
        fields = []
        while ts.at("field") or ts.at("public"):
            public = ts.accept("public")
            ts.expect("field")
            fname = ts.expect_type("ident", "identifier").text
            ts.expect(":")
            fields.append(FieldDecl(fname, self.kind(), public))
            ts.expect(";")
        if not ts.at("constructor"):
            tok = ts.peek()
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col,
                             expected=("field", "public", "constructor"))
        ctor = self.declaration(CONSTRUCTOR)
        methods = []
        while ts.at("method"):
            methods.append(self.declaration("method"))
        ts.expect("}")
        tok = ts.peek()
        if tok.type != "eof":
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col, expected=("<eof>",))
        return SubjectUnit(name, fields, ctor, methods)

    def declaration(self, keyword: str) -> MethodDecl:
        ts = self.ts
        start = ts.expect(keyword)
        if keyword == CONSTRUCTOR:
            name = CONSTRUCTOR
        else:
            name = ts.expect_type("ident", "method name").text
        ts.expect("(")
        params = []
        if not ts.at(")"):
            while True:
                pname = ts.expect_type("ident", "parameter name").text
                ts.expect(":")
                params.append(Param(pname, self.kind()))
                if not ts.accept(","):
                    break
        ts.expect(")")
        ret = None
        if keyword != CONSTRUCTOR and ts.accept(":"):
            ret = self.kind()
        self._bid = 0
        self._decl = name
        body = self.block()
        return MethodDecl(name, params, ret, body, pos=start.pos)

    def kind(self) -> str:
        tok = self.ts.peek()
        if tok.text in VALUE_KINDS or tok.type == "ident":
            return self.ts.next().text
        raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col,
                         expected=(*VALUE_KINDS, "unit name"))

    # -- statements ----------------------------------------------------------

    def block(self) -> list:
        self.ts.expect("{")
        stmts = []
        while not self.ts.at("}"):
            if self.ts.peek().type == "eof":
                tok = self.ts.peek()
                raise ParseError("unexpected end of input", tok.line, tok.col, expected=("}",))
            stmts.append(self.statement())
        self.ts.expect("}")
        return stmts

    def statement(self):
        ts = self.ts
        tok = ts.peek()
        if ts.at("var"):
            ts.next()
            name = ts.expect_type("ident", "identifier").text
            ts.expect(":")
            kind = self.kind()
            ts.expect("=")
            init = self.expr()
            ts.expect(";")
            return VarDecl(name, kind, init, pos=tok.pos)
        if ts.at("if"):
            return self.if_stmt()
        if ts.at("while"):
            ts.next()
            node = While(None, [], bid=self._next_bid(), pos=tok.pos)
            ts.expect("(")
            node.cond = self.expr()
            ts.expect(")")
            node.body = self.block()
            return node
        if ts.at("return"):
            ts.next()
            value = None if ts.at(";") else self.expr()
            ts.expect(";")
            return Return(value, pos=tok.pos)
        if ts.at("throw"):
            ts.next()
            msg = ts.expect_type("string", "string literal")
            ts.expect(";")
            return Throw(unescape(msg.text[1:-1]), pos=tok.pos)
        if ts.at("this") and ts.at(".", 1) and ts.peek(2).type == "ident" and ts.at("=", 3):
            ts.next(); ts.next()
            name = ts.next().text
            ts.expect("=")
            value = self.expr()
            ts.expect(";")
            return FieldAssign(name, value, pos=tok.pos)
        if tok.type == "ident" and ts.at("=", 1):
            ts.next(); ts.next()
            value = self.expr()
            ts.expect(";")
            return Assign(tok.text, value, pos=tok.pos)
        if tok.type in ("ident", "keyword") and (tok.type == "ident" or tok.text == "this"):
            expr = self.expr()
            ts.expect(";")
            if not isinstance(expr, Call):
                raise ParseError("expression statement must be a method call", tok.line, tok.col)
            return ExprStmt(expr, pos=tok.pos)
        raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col,
                         expected=("var", "if", "while", "return", "throw", "this", "identifier", "}"))

    def if_stmt(self) -> If:
        ts = self.ts
        tok = ts.expect("if")
        node = If(None, [], None, bid=self._next_bid(), pos=tok.pos)
        ts.expect("(")
        node.cond = self.expr()
        ts.expect(")")
        node.then = self.block()
        if ts.accept("else"):
            node.orelse = [self.if_stmt()] if ts.at("if") else self.block()
        return node

    def _next_bid(self) -> int:
        bid = self._bid
        self._bid += 1
        return bid

    # -- expressions ---------------------------------------------------------

    def expr(self, level: int = 0):
        if level == len(_PRECEDENCE):
            return self.unary()
        left = self.expr(level + 1)
        ops = _PRECEDENCE[level]
        while self.ts.peek().type == "op" and self.ts.peek().text in ops:
            tok = self.ts.next()
            right = self.expr(level + 1)
            left = Binary(tok.text, left, right, pos=tok.pos)
        return left

    def unary(self):
        tok = self.ts.peek()
        if tok.type == "op" and tok.text in ("-", "!"):
            self.ts.next()
            operand = self.unary()
            if tok.text == "-" and isinstance(operand, Literal) and operand.lit_kind in NUMERIC \
                    and not _negative(operand.value):
                return Literal(-operand.value, operand.lit_kind, pos=tok.pos)
            return Unary(tok.text, operand, pos=tok.pos)
        return self.primary()

    def primary(self):
        ts = self.ts
        tok = ts.next()
        if tok.type == "int":
            return Literal(int(tok.text), "int", pos=tok.pos)
        if tok.type == "float":
            return Literal(float(tok.text), "float", pos=tok.pos)
        if tok.type == "string":
            return Literal(unescape(tok.text[1:-1]), "string", pos=tok.pos)
        if tok.text in ("true", "false") and tok.type == "keyword":
            return Literal(tok.text == "true", "bool", pos=tok.pos)
        if tok.text == "(" and tok.type == "op":
            inner = self.expr()
            ts.expect(")")
            return inner
        if tok.text == "this" and tok.type == "keyword":
            ts.expect(".")
            name = ts.expect_type("ident", "member name").text
            if ts.at("("):
                return Call(None, name, self.args(), pos=tok.pos)
            return FieldRef(name, pos=tok.pos)
        if tok.type == "ident":
            if ts.at("."):
                ts.next()
                name = ts.expect_type("ident", "method name").text
                if not ts.at("("):
                    nxt = ts.peek()
                    raise ParseError("only method calls are allowed on unit references",
                                     nxt.line, nxt.col, expected=("(",))
                return Call(tok.text, name, self.args(), pos=tok.pos)
            return Name(tok.text, pos=tok.pos)
        raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col,
                         expected=("literal", "identifier", "this", "(", "-", "!"))

    def args(self) -> list:
        ts = self.ts
        ts.expect("(")
        args = []
        if not ts.at(")"):
            while True:
                args.append(self.expr())
                if not ts.accept(","):
                    break
        ts.expect(")")
        return args


def _negative(value) -> bool:
    # keeps ``--5`` as Unary(-, Literal(-5)) so printing stays unambiguous
    return value < 0 or (isinstance(value, float) and str(value).startswith("-"))


class Checker:
    """Resolves names and assigns kinds; annotates goal ids and inspectors."""

    def __init__(self, unit: SubjectUnit):
        self.unit = unit
        self.fields = {}
        self.methods = {}

    def check(self) -> None:
        unit = self.unit
        for f in unit.fields:
            if f.name in self.fields:
                raise DuplicateError(f"duplicate field '{f.name}'")
            self._check_kind(f.kind, (0, 0))
            if f.kind not in VALUE_KINDS:
                raise KindError(f"field '{f.name}' must have a value kind")
            self.fields[f.name] = f
        for decl in unit.declarations:
            if decl.name in self.methods:
                raise DuplicateError(f"duplicate method name '{decl.name}'", *decl.pos)
            self.methods[decl.name] = decl
            seen = set()
            for p in decl.params:
                if p.name in seen:
                    raise DuplicateError(f"duplicate parameter '{p.name}'", *decl.pos)
                seen.add(p.name)
                self._check_kind(p.kind, decl.pos)
            if decl.ret is not None:
                self._check_kind(decl.ret, decl.pos)
        for p in unit.constructor.params:
            if p.kind not in VALUE_KINDS:
                raise KindError("constructor parameters must have value kinds", *unit.constructor.pos)
        for decl in unit.declarations:
            scope = [{p.name: p.kind for p in decl.params}]
            self._block(decl.body, scope, decl)
        self._mark_inspectors()

    def _check_kind(self, kind: str, pos) -> None:
        if kind not in VALUE_KINDS and kind != self.unit.name:
            raise ResolutionError(kind, *pos, what="kind")

    # -- statements ----------------------------------------------------------

    def _block(self, stmts: list, scope: list, decl: MethodDecl) -> None:
        scope.append({})
        for s in stmts:
            self._stmt(s, scope, decl)
        scope.pop()

    def _lookup(self, scope: list, name: str):
        for frame in reversed(scope):
            if name in frame:
                return frame[name]
        return None

    def _stmt(self, s, scope: list, decl: MethodDecl) -> None:
        if isinstance(s, VarDecl):
            if self._lookup(scope, s.name) is not None:
                raise DuplicateError(f"duplicate local '{s.name}'", *s.pos)
            self._check_kind(s.var_kind, s.pos)
            self._expect(s.init, s.var_kind, scope, f"initializer of '{s.name}'")
            scope[-1][s.name] = s.var_kind
        elif isinstance(s, Assign):
            kind = self._lookup(scope, s.name)
            if kind is None:
                raise ResolutionError(s.name, *s.pos)
            self._expect(s.value, kind, scope, f"assignment to '{s.name}'")
        elif isinstance(s, FieldAssign):
            if s.name not in self.fields:
                raise ResolutionError(s.name, *s.pos, what="field")
            self._expect(s.value, self.fields[s.name].kind, scope, f"assignment to field '{s.name}'")
        elif isinstance(s, If):
            self._expect(s.cond, "bool", scope, "condition")
            s.gid_true, s.gid_false = branch_goal_ids(decl.name, s.bid)
            self._block(s.then, scope, decl)
            if s.orelse is not None:
                self._block(s.orelse, scope, decl)
        elif isinstance(s, While):
            self._expect(s.cond, "bool", scope, "condition")
            s.gid_true, s.gid_false = branch_goal_ids(decl.name, s.bid)
            self._block(s.body, scope, decl)
        elif isinstance(s, Return):
            if decl.ret is None and s.value is not None:
                raise KindError(f"'{decl.name}' returns no value", *s.pos)
            if decl.ret is not None:
                if s.value is None:
                    raise KindError(f"'{decl.name}' must return a {decl.ret}", *s.pos)
                self._expect(s.value, decl.ret, scope, "return value")
        elif isinstance(s, Throw):
            pass
        elif isinstance(s, ExprStmt):
            self._call(s.call, scope, allow_void=True)

    # -- expressions ---------------------------------------------------------

    def _expect(self, e, kind: str, scope: list, what: str) -> None:
        got = self._expr(e, scope)
        if got != kind:
            raise KindError(f"{what}: expected {kind}, got {got}", *e.pos)

    def _expr(self, e, scope: list) -> str:
        if isinstance(e, Literal):
            e.kind = e.lit_kind
        elif isinstance(e, Name):
            kind = self._lookup(scope, e.name)
            if kind is None:
                raise ResolutionError(e.name, *e.pos)
            e.kind = kind
        elif isinstance(e, FieldRef):
            if e.name not in self.fields:
                raise ResolutionError(e.name, *e.pos, what="field")
            e.kind = self.fields[e.name].kind
        elif isinstance(e, Call):
            e.kind = self._call(e, scope, allow_void=False)
        elif isinstance(e, Unary):
            inner = self._expr(e.operand, scope)
            if e.op == "-" and inner not in NUMERIC:
                raise KindError(f"operand of unary '-' must be numeric, got {inner}", *e.pos)
            if e.op == "!" and inner != "bool":
                raise KindError(f"operand of '!' must be bool, got {inner}", *e.pos)
            e.kind = inner
        elif isinstance(e, Binary):
            lk = self._expr(e.left, scope)
            rk = self._expr(e.right, scope)
            op = e.op
            if op in ARITH_OPS or op in ("<", "<=", ">", ">="):
                if lk not in NUMERIC or rk not in NUMERIC:
                    raise KindError(f"operands of '{op}' must be numeric, got {lk} and {rk}", *e.pos)
                e.operand_kind = "float" if "float" in (lk, rk) else "int"
                e.kind = e.operand_kind if op in ARITH_OPS else "bool"
            elif op in ("==", "!="):
                if lk in NUMERIC and rk in NUMERIC:
                    e.operand_kind = "float" if "float" in (lk, rk) else "int"
                elif lk == rk:
                    e.operand_kind = lk
                else:
                    raise KindError(f"cannot compare {lk} with {rk}", *e.pos)
                e.kind = "bool"
            else:
                if lk != "bool" or rk != "bool":
                    raise KindError(f"operands of '{op}' must be bool, got {lk} and {rk}", *e.pos)
                e.operand_kind = "bool"
                e.kind = "bool"
        return e.kind

    def _call(self, c: Call, scope: list, allow_void: bool):
        if c.target is not None:
            tkind = self._lookup(scope, c.target)
            if tkind is None:
                raise ResolutionError(c.target, *c.pos)
            if tkind != self.unit.name:
                raise KindError(f"'{c.target}' is not a unit reference", *c.pos)
        decl = self.methods.get(c.method)
        if decl is None or c.method == CONSTRUCTOR:
            raise ResolutionError(c.method, *c.pos, what="method")
        if len(c.args) != len(decl.params):
            raise KindError(f"'{c.method}' takes {len(decl.params)} arguments, got {len(c.args)}", *c.pos)
        for arg, p in zip(c.args, decl.params):
            self._expect(arg, p.kind, scope, f"argument '{p.name}' of '{c.method}'")
        if decl.ret is None and not allow_void:
            raise KindError(f"'{c.method}' returns no value", *c.pos)
        return decl.ret

    # -- inspectors ----------------------------------------------------------

    def _mark_inspectors(self) -> None:
        writes = {}
        calls = {}
        for decl in self.unit.declarations:
            w, c = _effects(decl.body)
            writes[decl.name] = w
            calls[decl.name] = c
        for m in self.unit.methods:
            if m.ret is None or m.params:
                m.is_inspector = False
                continue
            seen, stack, pure = set(), [m.name], True
            while stack:
                name = stack.pop()
                if name in seen:
                    continue
                seen.add(name)
                if writes[name]:
                    pure = False
                    break
                stack.extend(calls[name])
            m.is_inspector = pure


def branch_goal_ids(method: str, bid: int) -> tuple:
    return f"{method}:b{bid}:T", f"{method}:b{bid}:F"


def _effects(stmts: list):
    """(writes a field?, names of self-called methods) for a statement list."""
    from .walk import iter_nodes
    writes = False
    calls = set()
    for node in iter_nodes(stmts):
        if isinstance(node, FieldAssign):
            writes = True
        elif isinstance(node, Call) and node.target is None:
            calls.add(node.method)
    return writes, calls
