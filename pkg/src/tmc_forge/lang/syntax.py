"""Concrete syntax: lexer, recursive-descent parser and pretty-printer.

Sugar (pairs, lists, ``::``, ``match``, ``;``, ``_?``, pair parameters) is
expanded while parsing, so parsed programs only contain core nodes plus
``Annotated`` call wrappers.  The printer emits text that parses back to
the structurally identical program.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    ADD, CONS, MUL, NIL, PAIR, UNIT, Annotated, BinOp, Block, BlockDet, Bool,
    Call, Def, Eq, Expr, Fnptr, Idx, If, Int, Let, Load, Loc, Program, Store,
    Tag, Unit, Var, seq,
)
from .names import Fresh


class ParseError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class UnknownAnnotation(ParseError):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\(\*)
  | (?P<int>-?[0-9]+)
  | (?P<idx>~[0-9]+)
  | (?P<hole>_\?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*(?:%[0-9]+|\.[A-Za-z_][A-Za-z0-9_']*)*)
  | (?P<tag>\#[A-Za-z_][A-Za-z0-9_]*)
  | (?P<placeholder>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>\[@|\.\[|<-|==|::|->|[()\[\],;=|&@+*])
    """,
    re.VERBOSE,
)

KEYWORDS = {
    "fun", "let", "in", "if", "then", "else", "match", "with", "end",
    "block", "true", "false",
}


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str):
    """Split ``text`` into tokens; returns ``(tokens, directives)``.

    Directives are comments of the form ``(*! ... *)``.
    """
    tokens, directives = [], []
    i, line, line_start = 0, 1, 0
    n = len(text)
    while i < n:
        m = _TOKEN_RE.match(text, i)
        col = i - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        if kind == "comment":
            depth, j = 1, i + 2
            while depth and j < n:
                if text.startswith("(*", j):
                    depth, j = depth + 1, j + 2
                elif text.startswith("*)", j):
                    depth, j = depth - 1, j + 2
                else:
                    j += 1
            if depth:
                raise ParseError("unterminated comment", line, col)
            body = text[i + 2:j - 2]
            if body.startswith("!"):
                directives.append(body[1:].strip())
            end = j
        else:
            end = m.end()
            if kind != "ws":
                tok_text = m.group()
                if kind == "ident" and tok_text in KEYWORDS:
                    kind = "kw"
                tokens.append(Token(kind, tok_text, line, col))
        chunk = text[i:end]
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = i + chunk.rfind("\n") + 1
        i = end
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens, directives


class Parser:
    def __init__(self, text: str, ints: bool | None = None, placeholders=None):
        self.tokens, self.directives = tokenize(text)
        self.i = 0
        self.fresh = Fresh()
        for t in self.tokens:
            if t.kind == "ident":
                self.fresh.avoid([t.text])
        self.ints = ints
        self.scope: list = []
        self.placeholders = placeholders or {}

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("sym", "kw")

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            self.error(f"expected identifier, found {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    def binder(self) -> str:
        if self.tok.kind == "ident" and self.tok.text == "_":
            self.i += 1
            return "_"
        return self.ident()

    # programs
    def program(self) -> Program:
        ints = False
        if self.at("@") and self.peek().text == "ints":
            self.advance()
            self.advance()
            ints = True
        if self.ints is None:
            self.ints = ints
        defs = {}
        while self.tok.kind != "eof":
            start = self.tok
            name, d = self.definition()
            if name in defs:
                raise ParseError(f"duplicate definition of {name}", start.line, start.col)
            defs[name] = d
        return Program(defs, bool(self.ints))

    def definition(self):
        tmc = False
        if self.at("@"):
            self.advance()
            t = self.tok
            attr = self.ident()
            if attr != "tmc":
                raise UnknownAnnotation(f"unknown definition attribute @{attr}", t.line, t.col)
            tmc = True
        self.expect("fun")
        name = self.ident()
        if self.at("("):
            self.advance()
            x1 = self.binder()
            self.expect(",")
            x2 = self.binder()
            self.expect(")")
            param = self.fresh("p")
            self.expect("=")
            self.scope.append({param, x1, x2})
            body = self.expr()
            self.scope.pop()
            body = _unpack(Var(param), x1, x2, body)
        else:
            param = self.binder()
            self.expect("=")
            self.scope.append({param})
            body = self.expr()
            self.scope.pop()
        return name, Def(param, body, tmc)

    def bound(self, name: str) -> bool:
        return any(name in s for s in self.scope)

    # expressions
    def expr(self) -> Expr:
        left = self.assign()
        if self.at(";"):
            self.advance()
            return seq(left, self.expr())
        return left

    def assign(self) -> Expr:
        t = self.tok
        left = self.cmp()
        if self.at("<-"):
            if not isinstance(left, Load):
                self.error("left-hand side of <- must be a field access e.[i]", t)
            self.advance()
            return Store(left.block, left.index, self.assign())
        return left

    def cmp(self) -> Expr:
        left = self.cons()
        if self.at("=="):
            self.advance()
            return Eq(left, self.cons())
        return left

    def cons(self) -> Expr:
        left = self.add()
        if self.at("::"):
            self.advance()
            return Block(CONS, left, self.cons())
        return left

    def add(self) -> Expr:
        left = self.mul()
        while self.at("+"):
            self.require_ints()
            self.advance()
            left = BinOp(ADD, left, self.mul())
        return left

    def mul(self) -> Expr:
        left = self.postfix()
        while self.at("*"):
            self.require_ints()
            self.advance()
            left = BinOp(MUL, left, self.postfix())
        return left

    def require_ints(self):
        if not self.ints:
            self.error("arithmetic requires the @ints extension")

    def postfix(self) -> Expr:
        t = self.tok
        if t.kind == "ident" and self.peek().text == "(" and t.text != "_" \
                and not self.bound(t.text):
            self.advance()
            e: Expr = Fnptr(t.text)
        else:
            e = self.primary()
        while True:
            if self.at("("):
                self.advance()
                arg = self.tuple_body(")")
                e = Call(e, arg, (t.line, t.col))
            elif self.at(".["):
                self.advance()
                e = Load(e, self.index())
                self.expect("]")
            elif self.at("[@"):
                at = self.advance()
                name = self.ident()
                if name != "tailcall":
                    raise UnknownAnnotation(f"unknown attribute [@{name}]", at.line, at.col)
                flag = True
                if self.at("false"):
                    self.advance()
                    flag = False
                elif self.at("true"):
                    self.advance()
                self.expect("]")
                if not isinstance(e, Call):
                    raise ParseError("[@tailcall] only applies to calls", at.line, at.col)
                e = Annotated(e, flag)
            else:
                return e

    def index(self) -> Expr:
        t = self.tok
        if t.kind == "int" and t.text in ("0", "1", "2"):
            self.advance()
            return Idx(int(t.text))
        return self.expr()

    def tuple_body(self, close: str) -> Expr:
        if self.at(close):
            self.advance()
            return UNIT
        items = [self.expr()]
        while self.at(","):
            self.advance()
            items.append(self.expr())
        self.expect(close)
        out = items[-1]
        for it in reversed(items[:-1]):
            out = Block(PAIR, it, out)
        return out

    def primary(self) -> Expr:
        t = self.tok
        k = t.kind
        if k == "int":
            self.advance()
            n = int(t.text)
            if self.ints:
                return Int(n)
            if n in (0, 1, 2) and not t.text.startswith("-"):
                return Idx(n)
            self.error("integer literals require the @ints extension", t)
        if k == "idx":
            self.advance()
            n = int(t.text[1:])
            if n not in (0, 1, 2):
                self.error("block index must be 0, 1 or 2", t)
            return Idx(n)
        if k == "hole":
            self.advance()
            return UNIT
        if k == "tag":
            self.advance()
            return Tag(t.text[1:])
        if k == "placeholder":
            self.advance()
            if t.text not in self.placeholders:
                self.error(f"unknown placeholder {t.text}", t)
            return self.placeholders[t.text]
        if k == "ident":
            self.advance()
            if t.text == "_":
                self.error("_ cannot be used as a variable", t)
            return Var(t.text)
        if k == "kw":
            if t.text in ("true", "false"):
                self.advance()
                return Bool(t.text == "true")
            if t.text == "let":
                return self.let()
            if t.text == "if":
                self.advance()
                c = self.expr()
                self.expect("then")
                a = self.expr()
                self.expect("else")
                b = self.expr()
                return If(c, a, b)
            if t.text == "match":
                return self.match()
            if t.text == "block":
                self.advance()
                tag = self.tok
                if tag.kind != "tag":
                    self.error("expected #tag after block")
                self.advance()
                self.expect("(")
                a = self.expr()
                self.expect(",")
                b = self.expr()
                self.expect(")")
                return Block(tag.text[1:], a, b)
        if self.at("("):
            self.advance()
            return self.tuple_body(")")
        if self.at("["):
            self.advance()
            if self.at("]"):
                self.advance()
                return NIL
            items = [self.expr()]
            while self.at(","):
                self.advance()
                items.append(self.expr())
            self.expect("]")
            out: Expr = NIL
            for it in reversed(items):
                out = Block(CONS, it, out)
            return out
        if self.at("&"):
            self.advance()
            return Fnptr(self.ident())
        if self.at("@"):
            self.advance()
            name = self.ident()
            if not self.at("("):
                self.error("expected ( after @function")
            return Fnptr(name)
        self.error(f"unexpected {t.text or 'end of input'!r}")

    def let(self) -> Expr:
        self.expect("let")
        if self.at("("):
            self.advance()
            x1 = self.binder()
            self.expect(",")
            x2 = self.binder()
            self.expect(")")
            self.expect("=")
            bound = self.expr()
            self.expect("in")
            self.scope.append({x1, x2})
            body = self.expr()
            self.scope.pop()
            y = self.fresh("y")
            return Let(y, bound, _unpack(Var(y), x1, x2, body))
        x = self.binder()
        self.expect("=")
        bound = self.expr()
        self.expect("in")
        self.scope.append({x})
        body = self.expr()
        self.scope.pop()
        return Let(x, bound, body)

    def match(self) -> Expr:
        self.expect("match")
        scrut = self.expr()
        self.expect("with")
        if self.at("|"):
            self.advance()
        self.expect("[")
        self.expect("]")
        self.expect("->")
        on_nil = self.expr()
        self.expect("|")
        x = self.binder()
        self.expect("::")
        xs = self.binder()
        self.expect("->")
        self.scope.append({x, xs})
        on_cons = self.expr()
        self.scope.pop()
        self.expect("end")
        y = self.fresh("y")
        return Let(y, scrut, If(Eq(Var(y), NIL), on_nil, _unpack(Var(y), x, xs, on_cons)))


def _unpack(y: Var, x1: str, x2: str, body: Expr) -> Expr:
    # ``y`` is always a fresh variable here, so it cannot be shadowed by x1.
    return Let(x1, Load(y, Idx(1)), Let(x2, Load(y, Idx(2)), body))


def parse_program(text: str) -> Program:
    return Parser(text).program()


def parse_file(text: str):
    """Parse a program and return ``(program, directives)``."""
    p = Parser(text)
    prog = p.program()
    return prog, p.directives


def parse_expr(text: str, ints: bool = False, placeholders=None, fresh_start: int = 0) -> Expr:
    p = Parser(text, ints=ints, placeholders=placeholders)
    p.fresh.counter = max(p.fresh.counter, fresh_start)
    e = p.expr()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    return e


# ---------------------------------------------------------------- printing

_PREFIX = 0
_ASSIGN = 1
_CMP = 2
_CONS = 3
_ADD = 4
_MUL = 5
_POSTFIX = 6
_ATOM = 7


class Printer:
    def __init__(self, ints: bool = False, fnames=(), holes: bool = True):
        self.ints = ints
        self.fnames = set(fnames)
        self.holes = holes

    def value(self, v, index_pos: bool = False) -> str:
        if isinstance(v, Unit):
            return "()"
        if isinstance(v, Bool):
            return "true" if v.value else "false"
        if isinstance(v, Idx):
            if self.ints and not index_pos:
                return f"~{v.value}"
            return str(v.value)
        if isinstance(v, Int):
            return str(v.value)
        if isinstance(v, Tag):
            return f"#{v.name}"
        if isinstance(v, Fnptr):
            return f"&{v.name}"
        if isinstance(v, Loc):
            return f"<loc {v.id}>"
        raise TypeError(v)

    def expr(self, e: Expr, level: int = _PREFIX, indent: int = 0, scope=frozenset()) -> str:
        s, prec = self._expr(e, level, indent, scope)
        if prec < level:
            return f"({s})"
        return s

    def _expr(self, e, level, ind, scope):
        pad = "  " * ind
        if isinstance(e, Unit):
            return "()", _ATOM
        if isinstance(e, (Bool, Idx, Int, Tag, Fnptr, Loc)):
            s = self.value(e)
            return s, _ATOM
        if isinstance(e, Var):
            return e.name, _ATOM
        if isinstance(e, Let):
            if level > _PREFIX:
                ind += 1
                pad = "  " * ind
            if e.name == "_":
                first = self.expr(e.bound, _ASSIGN, ind, scope)
                rest = self.expr(e.body, _PREFIX, ind, scope)
                return f"{first};\n{pad}{rest}", _PREFIX
            bound = self.bound(e, ind, scope)
            body = self.expr(e.body, _PREFIX, ind, scope | {e.name})
            return f"let {e.name} = {bound} in\n{pad}{body}", _PREFIX
        if isinstance(e, If):
            inner_pad = "  " * (ind + 1)
            c = self.expr(e.cond, _PREFIX, ind + 1, scope)
            a = self.expr(e.then, _PREFIX, ind + 1, scope)
            b = self.expr(e.orelse, _PREFIX, ind + 1, scope)
            return f"if {c} then\n{inner_pad}{a}\n{pad}else\n{inner_pad}{b}", _PREFIX
        if isinstance(e, Store):
            blk = self.expr(e.block, _POSTFIX, ind, scope)
            idx = self.index(e.index, ind, scope)
            val = self.expr(e.value, _CMP, ind, scope)
            return f"{blk}.[{idx}] <- {val}", _ASSIGN
        if isinstance(e, Eq):
            return f"{self.expr(e.left, _CONS, ind, scope)} == {self.expr(e.right, _CONS, ind, scope)}", _CMP
        if isinstance(e, Block) and e.tag == CONS:
            items, tail = [], e
            while isinstance(tail, Block) and tail.tag == CONS:
                items.append(tail.first)
                tail = tail.second
            parts = [self.expr(x, _ADD, ind, scope) for x in items]
            if isinstance(tail, Unit):
                parts.append("[]")
            else:
                parts.append(self.expr(tail, _CONS, ind, scope))
            return " :: ".join(parts), _CONS
        if isinstance(e, Block) and e.tag == PAIR:
            return f"({self.expr(e.first, _PREFIX, ind, scope)}, {self.expr(e.second, _PREFIX, ind, scope)})", _ATOM
        if isinstance(e, Block):
            return (f"block #{e.tag} ({self.expr(e.first, _PREFIX, ind, scope)}, "
                    f"{self.expr(e.second, _PREFIX, ind, scope)})"), _ATOM
        if isinstance(e, BlockDet):  # runtime only; printed for diagnostics like locations
            return (f"<det #{e.tag} ({self.expr(e.first, _PREFIX, ind, scope)}, "
                    f"{self.expr(e.second, _PREFIX, ind, scope)})>"), _ATOM
        if isinstance(e, BinOp):
            lvl = _ADD if e.op == ADD else _MUL
            return (f"{self.expr(e.left, lvl, ind, scope)} {e.op} "
                    f"{self.expr(e.right, lvl + 1, ind, scope)}"), lvl
        if isinstance(e, Load):
            return f"{self.expr(e.block, _POSTFIX, ind, scope)}.[{self.index(e.index, ind, scope)}]", _POSTFIX
        if isinstance(e, Call):
            if isinstance(e.fn, Fnptr) and e.fn.name not in scope:
                fn = e.fn.name
            else:
                fn = self.expr(e.fn, _POSTFIX, ind, scope)
            if isinstance(e.arg, Unit):
                args = ""
            elif isinstance(e.arg, Block) and e.arg.tag == PAIR:
                args = (f"{self.expr(e.arg.first, _PREFIX, ind, scope)}, "
                        f"{self.expr(e.arg.second, _PREFIX, ind, scope)}")
            else:
                args = self.expr(e.arg, _PREFIX, ind, scope)
            return f"{fn}({args})", _POSTFIX
        if isinstance(e, Annotated):
            attr = "[@tailcall]" if e.tailcall else "[@tailcall false]"
            return f"{self.expr(e.expr, _POSTFIX, ind, scope)}{attr}", _POSTFIX
        raise TypeError(f"cannot print {e!r}")

    def bound(self, e: Let, ind, scope) -> str:
        b = e.bound
        if self.holes and isinstance(b, Block) and "%" in e.name and (
                isinstance(b.first, Unit) or isinstance(b.second, Unit)):
            first = "_?" if isinstance(b.first, Unit) else self.expr(b.first, _ADD, ind, scope)
            second = "_?" if isinstance(b.second, Unit) else self.expr(b.second, _CONS, ind, scope)
            if b.tag == CONS:
                return f"{first} :: {second}"
            if b.tag == PAIR:
                return f"({first}, {second})"
            return f"block #{b.tag} ({first}, {second})"
        return self.expr(b, _PREFIX, ind + 1, scope)

    def index(self, e, ind, scope) -> str:
        if isinstance(e, Idx):
            return self.value(e, index_pos=True)
        return self.expr(e, _PREFIX, ind, scope)

    def definition(self, name: str, d: Def) -> str:
        head = "@tmc\n" if d.annotated_tmc else ""
        body = self.expr(d.body, _PREFIX, 1, frozenset({d.param}))
        return f"{head}fun {name} {d.param} =\n  {body}\n"


def print_program(p: Program, holes: bool = True) -> str:
    pr = Printer(p.ints, p.defs, holes)
    out = ["@ints\n"] if p.ints else []
    out += [pr.definition(name, d) for name, d in p.defs.items()]
    return "\n".join(out)


def print_expr(e: Expr, ints: bool = False) -> str:
    return Printer(ints).expr(e)


def print_value(v, ints: bool = False) -> str:
    return Printer(ints).value(v)
