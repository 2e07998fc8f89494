"""Reader for the Prolog-style CHC text format.

Grammar::

    clause   ::= atom [":-" bodyitem ("," bodyitem)*] "."
    bodyitem ::= atom | expr relop expr
    relop    ::= "=" | "<" | ">" | "=<" | ">="

``<-``/``←`` are accepted for ``:-`` and ``<=``/``≤``/``≥`` for the
orderings, so listings can be pasted in as written.  Arguments that are not
distinct variables are replaced by fresh variables plus equalities.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .syntax import (
    FALSE,
    Atom,
    Clause,
    ConstrainedFact,
    Constraint,
    Lin,
    Opaque,
    Poly,
    Program,
    Variable,
    fresh,
    render_program,
    standard_fact,
)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<num>\d+(?:\.\d+)?)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<op>:-|<-|←|=<|>=|<=|≤|≥|<|>|=|\+|-|\*|/|\(|\)|,|\.)
""", re.VERBOSE)

_REL = {"=": "=", "<": "<", ">": ">", "=<": "<=", "<=": "<=", "≤": "<=", ">=": ">=", "≥": ">="}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            toks.append(_Tok(kind, s, line, pos - line_start + 1))
        nl = s.count("\n")
        if nl:
            line += nl
            line_start = pos + s.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.scope: dict[str, Variable] = {}

    # token helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.tok.line, self.tok.col)

    def accept(self, *texts: str) -> str | None:
        if self.tok.kind == "op" and self.tok.text in texts:
            self.i += 1
            return self.toks[self.i - 1].text
        return None

    def expect(self, *texts: str) -> str:
        got = self.accept(*texts)
        if got is None:
            raise self.error(f"expected {' or '.join(map(repr, texts))}, got {self.tok.text or 'end of input'!r}")
        return got

    # grammar
    def clauses(self) -> list[tuple[Clause, int]]:
        out = []
        while self.tok.kind != "eof":
            line = self.tok.line
            out.append((self.clause(), line))
        return out

    def clause(self) -> Clause:
        self.scope = {}
        eqs: list = []
        head = self.atom(eqs)
        atoms = []
        false = False
        if self.accept(":-", "<-", "←"):
            while True:
                item = self.body_item(eqs)
                if item is FALSE:
                    false = True
                elif isinstance(item, Atom):
                    atoms.append(item)
                elif item is not None:
                    eqs.append(item)
                if not self.accept(","):
                    break
        self.expect(".")
        constraint = FALSE if false else Constraint(tuple(eqs))
        return Clause(head, constraint, tuple(atoms))

    def body_item(self, eqs: list):
        t = self.tok
        if t.kind == "ident":
            if t.text == "true" and not self._next_is("("):
                self.i += 1
                return None
            if t.text == "false" and not self._next_is("("):
                self.i += 1
                return FALSE
            return self.atom(eqs)
        lhs = self.expr()
        if self.tok.kind == "op" and self.tok.text == "<-":
            # "X<-1" is "X < -1" inside a body
            t = self.tok
            self.toks[self.i:self.i + 1] = [_Tok("op", "<", t.line, t.col), _Tok("op", "-", t.line, t.col + 1)]
        op = self.tok.text if self.tok.kind == "op" else ""
        if op not in _REL:
            raise self.error(f"expected a relation, got {self.tok.text or 'end of input'!r}")
        self.i += 1
        rhs = self.expr()
        return relation(lhs, _REL[op], rhs)

    def _next_is(self, text: str) -> bool:
        n = self.toks[self.i + 1]
        return n.kind == "op" and n.text == text

    def atom(self, eqs: list) -> Atom:
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected a predicate name, got {t.text or 'end of input'!r}")
        self.i += 1
        args: list[Variable] = []
        if self.accept("("):
            if not self.accept(")"):
                while True:
                    e = self.expr()
                    args.append(self._arg_var(e, args, eqs))
                    if self.accept(")"):
                        break
                    self.expect(",")
        return Atom(t.text, tuple(args))

    def _arg_var(self, e: Poly, seen: list[Variable], eqs: list) -> Variable:
        if len(e.terms) == 1:
            (mono, c), = e.terms
            if len(mono) == 1 and c == 1 and mono[0] not in seen:
                return mono[0]
        v = fresh("V")
        eqs.append(relation(Poly.var(v), "=", e))
        return v

    def expr(self) -> Poly:
        p = self.term()
        while True:
            if self.accept("+"):
                p = p + self.term()
            elif self.accept("-"):
                p = p - self.term()
            else:
                return p

    def term(self) -> Poly:
        p = self.factor()
        while True:
            if self.accept("*"):
                p = p * self.factor()
            elif self.accept("/"):
                d = self.factor()
                if not d.is_constant() or d.constant_value() == 0:
                    raise self.error("division only by a non-zero constant")
                p = p.scale(1 / d.constant_value())
            else:
                return p

    def factor(self) -> Poly:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Poly.const(Fraction(t.text))
        if t.kind == "var":
            self.i += 1
            if t.text == "_":
                return Poly.var(fresh("_"))
            v = self.scope.get(t.text)
            if v is None:
                v = self.scope[t.text] = fresh(t.text)
            return Poly.var(v)
        if self.accept("("):
            p = self.expr()
            self.expect(")")
            return p
        if self.accept("-"):
            return -self.factor()
        raise self.error(f"unexpected {t.text or 'end of input'!r} in expression")


def relation(lhs: Poly, op: str, rhs: Poly) -> Lin | Opaque:
    """Build an atomic constraint from ``lhs op rhs``; '>' and '>=' are flipped."""
    if op in (">", ">="):
        lhs, rhs, op = rhs, lhs, ("<" if op == ">" else "<=")
    diff = lhs - rhs
    if diff.is_linear():
        return Lin(diff.to_linear(), op)
    return Opaque(lhs, rhs, op)


def _check_arities(clauses: list[tuple[Clause, int]]) -> None:
    arity: dict[str, tuple[int, int]] = {}
    for c, line in clauses:
        for a in (c.head, *c.body):
            seen = arity.setdefault(a.pred, (a.arity, line))
            if seen[0] != a.arity:
                raise ParseError(
                    f"predicate {a.pred} used with arity {a.arity} and {seen[0]} (line {seen[1]})", line, 1)


def parse_program(text: str) -> Program:
    clauses = _Parser(text).clauses()
    _check_arities(clauses)
    return Program(tuple(c for c, _ in clauses))


def parse_clause(text: str) -> Clause:
    clauses = _Parser(text).clauses()
    if len(clauses) != 1:
        raise ParseError(f"expected one clause, got {len(clauses)}")
    return clauses[0][0]


def parse_constrained_facts(text: str) -> list[ConstrainedFact]:
    """Read clauses with empty atom bodies as constrained facts.

    Constraints are projected onto the head arguments and the facts are
    returned over the standard argument variables.
    """
    from .constraints import project

    out = []
    for c, line in _Parser(text).clauses():
        if c.body:
            raise ParseError(f"constrained fact for {c.head.pred} has body atoms", line, 1)
        con = c.constraint
        if not con.vars() <= set(c.head.args):
            con = project(con, c.head.args)
        out.append(standard_fact(c.head, con))
    return out


def render(program: Program) -> str:
    return render_program(program)
