"""Compilation of clauses into flat integer plans for the evaluation kernels.

A plan is a sequence of steps over an integer register file:

* ``SCAN rel n (var bound)*``  iterate the derived tuples of a body atom
* ``ENUM var``                 try every grid value
* ``SOLVE var div poly``       ``var = poly / div``, rejected unless integral and on the grid
* ``CHECK poly op``            ``poly op 0`` with op 0 ('='), 1 ('=<') or 2 ('<')
* ``EMIT rel n var*``          derive the head tuple

Polynomials have integer coefficients and are stored in a shared pool as
``nterms (coeff degree var*)*``.  Steps are chosen greedily: checks as soon
as their variables are bound, then solvable equalities, then the body atom
with the most bound arguments, then enumeration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..syntax import Clause, Lin, Opaque, Poly, Program

SCAN, ENUM, SOLVE, CHECK, EMIT = 1, 2, 3, 4, 5
OPS = {"=": 0, "<=": 1, "<": 2}


@dataclass
class PolyPool:
    data: list[int] = field(default_factory=list)

    def add(self, terms: list[tuple[int, list[int]]]) -> int:
        off = len(self.data)
        self.data.append(len(terms))
        for coeff, vs in terms:
            self.data.extend((coeff, len(vs), *vs))
        return off


def _integer_terms(p: Poly) -> list[tuple[Fraction, tuple]]:
    lcm = 1
    for _, c in p.terms:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    return [(int(c * lcm), mono) for mono, c in p.terms]


@dataclass
class ClausePlan:
    clause: Clause
    head_rel: int
    code: np.ndarray
    nvars: int
    nbody: int


class _Constraint:
    def __init__(self, poly: Poly, op: str):
        self.terms = _integer_terms(poly)
        self.op = op
        self.vars = set()
        for _, mono in self.terms:
            self.vars.update(mono)


def _constraints(clause: Clause) -> list[_Constraint]:
    out = []
    for a in clause.constraint.atoms:
        if isinstance(a, Lin):
            out.append(_Constraint(a.expr.to_poly(), a.op))
        elif isinstance(a, Opaque):
            out.append(_Constraint(a.lhs - a.rhs, a.op))
    return out


def compile_clause(clause: Clause, rel_ids: dict, pool: PolyPool) -> ClausePlan | None:
    """Plan for one clause, or None when its constraint is false."""
    if clause.constraint.is_false:
        return None
    reg: dict = {}

    def r(v) -> int:
        if v not in reg:
            reg[v] = len(reg)
        return reg[v]

    for v in clause.ordered_vars():
        r(v)
    pending = _constraints(clause)
    atoms = list(enumerate(clause.body))
    bound: set = set()
    code: list[int] = []

    def poly_code(terms) -> int:
        return pool.add([(c, [r(v) for v in mono]) for c, mono in terms])

    while True:
        ready = [c for c in pending if c.vars <= bound]
        for c in ready:
            pending.remove(c)
            code += [CHECK, poly_code(c.terms), OPS[c.op]]
        solved = False
        for c in pending:
            if c.op != "=":
                continue
            free = c.vars - bound
            if len(free) != 1:
                continue
            (v,) = free
            lin = [(k, mono) for k, mono in c.terms if v in mono]
            if len(lin) != 1 or lin[0][1] != (v,):
                continue
            coeff = lin[0][0]
            rest = [(-k, mono) for k, mono in c.terms if v not in mono]
            if coeff < 0:
                coeff, rest = -coeff, [(-k, mono) for k, mono in rest]
            code += [SOLVE, r(v), coeff, poly_code(rest)]
            bound.add(v)
            pending.remove(c)
            solved = True
            break
        if solved:
            continue
        if atoms:
            best = max(atoms, key=lambda ia: sum(v in bound for v in ia[1].args))
            atoms.remove(best)
            slot, atom = best
            code += [SCAN, rel_ids[atom.key], slot, atom.arity]
            for v in atom.args:
                code += [r(v), 1 if v in bound else 0]
                bound.add(v)
            continue
        free = [v for v in reg if v not in bound]
        if not free:
            break
        v = max(free, key=lambda x: sum(x in c.vars for c in pending))
        code += [ENUM, r(v)]
        bound.add(v)
    code += [EMIT, rel_ids[clause.head.key], clause.head.arity, *(r(v) for v in clause.head.args)]
    return ClausePlan(clause, rel_ids[clause.head.key], np.asarray(code, dtype=np.int64),
                      len(reg), len(clause.body))


@dataclass
class CompiledProgram:
    program: Program
    keys: list
    rel_ids: dict
    plans: list[ClausePlan]
    polys: np.ndarray


def compile_program(program: Program) -> CompiledProgram:
    keys = list(program.predicates())
    rel_ids = {k: i for i, k in enumerate(keys)}
    pool = PolyPool()
    plans = []
    for c in program.clauses:
        p = compile_clause(c, rel_ids, pool)
        if p is not None:
            plans.append(p)
    polys = np.asarray(pool.data or [0], dtype=np.int64)
    return CompiledProgram(program, keys, rel_ids, plans, polys)
