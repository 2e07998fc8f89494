"""Decision procedures for conjunctions of linear constraints over the rationals.

Satisfiability and projection use Fourier-Motzkin elimination with strict
inequalities tracked exactly; equalities are eliminated by substitution
first.  Opaque (non-linear) conjuncts are ignored when deciding
satisfiability, never entailed except by an identical conjunct, and dropped
by projection when they mention an eliminated variable.
"""
from __future__ import annotations

import enum
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

from .syntax import FALSE, TRUE, Constraint, Lin, LinearExpr, Opaque, Variable

EQ, LE, LT = 0, 1, 2
_KIND = {"=": EQ, "<=": LE, "<": LT}
_OP = {EQ: "=", LE: "<=", LT: "<"}

# a row is (coeffs, const, kind) meaning  sum(coeffs[v] * v) + const  kind  0
Row = tuple


class SatResult(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"

    def __bool__(self) -> bool:
        return self is SatResult.SAT


class Entailment(NamedTuple):
    holds: bool
    # True when the answer relied on matching an opaque conjunct syntactically
    opaque: bool = False


def _rows(c: Constraint) -> list[Row]:
    return [(a.expr.as_dict(), a.expr.const, _KIND[a.op]) for a in c.atoms if isinstance(a, Lin)]


def _const_ok(const: Fraction, kind: int) -> bool:
    if kind == EQ:
        return const == 0
    if kind == LE:
        return const <= 0
    return const < 0


def _tighten(rows: Iterable[Row]) -> list[Row] | None:
    """Drop trivial rows, keep the tightest of parallel rows; None if a row is false."""
    best: dict[tuple, Row] = {}
    order: list[tuple] = []
    for coeffs, const, kind in rows:
        if not coeffs:
            if not _const_ok(const, kind):
                return None
            continue
        first = min(coeffs)
        s = abs(coeffs[first])
        if kind == EQ and coeffs[first] < 0:
            s = -s
        if s != 1:
            coeffs = {v: c / s for v, c in coeffs.items()}
            const = const / s
        key = (tuple(sorted(coeffs.items())), kind == EQ)
        old = best.get(key)
        if old is None:
            best[key] = (coeffs, const, kind)
            order.append(key)
        elif kind == EQ:
            if old[1] != const:
                return None
        elif const > old[1] or (const == old[1] and kind == LT):
            best[key] = (coeffs, const, kind)
    return [best[k] for k in order]


def _substitute(rows: list[Row], v: Variable, sol: dict, sol_const: Fraction) -> list[Row]:
    out = []
    for coeffs, const, kind in rows:
        b = coeffs.get(v)
        if b is None:
            out.append((coeffs, const, kind))
            continue
        nc = dict(coeffs)
        del nc[v]
        for w, c in sol.items():
            x = nc.get(w, 0) + b * c
            if x:
                nc[w] = x
            else:
                nc.pop(w, None)
        out.append((nc, const + b * sol_const, kind))
    return out


def _solve_eq(row: Row, v: Variable) -> tuple[dict, Fraction]:
    coeffs, const, _ = row
    a = coeffs[v]
    return {w: -c / a for w, c in coeffs.items() if w != v}, -const / a


def _eliminate(rows: list[Row], v: Variable) -> list[Row]:
    pos, neg, rest = [], [], []
    for r in rows:
        c = r[0].get(v)
        if c is None:
            rest.append(r)
        elif c > 0:
            pos.append(r)
        else:
            neg.append(r)
    for pc, pk, pkind in pos:
        ap = pc[v]
        for nc, nk, nkind in neg:
            an = -nc[v]
            d: dict = {}
            for w, c in pc.items():
                if w != v:
                    d[w] = c * an
            for w, c in nc.items():
                if w != v:
                    x = d.get(w, 0) + c * ap
                    if x:
                        d[w] = x
                    else:
                        d.pop(w, None)
            kind = LT if LT in (pkind, nkind) else LE
            rest.append((d, pk * an + nk * ap, kind))
    return rest


def _pick(rows: list[Row], candidates: set) -> Variable:
    best, score = None, None
    for v in sorted(candidates):
        p = n = 0
        for r in rows:
            c = r[0].get(v)
            if c is not None:
                if c > 0:
                    p += 1
                else:
                    n += 1
        s = p * n - p - n
        if score is None or s < score:
            best, score = v, s
    return best


def _eliminate_equalities(rows: list[Row], allowed=None) -> list[Row] | None:
    """Substitute away equalities on allowed variables (all when None)."""
    rows = list(rows)
    while True:
        rows = _tighten(rows)
        if rows is None:
            return None
        for i, r in enumerate(rows):
            if r[2] != EQ:
                continue
            cands = [v for v in r[0] if allowed is None or v in allowed]
            if cands:
                v = min(cands)
                sol, k = _solve_eq(r, v)
                rows = _substitute(rows[:i] + rows[i + 1:], v, sol, k)
                break
        else:
            return rows


def _fm(rows: list[Row], elim: set | None) -> list[Row] | None:
    """Eliminate variables (all when elim is None); None when unsatisfiable."""
    rows = _eliminate_equalities(rows, elim)
    if rows is None:
        return None
    while True:
        present = {v for r in rows for v in r[0]}
        cands = present if elim is None else present & elim
        if not cands:
            return rows
        v = _pick(rows, cands)
        rows = _tighten(_eliminate(rows, v))
        if rows is None:
            return None


def _sat_rows(rows: list[Row]) -> bool:
    return _fm(rows, None) is not None


def _neg_rows(row: Row) -> list[list[Row]]:
    """Alternatives whose disjunction is the negation of row."""
    coeffs, const, kind = row
    neg = {v: -c for v, c in coeffs.items()}
    if kind == LE:
        return [[(neg, -const, LT)]]
    if kind == LT:
        return [[(neg, -const, LE)]]
    return [[(coeffs, const, LT)], [(neg, -const, LT)]]


def _entails_row(rows: list[Row], row: Row) -> bool:
    return all(not _sat_rows(rows + alt) for alt in _neg_rows(row))


# --------------------------------------------------------------------------
# public API


@lru_cache(maxsize=200_000)
def is_sat(phi: Constraint) -> SatResult:
    if phi.is_false:
        return SatResult.UNSAT
    return SatResult.SAT if _sat_rows(_rows(phi)) else SatResult.UNSAT


@lru_cache(maxsize=200_000)
def check_entailment(phi: Constraint, psi: Constraint) -> Entailment:
    if not is_sat(phi):
        return Entailment(True)
    if psi.is_false:
        return Entailment(False)
    rows = _rows(phi)
    have = set(phi.atoms)
    used_opaque = False
    for a in psi.atoms:
        if a in have:
            used_opaque |= isinstance(a, Opaque)
            continue
        if isinstance(a, Opaque):
            return Entailment(False, True)
        r = (a.expr.as_dict(), a.expr.const, _KIND[a.op])
        if not _entails_row(rows, r):
            return Entailment(False, used_opaque)
    return Entailment(True, used_opaque)


def entails(phi: Constraint, psi: Constraint) -> bool:
    """phi entails psi: every rational solution of phi satisfies psi."""
    return check_entailment(phi, psi).holds


def entails_negation(phi: Constraint, psi: Constraint) -> bool:
    """phi entails not psi, i.e. phi and psi have no common solution."""
    return not is_sat(phi & psi)


def equivalent(phi: Constraint, psi: Constraint) -> bool:
    return phi == psi or (entails(phi, psi) and entails(psi, phi))


def _to_lin(row: Row) -> Lin:
    coeffs, const, kind = row
    return Lin(LinearExpr.build(coeffs, const), _OP[kind])


@lru_cache(maxsize=100_000)
def _project(phi: Constraint, keep: frozenset) -> Constraint:
    if phi.is_false:
        return FALSE
    elim = phi.vars() - keep
    if not elim:
        return canonicalize(phi)
    rows = _fm(_rows(phi), set(elim))
    if rows is None:
        return FALSE
    kept = [a for a in phi.opaque() if a.vars() <= keep]
    return canonicalize(Constraint(tuple(_to_lin(r) for r in rows) + tuple(kept)))


def project(phi: Constraint, variables: Iterable[Variable]) -> Constraint:
    """Existentially eliminate every variable of phi not in ``variables``."""
    return _project(phi, frozenset(variables))


def _integer_row(row: Row) -> Row:
    coeffs, const, kind = row
    vals = list(coeffs.values()) + [const]
    lcm = 1
    for x in vals:
        lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in vals]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    k = Fraction(lcm, g or 1)
    if kind == EQ and coeffs[min(coeffs)] < 0:
        k = -k
    return ({v: c * k for v, c in coeffs.items()}, const * k, kind)


def _row_key(row: Row) -> tuple:
    coeffs, const, kind = row
    return (kind != EQ, tuple(sorted(coeffs.items())), kind, const)


@lru_cache(maxsize=200_000)
def canonicalize(phi: Constraint) -> Constraint:
    """Equivalent constraint with integer coefficients, sorted, redundancy-free.

    Unsatisfiable input yields the false marker.
    """
    if phi.is_false or not is_sat(phi):
        return FALSE
    rows = _tighten(_rows(phi))
    rows = [_integer_row(r) for r in rows]
    # a pair e <= 0, -e <= 0 becomes e = 0
    les = {(tuple(sorted(r[0].items())), r[1]): r for r in rows if r[2] == LE}
    merged: list[Row] = []
    dropped = set()
    for r in rows:
        if r[2] == LE:
            k = (tuple(sorted(r[0].items())), r[1])
            if k in dropped:
                continue
            nk = (tuple(sorted((v, -c) for v, c in r[0].items())), -r[1])
            if nk in les and nk != k:
                dropped.add(nk)
                merged.append(_integer_row((dict(r[0]), r[1], EQ)))
                continue
        merged.append(r)
    rows = sorted({_row_key(r): r for r in merged}.values(), key=_row_key)
    kept = list(rows)
    for r in rows:
        others = [x for x in kept if x is not r]
        if _entails_row(others, r):
            kept = others
    opaque = sorted(set(phi.opaque()), key=lambda a: (a.lhs.terms, a.rhs.terms, a.op))
    return Constraint(tuple(_to_lin(r) for r in kept) + tuple(opaque))



__all__ = [
    "SatResult", "Entailment", "is_sat", "entails", "check_entailment", "entails_negation",
    "equivalent", "project", "canonicalize", "TRUE", "FALSE",
]
