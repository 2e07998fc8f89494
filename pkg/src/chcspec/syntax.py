"""Abstract syntax for constrained Horn clauses over linear real arithmetic.

Everything here is immutable.  Variables carry a unique id so that clauses
can be renamed apart without touching their printed names.
"""
from __future__ import annotations

import itertools
import string
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

_uids = itertools.count(1)


@dataclass(frozen=True, order=True)
class Variable:
    name: str
    uid: int

    def __repr__(self) -> str:
        return f"{self.name}#{self.uid}"


def fresh(name: str = "V") -> Variable:
    return Variable(name, next(_uids))


_STD_CACHE: list[Variable] = []


def std_vars(n: int) -> tuple[Variable, ...]:
    """Fixed argument variables A, B, C, ... used for constrained facts.

    Their ids are negative so they never clash with fresh variables.
    """
    while len(_STD_CACHE) < n:
        i = len(_STD_CACHE)
        letter = string.ascii_uppercase[i % 26]
        name = letter if i < 26 else f"{letter}{i // 26}"
        _STD_CACHE.append(Variable(name, -(i + 1)))
    return tuple(_STD_CACHE[:n])


def _num(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


# --------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class LinearExpr:
    """sum(coeff * var) + const with exact rational coefficients."""

    terms: tuple[tuple[Variable, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    @staticmethod
    def build(coeffs: Mapping[Variable, Fraction], const=0) -> "LinearExpr":
        terms = tuple(sorted((v, Fraction(c)) for v, c in coeffs.items() if c != 0))
        return LinearExpr(terms, Fraction(const))

    @staticmethod
    def var(v: Variable) -> "LinearExpr":
        return LinearExpr(((v, Fraction(1)),), Fraction(0))

    def as_dict(self) -> dict[Variable, Fraction]:
        return dict(self.terms)

    def vars(self) -> frozenset[Variable]:
        return frozenset(v for v, _ in self.terms)

    def __add__(self, other: "LinearExpr") -> "LinearExpr":
        d = self.as_dict()
        for v, c in other.terms:
            d[v] = d.get(v, 0) + c
        return LinearExpr.build(d, self.const + other.const)

    def __neg__(self) -> "LinearExpr":
        return LinearExpr(tuple((v, -c) for v, c in self.terms), -self.const)

    def __sub__(self, other: "LinearExpr") -> "LinearExpr":
        return self + (-other)

    def scale(self, k) -> "LinearExpr":
        k = Fraction(k)
        if k == 0:
            return LinearExpr()
        return LinearExpr(tuple((v, c * k) for v, c in self.terms), self.const * k)

    def rename(self, m: Mapping[Variable, Variable]) -> "LinearExpr":
        d: dict[Variable, Fraction] = {}
        for v, c in self.terms:
            w = m.get(v, v)
            d[w] = d.get(w, 0) + c
        return LinearExpr.build(d, self.const)

    def to_poly(self) -> "Poly":
        d = {(v,): c for v, c in self.terms}
        if self.const:
            d[()] = self.const
        return Poly.build(d)


Monomial = tuple  # sorted tuple of Variables, () for the constant


@dataclass(frozen=True)
class Poly:
    """Polynomial with rational coefficients; only used for opaque atoms."""

    terms: tuple[tuple[Monomial, Fraction], ...] = ()

    @staticmethod
    def build(d: Mapping[Monomial, Fraction]) -> "Poly":
        return Poly(tuple(sorted(((tuple(sorted(m)), Fraction(c)) for m, c in d.items() if c != 0),
                                 key=lambda t: (len(t[0]), t[0]))))

    @staticmethod
    def const(c) -> "Poly":
        return Poly.build({(): Fraction(c)})

    @staticmethod
    def var(v: Variable) -> "Poly":
        return Poly((((v,), Fraction(1)),))

    def as_dict(self) -> dict[Monomial, Fraction]:
        return dict(self.terms)

    def degree(self) -> int:
        return max((len(m) for m, _ in self.terms), default=0)

    def is_linear(self) -> bool:
        return self.degree() <= 1

    def is_constant(self) -> bool:
        return self.degree() == 0

    def constant_value(self) -> Fraction:
        return self.as_dict().get((), Fraction(0))

    def vars(self) -> frozenset[Variable]:
        return frozenset(v for m, _ in self.terms for v in m)

    def __add__(self, other: "Poly") -> "Poly":
        d = self.as_dict()
        for m, c in other.terms:
            d[m] = d.get(m, 0) + c
        return Poly.build(d)

    def __neg__(self) -> "Poly":
        return Poly(tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        d: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = tuple(sorted(m1 + m2))
                d[m] = d.get(m, 0) + c1 * c2
        return Poly.build(d)

    def scale(self, k) -> "Poly":
        return Poly.build({m: c * Fraction(k) for m, c in self.terms})

    def rename(self, m: Mapping[Variable, Variable]) -> "Poly":
        d: dict[Monomial, Fraction] = {}
        for mono, c in self.terms:
            key = tuple(sorted(m.get(v, v) for v in mono))
            d[key] = d.get(key, 0) + c
        return Poly.build(d)

    def to_linear(self) -> LinearExpr:
        assert self.is_linear()
        d = {m[0]: c for m, c in self.terms if m}
        return LinearExpr.build(d, self.constant_value())


# --------------------------------------------------------------------------
# constraints

OPS = ("=", "<=", "<")


@dataclass(frozen=True)
class Lin:
    """Linear atom ``expr op 0`` with op one of '=', '<=', '<'."""

    expr: LinearExpr
    op: str

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"bad relation {self.op!r}")
        # equalities keep at least one positive coefficient
        if self.op == "=" and self.expr.terms and all(c < 0 for _, c in self.expr.terms):
            object.__setattr__(self, "expr", -self.expr)

    def vars(self) -> frozenset[Variable]:
        return self.expr.vars()

    def rename(self, m: Mapping[Variable, Variable]) -> "Lin":
        return Lin(self.expr.rename(m), self.op)

    def negation(self) -> "Lin":
        """Negation of an inequality (equalities have no conjunctive negation)."""
        if self.op == "<=":
            return Lin(-self.expr, "<")
        if self.op == "<":
            return Lin(-self.expr, "<=")
        raise ValueError("negation of an equality is a disjunction")

    def to_poly(self) -> Poly:
        return self.expr.to_poly()


@dataclass(frozen=True)
class Opaque:
    """Non-linear atom ``lhs op rhs``, carried verbatim."""

    lhs: Poly
    rhs: Poly
    op: str

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"bad relation {self.op!r}")

    def vars(self) -> frozenset[Variable]:
        return self.lhs.vars() | self.rhs.vars()

    def rename(self, m: Mapping[Variable, Variable]) -> "Opaque":
        return Opaque(self.lhs.rename(m), self.rhs.rename(m), self.op)

    def to_poly(self) -> Poly:
        return self.lhs - self.rhs


AtomicConstraint = Lin | Opaque


@dataclass(frozen=True)
class Constraint:
    """Conjunction of atomic constraints; ``false`` is a separate marker."""

    atoms: tuple[AtomicConstraint, ...] = ()
    is_false: bool = False

    def __post_init__(self):
        if self.is_false and self.atoms:
            object.__setattr__(self, "atoms", ())

    @property
    def is_true(self) -> bool:
        return not self.atoms and not self.is_false

    def vars(self) -> frozenset[Variable]:
        out: set[Variable] = set()
        for a in self.atoms:
            out |= a.vars()
        return frozenset(out)

    def linear(self) -> tuple[Lin, ...]:
        return tuple(a for a in self.atoms if isinstance(a, Lin))

    def opaque(self) -> tuple[Opaque, ...]:
        return tuple(a for a in self.atoms if isinstance(a, Opaque))

    def __and__(self, other: "Constraint") -> "Constraint":
        if self.is_false or other.is_false:
            return FALSE
        return Constraint(self.atoms + other.atoms)

    def rename(self, m: Mapping[Variable, Variable]) -> "Constraint":
        if self.is_false:
            return self
        return Constraint(tuple(a.rename(m) for a in self.atoms))

    def __iter__(self) -> Iterator[AtomicConstraint]:
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __str__(self) -> str:
        return render_constraint(self)


TRUE = Constraint()
FALSE = Constraint((), True)


def conj(*parts: Constraint | AtomicConstraint) -> Constraint:
    out: list[AtomicConstraint] = []
    for p in parts:
        if isinstance(p, Constraint):
            if p.is_false:
                return FALSE
            out.extend(p.atoms)
        else:
            out.append(p)
    return Constraint(tuple(out))


def eq(x: Variable, y: Variable) -> Lin:
    return Lin(LinearExpr.var(x) - LinearExpr.var(y), "=")


# --------------------------------------------------------------------------
# atoms, clauses, programs


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Variable, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def key(self) -> tuple[str, int]:
        return (self.pred, len(self.args))

    def rename(self, m: Mapping[Variable, Variable]) -> "Atom":
        return Atom(self.pred, tuple(m.get(v, v) for v in self.args))

    def with_pred(self, pred: str) -> "Atom":
        return Atom(pred, self.args)


@dataclass(frozen=True)
class Clause:
    head: Atom
    constraint: Constraint = TRUE
    body: tuple[Atom, ...] = ()
    # unfolding provenance: (tuple of program clause indices, path-only constraint)
    origin: tuple | None = field(default=None, compare=False, hash=False, repr=False)

    def vars(self) -> frozenset[Variable]:
        out = set(self.head.args) | set(self.constraint.vars())
        for a in self.body:
            out.update(a.args)
        return frozenset(out)

    def ordered_vars(self) -> list[Variable]:
        """Variables in order of first occurrence (head, constraint, body)."""
        seen: dict[Variable, None] = {}
        for v in self.head.args:
            seen.setdefault(v)
        for a in self.constraint.atoms:
            for v in _atom_var_order(a):
                seen.setdefault(v)
        for b in self.body:
            for v in b.args:
                seen.setdefault(v)
        return list(seen)

    def rename(self, m: Mapping[Variable, Variable]) -> "Clause":
        origin = self.origin
        if origin is not None:
            origin = (origin[0], origin[1].rename(m))
        return Clause(self.head.rename(m), self.constraint.rename(m),
                      tuple(b.rename(m) for b in self.body), origin)

    @property
    def is_fact(self) -> bool:
        return not self.body

    def __str__(self) -> str:
        return render_clause(self)


def _atom_var_order(a: AtomicConstraint) -> list[Variable]:
    if isinstance(a, Lin):
        return [v for v, _ in a.expr.terms]
    return [v for p in (a.lhs, a.rhs) for m, _ in p.terms for v in m]


@dataclass(frozen=True)
class ConstrainedFact:
    """``p(x) <- phi`` with phi over x only."""

    atom: Atom
    constraint: Constraint = TRUE

    @property
    def key(self) -> tuple[str, int]:
        return self.atom.key

    def on(self, args: Sequence[Variable]) -> Constraint:
        """The constraint renamed onto another argument tuple."""
        return self.constraint.rename(dict(zip(self.atom.args, args)))

    def __str__(self) -> str:
        return render_clause(Clause(self.atom, self.constraint))


def standard_fact(atom: Atom, constraint: Constraint) -> ConstrainedFact:
    """Rename a fact onto the standard argument variables."""
    sv = std_vars(atom.arity)
    m = dict(zip(atom.args, sv))
    return ConstrainedFact(Atom(atom.pred, sv), constraint.rename(m))


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        index: dict[tuple[str, int], list[int]] = {}
        for i, c in enumerate(self.clauses):
            index.setdefault(c.head.key, []).append(i)
        object.__setattr__(self, "_index", {k: tuple(v) for k, v in index.items()})

    @property
    def index(self) -> dict[tuple[str, int], tuple[int, ...]]:
        return self._index  # type: ignore[attr-defined]

    def defining(self, key: tuple[str, int]) -> list[tuple[int, Clause]]:
        return [(i, self.clauses[i]) for i in self.index.get(key, ())]

    def predicates(self) -> list[tuple[str, int]]:
        seen: dict[tuple[str, int], None] = {}
        for c in self.clauses:
            seen.setdefault(c.head.key)
            for b in c.body:
                seen.setdefault(b.key)
        return list(seen)

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __str__(self) -> str:
        return render_program(self)


# --------------------------------------------------------------------------
# renaming


def rename_apart(clause: Clause) -> Clause:
    m = {v: fresh(v.name) for v in clause.ordered_vars()}
    return clause.rename(m)


def alpha_key(clause: Clause) -> tuple:
    """Structure of a clause with variables replaced by occurrence index."""
    idx = {v: i for i, v in enumerate(clause.ordered_vars())}
    m = {v: Variable("_", i) for v, i in idx.items()}
    c = clause.rename(m)
    return (c.head, c.constraint, c.body)


def program_key(program: Program) -> tuple:
    return tuple(alpha_key(c) for c in program.clauses)


def standardize_names(clause: Clause) -> Clause:
    """Rename head arguments to A, B, C, ... and other variables after them."""
    order = list(clause.head.args)
    for b in clause.body:
        order.extend(b.args)
    for a in clause.constraint.atoms:
        order.extend(_atom_var_order(a))
    seen: dict[Variable, None] = {}
    for v in order:
        seen.setdefault(v)
    names = std_vars(len(seen))
    return clause.rename(dict(zip(seen, names)))


# --------------------------------------------------------------------------
# printing


def _fmt_terms(terms: Iterable[tuple[str, Fraction]], const: Fraction) -> str:
    parts: list[str] = []
    for name, c in terms:
        mag = abs(c)
        if mag.denominator == 1:
            s = name if mag == 1 else f"{mag.numerator}*{name}"
        else:
            s = f"{mag.numerator}*{name}/{mag.denominator}" if mag.numerator != 1 else f"{name}/{mag.denominator}"
        parts.append(("-" if c < 0 else "+") + s)
    if const or not parts:
        parts.append(("-" if const < 0 else "+") + _num(abs(const)))
    out = "".join(parts)
    return out[1:] if out.startswith("+") else out


def _lin_str(a: Lin, names: Mapping[Variable, str]) -> str:
    pos = [(names[v], c) for v, c in a.expr.terms if c > 0]
    neg = [(names[v], -c) for v, c in a.expr.terms if c < 0]
    c = a.expr.const
    sym = {"=": "=", "<=": "=<", "<": "<"}[a.op]
    if pos:
        return f"{_fmt_terms(pos, Fraction(0))}{sym}{_fmt_terms(neg, -c)}"
    if a.op == "=":
        return f"{_num(c)}=0"
    rsym = {"<=": ">=", "<": ">"}[a.op]
    lhs = _fmt_terms(neg, Fraction(0)) if neg else "0"
    return f"{lhs}{rsym}{_num(c)}"


def _poly_str(p: Poly, names: Mapping[Variable, str]) -> str:
    terms = [("*".join(names[v] for v in m), c) for m, c in p.terms if m]
    return _fmt_terms(terms, p.constant_value())


def _atomic_str(a: AtomicConstraint, names: Mapping[Variable, str]) -> str:
    if isinstance(a, Lin):
        return _lin_str(a, names)
    sym = {"=": "=", "<=": "=<", "<": "<"}[a.op]
    return f"{_poly_str(a.lhs, names)}{sym}{_poly_str(a.rhs, names)}"


def _atom_str(a: Atom, names: Mapping[Variable, str]) -> str:
    if not a.args:
        return a.pred
    return f"{a.pred}({','.join(names[v] for v in a.args)})"


def var_names(vars_in_order: Sequence[Variable]) -> dict[Variable, str]:
    """Printable names, unique within one clause, independent of ids."""
    taken = {v.name for v in vars_in_order}
    out: dict[Variable, str] = {}
    used: set[str] = set()
    for v in vars_in_order:
        name = v.name
        if name in used:
            k = 1
            while f"{name}_{k}" in used or f"{name}_{k}" in taken:
                k += 1
            name = f"{name}_{k}"
        used.add(name)
        out[v] = name
    return out


def render_constraint(c: Constraint, names: Mapping[Variable, str] | None = None) -> str:
    if c.is_false:
        return "false"
    if not c.atoms:
        return "true"
    if names is None:
        order: dict[Variable, None] = {}
        for a in c.atoms:
            for v in _atom_var_order(a):
                order.setdefault(v)
        names = var_names(list(order))
    return ",".join(_atomic_str(a, names) for a in c.atoms)


def render_clause(c: Clause) -> str:
    names = var_names(c.ordered_vars())
    head = _atom_str(c.head, names)
    items: list[str] = []
    if c.constraint.is_false:
        items.append("false")
    else:
        items.extend(_atomic_str(a, names) for a in c.constraint.atoms)
    items.extend(_atom_str(b, names) for b in c.body)
    if not items:
        return f"{head}."
    return f"{head} :- {', '.join(items)}."


def render_program(p: Program) -> str:
    if not p.clauses:
        return ""
    return "\n".join(render_clause(c) for c in p.clauses) + "\n"
