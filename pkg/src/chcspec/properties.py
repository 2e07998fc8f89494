"""Property sets and the property-based generalisation operator.

rho(phi) is the conjunction of every property entailed by phi and the
negation of every property whose negation phi entails.  Only single
inequality properties are negated: the negation of an equality or of a
multi-conjunct property is a disjunction, so it is skipped, which can only
weaken the result.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .constraints import canonicalize, entails, entails_negation, equivalent, is_sat, project
from .syntax import (
    FALSE,
    TRUE,
    Atom,
    ConstrainedFact,
    Constraint,
    Lin,
    LinearExpr,
    Program,
    conj,
    standard_fact,
    std_vars,
)

log = logging.getLogger(__name__)

PredKey = tuple[str, int]


@dataclass
class PropertySet:
    facts: list[ConstrainedFact] = field(default_factory=list)

    def __post_init__(self):
        self._index: dict[PredKey, list[Constraint]] = {}
        facts, self.facts = self.facts, []
        for f in facts:
            self.add(f)

    def add(self, fact: ConstrainedFact) -> bool:
        """Add a property unless an equivalent one is already present."""
        f = standard_fact(fact.atom, fact.constraint)
        bucket = self._index.setdefault(f.key, [])
        if any(equivalent(c, f.constraint) for c in bucket):
            return False
        bucket.append(f.constraint)
        self.facts.append(f)
        return True

    def for_pred(self, key: PredKey) -> list[Constraint]:
        """Properties of a predicate, over the standard argument variables."""
        return self._index.get(key, [])

    def predicates(self) -> list[PredKey]:
        return list(self._index)

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self):
        return iter(self.facts)


_warned: set[Constraint] = set()


def rho(phi: Constraint, props: Sequence[Constraint]) -> Constraint:
    """Property-based generalisation of phi; all constraints share variables."""
    if not is_sat(phi):
        return FALSE
    parts: list[Constraint] = []
    for psi in props:
        if entails(phi, psi):
            parts.append(psi)
        elif entails_negation(phi, psi):
            if len(psi.atoms) == 1 and isinstance(psi.atoms[0], Lin) and psi.atoms[0].op != "=":
                parts.append(Constraint((psi.atoms[0].negation(),)))
            elif psi not in _warned:
                _warned.add(psi)
                log.warning("negation of property %s is not conjunctive; skipped", psi)
    if not parts:
        return TRUE
    return canonicalize(conj(*parts))


def rho_fact(fact: ConstrainedFact, props: PropertySet) -> ConstrainedFact:
    """Generalise a fact with the properties of its predicate."""
    f = standard_fact(fact.atom, fact.constraint)
    return ConstrainedFact(f.atom, rho(f.constraint, props.for_pred(f.key)))


SCOPES = ("all", "recursive")


def in_scope(key: PredKey, scope: str, recursive: Iterable[PredKey]) -> bool:
    if scope == "all":
        return True
    if scope in ("recursive", "recursive-only"):
        return key in recursive
    raise ValueError(f"unknown abstraction scope {scope!r}")


def alpha(facts: Iterable[ConstrainedFact], props: PropertySet, scope: str = "all",
          recursive: Iterable[PredKey] = ()) -> list[ConstrainedFact]:
    """Abstract each in-scope fact; drop false facts and merge equivalent ones."""
    recursive = frozenset(recursive)
    out: list[ConstrainedFact] = []
    for f in facts:
        if in_scope(f.key, scope, recursive):
            g = rho_fact(f, props)
        else:
            g = standard_fact(f.atom, canonicalize(f.constraint))
        if g.constraint.is_false:
            continue
        if not any(h.key == g.key and equivalent(h.constraint, g.constraint) for h in out):
            out.append(g)
    return out


# --------------------------------------------------------------------------
# generators


def guard_properties(program: Program) -> PropertySet:
    """Every clause constraint projected onto each head and body atom, split into conjuncts."""
    ps = PropertySet()
    for c in program.clauses:
        if c.constraint.is_false:
            continue
        for atom in (c.head, *c.body):
            proj = project(c.constraint, atom.args)
            if proj.is_false:
                continue
            for a in proj.atoms:
                ps.add(ConstrainedFact(atom, Constraint((a,))))
    return ps


def dimension_ladder(program: Program, bound: int) -> PropertySet:
    """{C =< j | 0 =< j =< bound} and C >= 0 on the last argument of every predicate."""
    ps = PropertySet()
    for key in program.predicates():
        name, arity = key
        if arity == 0:
            continue
        args = std_vars(arity)
        last = LinearExpr.var(args[-1])
        atom = Atom(name, args)
        for j in range(bound, -1, -1):
            ps.add(ConstrainedFact(atom, Constraint((Lin(last - LinearExpr.build({}, j), "<="),))))
        ps.add(ConstrainedFact(atom, Constraint((Lin(-last, "<="),))))
    return ps
