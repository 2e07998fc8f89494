"""Polyvariant specialisation driven by property-based abstraction.

The driver iterates ``S <- S + alpha(collect(pe(S)))`` to a fixpoint, turns
every fact of the fixpoint into a fresh version predicate and then unfolds
each version and folds the calls in its body onto versions.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .constraints import canonicalize, entails, equivalent, project
from .derivation import (
    BRANCH_RECURSIVE,
    Unfolder,
    UnfoldingRule,
    call_fact,
    collect,
    recursive_predicates,
)
from .properties import PropertySet, alpha, in_scope, rho
from .syntax import (
    Atom,
    Clause,
    ConstrainedFact,
    Constraint,
    Program,
    Variable,
    conj,
    standard_fact,
    standardize_names,
)

log = logging.getLogger(__name__)

PredKey = tuple[str, int]


class SpecializationError(RuntimeError):
    """An internal invariant of the algorithm failed."""


class IterationBudgetExceeded(SpecializationError):
    pass


class FactSet:
    """Constrained facts with canonical constraints, unique up to equivalence per predicate."""

    def __init__(self, facts: Iterable[ConstrainedFact] = (), initial: bool = False):
        self.facts: list[ConstrainedFact] = []
        self.initial: list[bool] = []
        self._by_pred: dict[PredKey, list[int]] = {}
        for f in facts:
            self.add(f, initial)

    def find(self, fact: ConstrainedFact) -> int | None:
        for i in self._by_pred.get(fact.key, ()):
            if equivalent(self.facts[i].constraint, fact.constraint):
                return i
        return None

    def add(self, fact: ConstrainedFact, initial: bool = False) -> bool:
        f = standard_fact(fact.atom, canonicalize(fact.constraint))
        if self.find(f) is not None:
            return False
        self._by_pred.setdefault(f.key, []).append(len(self.facts))
        self.facts.append(f)
        self.initial.append(initial)
        return True

    def of_pred(self, key: PredKey) -> list[int]:
        return list(self._by_pred.get(key, ()))

    def without(self, index: int) -> "FactSet":
        out = FactSet()
        for i, (f, ini) in enumerate(zip(self.facts, self.initial)):
            if i != index:
                out.add(f, ini)
        return out

    def entries(self) -> list[PredKey]:
        keys = [f.key for f, ini in zip(self.facts, self.initial) if ini]
        return list(dict.fromkeys(keys)) or list(dict.fromkeys(f.key for f in self.facts))

    def covers(self, fact: ConstrainedFact) -> bool:
        """Some member of the same predicate is entailed by fact."""
        return any(entails(fact.constraint, self.facts[i].constraint) for i in self._by_pred.get(fact.key, ()))

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self):
        return iter(self.facts)

    def __contains__(self, fact: ConstrainedFact) -> bool:
        return self.find(standard_fact(fact.atom, fact.constraint)) is not None


@dataclass
class Trace:
    iterations: list[list[ConstrainedFact]] = field(default_factory=list)

    def lines(self) -> list[str]:
        return [f"iteration {i}: " + ("; ".join(str(f).rstrip(".") for f in added) if added else "(fixpoint)")
                for i, added in enumerate(self.iterations, 1)]

    def records(self) -> list[dict]:
        return [{"iter": i, "added": [str(f).rstrip(".") for f in added]}
                for i, added in enumerate(self.iterations, 1)]


@dataclass
class Specializer:
    """Configuration shared by the fixpoint loop and the unfold/fold pass."""

    program: Program
    props: PropertySet = field(default_factory=PropertySet)
    rule: UnfoldingRule = BRANCH_RECURSIVE
    scope: str = "all"
    max_iterations: int = 1000
    node_budget: int | None = None
    frontier: bool = False
    entries: Sequence[PredKey] = ()

    def __post_init__(self):
        self.recursive = recursive_predicates(self.program, self.entries)
        self.unfolder = Unfolder(self.program, self.rule, recursive=self.recursive,
                                 node_budget=self.node_budget)

    def abstract(self, facts: Iterable[ConstrainedFact]) -> list[ConstrainedFact]:
        return alpha(facts, self.props, self.scope, self.recursive)

    def successors(self, fact: ConstrainedFact) -> list[ConstrainedFact]:
        return self.abstract(collect(self.unfolder.partial_eval(fact)))

    def fixpoint(self, s0: Iterable[ConstrainedFact]) -> tuple[FactSet, Trace]:
        s = FactSet()
        for f in s0:
            if not canonicalize(f.constraint).is_false:
                s.add(f, initial=True)
        trace = Trace()
        if not len(s):
            return s, trace
        initial_count: dict[PredKey, int] = {}
        for f in s:
            initial_count[f.key] = initial_count.get(f.key, 0) + 1
        todo = list(s.facts)
        for _ in range(self.max_iterations):
            current = todo if self.frontier else list(s.facts)
            added: list[ConstrainedFact] = []
            for f in current:
                for g in self.successors(f):
                    if s.add(g):
                        added.append(s.facts[-1])
            trace.iterations.append(added)
            if self.scope == "all":
                self._check_bound(s, initial_count)
            if not added:
                return s, trace
            todo = added
        raise IterationBudgetExceeded(f"no fixpoint after {self.max_iterations} iterations")

    def _check_bound(self, s: FactSet, initial_count: dict[PredKey, int]) -> None:
        for key in {f.key for f in s}:
            limit = 3 ** len(self.props.for_pred(key)) + initial_count.get(key, 0)
            if len(s.of_pred(key)) > limit:
                raise SpecializationError(f"{key[0]}/{key[1]} has more than {limit} versions")

    def closed(self, s: FactSet, exact: bool = True) -> bool:
        """Closedness of a fact set under partial evaluation.

        With ``exact`` every abstracted call must have an equivalent member
        (what folding needs); otherwise each raw call only needs a member it
        entails.
        """
        for f in s:
            calls = collect(self.unfolder.partial_eval(f))
            if exact:
                if any(g not in s for g in self.abstract(calls)):
                    return False
            elif not all(s.covers(g) for g in calls):
                return False
        return True


# --------------------------------------------------------------------------
# versions


@dataclass(frozen=True)
class Version:
    name: str
    pred: str
    fact: ConstrainedFact
    initial: bool = False

    @property
    def key(self) -> PredKey:
        return self.fact.key


@dataclass
class VersionTable:
    entries: list[Version] = field(default_factory=list)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def by_name(self) -> dict[str, Version]:
        return {v.name: v for v in self.entries}

    def of_pred(self, key: PredKey) -> list[Version]:
        return [v for v in self.entries if v.key == key]


def make_definitions(s: FactSet) -> VersionTable:
    """One fresh predicate ``<pred>__v<k>`` per fact; lone initial facts keep their name."""
    initial_per_pred: dict[PredKey, int] = {}
    for f, ini in zip(s.facts, s.initial):
        if ini:
            initial_per_pred[f.key] = initial_per_pred.get(f.key, 0) + 1
    table = VersionTable()
    for k, (f, ini) in enumerate(zip(s.facts, s.initial)):
        name = f"{f.atom.pred}__v{k}"
        if ini and initial_per_pred[f.key] == 1:
            name = f.atom.pred
        table.entries.append(Version(name, f.atom.pred, f, ini))
    return table


def _var_equalities(con: Constraint) -> list[tuple[Variable, Variable]]:
    out = []
    for a in con.linear():
        if a.op == "=" and a.expr.const == 0 and len(a.expr.terms) == 2:
            (x, cx), (y, cy) = a.expr.terms
            if cx == -cy:
                out.append((x, y))
    return out


def _simplify(clause: Clause) -> Clause:
    """Unify argument variables known to be equal, then eliminate local variables."""
    head = set(clause.head.args)
    while True:
        keep = set(head)
        for b in clause.body:
            keep.update(b.args)
        for a in clause.constraint.opaque():
            keep |= a.vars()
        con = project(clause.constraint, keep)
        clause = Clause(clause.head, con, clause.body, clause.origin)
        for x, y in _var_equalities(con):
            if y in head:
                x, y = y, x
            if y in head:
                continue
            m = {y: x}
            if any(len(set(b.rename(m).args)) < b.arity for b in clause.body):
                continue
            clause = clause.rename(m)
            break
        else:
            break
    origin = clause.origin
    if origin is not None:
        origin = (origin[0], project(origin[1], keep))
    return Clause(clause.head, clause.constraint, clause.body, origin)


class FoldError(SpecializationError):
    pass


def fold_target(spec: Specializer, table: VersionTable, clause: Clause, atom: Atom) -> Version:
    call = call_fact(clause, atom)
    candidates = table.of_pred(atom.key)
    if in_scope(atom.key, spec.scope, spec.recursive):
        want = rho(call.constraint, spec.props.for_pred(atom.key))
    else:
        want = call.constraint
    for v in candidates:
        if equivalent(v.fact.constraint, want):
            return v
    covering = [v for v in candidates if entails(call.constraint, v.fact.constraint)]
    if not covering:
        raise FoldError(f"no version covers the call {call}")
    best = covering[0]
    for v in covering[1:]:
        if entails(v.fact.constraint, best.fact.constraint) and not entails(best.fact.constraint, v.fact.constraint):
            best = v
    return best


def unfoldfold(table: VersionTable, spec: Specializer) -> Program:
    """Unfold every version's definition and fold body calls onto versions."""
    out: list[Clause] = []
    for v in table:
        for c in spec.unfolder.partial_eval(v.fact):
            body = tuple(b.with_pred(fold_target(spec, table, c, b).name) for b in c.body)
            folded = _simplify(Clause(c.head.with_pred(v.name), c.constraint, body, c.origin))
            out.append(standardize_names(folded))
    return Program(tuple(out))


def prune_unproductive(program: Program) -> Program:
    """Drop clauses that call predicates with no finite derivation."""
    productive: set[PredKey] = set()
    changed = True
    while changed:
        changed = False
        for c in program.clauses:
            if c.head.key not in productive and all(b.key in productive for b in c.body):
                productive.add(c.head.key)
                changed = True
    return Program(tuple(c for c in program.clauses if all(b.key in productive for b in c.body)
                         and c.head.key in productive))


@dataclass
class Specialization:
    program: Program
    table: VersionTable
    facts: FactSet
    trace: Trace
    spec: Specializer


def specialize(program: Program, s0: Sequence[ConstrainedFact], props: PropertySet | None = None,
               rule: UnfoldingRule = BRANCH_RECURSIVE, scope: str = "all", *,
               max_iterations: int = 1000, node_budget: int | None = None,
               frontier: bool = False, prune: bool = True, minimize: bool = False) -> Specialization:
    """Run the whole specialisation and return the program with its bookkeeping."""
    spec = Specializer(program, props or PropertySet(), rule, scope, max_iterations=max_iterations,
                       node_budget=node_budget, frontier=frontier, entries=[f.key for f in s0])
    facts, trace = spec.fixpoint(s0)
    table = make_definitions(facts)
    out = unfoldfold(table, spec)
    if prune:
        out = prune_unproductive(out)
    if minimize:
        from .analysis import minimize_versions
        out = minimize_versions(out, table)
    return Specialization(out, table, facts, trace, spec)


def fixpoint_facts(program: Program, s0: Sequence[ConstrainedFact], props: PropertySet | None = None,
                   rule: UnfoldingRule = BRANCH_RECURSIVE, scope: str = "all",
                   **kw) -> tuple[FactSet, Trace]:
    spec = Specializer(program, props or PropertySet(), rule, scope, entries=[f.key for f in s0], **kw)
    return spec.fixpoint(s0)


def check_closedness(s: FactSet, program: Program, rule: UnfoldingRule = BRANCH_RECURSIVE,
                     props: PropertySet | None = None, scope: str = "all") -> bool:
    """Closedness of s: ``collect(pe(s))`` is covered by s.

    Without properties the raw calls must each entail some member of s.
    With properties every abstracted call must itself be a member, which is
    the condition the loop stops on and folding relies on.
    """
    spec = Specializer(program, props or PropertySet(), rule, scope, entries=s.entries())
    return spec.closed(s, exact=props is not None)
