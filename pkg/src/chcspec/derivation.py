"""Unfolding, partial derivation trees and partial evaluation of constrained facts."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .constraints import canonicalize, equivalent, is_sat, project
from .syntax import (
    FALSE,
    TRUE,
    Atom,
    Clause,
    ConstrainedFact,
    Constraint,
    Program,
    conj,
    eq,
    fresh,
    rename_apart,
    render_clause,
    standard_fact,
)

DEFAULT_NODE_BUDGET = 10_000

PredKey = tuple[str, int]


class UnfoldError(ValueError):
    pass


class NodeBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class UnfoldingRule:
    """Which atom to unfold (always leftmost) and when to stop a branch.

    ``one-step`` unfolds the root only, ``depth`` unfolds ``k`` levels and
    ``branch-recursive`` keeps unfolding until the leftmost atom is a branch
    point, a recursive predicate or a predicate defined only by constraint
    facts (kept so that its calls remain specialisation points).
    """

    kind: str = "branch-recursive"
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("one-step", "branch-recursive", "depth"):
            raise ValueError(f"unknown unfolding rule {self.kind!r}")
        if self.kind == "depth" and self.k < 1:
            raise ValueError("depth must be at least 1")

    @classmethod
    def parse(cls, text: str) -> "UnfoldingRule":
        if text == "one-step":
            return cls("one-step")
        if text in ("branch-recursive", "branch-or-recursive"):
            return cls("branch-recursive")
        if text.startswith("depth:"):
            try:
                return cls("depth", int(text[6:]))
            except ValueError:
                pass
        raise ValueError(f"bad unfolding rule {text!r} (one-step | branch-recursive | depth:<k>)")

    def __str__(self) -> str:
        return f"depth:{self.k}" if self.kind == "depth" else self.kind


ONE_STEP = UnfoldingRule("one-step")
BRANCH_RECURSIVE = UnfoldingRule("branch-recursive")


def unfold_step(c1: Clause, c2: Clause, i: int) -> Clause:
    """Resolve the i-th body atom of c1 with c2 (variables already apart)."""
    if not 0 <= i < len(c1.body):
        raise UnfoldError(f"no body atom at index {i}")
    target = c1.body[i]
    if target.key != c2.head.key:
        raise UnfoldError(f"cannot unfold {target.pred}/{target.arity} with a clause for "
                          f"{c2.head.pred}/{c2.head.arity}")
    links = Constraint(tuple(eq(x, y) for x, y in zip(target.args, c2.head.args)))
    combined = conj(c1.constraint, c2.constraint, links)
    if not is_sat(combined):
        return Clause(c1.head, FALSE, ())
    body = c1.body[:i] + c2.body + c1.body[i + 1:]
    return Clause(c1.head, combined, body)


def recursive_predicates(program: Program, entries: Iterable[PredKey]) -> frozenset[PredKey]:
    """Targets of back edges in a depth-first walk of the dependency graph."""
    succ: dict[PredKey, list[PredKey]] = {}
    for c in program.clauses:
        out = succ.setdefault(c.head.key, [])
        for b in c.body:
            if b.key not in out:
                out.append(b.key)
    rec: set[PredKey] = set()
    state: dict[PredKey, int] = {}  # 1 on stack, 2 done
    roots = list(entries) + [k for k in succ]
    for root in roots:
        if root in state:
            continue
        stack = [(root, iter(succ.get(root, ())))]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
            elif state.get(nxt) == 1:
                rec.add(nxt)
            elif nxt not in state:
                state[nxt] = 1
                stack.append((nxt, iter(succ.get(nxt, ()))))
    return frozenset(rec)


def branch_points(program: Program) -> frozenset[PredKey]:
    return frozenset(k for k, ix in program.index.items() if len(ix) > 1)


def leaf_predicates(program: Program) -> frozenset[PredKey]:
    """Predicates defined only by constraint facts."""
    return frozenset(k for k, ix in program.index.items()
                     if all(not program.clauses[i].body for i in ix))


@dataclass
class Node:
    clause: Clause
    status: str = "internal"  # internal | complete | failed | incomplete
    children: list["Node"] = field(default_factory=list)
    depth: int = 0
    path: tuple[int, ...] = ()
    path_constraint: Constraint = TRUE


@dataclass
class PartialTree:
    root: Node
    size: int

    def leaves(self) -> list[Node]:
        out: list[Node] = []
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n.status == "internal":
                stack.extend(reversed(n.children))
            else:
                out.append(n)
        return out

    def dump(self) -> str:
        lines: list[str] = []

        def walk(n: Node, indent: int) -> None:
            tag = "" if n.status == "internal" else f"  [{n.status}]"
            lines.append("  " * indent + render_clause(n.clause) + tag)
            for ch in n.children:
                walk(ch, indent + 1)

        walk(self.root, 0)
        return "\n".join(lines) + "\n"


def _node_budget(budget: int | None) -> int:
    if budget is not None:
        return budget
    env = os.environ.get("CHCSPEC_NODE_BUDGET")
    return int(env) if env else DEFAULT_NODE_BUDGET


class Unfolder:
    """Builds partial trees for one program under one rule.

    The recursive-predicate set is fixed at construction, computed from the
    entry predicates unless given explicitly.
    """

    def __init__(self, program: Program, rule: UnfoldingRule = BRANCH_RECURSIVE,
                 entries: Iterable[PredKey] = (), recursive: frozenset[PredKey] | None = None,
                 node_budget: int | None = None):
        self.program = program
        self.rule = rule
        self.recursive = recursive_predicates(program, entries) if recursive is None else recursive
        self.branches = branch_points(program)
        self.leaves = leaf_predicates(program)
        self.node_budget = _node_budget(node_budget)
        self._cache: dict[ConstrainedFact, list[Clause]] = {}

    def _expand(self, node: Node) -> bool:
        if not node.clause.body:
            return False
        if node.depth == 0:
            return True
        if self.rule.kind == "one-step":
            return False
        if self.rule.kind == "depth":
            return node.depth < self.rule.k
        key = node.clause.body[0].key
        return key not in self.recursive and key not in self.branches and key not in self.leaves

    def tree(self, fact: ConstrainedFact) -> PartialTree:
        args = tuple(fresh(v.name) for v in fact.atom.args)
        head = Atom(fact.atom.pred, args)
        phi = fact.on(args)
        root = Node(Clause(head, phi, (head,)))
        size = 1
        stack = [root]
        while stack:
            node = stack.pop()
            if not self._expand(node):
                node.status = "complete" if not node.clause.body else "incomplete"
                continue
            for idx, d in self.program.defining(node.clause.body[0].key):
                d = rename_apart(d)
                child = unfold_step(node.clause, d, 0)
                size += 1
                if size > self.node_budget:
                    raise NodeBudgetExceeded(
                        f"partial tree for {fact} exceeds {self.node_budget} nodes")
                links = Constraint(tuple(eq(x, y) for x, y in zip(node.clause.body[0].args, d.head.args)))
                n = Node(child, depth=node.depth + 1, path=node.path + (idx,),
                         path_constraint=conj(node.path_constraint, d.constraint, links))
                if child.constraint.is_false:
                    n.status = "failed"
                node.children.append(n)
            stack.extend(ch for ch in reversed(node.children) if ch.status != "failed")
        return PartialTree(root, size)

    def partial_eval(self, fact: ConstrainedFact) -> list[Clause]:
        """Frontier clauses of the partial tree, one per non-failing branch."""
        cached = self._cache.get(fact)
        if cached is None:
            out = []
            for leaf in self.tree(fact).leaves():
                if leaf.status == "failed":
                    continue
                c = leaf.clause
                out.append(Clause(c.head, c.constraint, c.body, (leaf.path, leaf.path_constraint)))
            cached = self._cache[fact] = out
        return cached


def build_partial_tree(fact: ConstrainedFact, program: Program,
                       rule: UnfoldingRule = BRANCH_RECURSIVE, **kw) -> PartialTree:
    kw.setdefault("entries", [fact.key])
    return Unfolder(program, rule, **kw).tree(fact)


def partial_eval(fact: ConstrainedFact, program: Program,
                 rule: UnfoldingRule = BRANCH_RECURSIVE, **kw) -> list[Clause]:
    kw.setdefault("entries", [fact.key])
    return Unfolder(program, rule, **kw).partial_eval(fact)


def call_fact(clause: Clause, atom: Atom) -> ConstrainedFact:
    """The constrained fact for one body atom: its projected call constraint."""
    return standard_fact(atom, project(clause.constraint, atom.args))


def collect(clauses: Sequence[Clause]) -> list[ConstrainedFact]:
    """Constrained facts for every body atom, merged up to equivalence."""
    out: list[ConstrainedFact] = []
    for c in clauses:
        for a in c.body:
            f = call_fact(c, a)
            if not any(g.key == f.key and equivalent(g.constraint, f.constraint) for g in out):
                out.append(f)
    return out


def canonical_fact(f: ConstrainedFact) -> ConstrainedFact:
    return ConstrainedFact(f.atom, canonicalize(f.constraint))
