"""Program-level analyses: dependency graphs, version minimisation and tree dimension."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import TYPE_CHECKING, Sequence

from .constraints import canonicalize, entails, project
from .properties import PropertySet, dimension_ladder
from .syntax import (
    Atom,
    Clause,
    ConstrainedFact,
    Constraint,
    Lin,
    LinearExpr,
    Program,
    Variable,
    conj,
    fresh,
    standard_fact,
    standardize_names,
    std_vars,
)

if TYPE_CHECKING:
    from .specializer import VersionTable

PredKey = tuple[str, int]


@dataclass
class PredDepGraph:
    nodes: list[PredKey] = field(default_factory=list)
    edges: list[tuple[PredKey, PredKey]] = field(default_factory=list)
    entries: frozenset[PredKey] = frozenset()

    def successors(self, key: PredKey) -> list[PredKey]:
        return [b for a, b in self.edges if a == key]


def pred_dep_graph(program: Program, entries: Sequence[PredKey] = ()) -> PredDepGraph:
    """One node per predicate and one edge per (clause head, body atom) pair."""
    nodes: dict[PredKey, None] = {}
    edges = []
    for c in program.clauses:
        nodes.setdefault(c.head.key)
        for b in c.body:
            nodes.setdefault(b.key)
            edges.append((c.head.key, b.key))
    return PredDepGraph(list(nodes), edges, frozenset(entries))


def _label(key: PredKey, clash: set[str]) -> str:
    return f"{key[0]}/{key[1]}" if key[0] in clash else key[0]


def emit_dot(graph: PredDepGraph) -> str:
    names = [k[0] for k in graph.nodes]
    clash = {n for n in names if names.count(n) > 1}
    lines = ["digraph g {"]
    for k in sorted(graph.nodes):
        attrs = " [shape=doublecircle]" if k in graph.entries else ""
        lines.append(f'  "{_label(k, clash)}"{attrs};')
    for a, b in sorted(graph.edges):
        lines.append(f'  "{_label(a, clash)}" -> "{_label(b, clash)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# minimisation


def _signature(clauses: list[Clause], block: dict[str, int]):
    sig = set()
    for c in clauses:
        path = c.origin[0] if c.origin is not None else None
        if path is None:
            # no provenance: fall back to the canonical clause text
            path = str(standardize_names(Clause(c.head.with_pred("_"), canonicalize(c.constraint),
                                                tuple(b.with_pred(str(block.get(b.pred, b.pred)))
                                                      for b in c.body))))
        sig.add((path, tuple(block.get(b.pred, b.pred) for b in c.body)))
    return frozenset(sig)


def minimize_versions(program: Program, table: "VersionTable") -> Program:
    """Merge versions that behave identically, by partition refinement.

    Two versions of one original predicate stay together while they have
    clauses along the same unfolding paths calling the same blocks.  A merged
    block keeps the path constraints plus the conjuncts of the
    representative's version constraint that all members share.
    """
    versions = {v.name: v for v in table}
    defs: dict[str, list[Clause]] = {}
    for c in program.clauses:
        defs.setdefault(c.head.pred, []).append(c)
    names = [n for n in versions if n in defs]
    group_of = {n: versions[n].key for n in names}
    keys = list(dict.fromkeys(group_of.values()))
    block = {n: keys.index(group_of[n]) for n in names}
    while True:
        sigs: dict[tuple, int] = {}
        new = {}
        for n in names:
            s = (block[n], _signature(defs[n], block))
            new[n] = sigs.setdefault(s, len(sigs))
        if len(sigs) == len(set(block.values())):
            break
        block = new
    members: dict[int, list[str]] = {}
    for n in names:
        members.setdefault(block[n], []).append(n)
    rep: dict[str, str] = {}
    for ms in members.values():
        r = next((m for m in ms if versions[m].initial), ms[0])
        for m in ms:
            rep[m] = r
    out: list[Clause] = []
    for ms in members.values():
        r = rep[ms[0]]
        if len(ms) == 1:
            out.extend(_rebody(c, rep) for c in defs[r])
            continue
        shared = _shared_conjuncts([versions[m].fact.constraint for m in ms], versions[r].fact.constraint)
        for c in defs[r]:
            if c.origin is None:
                out.append(_rebody(c, rep))
                continue
            psi = shared.rename(dict(zip(std_vars(c.head.arity), c.head.args)))
            con = canonicalize(conj(c.origin[1], psi))
            out.append(standardize_names(_rebody(Clause(c.head, con, c.body, c.origin), rep)))
    return Program(tuple(out))


def _rebody(c: Clause, rep: dict[str, str]) -> Clause:
    return Clause(c.head, c.constraint, tuple(b.with_pred(rep.get(b.pred, b.pred)) for b in c.body), c.origin)


def _shared_conjuncts(phis: list[Constraint], base: Constraint) -> Constraint:
    base = canonicalize(base)
    keep = [a for a in base.atoms if all(entails(p, Constraint((a,))) for p in phis)]
    return Constraint(tuple(keep))


# --------------------------------------------------------------------------
# tree dimension


def _le(x: LinearExpr, y: LinearExpr) -> Lin:
    return Lin(x - y, "<=")


def _eq(x: LinearExpr, y: LinearExpr) -> Lin:
    return Lin(x - y, "=")


def dimension_cases(ks: Sequence[Variable], k: Variable) -> list[list[Lin]]:
    """Constraint sets, one per clause copy, relating body dimensions ks to the head k."""
    K = LinearExpr.var(k)
    one = LinearExpr.build({}, 1)
    kv = [LinearExpr.var(x) for x in ks]
    nonneg = [Lin(-x, "<=") for x in kv]
    if not ks:
        return [[_eq(K, LinearExpr.build({}, 0))]]
    if len(ks) == 1:
        return [[_eq(K, kv[0])] + nonneg]
    cases = []
    for i in range(len(ks)):
        cs = [_eq(kv[i], K)] + [_le(kv[j] + one, K) for j in range(len(ks)) if j != i]
        cases.append(cs + nonneg)
    for i, j in combinations(range(len(ks)), 2):
        cs = [_eq(kv[i], K - one), _eq(kv[j], K - one)]
        cs += [_le(kv[m] + one, K) for m in range(len(ks)) if m not in (i, j)]
        cases.append(cs + nonneg)
    return cases


def dimension_instrument(program: Program) -> Program:
    """Add a trailing tree-dimension argument to every predicate.

    Clauses with two or more body atoms are split into one copy per way the
    head dimension can arise: a unique maximal subtree, or a pair of
    subtrees sharing the maximum.
    """
    out: list[Clause] = []
    for c in program.clauses:
        k = fresh("K")
        ks = [fresh("K") for _ in c.body]
        head = Atom(c.head.pred, c.head.args + (k,))
        body = tuple(Atom(b.pred, b.args + (x,)) for b, x in zip(c.body, ks))
        for case in dimension_cases(ks, k):
            out.append(standardize_names(Clause(head, conj(c.constraint, *case), body)))
    return Program(tuple(out))


DIM_MODES = ("exact", "atmost", "above")


def dimension_bound_setup(program: Program, entry: PredKey, mode: str,
                          d: int) -> tuple[list[ConstrainedFact], PropertySet]:
    """Entry fact bounding the last argument of ``entry`` and the dimension ladder up to d."""
    name, arity = entry
    if arity == 0:
        raise ValueError("entry predicate has no dimension argument")
    if entry not in program.predicates():
        raise ValueError(f"{name}/{arity} does not occur in the program")
    args = std_vars(arity)
    K = LinearExpr.var(args[-1])
    dd = LinearExpr.build({}, d)
    if mode == "exact":
        lin = _eq(K, dd)
    elif mode == "atmost":
        lin = _le(K, dd)
    elif mode == "above":
        lin = _le(dd + LinearExpr.build({}, 1), K)
    else:
        raise ValueError(f"unknown dimension mode {mode!r}")
    fact = standard_fact(Atom(name, args), Constraint((lin,)))
    return [fact], dimension_ladder(program, d)
