"""Bottom-up ground evaluation of CHCs on a finite integer grid.

Every variable ranges over ``[lo, hi]``.  Each derived ground atom carries
the set of tree dimensions of its proofs as a bitmask; dimensions at or
above ``dim_cap`` are collapsed into the ``dim_cap`` bit.

An iteration is one pass over the strongly connected components of the
dependency graph in dependency order, saturating each component before
moving on; a second pass that changes nothing confirms the fixpoint.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import networkx as nx
import numpy as np

from ..syntax import Program
from .plan import CompiledProgram, compile_program

try:
    if os.environ.get("CHCSPEC_PURE_PYTHON"):
        raise ImportError
    from ._kernel import run_clause as _run_compiled
except ImportError:
    _run_compiled = None
from ._kernel_py import run_clause as _run_python

KERNEL = "compiled" if _run_compiled is not None else "python"

PredKey = tuple[str, int]


@dataclass(frozen=True)
class GridSpec:
    lo: int = -5
    hi: int = 5
    max_iterations: int = 12
    dim_cap: int = 8
    max_rounds: int = 100_000

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("grid needs lo <= hi")
        if not 0 <= self.dim_cap <= 30:
            raise ValueError("dim_cap must lie in 0..30")

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class GroundAtom:
    pred: str
    args: tuple[int, ...]
    dims: frozenset[int]


@dataclass
class EvalResult:
    relations: dict[PredKey, dict[tuple[int, ...], frozenset[int]]]
    converged: bool
    iterations: int
    grid: GridSpec = field(default_factory=GridSpec)

    def tuples(self, key: PredKey) -> set[tuple[int, ...]]:
        return set(self.relations.get(key, {}))

    def atoms(self) -> list[GroundAtom]:
        return [GroundAtom(k[0], args, dims) for k, rel in self.relations.items()
                for args, dims in sorted(rel.items())]

    def min_dimension(self, key: PredKey, args: tuple[int, ...]) -> int | None:
        dims = self.relations.get(key, {}).get(args)
        return min(dims) if dims else None


def _components(cp: CompiledProgram) -> list[list[int]]:
    """Clause-plan indices grouped by head component, callees first."""
    g = nx.DiGraph()
    g.add_nodes_from(cp.keys)
    for p in cp.plans:
        for b in p.clause.body:
            g.add_edge(b.key, p.clause.head.key)
    cond = nx.condensation(g)
    order = list(nx.topological_sort(cond))
    comp_of = cond.graph["mapping"]
    rank = {c: i for i, c in enumerate(order)}
    groups: dict[int, list[int]] = {}
    for i, p in enumerate(cp.plans):
        groups.setdefault(rank[comp_of[p.clause.head.key]], []).append(i)
    return [groups[r] for r in sorted(groups)]


def _decode(idx: int, arity: int, lo: int, w: int) -> tuple[int, ...]:
    out = []
    for _ in range(arity):
        out.append(idx % w + lo)
        idx //= w
    return tuple(reversed(out))


def ground_eval(program: Program, grid: GridSpec = GridSpec(), kernel: str | None = None) -> EvalResult:
    """Least model of the program restricted to the grid, with proof dimensions."""
    run = _pick(kernel)
    cp = compile_program(program)
    w, lo = grid.width, grid.lo
    sizes = [w ** arity for _, arity in cp.keys]
    rel_off = np.zeros(len(sizes) + 1, dtype=np.int64)
    rel_off[1:] = np.cumsum(sizes)
    masks = np.zeros(int(rel_off[-1]) or 1, dtype=np.uint32)
    items = np.zeros_like(masks, dtype=np.int64)
    counts = np.zeros(max(len(sizes), 1), dtype=np.int64)
    groups = _components(cp)

    def apply(i: int) -> int:
        p = cp.plans[i]
        return run(p.code, cp.polys, p.nvars, p.nbody, masks, rel_off, items, rel_off,
                   counts, lo, w, grid.dim_cap)

    converged = False
    it = 0
    while it < grid.max_iterations:
        it += 1
        changed = False
        for group in groups:
            for _ in range(grid.max_rounds):
                round_changed = False
                for i in group:
                    round_changed |= bool(apply(i))
                changed |= round_changed
                if not round_changed:
                    break
        if not changed:
            converged = True
            break
    relations: dict[PredKey, dict] = {}
    for r, key in enumerate(cp.keys):
        rel = relations[key] = {}
        base = int(rel_off[r])
        for j in range(int(counts[r])):
            idx = int(items[base + j])
            m = int(masks[base + idx])
            rel[_decode(idx, key[1], lo, w)] = frozenset(d for d in range(grid.dim_cap + 1) if m >> d & 1)
    return EvalResult(relations, converged, it, grid)


def _pick(kernel: str | None):
    if kernel is None:
        return _run_compiled or _run_python
    if kernel == "python":
        return _run_python
    if kernel == "compiled":
        if _run_compiled is None:
            raise RuntimeError("compiled kernel is not built")
        return _run_compiled
    raise ValueError(f"unknown kernel {kernel!r}")


class NotConverged(RuntimeError):
    pass


def equivalent_on_grid(p1: Program, p2: Program,
                       entry_map: Mapping[PredKey, PredKey] | Iterable[tuple[PredKey, PredKey]],
                       grid: GridSpec = GridSpec()) -> tuple[bool, tuple | None]:
    """Compare the ground answers of mapped entry predicates.

    Returns ``(True, None)`` or ``(False, (pred, args, side))`` where side
    names the program that derives the witness.  Raises NotConverged when
    either evaluation hit its iteration budget.
    """
    pairs = list(entry_map.items()) if isinstance(entry_map, Mapping) else list(entry_map)
    r1, r2 = ground_eval(p1, grid), ground_eval(p2, grid)
    if not (r1.converged and r2.converged):
        raise NotConverged("ground evaluation did not reach a fixpoint")
    for k1, k2 in pairs:
        a, b = r1.tuples(k1), r2.tuples(k2)
        if a != b:
            only1 = sorted(a - b)
            if only1:
                return False, (k1[0], only1[0], "first")
            return False, (k2[0], sorted(b - a)[0], "second")
    return True, None
