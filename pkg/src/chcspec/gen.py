"""Random linear CHC programs for property-based testing.

Every body-atom argument is boxed into the grid, so eliminating an
intermediate atom by unfolding cannot let values escape the grid; that keeps
grid-restricted ground evaluation exact for comparing a program with its
specialisation.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .syntax import Atom, Clause, Constraint, Lin, LinearExpr, Program, fresh


@dataclass(frozen=True)
class GenConfig:
    preds: int = 3
    max_arity: int = 2
    max_clauses: int = 3
    max_coeff: int = 2
    max_const: int = 3
    lo: int = -5
    hi: int = 5


def _box(v, lo: int, hi: int) -> list[Lin]:
    x = LinearExpr.var(v)
    return [Lin(LinearExpr.build({}, lo) - x, "<="), Lin(x - LinearExpr.build({}, hi), "<=")]


def _random_lin(rng: random.Random, vs, cfg: GenConfig) -> Lin:
    k = rng.randint(1, min(2, len(vs)))
    coeffs = {v: rng.choice([c for c in range(-cfg.max_coeff, cfg.max_coeff + 1) if c])
              for v in rng.sample(vs, k)}
    return Lin(LinearExpr.build(coeffs, rng.randint(-cfg.max_const, cfg.max_const)),
               rng.choice(["<=", "<", "<=", "="]))


def random_program(rng: random.Random, cfg: GenConfig = GenConfig()) -> Program:
    """Predicates p0..p{n-1}; p0 is the entry.  Each clause has at most one body atom."""
    arity = [rng.randint(1, cfg.max_arity) for _ in range(cfg.preds)]
    clauses: list[Clause] = []
    base = rng.randrange(1, cfg.preds) if cfg.preds > 1 else 0
    for i in range(cfg.preds):
        n = rng.randint(1, cfg.max_clauses)
        for j in range(n):
            head_args = tuple(fresh("X") for _ in range(arity[i]))
            lins: list[Lin] = []
            body: tuple[Atom, ...] = ()
            if not (i == base and j == 0) and rng.random() < 0.8:
                q = rng.randrange(cfg.preds)
                body_args = tuple(fresh("Y") for _ in range(arity[q]))
                body = (Atom(f"p{q}", body_args),)
                for y in body_args:
                    lins += _box(y, cfg.lo, cfg.hi)
                    # most body arguments are a small update of a head argument
                    if rng.random() < 0.7:
                        x = rng.choice(head_args)
                        step = rng.randint(-1, 1)
                        lins.append(Lin(LinearExpr.var(y) - LinearExpr.var(x) - LinearExpr.build({}, step), "="))
            vs = list(head_args) + [v for b in body for v in b.args]
            for _ in range(rng.randint(0, 2)):
                lins.append(_random_lin(rng, vs, cfg))
            clauses.append(Clause(Atom(f"p{i}", head_args), Constraint(tuple(lins)), body))
    return Program(tuple(clauses))
