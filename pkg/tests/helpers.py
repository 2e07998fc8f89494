"""Independent brute-force checks on small integer grids."""
from fractions import Fraction
from itertools import product

from chcspec.parser import parse_clause
from chcspec.syntax import Constraint, Lin, Variable

_NAMED: dict[str, Variable] = {}


def var(name: str) -> Variable:
    """One shared variable per name across a test session."""
    if name not in _NAMED:
        _NAMED[name] = Variable(name, -10_000 - len(_NAMED))
    return _NAMED[name]


def con(text: str) -> Constraint:
    """Constraint from clause-body syntax, e.g. ``"X>0, Y=<X"``; same name, same variable."""
    c = parse_clause(f"c :- {text}." if text else "c.").constraint
    return c.rename({v: var(v.name) for v in c.vars()})


def holds(c: Constraint, env) -> bool:
    if c.is_false:
        return False
    for a in c.atoms:
        if isinstance(a, Lin):
            val = a.expr.const + sum(k * env[v] for v, k in a.expr.terms)
        else:
            p = a.lhs - a.rhs
            val = Fraction(0)
            for mono, k in p.terms:
                t = k
                for v in mono:
                    t *= env[v]
                val += t
        if a.op == "=" and val != 0 or a.op == "<=" and val > 0 or a.op == "<" and val >= 0:
            return False
    return True


def grid_points(variables, lo=-5, hi=5):
    variables = sorted(variables)
    for vals in product(range(lo, hi + 1), repeat=len(variables)):
        yield dict(zip(variables, map(Fraction, vals)))


def grid_models(c: Constraint, variables, lo=-5, hi=5):
    return [e for e in grid_points(variables, lo, hi) if holds(c, e)]


def random_lin(rng, variables, max_coeff=3, max_const=4) -> Lin:
    """A random linear atom with integer coefficients in [-max_coeff, max_coeff]."""
    from chcspec.syntax import LinearExpr
    k = rng.randint(1, len(variables))
    coeffs = {v: Fraction(rng.randint(-max_coeff, max_coeff)) for v in rng.sample(list(variables), k)}
    return Lin(LinearExpr.build(coeffs, rng.randint(-max_const, max_const)), rng.choice(["=", "<=", "<", "<="]))


def random_constraint(rng, variables, max_atoms=3) -> Constraint:
    return Constraint(tuple(random_lin(rng, variables) for _ in range(rng.randint(1, max_atoms))))


def clauses_equivalent(c1, c2) -> bool:
    """Same head/body predicates and equivalent constraints, aligning argument variables by position."""
    from chcspec.constraints import equivalent, project
    atoms1, atoms2 = (c1.head, *c1.body), (c2.head, *c2.body)
    if [a.key for a in atoms1] != [a.key for a in atoms2]:
        return False
    fwd, back = {}, {}
    for a1, a2 in zip(atoms1, atoms2):
        for x, y in zip(a1.args, a2.args):
            if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
                return False
    keep = set(back)
    return equivalent(project(c1.constraint, set(fwd)).rename(fwd), project(c2.constraint, keep))


def match_clauses(got, want) -> bool:
    """A bijection between two clause lists pairing equivalent clauses."""
    if len(got) != len(want):
        return False
    free = list(got)
    for w in want:
        hit = next((g for g in free if clauses_equivalent(g, w)), None)
        if hit is None:
            return False
        free.remove(hit)
    return True


ACCEPTANCE: list[str] = []
