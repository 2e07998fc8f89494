import random

import pytest

from chcspec.gen import random_program
from chcspec.oracle import KERNEL, GridSpec, NotConverged, equivalent_on_grid, ground_eval
from chcspec.oracle._kernel_py import combine_dims
from chcspec.parser import parse_program

from conftest import load_program


def test_nested_loop_start_is_derivable(nested_loop):
    r = ground_eval(nested_loop, GridSpec(-3, 3))
    assert r.converged
    assert r.tuples(("start", 0)) == {()}
    # while0 holds everywhere: either X=<0 or the loops terminate on the grid
    assert (1, -3, -3) in r.tuples(("while0", 3))


def test_removing_a_clause_is_detected(nested_loop):
    from chcspec.syntax import Program
    smaller = Program(nested_loop.clauses[:-1])
    ok, witness = equivalent_on_grid(nested_loop, smaller, [(("while0", 3), ("while0", 3))], GridSpec(-3, 3))
    assert not ok
    pred, args, side = witness
    assert pred == "while0" and side == "first"


def test_fib_values_and_dimensions():
    r = ground_eval(load_program("fib.chc"), GridSpec(0, 8))
    fib = dict(r.tuples(("fib", 2)))
    assert fib == {0: 0, 1: 1, 2: 1, 3: 2, 4: 3, 5: 5, 6: 8}
    assert r.min_dimension(("fib", 2), (0, 0)) == 0
    assert r.min_dimension(("fib", 2), (2, 1)) == 1
    assert r.min_dimension(("fib", 2), (5, 5)) == 2
    assert r.min_dimension(("fib", 2), (7, 13)) is None


def test_linear_program_has_dimension_zero(nested_loop):
    r = ground_eval(nested_loop, GridSpec(-2, 2))
    assert all(a.dims == frozenset({0}) for a in r.atoms())


def test_combine_dims():
    # one child of dimension 1 and one of dimension 1: node dimension 2
    assert combine_dims([0b10, 0b10], 8) & 0b100
    # children 0 and 1: dimension 1 only
    assert combine_dims([0b01, 0b10], 8) == 0b10
    assert combine_dims([0b1], 8) == 0b1
    assert combine_dims([], 8) == 0b1


@pytest.mark.skipif(KERNEL != "compiled", reason="compiled kernel not built")
def test_kernels_agree_on_random_programs():
    from chcspec.gen import GenConfig
    cfg = GenConfig(max_arity=3)
    for seed in range(40):
        p = random_program(random.Random(seed), cfg)
        a = ground_eval(p, GridSpec(-3, 3), kernel="python")
        b = ground_eval(p, GridSpec(-3, 3), kernel="compiled")
        assert a.relations.keys() == b.relations.keys()
        for k in a.relations:
            assert a.atoms() == b.atoms(), seed


@pytest.mark.skipif(KERNEL != "compiled", reason="compiled kernel not built")
def test_kernels_agree_on_dimensions():
    p = load_program("fib.chc")
    a = ground_eval(p, GridSpec(0, 7), kernel="python")
    b = ground_eval(p, GridSpec(0, 7), kernel="compiled")
    assert a.atoms() == b.atoms()


def test_larger_grid_derives_a_superset():
    for seed in range(20):
        p = random_program(random.Random(seed))
        small = ground_eval(p, GridSpec(-2, 2))
        big = ground_eval(p, GridSpec(-4, 4))
        for key in p.predicates():
            assert small.tuples(key) <= big.tuples(key)


def test_non_convergence_is_reported():
    p = parse_program("p(X) :- X=0.\np(Y) :- Y=X+1, p(X).")
    r = ground_eval(p, GridSpec(0, 50, max_iterations=12))
    assert r.converged
    q = parse_program("a(X) :- X=0.\nb(X) :- a(X).\nc(X) :- b(X).\nd(X) :- c(X).")
    with pytest.raises(NotConverged):
        equivalent_on_grid(q, q, {("d", 1): ("d", 1)}, GridSpec(0, 1, max_iterations=1))


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec(3, 1)
    with pytest.raises(ValueError):
        GridSpec(0, 1, dim_cap=40)


def test_opaque_constraints_are_evaluated():
    r = ground_eval(load_program("power.chc"), GridSpec(-2, 2))
    assert r.converged


def naive_least_model(program, lo, hi):
    """Enumerate every grid assignment of every clause; independent of the compiled plans."""
    from helpers import grid_points, holds
    model = {k: set() for k in program.predicates()}
    changed = True
    while changed:
        changed = False
        for c in program.clauses:
            for env in grid_points(c.vars(), lo, hi):
                if not holds(c.constraint, env):
                    continue
                if all(tuple(int(env[v]) for v in b.args) in model[b.key] for b in c.body):
                    t = tuple(int(env[v]) for v in c.head.args)
                    if t not in model[c.head.key]:
                        model[c.head.key].add(t)
                        changed = True
    return model


def test_ground_eval_matches_brute_force():
    from chcspec.gen import GenConfig
    cfg = GenConfig(lo=-2, hi=2)
    for seed in range(25):
        p = random_program(random.Random(1000 + seed), cfg)
        want = naive_least_model(p, -2, 2)
        got = ground_eval(p, GridSpec(-2, 2))
        for key, rel in want.items():
            assert got.tuples(key) == rel, (seed, key)


def test_pure_python_fallback_is_selected_by_environment():
    import os
    import subprocess
    import sys
    env = dict(os.environ, CHCSPEC_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from chcspec.oracle import KERNEL; print(KERNEL)"],
                         capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"
