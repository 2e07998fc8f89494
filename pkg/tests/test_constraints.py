from fractions import Fraction

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from chcspec.constraints import (
    SatResult,
    canonicalize,
    check_entailment,
    entails,
    entails_negation,
    equivalent,
    is_sat,
    project,
)
from chcspec.syntax import FALSE, TRUE, Constraint, Lin, LinearExpr, std_vars

from helpers import con, grid_models, holds, var

X, Y, Z = std_vars(3)


def vars_of(text):
    c = con(text)
    return {v.name: v for v in c.vars()}


def test_is_sat_examples():
    assert is_sat(con("X>=1, X=<0")) is SatResult.UNSAT
    assert is_sat(TRUE) is SatResult.SAT
    assert is_sat(con("A>0, B>=C, A-D=1"))
    assert not is_sat(FALSE)
    # strictness is exact
    assert not is_sat(con("X<1, X>0, 2*X>=2"))
    assert is_sat(con("X<1, X>0"))


def test_opaque_is_ignored_by_sat():
    assert is_sat(con("Z = X*Y, X=1"))


def test_entails_examples():
    assert entails(con("X>=1"), con("X>=0"))
    phi = con("X>0, Y=<X")
    assert entails(phi, phi)
    assert not entails(con("D>-1, B>=C"), con("D>0"))
    # the witness D=0 is a model of the left side and not of the right
    assert is_sat(con("D>-1, B>=C, D=0"))


def test_opaque_entailment_is_syntactic():
    c = con("Z = X*Y, X>0")
    op = Constraint((c.atoms[0],))
    r = check_entailment(c, op)
    assert r.holds and r.opaque
    r = check_entailment(con("X>0"), op)
    assert not r.holds and r.opaque


def test_entails_negation_examples():
    assert entails_negation(con("A>0"), con("A=<0"))
    assert entails_negation(con("B>=C"), con("B<C"))
    assert not entails_negation(con("A>0"), con("B>=C"))


def test_project_onto_call_arguments():
    p = project(con("A>0, B>=C, A-D=1"), [var("D"), var("B"), var("C")])
    assert var("A") not in p.vars()
    assert equivalent(p, con("D>-1, B>=C"))


def test_project_chain_of_equalities():
    p = project(con("X=Y, Y=Z"), [var("X"), var("Z")])
    assert len(p.atoms) == 1 and p.atoms[0].op == "="
    assert equivalent(p, con("X=Z"))
    models = grid_models(p, [var("X"), var("Z")])
    assert len(models) == 11 and all(m[var("X")] == m[var("Z")] for m in models)


def test_project_drops_opaque_on_eliminated_vars():
    c = con("Z = X*Y, X>0, Y>0")
    assert all(isinstance(a, Lin) for a in project(c, [var("X"), var("Y")]).atoms)
    assert any(not isinstance(a, Lin) for a in project(c, [var("X"), var("Y"), var("Z")]).atoms)


def test_project_onto_all_variables_is_identity():
    c = con("X>0, Y=<X, X+Y<3")
    assert equivalent(project(c, c.vars()), c)


def test_canonicalize_examples():
    out = canonicalize(con("X>=0, X>=-1"))
    assert len(out.atoms) == 1 and equivalent(out, con("X>=0"))
    assert canonicalize(con("X>=1, X=<0")).is_false
    assert canonicalize(con("2*X>=2")) == canonicalize(con("X>=1"))


def test_canonicalize_merges_opposite_inequalities():
    out = canonicalize(con("X>=Y, Y>=X, X=<3"))
    assert [a.op for a in out.atoms].count("=") == 1 and len(out.atoms) == 2


def test_equivalent_examples():
    assert equivalent(con("B>=C"), con("C=<B"))
    assert not equivalent(TRUE, con("X>=0"))


# -- property tests against the grid oracle ---------------------------------

coef = st.integers(-3, 3)
VARS = [X, Y, Z]


@st.composite
def lin_atom(draw):
    coeffs = {v: Fraction(draw(coef)) for v in VARS[:draw(st.integers(1, 3))]}
    return Lin(LinearExpr.build(coeffs, draw(st.integers(-4, 4))), draw(st.sampled_from(["=", "<=", "<"])))


constraints = st.lists(lin_atom(), min_size=0, max_size=4).map(lambda xs: Constraint(tuple(xs)))


@settings(max_examples=200, deadline=None)
@given(constraints)
def test_unsat_has_no_grid_model(phi):
    if not is_sat(phi):
        assert not grid_models(phi, VARS, -4, 4)


@settings(max_examples=200, deadline=None)
@given(constraints, constraints)
def test_entails_sound_on_grid(phi, psi):
    if entails(phi, psi):
        assert all(holds(psi, m) for m in grid_models(phi, VARS, -4, 4))


@settings(max_examples=200, deadline=None)
@given(constraints, constraints)
def test_entails_complete_on_grid_witnesses(phi, psi):
    # a grid counter-model must make entailment fail
    if any(not holds(psi, m) for m in grid_models(phi, VARS, -3, 3)):
        assert not entails(phi, psi)


@settings(max_examples=200, deadline=None)
@given(constraints, st.sets(st.sampled_from(VARS)))
def test_projection_generalises(phi, keep):
    p = project(phi, keep)
    assert p.vars() <= keep
    assert entails(phi, p)
    for m in grid_models(phi, VARS, -3, 3):
        assert holds(p, m)


@settings(max_examples=200, deadline=None)
@given(constraints)
def test_canonicalize_idempotent_and_equivalent(phi):
    c = canonicalize(phi)
    assert equivalent(phi, c)
    assert canonicalize(c) == c


@settings(max_examples=150, deadline=None)
@given(constraints, constraints, constraints)
def test_entails_reflexive_transitive(a, b, c):
    assert entails(a, a)
    if entails(a, b) and entails(b, c):
        assert entails(a, c)


@settings(max_examples=150, deadline=None)
@given(constraints, st.randoms())
def test_canonical_form_ignores_order_and_scaling(phi, rnd):
    atoms = list(phi.atoms)
    rnd.shuffle(atoms)
    scaled = Constraint(tuple(Lin(a.expr.scale(rnd.choice([1, 2, 3])), a.op) for a in atoms))
    assert canonicalize(scaled) == canonicalize(phi)
