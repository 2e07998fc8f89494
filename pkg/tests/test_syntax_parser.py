import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chcspec.parser import ParseError, parse_clause, parse_constrained_facts, parse_program, render
from chcspec.syntax import (
    FALSE,
    Lin,
    Opaque,
    Program,
    program_key,
    rename_apart,
)

from conftest import load_program


def test_single_constraint_clause():
    p = parse_program("while0(X,Y,M) :- X=<0.")
    (c,) = p.clauses
    assert c.body == ()
    (a,) = c.constraint.atoms
    assert isinstance(a, Lin) and a.op == "<="
    assert {v.name for v in a.vars()} == {"X"}


def test_empty_program():
    assert len(parse_program("")) == 0
    assert render(Program()) == ""


def test_repeated_body_argument_is_normalised():
    c = parse_clause("p(X) :- q(X,X).")
    (q,) = c.body
    assert len(set(q.args)) == 2
    assert len(c.constraint.atoms) == 1 and c.constraint.atoms[0].op == "="
    again = parse_clause(str(c))
    assert program_key(Program((again,))) == program_key(Program((c,)))


def test_non_variable_argument_gets_equality():
    c = parse_clause("fib(A,B,0) :- A>=0.")
    assert len(c.head.args) == 3 and len(c.constraint.atoms) == 2


def test_nested_loop_round_trip(nested_loop):
    assert len(nested_loop) == 5
    text = render(nested_loop)
    assert [l.split("(")[0].split(" ")[0] for l in text.splitlines()] == \
        ["start", "while0", "while0", "if0", "if0"]
    assert program_key(parse_program(text)) == program_key(nested_loop)


def test_opaque_atom_is_kept():
    p = load_program("power.chc")
    ops = [a for c in p.clauses for a in c.constraint.atoms if isinstance(a, Opaque)]
    assert len(ops) == 1
    assert program_key(parse_program(render(p))) == program_key(p)


def test_false_body_and_true():
    c = parse_clause("p(X) :- true, false.")
    assert c.constraint is FALSE or c.constraint.is_false
    assert parse_clause("p(X) :- true.").constraint.atoms == ()


def test_arrow_variants():
    a = parse_program("p(X) <- X >= 1.\nq(Y) ← Y ≤ 2.")
    assert len(a) == 2


@pytest.mark.parametrize("text,line", [
    ("p(X) :- X >.", 1),
    ("p(X) :- q(X).\np(X,Y).", 2),
    ("p(X) :- X / Y = 1.", 1),
    ("p(X) :- q(X)", 1),
    ("p(X) :- X # 1.", 1),
])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as e:
        parse_program(text)
    assert e.value.line == line


def test_constrained_facts():
    (f,) = parse_constrained_facts("while0(A,B,C) :- A>0.")
    assert f.key == ("while0", 3) and len(f.constraint.atoms) == 1
    (s,) = parse_constrained_facts("start.")
    assert s.key == ("start", 0) and s.constraint.is_true
    with pytest.raises(ParseError):
        parse_constrained_facts("p(X) :- q(X).")


def test_example_6_1_properties_file():
    from conftest import DATA
    assert len(parse_constrained_facts((DATA / "counter_safety.props").read_text())) == 9


def test_rename_apart():
    c = parse_clause("p(X,Y) :- X<Y, q(Y).")
    r1, r2 = rename_apart(c), rename_apart(c)
    assert not (r1.vars() & r2.vars()) and not (r1.vars() & c.vars())
    assert program_key(Program((r1,))) == program_key(Program((c,)))
    g = parse_clause("p :- 1 =< 2.")
    assert rename_apart(g) == g


def test_scope_hygiene(nested_loop):
    seen = set()
    for c in nested_loop.clauses:
        assert not (c.vars() & seen)
        seen |= c.vars()


names = st.sampled_from(["X", "Y", "Z", "W"])
preds = st.sampled_from([("p", 1), ("q", 2), ("r", 0)])


@st.composite
def clause_text(draw):
    def atom(key):
        return key[0] + (f"({','.join(draw(names) for _ in range(key[1]))})" if key[1] else "")

    head = atom(draw(preds))
    items = [atom(draw(preds)) for _ in range(draw(st.integers(0, 2)))]
    for _ in range(draw(st.integers(0, 3))):
        lhs = f"{draw(st.integers(-3, 3))}*{draw(names)}+{draw(names)}"
        items.append(f"{lhs} {draw(st.sampled_from(['=', '<', '>', '=<', '>=']))} {draw(st.integers(-5, 5))}")
    if draw(st.booleans()):
        items.append(f"{draw(names)}*{draw(names)} = {draw(names)}")
    return head + (" :- " + ", ".join(items) if items else "") + "."


@settings(max_examples=150, deadline=None)
@given(st.lists(clause_text(), max_size=4))
def test_round_trip_property(clauses):
    p = parse_program("\n".join(clauses))
    once = render(p)
    assert render(parse_program(once)) == once
    assert program_key(parse_program(once)) == program_key(p)
    for c in p.clauses:
        for a in (c.head, *c.body):
            assert len(set(a.args)) == len(a.args)
