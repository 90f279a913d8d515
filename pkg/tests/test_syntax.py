import pytest
from hypothesis import given, settings
from hypothesis import strategies as s

from conftest import ALL_PROGRAMS, CORPUS, MUTANTS, corpus_file
from depsess import statics as st
from depsess.syntax import ParseError, parse_program, parse_static, parse_term, print_program, print_term
from test_statics import equal_stype


def test_end_literal():
    assert parse_static("(end 0)") == st.end(st.IntLit(0))


def test_roles_are_literals():
    assert parse_static("(end S)") == st.end(st.S_ROLE)
    assert parse_static("(end C)") == st.end(st.C_ROLE)


def test_equal_definition():
    prog = parse_program((corpus_file("equal")).read_text())
    got = parse_static("equal", program=prog)
    assert st.static_equal({}, [], got, equal_stype(), st.STYPE)


def test_recursive_definition_without_changing_args_is_fix():
    prog = parse_program("(defstype loop (msg S int loop))")
    assert st.session_head(parse_static("loop", program=prog)).kind == "fix"


@pytest.mark.parametrize(
    "text, where",
    [
        ("(main int (+ 1 2)", (1, 1)),
        ("(main int\n  (+ 1 2]))", (2, 9)),
        ("(defun (f [x : int]) int\n  (let ([x]) x))", None),
    ],
)
def test_parse_errors_have_spans(text, where):
    with pytest.raises(ParseError) as ei:
        parse_program(text)
    err = ei.value
    if where is not None:
        assert (err.span.line, err.span.col) == where
    assert err.render().startswith("error[parse]")


@pytest.mark.parametrize("name", ALL_PROGRAMS)
def test_roundtrip_corpus(name):
    prog = parse_program(corpus_file(name).read_text())
    again = parse_program(print_program(prog))
    assert prog.same_as(again)
    assert print_program(again) == print_program(prog)


@pytest.mark.parametrize("name", MUTANTS)
def test_roundtrip_mutants(name):
    prog = parse_program((CORPUS / "negative" / name).read_text())
    assert prog.same_as(parse_program(print_program(prog)))


def test_spans_point_into_source():
    t = parse_term("(pair 1\n  (fst x))", scope={"x"})
    assert t.span.line == 1 and t.snd.span.line == 2 and t.snd.span.col == 3


# random arithmetic round trip through the printer
exprs = s.recursive(
    s.one_of(s.integers(-50, 50).map(str), s.sampled_from(["x", "y"])),
    lambda e: s.tuples(s.sampled_from(["+", "-", "*", "<", "="]), e, e).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
    max_leaves=8,
)


@settings(max_examples=100, deadline=None)
@given(exprs)
def test_term_print_parse(text):
    t = parse_term(text, scope={"x", "y"})
    assert parse_term(print_term(t), scope={"x", "y"}) == t
