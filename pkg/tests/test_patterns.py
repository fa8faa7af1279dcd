import re

import pytest
from hypothesis import given, settings, strategies as st

from algsim.patterns import (BudgetExceeded, Engine, Matcher, PatternSyntaxError, StepLimitReached, compile,
                             match_backtracking, match_budgeted, nullable, to_source)

import gen

EVIL = "(a|a)*b"


def backtracking_steps_evil(n: int) -> int:
    # F(m) = 5 + 2 F(m-1), F(0) = 5 per start offset, summed over offsets 0..n
    return 5 * (2 ** (n + 2) - n - 3)


def budgeted_steps_evil(n: int) -> int:
    # 5 insertions at offset 0, then 7 per consumed 'a'
    return 5 + 7 * n


def test_evil_program_shape():
    p = compile(EVIL)
    assert p.n_states == 8


@pytest.mark.parametrize("n", [0, 1, 2, 5, 10])
def test_backtracking_steps_match_closed_form(n):
    assert match_backtracking(compile(EVIL), "a" * n).steps == backtracking_steps_evil(n)


def test_backtracking_steps_frozen_n16():
    r = match_backtracking(compile(EVIL), "a" * 16)
    assert not r.matched
    assert r.steps == 1_310_625 == backtracking_steps_evil(16)


@pytest.mark.parametrize("n", [0, 1, 10, 16, 20, 64])
def test_budgeted_steps_match_hand_trace(n):
    r = match_budgeted(compile(EVIL), "a" * n, 10**6)
    assert r.steps == budgeted_steps_evil(n)
    assert r.steps <= 8 * (n + 1)


def test_budget_is_exact():
    p = compile(EVIL)
    assert match_budgeted(p, "a" * 20, 145).steps == 145
    with pytest.raises(BudgetExceeded) as exc:
        match_budgeted(p, "a" * 20, 144)
    assert exc.value.budget == 144


def test_budget_must_be_positive():
    with pytest.raises(ValueError):
        match_budgeted(compile("a"), "a", 0)


def test_step_cap_on_backtracking():
    with pytest.raises(StepLimitReached) as exc:
        match_backtracking(compile(EVIL), "a" * 30, max_steps=10_000)
    assert exc.value.steps == 10_000


def test_matcher_reports_exhaustion_instead_of_raising():
    bt = Matcher(EVIL, Engine.BACKTRACKING, max_steps=1000).run("a" * 25)
    assert bt.exhausted and not bt.matched and bt.steps == 1000
    bud = Matcher(EVIL, Engine.BUDGETED, max_steps=50).run("a" * 25)
    assert bud.exhausted and not bud.matched


def test_both_engines_find_match():
    p = compile(EVIL)
    assert match_backtracking(p, "aaab").matched
    assert match_budgeted(p, "aaab", 1000).matched


def test_empty_pattern_on_empty_input():
    r = match_backtracking(compile(""), "")
    assert r.matched and r.steps == 1


def test_nullable_star_terminates():
    for pat in ["(a*)*", "(a|)*b", "(()|a)+c", "(^)*a"]:
        p = compile(pat)
        for text in ["", "aaa", "aab", "c"]:
            assert match_backtracking(p, text).matched == match_budgeted(p, text, 10**5).matched


@pytest.mark.parametrize("text,position,message", [
    ("a(", 2, "expected ')'"),
    ("*a", 0, "nothing to repeat"),
    ("^*", 1, "nothing to repeat"),
    ("a**", 2, "multiple repeat"),
    ("\\q", 1, "bad escape"),
    ("[]", 1, "empty character class"),
    ("[z-a]", 3, "bad character range"),
    ("a)", 1, "unexpected"),
])
def test_syntax_errors_carry_position(text, position, message):
    with pytest.raises(PatternSyntaxError) as exc:
        compile(text)
    assert exc.value.position == position
    assert message in str(exc.value)


def test_anchors_and_classes():
    assert Matcher("^/admin").run("/admin/x").matched
    assert not Matcher("^/admin").run("/x/admin").matched
    assert Matcher("[^a-c]$").run("abz").matched
    assert not Matcher("[^a-c]$").run("abc").matched
    assert Matcher("a\\.b").run("xa.b").matched
    assert not Matcher("a\\.b").run("axb").matched


def test_bytes_are_latin1():
    assert Matcher("\xff").run(b"\x00\xff").matched


def test_nullable():
    assert nullable(compile("a*").ast)
    assert not nullable(compile("a+").ast)
    assert nullable(compile("(a|)").ast)


@settings(max_examples=300, deadline=None, derandomize=True)
@given(st.integers(0, 2**32 - 1))
def test_to_source_round_trips(seed):
    node = gen.random_pattern(gen.rng(seed))
    assert compile(to_source(node)).ast == node


@settings(max_examples=300, deadline=None, derandomize=True)
@given(st.integers(0, 2**32 - 1))
def test_engines_agree_with_each_other_and_re(seed):
    r = gen.rng(seed)
    node = gen.random_pattern(r, anchors=bool(seed % 2))
    source = to_source(node)
    p = compile(source)
    oracle = re.compile(source, re.DOTALL)
    for _ in range(5):
        text = gen.random_text(r)
        bt = match_backtracking(p, text)
        bud = match_budgeted(p, text, 10**6)
        assert bt.matched == bud.matched == (oracle.search(text) is not None), (source, text)
        assert bud.steps <= p.n_states * (len(text) + 1)


@settings(max_examples=100, deadline=None)
@given(st.text(alphabet="ab", max_size=30))
def test_budgeted_bound_on_evil_pattern(text):
    p = compile(EVIL)
    assert match_budgeted(p, text, 10**6).steps <= p.n_states * (len(text) + 1)
