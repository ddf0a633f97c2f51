import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import expected as E
import reference as R
from oraclelab.kernel import (
    DEFAULT_BUDGETS,
    FIX,
    FST,
    IFZ,
    PAIR,
    PRED,
    QUERY,
    SND,
    SUCC,
    App,
    Budgets,
    CompileError,
    Const,
    EvalStatus,
    I,
    K,
    Num,
    Op,
    S,
    Var,
    app,
    apply,
    cantor_pair,
    cantor_unpair,
    code_below,
    compile_lambda,
    compile_table,
    cp,
    decode,
    encode,
    fst,
    num,
    parse_term,
    show,
    smn,
    snd,
    step_eval,
)

x, y, z = Var("x"), Var("y"), Var("z")


def to_ref(t):
    if isinstance(t, Const):
        return R.c(t.op.name, t.payload)
    if isinstance(t, Num):
        return R.n(t.n)
    return ("@", to_ref(t.fun), to_ref(t.arg))


# ------------------------------------------------------------------ coding

def test_encode_of_k_is_zero():
    assert encode(K) == 0


def test_round_trip_application():
    assert decode(encode(App(K, S))) == App(K, S)


def test_large_tag_decodes_to_numeral_with_raw_code():
    t = decode(E.BIG_NUMERAL_CODE)
    assert isinstance(t, Num) and t.n == E.BIG_NUMERAL_CODE
    assert encode(t) == E.BIG_NUMERAL_CODE


@given(st.integers(min_value=0, max_value=10**12))
def test_decode_encode_bijective(c):
    assert encode(decode(c)) == c


@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_cantor_round_trip(a, b):
    assert cantor_unpair(cantor_pair(a, b)) == (a, b)
    assert cantor_pair(a, b) == R.pair_code(a, b)


def test_numeral_codes():
    assert tuple(encode(num(i)) for i in range(4)) == E.NUMERAL_CODES


def test_code_below_agrees_with_encode():
    t = app(S, K, K)
    assert code_below(t, 10**9) == encode(t) == E.IDENTITY_CODE
    assert code_below(t, 1000) is None


# -------------------------------------------------------------- evaluation

def test_skk_is_identity():
    r = step_eval(App(I, num(7)))
    assert r.status is EvalStatus.DEFINED and r.value == num(7)


def test_ifz_zero_branch():
    assert step_eval(app(IFZ, num(0), num(4), K)).value == num(4)


def test_fix_k_one_short_fuel():
    # the rewrite rules give FIX K after two steps, well inside fuel 10
    r = step_eval(app(FIX, K, num(1)), Budgets(fuel=10))
    status, value = E.FIX_K_ONE_AT_FUEL_10
    assert r.status.value == status and show(r.value) == value


def test_loop_runs_out_of_fuel():
    from oraclelab.kernel import LOOP

    assert step_eval(LOOP, Budgets(fuel=500)).status is EvalStatus.FUEL_EXHAUSTED


def test_stuck_on_projection_of_numeral():
    assert step_eval(App(FST, num(3))).status is EvalStatus.STUCK


def test_query_without_oracle_is_stuck():
    assert step_eval(App(QUERY, num(0))).status is EvalStatus.STUCK


@pytest.mark.parametrize("c,d", [(0, 0), (5, 9), (123, 7)])
def test_k_law(c, d):
    first = apply(encode(K), c)
    assert apply(first.value, d).value == decode(c)


def test_successor():
    assert apply(encode(SUCC), encode(num(2))).code == encode(num(3))


def test_pred_floor():
    assert step_eval(App(PRED, num(0))).value == num(0)


def test_fuel_monotone():
    t = app(compile_table({0: 3, 1: 4, 2: 5}), num(2))
    r = step_eval(t)
    assert r.defined
    for extra in (0, 1, 50):
        assert step_eval(t, Budgets(fuel=r.steps + extra)).value == r.value
    assert step_eval(t, Budgets(fuel=r.steps - 1)).status is EvalStatus.FUEL_EXHAUSTED


# -------------------------------------------------------------- compilation

def test_identity_compiles_to_skk():
    assert encode(compile_lambda([x], x)) == E.IDENTITY_CODE


def test_self_application():
    assert compile_lambda([x], App(x, x)) == app(S, I, I)
    assert encode(compile_lambda([x], App(x, x))) == R.encode(R.lam(["x"], R.ap(("v", "x"), ("v", "x"))))


def test_swap_combinator_matches_reference():
    C = compile_lambda([x, y, z], app(x, z, y))
    mine = step_eval(app(C, num(1), num(2), num(3)))
    direct = step_eval(app(num(1), num(3), num(2)))
    assert mine.status is direct.status
    assert mine.status.value == E.C_ON_1_2_3


def test_swap_combinator_on_functions():
    C = compile_lambda([x, y, z], app(x, z, y))
    assert step_eval(app(C, K, num(2), num(3))).value == num(3)


def test_open_term_rejected():
    with pytest.raises(CompileError):
        compile_lambda([x], App(x, y))


# ------------------------------------------------------------------- pairs

def test_projections():
    assert fst(cp(3, 5)).value == decode(3)
    assert snd(cp(3, 5)).value == decode(5)


def test_least_pair_code():
    assert encode(cp(0, 0)) == E.PAIR_OF_K_K


def test_smn():
    assert apply(smn(encode(FST), 4), 9).value == decode(4)
    assert apply(smn(encode(SND), 4), 9).value == decode(9)
    assert apply(smn(I, 0), 0).value == cp(0, 0)


def test_tables():
    assert step_eval(App(compile_table({}), num(0)), Budgets(fuel=2000)).status is EvalStatus.FUEL_EXHAUSTED
    assert step_eval(App(compile_table({0: 1, 1: 0}), num(1))).value == num(0)
    assert step_eval(App(compile_table({7: 7}), num(7))).value == num(7)
    assert apply(compile_table({5: 9}), num(5)).code == encode(num(9))


# ----------------------------------------------------------------- parsing

@pytest.mark.parametrize("text", ["(S (K K) NUM(0))", "PAIR (K NUM(3)) K", "K#2", "SUCC"])
def test_parse_show_round_trip(text):
    t = parse_term(text)
    assert parse_term(show(t)) == t


def test_parse_extras():
    assert parse_term("I 7") == App(I, num(7))
    assert parse_term("#55") == num(0)
    with pytest.raises(ValueError):
        parse_term("(K")
    with pytest.raises(ValueError):
        parse_term("FOO")


def test_budgets_positive():
    with pytest.raises(ValueError):
        Budgets(fuel=0)
    assert DEFAULT_BUDGETS.replace(fuel=5).fuel == 5


# -------------------------------------------- agreement with the reference

LEAVES = [K, S, PAIR, FST, SND, SUCC, PRED, IFZ, FIX, num(0), num(1), num(2)]
terms = st.recursive(st.sampled_from(LEAVES), lambda sub: st.builds(App, sub, sub), max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(terms)
def test_evaluator_matches_reference(t):
    # small fuel on both sides: without sharing the reference can grow exponentially
    mine = step_eval(t, Budgets(fuel=200))
    status, value = R.evaluate(to_ref(t), fuel=400)
    if mine.status is EvalStatus.FUEL_EXHAUSTED or status == "fuel":
        return
    assert mine.status.value == status
    if status == "defined":
        assert to_ref(mine.value) == value


@settings(max_examples=200, deadline=None)
@given(terms)
def test_encoding_matches_reference(t):
    assert encode(t) == R.encode(to_ref(t))
    assert to_ref(decode(R.encode(to_ref(t)))) == to_ref(t)


def test_op_tags_are_fixed():
    assert [op.name for op in sorted(Op)] == R.TAGS
