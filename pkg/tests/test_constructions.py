import pytest

from oraclelab.constructions import (
    COMPOSE,
    TAG_IDENTITY,
    TAG_ORACLE,
    EvaluableOracle,
    Kind,
    NoWitness,
    Verdict,
    check_property,
    compose_mm,
    compose_multimap,
    idempotence_witness,
    identity_map,
    inflation_witness,
    join,
    med_eval,
    pweih_eval,
    table_eval,
    transparency_witness,
    triple,
    weih_eval,
)
from oraclelab.kernel import FST, PAIR, QUERY, SND, SUCC, App, I, K, Var, app, apply, compile_lambda, cp, encode, num
from oraclelab.oracle_machine import Outcome, PlainOracle, diamond_eval
from oraclelab.problems import CHOICE2, EMPTY, ID2, MMMap

y = Var("y")
CHOICE = PlainOracle({0: [0, 1]})


# ---------------------------------------------------------------- machines

def test_table_eval():
    assert table_eval(CHOICE, 0).codes() == {0, 1}
    assert table_eval(CHOICE, 1).status is Outcome.DIVERGENT


def test_med_identity():
    assert med_eval({3, 4}, I).codes() == {3, 4}


def test_med_empty_query_set():
    out = med_eval(set(), SUCC)
    assert out.defined and out.values == frozenset()


def test_med_successor_on_numeral():
    assert med_eval({encode(num(2))}, SUCC).codes() == {encode(num(3))}


def test_med_undefined_when_any_point_fails():
    # code 2 is the constant K#1, on which SUCC is stuck
    assert med_eval({2, encode(num(2))}, SUCC).undefined


def test_weih_second_projection():
    out = weih_eval(CHOICE, triple(I, SND, 0))
    assert out.codes() == {0, 1}
    assert out.query_counts == frozenset({1})


def test_weih_first_projection():
    assert weih_eval(CHOICE, triple(I, FST, 0)).codes() == {0}


def test_weih_outside_domain():
    assert weih_eval(CHOICE, triple(App(K, num(9)), SND, 0)).status is Outcome.DIVERGENT


def test_weih_malformed_input():
    assert weih_eval(CHOICE, num(7)).status is Outcome.MALFORMED


def test_pweih_identity_summand():
    tag0 = compile_lambda([y], app(PAIR, TAG_IDENTITY, y))
    assert pweih_eval(CHOICE, triple(tag0, SND, 5)).codes() == {5}


def test_pweih_oracle_summand_matches_weih():
    tag1 = compile_lambda([y], app(PAIR, TAG_ORACLE, y))
    for k in (SND, FST):
        assert pweih_eval(CHOICE, triple(tag1, k, 0)).values == weih_eval(CHOICE, triple(I, k, 0)).values


def test_pweih_empty_table():
    tag1 = compile_lambda([y], app(PAIR, TAG_ORACLE, y))
    assert pweih_eval(PlainOracle({}), triple(tag1, SND, 0)).status is Outcome.DIVERGENT


# ------------------------------------------------------- extensional algebra

def test_join_with_empty_is_tagged_copy():
    j = join(EMPTY, CHOICE2)
    right = [(x, p, v) for x, p, v in j.entries if p[0] == 1]
    assert [(v) for _, _, v in right] == [v for _, _, v in CHOICE2.entries]


def test_join_is_symmetric_in_behaviour():
    j = join(ID2, ID2)
    left = sorted(v for _, p, v in j.entries if p[0] == 0)
    right = sorted(v for _, p, v in j.entries if p[0] == 1)
    assert left == right


def test_join_publics_count():
    assert len(join(ID2, CHOICE2).publics) == 3


def test_compose_identity_law():
    g = MMMap.plain("g", {0: {5}, 1: {6}, 3: {7}})
    composed = compose_multimap(ID2, g)
    assert {x: v for x, _, v in composed.entries} == {0: {5}, 1: {6}}


def test_compose_domain_clause():
    f = MMMap.plain("f", {0: {0, 1}})
    g = MMMap.plain("g", {0: {5}})
    assert not compose_multimap(f, g).entries


def test_compose_empty_value():
    f = MMMap.plain("f", {0: set()})
    g = MMMap.plain("g", {0: {5}})
    assert [(x, v) for x, _, v in compose_multimap(f, g).entries] == [(0, frozenset())]


def test_compose_with_advice_matches_plain_on_plain_maps():
    f = MMMap.plain("f", {0: {0, 1}, 1: {1}})
    g = MMMap.plain("g", {0: {2}, 1: {3, 4}})
    plain = {x: v for x, _, v in compose_multimap(f, g).entries}
    advised = {x: v for x, _, v in compose_mm(f, g).entries}
    assert plain == advised


def test_identity_map():
    assert identity_map("id", [2, 0]).value_family(2) == {frozenset({2})}


# -------------------------------------------------------------- witnesses

def test_weih_transparency_on_successor():
    g = PlainOracle({0: [encode(num(0)), encode(num(1))]})
    U = EvaluableOracle.weih(g)
    t = triple(I, SND, 0)
    lhs = U.evaluate(apply(app(transparency_witness(U), SUCC), t).value)
    rhs = {apply(SUCC, v).value for v in U.evaluate(t).values}
    assert lhs.defined and lhs.values <= rhs and rhs == {num(1), num(2)}


@pytest.mark.parametrize("table", [{}, {0: [0, 1]}, {0: [0], 1: [1]}])
def test_diamond_inflation(table):
    eta = inflation_witness(Kind.DIAMOND)
    g = PlainOracle(table)
    for x in range(8):
        assert diamond_eval(g, apply(eta, x).value).codes() == {x}


def test_med_transparency_on_identity():
    tau = compile_lambda([y], App(SUCC, y))
    Q = {encode(num(i)) for i in range(3)}
    assert med_eval(Q, app(COMPOSE, I, tau)).values == med_eval(Q, tau).values


def test_diamond_idempotence_runs_two_layers():
    mu = idempotence_witness(Kind.DIAMOND)
    g = PlainOracle({0: [1], 1: [2]})
    ask = compile_lambda([y], App(QUERY, y))
    inner = cp(ask, 1)
    outer = cp(App(K, inner), 0)
    out = diamond_eval(g, apply(mu, outer).value)
    assert out.codes() == {2}


def test_no_witness_for_table_idempotence():
    with pytest.raises(NoWitness):
        idempotence_witness(Kind.TABLE)


def test_weih_inflation_needs_a_key():
    with pytest.raises(NoWitness):
        inflation_witness(EvaluableOracle.weih(PlainOracle({})))


# -------------------------------------------------------------- properties

def test_weih_transparent_on_standard_samples():
    report = check_property(EvaluableOracle.weih(CHOICE), "transparent")
    assert report.verdict is Verdict.PASS and report.checked > 0


def test_table_fails_inflationary():
    report = check_property(EvaluableOracle.of_table(PlainOracle({0: [1]})), "inflationary")
    assert report.verdict is Verdict.FAIL and report.witness is None


def test_diamond_inflationary():
    report = check_property(EvaluableOracle.diamond(CHOICE), "inflationary")
    assert report.verdict is Verdict.PASS and report.checked > 0


def test_diamond_idempotent():
    report = check_property(EvaluableOracle.diamond(CHOICE), "idempotent")
    assert report.verdict is Verdict.PASS


def test_wrong_witness_is_caught():
    report = check_property(EvaluableOracle.diamond(CHOICE), "inflationary", witness=I)
    assert report.verdict is Verdict.FAIL and report.counterexamples


def test_unknown_property():
    with pytest.raises(ValueError):
        check_property(EvaluableOracle.diamond(CHOICE), "compact")
