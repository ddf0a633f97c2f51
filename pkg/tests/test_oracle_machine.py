import json

import pytest

from oraclelab.kernel import QUERY, App, Budgets, I, K, LOOP, Var, app, compile_lambda, cp, decode, num, show
from oraclelab.oracle_machine import (
    Outcome,
    OutcomeSet,
    PlainOracle,
    all_defined,
    combine,
    diamond_eval,
    divergent,
    eval_with_oracle,
    fuel_exhausted,
    malformed,
    run_with_oracle,
    split_pair,
)

y = Var("y")
ASK = compile_lambda([y], App(QUERY, y))


def test_one_query_two_branches():
    out = eval_with_oracle(ASK, 5, PlainOracle({5: [1, 2]}))
    assert out.defined and out.codes() == {1, 2}
    assert out.query_counts == frozenset({1})


def test_query_outside_domain_diverges():
    out = eval_with_oracle(ASK, 5, PlainOracle({4: [1]}))
    assert out.status is Outcome.DIVERGENT


def test_query_free_program_ignores_oracle():
    out = eval_with_oracle(App(K, num(0)), 3, PlainOracle({}))
    assert out.defined and out.values == {num(0)}
    assert out.query_counts == frozenset({0})


def test_empty_answer_set_diverges():
    assert eval_with_oracle(ASK, 0, PlainOracle({0: []})).status is Outcome.DIVERGENT


def test_fuel_exhaustion_is_inconclusive():
    out = run_with_oracle(LOOP, PlainOracle({}), Budgets(fuel=100))
    assert out.status is Outcome.FUEL_EXHAUSTED and out.inconclusive


def test_query_budget():
    chain = compile_lambda([y], App(QUERY, App(QUERY, App(QUERY, y))))
    g = PlainOracle({0: [0]})
    assert eval_with_oracle(chain, 0, g, Budgets(max_queries=2)).status is Outcome.QUERY_BUDGET_EXCEEDED
    assert eval_with_oracle(chain, 0, g, Budgets(max_queries=3)).defined


def test_branch_budget():
    fan = compile_lambda([y], app(QUERY, y))
    g = PlainOracle({0: list(range(10))})
    assert eval_with_oracle(fan, 0, g, Budgets(max_branches=4)).status is Outcome.BRANCH_BUDGET_EXCEEDED


def test_shared_answer_is_consistent():
    # the bound answer appears twice and must agree with itself
    dup = compile_lambda([y], cp(y, y))
    prog = compile_lambda([Var("d")], App(dup, App(QUERY, decode(0))))
    out = eval_with_oracle(prog, 0, PlainOracle({0: [0, 1]}))
    assert {show(v) for v in out.values} == {"(PAIR K K)", "(PAIR S S)"}


def test_combine_precedence():
    parts = [all_defined([num(1)]), fuel_exhausted(), malformed(), divergent()]
    assert combine(parts).status is Outcome.DIVERGENT
    assert combine(parts[:3]).status is Outcome.MALFORMED
    assert combine(parts[:2]).status is Outcome.FUEL_EXHAUSTED
    assert combine([all_defined([num(1)]), all_defined([num(2)])]).values == {num(1), num(2)}


# ------------------------------------------------------------------ diamond

def test_diamond_two_chained_queries():
    prog = compile_lambda([y], App(QUERY, App(QUERY, y)))
    out = diamond_eval(PlainOracle({0: [1], 1: [2]}), cp(prog, 0))
    assert out.codes() == {2}


def test_diamond_query_free():
    assert diamond_eval(PlainOracle({}), cp(I, 9)).codes() == {9}


def test_diamond_returns_every_answer():
    assert diamond_eval(PlainOracle({0: [0, 1]}), cp(ASK, 0)).codes() == {0, 1}


def test_diamond_rejects_non_pairs():
    out = diamond_eval(PlainOracle({}), num(3))
    assert out.status is Outcome.MALFORMED and out.undefined


def test_split_pair():
    assert split_pair(cp(3, 4)) == (decode(3), decode(4))
    assert isinstance(split_pair(K), OutcomeSet)


# --------------------------------------------------------------------- json

def test_oracle_json_round_trip(tmp_path):
    g = PlainOracle({0: [0, 1], 3: []})
    path = tmp_path / "g.json"
    path.write_text(json.dumps(g.to_json()))
    assert PlainOracle.load(path) == g


@pytest.mark.parametrize("bad", [
    {},
    {"entries": [{"key": -1, "values": []}]},
    {"entries": [{"key": 0}]},
    {"entries": [{"key": 0, "values": [1]}, {"key": 0, "values": [2]}]},
])
def test_oracle_json_rejects(bad):
    with pytest.raises(ValueError):
        PlainOracle.from_json(bad)
