"""Re-derive every frozen value in ``expected.py`` from the reference code."""

import expected as E
import reference as R

K, S = R.c("K"), R.c("S")


def test_coding_values():
    assert R.encode(R.ap(R.c("PAIR"), K, K)) == E.PAIR_OF_K_K
    assert tuple(R.encode(R.n(i)) for i in range(4)) == E.NUMERAL_CODES
    assert R.unpair_code(E.BIG_NUMERAL_CODE)[0] > 11
    assert R.decode(E.BIG_NUMERAL_CODE) == R.n(E.BIG_NUMERAL_CODE)
    assert R.encode(R.I) == E.IDENTITY_CODE
    assert R.decode(E.PRED_CODE) == R.c("PRED")


def test_evaluation_values():
    status, value = R.evaluate(R.ap(R.c("FIX"), K, R.n(1)), fuel=10)
    assert (status, value) == ("defined", R.ap(R.c("FIX"), K))
    swap = R.lam(["x", "y", "z"], R.ap(("v", "x"), ("v", "z"), ("v", "y")))
    assert R.evaluate(R.ap(swap, R.n(1), R.n(2), R.n(3)))[0] == E.C_ON_1_2_3


def test_truth_value_values():
    U = {0: frozenset({1, 2}), 1: frozenset({2})}
    assert R.j_of(U, 3)[0b100] == E.J_EXAMPLE_AT_2
    swap = {0: frozenset({1}), 1: frozenset({0})}
    j = R.j_of(swap, 3)
    assert R.j_of(R.compose_plain(swap, swap), 3) == E.SWAP_J_SQUARED
    assert tuple(j[j[p]] for p in range(8)) == E.SWAP_J_SQUARED


def _least(pred, limit):
    return next((c for c in range(limit + 1) if pred(R.decode(c))), None)


def _applies_into(e, inputs, allowed):
    for a in inputs:
        status, value = R.evaluate(R.ap(e, a), fuel=2000)
        if status != "defined" or value not in allowed:
            return False
    return True


def test_least_realizers():
    zero = R.n(0)
    # a true equation is realized by NUM(0) only
    assert _least(lambda t: R.evaluate(t)[1] == zero, 100) == E.LEAST_EQ00
    assert _least(lambda t: _applies_into(t, [zero], {zero}), 100) == E.LEAST_IMP_EQ00
    tv = {R.decode(1), R.decode(2)}
    assert _least(lambda t: _applies_into(t, sorted(tv), tv), 500) == E.LEAST_IMP_TV12


def test_em_poset_edges_by_brute_force():
    # plain catalog entries as (public, secret) -> values; SECRETBIT carries two secrets
    star = "*"
    maps = {
        "ID2": {(0, star): frozenset({0}), (1, star): frozenset({1})},
        "CHOICE2": {(0, star): frozenset({0, 1})},
        "FALSE1": {(0, star): frozenset()},
        "SECRETBIT": {(0, 0): frozenset({0}), (0, 1): frozenset({1})},
        "EMPTY": {},
    }
    publics = {"ID2": [0, 1], "CHOICE2": [0], "FALSE1": [0], "SECRETBIT": [0], "EMPTY": [0]}
    below = {(a, b) for a in maps for b in maps if R.em_reducible(maps[a], maps[b], publics[b])}
    strict = {(a, b) for a, b in below if (b, a) not in below}
    covers = {(a, b) for a, b in strict if not any((a, c) in strict and (c, b) in strict for c in maps)}
    assert covers == set(E.EM_EDGES)
