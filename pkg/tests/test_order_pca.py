import pytest

from oraclelab.constructions import EvaluableOracle, Verdict, inflation_witness, transparency_witness
from oraclelab.kernel import PAIR, I, K, SUCC, App, app, apply, decode, num
from oraclelab.oracle_machine import PlainOracle
from oraclelab.order_pca import (
    SWAP,
    Status,
    Witnesses,
    build_k_plus,
    check_order_pca,
    code_set,
    leaf_samples,
    plus,
    prime,
    star_chain,
    star_U,
    structured_samples,
)

SINGLE = PlainOracle({0: [0]})
CHOICE = PlainOracle({0: [0, 1]})


@pytest.fixture(scope="module")
def diamond():
    return EvaluableOracle.diamond(SINGLE)


@pytest.fixture(scope="module")
def eta(diamond):
    return Witnesses.constructed(diamond).eta


def test_swap_law():
    assert apply(app(SWAP, K, num(1)), num(2)).value == num(2)
    assert apply(app(SWAP, PAIR, num(1)), num(2)).value == apply(app(PAIR, num(2)), num(1)).value


def test_empty_product_is_defined_and_empty(diamond):
    r = star_U(frozenset(), frozenset({num(0)}), diamond)
    assert r.status is Status.DEFINED and r.values == frozenset()


def test_stuck_application_is_undefined(diamond):
    r = star_U(frozenset({num(3)}), frozenset({num(0)}), diamond)
    assert r.status is Status.UNDEFINED and "stuck" in r.detail


def test_bare_results_are_not_packed(diamond):
    # I ∗ NUM(0) is a numeral, which the universal machine rejects
    assert star_U(frozenset({I}), frozenset({num(0)}), diamond).status is Status.UNDEFINED


def test_prime_gives_plain_images(diamond, eta):
    r = star_U(code_set([prime(SUCC, eta)]), frozenset({num(0), num(4)}), diamond)
    assert r.defined and r.values == {num(1), num(5)}


def test_k_plus_returns_first_argument(diamond, eta):
    alpha = frozenset({num(2), num(7)})
    kplus = frozenset({build_k_plus(eta)})
    once = star_chain(diamond, kplus, alpha)
    assert once.defined and len(once.values) == len(alpha)
    twice = star_chain(diamond, kplus, alpha, frozenset({num(9)}))
    assert twice.defined and twice.values == alpha


def test_plus_of_constant(diamond, eta):
    r = star_chain(diamond, code_set([plus(App(K, SUCC), eta)]), frozenset({num(0)}), frozenset({num(3)}))
    assert r.defined and r.values == {num(4)}


def test_sample_shapes(eta):
    leaves = leaf_samples()
    assert frozenset() in leaves and all(len(s) <= 3 for s in leaves)
    assert all(s for s in structured_samples(eta))


def test_code_set_rejects_non_normalizing():
    from oraclelab.kernel import LOOP, Budgets

    with pytest.raises(ValueError):
        code_set([LOOP], Budgets(fuel=200))


def test_diamond_on_single_valued_table(diamond):
    report = check_order_pca(diamond, precheck=False)
    assert report.verdict is Verdict.PASS
    assert report.axiom("k-axiom").checked > 0
    assert report.axiom("s-axiom").checked > 0


def test_weih_without_idempotence_fails_s_axiom():
    U = EvaluableOracle.weih(CHOICE)
    w = Witnesses(transparency_witness(U), inflation_witness(U), I)
    report = check_order_pca(U, w, precheck=False)
    s = report.axiom("s-axiom")
    assert s.verdict is Verdict.FAIL and s.counterexamples
    assert "counterexample" in report.text()


def test_report_text_lists_every_axiom(diamond):
    small = (frozenset(), frozenset({decode(0)}))
    report = check_order_pca(diamond, samples=small, precheck=False)
    text = report.text()
    assert all(name in text for name in ("monotonicity", "k-axiom", "s-axiom"))
