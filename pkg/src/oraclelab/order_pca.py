"""Sets of codes as an order PCA under ``α ∗_U β = ⋃ U(a∗b)``.

Elements are finite sets of normal-form terms.  The combinators are built
from the three structural witnesses of ``U`` (transparency ``u``, inflation
``eta``, idempotence ``mu``) and checked on finite samples.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .constructions import (
    EvaluableOracle,
    Verdict,
    check_property,
    idempotence_witness,
    inflation_witness,
    transparency_witness,
)
from .kernel import (
    DEFAULT_BUDGETS,
    I,
    K,
    SUCC,
    App,
    Budgets,
    Code,
    EvalStatus,
    Term,
    Var,
    app,
    apply,
    as_term,
    compile_lambda,
    decode,
    lam,
    num,
    show,
    step_eval,
)

_a, _b, _c, _x, _y, _z = (Var(n) for n in "abcxyz")

# C x y z = x z y
SWAP = compile_lambda([_x, _y, _z], app(_x, _z, _y))


class Status(enum.Enum):
    DEFINED = "defined"
    UNDEFINED = "undefined"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class StarResult:
    status: Status
    values: frozenset[Term] = frozenset()
    detail: str = ""

    @property
    def defined(self) -> bool:
        return self.status is Status.DEFINED


def code_set(items: Iterable[Code], budgets: Budgets = DEFAULT_BUDGETS) -> frozenset[Term]:
    """Normalize codes (or terms) into a set of values; non-normalizing items are rejected."""
    out = set()
    for c in items:
        r = step_eval(as_term(c), budgets)
        if not r.defined:
            raise ValueError(f"{show(as_term(c))} has no value")
        out.add(r.value)
    return frozenset(out)


def star_U(alpha: Iterable[Term], beta: Iterable[Term], U: EvaluableOracle) -> StarResult:
    """Union of ``U(a∗b)``; defined only when every application and every ``U`` call is."""
    values: set[Term] = set()
    unknown = ""
    for a in sorted(alpha, key=show):
        for b in sorted(beta, key=show):
            r = apply(a, b, U.budgets)
            if r.status is EvalStatus.STUCK:
                return StarResult(Status.UNDEFINED, detail=f"{show(a)} ∗ {show(b)} is stuck")
            if r.status is EvalStatus.FUEL_EXHAUSTED:
                unknown = unknown or f"{show(a)} ∗ {show(b)} ran out of fuel"
                continue
            out = U.evaluate(r.value)
            if out.undefined:
                return StarResult(Status.UNDEFINED, detail=f"U({show(r.value)}) is undefined")
            if out.inconclusive:
                unknown = unknown or f"U({show(r.value)}): {out.describe()}"
                continue
            values |= out.values
    if unknown:
        return StarResult(Status.INCONCLUSIVE, detail=unknown)
    return StarResult(Status.DEFINED, frozenset(values))


def star_chain(U: EvaluableOracle, *sets: Iterable[Term]) -> StarResult:
    """Left-associated product of several code sets."""
    acc = StarResult(Status.DEFINED, frozenset(sets[0]))
    for nxt in sets[1:]:
        if not acc.defined:
            return acc
        acc = star_U(acc.values, nxt, U)
    return acc


# ------------------------------------------------------------- combinators

def prime(p: Term, eta: Term) -> Term:
    """``p′ = λx. η(p x)``."""
    return compile_lambda([_x], App(eta, App(p, _x)))


def plus(p: Term, eta: Term) -> Term:
    """``p⁺ = λy. η((p y)′)``."""
    inner = lam([_x], App(eta, app(p, _y, _x)))
    return compile_lambda([_y], App(eta, inner))


def build_k_plus(eta: Code) -> Term:
    return plus(K, as_term(eta))


def build_s_tilde(u: Code, mu: Code) -> Term:
    """``λabc. μ(μ(u (C u (b c)) (a c)))``."""
    u, mu = as_term(u), as_term(mu)
    body = App(mu, App(mu, app(u, app(SWAP, u, App(_b, _c)), App(_a, _c))))
    return compile_lambda([_a, _b, _c], body)


def build_s_plus(u: Code, mu: Code, eta: Code) -> Term:
    return plus(build_s_tilde(u, mu), as_term(eta))


@dataclass(frozen=True)
class Witnesses:
    u: Term
    eta: Term
    mu: Term

    @classmethod
    def constructed(cls, U: EvaluableOracle) -> "Witnesses":
        return cls(transparency_witness(U), inflation_witness(U), idempotence_witness(U))


# ------------------------------------------------------------------ checks

@dataclass(frozen=True)
class AxiomResult:
    name: str
    checked: int
    vacuous: int
    inconclusive: int
    counterexamples: tuple[str, ...]

    @property
    def verdict(self) -> Verdict:
        if self.counterexamples:
            return Verdict.FAIL
        return Verdict.INCONCLUSIVE if self.inconclusive else Verdict.PASS

    def line(self) -> str:
        text = (f"{self.name}: {self.verdict.value} (checked {self.checked}, vacuous {self.vacuous}, "
                f"inconclusive {self.inconclusive})")
        if self.counterexamples:
            text += f"\n    counterexample: {self.counterexamples[0]}"
        return text


@dataclass(frozen=True)
class OrderPCAReport:
    oracle: str
    prechecks: tuple[str, ...]
    axioms: tuple[AxiomResult, ...]
    sample_sets: int

    @property
    def verdict(self) -> Verdict:
        verdicts = [a.verdict for a in self.axioms]
        if Verdict.FAIL in verdicts:
            return Verdict.FAIL
        return Verdict.INCONCLUSIVE if Verdict.INCONCLUSIVE in verdicts else Verdict.PASS

    def axiom(self, name: str) -> AxiomResult:
        return next(a for a in self.axioms if a.name == name)

    def text(self) -> str:
        lines = [f"order PCA check for {self.oracle} over {self.sample_sets} sample sets"]
        lines += [f"  precheck {p}" for p in self.prechecks]
        lines += ["  " + a.line() for a in self.axioms]
        lines.append(f"  overall: {self.verdict.value}")
        return "\n".join(lines) + "\n"


def _fmt(s: Iterable[Term]) -> str:
    return "{" + ", ".join(sorted(show(t) for t in s)) + "}"


class _Tally:
    def __init__(self, name: str):
        self.name, self.checked, self.vacuous, self.unknown, self.bad = name, 0, 0, 0, []

    def result(self) -> AxiomResult:
        return AxiomResult(self.name, self.checked, self.vacuous, self.unknown, tuple(sorted(self.bad)))


def leaf_samples(limit: int = 32) -> tuple[frozenset[Term], ...]:
    """Fixed code sets of size at most 3 with elements below ``limit``."""
    picks = [(), (0,), (1,), (5,), (limit - 1,), (0, 1), (2, 7), (3, 17, 29), (4, 9, 30)]
    return tuple(frozenset(decode(c) for c in p if c < limit) for p in picks)


def structured_samples(eta: Term, budgets: Budgets = DEFAULT_BUDGETS) -> tuple[frozenset[Term], ...]:
    """Sets built from ``p′`` and ``p⁺`` so that products are actually defined."""
    progs = (I, SUCC, App(K, num(1)))
    primes = [prime(p, eta) for p in progs]
    pluses = [plus(p, eta) for p in (K, App(K, SUCC), App(K, I))]
    raw = [(primes[0],), (primes[1],), (primes[0], primes[2]), (pluses[0],), (pluses[1],),
           (pluses[1], pluses[2]), (num(0),), (num(1), num(2))]
    return tuple(code_set(r, budgets) for r in raw)


def check_order_pca(U: EvaluableOracle, witnesses: Witnesses | None = None,
                    samples: Sequence[frozenset[Term]] | None = None, *, precheck: bool = True) -> OrderPCAReport:
    """Monotonicity, k- and s-axioms on every combination of the sample sets."""
    w = witnesses or Witnesses.constructed(U)
    prechecks: list[str] = []
    if precheck:
        for prop, wit in (("transparent", w.u), ("inflationary", w.eta), ("idempotent", w.mu)):
            prechecks.append(check_property(U, prop, witness=wit, search=False).summary())
    if samples is None:
        samples = leaf_samples() + structured_samples(w.eta, U.budgets)
    samples = list(dict.fromkeys(samples))
    kplus = build_k_plus(w.eta)
    splus = build_s_plus(w.u, w.mu, w.eta)

    mono, kax, sax = _Tally("monotonicity"), _Tally("k-axiom"), _Tally("s-axiom")
    memo: dict[tuple, StarResult] = {}

    def star(*sets) -> StarResult:
        key = tuple(sets)
        if key not in memo:
            memo[key] = star_chain(U, *sets)
        return memo[key]

    ksingle, ssingle = frozenset({kplus}), frozenset({splus})

    for alpha in samples:
        for beta in samples:
            # monotonicity: every sub-pair of a defined product is defined and smaller
            full = star(alpha, beta)
            if full.status is Status.INCONCLUSIVE:
                mono.unknown += 1
            elif not full.defined:
                mono.vacuous += 1
            else:
                for a2 in _subsets(alpha):
                    for b2 in _subsets(beta):
                        part = star(a2, b2)
                        if part.status is Status.INCONCLUSIVE:
                            mono.unknown += 1
                        elif not part.defined or not part.values <= full.values:
                            mono.bad.append(f"{_fmt(a2)} ∗ {_fmt(b2)} vs {_fmt(alpha)} ∗ {_fmt(beta)}")
                        else:
                            mono.checked += 1
            # k-axiom: {k+} α β is defined and inside α
            first = star(ksingle, alpha)
            kab = star(ksingle, alpha, beta)
            if Status.INCONCLUSIVE in (first.status, kab.status):
                kax.unknown += 1
            elif not first.defined or not kab.defined or not kab.values <= alpha:
                kax.bad.append(f"α={_fmt(alpha)} β={_fmt(beta)}: {kab.status.value} {_fmt(kab.values)}")
            else:
                kax.checked += 1
            sab = star(ssingle, alpha, beta)
            for gamma in samples:
                rhs_left = star(alpha, gamma)
                rhs_right = star(beta, gamma)
                if Status.INCONCLUSIVE in (rhs_left.status, rhs_right.status):
                    sax.unknown += 1
                    continue
                if not (rhs_left.defined and rhs_right.defined):
                    sax.vacuous += 1
                    continue
                rhs = star_U(rhs_left.values, rhs_right.values, U)
                if rhs.status is Status.INCONCLUSIVE:
                    sax.unknown += 1
                    continue
                if not rhs.defined:
                    sax.vacuous += 1
                    continue
                if sab.status is Status.INCONCLUSIVE:
                    sax.unknown += 1
                    continue
                lhs = star_U(sab.values, gamma, U) if sab.defined else sab
                if lhs.status is Status.INCONCLUSIVE:
                    sax.unknown += 1
                elif not lhs.defined or not lhs.values <= rhs.values:
                    sax.bad.append(f"α={_fmt(alpha)} β={_fmt(beta)} γ={_fmt(gamma)}: "
                                   f"left {lhs.status.value} {_fmt(lhs.values)} ⊄ {_fmt(rhs.values)}")
                else:
                    sax.checked += 1
    return OrderPCAReport(U.describe(), tuple(prechecks), (mono.result(), kax.result(), sax.result()), len(samples))


def _subsets(s: frozenset[Term]):
    items = sorted(s, key=show)
    for r in range(len(items) + 1):
        for combo in combinations(items, r):
            yield frozenset(combo)


__all__ = [
    "SWAP", "Status", "StarResult", "code_set", "star_U", "star_chain", "prime", "plus", "build_k_plus",
    "build_s_tilde", "build_s_plus", "Witnesses", "AxiomResult", "OrderPCAReport", "leaf_samples",
    "structured_samples", "check_order_pca",
]
