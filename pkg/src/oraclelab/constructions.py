"""Oracle constructions on codes and their structural witnesses.

Each :class:`EvaluableOracle` is a partial multimap on codes computed by a
small machine: a finite table, a Medvedev-style image ``tau[Q]``, the
one-query Weihrauch machine, its pointed variant, or the universal
finitely-many-queries machine.  The module also builds the programs that
witness transparency, inflation and idempotence, and checks those clauses on
sample inputs under budgets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

from .kernel import (
    DEFAULT_BUDGETS,
    FST,
    PAIR,
    QUERY,
    SAMPLE_PROGRAMS,
    SND,
    App,
    Budgets,
    Code,
    EvalStatus,
    K,
    Term,
    Var,
    apply,
    app,
    as_term,
    cantor_pair,
    compile_lambda,
    cp,
    decode,
    num,
    show,
    step_eval,
)
from .oracle_machine import (
    Outcome,
    OutcomeSet,
    PlainOracle,
    all_defined,
    combine,
    diamond_eval,
    divergent,
    fuel_exhausted,
    malformed,
    split_pair,
)
from .problems import PLAIN_SECRET, MMMap


class Kind(enum.Enum):
    TABLE = "Table"
    MED = "Med"
    WEIH = "Weih"
    PWEIH = "PWeih"
    DIAMOND = "Diamond"


def _lift(result, what: str) -> OutcomeSet | Term:
    """Value of an EvalResult, or the OutcomeSet describing why there is none."""
    if result.status is EvalStatus.DEFINED:
        return result.value
    if result.status is EvalStatus.STUCK:
        return divergent(f"{what} is stuck: {show(result.term)}")
    return fuel_exhausted(f"while computing {what}")


# ------------------------------------------------------------------ machines

def table_eval(g: PlainOracle, x: Code) -> OutcomeSet:
    key = g.key_of(as_term(x))
    if key is None:
        return divergent("outside the table domain")
    return all_defined(g.answer_terms(key), [1])


def med_eval(Q: Iterable[int], tau: Code, budgets: Budgets = DEFAULT_BUDGETS) -> OutcomeSet:
    """Image of the finite set ``Q`` under the program ``tau``."""
    prog = as_term(tau)
    parts = []
    for q in sorted(set(Q)):
        got = _lift(apply(prog, q, budgets), f"tau on {q}")
        parts.append(got if isinstance(got, OutcomeSet) else all_defined([got], [0]))
    return combine(parts)


def split_triple(hkx: Code, budgets: Budgets = DEFAULT_BUDGETS) -> tuple[Term, Term, Term] | OutcomeSet:
    """Read ``cp(h, cp(k, x))``; a malformed triple gives a MALFORMED outcome."""
    outer = split_pair(hkx, budgets)
    if isinstance(outer, OutcomeSet):
        return outer
    h, rest = outer
    inner = split_pair(rest, budgets)
    if isinstance(inner, OutcomeSet):
        return inner
    return h, inner[0], inner[1]


def triple(h: Code, k: Code, x: Code) -> Term:
    return cp(h, cp(k, x))


def _finish(k: Term, x: Term, answers: Sequence[Term], budgets: Budgets) -> OutcomeSet:
    parts = []
    for y in answers:
        got = _lift(apply(k, cp(x, y), budgets), "k on (x, y)")
        parts.append(got if isinstance(got, OutcomeSet) else all_defined([got], [1]))
    if not parts:
        return all_defined([], [1])
    return combine(parts)


def weih_eval(g: PlainOracle, hkx: Code, budgets: Budgets = DEFAULT_BUDGETS) -> OutcomeSet:
    """One-query machine: ``{k(x, y) : y in g(h x)}``.

    Unlike the universal machine, an empty answer set is returned as the empty
    image, which is what the set formula gives.
    """
    parts = split_triple(hkx, budgets)
    if isinstance(parts, OutcomeSet):
        return parts
    h, k, x = parts
    z = _lift(apply(h, x, budgets), "h on x")
    if isinstance(z, OutcomeSet):
        return z
    key = g.key_of(z)
    if key is None:
        return divergent("h(x) is outside dom(g)")
    return _finish(k, x, g.answer_terms(key), budgets)


TAG_IDENTITY = decode(0)
TAG_ORACLE = decode(1)


def pweih_eval(g: PlainOracle, hkx: Code, budgets: Budgets = DEFAULT_BUDGETS) -> OutcomeSet:
    """One query to ``id ⊔ g``: ``h x`` must be ``cp(0, w)`` or ``cp(1, w)``.

    Tag 0 answers ``w`` itself, tag 1 looks ``w`` up in ``g``.
    """
    parts = split_triple(hkx, budgets)
    if isinstance(parts, OutcomeSet):
        return parts
    h, k, x = parts
    z = _lift(apply(h, x, budgets), "h on x")
    if isinstance(z, OutcomeSet):
        return z
    tagged = split_pair(z, budgets)
    if isinstance(tagged, OutcomeSet):
        return divergent("h(x) is not a tagged query")
    tag, w = tagged
    if tag == TAG_IDENTITY:
        return _finish(k, x, [w], budgets)
    if tag == TAG_ORACLE:
        key = g.key_of(w)
        if key is None:
            return divergent("tagged query outside dom(g)")
        return _finish(k, x, g.answer_terms(key), budgets)
    return divergent("tag is neither 0 nor 1")


@dataclass(frozen=True)
class EvaluableOracle:
    kind: Kind
    table: PlainOracle | None = None
    query_set: frozenset[int] = frozenset()
    budgets: Budgets = DEFAULT_BUDGETS

    @classmethod
    def of_table(cls, g: PlainOracle, budgets: Budgets = DEFAULT_BUDGETS) -> "EvaluableOracle":
        return cls(Kind.TABLE, g, budgets=budgets)

    @classmethod
    def med(cls, Q: Iterable[int], budgets: Budgets = DEFAULT_BUDGETS) -> "EvaluableOracle":
        return cls(Kind.MED, query_set=frozenset(Q), budgets=budgets)

    @classmethod
    def weih(cls, g: PlainOracle, budgets: Budgets = DEFAULT_BUDGETS) -> "EvaluableOracle":
        return cls(Kind.WEIH, g, budgets=budgets)

    @classmethod
    def pweih(cls, g: PlainOracle, budgets: Budgets = DEFAULT_BUDGETS) -> "EvaluableOracle":
        return cls(Kind.PWEIH, g, budgets=budgets)

    @classmethod
    def diamond(cls, g: PlainOracle, budgets: Budgets = DEFAULT_BUDGETS) -> "EvaluableOracle":
        return cls(Kind.DIAMOND, g, budgets=budgets)

    def evaluate(self, x: Code) -> OutcomeSet:
        b = self.budgets
        if self.kind is Kind.TABLE:
            return table_eval(self.table, x)
        if self.kind is Kind.MED:
            return med_eval(self.query_set, x, b)
        if self.kind is Kind.WEIH:
            return weih_eval(self.table, x, b)
        if self.kind is Kind.PWEIH:
            return pweih_eval(self.table, x, b)
        return diamond_eval(self.table, x, b)

    __call__ = evaluate

    def member(self, x: Code) -> bool | None:
        """True/False for membership in the domain, None when budgets ran out."""
        out = self.evaluate(x)
        return None if out.inconclusive else out.defined

    def describe(self) -> str:
        if self.kind is Kind.MED:
            return f"Med({sorted(self.query_set)})"
        return f"{self.kind.value}({self.table!r})"


# ------------------------------------------------------- extensional algebra

def join(f: MMMap, g: MMMap) -> MMMap:
    """Disjoint sum; public ``x`` of side ``i`` becomes the Cantor code of ``(i, x)``."""
    entries = {}
    for side, m in ((0, f), (1, g)):
        for x, p, vals in m.entries:
            entries[(cantor_pair(side, x), (side, p))] = vals
    publics = [cantor_pair(0, x) for x in f.publics] + [cantor_pair(1, x) for x in g.publics]
    secrets = [(0, p) for p in f.secrets] + [(1, p) for p in g.secrets]
    return MMMap.build(f"join({f.name},{g.name})", publics, secrets, entries)


def compose_multimap(f: MMMap, g: MMMap) -> MMMap:
    """``g ∘ f``: defined where every value of ``f`` lies in ``dom(g)``."""
    if not (f.is_plain() and g.is_plain()):
        raise ValueError("composition is defined here for plain maps only")
    fdom = {x: f.val(x, p) for x, p, _ in f.entries}
    gdom = {y: g.val(y, p) for y, p, _ in g.entries}
    table = {}
    for x, ys in fdom.items():
        if all(y in gdom for y in ys):
            out: set[int] = set()
            for y in ys:
                out |= gdom[y]
            table[x] = out
    return MMMap.plain(f"{g.name}∘{f.name}", table, publics=f.publics)


def compose_mm(f: MMMap, g: MMMap) -> MMMap:
    """Composition with advice: the secret of ``g ∘ f`` is ``(p, choice)``.

    ``choice`` fixes a secret of ``g`` for every answer of ``f(x|p)``; only
    choices that keep every step inside ``dom(g)`` give domain entries.
    """
    entries = {}
    for x, p, ys in f.entries:
        ys_sorted = sorted(ys)
        options = [g.secrets_at(y) for y in ys_sorted]
        for picks in product(*options):
            out: set[int] = set()
            for y, q in zip(ys_sorted, picks):
                out |= g.val(y, q)
            entries[(x, (p, tuple(zip(ys_sorted, picks))))] = out
    secrets = {s for _, s in entries}
    return MMMap.build(f"{g.name}∘{f.name}", f.publics, secrets, entries)


def identity_map(name: str, points: Iterable[int]) -> MMMap:
    pts = sorted(set(points))
    return MMMap.plain(name, {x: {x} for x in pts})


def plain_from_oracle(name: str, g: PlainOracle) -> MMMap:
    return MMMap.plain(name, dict(g.table))


# ------------------------------------------------------------------ witnesses

class NoWitness(ValueError):
    """Raised when no constructed witness exists for a kind and property."""


_x, _y, _f, _l, _t, _p, _q, _k = (Var(n) for n in "xyfltpqk")

# composition code: COMPOSE l k x = l (k x)
COMPOSE = compile_lambda([_l, _k, _x], App(_l, App(_k, _x)))
# RUN p = (first p) (second p): run a packed program on its packed argument
RUN = compile_lambda([_p], App(App(FST, _p), App(SND, _p)))
RUN_TWICE = compile_lambda([_p], App(RUN, App(RUN, _p)))


def _kind_of(target) -> Kind:
    if isinstance(target, EvaluableOracle):
        return target.kind
    if isinstance(target, Kind):
        return target
    try:
        return Kind(target)
    except ValueError:
        raise NoWitness(f"unknown oracle kind {target!r}") from None


def transparency_witness(target) -> Term:
    """Program ``u`` with ``U(u f x) ⊆ f * U(x)``."""
    kind = _kind_of(target)
    if kind in (Kind.WEIH, Kind.PWEIH):
        # keep h and x, post-compose the continuation k with the function
        body = app(PAIR, App(FST, _t),
                   app(PAIR, app(COMPOSE, _f, App(FST, App(SND, _t))), App(SND, App(SND, _t))))
        return compile_lambda([_f, _t], body)
    if kind is Kind.DIAMOND:
        return compile_lambda([_f, _t], app(PAIR, app(COMPOSE, _f, App(FST, _t)), App(SND, _t)))
    if kind is Kind.MED:
        return COMPOSE
    raise NoWitness(f"no transparency witness is constructed for {kind.value}")


def _normal_key(g: PlainOracle) -> Term | None:
    for key in g.table:
        t = decode(key)
        r = step_eval(t)
        if r.defined and r.value == t:
            return t
    return None


def inflation_witness(target) -> Term:
    """Program ``eta`` with ``U(eta x) ⊆ {x}``."""
    kind = _kind_of(target)
    if kind is Kind.DIAMOND:
        return compile_lambda([_x], app(PAIR, App(K, _x), K))
    if kind is Kind.MED:
        return K
    if kind is Kind.PWEIH:
        tag_identity = compile_lambda([_y], app(PAIR, TAG_IDENTITY, _y))
        return compile_lambda([_x], app(PAIR, tag_identity, app(PAIR, FST, _x)))
    if kind is Kind.WEIH:
        if not isinstance(target, EvaluableOracle):
            raise NoWitness("the Weih inflation witness depends on the oracle table")
        z = _normal_key(target.table)
        if z is None:
            raise NoWitness("the table has no reachable key, so Weih has empty domain")
        return compile_lambda([_x], app(PAIR, App(K, z), app(PAIR, FST, _x)))
    raise NoWitness(f"no inflation witness is constructed for {kind.value}")


def idempotence_witness(target) -> Term:
    """Program ``mu`` with ``U(mu x) ⊆ U(U(x))``."""
    kind = _kind_of(target)
    if kind is Kind.DIAMOND:
        # run the packed program, then run the pair it returns
        return compile_lambda([_x], app(PAIR, RUN_TWICE, _x))
    if kind is Kind.MED:
        return compile_lambda([_t, _q], app(_t, _q, _q))
    raise NoWitness(f"no idempotence witness is constructed for {kind.value}")


_WITNESS_BUILDERS = {
    "transparent": transparency_witness,
    "inflationary": inflation_witness,
    "idempotent": idempotence_witness,
}
PROPERTIES = tuple(_WITNESS_BUILDERS)


# --------------------------------------------------------------- property runs

@dataclass(frozen=True)
class Samples:
    functions: tuple[Term, ...]
    inputs: tuple[Term, ...]


def standard_samples(U: EvaluableOracle) -> Samples:
    """Deterministic sample inputs shaped for the oracle's calling convention."""
    small = tuple(decode(i) for i in range(4))
    numerals = tuple(num(i) for i in range(3))
    programs = SAMPLE_PROGRAMS
    if U.kind is Kind.TABLE:
        keys = tuple(decode(k) for k in U.table.table)
        inputs = tuple(dict.fromkeys(tuple(decode(i) for i in range(8)) + keys))
    elif U.kind is Kind.MED:
        inputs = programs
    elif U.kind in (Kind.WEIH, Kind.PWEIH):
        hs = programs
        if U.kind is Kind.PWEIH:
            hs = tuple(compile_lambda([_y], app(PAIR, tag, _y)) for tag in (TAG_IDENTITY, TAG_ORACLE)) + programs[:4]
        ks = (SND, FST, compile_lambda([_p], App(K, App(SND, _p))), SAMPLE_PROGRAMS[7])
        inputs = tuple(triple(h, k, x) for h in hs for k in ks for x in small + numerals[:1])
    else:
        query_once = compile_lambda([_y], App(QUERY, _y))
        query_twice = compile_lambda([_y], App(QUERY, App(QUERY, _y)))
        repack = compile_lambda([_y], app(PAIR, QUERY, _y))
        progs = programs + (query_once, query_twice, repack)
        inputs = tuple(cp(p, a) for p in progs for a in small + numerals[:1])
        eta = inflation_witness(Kind.DIAMOND)
        inputs += tuple(App(eta, cp(p, a)) for p in (query_once, SAMPLE_PROGRAMS[0]) for a in small[:2])
    return Samples(programs, inputs)


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class PropertyReport:
    property: str
    verdict: Verdict
    witness: Term | None
    checked: int = 0
    vacuous: int = 0
    inconclusive: int = 0
    counterexamples: tuple[str, ...] = ()
    note: str = ""

    @property
    def total(self) -> int:
        return self.checked + self.vacuous + self.inconclusive

    def summary(self) -> str:
        text = (f"{self.property}: {self.verdict.value} "
                f"(checked {self.checked}, vacuous {self.vacuous}, inconclusive {self.inconclusive})")
        if self.counterexamples:
            text += f"; first counterexample {self.counterexamples[0]}"
        if self.note:
            text += f"; {self.note}"
        return text


_CHECKED, _VACUOUS, _UNKNOWN, _FAILED = range(4)


def _image(f: Term, ys: Iterable[Term], budgets: Budgets) -> frozenset[Term] | int:
    out = set()
    for y in ys:
        r = apply(f, y, budgets)
        if r.status is EvalStatus.STUCK:
            return _VACUOUS
        if r.status is EvalStatus.FUEL_EXHAUSTED:
            return _UNKNOWN
        out.add(r.value)
    return frozenset(out)


def _lhs(U: EvaluableOracle, program: Term) -> OutcomeSet:
    r = step_eval(program, U.budgets)
    if r.status is EvalStatus.STUCK:
        return divergent("witness application is stuck")
    if r.status is EvalStatus.FUEL_EXHAUSTED:
        return fuel_exhausted("witness application")
    return U.evaluate(r.value)


def _contained(lhs: OutcomeSet, allowed: frozenset[Term]) -> int:
    if lhs.inconclusive:
        return _UNKNOWN
    if not lhs.defined:
        return _FAILED
    return _CHECKED if lhs.values <= allowed else _FAILED


def _check_transparent(U, w, f, x) -> int:
    base = U.evaluate(x)
    if base.inconclusive:
        return _UNKNOWN
    if not base.defined:
        return _VACUOUS
    rhs = _image(f, base.values, U.budgets)
    if isinstance(rhs, int):
        return rhs
    return _contained(_lhs(U, app(w, f, x)), rhs)


def _check_inflationary(U, w, x) -> int:
    r = step_eval(x, U.budgets)
    if not r.defined:
        return _VACUOUS if r.status is EvalStatus.STUCK else _UNKNOWN
    return _contained(_lhs(U, App(w, x)), frozenset({r.value}))


def _check_idempotent(U, w, x) -> int:
    first = U.evaluate(x)
    if first.inconclusive:
        return _UNKNOWN
    if not first.defined:
        return _VACUOUS
    second = combine([U.evaluate(y) for y in sorted(first.values, key=show)])
    if second.inconclusive:
        return _UNKNOWN
    if not second.defined:
        return _VACUOUS
    return _contained(_lhs(U, App(w, x)), second.values)


def _run_clause(U: EvaluableOracle, prop: str, witness: Term, samples: Samples):
    tallies = [0, 0, 0]
    bad: list[str] = []
    if prop == "transparent":
        cases = [((f, x), f"f={show(f)} x={show(x)}") for f in samples.functions for x in samples.inputs]
    else:
        cases = [((x,), f"x={show(x)}") for x in samples.inputs]
    check = {"transparent": _check_transparent, "inflationary": _check_inflationary,
             "idempotent": _check_idempotent}[prop]
    for args, label in cases:
        res = check(U, witness, *args)
        if res == _FAILED:
            bad.append(label)
        else:
            tallies[res] += 1
    return tallies, sorted(bad)


def _search_witness(U: EvaluableOracle, prop: str, samples: Samples) -> tuple[Term | None, str]:
    """Look for any witness code below the search bound."""
    if U.kind is Kind.TABLE and prop == "inflationary":
        # a landing key must have all its answers inside {x}
        for x in samples.inputs:
            r = step_eval(x, U.budgets)
            if not r.defined:
                continue
            if not any(set(g_vals) <= {r.value} for g_vals in (U.table.answer_terms(k) for k in U.table.table)):
                return None, f"no table entry has answers inside {{{show(r.value)}}}"
    for c in range(U.budgets.search_bound):
        candidate = decode(c)
        tallies, bad = _run_clause(U, prop, candidate, samples)
        if not bad and tallies[_UNKNOWN] == 0:
            return candidate, f"found by search at code {c}"
    return None, f"no witness below search bound {U.budgets.search_bound}"


def check_property(U: EvaluableOracle, prop: str, samples: Samples | None = None,
                   witness: Code | None = None, *, search: bool = True) -> PropertyReport:
    """Check one structural clause on every sample, with a three-valued verdict."""
    if prop not in _WITNESS_BUILDERS:
        raise ValueError(f"unknown property {prop!r}; expected one of {PROPERTIES}")
    samples = samples or standard_samples(U)
    note = ""
    if witness is None:
        try:
            w = _WITNESS_BUILDERS[prop](U)
        except NoWitness as err:
            note = str(err)
            w = None
            if search:
                w, note = _search_witness(U, prop, samples)
            if w is None:
                return PropertyReport(prop, Verdict.FAIL, None, counterexamples=("no witness",), note=note)
    else:
        w = as_term(witness)
    tallies, bad = _run_clause(U, prop, w, samples)
    checked, vacuous, unknown = tallies
    if bad:
        verdict = Verdict.FAIL
    elif unknown:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS
    return PropertyReport(prop, verdict, w, checked, vacuous, unknown, tuple(bad), note)


__all__ = [
    "Kind", "EvaluableOracle", "table_eval", "med_eval", "weih_eval", "pweih_eval", "split_triple",
    "triple", "join", "compose_multimap", "compose_mm", "identity_map", "plain_from_oracle", "transparency_witness",
    "inflation_witness", "idempotence_witness", "NoWitness", "COMPOSE", "RUN", "Samples",
    "standard_samples", "Verdict", "PropertyReport", "check_property", "PROPERTIES", "PLAIN_SECRET",
    "TAG_IDENTITY", "TAG_ORACLE", "Outcome", "malformed",
]
