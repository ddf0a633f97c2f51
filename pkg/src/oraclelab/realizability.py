"""Realizability relative to a finite oracle, for a small arithmetic language.

Formulas have equality atoms between numeral expressions, literal sets of
codes, falsity, the binary connectives and quantifiers bounded by at most 8.
Realizer sets are predicates on terms; finite ones also enumerate their
members exactly.  An implication's antecedent is enumerated exactly when it
is finite and otherwise restricted to the codes below ``budgets.universe``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Callable, Union

from .kernel import (
    DEFAULT_BUDGETS,
    App,
    Budgets,
    Code,
    Const,
    EvalStatus,
    Op,
    Term,
    as_term,
    code_below,
    cp,
    decode,
    num,
    step_eval,
    unwind,
)
from .oracle_machine import OutcomeSet, PlainOracle, diamond_eval, run_with_oracle

MAX_BOUND = 8

# ------------------------------------------------------------------ formulas

NumExpr = Union[int, str, tuple]


@dataclass(frozen=True)
class Eq:
    left: NumExpr
    right: NumExpr


@dataclass(frozen=True)
class TV:
    codes: frozenset[int]


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Imp:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    bound: int
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    bound: int
    body: "Formula"


Formula = Union[Eq, TV, Bot, And, Or, Imp, Forall, Exists]


def tv_mask(mask: int) -> TV:
    return TV(frozenset(i for i in range(mask.bit_length()) if mask >> i & 1))


def Not(p: Formula) -> Imp:
    return Imp(p, Bot())


class FormulaError(ValueError):
    pass


def eval_num(e: NumExpr, env: dict[str, int] | None = None) -> int:
    env = env or {}
    if isinstance(e, bool):
        raise FormulaError("booleans are not numerals")
    if isinstance(e, int):
        return e
    if isinstance(e, str):
        if e not in env:
            raise FormulaError(f"unbound variable {e!r}")
        return env[e]
    op, *args = e
    vals = [eval_num(a, env) for a in args]
    if op == "succ":
        return vals[0] + 1
    if op == "+":
        return vals[0] + vals[1]
    if op == "*":
        return vals[0] * vals[1]
    raise FormulaError(f"unknown numeral operation {op!r}")


def substitute(phi: Formula, var: str, value: int) -> Formula:
    def num_sub(e: NumExpr) -> NumExpr:
        if e == var and isinstance(e, str):
            return value
        if isinstance(e, tuple):
            return (e[0],) + tuple(num_sub(a) for a in e[1:])
        return e

    if isinstance(phi, Eq):
        return Eq(num_sub(phi.left), num_sub(phi.right))
    if isinstance(phi, (TV, Bot)):
        return phi
    if isinstance(phi, (And, Or, Imp)):
        return type(phi)(substitute(phi.left, var, value), substitute(phi.right, var, value))
    if phi.var == var:
        return phi
    return type(phi)(phi.var, phi.bound, substitute(phi.body, var, value))


def check_closed(phi: Formula, bound: set[str] | None = None) -> None:
    bound = bound or set()

    def num_vars(e: NumExpr) -> set[str]:
        if isinstance(e, str):
            return {e}
        if isinstance(e, tuple):
            return set().union(*(num_vars(a) for a in e[1:]))
        return set()

    if isinstance(phi, Eq):
        free = (num_vars(phi.left) | num_vars(phi.right)) - bound
        if free:
            raise FormulaError(f"free variables {sorted(free)}")
    elif isinstance(phi, (And, Or, Imp)):
        check_closed(phi.left, bound)
        check_closed(phi.right, bound)
    elif isinstance(phi, (Forall, Exists)):
        if not 0 <= phi.bound <= MAX_BOUND:
            raise FormulaError(f"quantifier bound {phi.bound} is outside 0..{MAX_BOUND}")
        check_closed(phi.body, bound | {phi.var})


# -------------------------------------------------------------- text syntax

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _tokens(text: str) -> list[str]:
    out, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaError(f"cannot read formula near {text[pos:pos + 10]!r}")
        out.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def _read(tokens: list[str], i: int):
    if i >= len(tokens):
        raise FormulaError("unexpected end of formula")
    tok = tokens[i]
    if tok == ")":
        raise FormulaError("unexpected ')'")
    if tok != "(":
        return (int(tok) if re.fullmatch(r"\d+", tok) else tok), i + 1
    items, i = [], i + 1
    while i < len(tokens) and tokens[i] != ")":
        item, i = _read(tokens, i)
        items.append(item)
    if i >= len(tokens):
        raise FormulaError("missing ')'")
    return items, i + 1


def _num_expr(x) -> NumExpr:
    if isinstance(x, (int, str)):
        return x
    if not x:
        raise FormulaError("empty numeral expression")
    head, *args = x
    arity = {"succ": 1, "+": 2, "*": 2}
    if head not in arity or len(args) != arity[head]:
        raise FormulaError(f"bad numeral expression {x!r}")
    return (head,) + tuple(_num_expr(a) for a in args)


def _formula(x) -> Formula:
    if x == "bot" or x == ["bot"]:
        return Bot()
    if not isinstance(x, list) or not x:
        raise FormulaError(f"expected a formula, got {x!r}")
    head, *args = x

    def need(n):
        if len(args) != n:
            raise FormulaError(f"'{head}' takes {n} arguments")

    if head == "eq":
        need(2)
        return Eq(_num_expr(args[0]), _num_expr(args[1]))
    if head == "tv":
        need(1)
        if not isinstance(args[0], int):
            raise FormulaError("'tv' takes an integer mask")
        return tv_mask(args[0])
    if head in ("and", "or", "imp"):
        need(2)
        return {"and": And, "or": Or, "imp": Imp}[head](_formula(args[0]), _formula(args[1]))
    if head == "not":
        need(1)
        return Not(_formula(args[0]))
    if head in ("forall", "exists"):
        need(3)
        var, bound, body = args
        if not isinstance(var, str) or not isinstance(bound, int):
            raise FormulaError(f"'{head}' needs a variable name and an integer bound")
        return (Forall if head == "forall" else Exists)(var, bound, _formula(body))
    raise FormulaError(f"unknown connective {head!r}")


def parse_formula(text: str) -> Formula:
    """Read the s-expression syntax, for example ``(forall n 4 (eq n n))``."""
    tokens = _tokens(text)
    tree, end = _read(tokens, 0)
    if end != len(tokens):
        raise FormulaError("trailing input after formula")
    phi = _formula(tree)
    check_closed(phi)
    return phi


def format_formula(phi: Formula) -> str:
    def num_text(e):
        if isinstance(e, tuple):
            return "(" + " ".join([e[0]] + [num_text(a) for a in e[1:]]) + ")"
        return str(e)

    if isinstance(phi, Eq):
        return f"(eq {num_text(phi.left)} {num_text(phi.right)})"
    if isinstance(phi, TV):
        return f"(tv {sum(1 << c for c in phi.codes)})"
    if isinstance(phi, Bot):
        return "bot"
    if isinstance(phi, (And, Or, Imp)):
        name = type(phi).__name__.lower()
        return f"({name} {format_formula(phi.left)} {format_formula(phi.right)})"
    name = "forall" if isinstance(phi, Forall) else "exists"
    return f"({name} {phi.var} {phi.bound} {format_formula(phi.body)})"


# ------------------------------------------------------------- realizer sets

TAG_LEFT = decode(0)
TAG_RIGHT = decode(1)
ATOM_REALIZER = num(0)

Maybe = Union[bool, None]     # None: a budget ran out before deciding


def _all(results) -> Maybe:
    unknown = False
    for r in results:
        if r is False:
            return False
        if r is None:
            unknown = True
    return None if unknown else True


def _normal(t: Term, budgets: Budgets) -> Term | bool | None:
    r = step_eval(t, budgets)
    if r.status is EvalStatus.DEFINED:
        return r.value
    return None if r.status is EvalStatus.FUEL_EXHAUSTED else False


def _as_pair(v: Term):
    head, args = unwind(v)
    if isinstance(head, Const) and head.op is Op.PAIR and len(args) == 2:
        return args
    return None


class RSet:
    """A set of realizers, given as a three-valued membership test."""

    finite = False

    def member(self, t: Term) -> Maybe:
        raise NotImplementedError

    def elements(self) -> frozenset[Term]:
        raise ValueError("infinite realizer set")


class Finite(RSet):
    finite = True

    def __init__(self, terms, budgets: Budgets):
        self.budgets = budgets
        self._elems = frozenset(terms)

    def elements(self):
        return self._elems

    def member(self, t):
        v = _normal(t, self.budgets)
        return v if isinstance(v, bool) or v is None else v in self._elems


class Structured(RSet):
    """Pairs, tagged values and numeral-indexed witnesses over component sets."""

    def __init__(self, branches: dict[Term, RSet] | None, left: RSet | None, right: RSet | None, budgets: Budgets):
        # either a pair set (left, right) or a tag -> component map
        self.branches, self.left, self.right, self.budgets = branches, left, right, budgets
        parts = list(branches.values()) if branches is not None else [left, right]
        self.finite = all(p.finite for p in parts)

    def elements(self):
        if not self.finite:
            raise ValueError("infinite realizer set")
        if self.branches is None:
            return frozenset(cp(a, b) for a in self.left.elements() for b in self.right.elements())
        return frozenset(cp(tag, a) for tag, part in self.branches.items() for a in part.elements())

    def member(self, t):
        v = _normal(t, self.budgets)
        if isinstance(v, bool) or v is None:
            return v
        parts = _as_pair(v)
        if parts is None:
            return False
        a, b = parts
        if self.branches is None:
            return _all(iter([self.left.member(a), self.right.member(b)]))
        part = self.branches.get(a)
        return False if part is None else part.member(b)


Runner = Callable[[Term, Term], OutcomeSet]


def _lands_in(out: OutcomeSet, target: RSet) -> Maybe:
    if out.inconclusive:
        return None
    if not out.defined:
        return False
    return _all(target.member(v) for v in sorted(out.values, key=repr))


class Arrow(RSet):
    """``{e : for every x in the antecedent, every run of e x lands in the consequent}``."""

    def __init__(self, antecedent: RSet, consequent: RSet, run: Runner, budgets: Budgets):
        self.antecedent, self.consequent, self.run, self.budgets = antecedent, consequent, run, budgets
        self._sample: tuple[Term, ...] | None = None

    def inputs(self) -> tuple[Term, ...]:
        if self._sample is None:
            if self.antecedent.finite:
                self._sample = tuple(sorted(self.antecedent.elements(), key=repr))
            else:
                self._sample = tuple(decode(c) for c in range(self.budgets.universe)
                                     if self.antecedent.member(decode(c)) is True)
        return self._sample

    def member(self, t):
        return _all(_lands_in(self.run(t, x), self.consequent) for x in self.inputs())


class Family(RSet):
    """``{e : for every n < k, every run of e n lands in the n-th set}``."""

    def __init__(self, parts: list[RSet], run: Runner):
        self.parts, self.run = parts, run

    def member(self, t):
        return _all(_lands_in(self.run(t, num(n)), part) for n, part in enumerate(self.parts))


class Modal(RSet):
    """``j(P)``: codes whose universal-machine runs all land in ``P``."""

    def __init__(self, inner: RSet, theta: PlainOracle, budgets: Budgets):
        self.inner, self.theta, self.budgets = inner, theta, budgets

    def member(self, t):
        return _lands_in(diamond_eval(self.theta, t, self.budgets), self.inner)


def _atom(phi: Formula, budgets: Budgets) -> RSet | None:
    if isinstance(phi, Eq):
        true = eval_num(phi.left) == eval_num(phi.right)
        return Finite([ATOM_REALIZER] if true else [], budgets)
    if isinstance(phi, TV):
        return Finite((decode(c) for c in phi.codes), budgets)
    if isinstance(phi, Bot):
        return Finite([], budgets)
    return None


def _oracle_runner(theta: PlainOracle, budgets: Budgets) -> Runner:
    return lambda e, x: run_with_oracle(App(e, x), theta, budgets)


def _plain_runner(budgets: Budgets) -> Runner:
    return lambda e, x: run_with_oracle(App(e, x), PlainOracle({}), budgets)


def realizer_set(phi: Formula, theta: PlainOracle, budgets: Budgets = DEFAULT_BUDGETS) -> RSet:
    """Realizers relative to ``theta``: implications and universals run with the oracle."""
    check_closed(phi)
    run = _oracle_runner(theta, budgets)

    def go(p: Formula) -> RSet:
        atom = _atom(p, budgets)
        if atom is not None:
            return atom
        if isinstance(p, And):
            return Structured(None, go(p.left), go(p.right), budgets)
        if isinstance(p, Or):
            return Structured({TAG_LEFT: go(p.left), TAG_RIGHT: go(p.right)}, None, None, budgets)
        if isinstance(p, Exists):
            return Structured({num(m): go(substitute(p.body, p.var, m)) for m in range(p.bound)}, None, None, budgets)
        if isinstance(p, Imp):
            return Arrow(go(p.left), go(p.right), run, budgets)
        return Family([go(substitute(p.body, p.var, n)) for n in range(p.bound)], run)

    return go(phi)


class Style(enum.Enum):
    LVO = "LvO"
    LIFSCHITZ = "Lifschitz"


def j_translate_eval(phi: Formula, style: Style | str, theta: PlainOracle,
                     budgets: Budgets = DEFAULT_BUDGETS) -> RSet:
    """Value of the translated formula, with ``j`` given by the universal machine over ``theta``."""
    style = Style(style) if not isinstance(style, Style) else style
    check_closed(phi)
    run = _plain_runner(budgets)

    def j(s: RSet) -> RSet:
        return Modal(s, theta, budgets)

    def go(p: Formula) -> RSet:
        atom = _atom(p, budgets)
        if atom is not None:
            return atom
        if isinstance(p, And):
            return Structured(None, go(p.left), go(p.right), budgets)
        if isinstance(p, Or):
            inner = Structured({TAG_LEFT: go(p.left), TAG_RIGHT: go(p.right)}, None, None, budgets)
            return j(inner) if style is Style.LIFSCHITZ else inner
        if isinstance(p, Exists):
            inner = Structured({num(m): go(substitute(p.body, p.var, m)) for m in range(p.bound)}, None, None, budgets)
            return j(inner) if style is Style.LIFSCHITZ else inner
        if isinstance(p, Imp):
            right = go(p.right)
            return Arrow(go(p.left), j(right) if style is Style.LVO else right, run, budgets)
        parts = [go(substitute(p.body, p.var, n)) for n in range(p.bound)]
        if style is Style.LVO:
            parts = [j(s) for s in parts]
        return Family(parts, run)

    return go(phi)


# ----------------------------------------------------------------- verdicts

class RVerdict(enum.Enum):
    REALIZES = "realizes"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


def _verdict(m: Maybe) -> RVerdict:
    if m is None:
        return RVerdict.INCONCLUSIVE
    return RVerdict.REALIZES if m else RVerdict.FAILS


def theta_realizes(e: Code, phi: Formula, theta: PlainOracle, budgets: Budgets = DEFAULT_BUDGETS) -> RVerdict:
    return _verdict(realizer_set(phi, theta, budgets).member(as_term(e)))


def in_translation(e: Code, phi: Formula, style: Style | str, theta: PlainOracle,
                   budgets: Budgets = DEFAULT_BUDGETS) -> RVerdict:
    return _verdict(j_translate_eval(phi, style, theta, budgets).member(as_term(e)))


@dataclass(frozen=True)
class SearchResult:
    code: int | None
    inconclusive: int     # candidates below the answer whose check ran out of budget
    searched: int

    @property
    def found(self) -> bool:
        return self.code is not None


def least_member(s: RSet, budgets: Budgets = DEFAULT_BUDGETS) -> SearchResult:
    """Least code up to the search bound lying in ``s``.

    For a finite set the scan can stop at the code of its smallest element.
    """
    limit = budgets.search_bound
    if s.finite:
        codes = [c for c in (code_below(t, limit + 1) for t in s.elements()) if c is not None]
        if codes:
            limit = min(codes)
    unknown = 0
    for c in range(limit + 1):
        verdict = s.member(decode(c))
        if verdict is True:
            return SearchResult(c, unknown, c + 1)
        if verdict is None:
            unknown += 1
    return SearchResult(None, unknown, limit + 1)


def find_realizer(phi: Formula, theta: PlainOracle, budgets: Budgets = DEFAULT_BUDGETS) -> int | None:
    return least_member(realizer_set(phi, theta, budgets), budgets).code


def find_translated_realizer(phi: Formula, style: Style | str, theta: PlainOracle,
                             budgets: Budgets = DEFAULT_BUDGETS) -> int | None:
    return least_member(j_translate_eval(phi, style, theta, budgets), budgets).code


# ------------------------------------------------ the choice-oracle example

def choice_disjunction() -> Formula:
    """``{0} ∨ {1}``: one oracle answer decides the side and is its own witness."""
    return Or(TV(frozenset({0})), TV(frozenset({1})))


def choice_realizer() -> Term:
    """Packed program for the universal machine: ask key 0 and return ``cp(a, a)``.

    The answer ``a`` is bound once and shared, so both components agree.
    """
    from .kernel import PAIR, QUERY, Var, app, compile_lambda

    y, d = Var("y"), Var("d")
    dup = compile_lambda([y], app(PAIR, y, y))
    return cp(compile_lambda([d], App(dup, App(QUERY, decode(0)))), decode(0))


__all__ = [
    "Eq", "TV", "Bot", "And", "Or", "Imp", "Forall", "Exists", "Formula", "Not", "tv_mask", "FormulaError",
    "parse_formula", "format_formula", "substitute", "check_closed", "eval_num", "RSet", "realizer_set",
    "j_translate_eval", "Style", "RVerdict", "theta_realizes", "in_translation", "SearchResult",
    "least_member", "find_realizer", "find_translated_realizer", "choice_disjunction", "choice_realizer",
    "ATOM_REALIZER", "TAG_LEFT", "TAG_RIGHT", "MAX_BOUND",
]
