"""Nondeterministic evaluation against a finite multimap oracle.

A run that reaches ``QUERY v`` looks up the code of the normalized ``v``.
Each answer spawns a branch.  Branches are explored by replaying the program
from the start with a fixed script of earlier answers, which keeps the
evaluator itself deterministic and makes the outcome a pure function of the
program and the oracle.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

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
    decode,
    encode,
    show,
    step_eval,
    unwind,
)


class PlainOracle:
    """Finite partial multimap on codes; an entry may have an empty answer set."""

    def __init__(self, entries: Mapping[int, Iterable[int]] | None = None):
        table = {}
        for key, values in (entries or {}).items():
            if key < 0:
                raise ValueError("oracle keys are naturals")
            vals = frozenset(values)
            if any(v < 0 for v in vals):
                raise ValueError("oracle answers are naturals")
            table[int(key)] = vals
        self.table: dict[int, frozenset[int]] = dict(sorted(table.items()))
        self._by_term = {decode(k): k for k in self.table}
        self._answers = {k: tuple(decode(a) for a in sorted(v)) for k, v in self.table.items()}

    def __contains__(self, key: int) -> bool:
        return key in self.table

    def __getitem__(self, key: int) -> frozenset[int]:
        return self.table[key]

    def __len__(self) -> int:
        return len(self.table)

    def __eq__(self, other) -> bool:
        return isinstance(other, PlainOracle) and self.table == other.table

    def __hash__(self) -> int:
        return hash(tuple(self.table.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {sorted(v)}" for k, v in self.table.items())
        return f"PlainOracle({{{inner}}})"

    def key_of(self, t: Term) -> int | None:
        """Code of ``t`` if it is a key of the table."""
        return self._by_term.get(t)

    def answer_terms(self, key: int) -> tuple[Term, ...]:
        return self._answers[key]

    def is_single_valued(self) -> bool:
        return all(len(v) == 1 for v in self.table.values())

    def to_json(self) -> dict:
        return {"entries": [{"key": k, "values": sorted(v)} for k, v in self.table.items()]}

    @classmethod
    def from_json(cls, data: dict) -> "PlainOracle":
        if not isinstance(data, dict) or not isinstance(data.get("entries"), list):
            raise ValueError("oracle JSON needs an 'entries' list")
        table: dict[int, list[int]] = {}
        for i, entry in enumerate(data["entries"]):
            try:
                key = entry["key"]
                values = entry["values"]
            except (TypeError, KeyError):
                raise ValueError(f"entry {i} needs 'key' and 'values'") from None
            if not _is_nat(key) or not isinstance(values, list) or not all(_is_nat(v) for v in values):
                raise ValueError(f"entry {i}: key and values must be naturals")
            if key in table:
                raise ValueError(f"duplicate key {key} in oracle")
            table[key] = values
        return cls(table)

    @classmethod
    def load(cls, path: str | Path) -> "PlainOracle":
        return cls.from_json(json.loads(Path(path).read_text()))


def _is_nat(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool) and v >= 0


class Outcome(enum.Enum):
    ALL_DEFINED = "all-defined"
    DIVERGENT = "divergent"
    MALFORMED = "malformed"
    FUEL_EXHAUSTED = "fuel-exhausted"
    QUERY_BUDGET_EXCEEDED = "query-budget-exceeded"
    BRANCH_BUDGET_EXCEEDED = "branch-budget-exceeded"


INCONCLUSIVE = frozenset({Outcome.FUEL_EXHAUSTED, Outcome.QUERY_BUDGET_EXCEEDED, Outcome.BRANCH_BUDGET_EXCEEDED})


@dataclass(frozen=True)
class OutcomeSet:
    status: Outcome
    values: frozenset[Term] = frozenset()
    detail: str = ""
    # number of oracle queries made along each halting branch
    query_counts: frozenset[int] = field(default=frozenset())

    @property
    def defined(self) -> bool:
        return self.status is Outcome.ALL_DEFINED

    @property
    def inconclusive(self) -> bool:
        return self.status in INCONCLUSIVE

    @property
    def undefined(self) -> bool:
        return self.status in (Outcome.DIVERGENT, Outcome.MALFORMED)

    def codes(self) -> frozenset[int]:
        return frozenset(encode(v) for v in self.values)

    def describe(self) -> str:
        if self.defined:
            inner = ", ".join(sorted(show(v) for v in self.values))
            return f"AllDefined({{{inner}}})"
        return self.status.value + (f" ({self.detail})" if self.detail else "")


def all_defined(values: Iterable[Term], query_counts: Iterable[int] = (0,)) -> OutcomeSet:
    return OutcomeSet(Outcome.ALL_DEFINED, frozenset(values), "", frozenset(query_counts))


def divergent(detail: str = "") -> OutcomeSet:
    return OutcomeSet(Outcome.DIVERGENT, detail=detail)


def malformed(detail: str = "") -> OutcomeSet:
    return OutcomeSet(Outcome.MALFORMED, detail=detail)


def fuel_exhausted(detail: str = "") -> OutcomeSet:
    return OutcomeSet(Outcome.FUEL_EXHAUSTED, detail=detail)


# Precedence when branches disagree: a certain divergence decides the
# outcome; otherwise the first budget problem in this order is reported.
_PRECEDENCE = (Outcome.DIVERGENT, Outcome.MALFORMED, Outcome.QUERY_BUDGET_EXCEEDED, Outcome.FUEL_EXHAUSTED)


def combine(parts: Iterable[OutcomeSet]) -> OutcomeSet:
    """Union of outcome sets: defined only if every part is."""
    parts = list(parts)
    for status in (Outcome.BRANCH_BUDGET_EXCEEDED,) + _PRECEDENCE:
        hits = [p for p in parts if p.status is status]
        if hits:
            return OutcomeSet(status, detail=min(p.detail for p in hits))
    values: set[Term] = set()
    counts: set[int] = set()
    for p in parts:
        values |= p.values
        counts |= p.query_counts
    return OutcomeSet(Outcome.ALL_DEFINED, frozenset(values), "", frozenset(counts))


class _Branch(Exception):
    def __init__(self, answers):
        self.answers = answers


class _Halt(Exception):
    def __init__(self, status: Outcome, detail: str):
        self.status = status
        self.detail = detail


def run_with_oracle(term: Term, g: PlainOracle, budgets: Budgets = DEFAULT_BUDGETS) -> OutcomeSet:
    """Evaluate a closed term, answering queries from ``g`` on every branch."""
    scripts: list[tuple[Term, ...]] = [()]
    leaves: list[OutcomeSet] = []
    while scripts:
        script = scripts.pop()
        asked = 0

        def ask(v: Term) -> Term:
            nonlocal asked
            index = asked
            asked += 1
            if index >= budgets.max_queries:
                raise _Halt(Outcome.QUERY_BUDGET_EXCEEDED, f"more than {budgets.max_queries} queries")
            key = g.key_of(v)
            if key is None:
                raise _Halt(Outcome.DIVERGENT, "query outside the oracle domain")
            answers = g.answer_terms(key)
            if not answers:
                raise _Halt(Outcome.DIVERGENT, f"empty answer set at key {key}")
            if index < len(script):
                return script[index]
            raise _Branch(answers)

        try:
            result = step_eval(term, budgets, ask)
        except _Branch as fork:
            for answer in reversed(fork.answers):
                scripts.append(script + (answer,))
            continue
        except _Halt as halt:
            leaf = OutcomeSet(halt.status, detail=halt.detail)
        else:
            if result.status is EvalStatus.DEFINED:
                leaf = all_defined([result.value], [asked])
            elif result.status is EvalStatus.STUCK:
                leaf = divergent("stuck: " + show(result.term))
            else:
                leaf = fuel_exhausted()
        leaves.append(leaf)
        if len(leaves) > budgets.max_branches:
            return OutcomeSet(Outcome.BRANCH_BUDGET_EXCEEDED, detail=f"more than {budgets.max_branches} branches")
    return combine(leaves)


def eval_with_oracle(program: Code, input: Code, g: PlainOracle, budgets: Budgets = DEFAULT_BUDGETS) -> OutcomeSet:
    return run_with_oracle(App(as_term(program), as_term(input)), g, budgets)


def split_pair(x: Code, budgets: Budgets = DEFAULT_BUDGETS) -> tuple[Term, Term] | OutcomeSet:
    """Components of a code that evaluates (weakly) to ``PAIR a b``.

    Returns an OutcomeSet describing the failure otherwise.
    """
    result = step_eval(as_term(x), budgets, weak=True)
    if result.status is EvalStatus.FUEL_EXHAUSTED:
        return fuel_exhausted("while reading a pair")
    if result.status is EvalStatus.STUCK:
        return malformed("not a pair: " + show(result.term))
    head, args = unwind(result.value)
    if isinstance(head, Const) and head.op is Op.PAIR and len(args) == 2:
        return args[0], args[1]
    return malformed("not a pair: " + show(result.value))


def diamond_eval(g: PlainOracle, x: Code, budgets: Budgets = DEFAULT_BUDGETS) -> OutcomeSet:
    """Universal finitely-many-queries machine: ``x`` names a (program, argument) pair."""
    parts = split_pair(x, budgets)
    if isinstance(parts, OutcomeSet):
        return parts
    program, argument = parts
    return run_with_oracle(App(program, argument), g, budgets)
