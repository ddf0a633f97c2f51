"""Truth values over a finite universe ``{0..B-1}`` and operations on them.

A truth value is a bitmask.  An :class:`OmegaOp` is a fully materialized
table from masks to masks (``2**B`` entries, ``B <= 16``), so every property
check below is exhaustive.  The second half of the module works at the code
level: implication is computed by running candidate programs, and the open,
closed and double-negation topologies are built from it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

from .kernel import DEFAULT_BUDGETS, Budgets, EvalStatus, apply, code_below, cp, decode, encode
from .problems import PLAIN_SECRET, MMMap, order_key

MAX_UNIVERSE = 16
MAX_CANONICAL_UNIVERSE = 8

Mask = int


class UniverseError(ValueError):
    pass


def _check_universe(B: int, cap: int = MAX_UNIVERSE) -> None:
    if not isinstance(B, int) or B < 1 or B > cap:
        raise UniverseError(f"universe size must be between 1 and {cap}, got {B}")


def full(B: int) -> Mask:
    return (1 << B) - 1


def mask_of(elements: Iterable[int], B: int | None = None) -> Mask:
    m = 0
    for e in elements:
        if e < 0 or (B is not None and e >= B):
            raise UniverseError(f"element {e} is outside the universe of size {B}")
        m |= 1 << e
    return m


def elements(m: Mask) -> tuple[int, ...]:
    out = []
    i = 0
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return tuple(out)


def show_mask(m: Mask) -> str:
    return "{" + ",".join(map(str, elements(m))) + "}"


# --------------------------------------------------------------- operations

@dataclass(frozen=True)
class OmegaOp:
    universe: int
    table: tuple[Mask, ...]

    def __post_init__(self):
        _check_universe(self.universe)
        if len(self.table) != 1 << self.universe:
            raise UniverseError("table must have one entry per subset")
        top = full(self.universe)
        if any(m < 0 or m & ~top for m in self.table):
            raise UniverseError("table entries must be subsets of the universe")

    def __call__(self, p: Mask) -> Mask:
        return self.table[p]

    @classmethod
    def from_function(cls, B: int, fn: Callable[[Mask], Mask]) -> "OmegaOp":
        _check_universe(B)
        return cls(B, tuple(fn(p) for p in range(1 << B)))

    @classmethod
    def identity(cls, B: int) -> "OmegaOp":
        _check_universe(B)
        return cls(B, tuple(range(1 << B)))

    @classmethod
    def constant(cls, B: int, value: Mask) -> "OmegaOp":
        _check_universe(B)
        return cls(B, (value,) * (1 << B))

    def to_json(self) -> dict:
        return {"universe": self.universe, "table": list(self.table)}

    @classmethod
    def from_json(cls, data: dict) -> "OmegaOp":
        try:
            B = data["universe"]
            table = data["table"]
        except (KeyError, TypeError):
            raise ValueError("operation JSON needs 'universe' and 'table'") from None
        if not isinstance(table, list) or not all(isinstance(m, int) and not isinstance(m, bool) for m in table):
            raise ValueError("'table' must be a list of integer masks")
        return cls(B, tuple(table))

    @classmethod
    def load(cls, path: str | Path) -> "OmegaOp":
        return cls.from_json(json.loads(Path(path).read_text()))


def compose_ops(j: OmegaOp, k: OmegaOp) -> OmegaOp:
    """``j ∘ k``."""
    if j.universe != k.universe:
        raise UniverseError("operations live on different universes")
    return OmegaOp(j.universe, tuple(j.table[k.table[p]] for p in range(1 << j.universe)))


def _pairs(B: int):
    n = 1 << B
    for p in range(n):
        for q in range(p, n):
            yield p, q


def check_subset_monotone(j: OmegaOp) -> bool:
    # enough to compare each subset with its one-element extensions
    B = j.universe
    for p in range(1 << B):
        for i in range(B):
            if not p >> i & 1 and j.table[p] & ~j.table[p | 1 << i]:
                return False
    return True


def check_meet_preserving(j: OmegaOp) -> bool:
    """Binary meets; on a finite lattice every nonempty meet is a finite one.

    The empty meet is the top element, and ``j(top)`` is taken as the top of
    the image rather than compared with the universe: operations induced by a
    partial map send the top to the map's domain.
    """
    t = j.table
    return all(t[p & q] == t[p] & t[q] for p, q in _pairs(j.universe))


def check_join_preserving(j: OmegaOp) -> bool:
    """Binary joins together with ``j(∅) = ∅`` (the empty join)."""
    t = j.table
    return t[0] == 0 and all(t[p | q] == t[p] | t[q] for p, q in _pairs(j.universe))


def check_inflationary(j: OmegaOp) -> bool:
    return all(p & ~j.table[p] == 0 for p in range(1 << j.universe))


def check_idempotent(j: OmegaOp) -> bool:
    t = j.table
    return all(t[t[p]] == t[p] for p in range(1 << j.universe))


# ------------------------------------------------- maps <-> operations

def _check_fits(U: MMMap, B: int) -> None:
    _check_universe(B)
    for x, _, vals in U.entries:
        if x >= B or any(v >= B for v in vals):
            raise UniverseError(f"{U.name}: entry at {x} leaves the universe of size {B}")


def j_from_U(U: MMMap, B: int) -> OmegaOp:
    """``j_U(p)``: publics with some secret whose answers all lie in ``p``."""
    _check_fits(U, B)
    n = 1 << B
    acc = [0] * n
    for x, _, vals in U.entries:
        acc[mask_of(vals)] |= 1 << x
    # close upward: j(p) collects every entry whose value is a subset of p
    for i in range(B):
        bit = 1 << i
        for p in range(n):
            if p & bit:
                acc[p] |= acc[p ^ bit]
    return OmegaOp(B, tuple(acc))


def U_from_j_plain(j: OmegaOp, name: str = "U_j") -> MMMap:
    """Domain ``⋃ j(p)``; value at ``x`` is the meet of all ``p`` with ``x ∈ j(p)``."""
    B = j.universe
    meet: dict[int, Mask] = {}
    for p, image in enumerate(j.table):
        for x in elements(image):
            meet[x] = meet.get(x, full(B)) & p
    return MMMap.plain(name, {x: elements(m) for x, m in meet.items()}, publics=range(B))


def U_from_j_canonical(j: OmegaOp, name: str = "U_j") -> MMMap:
    """One secret per truth value: ``(x|p)`` is defined iff ``x ∈ j(p)`` and returns ``p``."""
    _check_universe(j.universe, MAX_CANONICAL_UNIVERSE)
    B = j.universe
    entries = {}
    for p, image in enumerate(j.table):
        label = frozenset(elements(p))
        for x in elements(image):
            entries[(x, label)] = label
    secrets = [frozenset(elements(p)) for p in range(1 << B)]
    return MMMap.build(name, range(B), secrets, entries)


def refines(f: MMMap, g: MMMap) -> bool:
    """Every answer set of ``f`` contains one of ``g`` at the same public."""
    for x, _, want in f.entries:
        if not any(g.val(x, q) <= want for q in g.secrets_at(x)):
            return False
    return True


def equivalent(f: MMMap, g: MMMap) -> bool:
    return refines(f, g) and refines(g, f)


def key_equivalence_holds(j: OmegaOp) -> bool:
    """``x ∈ j(p) ⟺ U_j(x) ⊆ p`` for all ``x`` and ``p``."""
    U = U_from_j_plain(j)
    values = {x: mask_of(v) for x, _, v in U.entries}
    for p, image in enumerate(j.table):
        for x in range(j.universe):
            lhs = bool(image >> x & 1)
            rhs = x in values and values[x] & ~p == 0
            if lhs != rhs:
                return False
    return True


def composition_lemma_holds(U: MMMap, B: int) -> bool:
    """``j_{U∘U} = j_U ∘ j_U`` with composition carrying advice."""
    from .constructions import compose_mm

    jU = j_from_U(U, B)
    return j_from_U(compose_mm(U, U), B) == compose_ops(jU, jU)


# ------------------------------------------------------------ r-morphisms

def r_morphism_extensional(j: OmegaOp, k: OmegaOp) -> tuple[int, ...] | None:
    """A function ``e`` with ``x ∈ j(p) ⟹ e(x) ∈ k(p)``; identity where possible."""
    if j.universe != k.universe:
        raise UniverseError("operations live on different universes")
    B = j.universe
    allowed = [full(B)] * B
    for p, image in enumerate(j.table):
        kp = k.table[p]
        for x in elements(image):
            allowed[x] &= kp
    out = []
    for x in range(B):
        if allowed[x] == 0:
            return None
        out.append(x if allowed[x] >> x & 1 else elements(allowed[x])[0])
    return tuple(out)


def is_r_morphism(e: Sequence[int], j: OmegaOp, k: OmegaOp) -> bool:
    for p, image in enumerate(j.table):
        for x in elements(image):
            if not k.table[p] >> e[x] & 1:
                return False
    return True


def r_equivalent(j: OmegaOp, k: OmegaOp) -> bool:
    return r_morphism_extensional(j, k) is not None and r_morphism_extensional(k, j) is not None


def em_witness_to_r(forward: Mapping[int, int], B: int) -> tuple[int, ...]:
    """Extend a forward map of a many-one reduction to the whole universe."""
    return tuple(forward.get(x, x) for x in range(B))


def r_to_em_holds(e: Sequence[int], f: MMMap, g: MMMap) -> bool:
    """Read ``e`` as a forward map: every ``f(x|p)`` contains some ``g(e(x)|q)``."""
    for x, _, want in f.entries:
        z = e[x]
        if not any(g.val(z, q) <= want for q in g.secrets_at(z)):
            return False
    return True


def normalize_to_meet_preserving(j: OmegaOp) -> tuple[OmegaOp, bool]:
    """``j_{U_j}`` and whether it is r-equivalent to ``j``."""
    norm = j_from_U(U_from_j_plain(j), j.universe)
    return norm, r_equivalent(j, norm)


# -------------------------------------------------------------- assemblies

class AssemblyError(ValueError):
    pass


@dataclass(frozen=True)
class Assembly:
    universe: int
    carrier: tuple
    realizers: tuple[tuple[object, Mask], ...]

    def __post_init__(self):
        for x, m in self.realizers:
            if m == 0:
                raise AssemblyError(f"element {x!r} has no realizer")
            if m & ~full(self.universe):
                raise AssemblyError(f"realizers of {x!r} leave the universe")

    @classmethod
    def build(cls, B: int, realizers: Mapping[object, Iterable[int]]) -> "Assembly":
        _check_universe(B)
        carrier = tuple(sorted(realizers, key=order_key))
        return cls(B, carrier, tuple((x, mask_of(realizers[x], B)) for x in carrier))

    def E(self, x) -> Mask:
        return dict(self.realizers)[x]


def relativize_assembly(j: OmegaOp, X: Assembly) -> Assembly:
    """Same carrier, realizers passed through ``j``."""
    if j.universe != X.universe:
        raise UniverseError("operation and assembly live on different universes")
    out = []
    for x, m in X.realizers:
        image = j.table[m]
        if image == 0:
            raise AssemblyError(f"the operation empties the realizers of {x!r}")
        out.append((x, image))
    return Assembly(X.universe, X.carrier, tuple(out))


def is_tracked_map(f: Mapping, X: Assembly, Y: Assembly) -> tuple[int, ...] | None:
    """A tracker ``t`` with ``t(a) ∈ E_Y(f(x))`` for every realizer ``a`` of ``x``."""
    if X.universe != Y.universe:
        raise UniverseError("assemblies live on different universes")
    B = X.universe
    EY = dict(Y.realizers)
    allowed = [full(B)] * B
    for x, m in X.realizers:
        target = EY[f[x]]
        for a in elements(m):
            allowed[a] &= target
    out = []
    for a in range(B):
        if allowed[a] == 0:
            return None
        out.append(a if allowed[a] >> a & 1 else elements(allowed[a])[0])
    return tuple(out)


# ------------------------------------------------- code-level connectives

@dataclass(frozen=True)
class Implication:
    """Result of a bounded implication: members and the candidates that ran out of fuel."""

    members: frozenset[int]
    exhausted: frozenset[int]

    @property
    def budget_sensitive(self) -> bool:
        return bool(self.exhausted)

    def mask(self) -> Mask:
        return mask_of(self.members)


def tv_imp_report(p: Iterable[int], q: Iterable[int], B: int, budgets: Budgets = DEFAULT_BUDGETS) -> Implication:
    """Candidates ``x < B`` sending every element of ``p`` into ``q``."""
    _check_universe(B)
    ps = sorted(set(p))
    targets = {decode(c) for c in set(q)}
    members, exhausted = set(), set()
    if ps and not targets:
        # nothing lands in the empty set, whatever the candidate does
        return Implication(frozenset(), frozenset())
    for x in range(B):
        ok = True
        for a in ps:
            r = apply(x, a, budgets)
            if r.status is EvalStatus.FUEL_EXHAUSTED:
                exhausted.add(x)
                ok = False
                break
            if r.status is not EvalStatus.DEFINED or r.value not in targets:
                ok = False
                break
        if ok:
            members.add(x)
    return Implication(frozenset(members), frozenset(exhausted))


def tv_imp(p: Iterable[int], q: Iterable[int], B: int, budgets: Budgets = DEFAULT_BUDGETS) -> Mask:
    return tv_imp_report(p, q, B, budgets).mask()


def tv_neg(p: Iterable[int], B: int, budgets: Budgets = DEFAULT_BUDGETS) -> Mask:
    return tv_imp(p, (), B, budgets)


def tv_and(p: Iterable[int], q: Iterable[int]) -> frozenset[int]:
    """Pair codes ``cp(a, b)``; as codes these all exceed any universe with ``B <= 16``."""
    return frozenset(encode(cp(a, b)) for a in p for b in q)


def tv_or(p: Iterable[int], q: Iterable[int]) -> frozenset[int]:
    """Tagged codes ``cp(0, a)`` and ``cp(1, b)``."""
    return frozenset(encode(cp(0, a)) for a in p) | frozenset(encode(cp(1, b)) for b in q)


def restrict(codes: Iterable[int], B: int) -> Mask:
    return mask_of(c for c in codes if c < B)


def open_topology(q: Iterable[int], B: int, budgets: Budgets = DEFAULT_BUDGETS) -> OmegaOp:
    """``p ↦ q ⊸ p`` restricted to candidates below ``B``."""
    _check_universe(B)
    qs = sorted(set(q))
    need: list[Mask | None] = []
    for x in range(B):
        m: Mask | None = 0
        for a in qs:
            r = apply(x, a, budgets)
            c = code_below(r.value, B) if r.defined else None
            if c is None:
                m = None
                break
            m |= 1 << c
        need.append(m)
    return OmegaOp.from_function(B, lambda p: sum(1 << x for x, m in enumerate(need)
                                                  if m is not None and m & ~p == 0))


def closed_topology(q: Iterable[int], B: int) -> OmegaOp:
    """``p ↦ p ∨ q`` with tagged codes, restricted to the universe."""
    tagged_q = restrict(tv_or((), q), B)
    tagged = [restrict(tv_or((a,), ()), B) for a in range(B)]

    def image(p: Mask) -> Mask:
        out = tagged_q
        for a in elements(p):
            out |= tagged[a]
        return out

    return OmegaOp.from_function(B, image)


def double_negation(B: int, budgets: Budgets = DEFAULT_BUDGETS) -> OmegaOp:
    return OmegaOp.from_function(B, lambda p: tv_neg(elements(tv_neg(elements(p), B, budgets)), B, budgets))


__all__ = [
    "Mask", "MAX_UNIVERSE", "UniverseError", "full", "mask_of", "elements", "show_mask", "OmegaOp",
    "compose_ops", "check_subset_monotone", "check_meet_preserving", "check_join_preserving",
    "check_inflationary", "check_idempotent", "j_from_U", "U_from_j_plain", "U_from_j_canonical",
    "refines", "equivalent", "key_equivalence_holds", "composition_lemma_holds",
    "r_morphism_extensional", "is_r_morphism", "r_equivalent", "em_witness_to_r", "r_to_em_holds",
    "normalize_to_meet_preserving", "Assembly", "AssemblyError", "relativize_assembly",
    "is_tracked_map", "Implication", "tv_imp_report", "tv_imp", "tv_neg", "tv_and", "tv_or",
    "restrict", "open_topology", "closed_topology", "double_negation", "PLAIN_SECRET",
]
