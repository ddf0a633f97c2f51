"""Brute-force reducibility between finite multimaps with secret inputs.

Every search here is exhaustive over a finite space, so a missing witness is
a proof of non-reducibility (for the game-based relation: within the given
number of rounds).  Witnesses are always re-checked by :func:`verify_witness`,
which reads only the defining clauses and shares no code with the searches.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Sequence, Union

import networkx as nx

from .constructions import identity_map, join
from .kernel import DEFAULT_BUDGETS, Budgets, cantor_pair, cantor_unpair
from .problems import (
    CATALOG,
    CHOICE2,
    EMPTY,
    FALSE1,
    ID2,
    PLAIN_CATALOG,
    PLAIN_SECRET,
    SECRETBIT,
    MMMap,
    Secret,
    order_key,
    secret_label,
)

MAX_PUBLICS = 8
MAX_SECRETS = 4
MAX_ANSWERS = 4
MAX_DEPTH = 3

KINDS = ("em", "eW", "sW", "peW", "TW")


class CapExceeded(ValueError):
    pass


class WitnessError(AssertionError):
    """A search produced a witness that the verifier rejects (internal fault)."""


def check_caps(*maps: MMMap, depth: int = 0) -> None:
    for m in maps:
        if len(m.publics) > MAX_PUBLICS:
            raise CapExceeded(f"{m.name}: {len(m.publics)} publics exceeds the cap of {MAX_PUBLICS}")
        if len(m.secrets) > MAX_SECRETS:
            raise CapExceeded(f"{m.name}: {len(m.secrets)} secrets exceeds the cap of {MAX_SECRETS}")
        for x, p, vals in m.entries:
            if len(vals) > MAX_ANSWERS:
                raise CapExceeded(f"{m.name}: entry ({x}, {p}) has more than {MAX_ANSWERS} answers")
    if depth > MAX_DEPTH:
        raise CapExceeded(f"game depth {depth} exceeds the cap of {MAX_DEPTH}")


# ------------------------------------------------------------------ witnesses

@dataclass(frozen=True)
class Answer:
    value: int


@dataclass(frozen=True)
class Query:
    public: int
    nimue: tuple[tuple[Secret, Secret], ...]     # f-secret -> g-secret at this round
    branches: tuple[tuple[int, "Node"], ...]      # g-answer -> continuation


Node = Union[Answer, Query]


def node_depth(node: Node) -> int:
    if isinstance(node, Answer):
        return 0
    return 1 + max((node_depth(c) for _, c in node.branches), default=0)


def node_to_json(node: Node) -> dict:
    if isinstance(node, Answer):
        return {"answer": node.value}
    return {
        "query": node.public,
        "nimue": [[secret_label(p), secret_label(q)] for p, q in node.nimue],
        "branches": [{"on": y, "then": node_to_json(c)} for y, c in node.branches],
    }


@dataclass(frozen=True)
class ReductionWitness:
    kind: str
    source: str
    target: str
    forward: tuple[tuple[int, int], ...] = ()
    secret_map: tuple[tuple[tuple[int, Secret], Secret], ...] = ()
    backward: tuple[tuple[tuple, int], ...] = ()
    strategies: tuple[tuple[int, Node], ...] = ()
    depth: int = 0

    def forward_map(self) -> dict:
        return dict(self.forward)

    def secret_dict(self) -> dict:
        return dict(self.secret_map)

    def backward_map(self) -> dict:
        return dict(self.backward)

    def strategy_map(self) -> dict:
        return dict(self.strategies)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "source": self.source, "target": self.target}
        if self.kind == "TW":
            out["depth"] = self.depth
            out["strategies"] = [{"public": x, "tree": node_to_json(t)} for x, t in self.strategies]
            return out
        out["forward"] = [[x, z] for x, z in self.forward]
        if self.kind != "sW":
            out["secret_map"] = [[x, secret_label(p), secret_label(q)] for (x, p), q in self.secret_map]
        if self.kind != "em":
            out["backward"] = [list(k) + [w] for k, w in self.backward]
        return out

    def describe(self) -> str:
        if self.kind == "TW":
            return f"TW strategy trees for {len(self.strategies)} publics (depth {self.depth})"
        parts = [f"forward {dict(self.forward)}"]
        if self.secret_map:
            parts.append("secrets " + ", ".join(f"{x}|{secret_label(p)}->{secret_label(q)}"
                                               for (x, p), q in self.secret_map))
        if self.backward:
            parts.append(f"backward {dict(self.backward)}")
        return "; ".join(parts)


def _freeze(kind, f, g, forward=None, secret_map=None, backward=None, strategies=None, depth=0):
    return ReductionWitness(
        kind, f.name, g.name,
        tuple(sorted((forward or {}).items())),
        tuple(sorted((secret_map or {}).items(), key=lambda kv: (kv[0][0], order_key(kv[0][1])))),
        tuple(sorted((backward or {}).items())),
        tuple(sorted((strategies or {}).items(), key=lambda kv: kv[0])),
        depth,
    )


# ------------------------------------------------------------------ searches

def _em_search(f: MMMap, g: MMMap):
    forward, secret_map = {}, {}
    for x in f.dom_publics():
        for z in g.publics:
            qs = {}
            for p in f.secrets_at(x):
                want = f.val(x, p)
                q = next((q for q in g.secrets_at(z) if g.val(z, q) <= want), None)
                if q is None:
                    break
                qs[(x, p)] = q
            else:
                forward[x] = z
                secret_map.update(qs)
                break
        else:
            return None
    return forward, secret_map


def _ew_clause(f: MMMap, g: MMMap, x: int):
    """Least (z, secret choice, backward map) solving the per-x clause, or None."""
    ps = f.secrets_at(x)
    for z in g.publics:
        qz = g.secrets_at(z)
        if not qz:
            continue
        for choice in product(qz, repeat=len(ps)):
            back = {}
            answers = set()
            for q in choice:
                answers |= g.val(z, q)
            ok = True
            for y in sorted(answers):
                need = None
                for p, q in zip(ps, choice):
                    if y in g.val(z, q):
                        need = f.val(x, p) if need is None else need & f.val(x, p)
                if not need:
                    ok = False
                    break
                back[(x, y)] = min(need)
            if ok:
                return z, dict(((x, p), q) for p, q in zip(ps, choice)), back
    return None


def _ew_search(f: MMMap, g: MMMap):
    forward, secret_map, backward = {}, {}, {}
    for x in f.dom_publics():
        found = _ew_clause(f, g, x)
        if found is None:
            return None
        forward[x] = found[0]
        secret_map.update(found[1])
        backward.update(found[2])
    return forward, secret_map, backward


def _require_plain(*maps: MMMap) -> None:
    for m in maps:
        if not m.is_plain():
            raise ValueError(f"{m.name} has secret inputs; strong Weihrauch reducibility needs plain maps")


def _plain_table(m: MMMap) -> dict[int, frozenset[int]]:
    return {x: vals for x, _, vals in m.entries}


def _sw_search(f: MMMap, g: MMMap):
    ftab, gtab = _plain_table(f), _plain_table(g)
    xs = sorted(ftab)
    zs = sorted(gtab)
    forward: dict[int, int] = {}

    def extend(i: int, allowed: dict[int, frozenset[int]]):
        if i == len(xs):
            return allowed
        x = xs[i]
        for z in zs:
            nxt = dict(allowed)
            ok = True
            for y in gtab[z]:
                nxt[y] = nxt.get(y, ftab[x]) & ftab[x]
                if not nxt[y]:
                    ok = False
                    break
            if ok:
                forward[x] = z
                done = extend(i + 1, nxt)
                if done is not None:
                    return done
                del forward[x]
        return None

    allowed = extend(0, {})
    if allowed is None:
        return None
    return dict(forward), {(y,): min(ws) for y, ws in allowed.items()}


def _game(f: MMMap, g: MMMap, x: int, depth: int) -> Node | None:
    @lru_cache(maxsize=None)
    def solve(consistent: tuple, k: int) -> Node | None:
        common = None
        for p in consistent:
            common = f.val(x, p) if common is None else common & f.val(x, p)
        if common:
            return Answer(min(common))
        if k == 0:
            return None
        for z in g.publics:
            qz = g.secrets_at(z)
            if not qz:
                continue
            for choice in product(qz, repeat=len(consistent)):
                answers = set()
                for q in choice:
                    answers |= g.val(z, q)
                branches = []
                for y in sorted(answers):
                    rest = tuple(p for p, q in zip(consistent, choice) if y in g.val(z, q))
                    sub = solve(rest, k - 1)
                    if sub is None:
                        break
                    branches.append((y, sub))
                else:
                    return Query(z, tuple(zip(consistent, choice)), tuple(branches))
        return None

    return solve(f.secrets_at(x), depth)


# ------------------------------------------------------------------ verifier

def _verify_em(f, g, w) -> str | None:
    fwd, sec = w.forward_map(), w.secret_dict()
    for x, p, want in f.entries:
        if x not in fwd or (x, p) not in sec:
            return f"no image for ({x}, {secret_label(p)})"
        z, q = fwd[x], sec[(x, p)]
        if not g.in_dom(z, q):
            return f"({z}, {secret_label(q)}) is outside dom({g.name})"
        if not g.val(z, q) <= want:
            return f"{g.name}({z}|{secret_label(q)}) is not inside {f.name}({x}|{secret_label(p)})"
    return None


def _verify_ew(f, g, w) -> str | None:
    fwd, sec, back = w.forward_map(), w.secret_dict(), w.backward_map()
    for x, p, want in f.entries:
        if x not in fwd or (x, p) not in sec:
            return f"no image for ({x}, {secret_label(p)})"
        z, q = fwd[x], sec[(x, p)]
        if not g.in_dom(z, q):
            return f"({z}, {secret_label(q)}) is outside dom({g.name})"
        for y in g.val(z, q):
            if back.get((x, y)) not in want:
                return f"backward map sends ({x}, {y}) outside {f.name}({x}|{secret_label(p)})"
    return None


def _verify_sw(f, g, w) -> str | None:
    fwd, back = w.forward_map(), w.backward_map()
    gtab = _plain_table(g)
    for x, want in _plain_table(f).items():
        z = fwd.get(x)
        if z not in gtab:
            return f"{x} is not sent into dom({g.name})"
        for y in gtab[z]:
            if back.get((y,)) not in want:
                return f"backward map sends {y} outside {f.name}({x})"
    return None


def _play(node: Node, f, g, x, p, rounds_left: int) -> str | None:
    while True:
        if isinstance(node, Answer):
            return None if node.value in f.val(x, p) else f"answer {node.value} fails secret {secret_label(p)}"
        if rounds_left == 0:
            return "strategy exceeds the round budget"
        nimue = dict(node.nimue)
        if p not in nimue:
            return f"no oracle secret chosen for {secret_label(p)}"
        q = nimue[p]
        if not g.in_dom(node.public, q):
            return f"query ({node.public}, {secret_label(q)}) outside dom({g.name})"
        branches = dict(node.branches)
        for y in sorted(g.val(node.public, q)):
            if y not in branches:
                return f"no continuation for answer {y}"
            problem = _play(branches[y], f, g, x, p, rounds_left - 1)
            if problem:
                return problem
        return None


def _verify_tw(f, g, w, depth: int) -> str | None:
    trees = w.strategy_map()
    for x, p, _ in f.entries:
        if x not in trees:
            return f"no strategy for public {x}"
        problem = _play(trees[x], f, g, x, p, depth)
        if problem:
            return f"public {x}: {problem}"
    return None


def pointed_target(f: MMMap, g: MMMap) -> MMMap:
    """``id ⊔ g`` where ``id`` ranges over the publics and answers of ``f``."""
    points = set(f.publics) | set(f.answers())
    return join(identity_map("id", points), g)


def verify_witness(f: MMMap, g: MMMap, w: ReductionWitness, depth: int | None = None) -> str | None:
    """None when ``w`` satisfies the defining clauses, else the first failure."""
    if w.kind == "em":
        return _verify_em(f, g, w)
    if w.kind == "eW":
        return _verify_ew(f, g, w)
    if w.kind == "sW":
        return _verify_sw(f, g, w)
    if w.kind == "peW":
        return _verify_ew(f, pointed_target(f, g), w)
    if w.kind == "TW":
        return _verify_tw(f, g, w, w.depth if depth is None else depth)
    return f"unknown witness kind {w.kind}"


def _checked(f, g, w):
    if w is not None:
        problem = verify_witness(f, g, w)
        if problem:
            raise WitnessError(f"{w.kind} witness {f.name} -> {g.name} rejected: {problem}")
    return w


# ------------------------------------------------------------ public reducers

def reduce_em(f: MMMap, g: MMMap) -> ReductionWitness | None:
    check_caps(f, g)
    found = _em_search(f, g)
    if found is None:
        return None
    return _checked(f, g, _freeze("em", f, g, forward=found[0], secret_map=found[1]))


def reduce_eW(f: MMMap, g: MMMap) -> ReductionWitness | None:
    check_caps(f, g)
    found = _ew_search(f, g)
    if found is None:
        return None
    return _checked(f, g, _freeze("eW", f, g, *found))


def reduce_sW(f: MMMap, g: MMMap) -> ReductionWitness | None:
    _require_plain(f, g)
    check_caps(f, g)
    found = _sw_search(f, g)
    if found is None:
        return None
    return _checked(f, g, _freeze("sW", f, g, forward=found[0], backward=found[1]))


def _pew_direct(f: MMMap, g: MMMap) -> bool:
    for x in f.dom_publics():
        common = None
        for p in f.secrets_at(x):
            common = f.val(x, p) if common is None else common & f.val(x, p)
        if common:
            continue
        if _ew_clause(f, g, x) is None:
            return False
    return True


def reduce_peW(f: MMMap, g: MMMap) -> ReductionWitness | None:
    """Pointed reduction: one query to ``id ⊔ g``, computed two ways."""
    check_caps(f, g)
    target = pointed_target(f, g)
    found = _ew_search(f, target)
    direct = _pew_direct(f, g)
    if (found is not None) != direct:
        raise WitnessError(f"pointed reduction paths disagree on {f.name} -> {g.name}")
    if found is None:
        return None
    frozen = _freeze("eW", f, target, *found)
    w = ReductionWitness("peW", f.name, g.name, frozen.forward, frozen.secret_map, frozen.backward)
    return _checked(f, g, w)


def reduce_TW(f: MMMap, g: MMMap, depth: int) -> ReductionWitness | None:
    """Depth-bounded game reduction; None means no strategy within ``depth`` rounds."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    check_caps(f, g, depth=depth)
    trees = {}
    for x in f.dom_publics():
        tree = _game(f, g, x, depth)
        if tree is None:
            return None
        trees[x] = tree
    return _checked(f, g, _freeze("TW", f, g, strategies=trees, depth=depth))


def reduce(kind: str, f: MMMap, g: MMMap, depth: int = 1) -> ReductionWitness | None:
    kind, depth = parse_kind(kind, depth)
    if kind == "em":
        return reduce_em(f, g)
    if kind == "eW":
        return reduce_eW(f, g)
    if kind == "sW":
        return reduce_sW(f, g)
    if kind == "peW":
        return reduce_peW(f, g)
    return reduce_TW(f, g, depth)


def parse_kind(kind: str, depth: int = 1) -> tuple[str, int]:
    """Accept ``em``, ``eW``, ``sW``, ``peW``, ``TW`` or ``TW(d)``."""
    text = kind.strip()
    if text.startswith("TW(") and text.endswith(")"):
        try:
            return "TW", int(text[3:-1])
        except ValueError:
            raise ValueError(f"bad depth in {kind!r}") from None
    lowered = {k.lower(): k for k in KINDS}
    if text.lower() in lowered:
        return lowered[text.lower()], depth
    raise ValueError(f"unknown reduction kind {kind!r}; expected one of {', '.join(KINDS)} or TW(d)")


# ------------------------------------------------------------- composition

def compose_witnesses(f: MMMap, g: MMMap, h: MMMap, w1: ReductionWitness, w2: ReductionWitness) -> ReductionWitness:
    """Chain ``f -> g`` and ``g -> h`` into ``f -> h`` (same kind)."""
    if w1.kind != w2.kind:
        raise ValueError("witness kinds differ")
    kind = w1.kind
    fwd1, fwd2 = w1.forward_map(), w2.forward_map()
    sec1, sec2 = w1.secret_dict(), w2.secret_dict()
    back1, back2 = w1.backward_map(), w2.backward_map()
    if kind == "em":
        fwd = {x: fwd2[z] for x, z in fwd1.items() if z in fwd2}
        sec = {(x, p): sec2[(fwd1[x], q)] for (x, p), q in sec1.items() if (fwd1[x], q) in sec2}
        return _freeze("em", f, h, forward=fwd, secret_map=sec)
    if kind == "eW":
        fwd, sec, back = {}, {}, {}
        for (x, p), q in sec1.items():
            z = fwd1[x]
            if z not in fwd2 or (z, q) not in sec2:
                continue
            fwd[x] = fwd2[z]
            sec[(x, p)] = sec2[(z, q)]
            for y in h.val(fwd2[z], sec2[(z, q)]) if h.in_dom(fwd2[z], sec2[(z, q)]) else ():
                mid = back2.get((z, y))
                if (x, mid) in back1:
                    back[(x, y)] = back1[(x, mid)]
        return _freeze("eW", f, h, fwd, sec, back)
    if kind == "sW":
        fwd = {x: fwd2[z] for x, z in fwd1.items() if z in fwd2}
        back = {(y,): back1[(mid,)] for (y,), mid in back2.items() if (mid,) in back1}
        return _freeze("sW", f, h, forward=fwd, backward=back)
    if kind == "peW":
        return _compose_pointed(f, g, h, w1, w2)
    if kind == "TW":
        return _compose_games(f, g, h, w1, w2)
    raise ValueError(f"cannot compose {kind} witnesses")


def _compose_pointed(f, g, h, w1, w2) -> ReductionWitness:
    fwd1, fwd2 = w1.forward_map(), w2.forward_map()
    sec1, sec2 = w1.secret_dict(), w2.secret_dict()
    back1, back2 = w1.backward_map(), w2.backward_map()
    target = pointed_target(f, h)
    fwd, sec, back = {}, {}, {}
    for x in f.dom_publics():
        side, z = cantor_unpair(fwd1[x])
        ps = f.secrets_at(x)
        if side == 0:
            fwd[x] = fwd1[x]
            for p in ps:
                sec[(x, p)] = sec1[(x, p)]
            back[(x, z)] = back1[(x, z)]
            continue
        side2, z2 = cantor_unpair(fwd2[z])
        if side2 == 0:
            # the middle problem answered without querying: a constant answer for x
            fwd[x] = cantor_pair(0, x)
            for p in ps:
                sec[(x, p)] = (0, PLAIN_SECRET)
            back[(x, x)] = back1[(x, back2[(z, z2)])]
            continue
        fwd[x] = fwd2[z]
        for p in ps:
            q = sec1[(x, p)][1]
            sec[(x, p)] = sec2[(z, q)]
            r = sec2[(z, q)]
            if target.in_dom(fwd2[z], r):
                for y in target.val(fwd2[z], r):
                    back[(x, y)] = back1[(x, back2[(z, y)])]
    frozen = _freeze("eW", f, target, fwd, sec, back)
    return ReductionWitness("peW", f.name, h.name, frozen.forward, frozen.secret_map, frozen.backward)


def _compose_games(f, g, h, w1, w2) -> ReductionWitness:
    inner = w2.strategy_map()

    def lift(node1: Node) -> Node:
        if isinstance(node1, Answer):
            return node1
        return graft(inner[node1.public], node1, dict(node1.nimue))

    def graft(node2: Node, node1: Query, choice1: dict) -> Node:
        if isinstance(node2, Answer):
            child = dict(node1.branches).get(node2.value)
            # a missing continuation is unreachable for every consistent secret
            return Answer(0) if child is None else lift(child)
        choice2 = dict(node2.nimue)
        nimue = tuple((p, choice2[q]) for p, q in choice1.items() if q in choice2)
        branches = tuple((y, graft(c, node1, choice1)) for y, c in node2.branches)
        return Query(node2.public, nimue, branches)

    trees = {x: lift(t) for x, t in w1.strategy_map().items()}
    return _freeze("TW", f, h, strategies=trees, depth=max(1, w1.depth) * max(1, w2.depth))


# ---------------------------------------------------------- canonical forms

def canonicalize(f: MMMap) -> MMMap:
    """Replace each secret by the answer set it selects."""
    entries = {}
    for x in f.publics:
        for vals in f.value_family(x):
            entries[(x, vals)] = vals
    out = MMMap.build(f.name, f.publics, {s for _, s in entries}, entries)
    for x in f.publics:
        assert out.value_family(x) == f.value_family(x)
    return out


def from_plain_oracle(name: str, g) -> MMMap:
    return MMMap.plain(name, dict(g.table))


# --------------------------------------------------------------- degree poset

@dataclass(frozen=True)
class PosetReport:
    kind: str
    names: tuple[str, ...]
    matrix: tuple[tuple[bool, ...], ...]
    degrees: tuple[tuple[str, tuple[str, ...]], ...]     # representative -> members
    edges: tuple[tuple[str, str], ...]                   # lower -> upper, covering pairs

    def to_dot(self) -> str:
        lines = ["digraph degrees {", "  rankdir=BT;"]
        for rep, members in self.degrees:
            label = rep if len(members) == 1 else rep + "\\n" + " = ".join(members)
            lines.append(f'  "{rep}" [label="{label}"];')
        for lo, hi in self.edges:
            lines.append(f'  "{lo}" -> "{hi}";')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "names": list(self.names),
            "matrix": [[int(c) for c in row] for row in self.matrix],
            "degrees": [{"representative": r, "members": list(m)} for r, m in self.degrees],
            "edges": [list(e) for e in self.edges],
        }


def poset_report(catalog: Sequence[MMMap], kind: str, budgets: Budgets = DEFAULT_BUDGETS) -> PosetReport:
    """Reducibility matrix, degrees (mutual reducibility) and covering edges.

    Row ``i``, column ``j`` is true when entry ``i`` reduces to entry ``j``.
    Degrees are strongly connected components of that relation so a
    depth-bounded game relation that fails transitivity still yields a
    well-defined order.
    """
    base, depth = parse_kind(kind, budgets.game_depth)
    label = f"TW({depth})" if base == "TW" else base
    names = tuple(m.name for m in catalog)
    if len(set(names)) != len(names):
        raise ValueError("catalog entries need distinct names")
    n = len(catalog)
    matrix = tuple(tuple(reduce(base, catalog[i], catalog[j], depth) is not None for j in range(n))
                   for i in range(n))
    graph = nx.DiGraph()
    graph.add_nodes_from(names)
    graph.add_edges_from((names[i], names[j]) for i in range(n) for j in range(n) if i != j and matrix[i][j])
    cond = nx.condensation(graph)
    rep_of = {c: min(cond.nodes[c]["members"]) for c in cond.nodes}
    degrees = tuple(sorted((rep_of[c], tuple(sorted(cond.nodes[c]["members"]))) for c in cond.nodes))
    hasse = nx.transitive_reduction(cond)
    edges = tuple(sorted((rep_of[a], rep_of[b]) for a, b in hasse.edges))
    return PosetReport(label, names, matrix, degrees, edges)


__all__ = [
    "MMMap", "CATALOG", "PLAIN_CATALOG", "ID2", "CHOICE2", "FALSE1", "SECRETBIT", "EMPTY",
    "CapExceeded", "WitnessError", "check_caps", "Answer", "Query", "Node", "ReductionWitness",
    "reduce_em", "reduce_eW", "reduce_sW", "reduce_peW", "reduce_TW", "reduce", "parse_kind",
    "verify_witness", "compose_witnesses", "canonicalize", "from_plain_oracle", "pointed_target",
    "PosetReport", "poset_report", "KINDS", "node_depth",
]
