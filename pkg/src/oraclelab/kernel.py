"""Combinatory-term machine with a total numeric coding.

Terms are trees over a fixed constant basis joined by binary application.
Every natural number names exactly one term: ``decode`` is total and
``encode`` inverts it.  Constants decoded from a code with a non-zero payload
remember that payload, and codes whose tag is above 11 become numerals that
remember their raw code, so the correspondence is a bijection and a term can
stand in for its code anywhere.  This matters because codes of nested terms
grow doubly exponentially with depth: programs are carried around as terms
and only turned into integers on request.

Evaluation is leftmost-outermost with sharing of duplicated arguments
(call-by-need).  On query-free terms it yields the same normal forms as tree
rewriting; with an oracle it guarantees that an answer bound to a variable is
the same answer at every use.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union


class Op(enum.IntEnum):
    K = 0
    S = 1
    PAIR = 2
    FST = 3
    SND = 4
    SUCC = 5
    PRED = 6
    IFZ = 7
    FIX = 8
    QUERY = 9


TAG_NUM = 10
TAG_APP = 11


class Term:
    __slots__ = ()

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True, slots=True)
class Const(Term):
    op: Op
    payload: int = 0

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True, slots=True)
class Num(Term):
    n: int
    raw: int | None = None

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True, slots=True)
class Var(Term):
    name: str

    def __str__(self) -> str:
        return self.name


class App(Term):
    __slots__ = ("fun", "arg", "_hash", "size")

    def __init__(self, fun: Term, arg: Term):
        object.__setattr__(self, "fun", fun)
        object.__setattr__(self, "arg", arg)
        object.__setattr__(self, "_hash", hash((TAG_APP, hash(fun), hash(arg))))
        object.__setattr__(self, "size", _size(fun) + _size(arg))

    def __setattr__(self, key, value):
        raise AttributeError("App is immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, App):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if isinstance(a, App):
                if not isinstance(b, App) or a._hash != b._hash or a.size != b.size:
                    return False
                stack.append((a.arg, b.arg))
                stack.append((a.fun, b.fun))
            elif a != b:
                return False
        return True

    def __repr__(self) -> str:
        return f"App({self.fun!r}, {self.arg!r})"


def _size(t: Term) -> int:
    return t.size if isinstance(t, App) else 1


Code = Union[int, Term]

K = Const(Op.K)
S = Const(Op.S)
PAIR = Const(Op.PAIR)
FST = Const(Op.FST)
SND = Const(Op.SND)
SUCC = Const(Op.SUCC)
PRED = Const(Op.PRED)
IFZ = Const(Op.IFZ)
FIX = Const(Op.FIX)
QUERY = Const(Op.QUERY)


def app(*terms: Term) -> Term:
    """Left-associated application ``t0 t1 t2 ...``."""
    it = iter(terms)
    out = next(it)
    for t in it:
        out = App(out, t)
    return out


def num(n: int) -> Num:
    if n < 0:
        raise ValueError("numerals are naturals")
    return Num(n)


def pair(a: Term, b: Term) -> Term:
    return App(App(PAIR, a), b)


I = app(S, K, K)
# FIX I x -> I (FIX I) x -> FIX I x: runs forever with constant size.
LOOP = app(FIX, I, num(0))


def show(t: Term) -> str:
    out: list[str] = []
    stack: list[object] = [t]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, App):
            head, args = unwind(item)
            stack.append(")")
            for a in reversed(args):
                stack.append(a)
                stack.append(" ")
            stack.append(head)
            stack.append("(")
        elif isinstance(item, Const):
            out.append(item.op.name if item.payload == 0 else f"{item.op.name}#{item.payload}")
        elif isinstance(item, Num):
            out.append(f"NUM({item.n})" if item.raw is None else f"NUM({item.n})@raw")
        elif isinstance(item, Var):
            out.append(item.name)
    return "".join(out)


def unwind(t: Term) -> tuple[Term, list[Term]]:
    """Split ``h a1 ... an`` into ``(h, [a1, ..., an])``."""
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


_NAMES = {"I": I, **{op.name: Const(op) for op in Op}}
_TERM_TOKEN = re.compile(r"\s*(\(|\)|NUM\(\d+\)|#\d+|\d+|[A-Z]+(?:#\d+)?)")


def parse_term(text: str) -> Term:
    """Read the notation printed by ``show``.

    Extras: ``I`` abbreviates ``S K K``, a bare integer ``n`` is ``NUM(n)``
    and ``#c`` is the term with code ``c``.
    """
    tokens, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TERM_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"cannot read term at position {pos}: {text[pos:pos + 12]!r}")
        tokens.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def atom(tok: str) -> Term:
        if tok.startswith("NUM("):
            return num(int(tok[4:-1]))
        if tok.startswith("#"):
            return decode(int(tok[1:]))
        if tok.isdigit():
            return num(int(tok))
        name, _, payload = tok.partition("#")
        if name not in _NAMES:
            raise ValueError(f"unknown constant {name!r}")
        if payload:
            return Const(Op[name], int(payload))
        return _NAMES[name]

    def seq(i: int, closing: bool) -> tuple[Term, int]:
        items: list[Term] = []
        while i < len(tokens) and tokens[i] != ")":
            if tokens[i] == "(":
                t, i = seq(i + 1, True)
            else:
                t, i = atom(tokens[i]), i + 1
            items.append(t)
        if closing:
            if i >= len(tokens):
                raise ValueError("missing ')'")
            i += 1
        if not items:
            raise ValueError("empty term")
        return app(*items), i

    term, end = seq(0, False)
    if end != len(tokens):
        raise ValueError("unbalanced ')'")
    return term


# ---------------------------------------------------------------- coding

def cantor_pair(a: int, b: int) -> int:
    s = a + b
    return s * (s + 1) // 2 + b


def cantor_unpair(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def encode(t: Term) -> int:
    """Natural number naming ``t``.  Can be astronomically large for deep terms."""
    memo: dict[int, int] = {}
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        node, ready = stack.pop()
        key = id(node)
        if key in memo:
            continue
        if isinstance(node, App):
            if ready:
                memo[key] = cantor_pair(TAG_APP, cantor_pair(memo[id(node.fun)], memo[id(node.arg)]))
            else:
                stack.append((node, True))
                stack.append((node.arg, False))
                stack.append((node.fun, False))
        else:
            memo[key] = _leaf_code(node)
    return memo[id(t)]


def _leaf_code(t: Term) -> int:
    if isinstance(t, Const):
        return cantor_pair(int(t.op), t.payload)
    if isinstance(t, Num):
        return t.raw if t.raw is not None else cantor_pair(TAG_NUM, t.n)
    if isinstance(t, Var):
        raise ValueError(f"free variable {t.name} has no code")
    raise TypeError(f"not a term: {t!r}")


def decode(c: int) -> Term:
    if c < 0:
        raise ValueError("codes are naturals")
    out: list[Term] = []
    stack: list[tuple[int, bool]] = [(c, False)]
    while stack:
        code, ready = stack.pop()
        if ready:
            arg = out.pop()
            fun = out.pop()
            out.append(App(fun, arg))
            continue
        tag, payload = cantor_unpair(code)
        if tag < TAG_NUM:
            out.append(Const(Op(tag), payload))
        elif tag == TAG_NUM:
            out.append(Num(payload))
        elif tag == TAG_APP:
            left, right = cantor_unpair(payload)
            stack.append((code, True))
            stack.append((right, False))
            stack.append((left, False))
        else:
            out.append(Num(code, raw=code))
    return out[0]


def code_below(t: Term, bound: int) -> int | None:
    """``encode(t)`` if it is below ``bound``, else None, without building big ints."""
    memo: dict[int, int] = {}
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        node, ready = stack.pop()
        if isinstance(node, App):
            if not ready:
                stack.append((node, True))
                stack.append((node.arg, False))
                stack.append((node.fun, False))
                continue
            inner = cantor_pair(memo[id(node.fun)], memo[id(node.arg)])
            value = cantor_pair(TAG_APP, inner) if inner < bound else bound
        else:
            value = _leaf_code(node)
        if value >= bound:
            return None
        memo[id(node)] = value
    return memo[id(t)]


def as_term(c: Code) -> Term:
    if isinstance(c, Term):
        return c
    if isinstance(c, bool) or not isinstance(c, int):
        raise TypeError(f"expected a code or a term, got {c!r}")
    return decode(c)


# --------------------------------------------------------------- budgets

@dataclass(frozen=True)
class Budgets:
    fuel: int = 10_000
    max_queries: int = 16
    max_branches: int = 256
    universe: int = 64
    search_bound: int = 100_000
    game_depth: int = 3

    def __post_init__(self):
        for name in ("fuel", "max_queries", "max_branches", "universe", "search_bound", "game_depth"):
            if getattr(self, name) <= 0:
                raise ValueError(f"budget {name} must be positive")

    def replace(self, **changes) -> "Budgets":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return Budgets(**values)


DEFAULT_BUDGETS = Budgets()


class EvalStatus(enum.Enum):
    DEFINED = "defined"
    STUCK = "stuck"
    FUEL_EXHAUSTED = "fuel-exhausted"


@dataclass(frozen=True)
class EvalResult:
    status: EvalStatus
    term: Term | None = None
    steps: int = 0

    @property
    def defined(self) -> bool:
        return self.status is EvalStatus.DEFINED

    @property
    def value(self) -> Term:
        if self.status is not EvalStatus.DEFINED:
            raise ValueError(f"no value: {self.status.value}")
        return self.term

    @property
    def code(self) -> int:
        return encode(self.value)

    def __str__(self) -> str:
        if self.defined:
            return f"Defined({show(self.term)})"
        if self.status is EvalStatus.STUCK:
            return f"Stuck({show(self.term)})"
        return "FuelExhausted"


def Defined(value: Term, steps: int = 0) -> EvalResult:
    return EvalResult(EvalStatus.DEFINED, value, steps)


def Stuck(term: Term, steps: int = 0) -> EvalResult:
    return EvalResult(EvalStatus.STUCK, term, steps)


def FuelExhausted(steps: int = 0) -> EvalResult:
    return EvalResult(EvalStatus.FUEL_EXHAUSTED, None, steps)


# ---------------------------------------------------------- graph machine

_LEAF, _APP, _IND = 0, 1, 2


class _Node:
    __slots__ = ("kind", "a", "b", "nf")

    def __init__(self, kind: int, a, b=None, nf: bool = False):
        self.kind = kind
        self.a = a
        self.b = b
        self.nf = nf


def _leaf(t: Term) -> _Node:
    return _Node(_LEAF, t, None, True)


def _deref(n: _Node) -> _Node:
    while n.kind == _IND:
        n = n.a
    return n


def _to_graph(t: Term) -> _Node:
    # One fresh node per occurrence: textually distinct subterms are never merged.
    out: list[_Node] = []
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        node, ready = stack.pop()
        if isinstance(node, App):
            if ready:
                arg = out.pop()
                fun = out.pop()
                out.append(_Node(_APP, fun, arg))
            else:
                stack.append((node, True))
                stack.append((node.arg, False))
                stack.append((node.fun, False))
        elif isinstance(node, Var):
            raise ValueError(f"cannot evaluate open term (free variable {node.name})")
        else:
            out.append(_leaf(node))
    return out[0]


def _readback(root: _Node) -> Term:
    memo: dict[int, Term] = {}
    stack: list[tuple[_Node, bool]] = [(_deref(root), False)]
    while stack:
        node, ready = stack.pop()
        key = id(node)
        if key in memo:
            continue
        if node.kind == _LEAF:
            memo[key] = node.a
        elif ready:
            memo[key] = App(memo[id(_deref(node.a))], memo[id(_deref(node.b))])
        else:
            stack.append((node, True))
            stack.append((_deref(node.b), False))
            stack.append((_deref(node.a), False))
    return memo[id(_deref(root))]


def _spine(node: _Node) -> tuple[Term, list[_Node]]:
    apps = []
    n = node
    while n.kind == _APP:
        apps.append(n)
        n = _deref(n.a)
    apps.reverse()
    return n.a, apps


_WHNF, _REDEX, _STRICT, _BAD = 0, 1, 2, 3


def _classify(head: Term, nargs: int) -> int:
    if isinstance(head, Num):
        return _BAD if nargs else _WHNF
    op = head.op
    if op is Op.K:
        return _REDEX if nargs >= 2 else _WHNF
    if op is Op.S:
        return _REDEX if nargs >= 3 else _WHNF
    if op is Op.FIX:
        return _REDEX if nargs >= 2 else _WHNF
    if op is Op.PAIR:
        return _BAD if nargs > 2 else _WHNF
    if op is Op.IFZ:
        return _STRICT if nargs >= 3 else _WHNF
    return _STRICT if nargs >= 1 else _WHNF


class _Exhausted(Exception):
    pass


class _StuckAt(Exception):
    def __init__(self, node: _Node):
        self.node = node


QueryHandler = Callable[[Term], Term]


def _evaluate(term: Term, fuel: int, ask: QueryHandler | None, normal: bool) -> EvalResult:
    root = _to_graph(term)
    steps = 0

    def tick():
        nonlocal steps
        if steps >= fuel:
            raise _Exhausted
        steps += 1

    frames: list[tuple[_Node, bool]] = []
    cur, want_nf = root, normal
    try:
        while True:
            cur = _deref(cur)
            if want_nf and cur.nf:
                done = True
            else:
                done = False
                head, apps = _spine(cur)
                kind = _classify(head, len(apps))
                if kind == _BAD:
                    raise _StuckAt(cur)
                if kind == _REDEX:
                    tick()
                    op = head.op
                    if op is Op.K:
                        root_app = apps[1]
                        _become(root_app, _deref(apps[0].b))
                    elif op is Op.S:
                        a, b, c = apps[0].b, apps[1].b, apps[2].b
                        target = apps[2]
                        target.a = _Node(_APP, a, c)
                        target.b = _Node(_APP, b, c)
                        target.nf = False
                    else:
                        f, x = apps[0].b, apps[1].b
                        target = apps[1]
                        target.a = _Node(_APP, f, apps[0])
                        target.b = x
                        target.nf = False
                    continue
                if kind == _STRICT:
                    op = head.op
                    argn = _deref(apps[0].b)
                    if op is Op.QUERY:
                        if not argn.nf:
                            frames.append((cur, want_nf))
                            cur, want_nf = argn, True
                            continue
                        if ask is None:
                            raise _StuckAt(cur)
                        tick()
                        answer = ask(_readback(argn))
                        _become(apps[0], _to_graph(answer))
                        continue
                    ahead, aapps = _spine(argn)
                    akind = _classify(ahead, len(aapps))
                    if akind == _BAD:
                        raise _StuckAt(argn)
                    if akind != _WHNF:
                        frames.append((cur, want_nf))
                        cur, want_nf = argn, False
                        continue
                    _primitive(op, apps, ahead, aapps, tick, cur)
                    continue
                # weak head normal form reached
                if want_nf:
                    pending = None
                    for node in apps:
                        arg = _deref(node.b)
                        if not arg.nf:
                            pending = arg
                            break
                    if pending is not None:
                        frames.append((cur, True))
                        cur = pending
                        continue
                    for node in apps:
                        node.nf = True
                done = True
            if done:
                if not frames:
                    break
                cur, want_nf = frames.pop()
    except _Exhausted:
        return FuelExhausted(steps)
    except _StuckAt as err:
        return Stuck(_readback(err.node), steps)
    return Defined(_readback(root), steps)


def _become(node: _Node, other: _Node) -> None:
    other = _deref(other)
    if other is node:
        return
    node.kind = _IND
    node.a = other
    node.b = None
    node.nf = False


def _primitive(op: Op, apps, ahead: Term, aapps, tick, cur: _Node) -> None:
    if op in (Op.FST, Op.SND):
        if not (isinstance(ahead, Const) and ahead.op is Op.PAIR and len(aapps) == 2):
            raise _StuckAt(cur)
        tick()
        chosen = aapps[0].b if op is Op.FST else aapps[1].b
        _become(apps[0], chosen)
        return
    if not isinstance(ahead, Num):
        raise _StuckAt(cur)
    n = ahead.n
    if op is Op.SUCC:
        tick()
        _set_leaf(apps[0], Num(n + 1))
    elif op is Op.PRED:
        tick()
        _set_leaf(apps[0], Num(n - 1 if n > 0 else 0))
    elif op is Op.IFZ:
        tick()
        zero_branch, succ_branch = apps[1].b, apps[2].b
        if n == 0:
            _become(apps[2], zero_branch)
        else:
            target = apps[2]
            target.kind = _APP
            target.a = succ_branch
            target.b = _leaf(Num(n - 1))
            target.nf = False
    else:
        raise _StuckAt(cur)


def _set_leaf(node: _Node, t: Term) -> None:
    node.kind = _LEAF
    node.a = t
    node.b = None
    node.nf = True


def step_eval(t: Code, budgets: Budgets = DEFAULT_BUDGETS, query: QueryHandler | None = None,
              *, weak: bool = False) -> EvalResult:
    """Evaluate ``t`` to normal form (or weak head normal form with ``weak``).

    ``query`` answers ``QUERY v`` redexes; it receives the normalized argument
    and returns the term to continue with.  Without it such redexes are stuck.
    Each contraction and each query costs one unit of fuel.
    """
    return _evaluate(as_term(t), budgets.fuel, query, not weak)


def apply(a: Code, x: Code, budgets: Budgets = DEFAULT_BUDGETS) -> EvalResult:
    return _evaluate(App(as_term(a), as_term(x)), budgets.fuel, None, True)


# ------------------------------------------------------ compilation helpers

class CompileError(ValueError):
    pass


def free_vars(t: Term) -> set[str]:
    out = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, App):
            stack.append(node.fun)
            stack.append(node.arg)
        elif isinstance(node, Var):
            out.add(node.name)
    return out


def bracket_abstract(v: Var | str, t: Term) -> Term:
    """[v]t with the three plain rules and no eta shortcut."""
    name = v.name if isinstance(v, Var) else v
    memo: dict[int, Term] = {}
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        node, ready = stack.pop()
        key = id(node)
        if key in memo:
            continue
        if isinstance(node, Var) and node.name == name:
            memo[key] = I
        elif name not in free_vars(node):
            memo[key] = App(K, node)
        elif ready:
            memo[key] = app(S, memo[id(node.fun)], memo[id(node.arg)])
        else:
            stack.append((node, True))
            stack.append((node.arg, False))
            stack.append((node.fun, False))
    return memo[id(t)]


def lam(vars: Sequence[Var | str], body: Term) -> Term:
    """Abstract ``vars`` from ``body``, innermost (last) variable first."""
    out = body
    for v in reversed(list(vars)):
        out = bracket_abstract(v, out)
    return out


def compile_lambda(vars: Sequence[Var | str], body: Term) -> Term:
    """Closed program for ``λvars. body``; raises on unbound variables."""
    out = lam(vars, body)
    leftover = free_vars(out)
    if leftover:
        raise CompileError(f"unbound variables: {sorted(leftover)}")
    return out


def cp(a: Code, b: Code) -> Term:
    return pair(as_term(a), as_term(b))


def fst(c: Code, budgets: Budgets = DEFAULT_BUDGETS) -> EvalResult:
    return _evaluate(App(FST, as_term(c)), budgets.fuel, None, True)


def snd(c: Code, budgets: Budgets = DEFAULT_BUDGETS) -> EvalResult:
    return _evaluate(App(SND, as_term(c)), budgets.fuel, None, True)


def smn(e: Code, a: Code) -> Term:
    x = Var("x")
    return compile_lambda([x], App(as_term(e), pair(as_term(a), x)))


def compile_table(table: Mapping[int, int]) -> Term:
    """Program sending NUM(a) to NUM(table[a]) and looping elsewhere.

    The input is compared against 0, 1, 2, ... by repeated IFZ tests, each
    test peeling one successor off; past the largest key it falls into LOOP.
    """
    y = Var("y")
    if not table:
        return App(K, LOOP)
    top = max(table)
    rest: Term = App(K, LOOP)
    for k in range(top, -1, -1):
        hit = num(table[k]) if k in table else LOOP
        rest = compile_lambda([y], app(IFZ, y, hit, rest))
    return rest


# A fixed set of small programs used as sample witnesses throughout.
def _sample_programs() -> tuple[Term, ...]:
    x = Var("x")
    return (
        I,
        App(K, num(0)),
        SUCC,
        PRED,
        FST,
        SND,
        K,
        compile_lambda([x], pair(x, x)),
        compile_lambda([x], App(SUCC, App(SUCC, x))),
        compile_lambda([x], pair(App(SND, x), App(FST, x))),
    )


SAMPLE_PROGRAMS: tuple[Term, ...] = _sample_programs()


def codes_of(terms: Iterable[Term]) -> frozenset[int]:
    return frozenset(encode(t) for t in terms)
