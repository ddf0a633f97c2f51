"""Batch front-end.

Every command computes its full output text and exit code before printing,
which is what lets results be cached under a hash of the inputs.

Exit codes: 0 success or positive verdict, 1 negative verdict, 2 input
error, 3 inconclusive because a budget ran out.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import click

from . import __version__
from .constructions import EvaluableOracle, Verdict, inflation_witness, transparency_witness
from .finite_degrees import MAX_DEPTH, CapExceeded, parse_kind, poset_report, reduce
from .kernel import (
    DEFAULT_BUDGETS,
    FST,
    PRED,
    SND,
    SUCC,
    App,
    Budgets,
    I,
    K,
    S,
    EvalStatus,
    Term,
    Var,
    compile_lambda,
    decode,
    num,
    pair,
    parse_term,
    show,
    step_eval,
)
from .omega import (
    MAX_UNIVERSE,
    OmegaOp,
    U_from_j_canonical,
    U_from_j_plain,
    check_idempotent,
    check_inflationary,
    check_join_preserving,
    check_meet_preserving,
    check_subset_monotone,
    j_from_U,
    key_equivalence_holds,
)
from .oracle_machine import PlainOracle, eval_with_oracle
from .order_pca import Witnesses, check_order_pca
from .problems import MMMap
from .realizability import (
    RVerdict,
    Style,
    in_translation,
    j_translate_eval,
    least_member,
    parse_formula,
    realizer_set,
    theta_realizes,
)

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
FUEL_ENV = "ORACLELAB_FUEL"
FORMATS = ("text", "json", "dot")

_x = Var("x")
PROGRAMS: dict[str, Term] = {
    "id": I,
    "k": K,
    "s": S,
    "succ": SUCC,
    "pred": PRED,
    "fst": FST,
    "snd": SND,
    "zero": App(K, num(0)),
    "dup": compile_lambda([_x], pair(_x, _x)),
    "swap": compile_lambda([_x], pair(App(SND, _x), App(FST, _x))),
}


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    budgets: Budgets
    depth: int | None
    fmt: str | None
    cache: bool
    cache_dir: Path
    verify_cache: bool

    def format_for(self, default: str = "text") -> str:
        fmt = self.fmt or default
        # commands without a graph fall back to text for dot
        return "text" if fmt == "dot" and default != "dot" else fmt


def _default_cache_dir() -> Path:
    base = os.environ.get("XDG_CACHE_HOME") or str(Path.home() / ".cache")
    return Path(base) / "oraclelab"


# ------------------------------------------------------------------ inputs

def _read_json(path: str, cfg: RunConfig):
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: malformed JSON at line {err.lineno} column {err.colno}: {err.msg}") from None


def _load(path: str, cfg: RunConfig, parser: Callable):
    data = _read_json(path, cfg)
    try:
        return parser(data)
    except (ValueError, TypeError) as err:
        raise InputError(f"{path}: {err}") from None


def _term(text: str) -> Term:
    if text.lower() in PROGRAMS:
        return PROGRAMS[text.lower()]
    try:
        return parse_term(text)
    except ValueError as err:
        raise InputError(f"bad term {text!r}: {err}") from None


def _code_list(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return sorted({int(part) for part in text.split(",") if part.strip()})
    except ValueError:
        raise InputError(f"expected comma-separated naturals, got {text!r}") from None


def _dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# ------------------------------------------------------------------- cache

def _run(cfg: RunConfig, command: str, params: dict, compute: Callable[[], tuple[str, int]]) -> None:
    """Compute (or fetch) output and exit code, print, and exit."""
    try:
        key_data = {
            "command": command,
            "params": params,
            "budgets": asdict(cfg.budgets),
            "format": cfg.fmt,
            "version": __version__,
        }
        entry = None
        path = None
        if cfg.cache or cfg.verify_cache:
            files = {}
            for name in params.get("files", []):
                try:
                    files[name] = hashlib.sha256(Path(name).read_bytes()).hexdigest()
                except OSError as err:
                    raise InputError(f"cannot read {name}: {err.strerror}") from None
            key_data["files"] = files
            digest = hashlib.sha256(json.dumps(key_data, sort_keys=True, default=str).encode()).hexdigest()
            path = cfg.cache_dir / f"{digest}.json"
            if path.exists():
                try:
                    entry = json.loads(path.read_text())
                except (OSError, json.JSONDecodeError):
                    entry = None
        if entry is not None and not cfg.verify_cache:
            output, code = entry["output"], entry["exit"]
        else:
            output, code = compute()
            if entry is not None and (entry["output"], entry["exit"]) != (output, code):
                raise InputError(f"cache entry {path.name} differs from recomputation")
            if cfg.cache and path is not None and entry is None:
                cfg.cache_dir.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(".tmp")
                tmp.write_text(json.dumps({"output": output, "exit": code}))
                tmp.replace(path)
    except InputError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(EXIT_INPUT)
    click.echo(output, nl=False)
    sys.exit(code)


# -------------------------------------------------------------------- group

@click.group()
@click.version_option(__version__, prog_name="oraclelab")
@click.option("--fuel", type=int, help=f"Evaluation step budget (default from ${FUEL_ENV} or {DEFAULT_BUDGETS.fuel}).")
@click.option("--universe", type=int, help="Antecedent universe for implications on codes.")
@click.option("--depth", type=int, help=f"Query depth for game reductions (0..{MAX_DEPTH}).")
@click.option("--search-bound", type=int, help="Largest code tried by realizer searches.")
@click.option("--cache/--no-cache", default=False, show_default=True, help="Reuse results stored under a hash of the inputs.")
@click.option("--cache-dir", type=click.Path(file_okay=False), help="Cache location.")
@click.option("--verify-cache", is_flag=True, help="Recompute on cache hits and fail if they differ.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), help="Output format.")
@click.pass_context
def main(ctx, fuel, universe, depth, search_bound, cache, cache_dir, verify_cache, fmt):
    """Oracles as multimaps, machines, truth-value operations and realizability."""
    overrides = {}
    env_fuel = os.environ.get(FUEL_ENV)
    if env_fuel is not None:
        try:
            overrides["fuel"] = int(env_fuel)
        except ValueError:
            raise click.UsageError(f"{FUEL_ENV} must be an integer") from None
    for name, value in (("fuel", fuel), ("universe", universe), ("search_bound", search_bound)):
        if value is not None:
            overrides[name] = value
    if depth is not None:
        if not 0 <= depth <= MAX_DEPTH:
            raise click.UsageError(f"--depth must be between 0 and {MAX_DEPTH}")
        if depth > 0:
            overrides["game_depth"] = depth
    try:
        budgets = DEFAULT_BUDGETS.replace(**overrides)
    except ValueError as err:
        raise click.UsageError(str(err)) from None
    ctx.obj = RunConfig(budgets, depth, fmt, cache, Path(cache_dir) if cache_dir else _default_cache_dir(),
                        verify_cache)


# ------------------------------------------------------------------ reduce

@main.command("reduce")
@click.option("--kind", required=True, help="em, eW, sW, peW, TW or TW(d).")
@click.option("--depth", type=int, help="Depth for TW (overrides the global flag).")
@click.argument("from_file", type=click.Path())
@click.argument("to_file", type=click.Path())
@click.pass_obj
def cmd_reduce(cfg: RunConfig, kind, depth, from_file, to_file):
    """Decide whether FROM_FILE reduces to TO_FILE and print a witness."""
    depth = depth if depth is not None else (cfg.depth if cfg.depth is not None else 1)

    def compute():
        try:
            base, d = parse_kind(kind, depth)
        except ValueError as err:
            raise InputError(str(err)) from None
        if not 0 <= d <= MAX_DEPTH:
            raise InputError(f"depth must be between 0 and {MAX_DEPTH}")
        f = _load(from_file, cfg, MMMap.from_json)
        g = _load(to_file, cfg, MMMap.from_json)
        label = f"TW({d})" if base == "TW" else base
        try:
            w = reduce(base, f, g, d)
        except CapExceeded as err:
            return _emit(cfg, {"kind": label, "source": f.name, "target": g.name, "reducible": None,
                               "reason": str(err)}, f"inconclusive: {err}\n"), EXIT_BUDGET
        except ValueError as err:
            raise InputError(str(err)) from None
        if w is None:
            scope = f" within depth {d}" if base == "TW" else ""
            return _emit(cfg, {"kind": label, "source": f.name, "target": g.name, "reducible": False},
                         f"{f.name} is not {label}-reducible to {g.name}{scope}\n"), EXIT_NO
        return _emit(cfg, {"kind": label, "source": f.name, "target": g.name, "reducible": True,
                           "witness": w.to_json()},
                     f"{f.name} {label}-reduces to {g.name}\n{w.describe().rstrip()}\n"), EXIT_OK

    _run(cfg, "reduce", {"kind": kind, "depth": depth, "files": [from_file, to_file]}, compute)


def _emit(cfg: RunConfig, data, text: str, default: str = "text") -> str:
    return _dump(data) if cfg.format_for(default) == "json" else text


# -------------------------------------------------------------------- eval

@main.command("eval")
@click.option("--program", required=True, help="Program name (e.g. id, succ, dup) or term such as '(S K K)'.")
@click.option("--input", "input_", required=True, help="Input term; a bare integer n means NUM(n).")
@click.option("--oracle", "oracle_file", type=click.Path(), help="Oracle table JSON for QUERY.")
@click.pass_obj
def cmd_eval(cfg: RunConfig, program, input_, oracle_file):
    """Evaluate PROGRAM applied to INPUT, optionally with an oracle."""

    def compute():
        p, x = _term(program), _term(input_)
        if oracle_file is None:
            r = step_eval(App(p, x), cfg.budgets)
            status = {EvalStatus.DEFINED: EXIT_OK, EvalStatus.STUCK: EXIT_NO,
                      EvalStatus.FUEL_EXHAUSTED: EXIT_BUDGET}[r.status]
            text = show(r.value) if r.defined else r.status.value
            data = {"status": r.status.value, "steps": r.steps}
            if r.defined:
                data["value"] = show(r.value)
            return _emit(cfg, data, text + "\n"), status
        g = _load(oracle_file, cfg, PlainOracle.from_json)
        out = eval_with_oracle(p, x, g, cfg.budgets)
        return _emit(cfg, _outcome_json(out), out.describe() + "\n"), _outcome_exit(out)

    _run(cfg, "eval", {"program": program, "input": input_, "files": [oracle_file] if oracle_file else []},
         compute)


def _outcome_json(out) -> dict:
    data = {"status": out.status.value}
    if out.defined:
        data["values"] = sorted(show(v) for v in out.values)
        data["queries"] = sorted(out.query_counts)
    elif out.detail:
        data["detail"] = out.detail
    return data


def _outcome_exit(out) -> int:
    if out.defined:
        return EXIT_OK
    return EXIT_BUDGET if out.inconclusive else EXIT_NO


# ------------------------------------------------------------------ oracle

@main.command("oracle")
@click.argument("kind", type=click.Choice(["table", "med", "weih", "pweih", "diamond"]))
@click.option("--input", "input_", required=True, help="Input term for the machine.")
@click.option("--oracle", "oracle_file", type=click.Path(), help="Oracle table JSON (all kinds but med).")
@click.option("--queries", help="Comma-separated query set for med.")
@click.pass_obj
def cmd_oracle(cfg: RunConfig, kind, input_, oracle_file, queries):
    """Run one of the universal machines on an input."""

    def compute():
        x = _term(input_)
        if kind == "med":
            U = EvaluableOracle.med(_code_list(queries), cfg.budgets)
        else:
            if oracle_file is None:
                raise InputError(f"{kind} needs --oracle")
            g = _load(oracle_file, cfg, PlainOracle.from_json)
            U = getattr(EvaluableOracle, "of_table" if kind == "table" else kind)(g, cfg.budgets)
        out = U.evaluate(x)
        return _emit(cfg, _outcome_json(out), out.describe() + "\n"), _outcome_exit(out)

    files = [oracle_file] if oracle_file else []
    _run(cfg, "oracle", {"kind": kind, "input": input_, "queries": queries, "files": files}, compute)


# ------------------------------------------------------------------- omega

OMEGA_CHECKS: dict[str, Callable[[OmegaOp], bool]] = {
    "monotone": check_subset_monotone,
    "meet": check_meet_preserving,
    "join": check_join_preserving,
    "inflationary": check_inflationary,
    "idempotent": check_idempotent,
    "key-equivalence": key_equivalence_holds,
}


@main.group("omega")
def cmd_omega():
    """Operations on truth values over a finite universe."""


@cmd_omega.command("check")
@click.option("--file", "op_file", required=True, type=click.Path(), help="Operation JSON {universe, table}.")
@click.option("--property", "props", multiple=True, type=click.Choice(list(OMEGA_CHECKS) + ["topology"]),
              help="Property to check; repeatable, default all.")
@click.pass_obj
def cmd_omega_check(cfg: RunConfig, op_file, props):
    """Check structural properties of an operation."""
    chosen = list(dict.fromkeys(props)) or list(OMEGA_CHECKS)

    def compute():
        j = _load(op_file, cfg, OmegaOp.from_json)
        results = {}
        for name in chosen:
            if name == "topology":
                results[name] = all(OMEGA_CHECKS[p](j) for p in ("monotone", "inflationary", "idempotent"))
            else:
                results[name] = OMEGA_CHECKS[name](j)
        text = "".join(f"{k}: {'pass' if v else 'fail'}\n" for k, v in results.items())
        data = {"universe": j.universe, "results": {k: ("pass" if v else "fail") for k, v in results.items()}}
        return _emit(cfg, data, text), EXIT_OK if all(results.values()) else EXIT_NO

    _run(cfg, "omega check", {"props": chosen, "files": [op_file]}, compute)


@cmd_omega.command("convert")
@click.option("--file", "op_file", type=click.Path(), help="Operation JSON to turn into a problem.")
@click.option("--canonical", is_flag=True, help="Use the canonical secret-indexed problem.")
@click.option("--problem", "problem_file", type=click.Path(), help="Problem JSON to turn into an operation.")
@click.option("--size", type=int, help=f"Universe size (at most {MAX_UNIVERSE}) for --problem.")
@click.pass_obj
def cmd_omega_convert(cfg: RunConfig, op_file, canonical, problem_file, size):
    """Translate between operations and problems (JSON output)."""

    def compute():
        if (op_file is None) == (problem_file is None):
            raise InputError("give exactly one of --file and --problem")
        try:
            if op_file:
                j = _load(op_file, cfg, OmegaOp.from_json)
                U = U_from_j_canonical(j) if canonical else U_from_j_plain(j)
                return _dump(U.to_json()), EXIT_OK
            if size is None:
                raise InputError("--problem needs --size")
            U = _load(problem_file, cfg, MMMap.from_json)
            return _dump(j_from_U(U, size).to_json()), EXIT_OK
        except ValueError as err:
            raise InputError(str(err)) from None

    files = [f for f in (op_file, problem_file) if f]
    _run(cfg, "omega convert", {"canonical": canonical, "size": size, "files": files}, compute)


# ----------------------------------------------------------------- realize

@main.command("realize")
@click.option("--formula", required=True, help="Formula, e.g. '(imp (eq 0 0) (eq 0 0))'.")
@click.option("--oracle", "oracle_file", type=click.Path(), help="Oracle table JSON (default: empty).")
@click.option("--style", type=click.Choice(["direct", "lvo", "lifschitz"]), default="direct", show_default=True,
              help="Oracle realizability, or one of the two translations.")
@click.option("--check", "candidate", help="Check this realizer instead of searching.")
@click.pass_obj
def cmd_realize(cfg: RunConfig, formula, oracle_file, style, candidate):
    """Search for (or check) a realizer of a closed arithmetic formula."""

    def compute():
        try:
            phi = parse_formula(formula)
        except ValueError as err:
            raise InputError(str(err)) from None
        theta = _load(oracle_file, cfg, PlainOracle.from_json) if oracle_file else PlainOracle()
        mode = {"lvo": Style.LVO, "lifschitz": Style.LIFSCHITZ}.get(style)
        if candidate is not None:
            e = _term(candidate)
            verdict = (theta_realizes(e, phi, theta, cfg.budgets) if mode is None
                       else in_translation(e, phi, mode, theta, cfg.budgets))
            code = {RVerdict.REALIZES: EXIT_OK, RVerdict.FAILS: EXIT_NO, RVerdict.INCONCLUSIVE: EXIT_BUDGET}[verdict]
            return _emit(cfg, {"candidate": show(e), "verdict": verdict.value}, verdict.value + "\n"), code
        rset = realizer_set(phi, theta, cfg.budgets) if mode is None else j_translate_eval(phi, mode, theta, cfg.budgets)
        res = least_member(rset, cfg.budgets)
        data = {"searched": res.searched, "inconclusive": res.inconclusive, "code": res.code}
        if res.found:
            data["term"] = show(decode(res.code))
            return _emit(cfg, data, f"least realizer {res.code} = {data['term']}\n"), EXIT_OK
        if res.inconclusive:
            return _emit(cfg, data, f"no realizer found below {res.searched}; "
                                    f"{res.inconclusive} candidates inconclusive\n"), EXIT_BUDGET
        return _emit(cfg, data, f"no realizer below {res.searched}\n"), EXIT_NO

    files = [oracle_file] if oracle_file else []
    _run(cfg, "realize", {"formula": formula, "style": style, "check": candidate, "files": files}, compute)


# ------------------------------------------------------------------- poset

@main.command("poset")
@click.argument("directory", type=click.Path())
@click.option("--kind", required=True, help="em, eW, sW, peW, TW or TW(d).")
@click.pass_obj
def cmd_poset(cfg: RunConfig, directory, kind):
    """Degree poset of every problem file in DIRECTORY (DOT by default)."""
    folder = Path(directory)
    if not folder.is_dir():
        click.echo(f"error: {directory} is not a directory", err=True)
        sys.exit(EXIT_INPUT)
    files = [str(p) for p in sorted(folder.glob("*.json"))]

    def compute():
        if not files:
            raise InputError(f"no problem files in {directory}")
        catalog = [_load(f, cfg, MMMap.from_json) for f in files]
        try:
            report = poset_report(catalog, kind, cfg.budgets)
        except CapExceeded as err:
            return f"inconclusive: {err}\n", EXIT_BUDGET
        except ValueError as err:
            raise InputError(str(err)) from None
        fmt = cfg.format_for("dot")
        if fmt == "dot":
            return report.to_dot(), EXIT_OK
        if fmt == "json":
            return _dump(report.to_json()), EXIT_OK
        return _poset_text(report), EXIT_OK

    _run(cfg, "poset", {"kind": kind, "files": files}, compute)


def _poset_text(report) -> str:
    width = max(len(n) for n in report.names)
    lines = [f"{report.kind} reducibility (row reduces to column)"]
    lines.append(" " * (width + 1) + " ".join(n[:1] for n in report.names))
    for name, row in zip(report.names, report.matrix):
        lines.append(name.ljust(width) + " " + " ".join("x" if c else "." for c in row))
    lines.append("degrees:")
    lines += [f"  {rep}: {', '.join(members)}" for rep, members in report.degrees]
    lines.append("covering edges:")
    lines += [f"  {lo} < {hi}" for lo, hi in report.edges]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------- pca-check

@main.command("pca-check")
@click.option("--oracle", "oracle_file", required=True, type=click.Path(), help="Oracle table JSON.")
@click.option("--machine", type=click.Choice(["diamond", "weih"]), default="diamond", show_default=True,
              help="weih runs with an identity idempotence witness, which it does not satisfy.")
@click.option("--precheck/--no-precheck", default=True, show_default=True)
@click.pass_obj
def cmd_pca_check(cfg: RunConfig, oracle_file, machine, precheck):
    """Check the order-PCA axioms for code sets under a universal machine."""

    def compute():
        g = _load(oracle_file, cfg, PlainOracle.from_json)
        if machine == "diamond":
            U = EvaluableOracle.diamond(g, cfg.budgets)
            w = Witnesses.constructed(U)
        else:
            U = EvaluableOracle.weih(g, cfg.budgets)
            try:
                w = Witnesses(transparency_witness(U), inflation_witness(U), I)
            except ValueError as err:
                raise InputError(str(err)) from None
        report = check_order_pca(U, w, precheck=precheck)
        data = {
            "oracle": report.oracle,
            "verdict": report.verdict.value,
            "axioms": {a.name: {"verdict": a.verdict.value, "checked": a.checked, "vacuous": a.vacuous,
                                "inconclusive": a.inconclusive, "counterexamples": list(a.counterexamples[:3])}
                       for a in report.axioms},
        }
        code = {Verdict.PASS: EXIT_OK, Verdict.FAIL: EXIT_NO, Verdict.INCONCLUSIVE: EXIT_BUDGET}[report.verdict]
        return _emit(cfg, data, report.text()), code

    _run(cfg, "pca-check", {"machine": machine, "precheck": precheck, "files": [oracle_file]}, compute)


if __name__ == "__main__":
    main()
