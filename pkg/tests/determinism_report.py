"""Print a deterministic report of the package's main outputs.

Run twice under different hash seeds; the two outputs must be identical.
"""

from __future__ import annotations

import json
import sys
import tempfile
from itertools import product
from pathlib import Path

from click.testing import CliRunner

from oraclelab import finite_degrees as fd
from oraclelab.cli import main
from oraclelab.constructions import EvaluableOracle, join, standard_samples
from oraclelab.kernel import show
from oraclelab.oracle_machine import PlainOracle
from oraclelab.order_pca import check_order_pca, leaf_samples
from oraclelab.problems import CATALOG, CHOICE2, ID2
from oraclelab.realizability import find_realizer, parse_formula

ROOT = Path(__file__).resolve().parent.parent
SIX = list(CATALOG) + [join(ID2, CHOICE2).renamed("ID2_JOIN_CHOICE2")]
KINDS = [("em", 0), ("eW", 0), ("peW", 0), ("TW", 1), ("TW", 2)]


def section(title: str) -> None:
    print(f"== {title}")


def witnesses() -> None:
    section("witnesses")
    for (kind, depth), f, g in product(KINDS, SIX, SIX):
        w = fd.reduce(kind, f, g, depth)
        body = "none" if w is None else json.dumps(w.to_json(), sort_keys=True)
        print(f"{kind}{depth} {f.name} {g.name} {body}")


def posets() -> None:
    section("posets")
    for kind, depth in KINDS:
        report = fd.poset_report(SIX, f"TW({depth})" if kind == "TW" else kind)
        print(report.to_dot())
        print(json.dumps(report.to_json(), sort_keys=True))


def machines() -> None:
    section("machines")
    g = PlainOracle.load(ROOT / "oracles" / "choice2.json")
    for U in (EvaluableOracle.weih(g), EvaluableOracle.diamond(g)):
        for x in standard_samples(U).inputs:
            print(U.describe(), show(x), U.evaluate(x).describe())


def order_pca() -> None:
    section("order pca")
    g = PlainOracle.load(ROOT / "oracles" / "id2.json")
    print(check_order_pca(EvaluableOracle.diamond(g), samples=leaf_samples(), precheck=False).text())


def realizers() -> None:
    section("realizers")
    for text in ("(eq 0 0)", "(imp (eq 0 0) (eq 0 0))", "(imp (tv 6) (tv 6))"):
        print(text, find_realizer(parse_formula(text), PlainOracle()))


def cli() -> None:
    section("cli")
    catalog = ROOT / "catalog"
    commands = [
        ["poset", str(catalog), "--kind", "eW"],
        ["--format", "json", "reduce", "--kind", "TW(2)", str(catalog / "secretbit.json"), str(catalog / "id2.json")],
        ["eval", "--program", "dup", "--input", "3"],
    ]
    with tempfile.TemporaryDirectory() as tmp:
        for args in commands:
            runs = [CliRunner().invoke(main, args)]
            for _ in range(2):
                runs.append(CliRunner().invoke(main, ["--cache", "--cache-dir", tmp] + args))
            runs.append(CliRunner().invoke(main, ["--cache", "--cache-dir", tmp, "--verify-cache"] + args))
            outs = {(r.exit_code, r.output) for r in runs}
            print(" ".join(args[-3:]), "cache-transparent" if len(outs) == 1 else "CACHE MISMATCH")
            print(runs[0].exit_code, runs[0].output)


def run() -> None:
    for part in (witnesses, posets, machines, order_pca, realizers, cli):
        part()
        sys.stdout.flush()


if __name__ == "__main__":
    run()
