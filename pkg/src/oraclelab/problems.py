"""Finite multimaps with public and secret inputs, plus a small catalog."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Mapping

from .oracle_machine import PlainOracle

PLAIN_SECRET = "*"

Secret = Hashable


def order_key(obj) -> tuple:
    """Total order on the labels used for secrets (ints, strings, tuples, sets)."""
    if isinstance(obj, bool):
        return (0, int(obj))
    if isinstance(obj, int):
        return (0, obj)
    if isinstance(obj, str):
        return (1, obj)
    if isinstance(obj, tuple):
        return (2, tuple(order_key(o) for o in obj))
    if isinstance(obj, frozenset):
        return (3, len(obj), tuple(sorted(order_key(o) for o in obj)))
    return (4, repr(obj))


def secret_label(s: Secret) -> str:
    if isinstance(s, frozenset):
        return "{" + ",".join(secret_label(v) for v in sorted(s, key=order_key)) + "}"
    if isinstance(s, tuple):
        return "(" + ",".join(secret_label(v) for v in s) + ")"
    return str(s)


@dataclass(frozen=True)
class MMMap:
    name: str
    publics: tuple[int, ...]
    secrets: tuple[Secret, ...]
    entries: tuple[tuple[int, Secret, frozenset[int]], ...]

    def __post_init__(self):
        pubs = set(self.publics)
        secs = set(self.secrets)
        seen = set()
        for x, p, vals in self.entries:
            if x not in pubs:
                raise ValueError(f"{self.name}: entry uses undeclared public {x}")
            if p not in secs:
                raise ValueError(f"{self.name}: entry uses undeclared secret {p!r}")
            if (x, p) in seen:
                raise ValueError(f"{self.name}: duplicate entry ({x}, {p!r})")
            seen.add((x, p))
            if any(not isinstance(v, int) or v < 0 or v >= 2**32 for v in vals):
                raise ValueError(f"{self.name}: answers must be naturals below 2^32")
        object.__setattr__(self, "_val", {(x, p): vals for x, p, vals in self.entries})

    @classmethod
    def build(cls, name: str, publics: Iterable[int], secrets: Iterable[Secret],
              entries: Mapping[tuple[int, Secret], Iterable[int]]) -> "MMMap":
        pubs = tuple(sorted(set(publics)))
        secs = tuple(sorted(set(secrets), key=order_key))
        rows = sorted(((x, p, frozenset(v)) for (x, p), v in entries.items()),
                      key=lambda r: (r[0], order_key(r[1])))
        return cls(name, pubs, secs, tuple(rows))

    @classmethod
    def plain(cls, name: str, table: Mapping[int, Iterable[int]], publics: Iterable[int] | None = None) -> "MMMap":
        pubs = set(table) if publics is None else set(publics) | set(table)
        return cls.build(name, pubs, [PLAIN_SECRET], {(x, PLAIN_SECRET): v for x, v in table.items()})

    # -- queries
    def val(self, x: int, p: Secret) -> frozenset[int]:
        return self._val[(x, p)]

    def in_dom(self, x: int, p: Secret) -> bool:
        return (x, p) in self._val

    def secrets_at(self, x: int) -> tuple[Secret, ...]:
        return tuple(p for p in self.secrets if (x, p) in self._val)

    def dom_publics(self) -> tuple[int, ...]:
        return tuple(x for x in self.publics if self.secrets_at(x))

    def answers(self) -> frozenset[int]:
        out: set[int] = set()
        for _, _, vals in self.entries:
            out |= vals
        return frozenset(out)

    def value_family(self, x: int) -> frozenset[frozenset[int]]:
        return frozenset(self.val(x, p) for p in self.secrets_at(x))

    def is_plain(self) -> bool:
        """At most one secret per public, so secrets carry no information."""
        return all(len(self.secrets_at(x)) <= 1 for x in self.publics)

    def is_single_valued(self) -> bool:
        return all(len(v) <= 1 for _, _, v in self.entries)

    def renamed(self, name: str) -> "MMMap":
        return MMMap(name, self.publics, self.secrets, self.entries)

    def as_oracle(self) -> PlainOracle:
        if not self.is_plain():
            raise ValueError(f"{self.name} has secret inputs; only plain maps act as oracles")
        return PlainOracle({x: vals for x, _, vals in self.entries})

    def same_content(self, other: "MMMap") -> bool:
        return (self.publics, self.secrets, self.entries) == (other.publics, other.secrets, other.entries)

    # -- JSON
    def to_json(self) -> dict:
        return {
            "name": self.name,
            "publics": list(self.publics),
            "secrets": [_secret_json(s) for s in self.secrets],
            "entries": [{"public": x, "secret": _secret_json(p), "values": sorted(v)} for x, p, v in self.entries],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MMMap":
        if not isinstance(data, dict):
            raise ValueError("problem JSON must be an object")
        try:
            name = data["name"]
            publics = data["publics"]
            secrets = [_secret_from_json(s) for s in data["secrets"]]
            raw_entries = data["entries"]
        except (KeyError, TypeError) as err:
            raise ValueError(f"problem JSON is missing a field: {err}") from None
        if not isinstance(name, str):
            raise ValueError("'name' must be a string")
        if not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in publics):
            raise ValueError("'publics' must be naturals")
        entries: dict[tuple[int, Secret], list[int]] = {}
        for i, e in enumerate(raw_entries):
            try:
                key = (e["public"], _secret_from_json(e["secret"]))
                values = e["values"]
            except (KeyError, TypeError):
                raise ValueError(f"entry {i} needs 'public', 'secret' and 'values'") from None
            if key in entries:
                raise ValueError(f"duplicate entry {key}")
            if not isinstance(values, list):
                raise ValueError(f"entry {i}: 'values' must be a list")
            entries[key] = values
        return cls.build(name, publics, secrets, entries)

    @classmethod
    def load(cls, path: str | Path) -> "MMMap":
        return cls.from_json(json.loads(Path(path).read_text()))


def _secret_json(s: Secret):
    if isinstance(s, (frozenset, set)):
        return sorted((_secret_json(v) for v in s), key=lambda v: json.dumps(v))
    if isinstance(s, tuple):
        return [_secret_json(v) for v in s]
    return s


def _secret_from_json(s) -> Secret:
    if isinstance(s, list):
        return tuple(_secret_from_json(v) for v in s)
    if isinstance(s, (int, str)) and not isinstance(s, bool):
        return s
    raise ValueError(f"unsupported secret label {s!r}")


ID2 = MMMap.plain("ID2", {0: {0}, 1: {1}})
CHOICE2 = MMMap.plain("CHOICE2", {0: {0, 1}})
FALSE1 = MMMap.plain("FALSE1", {0: set()})
SECRETBIT = MMMap.build("SECRETBIT", [0], [0, 1], {(0, 0): {0}, (0, 1): {1}})
EMPTY = MMMap.build("EMPTY", [0], [PLAIN_SECRET], {})

CATALOG: tuple[MMMap, ...] = (ID2, CHOICE2, FALSE1, SECRETBIT, EMPTY)
PLAIN_CATALOG: tuple[MMMap, ...] = (ID2, CHOICE2, FALSE1, EMPTY)
