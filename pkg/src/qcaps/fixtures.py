"""The caps printed in the paper's result tables, shipped as package data."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .caps import Cap, CapFormatError, NotACapError, parse_cap
from .equiv import Collineation
from .quantum import weight_distribution


@dataclass(frozen=True)
class Fixture:
    name: str
    title: str
    size: int
    complete: bool
    weight_distribution: tuple[tuple[int, int], ...]
    lists_zero_word: bool
    directory: str | None = None

    def text(self) -> str:
        return (_data_dir(self.directory) / f"{self.name}.cap").read_text()

    def load(self) -> Cap:
        return parse_cap(self.text())


def _data_dir(directory: str | None):
    return Path(directory) if directory else resources.files(__package__) / "data"


@lru_cache(maxsize=None)
def _expected(directory: str | None) -> dict:
    return json.loads((_data_dir(directory) / "expected.json").read_text())


def fixtures(directory: str | None = None) -> list[Fixture]:
    """Shipped fixtures, or those of a directory laid out the same way."""
    directory = str(directory) if directory else None
    out = []
    for name, rec in _expected(directory).items():
        wd = tuple((int(w), int(c)) for w, c in rec["weight_distribution"])
        out.append(Fixture(name, rec["title"], rec["size"], rec["complete"], wd, rec["lists_zero_word"], directory))
    return sorted(out, key=lambda f: (f.size, f.name))


def fixture(name: str) -> Fixture:
    for f in fixtures():
        if f.name == name:
            return f
    raise KeyError(f"no fixture named {name!r}")


def stabilizer_generators_20cap() -> dict[str, Collineation]:
    """G1, G2, G3 for the 20-cap; the printed matrices act on row vectors."""
    data = json.loads((resources.files(__package__) / "data" / "20cap_stabilizer.json").read_text())
    return {k: Collineation.from_row_action(m) for k, m in data["generators"].items()}


def check_fixture(f: Fixture, cap: Cap | None = None) -> list[str]:
    """Mismatches between a fixture and its recorded expectations (empty if none)."""
    problems = []
    if cap is None:
        try:
            cap = f.load()
        except (CapFormatError, NotACapError) as exc:
            return [f"{f.name}: {exc}"]
    if cap.n != f.size:
        problems.append(f"{f.name}: size {cap.n} != {f.size}")
    complete = cap.covered == cap.space.all_mask
    if complete != f.complete:
        problems.append(f"{f.name}: complete {complete} != {f.complete}")
    got = tuple(tuple(p) for p in weight_distribution(cap).as_pairs())
    if got != f.weight_distribution:
        problems.append(f"{f.name}: weight distribution {list(got)} != {list(f.weight_distribution)}")
    return problems
