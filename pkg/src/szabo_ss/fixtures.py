"""Embedded fixture diagrams and published page tables.

``fixtures.json`` holds one entry per diagram: a PD code, a torus pair or a
braid word, its provenance, and for tabulated knots the orientation that
reproduces the table (``mirror`` selects the mirror diagram, ``reverse``
lists components whose orientation is reversed).
``page_tables.json`` holds the reduced page polynomials, transcribed
verbatim in their LaTeX form.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .diagram import (
    LinkDiagram,
    braid_closure,
    from_tuples,
    mirror_diagram,
    reverse_components,
    torus_link,
)
from .spectral import PoincarePolynomial


@dataclass(frozen=True)
class Fixture:
    name: str
    knot: str
    source: str
    entry: dict

    def diagram(self, oriented: bool = True) -> LinkDiagram:
        """The diagram; with ``oriented`` the stored mirror/reversal flags are applied."""
        s = self.entry
        if "pd" in s:
            d = from_tuples(s["pd"])
        elif "torus" in s:
            d = torus_link(*s["torus"])
        else:
            word, strands = s["braid"]
            d = braid_closure(word, strands)
        if oriented:
            if s.get("reverse"):
                d = reverse_components(d, s["reverse"])
            if s.get("mirror"):
                d = mirror_diagram(d)
        return d

    @property
    def tabulated(self) -> bool:
        return bool(self.entry.get("tabulated"))

    @property
    def crossings(self) -> int:
        return self.diagram(False).n


def _read(name: str) -> str:
    return resources.files("szabo_ss").joinpath("data", name).read_text()


@lru_cache(maxsize=None)
def _fixtures() -> dict:
    raw = json.loads(_read("fixtures.json"))["fixtures"]
    return {k: Fixture(k, v.get("knot", k), v.get("source", ""), v) for k, v in raw.items()}


@lru_cache(maxsize=None)
def _tables() -> dict:
    return json.loads(_read("page_tables.json"))


def names() -> list[str]:
    return list(_fixtures())


def get(name: str) -> Fixture:
    try:
        return _fixtures()[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}") from None


def tabulated_names() -> list[str]:
    return list(_tables())


def table(name: str) -> list[dict]:
    """Rows ``{page, rank, poly}`` for a tabulated knot."""
    return _tables()[name]


def table_polys(name: str) -> dict[int, PoincarePolynomial]:
    return {r["page"]: PoincarePolynomial.parse(r["poly"]) for r in table(name)}


def tables_checksum() -> str:
    """SHA-256 of the table file in canonical JSON form."""
    blob = json.dumps(_tables(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
