"""Verification against the embedded tables and the invariant suites.

Shared by the ``verify``/``selftest`` commands and the test suite.  Every
check returns a ``CheckResult`` instead of raising, so callers can report
all outcomes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import fixtures as F
from .complex import (
    add_maps,
    build_complex,
    build_point_map,
    compose,
    differential_squares_to_zero,
    edge_homotopy,
    same_map,
)
from .diagram import random_decoration
from .spectral import PoincarePolynomial, compute_pages, khovanov_oracle


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int = 0
    details: list = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f" ({self.cases} cases)" if self.cases else ""
        tail = f": {self.details[0]}" if self.details and not self.passed else ""
        return f"{status} {self.name}{extra}{tail}"


# -- tables -----------------------------------------------------------------------


def verify_fixture(name: str, perturb: bool = False, method: str = "persistence") -> CheckResult:
    """Compare every tabulated page byte-for-byte and require collapse by the last one.

    ``perturb`` adds one spurious term to the expected first page, which
    must make the check fail.
    """
    fx = F.get(name)
    rows = F.table(name)
    c = build_complex(fx.diagram(), part="reduced")
    seq = compute_pages(c, method)
    details = []
    last = max(r["page"] for r in rows)
    for r in rows:
        expected = r["poly"]
        if perturb and r is rows[0]:
            expected = (PoincarePolynomial.parse(expected) + PoincarePolynomial({(99, 99): 1})).format()
        page = seq.page(r["page"])
        got = page.poly().format()
        if got != expected:
            details.append(f"E^{r['page']}: got {got}, expected {expected}")
    if seq.collapse > last:
        details.append(f"pages change after E^{last} (collapse at E^{seq.collapse})")
    return CheckResult(f"verify {name}", not details, len(rows), details)


# -- invariant suites ----------------------------------------------------------------


def small_fixtures(max_crossings: int = 9) -> list[str]:
    return [n for n in F.names() if F.get(n).crossings <= max_crossings]


def check_d_squared(names: list[str], decorations: int = 5, seed: int = 0) -> CheckResult:
    cases = 0
    bad = []
    for name in names:
        d = F.get(name).diagram()
        for s in range(decorations):
            t = random_decoration(d, seed + s)
            for variant in ("standard", "mirror"):
                c = build_complex(d, t, variant)
                cases += 1
                if not differential_squares_to_zero(c):
                    bad.append(f"{name} seed {seed + s} {variant}")
    return CheckResult("d^2 = 0 (standard and mirror)", not bad, cases, bad)


def check_oracle(names: list[str], parts=("reduced", "full")) -> CheckResult:
    cases = 0
    bad = []
    for name in names:
        d = F.get(name).diagram()
        for part in parts:
            c = build_complex(d, part=part)
            e2 = compute_pages(c).page(2)
            cases += 1
            if e2.poly() != khovanov_oracle(d, part).poly():
                bad.append(f"{name} {part}")
    return CheckResult("E^2 equals Khovanov homology", not bad, cases, bad)


def page_table(seq, upto: int) -> list:
    return [seq.page(k).poly() for k in range(2, upto + 1)]


def check_decoration_invariance(names: list[str], decorations: int = 5, seed: int = 0) -> CheckResult:
    cases = 0
    bad = []
    for name in names:
        d = F.get(name).diagram()
        ref = None
        for s in range(decorations):
            t = random_decoration(d, seed + s)
            seq = compute_pages(build_complex(d, t, part="reduced"))
            tab = page_table(seq, max(seq.collapse, 4))
            cases += 1
            if ref is None:
                ref = tab
            elif tab[: len(ref)] != ref[: len(tab)] or tab[-1] != ref[-1]:
                bad.append(f"{name} seed {seed + s}")
    return CheckResult("pages independent of decoration", not bad, cases, bad)


def check_diagram_invariance(groups: dict[str, list[str]]) -> CheckResult:
    cases = 0
    bad = []
    for knot, members in groups.items():
        tabs = []
        for name in members:
            seq = compute_pages(build_complex(F.get(name).diagram(), part="reduced"))
            tabs.append((name, page_table(seq, 5)))
            cases += 1
        for name, tab in tabs[1:]:
            if tab != tabs[0][1]:
                bad.append(f"{knot}: {name} differs from {tabs[0][0]}")
    return CheckResult("pages independent of diagram", not bad, cases, bad)


def check_reduced_quotient(names: list[str]) -> CheckResult:
    cases = 0
    bad = []
    for name in names:
        d = F.get(name).diagram()
        a = compute_pages(build_complex(d, part="reduced"))
        b = compute_pages(build_complex(d, part="quotient"))
        cases += 1
        top = max(a.collapse, b.collapse, 2)
        if page_table(a, top) != page_table(b, top):
            bad.append(name)
    return CheckResult("reduced and quotient pages agree", not bad, cases, bad)


def check_point_map(names: list[str], decorations: int = 2, seed: int = 0) -> CheckResult:
    cases = 0
    bad = []
    for name in names:
        d = F.get(name).diagram()
        for s in range(decorations):
            c = build_complex(d, random_decoration(d, seed + s))
            for edge in _sample_edges(d, 2, seed + s):
                P = build_point_map(c, d.base_point(edge))
                lhs = add_maps(compose(c.src, c.tgt, P.src, P.tgt, len(c)),
                               compose(P.src, P.tgt, c.src, c.tgt, len(c)), size=len(c))
                cases += 1
                if lhs[0].size:
                    bad.append(f"{name} seed {seed + s} edge {edge}")
    return CheckResult("P is a chain map", not bad, cases, bad)


def _sample_edges(d, k, seed):
    edges = d.edges
    rng = random.Random(seed)
    return sorted(rng.sample(edges, min(k, len(edges))))


def check_deformation(names: list[str], seed: int = 0) -> CheckResult:
    """P(t') = P(t) + H_m P(t) + P(t) H_m for every single-crossing flip."""
    cases = 0
    bad = []
    for name in names:
        d = F.get(name).diagram()
        t = random_decoration(d, seed)
        c = build_complex(d, t)
        base = d.base_point()
        P = build_point_map(c, base)
        for m in range(d.n):
            t2 = list(t)
            t2[m] ^= 1
            c2 = build_complex(d, tuple(t2))
            P2 = build_point_map(c2, base)
            H = edge_homotopy(c, m)
            n = len(c)
            rhs = add_maps((P.src, P.tgt), compose(H.src, H.tgt, P.src, P.tgt, n),
                           compose(P.src, P.tgt, H.src, H.tgt, n), size=n)
            cases += 1
            if not same_map((P2.src, P2.tgt), rhs, n):
                bad.append(f"{name} crossing {m}")
    return CheckResult("deformation identity for P", not bad, cases, bad)


def check_strategies(names: list[str]) -> CheckResult:
    cases = 0
    bad = []
    for name in names:
        c = build_complex(F.get(name).diagram(), part="reduced")
        a = compute_pages(c, "cancel", "minfill")
        b = compute_pages(c, "cancel", "first")
        p = compute_pages(c, "persistence")
        cases += 1
        if not (a.pages == b.pages == p.pages):
            bad.append(name)
    return CheckResult("pivot strategies agree", not bad, cases, bad)


SUITES = {
    "d2": lambda names, seed: check_d_squared(names, seed=seed),
    "oracle": lambda names, seed: check_oracle(names),
    "decoration": lambda names, seed: check_decoration_invariance(names, seed=seed),
    "reduced-quotient": lambda names, seed: check_reduced_quotient(names),
    "chain-map": lambda names, seed: check_point_map(names[:6], seed=seed),
    "strategies": lambda names, seed: check_strategies(names),
}


def selftest(scopes=None, max_crossings: int = 7, seed: int = 0) -> list[CheckResult]:
    names = small_fixtures(max_crossings)
    out = []
    for scope in scopes or SUITES:
        if scope not in SUITES:
            raise KeyError(f"unknown scope {scope!r}")
        out.append(SUITES[scope](names, seed))
    return out


__all__ = [
    "CheckResult",
    "verify_fixture",
    "selftest",
    "check_d_squared",
    "check_oracle",
    "check_decoration_invariance",
    "check_diagram_invariance",
    "check_reduced_quotient",
    "check_point_map",
    "check_deformation",
    "check_strategies",
]
