"""Geometric spectral sequence E^k of links over F2, computed from planar diagrams."""

from __future__ import annotations

import warnings

# numba probes for TBB at import; the OpenMP/workqueue layers are fine.
warnings.filterwarnings("ignore", message=".*TBB.*", module="numba")

from .complex import ChainComplex, ResourceLimitError, build_complex  # noqa: E402
from .diagram import (  # noqa: E402
    DiagramError,
    LinkDiagram,
    braid_closure,
    mirror_diagram,
    parse_pd,
    torus_link,
)
from .spectral import Page, PoincarePolynomial, compute_pages, conjectured_torus_poly  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "ChainComplex",
    "DiagramError",
    "LinkDiagram",
    "Page",
    "PoincarePolynomial",
    "ResourceLimitError",
    "braid_closure",
    "build_complex",
    "compute_pages",
    "conjectured_torus_poly",
    "mirror_diagram",
    "parse_pd",
    "torus_link",
]
