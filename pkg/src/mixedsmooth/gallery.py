"""Built-in test functions, organized as families instantiable per dimension.

Embedding checks need full-space norms, so their gallery members decay fast
enough that the documented support box captures the norm to better than
1e-12 relative:

* ``bump``  -- tensor plateau bump, the product over axes of
  0.5 (1 - tanh(x_i^2/2 - 1)); per-axis tails fall like exp(-t^2), below
  1e-12 outside [-5.5, 5.5]^n.  The product form keeps every mixed
  partial's zero set on coordinate planes, which the symmetric composite
  quadrature grids resolve to full accuracy even for odd L_p exponents,
  and the soft shoulders keep high-dimensional refinement shallow.
* ``gauss`` -- exp(-|x|^2), below 1e-12 outside [-5.5, 5.5]^n (same
  axis-aligned zero sets, being a product as well).

The identity checks accept any smooth function, so their gallery adds
``poly`` (quadratic plus the full cross term), ``sinexp`` (the classic
separable product), and ``loglog`` (the counterexample shape smoothed at a
fixed scale 1/4, entire and strongly curved near the origin).

Canonical ids follow ``<family><n>d``: bump2d, gauss2d, poly3d, sinexp3d,
loglog2d, and so on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .expr import Expr, parse
from .geometry import Rectangle

GNL_FAMILIES = ("bump", "gauss", "poly", "sinexp", "loglog")
EMBEDDING_FAMILIES = ("bump", "gauss")
CANONICAL_IDS = ("bump2d", "gauss2d", "poly3d", "sinexp3d", "loglog2d")
MAX_FAMILY_DIM = 6


@dataclass(frozen=True)
class GalleryFunction:
    id: str
    family: str
    arity: int
    text: str
    support_box: Rectangle | None = None  # None: not rapidly decaying

    @property
    def expr(self) -> Expr:
        return _parse_cached(self.text, self.arity)


@lru_cache(maxsize=None)
def _parse_cached(text: str, arity: int) -> Expr:
    return parse(text, arity)


def _sum_squares(n: int) -> str:
    return " + ".join(f"x{i}^2" for i in range(1, n + 1))


def _family_text(family: str, n: int) -> tuple[str, Rectangle | None]:
    if family == "bump":
        factors = " * ".join(
            f"(0.5*(1 - tanh(0.5*x{i}^2 - 1)))" for i in range(1, n + 1)
        )
        return factors, Rectangle.cube(n, -5.5, 5.5)
    if family == "gauss":
        return f"exp(-({_sum_squares(n)}))", Rectangle.cube(n, -5.5, 5.5)
    if family == "poly":
        cross = "*".join(f"x{i}" for i in range(1, n + 1))
        return f"1 + {_sum_squares(n)} + {cross}", None
    if family == "sinexp":
        parts = ["sin(x1)", "exp(x2)", "x3", "cos(x4)", "x5", "x6"]
        return "*".join(parts[:n]), None
    if family == "loglog":
        return f"log(log(1 + 1/sqrt({_sum_squares(n)} + 0.0625)))", None
    raise DomainError(f"unknown gallery family {family!r}")


@lru_cache(maxsize=None)
def gallery_family(family: str, n: int) -> GalleryFunction:
    if not (1 <= n <= MAX_FAMILY_DIM):
        raise DomainError(f"gallery dimensions run 1..{MAX_FAMILY_DIM}, got {n}")
    text, box = _family_text(family, n)
    return GalleryFunction(
        id=f"{family}{n}d", family=family, arity=n, text=text, support_box=box
    )


def resolve(identifier: str, n: int | None = None) -> GalleryFunction | None:
    """Look up ``bump2d``-style ids, or a family name combined with ``n``.
    Returns None when the identifier is not a gallery name (callers then
    treat it as an inline expression)."""
    ident = identifier.strip().lower()
    for family in GNL_FAMILIES:
        if ident == family:
            if n is None:
                raise DomainError(f"family {family!r} needs an explicit dimension")
            return gallery_family(family, n)
        if ident.startswith(family) and ident.endswith("d"):
            digits = ident[len(family):-1]
            if digits.isdigit():
                dim = int(digits)
                if n is not None and n != dim:
                    raise DomainError(
                        f"{identifier} is {dim}-dimensional but n={n} was requested"
                    )
                return gallery_family(family, dim)
    return None


def gnl_gallery(n: int) -> list[GalleryFunction]:
    return [gallery_family(f, n) for f in GNL_FAMILIES]


def embedding_gallery(n: int) -> list[GalleryFunction]:
    return [gallery_family(f, n) for f in EMBEDDING_FAMILIES]


def random_boxes(
    n: int,
    count: int,
    seed: int,
    *,
    center_range: tuple[float, float] = (-2.0, 2.0),
    half_edge_range: tuple[float, float] = (0.15, 1.0),
) -> list[Rectangle]:
    """Seeded boxes with centers and edge lengths in fixed ranges; the
    generator is part of the reproducibility contract."""
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = np.random.default_rng([seed, n])
    boxes = []
    for _ in range(count):
        centers = rng.uniform(center_range[0], center_range[1], size=n)
        halves = rng.uniform(half_edge_range[0], half_edge_range[1], size=n)
        boxes.append(Rectangle(tuple(centers - halves), tuple(centers + halves)))
    return boxes
