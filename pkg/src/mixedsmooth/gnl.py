"""Assembly and verification of the generalized Newton-Leibniz identity.

For smooth ``u`` on an n-rectangle ``P`` the difference of corner values
equals the sum, over all 2^n - 1 bottom-corner faces, of the integral of
the face's mixed partial.  The identity is checked by computing the exact
left side from corner evaluations and the right side by quadrature; the
residual is the verification target, with relative scaling against
``max(1, |lhs|)`` because gallery values span orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._parallel import run_tasks
from .errors import EvalDomainError, QuadratureNonConvergence
from .expr import Expr, eval_real, free_arity, pin_axes, reflect
from .geometry import (
    IndexSubset,
    Rectangle,
    enumerate_subsets,
    normalize_pair,
    sub_rectangle,
)
from .jets import eval_jet_many
from .quadrature import DEFAULT_ORDER, GridSpec, IntegralResult, integrate_face, refine_until

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class SubsetIntegral:
    subset: IndexSubset
    value: float
    error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class GnlBreakdown:
    """Per-face integrals plus both sides of the identity.

    ``rhs`` is the fsum of the record values in enumeration order
    (cardinality-major, lexicographic), exactly as listed.
    """

    records: tuple[SubsetIntegral, ...]
    lhs: float
    rhs: float
    residual: float
    rectangle: Rectangle | None
    dropped_axes: tuple[int, ...] = ()

    @property
    def relative_residual(self) -> float:
        return self.residual / max(1.0, abs(self.lhs))


def _face_integrand(u: Expr, subset: IndexSubset):
    mask = (1 << len(subset)) - 1

    def f(points: np.ndarray) -> np.ndarray:
        return eval_jet_many(u, points, subset)[:, mask]

    return f


def gnl_rhs(
    u: Expr,
    P: Rectangle,
    grid: GridSpec | None = None,
    *,
    refine_tol: float | None = None,
    max_level: int = 6,
    order: int = DEFAULT_ORDER,
) -> GnlBreakdown:
    """Evaluate every face integral of the identity on ``P``.

    With ``grid`` the integrals use that fixed grid per face (the grid's
    cell counts are broadcast to each face's dimension); with
    ``refine_tol`` each face refines until converged.
    """
    n = P.dim
    if free_arity(u) > n:
        raise EvalDomainError(
            f"expression uses x{free_arity(u)} but the box has dimension {n}"
        )
    records = []
    for subset in enumerate_subsets(n):
        face = sub_rectangle(P, subset)
        f = _face_integrand(u, subset)
        if refine_tol is not None:
            res = refine_until(f, face, refine_tol, max_level=max_level, order=order)
        else:
            g = grid or GridSpec.uniform(len(subset), order=order)
            if len(g.cells_per_axis) != len(subset):
                g = GridSpec(
                    (g.cells_per_axis[0],) * len(subset), g.order
                )
            res = integrate_face(f, face, g)
        records.append(
            SubsetIntegral(subset, res.value, res.error_estimate, res.evaluations)
        )
    lhs = eval_real(u, P.hi) - eval_real(u, P.lo)
    rhs = math.fsum(r.value for r in records)
    return GnlBreakdown(
        records=tuple(records),
        lhs=lhs,
        rhs=rhs,
        residual=abs(lhs - rhs),
        rectangle=P,
    )


@dataclass
class RectangleVerdict:
    rectangle: Rectangle
    verdict: str
    relative_residual: float | None
    detail: str = ""
    breakdown: GnlBreakdown | None = None


@dataclass
class GnlCheckReport:
    verdict: str
    tol: float
    results: list[RectangleVerdict] = field(default_factory=list)

    @property
    def worst(self) -> RectangleVerdict | None:
        scored = [r for r in self.results if r.relative_residual is not None]
        return max(scored, key=lambda r: r.relative_residual) if scored else None


def gnl_verify(
    u: Expr,
    rectangles: list[Rectangle],
    tol: float,
    *,
    quad_tol: float = 1e-10,
    max_level: int = 6,
    order: int = DEFAULT_ORDER,
) -> GnlCheckReport:
    """Check the identity on each rectangle: PASS iff every residual is at
    most ``tol * max(1, |lhs|)``.

    Quadrature non-convergence or an evaluation error marks the rectangle
    INCONCLUSIVE -- a refinement failure must not masquerade as a
    counterexample to the identity.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")

    def one(P: Rectangle) -> RectangleVerdict:
        try:
            bd = gnl_rhs(u, P, refine_tol=quad_tol, max_level=max_level, order=order)
        except QuadratureNonConvergence as exc:
            return RectangleVerdict(P, INCONCLUSIVE, None, f"quadrature: {exc}")
        except EvalDomainError as exc:
            return RectangleVerdict(P, INCONCLUSIVE, None, f"evaluation: {exc}")
        rel = bd.relative_residual
        return RectangleVerdict(P, PASS if rel <= tol else FAIL, rel, breakdown=bd)

    # rectangles are independent; results keep the caller's order
    results = run_tasks([lambda P=P: one(P) for P in rectangles])
    if any(r.verdict == FAIL for r in results):
        overall = FAIL
    elif any(r.verdict == INCONCLUSIVE for r in results):
        overall = INCONCLUSIVE
    else:
        overall = PASS
    return GnlCheckReport(verdict=overall, tol=tol, results=results)


def gnl_for_pair(
    u: Expr,
    x,
    xp,
    grid: GridSpec | None = None,
    *,
    refine_tol: float | None = 1e-10,
    max_level: int = 6,
    order: int = DEFAULT_ORDER,
) -> GnlBreakdown:
    """The identity for an arbitrary point pair.

    Axes with x_i > x'_i are reflected by substituting x_i -> -x_i into the
    expression (so quadrature only ever sees increasing boxes); axes with
    x_i = x'_i are pinned to that shared value, which drops the faces that
    would collapse.  Face records are mapped back to original axis labels.
    """
    n = len(x)
    normalized = normalize_pair(x, xp)
    lhs = eval_real(u, xp) - eval_real(u, x)
    if normalized.empty:
        return GnlBreakdown(
            records=(),
            lhs=lhs,
            rhs=0.0,
            residual=abs(lhs),
            rectangle=None,
            dropped_axes=normalized.dropped_axes,
        )
    pinned = {i: float(x[i - 1]) for i in normalized.dropped_axes}
    reduced, kept = pin_axes(u, pinned, n) if pinned else (u, tuple(range(1, n + 1)))
    flips_reduced = [normalized.transform.flips[i - 1] for i in kept]
    transformed = reflect(reduced, flips_reduced)
    bd = gnl_rhs(
        transformed,
        normalized.rectangle,
        grid,
        refine_tol=refine_tol,
        max_level=max_level,
        order=order,
    )
    records = tuple(
        SubsetIntegral(
            IndexSubset(tuple(kept[t - 1] for t in rec.subset.indices), n),
            rec.value,
            rec.error_estimate,
            rec.evaluations,
        )
        for rec in bd.records
    )
    rhs = math.fsum(r.value for r in records)
    return GnlBreakdown(
        records=records,
        lhs=lhs,
        rhs=rhs,
        residual=abs(lhs - rhs),
        rectangle=normalized.rectangle,
        dropped_axes=normalized.dropped_axes,
    )
