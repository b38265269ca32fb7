"""The plain-Sobolev counterexample: why W1_p (p <= n) misses continuity.

In two dimensions u(x) = log(log(1 + 1/|x|)) has a finite first-order
Sobolev norm near the origin yet is unbounded there.  The study truncates
at inner radii r0 and tabulates, per radius,

* ``sup``  -- sampled maximum over the annulus of the r0-smoothed function
  (radius smoothed as sqrt(|x|^2 + r0^2), so evaluation is C-infinity
  through the origin),
* ``w12``  -- the first-order Sobolev norm ||u|| + ||grad u|| (L2) of the
  function over the annulus {r0 < |x| < 1},
* ``s12``  -- the dominating-mixed norm, which adds the mixed partial
  d^2 u / dx dy.

The sup grows without bound and the mixed column diverges while the plain
Sobolev column stabilizes: exactly the gap the mixed-smoothness embedding
closes.  Norm columns integrate the raw function (the annulus already
excludes the singularity; smoothing would only perturb the inner rim),
reduced to radial quadrature with the angular integrals done analytically.
In one dimension the same function fails to stay in W1_2, and the ratio
sup / w12 stays bounded, consistent with the classical one-dimensional
embedding; ``dim=1`` reports that ratio instead of the mixed column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import IndexSubset, Rectangle, sub_rectangle
from .quadrature import refine_until

PASS = "PASS"
FAIL = "FAIL"

CSV_COLUMNS = ("r0", "sup", "w12_norm", "s12_norm")
DEFAULT_RADII = tuple(2.0 ** -k for k in range(4, 13))


def _L(rho):
    return np.log1p(1.0 / rho)


def _f(rho):
    return np.log(_L(rho))


def _fp(rho):
    # d/drho log(log(1 + 1/rho)) = -1 / ((rho^2 + rho) L)
    return -1.0 / ((rho * rho + rho) * _L(rho))


def _fpp(rho):
    L = _L(rho)
    q = rho * rho + rho
    return ((2.0 * rho + 1.0) * L - 1.0) / (q * q * L * L)


def _radial_integral(g, r_lo: float, r_hi: float, tol: float = 1e-10) -> float:
    """Integrate g(r) dr over [r_lo, r_hi] in log-radius (the integrands
    vary on scale r near the inner rim)."""
    seg = Rectangle((math.log(r_lo),), (math.log(r_hi),))
    face = sub_rectangle(seg, IndexSubset((1,), 1))

    def h(points):
        r = np.exp(points[:, 0])
        return g(r) * r

    return refine_until(h, face, tol, max_level=9, order=12).value


@dataclass(frozen=True)
class CounterexampleRow:
    r0: float
    sup: float
    w12: float
    s12: float


@dataclass
class CounterexampleReport:
    dim: int
    rows: list[CounterexampleRow]
    verdict: str
    checks: dict = field(default_factory=dict)

    def csv_rows(self) -> list[tuple[float, float, float, float]]:
        return [(r.r0, r.sup, r.w12, r.s12) for r in self.rows]


def _sampled_sup_smoothed(r0: float, r_hi: float = 1.0, samples: int = 4096) -> float:
    """Max of the smoothed function over the annulus, on a log-spaced radial
    grid with both rims included (the function is radial)."""
    r = np.concatenate([
        np.exp(np.linspace(math.log(r0), math.log(r_hi), samples)),
        [r0, r_hi],
    ])
    rho = np.sqrt(r * r + r0 * r0)
    return float(np.max(_f(rho)))


def counterexample_run(
    inner_radii=DEFAULT_RADII, dim: int = 2, *, tol: float = 1e-9
) -> CounterexampleReport:
    """Tabulate (r0, sup, w12, s12) over the decreasing truncation radii.

    ``dim=2`` is the genuine counterexample; ``dim=1`` runs the same
    function on {r0 < |x| < 1} as a control (there the plain Sobolev norm
    itself blows up, so boundedness of sup/w12 is what the classical
    embedding predicts; the s12 column then equals w12 in the p-power
    combination, reported for completeness).
    """
    radii = [float(r) for r in inner_radii]
    if not radii:
        raise DomainError("need at least one radius")
    if any(not (0.0 < r < 0.5) for r in radii):
        raise DomainError("radii must lie in (0, 1/2)")
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be strictly decreasing")
    if dim not in (1, 2):
        raise DomainError("the study supports dim 1 and 2")

    rows = []
    for r0 in radii:
        sup = _sampled_sup_smoothed(r0)
        if dim == 2:
            a_u = _radial_integral(lambda r: 2.0 * math.pi * r * _f(r) ** 2, r0, 1.0, tol)
            a_g = _radial_integral(lambda r: 2.0 * math.pi * r * _fp(r) ** 2, r0, 1.0, tol)
            # d2u/dxdy = xy (f''/r^2 - f'/r^3); angular integral of (xy)^2 is pi/4 r^4
            a_m = _radial_integral(
                lambda r: (math.pi / 4.0) * (r * _fpp(r) - _fp(r)) ** 2 / r, r0, 1.0, tol
            )
            w12 = math.sqrt(a_u) + math.sqrt(a_g)
            s12 = math.sqrt(a_u + a_g + a_m)
        else:
            a_u = _radial_integral(lambda r: 2.0 * _f(r) ** 2, r0, 1.0, tol)
            a_g = _radial_integral(lambda r: 2.0 * _fp(r) ** 2, r0, 1.0, tol)
            w12 = math.sqrt(a_u) + math.sqrt(a_g)
            s12 = math.sqrt(a_u + a_g)
        rows.append(CounterexampleRow(r0=r0, sup=sup, w12=w12, s12=s12))

    sups = [r.sup for r in rows]
    w = [r.w12 for r in rows]
    s = [r.s12 for r in rows]
    w_inc = [(b - a) / a for a, b in zip(w, w[1:])]
    checks = {
        "sup_strictly_increasing": all(b > a for a, b in zip(sups, sups[1:])),
        "sup_growth_ratio": sups[-1] / sups[0] if sups[0] else math.inf,
        "w12_increments": w_inc,
        "w12_increments_decreasing": all(b < a for a, b in zip(w_inc, w_inc[1:])),
        "s12_strictly_increasing": all(b > a for a, b in zip(s, s[1:])),
        "s12_growth_ratio": s[-1] / s[0] if s[0] else math.inf,
    }
    if dim == 2:
        ok = (
            checks["sup_strictly_increasing"]
            and checks["w12_increments_decreasing"]
            and checks["s12_strictly_increasing"]
        )
    else:
        ratio = [a / b for a, b in zip(sups, w)]
        checks["sup_over_w12_ratio"] = ratio
        checks["sup_over_w12_bounded"] = max(ratio) <= ratio[0] * 1.05
        ok = checks["sup_over_w12_bounded"]
    return CounterexampleReport(
        dim=dim, rows=rows, verdict=PASS if ok else FAIL, checks=checks
    )
