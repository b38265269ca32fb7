"""Shared fixtures and oracles.

The closures here mirror the gallery expressions' exact evaluation order
(left-associative sums/products, integer powers as repeated multiplication)
so plain evaluation can be compared bit for bit.  The finite-difference
oracle runs in mpmath extended precision: iterated central stencils at
h = 1e-4 cancel catastrophically in float64 for fourth-order mixed
partials, while at 40 digits only the O(h^2) truncation error remains.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest

from mixedsmooth.gallery import gallery_family


def _closure_bump(n, m):
    def f(*xs):
        out = m.mpf(1) if m is mpmath else 1.0
        for t in xs[:n]:
            out = out * (0.5 * (1 - m.tanh(0.5 * (t * t) - 1)))
        return out

    return f


def _closure_gauss(n, m):
    def f(*xs):
        s = xs[0] * xs[0]
        for t in xs[1:n]:
            s = s + t * t
        return m.exp(-s)

    return f


def _closure_poly(n, m):
    def f(*xs):
        out = 1 + xs[0] * xs[0]
        for t in xs[1:n]:
            out = out + t * t
        cross = xs[0]
        for t in xs[1:n]:
            cross = cross * t
        return out + cross

    return f


def _closure_sinexp(n, m):
    def f(*xs):
        out = m.sin(xs[0])
        if n >= 2:
            out = out * m.exp(xs[1])
        if n >= 3:
            out = out * xs[2]
        if n >= 4:
            out = out * m.cos(xs[3])
        return out

    return f


def _closure_loglog(n, m):
    def f(*xs):
        s = xs[0] * xs[0]
        for t in xs[1:n]:
            s = s + t * t
        s = s + 0.0625
        return m.log(m.log(1 + 1 / m.sqrt(s)))

    return f


_CLOSURES = {
    "bump": _closure_bump,
    "gauss": _closure_gauss,
    "poly": _closure_poly,
    "sinexp": _closure_sinexp,
    "loglog": _closure_loglog,
}


def gallery_closure(family: str, n: int, backend=math):
    """Hand-coded closure mirroring the gallery expression's arithmetic.

    ``backend`` is ``math`` for bit-exact float comparison or ``mpmath``
    for the extended-precision finite-difference oracle.
    """
    return _CLOSURES[family](n, backend)


def fd_mixed_partial(f, point, axes, h=1e-4, dps=40):
    """Iterated two-point central stencils for the mixed partial over
    ``axes`` (1-based, distinct), evaluated in mpmath at ``dps`` digits."""
    with mpmath.workdps(dps):
        hh = mpmath.mpf(h)
        pt = [mpmath.mpf(repr(v)) for v in point]

        def rec(p, remaining):
            if not remaining:
                return f(*p)
            ax = remaining[0] - 1
            hi = list(p)
            lo = list(p)
            hi[ax] = hi[ax] + hh
            lo[ax] = lo[ax] - hh
            return (rec(hi, remaining[1:]) - rec(lo, remaining[1:])) / (2 * hh)

        return float(rec(pt, list(axes)))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240812)


GALLERY_FAMILIES = ("bump", "gauss", "poly", "sinexp", "loglog")


@pytest.fixture(scope="session")
def embedding_norms():
    """s1p norms shared by the embedding acceptance criteria: computing
    them once keeps the suite's runtime inside a coffee break."""
    from mixedsmooth.norms import s1p_norm

    cache = {}

    def get(family: str, n: int, p: float):
        key = (family, n, p)
        if key not in cache:
            g = gallery_family(family, n)
            cache[key] = s1p_norm(g.expr, g.support_box, p)
        return cache[key]

    return get
