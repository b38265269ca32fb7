"""Exact mixed partial derivatives through a nilpotent jet algebra.

For an active axis set ``{i1 < ... < ik}`` every value is carried as
``2^k`` coefficients indexed by sub-subsets ``S`` (bitmask over positions
in the active list): coefficient ``S`` is the mixed partial
``d^|S| u / dx_S`` at the base point.  Each active direction is nilpotent
of order two (``e_i^2 = 0``), so products follow the square-free Leibniz
rule with no truncation error, and composing a smooth ``f`` needs only the
finitely many derivatives ``f^(m)(v), m <= k``.

Coefficients may be Python floats (single point) or numpy arrays (a batch
of points); the arithmetic below works elementwise for both.  On the
single-point path the value lane composes with exactly the same float
operations as :func:`mixedsmooth.expr.eval_real`, so coefficient ``{}``
equals plain evaluation bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, EvalDomainError
from .expr import Binary, Constant, Expr, Pow, Unary, Variable
from .geometry import IndexSubset

MAX_ACTIVE = 16  # dense 2^k storage; practical integrands use k <= 6


@lru_cache(maxsize=64)
def _mul_plan(k: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """For each target mask S, the unordered submask pairs (A, B) with
    A | B = S, A & B = 0, A <= B, in ascending A.  Pairing A with its
    complement keeps the per-pair sum symmetric, so jet products commute
    bit for bit."""
    plans = []
    for s in range(1 << k):
        pairs = []
        a = s
        while True:  # descending submask walk, reversed below
            b = s ^ a
            if a <= b:
                pairs.append((a, b))
            if a == 0:
                break
            a = (a - 1) & s
        pairs.reverse()
        plans.append(tuple(pairs))
    return tuple(plans)


def _is_zero(v) -> bool:
    """Exact scalar zero: lanes never touched by a computation stay 0.0 and
    every operation skips them, which is what makes jets of functions with
    few active variables cheap inside high-dimensional quadrature."""
    return type(v) is float and v == 0.0


def _mul_coeffs(ca: list, cb: list, k: int) -> list:
    out = []
    for pairs in _mul_plan(k):
        acc = None
        for a, b in pairs:
            if a == b:
                term = None if _is_zero(ca[a]) or _is_zero(cb[b]) else ca[a] * cb[b]
            else:
                # symmetric two-product form keeps a*b == b*a bit for bit
                t1 = None if _is_zero(ca[a]) or _is_zero(cb[b]) else ca[a] * cb[b]
                t2 = None if _is_zero(ca[b]) or _is_zero(cb[a]) else ca[b] * cb[a]
                if t1 is None:
                    term = t2
                elif t2 is None:
                    term = t1
                else:
                    term = t1 + t2
            if term is not None:
                acc = term if acc is None else acc + term
        out.append(0.0 if acc is None else acc)
    return out


def _scale_coeffs(c: list, s) -> list:
    if _is_zero(s):
        return [0.0] * len(c)
    return [0.0 if _is_zero(ci) else s * ci for ci in c]


def _add_coeffs(ca: list, cb: list) -> list:
    out = []
    for a, b in zip(ca, cb):
        if _is_zero(a):
            out.append(b)
        elif _is_zero(b):
            out.append(a)
        else:
            out.append(a + b)
    return out


def _neg_coeffs(c: list) -> list:
    return [0.0 if _is_zero(ci) else -ci for ci in c]


def _lift_const(v, k: int) -> list:
    c = [0.0] * (1 << k)
    c[0] = v
    return c


def _zero_like(v):
    if isinstance(v, np.ndarray):
        return np.zeros_like(v)
    return 0.0


def _call(name: str, v):
    if isinstance(v, np.ndarray):
        return getattr(np, name)(v)
    return getattr(math, name)(v)


@lru_cache(maxsize=64)
def _tanh_derivative_polys(order: int) -> tuple[tuple[float, ...], ...]:
    """Coefficients (ascending powers of t = tanh v) of tanh^(m), m=1..order,
    via P_{m+1} = P_m' * (1 - t^2)."""
    polys = []
    current = (1.0, 0.0, -1.0)  # 1 - t^2
    for _ in range(order):
        polys.append(current)
        dp = tuple(current[j] * j for j in range(1, len(current)))
        # multiply dp by (1 - t^2)
        prod = [0.0] * (len(dp) + 2)
        for j, cj in enumerate(dp):
            prod[j] += cj
            prod[j + 2] -= cj
        current = tuple(prod)
    return tuple(polys)


def _polyval(coeffs: Sequence[float], t):
    acc = _zero_like(t)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _derivative_ladder(op: str, v, k: int, node=None):
    """[f(v), f'(v), ..., f^(k)(v)] for the supported unary op."""
    if op == "sin":
        s, c = _call("sin", v), _call("cos", v)
        cycle = (s, c, -s, -c)
        return [cycle[m % 4] for m in range(k + 1)]
    if op == "cos":
        s, c = _call("sin", v), _call("cos", v)
        cycle = (c, -s, -c, s)
        return [cycle[m % 4] for m in range(k + 1)]
    if op == "exp":
        ev = _call("exp", v)
        return [ev] * (k + 1)
    if op == "log":
        _require_positive(v, "log", node)
        out = [_call("log", v)]
        vm = v
        for m in range(1, k + 1):
            sign = 1.0 if m % 2 == 1 else -1.0
            out.append(sign * math.factorial(m - 1) / vm)
            vm = vm * v
        return out
    if op == "sqrt":
        _require_positive(v, "sqrt", node)
        root = _call("sqrt", v)
        out = [root]
        coeff = 0.5
        power = root / v  # v^{-1/2}
        for m in range(1, k + 1):
            out.append(coeff * power)
            coeff *= 0.5 - m
            power = power / v
        return out
    if op == "tanh":
        t = _call("tanh", v)
        out = [t]
        for poly in _tanh_derivative_polys(k)[:k]:
            out.append(_polyval(poly, t))
        return out
    if op == "recip":
        _require_nonzero(v, node)
        out = []
        vp = v
        sign = 1.0
        for m in range(k + 1):
            out.append(sign * math.factorial(m) / vp)
            vp = vp * v
            sign = -sign
        return out
    raise DomainError(f"unsupported unary op for jets: {op!r}")


def _require_positive(v, name: str, node):
    if isinstance(v, np.ndarray):
        if np.any(v <= 0.0):
            raise EvalDomainError(f"{name} of nonpositive value", node=node)
    elif v <= 0.0:
        raise EvalDomainError(f"{name} of nonpositive value {v}", node=node)


def _require_nonzero(v, node):
    if isinstance(v, np.ndarray):
        if np.any(v == 0.0):
            raise EvalDomainError("division by zero", node=node)
    elif v == 0.0:
        raise EvalDomainError("division by zero", node=node)


def _unary_coeffs(op: str, c: list, k: int, node=None) -> list:
    """Compose f with a jet: sum_m f^(m)(v)/m! * eps^m, eps the nilpotent part.

    Exact, not truncated: eps^(k+1) = 0 in this algebra.  Powers of the
    nilpotent part are computed first so the derivative ladder stops at the
    true nilpotency degree (a jet touching only one variable dies at eps^2).
    """
    if op == "neg":
        return _neg_coeffs(c)
    v = c[0]
    eps = list(c)
    eps[0] = 0.0
    powers = []
    if not all(_is_zero(ci) for ci in eps):
        powers.append(eps)
        for _ in range(2, k + 1):
            nxt = _mul_coeffs(powers[-1], eps, k)
            if all(_is_zero(ci) for ci in nxt):
                break
            powers.append(nxt)
    ladder = _derivative_ladder(op, v, len(powers), node=node)
    out = _lift_const(ladder[0], k)
    factorial = 1.0
    for m, power in enumerate(powers, start=1):
        factorial *= m
        contrib = _scale_coeffs(_scale_coeffs(power, 1.0 / factorial), ladder[m])
        out = _add_coeffs(out, contrib)
    return out


@dataclass(frozen=True)
class MixedJet:
    """Value plus all mixed partials of order <= 1 per active variable.

    ``coeffs[mask]`` is the partial with respect to the active variables
    whose positions are set in ``mask`` (coefficient 0 is the plain value).
    """

    active: IndexSubset
    coeffs: np.ndarray  # shape (2^k,) or (N, 2^k)

    def __post_init__(self):
        expected = 1 << len(self.active)
        if self.coeffs.shape[-1] != expected:
            raise DomainError(
                f"coefficient length {self.coeffs.shape[-1]} != 2^{len(self.active)}"
            )

    @property
    def value(self):
        return self.coeffs[..., 0]

    def partial(self, subset: IndexSubset):
        """Mixed partial over ``subset`` (must be contained in active)."""
        pos = {i: t for t, i in enumerate(self.active.indices)}
        mask = 0
        for i in subset.indices:
            if i not in pos:
                raise DomainError(f"axis {i} is not active in this jet")
            mask |= 1 << pos[i]
        return self.coeffs[..., mask]

    @property
    def highest(self):
        """The full mixed partial over every active axis."""
        return self.coeffs[..., -1]


def jet_lift(point: Sequence[float], active: IndexSubset):
    """Seed values for each variable: active variables become jets with a
    unit first-order coefficient, inactive variables stay plain scalars."""
    if active.indices[-1] > len(point):
        raise DomainError(
            f"active axis {active.indices[-1]} exceeds point length {len(point)}"
        )
    k = len(active)
    pos = {i: t for t, i in enumerate(active.indices)}
    seeds = []
    for j in range(1, len(point) + 1):
        if j in pos:
            c = _lift_const(float(point[j - 1]), k)
            c[1 << pos[j]] = 1.0
            seeds.append(MixedJet(active, np.asarray(c, dtype=float)))
        else:
            seeds.append(float(point[j - 1]))
    return tuple(seeds)


def _check_same_active(a: MixedJet, b: MixedJet):
    if a.active != b.active:
        raise DomainError(f"active sets differ: {a.active} vs {b.active}")


def jet_mul(a: MixedJet, b: MixedJet) -> MixedJet:
    """Leibniz product over square-free multi-indices; exact, and bitwise
    commutative thanks to the symmetric pair enumeration."""
    _check_same_active(a, b)
    k = len(a.active)
    ca = [a.coeffs[..., m] for m in range(1 << k)]
    cb = [b.coeffs[..., m] for m in range(1 << k)]
    out = _mul_coeffs(ca, cb, k)
    return MixedJet(a.active, np.stack(out, axis=-1))


def jet_add(a: MixedJet, b: MixedJet) -> MixedJet:
    _check_same_active(a, b)
    return MixedJet(a.active, a.coeffs + b.coeffs)


def jet_unary(op: str, a: MixedJet) -> MixedJet:
    """Apply one of neg/sin/cos/exp/log/sqrt/tanh to a jet."""
    k = len(a.active)
    c = [a.coeffs[..., m] for m in range(1 << k)]
    out = _unary_coeffs(op, c, k)
    return MixedJet(a.active, np.stack(np.broadcast_arrays(*out), axis=-1))


def jet_constant(value: float, active: IndexSubset) -> MixedJet:
    return MixedJet(active, np.asarray(_lift_const(float(value), len(active))))


# ---------------------------------------------------------------------------
# expression evaluation over the jet algebra
#
# Internally a value is either a plain scalar/array (subtree independent of
# every active variable) or a coefficient list; subtrees that never touch an
# active variable stay scalar, which is what makes high-dimensional
# quadrature affordable.


def _is_jet(v) -> bool:
    return isinstance(v, list)


def _to_jet(v, k: int) -> list:
    return v if _is_jet(v) else _lift_const(v, k)


def _jet_eval(e: Expr, seeds, pts_or_point, k: int):
    if isinstance(e, Constant):
        return e.value
    if isinstance(e, Variable):
        return seeds[e.index - 1]
    if isinstance(e, Unary):
        v = _jet_eval(e.child, seeds, pts_or_point, k)
        if not _is_jet(v):
            if e.op == "neg":
                return -v
            return _derivative_ladder(e.op, v, 0, node=e)[0]
        return _unary_coeffs(e.op, v, k, node=e)
    if isinstance(e, Binary):
        a = _jet_eval(e.left, seeds, pts_or_point, k)
        b = _jet_eval(e.right, seeds, pts_or_point, k)
        ja, jb = _is_jet(a), _is_jet(b)
        if e.op == "+":
            if ja or jb:
                return _add_coeffs(_to_jet(a, k), _to_jet(b, k))
            return a + b
        if e.op == "-":
            if ja or jb:
                return _add_coeffs(_to_jet(a, k), _neg_coeffs(_to_jet(b, k)))
            return a - b
        if e.op == "*":
            if ja and jb:
                return _mul_coeffs(a, b, k)
            if ja:
                return _scale_coeffs(a, b)
            if jb:
                return _scale_coeffs(b, a)
            return a * b
        if e.op == "/":
            if not jb:
                _require_nonzero(b, e)
                if not ja:
                    return a / b
                out = _scale_coeffs(a, 1.0 / b)
                out[0] = a[0] / b  # one rounding, matching plain evaluation
                return out
            inv = _unary_coeffs("recip", b, k, node=e)
            out = _mul_coeffs(_to_jet(a, k), inv, k)
            out[0] = (a[0] if ja else a) / b[0]
            return out
        raise TypeError(f"unknown binary op {e.op!r}")
    if isinstance(e, Pow):
        base = _jet_eval(e.base, seeds, pts_or_point, k)
        if e.exponent == 0:
            return 1.0
        if not _is_jet(base):
            out = base
            for _ in range(e.exponent - 1):
                out = out * base
            return out
        out = base
        for _ in range(e.exponent - 1):
            out = _mul_coeffs(out, base, k)
        return out
    raise TypeError(f"not an Expr node: {e!r}")


def eval_jet(e: Expr, point: Sequence[float], active: IndexSubset) -> MixedJet:
    """Evaluate ``e`` and every mixed partial over ``active`` at one point."""
    k = len(active)
    if k > MAX_ACTIVE:
        raise DomainError(f"at most {MAX_ACTIVE} active axes supported, got {k}")
    seeds = _lift_point_scalars(point, active)
    try:
        out = _jet_eval(e, seeds, point, k)
    except EvalDomainError as exc:
        if exc.point is None:
            exc.point = tuple(point)
        raise
    except OverflowError as exc:
        raise EvalDomainError(f"overflow: {exc}", node=e, point=tuple(point)) from exc
    coeffs = _to_jet(out, k)
    return MixedJet(active, np.asarray([float(c) for c in coeffs]))


def _lift_point_scalars(point: Sequence[float], active: IndexSubset):
    k = len(active)
    if active.indices[-1] > len(point):
        raise DomainError(
            f"active axis {active.indices[-1]} exceeds point length {len(point)}"
        )
    pos = {i: t for t, i in enumerate(active.indices)}
    seeds = []
    for j in range(1, len(point) + 1):
        vj = float(point[j - 1])
        if j in pos:
            c = _lift_const(vj, k)
            c[1 << pos[j]] = 1.0
            seeds.append(c)
        else:
            seeds.append(vj)
    return tuple(seeds)


def eval_jet_many(e: Expr, points, active: IndexSubset) -> np.ndarray:
    """Vectorized :func:`eval_jet`: points (N, n) -> coefficients (N, 2^k)."""
    k = len(active)
    if k > MAX_ACTIVE:
        raise DomainError(f"at most {MAX_ACTIVE} active axes supported, got {k}")
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise DomainError("points must be a 2-D array of shape (N, n)")
    n = points.shape[1]
    if active.indices[-1] > n:
        raise DomainError(f"active axis {active.indices[-1]} exceeds point width {n}")
    pos = {i: t for t, i in enumerate(active.indices)}
    seeds = []
    for j in range(1, n + 1):
        col = points[:, j - 1]
        if j in pos:
            c = _lift_const(col, k)
            c[1 << pos[j]] = 1.0
            seeds.append(c)
        else:
            seeds.append(col)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = _to_jet(_jet_eval(e, tuple(seeds), points, k), k)
    cols = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in out])
    stacked = np.stack(cols, axis=-1)
    if stacked.ndim == 1:
        stacked = np.broadcast_to(stacked, (points.shape[0], 1 << k)).copy()
    return stacked
