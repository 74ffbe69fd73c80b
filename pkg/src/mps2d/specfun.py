"""Cylindrical Bessel functions J_n, Y_0, Y_1 and zeros of J_n and J_n'.

Evaluation is backed by scipy.special; zeros start from library tables and are
polished by safeguarded Newton on our own J_n so the returned points satisfy
|J_n| (resp. |J_n'|) at round-off level.  Only Y_0 and Y_1 are provided: the
fundamental solution (1/4) Y_0(k|x-y|) and its gradient need no higher orders.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from .errors import EvaluationDomainError

MAX_ORDER = 200
MAX_ARGUMENT = 1.0e5
MAX_ZERO_INDEX = 500


@dataclass(frozen=True)
class BesselEval:
    value: float
    derivative: float


def bessel_j(n: int, x: float) -> BesselEval:
    """J_n(x) and J_n'(x) for integer order 0 <= n <= 200, 0 <= x <= 1e5."""
    n = _check_order(n)
    x = float(x)
    if not 0.0 <= x <= MAX_ARGUMENT:
        raise EvaluationDomainError(f"bessel_j argument {x} outside [0, {MAX_ARGUMENT:g}]")
    return BesselEval(float(_sp.jv(n, x)), float(_sp.jvp(n, x)))


def bessel_y(n: int, x: float) -> BesselEval:
    """Y_n(x) and Y_n'(x) for n in {0, 1}, x > 0 (logarithmic singularity at 0)."""
    if n not in (0, 1):
        raise EvaluationDomainError("only orders 0 and 1 of Y are supported")
    x = float(x)
    if not x > 0.0:
        raise EvaluationDomainError("bessel_y requires a strictly positive argument")
    if n == 0:
        return BesselEval(float(_sp.y0(x)), float(-_sp.y1(x)))
    return BesselEval(float(_sp.y1(x)), float(_sp.y0(x) - _sp.y1(x) / x))


@lru_cache(maxsize=200_000)
def bessel_j_zero(n: int, l: int) -> float:
    """l-th positive zero j_{n,l} of J_n, polished to ~1e-15 relative."""
    n, l = _check_order(n), _check_index(l)
    x = float(_sp.jn_zeros(n, l)[-1])
    return _polish(x, lambda t: _sp.jv(n, t), lambda t: _sp.jvp(n, t))


@lru_cache(maxsize=200_000)
def bessel_jprime_zero(n: int, l: int) -> float:
    """l-th positive zero mu_{n,l} of J_n'.  For n = 0 the trivial zero at the
    origin is excluded (mu_{0,1} ~ 3.8317)."""
    n, l = _check_order(n), _check_index(l)
    x = float(_sp.jnp_zeros(n, l)[-1])
    # J_n'' from the Bessel equation
    return _polish(x, lambda t: _sp.jvp(n, t),
                   lambda t: -_sp.jvp(n, t) / t - (1.0 - n * n / (t * t)) * _sp.jv(n, t))


def _polish(x, f, fp, max_steps=8):
    """Safeguarded Newton: refuse steps larger than half the zero spacing."""
    for _ in range(max_steps):
        step = f(x) / fp(x)
        if abs(step) > 1.0:
            break
        x -= step
        if abs(step) <= 4e-16 * x:
            break
    return x


def _check_order(n):
    n = int(n)
    if not 0 <= n <= MAX_ORDER:
        raise EvaluationDomainError(f"order {n} outside [0, {MAX_ORDER}]")
    return n


def _check_index(l):
    l = int(l)
    if not 1 <= l <= MAX_ZERO_INDEX:
        raise EvaluationDomainError(f"zero index {l} outside [1, {MAX_ZERO_INDEX}]")
    return l


# -- vectorized helpers used by the basis and oracle modules ------------------

def bessel_j_table(max_order: int, x) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of J_0..J_max_order at the points x.

    Returns arrays of shape (max_order + 1, len(x)).  Evaluation is by the
    backward (Miller) recurrence normalized with J_0 + 2 sum J_2k = 1, which
    amortizes to a few flops per (order, point) pair; arguments too large for
    a reasonable recurrence start fall back to broadcast library calls.  The
    derivative table comes from J_n' = J_{n-1} - (n/x) J_n.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xmax = x.max() if len(x) else 0.0
    if xmax > 500.0:
        orders = np.arange(max_order + 2)
        j = _sp.jv(orders[:, None], x[None, :])
    else:
        j = _miller_j_table(max_order + 1, x)
    jp = np.empty((max_order + 1, len(x)))
    jp[0] = -j[1]
    n = np.arange(1, max_order + 1)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        jp[1:] = j[0:max_order] - n / x[None, :] * j[1:max_order + 1]
    if np.any(x == 0.0):
        at0 = x == 0.0
        jp[1:, at0] = 0.0
        if max_order >= 1:
            jp[1, at0] = 0.5
    return j[:max_order + 1], jp


def _miller_j_table(max_order, x):
    """J_0..J_max_order by backward recurrence, vectorized over the points."""
    n_pts = len(x)
    rows = np.zeros((max_order + 1, n_pts))
    pos = x > 0.0
    rows[0, ~pos] = 1.0
    xp = x[pos]
    if not len(xp):
        return rows
    xmax = xp.max()
    ntop = max(max_order, int(np.ceil(xmax + 14.0 * xmax ** (1.0 / 3.0)))) + 32
    inv_x = 1.0 / xp
    jp1 = np.zeros(len(xp))
    jn = np.full(len(xp), 1e-280)
    acc = np.zeros(len(xp))          # accumulates J_0 + 2 sum_{k>=1} J_{2k}
    body = np.zeros((max_order + 1, len(xp)))
    for n in range(ntop, 0, -1):
        jm1 = (2.0 * n) * inv_x * jn - jp1
        jp1 = jn
        jn = jm1
        m = n - 1
        if m <= max_order:
            body[m] = jn
        if m % 2 == 0:
            acc += jn if m == 0 else 2.0 * jn
        if (n & 15) == 0:
            big = np.abs(jn) > 1e250
            if big.any():
                scale = np.where(big, 1e-250, 1.0)
                jn *= scale
                jp1 *= scale
                acc *= scale
                body[m:] *= scale
    rows[:, pos] = body / acc
    return rows
