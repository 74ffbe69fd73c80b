"""Closed-form unit-disc spectra and boundary traces of eigenfunctions.

Everything here is independent of the solver pipeline: eigenvalues come from
Bessel zeros, traces from closed-form normalization constants, and every trace
quantity has a second computation route through boundary quadrature or the DFT
filter so the two can be cross-checked.

Modes use the real conventions cos(n theta), sin(n theta) (multiplicity 2 for
n >= 1), unit-normalized in L^2 of the disc.  Key identities on the unit disc:

* Dirichlet: ||d_n u||^2 = 2 E exactly (commutator identity with the radial
  vector field, whose boundary factor max|x| = 1 here);
* Neumann: ||v|_boundary||^2 = 2 mu^2/(mu^2 - n^2), so the half-wave-weighted
  trace norm is exactly sqrt(2) for every nonconstant mode;
* whispering-gallery modes (l = 1) have trace norm growing like mu^(1/3).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import linalg as la
from scipy import special as _sp

from .boundary_filter import apply_multiplier_samples, f_mu, half_wave_weight
from .errors import ConditioningError
from .specfun import bessel_j_zero, bessel_jprime_zero

DIRICHLET = "dirichlet"
NEUMANN = "neumann"

MAX_FREQ = 200.0


@dataclass(frozen=True)
class DiscMode:
    bc: str
    n: int           # angular order
    l: int           # radial index (0 only for the constant Neumann mode)
    frequency: float
    eigenvalue: float
    multiplicity: int
    norm_const: float


class AOperatorNorm(NamedTuple):
    norm: float
    tail_bound: float


def _angular_factor(n):
    return 2.0 * np.pi if n == 0 else np.pi


def _make_mode(bc, n, l):
    if bc == DIRICHLET:
        lam = bessel_j_zero(n, l)
        radial = 0.5 * _sp.jv(n + 1, lam) ** 2
    else:
        mu = bessel_jprime_zero(n, l)
        lam = mu
        radial = 0.5 * (1.0 - n * n / (mu * mu)) * _sp.jv(n, mu) ** 2
    c = 1.0 / np.sqrt(_angular_factor(n) * radial)
    return DiscMode(bc=bc, n=n, l=l, frequency=lam, eigenvalue=lam * lam,
                    multiplicity=1 if n == 0 else 2, norm_const=float(c))


@lru_cache(maxsize=64)
def disc_spectrum(bc: str, freq_max: float) -> tuple:
    """All modes with frequency <= freq_max, ascending.  The Neumann list opens
    with the constant mode (eigenvalue 0, norm constant 1/sqrt(pi))."""
    if bc not in (DIRICHLET, NEUMANN):
        raise ValueError(f"unknown boundary condition {bc!r}")
    if not 0.0 < freq_max <= MAX_FREQ:
        raise ValueError(f"freq_max must lie in (0, {MAX_FREQ:g}]")
    zero = bessel_j_zero if bc == DIRICHLET else bessel_jprime_zero
    modes = []
    if bc == NEUMANN:
        modes.append(DiscMode(bc=NEUMANN, n=0, l=0, frequency=0.0, eigenvalue=0.0,
                              multiplicity=1, norm_const=1.0 / np.sqrt(np.pi)))
    # all positive zeros of J_n and J_n' exceed n, so orders beyond the cutoff
    # cannot contribute
    for n in range(int(np.floor(freq_max)) + 1):
        l = 1
        while zero(n, l) <= freq_max:
            modes.append(_make_mode(bc, n, l))
            l += 1
    modes.sort(key=lambda m: (m.frequency, m.n))
    return tuple(modes)


def boundary_trace_norm(mode: DiscMode) -> float:
    """L^2(boundary) norm of the mode's trace: the normal derivative for
    Dirichlet, the restriction for Neumann.  Closed form."""
    if mode.l == 0:
        return float(np.sqrt(2.0))  # constant mode: w = 1/sqrt(pi) on the circle
    ang = _angular_factor(mode.n)
    lam = mode.frequency
    if mode.bc == DIRICHLET:
        return float(abs(mode.norm_const * lam * _sp.jvp(mode.n, lam)) * np.sqrt(ang))
    return float(abs(mode.norm_const * _sp.jv(mode.n, lam)) * np.sqrt(ang))


def trace_samples(mode: DiscMode, thetas, variant: str = "cos") -> np.ndarray:
    """The trace function sampled at boundary angles (for quadrature routes)."""
    thetas = np.asarray(thetas, dtype=float)
    if mode.l == 0:
        return np.full_like(thetas, mode.norm_const)
    ang = np.cos(mode.n * thetas) if variant == "cos" else np.sin(mode.n * thetas)
    lam = mode.frequency
    if mode.bc == DIRICHLET:
        return mode.norm_const * lam * _sp.jvp(mode.n, lam) * ang
    return mode.norm_const * _sp.jv(mode.n, lam) * ang


def verify_sqrt2(mode: DiscMode, n_samples: int = None) -> float:
    """Half-wave-weighted Neumann trace norm ||(1 - sigma/mu^2)_+^(1/2) w||.

    With n_samples=None this is the closed form (the boundary-Laplacian
    eigenvalue of the n-th harmonic on the unit circle is n^2); otherwise the
    trace is sampled and the weight applied through the DFT filter.  Both
    routes return sqrt(2) for every nonconstant mode.
    """
    if mode.bc != NEUMANN or mode.l == 0:
        raise ValueError("verify_sqrt2 needs a nonconstant Neumann mode")
    mu = mode.frequency
    if n_samples is None:
        return float(half_wave_weight(mode.n ** 2, 1.0 / mu) * boundary_trace_norm(mode))
    thetas = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    w = trace_samples(mode, thetas)
    filtered = apply_multiplier_samples(w, 2.0 * np.pi, lambda s: half_wave_weight(s, 1.0 / mu))
    return float(np.sqrt((2.0 * np.pi / n_samples) * np.sum(filtered ** 2)))


def _trace_columns(modes, thetas):
    """Sampled trace functions, one column per real mode (cos and sin counted
    separately)."""
    cols, freqs, orders = [], [], []
    for m in modes:
        cols.append(trace_samples(m, thetas, "cos"))
        freqs.append(m.frequency)
        orders.append(m.n)
        if m.multiplicity == 2:
            cols.append(trace_samples(m, thetas, "sin"))
            freqs.append(m.frequency)
            orders.append(m.n)
    return np.array(cols).T, np.array(freqs), np.array(orders)


def cluster_operator_norm(bc: str, freq_lo: float, filtered: bool = False,
                          n_samples: int = 512) -> float:
    """Operator norm of sum_j phi_j <phi_j, .> over the unit frequency window
    [freq_lo, freq_lo + 1].

    phi_j are the mode traces (Dirichlet normal derivatives, or Neumann
    restrictions, half-wave weighted per mode when `filtered`).  The norm of a
    sum of rank-one projectors equals the largest eigenvalue of the cross-Gram
    matrix, assembled here with trapezoid inner products on a boundary grid.
    Each filtered Neumann mode contributes exactly 2 = (sqrt 2)^2 on its own.
    """
    spectrum = disc_spectrum(bc, freq_lo + 1.0)
    window = [m for m in spectrum if freq_lo <= m.frequency <= freq_lo + 1.0 and m.l > 0]
    if not window:
        return 0.0
    thetas = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    cols, freqs, _ = _trace_columns(window, thetas)
    if filtered:
        if bc != NEUMANN:
            raise ValueError("the half-wave filter applies to Neumann traces only")
        for idx in range(cols.shape[1]):
            cols[:, idx] = apply_multiplier_samples(
                cols[:, idx], 2.0 * np.pi,
                lambda s, mu=freqs[idx]: half_wave_weight(s, 1.0 / mu))
    gram = (2.0 * np.pi / n_samples) * (cols.T @ cols)
    return float(la.eigvalsh(gram)[-1])


def a_operator_norm(bc: str, e: float, freq_cut: float, filtered: bool = False,
                    n_samples: int = 1024) -> AOperatorNorm:
    """Norm of the truncated resolvent-trace operator
    sum_j phi_j <phi_j, .> / (E - E_j)^2 over modes with frequency <= freq_cut,
    plus a tail-bound estimate for the discarded modes.

    For Dirichlet phi_j = psi_j; for Neumann phi_j is w_j, divided by the
    tension boost F_mu (mu = sqrt(E)) harmonic-wise when `filtered` — the
    inverse boost is exactly the operator whose unit applications the tension
    route accumulates.  The reciprocal of the squared minimum tension equals
    this norm (up to basis truncation on the tension side and the reported
    tail bound on this side).
    """
    if not freq_cut >= 2.0 * np.sqrt(e):
        raise ValueError("freq_cut must be at least 2 sqrt(E)")
    spectrum = disc_spectrum(bc, freq_cut)
    gaps = np.array([abs(e - m.eigenvalue) for m in spectrum])
    if gaps.min() < 1e-8 * max(1.0, e):
        raise ConditioningError(f"E = {e} is too close to a disc eigenvalue")
    thetas = np.linspace(0.0, 2.0 * np.pi, n_samples, endpoint=False)
    cols, freqs, orders = _trace_columns(spectrum, thetas)
    if filtered:
        if bc != NEUMANN:
            raise ValueError("the F filter applies to Neumann traces only")
        mu = np.sqrt(e)
        if not mu > 1.0:
            raise ValueError("filtered route requires E > 1")
        cols = cols / f_mu(orders.astype(float) ** 2, mu)[None, :]
    eigs = np.array([m.eigenvalue for m in spectrum])
    denom = e - np.repeat(eigs, [m.multiplicity for m in spectrum])
    scaled = cols / denom[None, :]
    gram = (2.0 * np.pi / n_samples) * (scaled.T @ scaled)
    norm = float(la.eigvalsh(gram)[-1])
    return AOperatorNorm(norm=norm, tail_bound=_tail_bound(bc, e, freq_cut))


def _tail_bound(bc, e, freq_cut):
    """Conservative bound on the discarded modes' contribution, from the
    growth of trace norms: unit windows beyond the cutoff have cluster norm
    <= 2 (m+1)^2 (Dirichlet, trace norms ~ sqrt(2 E)) or <= 3 (m+1)^(2/3)
    (Neumann, whispering-gallery growth; the filtered traces are no larger)."""
    m = freq_cut + np.arange(0.0, 100_000.0)
    if bc == DIRICHLET:
        wnorm = 2.0 * (m + 1.0) ** 2
        remainder = 2.5 / m[-1]
    else:
        wnorm = 3.0 * (m + 1.0) ** (2.0 / 3.0)
        remainder = 0.0
    return float(np.sum(wnorm / (m * m - e) ** 2) + remainder)
