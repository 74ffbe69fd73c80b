"""Spectral multipliers of the boundary Laplacian -d^2/ds^2.

On equi-arclength samples the boundary Laplacian of a planar curve is exactly
diagonal in the discrete Fourier basis, with eigenvalues sigma_k = (2 pi k/L)^2
for |k| <= N/2.  A multiplier m(sigma) therefore acts by scaling the k-th DFT
bin by m(sigma_k); the real-input transform handles the +-N/2 Nyquist pair as
one symmetric bin, and its inverse is real by construction, so no imaginary
residue can survive.

Two multipliers matter for the Neumann tension: the boost (1 - sigma/mu^2)^-1/2
capped at mu^(1/3) (the cap engages for sigma >= mu^2 - mu^(4/3)), and the
half-wave weight sqrt((1 - h^2 sigma)_+).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FilterError


@dataclass(frozen=True, eq=False)
class BoundaryFunction:
    """Real samples at the N equi-arclength nodes of a boundary discretization."""

    samples: np.ndarray
    perimeter: float

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if len(self.samples) % 2:
            raise ValueError("boundary samples must have even length")

    @property
    def n_samples(self):
        return len(self.samples)


def f_mu(sigma, mu: float):
    """The tension filter: (1 - sigma/mu^2)^(-1/2) for sigma <= mu^2 - mu^(4/3),
    capped at mu^(1/3) beyond.  Continuous at the breakpoint; requires mu > 1."""
    if not mu > 1.0:
        raise ValueError("f_mu requires mu > 1 (breakpoint must be positive)")
    sigma = np.asarray(sigma, dtype=float)
    cap = mu ** (1.0 / 3.0)
    breakpoint_ = mu * mu - mu ** (4.0 / 3.0)
    boost = np.where(sigma <= breakpoint_,
                     (1.0 - np.minimum(sigma, breakpoint_) / (mu * mu)) ** (-0.5),
                     cap)
    return boost if boost.ndim else float(boost)


def half_wave_weight(sigma, h: float):
    """sqrt(max(0, 1 - h^2 sigma)): the semiclassical half-wave weight."""
    if not h > 0.0:
        raise ValueError("h must be positive")
    sigma = np.asarray(sigma, dtype=float)
    w = np.sqrt(np.maximum(0.0, 1.0 - h * h * sigma))
    return w if w.ndim else float(w)


def grid_frequencies(n: int, perimeter: float) -> np.ndarray:
    """Boundary-Laplacian eigenvalues sigma_k = (2 pi k / L)^2 on the rfft bins
    k = 0..N/2 of an N-point equi-arclength grid."""
    k = np.arange(n // 2 + 1)
    return (2.0 * np.pi * k / perimeter) ** 2


def apply_multiplier(f: BoundaryFunction, m) -> BoundaryFunction:
    """Apply the multiplier m(sigma) of the boundary Laplacian to f."""
    out = apply_multiplier_samples(f.samples, f.perimeter, m)
    return BoundaryFunction(samples=out, perimeter=f.perimeter)


def apply_multiplier_samples(samples: np.ndarray, perimeter: float, m) -> np.ndarray:
    """Array form of apply_multiplier; filters along axis 0 (columns are
    independent boundary functions)."""
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[0]
    if n % 2:
        raise ValueError("boundary samples must have even length")
    mvals = evaluate_multiplier(m, grid_frequencies(n, perimeter))
    coeff = np.fft.rfft(samples, axis=0)
    coeff *= mvals if samples.ndim == 1 else mvals[:, None]
    return np.fft.irfft(coeff, n=n, axis=0)


def evaluate_multiplier(m, sigma: np.ndarray) -> np.ndarray:
    """Evaluate a multiplier on the frequency grid, checking finiteness."""
    try:
        vals = np.asarray(m(sigma), dtype=float)
        if vals.shape != sigma.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([float(m(s)) for s in sigma])
    if not np.all(np.isfinite(vals)):
        raise FilterError("spectral multiplier is non-finite on the frequency grid")
    return vals
