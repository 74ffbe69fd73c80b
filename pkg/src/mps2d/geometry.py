"""Star-shaped planar domains and spectrally accurate boundary/interior quadratures.

Domains are given by a radial trigonometric polynomial
``r(theta) = 1 + sum_k (a_k cos k theta + b_k sin k theta)``; the unit disc is
the special case of empty coefficient lists.  Boundary nodes are placed
*equispaced in arclength* so that the boundary Laplacian -d^2/ds^2 is exactly
diagonal in the discrete Fourier basis (see :mod:`mps2d.boundary_filter`).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DiscretizationError, InvalidDomainError

_VALIDATION_SAMPLES = 2048


@dataclass(frozen=True)
class DomainSpec:
    """Radial trigonometric-polynomial domain; immutable and hashable."""

    radial_cos: tuple = ()
    radial_sin: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "radial_cos", tuple(float(a) for a in self.radial_cos))
        object.__setattr__(self, "radial_sin", tuple(float(b) for b in self.radial_sin))
        theta = np.linspace(0.0, 2.0 * np.pi, _VALIDATION_SAMPLES, endpoint=False)
        if np.min(self.radius(theta)) <= 0.0:
            raise InvalidDomainError("radial function must be strictly positive")

    @property
    def is_disc(self):
        return not self.radial_cos and not self.radial_sin

    @property
    def max_harmonic(self):
        return max(len(self.radial_cos), len(self.radial_sin))

    def radius(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = np.ones_like(theta)
        for k, a in enumerate(self.radial_cos, start=1):
            r += a * np.cos(k * theta)
        for k, b in enumerate(self.radial_sin, start=1):
            r += b * np.sin(k * theta)
        return r

    def radius_deriv(self, theta):
        theta = np.asarray(theta, dtype=float)
        dr = np.zeros_like(theta)
        for k, a in enumerate(self.radial_cos, start=1):
            dr -= a * k * np.sin(k * theta)
        for k, b in enumerate(self.radial_sin, start=1):
            dr += b * k * np.cos(k * theta)
        return dr

    def speed(self, theta):
        """|x'(theta)| = sqrt(r^2 + r'^2), the arclength density."""
        return np.hypot(self.radius(theta), self.radius_deriv(theta))

    def point(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = self.radius(theta)
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def outward_normal(self, theta):
        """Unit outward normal: the tangent x'(theta) rotated by -pi/2."""
        theta = np.asarray(theta, dtype=float)
        r = self.radius(theta)
        dr = self.radius_deriv(theta)
        tx = dr * np.cos(theta) - r * np.sin(theta)
        ty = dr * np.sin(theta) + r * np.cos(theta)
        n = np.stack([ty, -tx], axis=-1)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def contains(self, points):
        """Point-in-domain test rho <= r(theta) (boundary counts as inside)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        rho = np.hypot(points[..., 0], points[..., 1])
        theta = np.arctan2(points[..., 1], points[..., 0])
        return rho <= self.radius(theta)


@dataclass(frozen=True, eq=False)
class BoundaryDiscretization:
    """N boundary nodes equispaced in arclength, with outward normals and
    periodic-trapezoid weights L/N."""

    nodes: np.ndarray       # (N, 2)
    normals: np.ndarray     # (N, 2), unit outward
    weights: np.ndarray     # (N,), each L/N
    perimeter: float
    arclengths: np.ndarray  # (N,), s_i = i L / N
    thetas: np.ndarray      # (N,), polar angles of the nodes

    @property
    def n_nodes(self):
        return len(self.nodes)


@dataclass(frozen=True, eq=False)
class InteriorQuadrature:
    """Tensor quadrature under the polar map (rho, theta) -> rho r(theta) e(theta)."""

    points: np.ndarray   # (M, 2), strictly inside the domain
    weights: np.ndarray  # (M,), positive, summing to area


def perimeter(spec: DomainSpec) -> float:
    """Arclength of the boundary, by periodic trapezoid with adaptive doubling
    until successive values agree to 1e-13 relative."""
    if spec.is_disc:
        return 2.0 * np.pi
    n = 64
    prev = _trapezoid_speed(spec, n)
    while n <= 2 ** 22:
        n *= 2
        cur = _trapezoid_speed(spec, n)
        if abs(cur - prev) <= 1e-13 * abs(cur):
            return cur
        prev = cur
    raise DiscretizationError("perimeter quadrature did not converge")


def _trapezoid_speed(spec, n):
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return (2.0 * np.pi / n) * float(np.sum(spec.speed(theta)))


def area(spec: DomainSpec) -> float:
    """Enclosed area.  For a radial domain x.n ds = r^2 dtheta exactly, so this
    equals the boundary integral (1/2) oint x.n ds."""
    n = max(64, 4 * spec.max_harmonic + 4)
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    return 0.5 * (2.0 * np.pi / n) * float(np.sum(spec.radius(theta) ** 2))


@lru_cache(maxsize=64)
def _arclength_series(spec: DomainSpec):
    """Fourier representation of the cumulative arclength s(theta).

    Samples the speed, keeps harmonics down to relative size 1e-17, and
    integrates term by term:  s(theta) = c0 theta + sum_k 2 Re[c_k (e^{ik
    theta} - 1)/(ik)].  Returns (L, k_modes, integ_coeffs) with L = 2 pi c0.
    """
    n = max(256, 16 * spec.max_harmonic)
    while True:
        theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        c = np.fft.rfft(spec.speed(theta)) / n
        # resolved when the top quarter of the spectrum is at round-off level
        if n >= 2 ** 20 or np.max(np.abs(c[3 * len(c) // 4:])) <= 1e-15 * c[0].real:
            break
        n *= 2
    c0 = c[0].real
    k = np.arange(1, len(c) - 1)           # drop the Nyquist bin (round-off here)
    keep = np.abs(c[1:-1]) > 1e-17 * c0
    k = k[keep]
    coeffs = c[1:-1][keep] / (1j * k)
    return 2.0 * np.pi * c0, k, coeffs


def _arclength(spec, theta):
    """Cumulative arclength s(theta) from the cached Fourier series."""
    L, k, coeffs = _arclength_series(spec)
    theta = np.asarray(theta, dtype=float)
    s = (L / (2.0 * np.pi)) * theta
    if len(k):
        phase = np.exp(1j * np.outer(theta, k))
        s = s + 2.0 * np.real((phase - 1.0) @ coeffs)
    return s


def equal_arclength_thetas(spec: DomainSpec, n: int, tol: float = 1e-13,
                           max_iter: int = 50) -> np.ndarray:
    """Angles theta_i with s(theta_i) = i L / n, by Newton on the arclength."""
    if spec.is_disc:
        return np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    L, _, _ = _arclength_series(spec)
    targets = np.arange(n) * (L / n)
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    for _ in range(max_iter):
        step = (_arclength(spec, theta) - targets) / spec.speed(theta)
        theta -= step
        if np.max(np.abs(step)) <= tol:
            return theta
    raise DiscretizationError(
        f"arclength reparameterization did not converge in {max_iter} Newton iterations")


def build_boundary(spec: DomainSpec, n: int) -> BoundaryDiscretization:
    """Equi-arclength boundary discretization with N = n nodes (n even, >= 16)."""
    if n < 16 or n % 2:
        raise ValueError("boundary node count must be even and at least 16")
    L = _arclength_series(spec)[0] if not spec.is_disc else 2.0 * np.pi
    theta = equal_arclength_thetas(spec, n)
    return BoundaryDiscretization(
        nodes=spec.point(theta),
        normals=spec.outward_normal(theta),
        weights=np.full(n, L / n),
        perimeter=L,
        arclengths=np.arange(n) * (L / n),
        thetas=theta,
    )


def build_interior(spec: DomainSpec, n_r: int, n_t: int) -> InteriorQuadrature:
    """Gauss-Legendre (radial) x periodic trapezoid (angular) quadrature for
    integrals over the domain; weight = w_gl (2 pi / n_t) rho r(theta)^2."""
    if n_r < 4:
        raise ValueError("need at least 4 radial quadrature points")
    if n_t < 8:
        raise ValueError("need at least 8 angular quadrature points")
    x, w = np.polynomial.legendre.leggauss(n_r)
    rho = 0.5 * (x + 1.0)
    w_rho = 0.5 * w
    theta = np.linspace(0.0, 2.0 * np.pi, n_t, endpoint=False)
    r = spec.radius(theta)
    pts = np.empty((n_r * n_t, 2))
    rr = np.outer(rho, r)                # (n_r, n_t) radii
    pts[:, 0] = (rr * np.cos(theta)).ravel()
    pts[:, 1] = (rr * np.sin(theta)).ravel()
    wts = (np.outer(rho * w_rho, r ** 2) * (2.0 * np.pi / n_t)).ravel()
    return InteriorQuadrature(points=pts, weights=wts)
