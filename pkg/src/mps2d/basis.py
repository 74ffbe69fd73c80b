"""Families of exact Helmholtz particular solutions and their boundary data.

Two families are supported at energy E (wavenumber k = sqrt(E)):

* MFS: real fundamental-solution charges (1/4) Y_0(k |x - y_p|) centered at
  points y_p outside the domain, placed at a constant normal offset from
  equi-arclength boundary stations;
* Fourier-Bessel: J_n(k rho) cos(n theta) for n = 0..max_order and
  J_n(k rho) sin(n theta) for n = 1..max_order (columns in that order,
  P = 2 max_order + 1 total).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .errors import BasisConstructionError, SingularityError
from .geometry import BoundaryDiscretization, DomainSpec, equal_arclength_thetas
from .specfun import bessel_j_table

MFS = "mfs"
FOURIER_BESSEL = "fourier_bessel"

#: minimum allowed distance from any MFS charge to the boundary
MIN_CHARGE_DISTANCE = 0.05

#: dense solvers only; basis sizes beyond this are out of scope
MAX_BASIS_SIZE = 2000


@dataclass(frozen=True)
class BasisSet:
    kind: str
    charge_points: tuple = None   # MFS: ((x, y), ...) strictly outside the domain
    max_order: int = None         # Fourier-Bessel angular order

    @property
    def size(self):
        if self.kind == MFS:
            return len(self.charge_points)
        return 2 * self.max_order + 1

    def charges(self):
        return np.asarray(self.charge_points, dtype=float)


def make_fourier_bessel_basis(max_order: int) -> BasisSet:
    if max_order < 0:
        raise ValueError("max_order must be nonnegative")
    if 2 * max_order + 1 > MAX_BASIS_SIZE:
        raise ValueError(f"basis size capped at {MAX_BASIS_SIZE}")
    return BasisSet(kind=FOURIER_BESSEL, max_order=int(max_order))


def make_mfs_basis(spec: DomainSpec, p: int, offset: float) -> BasisSet:
    """P fundamental-solution charges at constant normal offset from the boundary.

    Charges sit at y = x(theta) + offset * n(theta) with theta equispaced in
    arclength.  Raises BasisConstructionError if any charge lands inside the
    domain or closer than MIN_CHARGE_DISTANCE to it (concave-ish domains with
    large offsets can fold the offset curve back toward the boundary).
    """
    if not 1 <= p <= MAX_BASIS_SIZE:
        raise ValueError(f"charge count must lie in [1, {MAX_BASIS_SIZE}]")
    if not 0.02 <= offset <= 1.0:
        raise ValueError("offset must lie in [0.02, 1]")
    theta = equal_arclength_thetas(spec, p)
    charges = spec.point(theta) + offset * spec.outward_normal(theta)
    if np.any(spec.contains(charges)):
        raise BasisConstructionError(
            "an MFS charge point landed inside the domain; use a smaller offset")
    dense = spec.point(np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False))
    gap = np.hypot(charges[:, 0, None] - dense[None, :, 0],
                   charges[:, 1, None] - dense[None, :, 1]).min()
    if gap < MIN_CHARGE_DISTANCE * (1.0 - 1e-6):
        raise BasisConstructionError(
            f"charge-to-boundary distance {gap:.3g} below the minimum "
            f"{MIN_CHARGE_DISTANCE}; use a larger offset")
    return BasisSet(kind=MFS, charge_points=tuple(map(tuple, charges)))


def eval_values(basis: BasisSet, e: float, points) -> np.ndarray:
    """Matrix of basis-function values; entry (i, p) = xi_p(points[i])."""
    k = _wavenumber(e)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if basis.kind == MFS:
        return _mfs_values(_charge_distances(points, basis.charges()), k)
    rho = np.hypot(points[:, 0], points[:, 1])
    theta = np.arctan2(points[:, 1], points[:, 0])
    j, _ = bessel_j_table(basis.max_order, k * rho)
    return _fb_combine(j, theta, basis.max_order)


def eval_normal_derivs(basis: BasisSet, e: float, bd: BoundaryDiscretization) -> np.ndarray:
    """Matrix of outward normal derivatives at the boundary nodes."""
    k = _wavenumber(e)
    nodes, normals = bd.nodes, bd.normals
    if basis.kind == MFS:
        charges = basis.charges()
        diff = nodes[:, None, :] - charges[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])
        _check_separation(dist)
        ndot = (diff * normals[:, None, :]).sum(axis=-1) / dist
        return -0.25 * k * _sp.y1(k * dist) * ndot
    rho = np.hypot(nodes[:, 0], nodes[:, 1])
    theta = np.arctan2(nodes[:, 1], nodes[:, 0])
    j, jp = bessel_j_table(basis.max_order, k * rho)
    rhat_n = (np.stack([np.cos(theta), np.sin(theta)], axis=-1) * normals).sum(axis=-1)
    that_n = (np.stack([-np.sin(theta), np.cos(theta)], axis=-1) * normals).sum(axis=-1)
    return _fb_normal_derivs(j, jp, theta, rho, rhat_n, that_n, k, basis.max_order)


# -- internal kernels (shared with the scanner's cached fast path) ------------

def _wavenumber(e):
    if not e > 0.0:
        raise ValueError("energy must be positive")
    return np.sqrt(e)


def _charge_distances(points, charges):
    dist = np.hypot(points[:, 0, None] - charges[None, :, 0],
                    points[:, 1, None] - charges[None, :, 1])
    _check_separation(dist)
    return dist


def _check_separation(dist):
    if dist.min() < 1e-12:
        raise SingularityError("evaluation point coincides with an MFS charge point")


def _mfs_values(dist, k):
    return 0.25 * _sp.y0(k * dist)


def _fb_combine(j, theta, max_order):
    """Stack J_n(k rho) {cos, sin}(n theta) columns: cos 0..M then sin 1..M."""
    n = np.arange(max_order + 1)
    ang = np.outer(theta, n)
    out = np.empty((len(theta), 2 * max_order + 1))
    out[:, :max_order + 1] = j.T * np.cos(ang)
    if max_order:
        out[:, max_order + 1:] = j[1:].T * np.sin(ang[:, 1:])
    return out


def _fb_normal_derivs(j, jp, theta, rho, rhat_n, that_n, k, max_order):
    n = np.arange(max_order + 1)
    ang = np.outer(theta, n)
    cos_t, sin_t = np.cos(ang), np.sin(ang)
    radial = k * jp.T * rhat_n[:, None]          # d/d rho term projected on n
    angular = (j.T * n) / rho[:, None] * that_n[:, None]
    out = np.empty((len(theta), 2 * max_order + 1))
    out[:, :max_order + 1] = radial * cos_t - angular * sin_t
    if max_order:
        out[:, max_order + 1:] = (radial * sin_t + angular * cos_t)[:, 1:]
    return out
