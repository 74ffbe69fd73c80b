"""Boundary/interior Gram matrices and the minimum (filtered) tension.

At energy E the tension of a trial Helmholtz solution u = sum c_p xi_p is
t[u]^2 = (c' G c)/(c' M c), where G is the quadratic form of the boundary data
(values for Dirichlet; plain or filter-boosted normal derivatives for Neumann)
and M is the interior L^2 form.  The minimum over coefficients is the smallest
generalized eigenvalue of (G, M), regularized by truncating the
eigendecomposition of M at a relative threshold: MFS Gram matrices are
exponentially ill-conditioned, and spectral truncation keeps the reduction
symmetric and deterministic.

Precision note: the assembly keeps the weighted factors X, Y with G = X'X and
M = Y'Y, and the solver takes the tensions as singular values of the whitened
boundary factor T = X W (the eigenvalues of the reduced matrix R = T'T are
exactly these squared).  Forming R explicitly and diagonalizing it bottoms out
at t ~ sqrt(eps ||R||) ~ 1e-7, far above what the certificates need; singular
values of the factor resolve down to eps * sigma_max instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg as la
from threadpoolctl import ThreadpoolController

from .basis import BasisSet, eval_normal_derivs, eval_values
from .boundary_filter import apply_multiplier_samples, f_mu
from .errors import DegenerateBasisError
from .geometry import BoundaryDiscretization, InteriorQuadrature

DEFAULT_REG_EPS = 1e-14
DEFAULT_N_HIGHER = 5

# the dense problems here are small (P <= 2000, typically a few hundred);
# multithreaded BLAS spends more time synchronizing than computing on them
_BLAS = ThreadpoolController()


@dataclass(frozen=True, eq=False)
class GramPair:
    """Boundary form G and interior form M (both P x P, symmetric PSD).

    When built by the assembly routines, the square-root factors with
    G = boundary_factor' boundary_factor and M = interior_factor'
    interior_factor ride along so the solver can work at factor precision.
    """

    G: np.ndarray
    M: np.ndarray
    boundary_factor: np.ndarray = None
    interior_factor: np.ndarray = None

    def __post_init__(self):
        for name, a in (("G", self.G), ("M", self.M)):
            scale = max(1.0, np.abs(a).max())
            if np.abs(a - a.T).max() > 1e-13 * scale:
                raise ValueError(f"{name} is not symmetric to tolerance")


@dataclass(frozen=True, eq=False)
class TensionResult:
    t_min: float
    coeffs: np.ndarray            # unit M-norm minimizer
    higher_tensions: np.ndarray   # ascending sqrt of the next generalized eigenvalues
    numerical_rank: int


def assemble_dirichlet(basis: BasisSet, e: float, bd: BoundaryDiscretization,
                       iq: InteriorQuadrature) -> GramPair:
    """G from boundary values, M from interior values."""
    x = np.sqrt(bd.weights)[:, None] * eval_values(basis, e, bd.nodes)
    y = np.sqrt(iq.weights)[:, None] * eval_values(basis, e, iq.points)
    return _pair_from_factors(x, y)


def assemble_neumann(basis: BasisSet, e: float, bd: BoundaryDiscretization,
                     iq: InteriorQuadrature, filtered: bool = True) -> GramPair:
    """G from (optionally filter-boosted) normal derivatives, M as Dirichlet."""
    d = eval_normal_derivs(basis, e, bd)
    if filtered:
        if not e > 1.0:
            raise ValueError("filtered Neumann assembly requires E > 1")
        d = apply_multiplier_samples(d, bd.perimeter, lambda s: f_mu(s, np.sqrt(e)))
    x = np.sqrt(bd.weights)[:, None] * d
    y = np.sqrt(iq.weights)[:, None] * eval_values(basis, e, iq.points)
    return _pair_from_factors(x, y)


def _pair_from_factors(x, y):
    return GramPair(G=_sym(x.T @ x), M=_sym(y.T @ y),
                    boundary_factor=x, interior_factor=y)


def _sym(a):
    return 0.5 * (a + a.T)


def min_tension(gram: GramPair, reg_eps: float = DEFAULT_REG_EPS,
                n_higher: int = DEFAULT_N_HIGHER) -> TensionResult:
    """Minimum tension via the regularized generalized eigenproblem.

    Eigendecompose M, keep directions above reg_eps * max eigenvalue, whiten,
    and take the ascending spectrum tau_1 <= tau_2 <= ... of the reduced
    boundary form: t_min = sqrt(tau_1), then the higher tensions.  With the
    assembly factors available the tau are computed as squared singular
    values of the whitened boundary factor (identical spectral data, but
    accurate near zero); otherwise the reduced matrix is diagonalized.
    """
    if gram.boundary_factor is not None:
        return _min_tension_factored(gram.boundary_factor, gram.interior_factor,
                                     reg_eps, n_higher, m=gram.M)
    _check_reg_eps(reg_eps)
    with _BLAS.limit(limits=1, user_api="blas"):
        white, rank = _whiten(gram.M, reg_eps)
        reduced = white.T @ gram.G @ white
        tau, y = la.eigh(_sym(reduced), driver="evd")
    tensions = np.sqrt(np.maximum(tau, 0.0))
    return TensionResult(t_min=float(tensions[0]), coeffs=white @ y[:, 0],
                         higher_tensions=tensions[1:1 + n_higher].copy(),
                         numerical_rank=rank)


def _min_tension_factored(x, y, reg_eps, n_higher, m=None):
    """Factored route: tensions are the singular values of the whitened
    boundary factor."""
    _check_reg_eps(reg_eps)
    with _BLAS.limit(limits=1, user_api="blas"):
        if m is None:
            m = _sym(y.T @ y)
        white, rank = _whiten(m, reg_eps)
        if x.shape[0] < rank:
            raise ValueError("boundary discretization has fewer nodes than the "
                             "regularized basis rank; increase the node count")
        sigma, v = _ascending_singular(x @ white)
        coeffs = white @ v[:, 0]
        # directions near the truncation threshold carry O(eps/reg_eps) relative
        # errors in their whitened scale; renormalize in M itself
        coeffs = coeffs / np.sqrt(np.sum((y @ coeffs) ** 2))
    return TensionResult(t_min=float(sigma[0]), coeffs=coeffs,
                         higher_tensions=sigma[1:1 + n_higher].copy(),
                         numerical_rank=rank)


def _check_reg_eps(reg_eps):
    if not 1e-16 <= reg_eps <= 1e-6:
        raise ValueError("reg_eps must lie in [1e-16, 1e-6]")


def _whiten(m, reg_eps):
    lam, q = la.eigh(m, driver="evd")
    keep = lam > reg_eps * lam[-1] if lam[-1] > 0 else np.zeros_like(lam, dtype=bool)
    rank = int(keep.sum())
    if rank == 0:
        raise DegenerateBasisError("no interior mass above the regularization threshold")
    return q[:, keep] / np.sqrt(lam[keep]), rank


def _ascending_singular(t):
    """Singular values of t ascending, with right singular vectors as columns.

    Tall matrices are first reduced by a Q-less QR factorization, which leaves
    the singular values and right singular vectors unchanged.
    """
    if t.shape[0] > 2 * t.shape[1]:
        t = np.linalg.qr(t, mode="r")
    _, sigma, vt = la.svd(t, full_matrices=False)
    order = np.arange(len(sigma))[::-1]
    return sigma[order], vt[order].T
