"""Tension-curve scanning, minimum refinement, and eigenvalue certificates.

The pipeline is: sweep t_min(E) over an energy window, bracket the strict
interior local minima, shrink each bracket by golden-section search (the
tension has a kink-like |E - E*| minimum, so parabolic fits are unreliable),
measure the local slope, and convert (tension, slope) into a certified
interval: halfwidth = kappa(E) * t_star / slope with kappa = sqrt(E) for
Dirichlet and kappa = 1 for the filtered Neumann tension (the extra boundary
derivative in the Neumann tension removes the sqrt(E) dimensionally).

Repeated evaluation at one discretization is the hot path, so a per-problem
workspace caches everything energy-independent: quadratures, charge distances
and normal projections (MFS), or polar coordinates and angular tables
(Fourier-Bessel).  The workspace path produces bit-identical results to the
public assemble_* route; a test pins that equivalence.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as _sp

from .basis import FOURIER_BESSEL, MFS, BasisSet, eval_values
from .boundary_filter import apply_multiplier_samples, f_mu
from .errors import MPSError, SlopeEstimationError
from .geometry import DomainSpec, build_boundary, build_interior
from .specfun import bessel_j_table
from .tension import DEFAULT_REG_EPS, TensionResult, _min_tension_factored

DIRICHLET = "dirichlet"
NEUMANN_FILTERED = "neumann"
NEUMANN_RAW = "neumann-raw"
BOUNDARY_CONDITIONS = (DIRICHLET, NEUMANN_FILTERED, NEUMANN_RAW)

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0
_MAX_REFINE_EVALS = 200


@dataclass(frozen=True)
class ProblemSpec:
    """Everything defining the tension curve t_min(E); immutable and hashable."""

    domain: DomainSpec
    basis: BasisSet
    bc: str
    n_boundary: int
    interior_nr: int
    interior_nt: int
    reg_eps: float = DEFAULT_REG_EPS
    n_higher: int = 5

    def __post_init__(self):
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ValueError(f"bc must be one of {BOUNDARY_CONDITIONS}")


@dataclass(frozen=True, eq=False)
class ScanResult:
    energies: np.ndarray
    tensions: np.ndarray
    higher_tensions: np.ndarray            # (n_grid, n_higher), NaN-padded
    failures: tuple = ()                   # (grid index, message) pairs


@dataclass(frozen=True)
class EigCertificate:
    e_star: float
    t_star: float
    slope: float
    c_est: float
    interval: tuple                        # (lo, hi), halfwidth = c_est kappa t_star
    moler_payne_interval: tuple = None     # Dirichlet only: kappa = E
    angle_bound: float = None              # eigenfunction-distance bound


@dataclass(frozen=True, eq=False)
class RefinedMinimum:
    e_star: float
    t_star: float
    result: TensionResult
    converged: bool
    n_evals: int


@dataclass(frozen=True, eq=False)
class SolveRecord:
    """One located eigenvalue: certificate plus the refinement by-products.

    The certificate is None when slope estimation failed; e_star and t_star
    are always present."""

    e_star: float
    t_star: float
    certificate: EigCertificate
    tension: TensionResult
    bracket: tuple
    est_multiplicity: int
    converged: bool
    error: str = None


@dataclass(frozen=True, eq=False)
class ModeGrid:
    values: np.ndarray     # (grid_n, grid_n) of |v|^2, NaN outside the domain
    inside: np.ndarray     # boolean mask of in-domain cells
    extent: tuple          # (xmin, xmax, ymin, ymax) of the bounding box
    e_star: float


def auto_interior_resolution(domain: DomainSpec, basis: BasisSet, e_hi: float):
    """Interior quadrature sizes resolving oscillations up to sqrt(e_hi).

    Radial Gauss-Legendre needs ~1 node per unit of k r_max (products of two
    Helmholtz factors oscillate at 2k); the angular trapezoid rule must exceed
    the product bandwidth of the basis plus the domain modulation.
    """
    theta = np.linspace(0.0, 2.0 * np.pi, 1024, endpoint=False)
    r_max = float(np.max(domain.radius(theta)))
    k_max = np.sqrt(e_hi) * r_max
    n_r = max(16, int(np.ceil(k_max)) + 16)
    if basis.kind == FOURIER_BESSEL:
        band = 2 * basis.max_order
    else:
        band = 2 * int(np.ceil(k_max))
    n_t = max(32, band + 4 * domain.max_harmonic + 32)
    return n_r, n_t + (n_t % 2)


class _Workspace:
    """Cached geometry and energy-independent basis data for one problem.

    Only the Bessel tables depend on the energy, and those are computed on the
    distinct radii present in the node sets (a disc's boundary has one radius
    and its interior n_r of them) and gathered back, so the per-energy cost is
    a few small recurrences plus the Gram products.
    """

    def __init__(self, p: ProblemSpec):
        self.p = p
        self.bd = build_boundary(p.domain, p.n_boundary)
        self.iq = build_interior(p.domain, p.interior_nr, p.interior_nt)
        bd, iq = self.bd, self.iq
        if p.basis.kind == MFS:
            charges = p.basis.charges()
            diff = bd.nodes[:, None, :] - charges[None, :, :]
            self.bdist = np.hypot(diff[..., 0], diff[..., 1])
            self.ndot = (diff * bd.normals[:, None, :]).sum(axis=-1) / self.bdist
            self.idist = np.hypot(iq.points[:, 0, None] - charges[None, :, 0],
                                  iq.points[:, 1, None] - charges[None, :, 1])
        else:
            order = np.arange(p.basis.max_order + 1)
            rho_b = np.hypot(bd.nodes[:, 0], bd.nodes[:, 1])
            theta_b = np.arctan2(bd.nodes[:, 1], bd.nodes[:, 0])
            self.rho_b = rho_b
            self.rho_b_unique, self.rho_b_gather = np.unique(rho_b, return_inverse=True)
            ang = np.outer(theta_b, order)
            self.cos_b, self.sin_b = np.cos(ang), np.sin(ang)
            rhat = np.stack([np.cos(theta_b), np.sin(theta_b)], axis=-1)
            that = np.stack([-np.sin(theta_b), np.cos(theta_b)], axis=-1)
            self.rhat_n = (rhat * bd.normals).sum(axis=-1)
            self.that_n = (that * bd.normals).sum(axis=-1)
            rho_i = np.hypot(iq.points[:, 0], iq.points[:, 1])
            theta_i = np.arctan2(iq.points[:, 1], iq.points[:, 0])
            self.rho_i_unique, self.rho_i_gather = np.unique(rho_i, return_inverse=True)
            ang_i = np.outer(theta_i, order)
            self.cos_i, self.sin_i = np.cos(ang_i), np.sin(ang_i)

    def boundary_matrix(self, e):
        """Boundary values (Dirichlet) or normal derivatives (Neumann)."""
        p, k = self.p, np.sqrt(e)
        if p.basis.kind == MFS:
            if p.bc == DIRICHLET:
                return 0.25 * _sp.y0(k * self.bdist)
            return -0.25 * k * _sp.y1(k * self.bdist) * self.ndot
        mo = p.basis.max_order
        ju, jpu = bessel_j_table(mo, k * self.rho_b_unique)
        j = ju[:, self.rho_b_gather].T
        if p.bc == DIRICHLET:
            return _combine_blocks(j * self.cos_b, (j * self.sin_b)[:, 1:])
        jp = jpu[:, self.rho_b_gather].T
        radial = k * jp * self.rhat_n[:, None]
        angular = j * np.arange(mo + 1) / self.rho_b[:, None] * self.that_n[:, None]
        return _combine_blocks(radial * self.cos_b - angular * self.sin_b,
                               (radial * self.sin_b + angular * self.cos_b)[:, 1:])

    def interior_matrix(self, e):
        p, k = self.p, np.sqrt(e)
        if p.basis.kind == MFS:
            return 0.25 * _sp.y0(k * self.idist)
        ju, _ = bessel_j_table(p.basis.max_order, k * self.rho_i_unique)
        j = ju[:, self.rho_i_gather].T
        return _combine_blocks(j * self.cos_i, (j * self.sin_i)[:, 1:])


def _combine_blocks(cos_block, sin_block):
    return np.concatenate([cos_block, sin_block], axis=1)


@lru_cache(maxsize=8)
def _workspace(p: ProblemSpec) -> _Workspace:
    return _Workspace(p)


def tension_at(p: ProblemSpec, e: float) -> TensionResult:
    """Minimum tension (and by-products) at a single energy."""
    ws = _workspace(p)
    b = ws.boundary_matrix(e)
    if p.bc == NEUMANN_FILTERED:
        if not e > 1.0:
            raise ValueError("filtered Neumann tension requires E > 1")
        b = apply_multiplier_samples(b, ws.bd.perimeter, lambda s: f_mu(s, np.sqrt(e)))
    x = np.sqrt(ws.bd.perimeter / ws.bd.n_nodes) * b
    y = np.sqrt(ws.iq.weights)[:, None] * ws.interior_matrix(e)
    return _min_tension_factored(x, y, p.reg_eps, p.n_higher)


def scan(p: ProblemSpec, e_lo: float, e_hi: float, n_grid: int,
         threads: int = 1) -> ScanResult:
    """Tension curve on a uniform energy grid.  Per-energy failures are
    recorded in the result rather than raised."""
    if not 0.0 < e_lo < e_hi:
        raise ValueError("need 0 < e_lo < e_hi")
    if p.bc == NEUMANN_FILTERED and not e_lo > 1.0:
        raise ValueError("filtered Neumann scans require e_lo > 1")
    if n_grid < 1:
        raise ValueError("n_grid must be positive")
    energies = np.linspace(e_lo, e_hi, n_grid)
    tensions = np.full(n_grid, np.nan)
    higher = np.full((n_grid, p.n_higher), np.nan)
    failures = []

    def evaluate(e):
        try:
            return tension_at(p, float(e)), None
        except (MPSError, np.linalg.LinAlgError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(evaluate, energies))
    else:
        results = [evaluate(e) for e in energies]
    for i, (res, err) in enumerate(results):
        if err is not None:
            failures.append((i, err))
        else:
            tensions[i] = res.t_min
            higher[i, :len(res.higher_tensions)] = res.higher_tensions
    return ScanResult(energies=energies, tensions=tensions, higher_tensions=higher,
                      failures=tuple(failures))


def find_minima(s: ScanResult) -> list:
    """Brackets (E_{i-1}, E_i, E_{i+1}) of every strict interior local minimum
    of the tension curve.  Endpoints are never returned."""
    if len(s.energies) < 3:
        raise ValueError("need at least 3 grid points to bracket minima")
    t = s.tensions
    brackets = []
    for i in range(1, len(t) - 1):
        if np.isfinite(t[i - 1]) and np.isfinite(t[i]) and np.isfinite(t[i + 1]) \
                and t[i] < t[i - 1] and t[i] < t[i + 1]:
            brackets.append((float(s.energies[i - 1]), float(s.energies[i]),
                             float(s.energies[i + 1])))
    return brackets


def _refine_tolerance(e):
    return max(1e-12 * e, 1e-10)


def golden_section(f, lo: float, hi: float, tol_at, max_evals: int = _MAX_REFINE_EVALS):
    """Golden-section minimization of f on [lo, hi].

    tol_at(x) gives the bracket-width target around the current best point.
    Returns (x_best, f_best, aux_best, n_evals, converged); f must return
    (value, aux).
    """
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, r1 = f(x1)
    f2, r2 = f(x2)
    evals = 2
    while evals < max_evals:
        best = x1 if f1 < f2 else x2
        if hi - lo <= tol_at(best):
            break
        if f1 < f2:
            hi, x2, f2, r2 = x2, x1, f1, r1
            x1 = hi - _INVPHI * (hi - lo)
            f1, r1 = f(x1)
        else:
            lo, x1, f1, r1 = x1, x2, f2, r2
            x2 = lo + _INVPHI * (hi - lo)
            f2, r2 = f(x2)
        evals += 1
    if f1 < f2:
        return x1, f1, r1, evals, hi - lo <= tol_at(x1)
    return x2, f2, r2, evals, hi - lo <= tol_at(x2)


def refine_minimum(p: ProblemSpec, bracket) -> RefinedMinimum:
    """Golden-section refinement of a bracketed tension minimum, down to a
    bracket width of max(1e-12 E, 1e-10) or 200 evaluations."""
    lo, mid, hi = bracket
    if not lo < mid < hi:
        raise ValueError("bracket must be strictly increasing")

    def f(e):
        res = tension_at(p, e)
        return res.t_min, res

    e_star, t_star, res, evals, converged = golden_section(
        f, lo, hi, _refine_tolerance)
    return RefinedMinimum(e_star=float(e_star), t_star=float(t_star), result=res,
                          converged=bool(converged), n_evals=evals)


def estimate_slope(p: ProblemSpec, e_star: float, t_star: float) -> float:
    """|d t_min/dE| at a refined minimum: mean of the two one-sided difference
    quotients at delta = max(1e-6 E, 10 x refinement tolerance)."""
    delta = max(1e-6 * e_star, 10.0 * _refine_tolerance(e_star))
    right = (tension_at(p, e_star + delta).t_min - t_star) / delta
    left = (tension_at(p, e_star - delta).t_min - t_star) / delta
    if right <= 0.0 or left <= 0.0:
        raise SlopeEstimationError(
            "tension does not increase away from the minimum (basis too weak?)")
    return 0.5 * (right + left)


def certify(p: ProblemSpec, e_star: float, t_star: float, slope: float,
            neighbor_gap: float = None) -> EigCertificate:
    """Certified interval around a refined minimum with C_est = 1/slope.

    kappa(E) = sqrt(E) for Dirichlet and 1 for the Neumann tensions; the
    Dirichlet record also carries the classical kappa = E interval for
    comparison.  With the gap to the next located eigenvalue, an
    eigenfunction-angle bound C_est kappa t_star / gap is attached.
    """
    if not slope > 0.0:
        raise ValueError("slope must be positive")
    c_est = 1.0 / slope
    kappa = np.sqrt(e_star) if p.bc == DIRICHLET else 1.0
    half = c_est * kappa * t_star
    moler = None
    if p.bc == DIRICHLET:
        mp_half = c_est * e_star * t_star
        moler = (e_star - mp_half, e_star + mp_half)
    angle = None
    if neighbor_gap is not None:
        angle = c_est * kappa * t_star / neighbor_gap
    return EigCertificate(e_star=float(e_star), t_star=float(t_star),
                          slope=float(slope), c_est=float(c_est),
                          interval=(e_star - half, e_star + half),
                          moler_payne_interval=moler, angle_bound=angle)


def solve_window(p: ProblemSpec, e_lo: float, e_hi: float, n_grid: int,
                 threads: int = 1):
    """Full pipeline over a window: scan, bracket, refine, slope, certify.

    Returns (ScanResult, [SolveRecord]).  Failures of individual minima are
    recorded on their SolveRecord instead of aborting the run.
    """
    s = scan(p, e_lo, e_hi, n_grid, threads=threads)
    brackets = find_minima(s)
    if threads > 1 and len(brackets) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            refined = list(zip(brackets,
                               pool.map(lambda b: refine_minimum(p, b), brackets)))
    else:
        refined = [(b, refine_minimum(p, b)) for b in brackets]
    e_stars = [r.e_star for _, r in refined]
    records = []
    for i, (bracket, r) in enumerate(refined):
        gaps = [abs(r.e_star - other) for j, other in enumerate(e_stars) if j != i]
        gap = min(gaps) if gaps else None
        try:
            slope = estimate_slope(p, r.e_star, r.t_star)
            cert = certify(p, r.e_star, r.t_star, slope, neighbor_gap=gap)
            err = None
        except MPSError as exc:
            cert, err = None, f"{type(exc).__name__}: {exc}"
        mult_tol = max(100.0 * r.t_star, 1e-7)
        mult = 1 + int(np.sum(r.result.higher_tensions <= mult_tol))
        records.append(SolveRecord(e_star=r.e_star, t_star=r.t_star,
                                   certificate=cert, tension=r.result,
                                   bracket=bracket, est_multiplicity=mult,
                                   converged=r.converged, error=err))
    return s, records


def render_mode(p: ProblemSpec, e_star: float, coeffs, grid_n: int) -> ModeGrid:
    """|v|^2 of the trial solution with the given coefficients, on a grid_n x
    grid_n lattice over the domain's bounding box; out-of-domain cells are NaN.
    v is normalized to unit interior L^2 norm through the problem's interior
    quadrature."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    coeffs = np.asarray(coeffs, dtype=float)
    ws = _workspace(p)
    v_iq = ws.interior_matrix(e_star) @ coeffs
    nrm = np.sqrt(np.sum(ws.iq.weights * v_iq ** 2))
    theta = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    bpts = p.domain.point(theta)
    xmin, ymin = bpts.min(axis=0)
    xmax, ymax = bpts.max(axis=0)
    xs = np.linspace(xmin, xmax, grid_n)
    ys = np.linspace(ymin, ymax, grid_n)
    xx, yy = np.meshgrid(xs, ys)
    pts = np.stack([xx.ravel(), yy.ravel()], axis=-1)
    inside = p.domain.contains(pts)
    values = np.full(grid_n * grid_n, np.nan)
    v = eval_values(p.basis, e_star, pts[inside]) @ coeffs
    values[inside] = (v / nrm) ** 2
    return ModeGrid(values=values.reshape(grid_n, grid_n),
                    inside=inside.reshape(grid_n, grid_n),
                    extent=(float(xmin), float(xmax), float(ymin), float(ymax)),
                    e_star=float(e_star))
