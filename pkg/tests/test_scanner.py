import numpy as np
import pytest

from mps2d import scanner
from mps2d.basis import make_fourier_bessel_basis
from mps2d.errors import SlopeEstimationError
from mps2d.geometry import DomainSpec, area, build_interior
from mps2d.scanner import (ProblemSpec, ScanResult, certify, estimate_slope,
                           find_minima, golden_section, refine_minimum,
                           render_mode, scan, solve_window, tension_at)
from mps2d.specfun import bessel_j_zero, bessel_jprime_zero
from mps2d.tension import assemble_dirichlet, assemble_neumann, min_tension

DISC = DomainSpec()


def disc_problem(bc="dirichlet", order=20, n_boundary=256):
    return ProblemSpec(domain=DISC, basis=make_fourier_bessel_basis(order),
                       bc=bc, n_boundary=n_boundary, interior_nr=24,
                       interior_nt=64)


def test_scan_locates_first_dirichlet_eigenvalue():
    p = disc_problem()
    s = scan(p, 5.0, 6.0, 50)
    i = int(np.argmin(s.tensions))
    grid_best = s.energies[i]
    assert abs(grid_best - bessel_j_zero(0, 1) ** 2) <= (6.0 - 5.0) / 49.0
    assert len(find_minima(s)) == 1
    assert not s.failures


def test_scan_locates_first_neumann_eigenvalue():
    p = disc_problem(bc="neumann")
    s = scan(p, 3.0, 4.0, 40)
    brackets = find_minima(s)
    assert len(brackets) == 1
    assert abs(brackets[0][1] - bessel_jprime_zero(1, 1) ** 2) < 0.1


def test_scan_gap_window_has_no_minima():
    # disc Dirichlet eigenvalues near this window: 5.78 and 14.68
    p = disc_problem()
    s = scan(p, 7.0, 12.0, 30)
    assert find_minima(s) == []


def test_fast_path_matches_public_assembly():
    p = disc_problem(order=12, n_boundary=128)
    for bc, assemble in (("dirichlet", assemble_dirichlet),
                         ("neumann", assemble_neumann)):
        prob = ProblemSpec(domain=DISC, basis=p.basis, bc=bc, n_boundary=128,
                           interior_nr=24, interior_nt=64)
        from mps2d.geometry import build_boundary
        bd = build_boundary(DISC, 128)
        iq = build_interior(DISC, 24, 64)
        public = min_tension(assemble(p.basis, 9.7, bd, iq))
        fast = tension_at(prob, 9.7)
        assert fast.t_min == pytest.approx(public.t_min, rel=1e-12, abs=1e-14)
        assert np.allclose(fast.higher_tensions, public.higher_tensions,
                           rtol=1e-10)


def test_find_minima_shapes():
    def result(tensions):
        t = np.asarray(tensions, dtype=float)
        e = np.linspace(1.0, 2.0, len(t))
        return ScanResult(energies=e, tensions=t,
                          higher_tensions=np.zeros((len(t), 1)))

    assert find_minima(result([3.0, 2.0, 1.0, 0.5])) == []          # monotone
    assert len(find_minima(result([2.0, 1.0, 2.0]))) == 1           # V shape
    assert find_minima(result([1.0, 2.0, 3.0, 2.5])) == []          # edge lows
    brackets = find_minima(result([2.0, 1.0, 2.0, 0.5, 2.0]))
    assert len(brackets) == 2
    with pytest.raises(ValueError):
        find_minima(result([1.0, 2.0]))


def test_find_minima_skips_failed_energies():
    e = np.linspace(1.0, 2.0, 5)
    t = np.array([2.0, np.nan, 1.0, 1.5, 2.0])
    s = ScanResult(energies=e, tensions=t, higher_tensions=np.zeros((5, 1)),
                   failures=((1, "x"),))
    assert find_minima(s) == []


def test_golden_section_on_quadratic():
    f = lambda x: ((x - 1.234567) ** 2, None)
    x, fx, _, evals, converged = golden_section(f, 0.0, 3.0, lambda x: 1e-10)
    assert converged
    assert abs(x - 1.234567) < 1e-5      # quadratic: f resolves sqrt(tol)
    f_kink = lambda x: (abs(x - 1.234567), None)
    x, _, _, _, converged = golden_section(f_kink, 0.0, 3.0, lambda x: 1e-10)
    assert converged
    assert abs(x - 1.234567) < 1e-9      # kink: linear resolution


def test_refine_reaches_oracle_dirichlet():
    p = disc_problem()
    s = scan(p, 5.0, 6.0, 50)
    r = refine_minimum(p, find_minima(s)[0])
    oracle = bessel_j_zero(0, 1) ** 2
    assert r.converged
    assert abs(r.e_star - oracle) / oracle < 1e-9


def test_refine_reaches_oracle_neumann():
    p = disc_problem(bc="neumann")
    s = scan(p, 3.0, 4.0, 40)
    r = refine_minimum(p, find_minima(s)[0])
    oracle = bessel_jprime_zero(1, 1) ** 2
    assert abs(r.e_star - oracle) / oracle < 1e-8


def test_slope_matches_rellich_prediction():
    # near E_j the tension behaves like |E - E_j| / |psi_j| = |E - E_j|/sqrt(2E)
    p = disc_problem()
    for e_oracle in (bessel_j_zero(0, 1) ** 2, bessel_j_zero(1, 1) ** 2):
        t_star = tension_at(p, e_oracle).t_min
        slope = estimate_slope(p, e_oracle, t_star)
        assert slope == pytest.approx(1.0 / np.sqrt(2.0 * e_oracle), rel=0.05)


def test_one_sided_slopes_symmetric():
    p = disc_problem()
    e = bessel_j_zero(0, 1) ** 2
    t_star = tension_at(p, e).t_min
    delta = 1e-6 * e
    right = (tension_at(p, e + delta).t_min - t_star) / delta
    left = (tension_at(p, e - delta).t_min - t_star) / delta
    assert abs(right - left) / max(right, left) < 0.1


def test_slope_error_when_flat():
    p = disc_problem()
    with pytest.raises(SlopeEstimationError):
        # a fake minimum in flat territory: tension decreases on one side
        estimate_slope(p, 8.0, tension_at(p, 8.0).t_min)


def test_certify_paper_operating_point():
    # slope 0.5 gives C = 2; with tension 1e-6 the interval is +-2e-6
    p = disc_problem(bc="neumann")
    cert = certify(p, 2096.240170, 1e-6, 0.5)
    assert cert.c_est == pytest.approx(2.0)
    assert cert.interval[0] == pytest.approx(2096.240168, abs=1e-9)
    assert cert.interval[1] == pytest.approx(2096.240172, abs=1e-9)
    assert cert.moler_payne_interval is None


def test_certify_zero_tension_gives_point_interval():
    p = disc_problem()
    cert = certify(p, 10.0, 0.0, 0.3)
    assert cert.interval == (10.0, 10.0)


def test_certify_dirichlet_moler_payne_wider_by_sqrt_e():
    p = disc_problem()
    e, t, slope = 25.0, 1e-8, 0.4
    cert = certify(p, e, t, slope)
    width = cert.interval[1] - cert.interval[0]
    mp_width = cert.moler_payne_interval[1] - cert.moler_payne_interval[0]
    assert mp_width == pytest.approx(np.sqrt(e) * width, rel=1e-12)


def test_certify_angle_bound():
    p = disc_problem()
    cert = certify(p, 9.0, 1e-7, 0.5, neighbor_gap=4.0)
    assert cert.angle_bound == pytest.approx(2.0 * 3.0 * 1e-7 / 4.0, rel=1e-12)
    pn = disc_problem(bc="neumann")
    certn = certify(pn, 9.0, 1e-7, 0.5, neighbor_gap=4.0)
    assert certn.angle_bound == pytest.approx(2.0 * 1e-7 / 4.0, rel=1e-12)


def test_solve_window_flags_multiplicity():
    p = disc_problem()
    _, records = solve_window(p, 14.0, 15.0, 30)   # j_{1,1}^2: double eigenvalue
    assert len(records) == 1
    assert records[0].est_multiplicity == 2
    _, records = solve_window(p, 5.5, 6.0, 30)     # j_{0,1}^2: simple
    assert records[0].est_multiplicity == 1


def test_solve_window_certificate_soundness():
    p = disc_problem()
    _, records = solve_window(p, 5.0, 6.0, 40)
    oracle = bessel_j_zero(0, 1) ** 2
    cert = records[0].certificate
    half = 3.0 * max(cert.interval[1] - cert.e_star, 1e-12)
    assert cert.interval[0] - 2 * half <= oracle <= cert.interval[1] + 2 * half


def test_scan_records_failures(monkeypatch):
    p = disc_problem()
    original = scanner.tension_at

    def flaky(prob, e):
        if abs(e - 5.5) < 1e-9:
            raise scanner.MPSError("synthetic failure")
        return original(prob, e)

    monkeypatch.setattr(scanner, "tension_at", flaky)
    s = scanner.scan(p, 5.0, 6.0, 11)
    assert len(s.failures) == 1
    assert s.failures[0][0] == 5
    assert np.isnan(s.tensions[5])


def test_scan_threads_give_identical_results():
    p = disc_problem(order=10, n_boundary=128)
    s1 = scan(p, 5.0, 6.0, 12, threads=1)
    s2 = scan(p, 5.0, 6.0, 12, threads=2)
    assert np.array_equal(s1.tensions, s2.tensions)


def test_scan_window_validation():
    p = disc_problem(bc="neumann")
    with pytest.raises(ValueError):
        scan(p, 0.5, 4.0, 10)        # filtered Neumann needs e_lo > 1
    with pytest.raises(ValueError):
        scan(disc_problem(), 6.0, 5.0, 10)


def test_problem_spec_validates_bc():
    with pytest.raises(ValueError):
        ProblemSpec(domain=DISC, basis=make_fourier_bessel_basis(4),
                    bc="robin", n_boundary=64, interior_nr=8, interior_nt=16)


def test_render_mode_radial_symmetry():
    p = disc_problem()
    e = bessel_j_zero(0, 1) ** 2
    res = tension_at(p, e)
    grid = render_mode(p, e, res.coeffs, 101)
    vals = grid.values
    assert vals.shape == (101, 101)
    # the ground mode is radial: the grid must be symmetric under flips
    for flipped in (vals[::-1], vals[:, ::-1], vals.T):
        diff = np.abs(vals - flipped)
        assert np.nanmax(diff) < 1e-10


def test_render_mode_mask_fraction_and_norm():
    p = disc_problem()
    e = bessel_j_zero(0, 1) ** 2
    res = tension_at(p, e)
    grid = render_mode(p, e, res.coeffs, 200)
    masked_fraction = 1.0 - grid.inside.mean()
    expected = 1.0 - np.pi / 4.0
    assert abs(masked_fraction - expected) < 0.02
    cell = ((grid.extent[1] - grid.extent[0]) / 199.0) ** 2
    assert np.nansum(grid.values) * cell == pytest.approx(1.0, abs=0.02)


def test_render_mode_blob_mask_fraction():
    blob = DomainSpec(radial_cos=(0.0, 0.1), radial_sin=(0.05,))
    p = ProblemSpec(domain=blob, basis=make_fourier_bessel_basis(12),
                    bc="dirichlet", n_boundary=128, interior_nr=16,
                    interior_nt=48)
    res = tension_at(p, 11.0)
    grid = render_mode(p, 11.0, res.coeffs, 150)
    bbox = ((grid.extent[1] - grid.extent[0])
            * (grid.extent[3] - grid.extent[2]))
    expected = 1.0 - area(blob) / bbox
    assert abs((1.0 - grid.inside.mean()) - expected) < 0.02


def test_refinement_is_deterministic():
    p = disc_problem()
    _, rec1 = solve_window(p, 5.0, 6.0, 25)
    _, rec2 = solve_window(p, 5.0, 6.0, 25)
    assert rec1[0].certificate == rec2[0].certificate
