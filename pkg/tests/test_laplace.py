"""Dirichlet solver, harmonic measures, Green functions, conjugates."""

import numpy as np
import pytest

from mcinner.laplace import (LaplaceSolver, PeriodError, green,
                             harmonic_conjugate, harmonic_measures,
                             winding_number)

from conftest import random_interior


def test_dirichlet_solve_matches_harmonic_polynomial(disk):
    dom = disk.domain
    # u = Re(z^3) + Im(z^2) is harmonic with known interior values
    data = (dom.nodes**3).real + (dom.nodes**2).imag
    field = disk.solver.solve(data)
    rng = np.random.default_rng(0)
    z = random_interior(dom, rng, 12)
    exact = (z**3).real + (z**2).imag
    assert np.abs(field.value(z) - exact).max() < 1e-10


def test_dirichlet_solve_on_annulus(annulus):
    dom = annulus.domain
    # u = Re(z + 1/z) is harmonic on the annulus
    data = (dom.nodes + 1.0 / dom.nodes).real
    field = annulus.solver.solve(data)
    rng = np.random.default_rng(1)
    z = random_interior(dom, rng, 12)
    exact = (z + 1.0 / z).real
    assert np.abs(field.value(z) - exact).max() < 1e-9


def test_gradient_matches_analytic(disk):
    dom = disk.domain
    data = (dom.nodes**2).real
    field = disk.solver.solve(data)
    z = np.array([0.3 + 0.2j, -0.5 + 0.1j, 0.1 - 0.6j])
    # u = x^2 - y^2: u_x - i u_y = 2x + 2iy = 2z
    assert np.abs(field.grad(z) - 2 * z).max() < 1e-10


def test_annulus_measure_exact(annulus):
    rng = np.random.default_rng(2)
    z = random_interior(annulus.domain, rng, 25)
    om1 = annulus.omegas[1].value(z)
    assert np.abs(om1 - (1.0 - np.log(np.abs(z)))).max() < 1e-9


def test_measures_partition_of_unity(two_hole):
    rng = np.random.default_rng(3)
    z = random_interior(two_hole.domain, rng, 10)
    total = sum(om.value(z) for om in two_hole.omegas)
    assert np.abs(total - 1.0).max() < 1e-10


def test_period_matrix_symmetry(two_hole):
    m = two_hole.period_matrix
    assert m.shape == (2, 2)
    assert np.abs(m - m.T).max() < 1e-10
    assert np.all(np.linalg.eigvalsh(m) > 0)


def test_green_symmetry_and_flux(one_hole):
    dom = one_hole.domain
    rng = np.random.default_rng(4)
    # keep the poles well interior: the log data of a near-boundary pole
    # needs more than the unit-test node count to resolve spectrally
    p, q = random_interior(dom, rng, 2, margin=0.25)
    gp = green(dom, one_hole, p)
    gq = green(dom, one_hole, q)
    assert gp.value(q) == pytest.approx(gq.value(p), abs=1e-9)
    fluxes = gp.boundary_fluxes()
    assert fluxes[1] == pytest.approx(
        -float(one_hole.omegas[1].value(np.array([p]))[0]), abs=1e-8)
    assert fluxes.sum() == pytest.approx(-1.0, abs=1e-8)


def test_green_guard_zone(disk):
    from mcinner.laplace import SolverError
    with pytest.raises(SolverError):
        green(disk.domain, disk, 0.9999)
    with pytest.raises(SolverError):
        green(disk.domain, disk, 1.5)


def test_completion_is_holomorphic(disk):
    dom = disk.domain
    data = (dom.nodes**2).real
    field = disk.solver.solve(data)
    # completion s = u + iv with s' from the dedicated derivative routine;
    # compare against a central difference
    z = np.array([0.2 + 0.3j])
    h = 1e-5
    fd = (field.completion(z + h) - field.completion(z - h)) / (2 * h)
    assert np.abs(field.completion_derivative(z) - fd).max() < 1e-6


def test_completion_at_exact_node(disk):
    dom = disk.domain
    data = (dom.nodes**3).real
    field = disk.solver.solve(data)
    # evaluation exactly on a quadrature node must return the nodal limit
    out = field.completion(dom.nodes[:5])
    assert np.all(np.isfinite(out))
    assert np.abs(out - field.s_bnd[:5]).max() < 1e-12


def test_harmonic_conjugate_single_valued(disk):
    dom = disk.domain
    data = (dom.nodes**2).real
    field = disk.solver.solve(data)
    conj = harmonic_conjugate(field, 0.0)
    z = np.array([0.4 + 0.1j])
    # v = 2xy vanishes at 0; conjugate of x^2 - y^2 is 2xy
    assert conj(z)[0] == pytest.approx(2 * z[0].real * z[0].imag, abs=1e-9)


def test_harmonic_conjugate_rejects_periods(annulus):
    with pytest.raises(PeriodError):
        harmonic_conjugate(annulus.omegas[1], 1.5)


def test_winding_number_counts_rotations():
    t = np.linspace(0.0, 2 * np.pi, 400, endpoint=False)
    vals = np.exp(3j * t) * (1.0 + 0.2 * np.cos(t))
    n, resid = winding_number(vals)
    assert n == 3
    assert resid < 1e-8
