"""Atoms phi_p, zero-free units g_rho, and assembled inner functions."""

import numpy as np
import pytest

from mcinner.inner import (InnerError, assemble_inner, boundary_limit_check,
                           boundary_modulus_deviation, build_g_rho, build_phi,
                           evaluate, order_of)

from conftest import random_interior


def mobius(p, z):
    return (z - p) / (1.0 - np.conj(p) * z)


def test_disk_atom_is_mobius(disk):
    rng = np.random.default_rng(0)
    pts = random_interior(disk.domain, rng, 6)
    p, probes = pts[0], pts[1:]
    atom = build_phi(disk, p)
    got = atom.value(probes)
    want = mobius(p, probes)
    # gauge-align through the ratio at the first probe
    gauge = want[0] / got[0]
    assert abs(abs(gauge) - 1.0) < 1e-9
    assert np.abs(gauge * got - want).max() < 1e-9


def test_atom_vanishes_at_zero(annulus):
    p = 1.7 + 0.4j
    atom = build_phi(annulus, p)
    assert abs(atom.value(p)) < 1e-13
    bv = np.abs(atom.boundary_values())
    dom = annulus.domain
    # unit modulus on the outer curve, constant modulus < 1 on the hole
    assert np.abs(bv[dom.curve_slices[0]] - 1.0).max() < 1e-10
    hole = bv[dom.curve_slices[1]]
    assert hole.std() < 1e-10
    assert hole.mean() < 1.0


def test_atom_guard_zone(annulus):
    with pytest.raises(InnerError):
        build_phi(annulus, 1.0 + 1e-12j)


def test_unit_windings(annulus):
    g = build_g_rho(annulus, [2])
    f = assemble_inner(annulus, [])
    # direct winding count of the unit along the hole curve
    from mcinner.laplace import winding_number
    dom = annulus.domain
    vals = g.boundary_values()[dom.curve_slices[1]]
    n, resid = winding_number(vals)
    # the hole curve is stored clockwise, so the stored-direction count is
    # the negative of the prescribed winding
    assert n == -2
    assert resid < 1e-8
    # the unit has modulus one on the outer curve and constant modulus on
    # the hole; only full products with integral measure sums are inner
    bv = np.abs(g.boundary_values())
    assert np.abs(bv[dom.curve_slices[0]] - 1.0).max() < 1e-10
    assert bv[dom.curve_slices[1]].std() < 1e-10
    assert order_of(f) == 0


def test_annulus_two_zero_inner(annulus):
    # log|p1| + log|p2| = 1 makes the measure sums integral
    p1 = np.exp(0.35)
    p2 = np.exp(0.65) * np.exp(0.8j)
    f = assemble_inner(annulus, [p1, p2])
    assert order_of(f) == 2
    assert boundary_modulus_deviation(f) < 1e-8
    assert abs(evaluate(f, p1)) < 1e-12
    assert abs(evaluate(f, p2)) < 1e-12
    assert f.rho.tolist() == [-1]


def test_integrality_violation_raises(annulus):
    with pytest.raises(InnerError, match="integrality"):
        assemble_inner(annulus, [1.6 + 0.2j])


def test_multiplicity_and_order(disk):
    f = assemble_inner(disk, [(0.3 + 0.2j, 2), (-0.4j, 1)])
    assert order_of(f) == 3
    z = np.array([0.1 + 0.5j, -0.6 + 0.1j])
    want = mobius(0.3 + 0.2j, z) ** 2 * mobius(-0.4j, z)
    got = f.value(z)
    gauge = want[0] / got[0]
    assert np.abs(gauge * got - want).max() < 1e-9


def test_lam_must_be_unimodular(disk):
    with pytest.raises(InnerError):
        assemble_inner(disk, [], lam=0.5)


def test_boundary_atom_is_zero_free(annulus):
    atom = build_phi(annulus, 1.0, boundary_curve=1)
    rng = np.random.default_rng(5)
    z = random_interior(annulus.domain, rng, 8)
    assert np.abs(atom.value(z)).min() > 1e-6
    dom = annulus.domain
    bv = np.abs(atom.boundary_values())
    assert np.abs(bv[dom.curve_slices[0]] - 1.0).max() < 1e-9


def test_boundary_limit_of_atoms(annulus256):
    # interior atoms degenerate to the zero-free boundary atom as p
    # approaches the hole curve
    target = np.exp(0.3j)
    p_seq = [target * (1.0 + t) for t in (0.3, 0.2, 0.1)]
    report = boundary_limit_check(annulus256, p_seq, target, 1)
    errs = report["modulus_sup_errors"]
    assert errs[-1] < errs[0]


def test_order_counts_near_boundary_zeros(disk, annulus256):
    # a zero within ~1 node spacing of the boundary rotates the argument
    # faster than the grid resolves; the winding count must stay exact
    dom = disk.domain
    p = (1.0 - 0.8 * dom.node_spacing) * np.exp(0.9j)
    f = assemble_inner(disk, [p, 0.2 - 0.3j])
    assert order_of(f) == 2
    # annulus {1<|z|<e}: omega_1 = 1 - log|z|, so these two sum to 1
    g = assemble_inner(annulus256, [np.exp(0.97) * np.exp(0.4j),
                                    np.exp(0.03) * np.exp(-1.1j)])
    assert order_of(g) == 2
