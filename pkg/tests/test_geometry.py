"""Boundary curves, domain validation, and point classification."""

import numpy as np
import pytest

from mcinner.geometry import (BoundaryCurve, Domain, DomainError, load_domain,
                              parse_domain)

from conftest import annulus_domain, circle, two_hole_domain


def test_circle_parametrization():
    c = circle(0.3 + 0.1j, 1.5, 64)
    theta = np.linspace(0.0, 2 * np.pi, 17)
    z = c.point(theta)
    assert np.allclose(z, 0.3 + 0.1j + 1.5 * np.exp(1j * theta), atol=1e-14)
    assert np.allclose(c.derivative(theta), 1.5j * np.exp(1j * theta),
                       atol=1e-14)
    assert np.allclose(c.second_derivative(theta), -1.5 * np.exp(1j * theta),
                       atol=1e-14)


def test_signed_area_and_reversal():
    c = circle(0.0, 2.0, 64)
    assert c.signed_area() == pytest.approx(4 * np.pi, rel=1e-12)
    assert c.reversed().signed_area() == pytest.approx(-4 * np.pi, rel=1e-12)


def test_ellipse_area():
    # z = 2cos(t) + i sin(t): coefficients (1±1/2 ... ) from the cos/sin mix
    coeffs = np.array([0.5, 0.0, 1.5], dtype=complex)
    c = BoundaryCurve(coeffs, 64)
    # semi-axes a = 1.5 + 0.5 = 2, b = 1.5 - 0.5 = 1
    assert c.signed_area() == pytest.approx(2 * np.pi, rel=1e-12)


def test_domain_orientation_and_normals():
    dom = annulus_domain(64)
    # outward normal on the outer circle |z| = e points radially out
    sl = dom.curve_slices[0]
    z = dom.nodes[sl]
    assert np.allclose(dom.normals[sl], z / np.abs(z), atol=1e-12)
    # on the hole |z| = 1 the outward normal points toward the origin
    sl = dom.curve_slices[1]
    z = dom.nodes[sl]
    assert np.allclose(dom.normals[sl], -z / np.abs(z), atol=1e-12)
    assert np.allclose(dom.normals, -1j * dom.tangents, atol=1e-14)


def test_winding_and_interior_classification():
    dom = two_hole_domain(64)
    inside = np.array([0.0 + 1.0j, 1.5 + 0.0j, -1.2 - 0.7j])
    outside = np.array([3.0 + 0.0j, -0.8 + 0.3j, 0.9 - 0.25j])
    assert np.all(dom.is_interior(inside))
    assert not np.any(dom.is_interior(outside))
    assert np.allclose(dom.winding(inside), 1.0, atol=1e-8)


def test_distance_to_boundary():
    dom = annulus_domain(96)
    z = np.array([1.5 + 0.0j, 2.0j])
    d = dom.distance_to_boundary(z)
    assert d[0] == pytest.approx(0.5, abs=2e-3)
    assert d[1] == pytest.approx(np.e - 2.0, abs=2e-3)


def test_parse_domain_roundtrip(tmp_path):
    text = """
curve outer
nodes 80
coeff 1 2 0
curve hole
nodes 64
coeff 0 0.5 0.1
coeff 1 0.3 0
"""
    dom = parse_domain(text)
    assert dom.k == 1
    assert dom.outer.n_nodes == 80
    assert dom.holes[0].n_nodes == 64
    path = tmp_path / "dom.txt"
    path.write_text(text)
    dom2 = load_domain(path)
    assert np.allclose(dom2.nodes, dom.nodes)


def test_invalid_domains_rejected():
    with pytest.raises(DomainError):
        # hole outside the outer curve
        Domain(circle(0.0, 1.0, 64), [circle(5.0, 0.3, 64)])
    with pytest.raises(DomainError):
        # overlapping hole and outer boundary
        Domain(circle(0.0, 1.0, 64), [circle(0.9, 0.5, 64)])
