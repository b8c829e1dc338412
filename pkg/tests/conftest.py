"""Shared fixtures: canonical domains with cached measure sets.

Session scope keeps the boundary-integral factorizations shared across
tests; the heavy 256-node versions are built once for the acceptance run.
"""

import numpy as np
import pytest

from mcinner.geometry import BoundaryCurve, Domain
from mcinner.laplace import harmonic_measures


def circle(center: complex, radius: float, n_nodes: int) -> BoundaryCurve:
    return BoundaryCurve(np.array([0.0, center, radius], dtype=complex),
                         n_nodes)


def disk_domain(n_nodes: int = 96) -> Domain:
    return Domain(circle(0.0, 1.0, n_nodes), [])


def annulus_domain(n_nodes: int = 96) -> Domain:
    return Domain(circle(0.0, float(np.e), n_nodes),
                  [circle(0.0, 1.0, n_nodes)])


def one_hole_domain(n_nodes: int = 96) -> Domain:
    # hole off-center and off-axis so the configuration has no reflection
    # symmetry (symmetric configurations degenerate certificate tests)
    return Domain(circle(0.0, 1.0, n_nodes),
                  [circle(0.4 + 0.15j, 0.22, n_nodes)])


def two_hole_domain(n_nodes: int = 96) -> Domain:
    return Domain(circle(0.0, 2.0, n_nodes),
                  [circle(-0.8 + 0.3j, 0.35, n_nodes),
                   circle(0.9 - 0.25j, 0.4, n_nodes)])


@pytest.fixture(scope="session")
def disk():
    return harmonic_measures(disk_domain())


@pytest.fixture(scope="session")
def annulus():
    return harmonic_measures(annulus_domain())


@pytest.fixture(scope="session")
def one_hole():
    return harmonic_measures(one_hole_domain())


@pytest.fixture(scope="session")
def two_hole():
    return harmonic_measures(two_hole_domain())


@pytest.fixture(scope="session")
def disk256():
    return harmonic_measures(disk_domain(256))


@pytest.fixture(scope="session")
def annulus256():
    return harmonic_measures(annulus_domain(256))


@pytest.fixture(scope="session")
def one_hole256():
    return harmonic_measures(one_hole_domain(256))


@pytest.fixture(scope="session")
def two_hole256():
    return harmonic_measures(two_hole_domain(256))


def random_interior(domain: Domain, rng, count: int, margin: float = 0.1,
                    separation: float = 0.15):
    """Pairwise separated interior points clear of the boundary."""
    lo_x, hi_x = domain.nodes.real.min(), domain.nodes.real.max()
    lo_y, hi_y = domain.nodes.imag.min(), domain.nodes.imag.max()
    pts = []
    for _ in range(20000):
        z = complex(rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y))
        if not domain.is_interior(z)[0]:
            continue
        if domain.distance_to_boundary(z) < margin:
            continue
        if any(abs(z - w) < separation for w in pts):
            continue
        pts.append(z)
        if len(pts) == count:
            return np.array(pts)
    raise RuntimeError("could not place the requested interior points")
