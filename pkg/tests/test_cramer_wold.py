import math

import numpy as np
import pytest

from hupcert.counterexamples import dihedral_orbit
from hupcert.cramer_wold import Ambiguous, Infeasible, Reconstructed, forward, lift, reconstruct, uniqueness_demo
from hupcert.measures import AtomicMeasure, char_fn, measures_equal
from hupcert.quadrics import Hyperplane, QuadricSurface, on_surface, sample_surface_point

from conftest import random_surface, unit

SURFACES = {
    "sphere": QuadricSurface.sphere(3),
    "paraboloid": QuadricSurface(np.diag([1.0, 1.0, 0.0]), [0, 0, -0.5], 0),
    "hyperboloid": QuadricSurface.diagonal(2, 1, 1.0),
}


def random_measure(S, rng, n):
    pts = np.array([sample_surface_point(S, rng) for _ in range(n)])
    return AtomicMeasure(pts, rng.normal(size=n) + 1j * rng.normal(size=n))


@pytest.mark.parametrize("name", sorted(SURFACES))
def test_round_trip(name, rng):
    S = SURFACES[name]
    for _ in range(15):
        H1 = Hyperplane(unit(rng.normal(size=3)))
        H2 = Hyperplane(unit(rng.normal(size=3)))
        mu = random_measure(S, rng, int(rng.integers(1, 6)))
        res = reconstruct(S, H1, H2, *forward(mu, H1, H2))
        assert isinstance(res, Reconstructed)
        assert measures_equal(res.measure, mu, 1e-8)


def test_lift_agrees_with_root_finding(rng):
    S = random_surface(rng, 3, "definite")
    H = Hyperplane(unit(rng.normal(size=3)))
    x = sample_surface_point(S, rng)
    pts = lift(S, H, x @ H.basis())
    assert len(pts) == 2 and all(on_surface(S, p) for p in pts)
    assert min(np.linalg.norm(p - x) for p in pts) < 1e-8


def test_dihedral_kernel_makes_reconstruction_ambiguous():
    # a D4 orbit on the equator has zero projections on both planes
    S = QuadricSurface.sphere(3)
    H1, H2 = Hyperplane([1.0, 0, 0]), Hyperplane(unit([1, 1, 0]))
    orbit = dihedral_orbit([1.0, 0.0], 4)
    kernel = AtomicMeasure(np.column_stack([orbit.atoms, np.zeros(8)]), orbit.weights)
    res = reconstruct(S, H1, H2, *forward(kernel, H1, H2))
    assert isinstance(res, Reconstructed) and res.measure.is_zero(1e-12)
    # the positive half of the orbit lifts to all eight points from either side
    half = AtomicMeasure(kernel.atoms[kernel.weights.real > 0])
    res = reconstruct(S, H1, H2, *forward(half, H1, H2))
    assert isinstance(res, Ambiguous) and len(res.candidates) == 8
    xi = np.random.default_rng(0).normal(size=(40, 3)) * 5
    for H in (H1, H2):
        on_plane = xi - np.outer(xi @ H.u, H.u)
        assert np.abs(char_fn(res.kernel, on_plane)).max() < 1e-10 * res.kernel.total_variation


def test_projections_without_a_common_lift():
    S = QuadricSurface.sphere(3)
    H1, H2 = Hyperplane([1.0, 0, 0]), Hyperplane([0, 1.0, 0])
    p1 = AtomicMeasure([[0.0, 0.0]])
    p2 = AtomicMeasure([[0.9, 0.0]])
    assert isinstance(reconstruct(S, H1, H2, p1, p2), Infeasible)


def test_uniqueness_demo(rng):
    S = SURFACES["hyperboloid"]
    H1, H2 = Hyperplane([1.0, 0, 0]), Hyperplane([0, 0.6, 0.8])
    mu = random_measure(S, rng, 4)
    assert uniqueness_demo(S, H1, H2, mu, mu)
    with pytest.raises(ValueError):
        uniqueness_demo(S, H1, H2, mu, random_measure(S, rng, 4))


def test_preconditions():
    S = QuadricSurface.sphere(3)
    with pytest.raises(ValueError):
        reconstruct(S, Hyperplane([1.0, 0, 0], 1.0), Hyperplane([0, 1.0, 0]), AtomicMeasure.zero(2), AtomicMeasure.zero(2))
    with pytest.raises(ValueError):
        reconstruct(S, Hyperplane([1.0, 0, 0]), Hyperplane([-1.0, 0, 0]), AtomicMeasure.zero(2), AtomicMeasure.zero(2))
