import math

import numpy as np
import pytest

from hupcert.counterexamples import certify
from hupcert.decision import Verdict
from hupcert.hup_decide import (
    Settings,
    decide,
    decide_parallel_family,
    decide_single,
    decide_sphere_parallel,
)
from hupcert.quadrics import Hyperplane, QuadricSurface

from conftest import planes, random_surface, unit

SPHERE = QuadricSurface.sphere(3)
HYPERBOLOID = QuadricSurface.diagonal(2, 1, 1.0)
PARABOLOID = QuadricSurface(np.diag([1.0, 1.0, 0.0]), [0, 0, -0.5], 0)


def assert_certified(D, S, hs):
    assert D.verdict is Verdict.NOT_HUP
    certify(D.certificate, hs, S, points_per_axis=32)


def test_single_hyperplane(rng):
    for _ in range(10):
        S = random_surface(rng, 3, "definite")
        H = Hyperplane(unit(rng.normal(size=3)), float(rng.normal()))
        D = decide_single(S, H)
        assert D.rule == "cor:c(ii)"
        assert_certified(D, S, [H])


def test_single_isotropic_hyperplane():
    cone = QuadricSurface(np.diag([1.0, -1.0, -1.0]), [0, 0, 0], 0)
    hs = planes([1, 1, 0])
    D = decide(cone, hs)
    assert_certified(D, cone, hs)
    # x^2 - y^2 = 1 in the plane: no point with x = y, so E_u is empty
    assert decide(QuadricSurface(np.diag([1.0, -1.0]), [0, 0], 1), planes([1, 1])).verdict is Verdict.HUP


def test_line_as_a_surface():
    line = QuadricSurface(np.zeros((2, 2)), [0, 0.5], 0)
    assert decide(line, planes([1, 0])).verdict is Verdict.NOT_HUP
    assert decide(line, planes([1, 1])).verdict is Verdict.HUP


@pytest.mark.parametrize("theta, verdict", [(math.pi / 4, Verdict.NOT_HUP), (math.pi / 3, Verdict.NOT_HUP), (1.0, Verdict.HUP)])
def test_sphere_two_planes(theta, verdict):
    hs = planes([1, 0, 0], [math.cos(theta), math.sin(theta), 0])
    D = decide(SPHERE, hs)
    assert D.verdict is verdict
    if verdict is Verdict.NOT_HUP:
        assert D.rule == "th:dim2(iii)"
        certify(D.certificate, hs, SPHERE, points_per_axis=32)


def test_paraboloid_two_coordinate_planes():
    hs = planes([1, 0, 0], [0, 1, 0])
    assert_certified(decide(PARABOLOID, hs), PARABOLOID, hs)


def test_cylinder():
    cyl = QuadricSurface(np.diag([1.0, 1.0, 0.0]), [0, 0, 0], 1)
    # circular fibers at a right angle
    hs = planes([1, 0, 0], [0, 1, 0])
    assert_certified(decide(cyl, hs), cyl, hs)
    # fibers along (e1, e3) are pairs of lines, and neither frequency line is orthogonal to them
    D = decide(cyl, planes([1, 0, 0], [1, 0, 1]))
    assert D.verdict is Verdict.HUP
    assert "ParallelLines" in " ".join(D.notes)


def test_parallel_family_on_hyperboloid():
    u = np.array([1.0, 0, 0])
    assert decide_parallel_family(HYPERBOLOID, u, [0, math.sqrt(2), math.sqrt(3)]).verdict is Verdict.HUP
    hs = [Hyperplane(u, s) for s in (1.0, 2.0, 3.0)]
    D = decide(HYPERBOLOID, hs)
    assert D.rule == "chord-pair"
    assert_certified(D, HYPERBOLOID, hs)


@pytest.mark.parametrize("s, verdict", [(2.0, Verdict.NOT_HUP), (0.5, Verdict.HUP)])
def test_sphere_two_parallel_planes(s, verdict):
    u = unit([0, 1, 1])
    D = decide_sphere_parallel(u, [-s, s])
    assert D.verdict is verdict
    assert any("pi/2" in n for n in D.notes)


def test_sphere_three_parallel_planes():
    u = np.array([0, 0, 1.0])
    assert decide(SPHERE, [Hyperplane(u, s) for s in (0, math.sqrt(2), math.sqrt(3))]).verdict is Verdict.HUP
    hs = [Hyperplane(u, s) for s in (0.0, 4.0, 8.0)]
    assert_certified(decide(SPHERE, hs), SPHERE, hs)


def test_circle_three_lines():
    hs = planes(*[[math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)] for k in range(3)])
    D = decide(QuadricSurface.sphere(2), hs)
    assert D.verdict is Verdict.NOT_HUP and len(D.certificate) == 6


def test_sphere_coxeter_families():
    phi = (1 + math.sqrt(5)) / 2
    H3 = planes([1, 0, 0], [0, 1, 0], [0, 0, 1], [phi, 1 / phi, 1])
    D = decide(SPHERE, H3)
    assert D.verdict is Verdict.NOT_HUP and len(D.certificate) == 120
    irrational = planes([1, 0, 0], [math.cos(1), math.sin(1), 0], [0, 0, 1])
    assert decide(SPHERE, irrational).verdict is Verdict.HUP


def test_translated_concurrent_planes():
    # the two planes meet in a line through (0.3, -0.2, 0.1) instead of the origin
    xi0 = np.array([0.3, -0.2, 0.1])
    hs = [Hyperplane(u, float(u @ xi0)) for u in (np.array([1.0, 0, 0]), unit([1, 1, 0]))]
    D = decide(SPHERE, hs)
    assert_certified(D, SPHERE, hs)


def test_seed_controls_the_certificate():
    S = QuadricSurface.sphere(3)
    hs = planes([1, 2, 3])
    a, b = decide(S, hs, seed=5), decide(S, hs, seed=5)
    assert np.array_equal(a.certificate.atoms, b.certificate.atoms)


def test_grid_cap_in_high_dimension():
    assert Settings().grid_axis(2) == 64
    assert Settings().grid_axis(6) ** 5 <= 1 << 18


def test_empty_surface_and_dimension_mismatch():
    assert decide(QuadricSurface(np.eye(2), [0, 0], -1), planes([1, 0])).verdict is Verdict.HUP
    with pytest.raises(ValueError):
        decide(SPHERE, planes([1, 0]))
