"""Planar conics against two lines through the origin of frequency space."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coxeter import line_angle
from .counterexamples import CertificateError, certify, dihedral_orbit
from .decision import Decision, Verdict
from .measures import AtomicMeasure
from .quadrics import CLASSIFY_TOL, Hyperplane, QuadricSurface, _eigh_sorted, full_rank_normal_form
from .rational import ANGLE_TOL, MAXDEN, Rational, rational_angle
from .reflections import QReflection

__all__ = ["NormalizedConic", "normalize_conic", "decide_2d", "rational_angle", "DIRECTION_TOL"]

# two transported directions closer than this (sine of the angle) count as the same line
DIRECTION_TOL = 1e-9

_XY = np.array([[0.0, 0.5], [0.5, 0.0]])
_CANONICAL = {
    "line": QuadricSurface(np.zeros((2, 2)), [0.0, 0.5], 0.0),
    "parabola": QuadricSurface(np.diag([1.0, 0.0]), [0.0, -0.5], 0.0),
    "circle": QuadricSurface(np.eye(2), [0.0, 0.0], 1.0),
    "hyperbola": QuadricSurface(_XY, [0.0, 0.0], 1.0),
    "cone": QuadricSurface(_XY, [0.0, 0.0], 0.0),
    "parallel_lines": QuadricSurface(np.diag([1.0, 0.0]), [0.0, 0.0], 1.0),
    "point": QuadricSurface(np.eye(2), [0.0, 0.0], 0.0),
}


@dataclass(frozen=True, eq=False)
class NormalizedConic:
    """``z = A x + b`` carries the input conic onto the canonical curve of type ``kind``."""

    kind: str
    A: np.ndarray
    b: np.ndarray

    @property
    def surface(self) -> Optional[QuadricSurface]:
        return _CANONICAL.get(self.kind)

    def forward(self, x) -> np.ndarray:
        return np.asarray(x, float) @ self.A.T + self.b

    def inverse(self, z) -> np.ndarray:
        return np.linalg.solve(self.A, (np.asarray(z, float) - self.b).T).T

    def transport_direction(self, d) -> np.ndarray:
        """Frequency-side image ``A^{-T} d`` of a line direction, normalized."""
        w = np.linalg.solve(self.A.T, np.asarray(d, float))
        return w / np.linalg.norm(w)


def normalize_conic(S2: QuadricSurface, tol: float = CLASSIFY_TOL) -> NormalizedConic:
    if S2.d != 2:
        raise ValueError("planar conic expected")
    B, v, rho = S2.B, S2.v, S2.rho
    big = max(np.abs(B).max(), np.abs(v).max(), abs(rho))
    if np.abs(B).max() <= tol * big:
        n = v / np.linalg.norm(v)
        A = np.array([[-n[1], n[0]], n])
        return NormalizedConic("line", A, np.array([0.0, -rho / (2 * np.linalg.norm(v))]))

    nf = full_rank_normal_form(S2, tol)
    if nf is not None:
        if nf.p == 0 and nf.level > 0:
            return NormalizedConic("empty", np.eye(2), np.zeros(2))
        if nf.level == 0 and nf.p == 0:
            return NormalizedConic("point", nf.A, nf.b)
        if nf.q == 0:
            return NormalizedConic("circle", nf.A, nf.b)
        # x^2 - y^2 = level becomes XY = level under X = x + y, Y = x - y
        M = np.array([[1.0, 1.0], [1.0, -1.0]])
        return NormalizedConic("hyperbola" if nf.level > 0 else "cone", M @ nf.A, M @ nf.b)

    lam, R = _eigh_sorted(B, tol)
    lam1, w1, w2 = lam[0], R[:, 0], R[:, 1]
    alpha, beta = float(w1 @ v), float(w2 @ v)
    if abs(beta) > tol * big:
        A = np.array([w1, -(2 * beta / lam1) * w2])
        return NormalizedConic("parabola", A, np.array([alpha / lam1, (rho + alpha**2 / lam1) / lam1]))
    c = (rho + alpha**2 / lam1) / lam1
    if abs(c) <= tol * max(1.0, abs(rho / lam1), (alpha / lam1) ** 2):
        return NormalizedConic("line", np.array([w2, w1]), np.array([0.0, alpha / lam1]))
    if c < 0:
        return NormalizedConic("empty", np.eye(2), np.zeros(2))
    r = math.sqrt(c)
    return NormalizedConic("parallel_lines", np.array([w1 / r, w2]), np.array([alpha / (lam1 * r), 0.0]))


def _perp(d) -> np.ndarray:
    return np.array([-d[1], d[0]])


def _parallel(a, b, tol: float = DIRECTION_TOL) -> bool:
    a = np.asarray(a, float) / np.linalg.norm(a)
    b = np.asarray(b, float) / np.linalg.norm(b)
    return abs(a[0] * b[1] - a[1] * b[0]) <= tol


def _reflection_pair_certificate(surface: QuadricSurface, n1, n2, x0) -> AtomicMeasure:
    """``delta_x - delta_{R1 x} - delta_{R2 x} + delta_{-x}`` for Q-orthogonal normals (``R1 R2 = -I``)."""
    x0 = np.asarray(x0, float)
    R1, R2 = QReflection(surface, n1), QReflection(surface, n2)
    atoms = np.vstack([x0, R1(x0), R2(x0), -x0])
    return AtomicMeasure(atoms, [1.0, -1.0, -1.0, 1.0])


def _shear_certificate(direction) -> AtomicMeasure:
    """On ``x^2 = 1`` against the horizontal line and the line along ``direction``."""
    # reflection through the line's normal maps (1, y) to (-1, y - 2c)
    alpha, beta = direction
    c = -alpha / beta
    atoms = [[1.0, 0.0], [1.0, 1.0], [-1.0, -2 * c], [-1.0, 1 - 2 * c]]
    return AtomicMeasure(atoms, [1.0, -1.0, -1.0, 1.0])


def decide_2d(
    S2: QuadricSurface,
    line1,
    line2,
    maxden: int = MAXDEN,
    tol: float = ANGLE_TOL,
    points_per_axis: int = 64,
    half_extent: float = 20.0,
) -> Decision:
    """Uniqueness for a conic ``S2`` against the union of two lines through 0 with the given directions."""
    d1, d2 = (np.asarray(x, float) for x in (line1, line2))
    if d1.shape != (2,) or d2.shape != (2,):
        raise ValueError("line directions must be planar vectors")
    d1, d2 = d1 / np.linalg.norm(d1), d2 / np.linalg.norm(d2)
    if _parallel(d1, d2, 1e-12):
        raise ValueError("the two lines coincide")
    nc = normalize_conic(S2)
    e1, e2 = nc.transport_direction(d1), nc.transport_direction(d2)
    lines = [Hyperplane(_perp(d1)), Hyperplane(_perp(d2))]

    def certified(mu_canonical: AtomicMeasure, rule: str, notes=()) -> Decision:
        mu = AtomicMeasure(nc.inverse(mu_canonical.atoms), mu_canonical.weights)
        try:
            certify(mu, lines, S2, points_per_axis=points_per_axis, half_extent=half_extent)
        except CertificateError as exc:
            return Decision(Verdict.UNDECIDED, rule, notes=[f"certificate failed verification: {exc}"])
        return Decision(Verdict.NOT_HUP, rule, mu, list(notes))

    kind = nc.kind
    if kind == "empty":
        return Decision(Verdict.HUP, "empty", notes=["the curve has no real points"])
    if kind == "point":
        return Decision(Verdict.HUP, "point", notes=["a point mass is detected at the origin of frequency space"])
    if kind == "line":
        return Decision(Verdict.HUP, "th:dim2(i)", notes=["at most one of two distinct lines is orthogonal to the curve"])
    if kind == "parabola":
        return Decision(Verdict.HUP, "th:dim2(ii)")

    if kind == "circle":
        theta = line_angle(e1, e2)
        verdict = rational_angle(theta, maxden, tol)
        if isinstance(verdict, Rational):
            mu = dihedral_orbit(_perp(e1), verdict.q)
            return certified(mu, "th:dim2(iii)", [f"angle = pi*{verdict.p}/{verdict.q}"])
        return Decision(
            Verdict.HUP, "th:dim2(iii)", notes=[f"angle/pi has no fraction with denominator <= {maxden}"], maxden=maxden
        )

    if kind in ("hyperbola", "cone"):
        rule = "th:dim2(iv)" if kind == "hyperbola" else "th:dim2(v)"
        a, b = e1
        if not _parallel(e2, (-a, b)):
            return Decision(Verdict.HUP, rule)
        # Q-orthogonal normals: the two reflections compose to -I and a four-point orbit is annihilated
        x0 = np.array([1.37, 1 / 1.37]) if kind == "hyperbola" else np.array([1.37, 0.0])
        mu = _reflection_pair_certificate(nc.surface, _perp(e1), _perp(e2), x0)
        return certified(mu, rule, ["exceptional partner line: the reflections commute with product -I"])

    # parallel lines x^2 = 1: a horizontal frequency line only sees the mass on each vertical line
    horizontal = [i for i, e in enumerate((e1, e2)) if _parallel(e, (1.0, 0.0))]
    if not horizontal:
        return Decision(Verdict.HUP, "th:dim2(vi)")
    other = (e2, e1)[horizontal[0]]
    return certified(_shear_certificate(other), "th:dim2(vi)", ["one line is orthogonal to the two parallel lines"])
