"""Atomic measures on a quadric from their projections onto two hyperplanes through the origin."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.spatial import cKDTree

from .measures import AtomicMeasure, measure_distance, measures_equal, project_to_hyperplane
from .quadrics import Hyperplane, QuadricSurface, eval_p
from .reflections import is_isotropic

RANK_RATIO = 1e-8
MATCH_TOL = 1e-7


@dataclass(frozen=True)
class Reconstructed:
    measure: AtomicMeasure

    def to_dict(self) -> dict:
        return {"verdict": "measure", "measure": self.measure.to_dict()}


@dataclass(frozen=True)
class Ambiguous:
    """Projections do not pin down the weights: ``kernel`` is a nonzero measure with zero projections."""

    kernel: AtomicMeasure
    candidates: np.ndarray

    def to_dict(self) -> dict:
        return {"verdict": "ambiguous", "kernel": self.kernel.to_dict()}


@dataclass(frozen=True)
class Infeasible:
    reason: str

    def to_dict(self) -> dict:
        return {"verdict": "infeasible", "reason": self.reason}


Reconstruction = Union[Reconstructed, Ambiguous, Infeasible]


def _check_pair(S: QuadricSurface, H1: Hyperplane, H2: Hyperplane):
    if H1.s != 0 or H2.s != 0:
        raise ValueError("hyperplanes must pass through the origin")
    if abs(abs(float(H1.u @ H2.u)) - 1) <= 1e-12:
        raise ValueError("hyperplanes must be distinct")
    if is_isotropic(S, H1.u) or is_isotropic(S, H2.u):
        raise ValueError("normals must be non-isotropic")


def forward(mu: AtomicMeasure, H1: Hyperplane, H2: Hyperplane) -> tuple[AtomicMeasure, AtomicMeasure]:
    """Push-forwards onto ``H1`` and ``H2`` in the coordinates of ``H.basis()``."""
    return project_to_hyperplane(mu, H1), project_to_hyperplane(mu, H2)


def lift(S: QuadricSurface, H: Hyperplane, coords: np.ndarray, tol: float = MATCH_TOL) -> list[np.ndarray]:
    """Points of ``S`` projecting to ``coords`` on ``H``: real roots of ``P(y + t u) = 0``."""
    y = H.basis() @ np.asarray(coords, float)
    u = H.u
    a = float(S.Q(u))
    b = float(S.bilinear(y, u) + S.v @ u)
    c = float(eval_p(S, y))
    disc = b * b - a * c
    scale = max(b * b, abs(a * c), 1e-300)
    if disc < -tol * scale:
        return []
    if disc <= tol * scale:
        return [y - (b / a) * u]
    r = np.sqrt(disc)
    # the larger-magnitude root first, the other from Vieta to avoid cancellation
    t1 = -(b + np.copysign(r, b)) / a
    t2 = c / (a * t1) if t1 != 0 else -b / a
    return [y + t1 * u, y + t2 * u]


def _lifts(S, H, p: AtomicMeasure, tol) -> tuple[np.ndarray, np.ndarray]:
    pts, owner = [], []
    for i, a in enumerate(p.atoms):
        for x in lift(S, H, a, tol):
            pts.append(x)
            owner.append(i)
    d = S.d
    return np.array(pts).reshape(-1, d), np.array(owner, dtype=int)


def _mutual_nearest(X: np.ndarray, Y: np.ndarray, tol: float) -> list[tuple[int, int]]:
    if len(X) == 0 or len(Y) == 0:
        return []
    dxy, jx = cKDTree(Y).query(X)
    _, iy = cKDTree(X).query(Y)
    pairs = []
    for i, (dist, j) in enumerate(zip(dxy, jx)):
        if iy[j] == i and dist <= tol * max(1.0, float(np.linalg.norm(X[i]))):
            pairs.append((i, int(j)))
    return pairs


def reconstruct(
    S: QuadricSurface, H1: Hyperplane, H2: Hyperplane, p1: AtomicMeasure, p2: AtomicMeasure, tol: float = MATCH_TOL
) -> Reconstruction:
    """Lift both projections to ``S``, keep candidates seen from both sides and solve for the weights."""
    _check_pair(S, H1, H2)
    p1, p2 = p1.pruned(1e-14), p2.pruned(1e-14)
    if len(p1) == 0 and len(p2) == 0:
        return Reconstructed(AtomicMeasure.zero(S.d))
    L1, own1 = _lifts(S, H1, p1, tol)
    L2, own2 = _lifts(S, H2, p2, tol)
    pairs = _mutual_nearest(L1, L2, tol)
    if not pairs:
        return Infeasible("no lifted point is shared by both projections")
    C = np.array([(L1[i] + L2[j]) / 2 for i, j in pairs])
    M = np.zeros((len(p1) + len(p2), len(C)))
    for k, (i, j) in enumerate(pairs):
        M[own1[i], k] = 1.0
        M[len(p1) + own2[j], k] = 1.0
    rhs = np.concatenate([p1.weights, p2.weights])
    sv = np.linalg.svd(M, compute_uv=False)
    if len(C) > M.shape[0] or sv.min() <= RANK_RATIO * sv.max():
        _, _, Vt = np.linalg.svd(M)
        kernel = AtomicMeasure(C, Vt[-1].astype(complex), merge_radius=0.0)
        return Ambiguous(kernel, C)
    w, *_ = np.linalg.lstsq(M.astype(complex), rhs, rcond=None)
    mu = AtomicMeasure(C, w).pruned(1e-14)
    q1, q2 = forward(mu, H1, H2)
    tv = max(p1.total_variation, p2.total_variation, 1e-300)
    if measure_distance(q1, p1) > tol * tv or measure_distance(q2, p2) > tol * tv:
        return Infeasible("candidate weights do not reproduce the projections")
    return Reconstructed(mu)


def uniqueness_demo(
    S: QuadricSurface, H1: Hyperplane, H2: Hyperplane, mu: AtomicMeasure, nu: AtomicMeasure, tol: float = 1e-8
) -> bool:
    """With equal projections on ``H1`` and ``H2``, are ``mu`` and ``nu`` the same measure?"""
    _check_pair(S, H1, H2)
    a1, a2 = forward(mu, H1, H2)
    b1, b2 = forward(nu, H1, H2)
    tv = max(mu.total_variation, nu.total_variation, 1e-300)
    if measure_distance(a1, b1) > tol * tv or measure_distance(a2, b2) > tol * tv:
        raise ValueError("the two measures have different projections")
    return measures_equal(mu, nu, tol)
