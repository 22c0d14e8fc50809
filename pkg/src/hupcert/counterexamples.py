"""Nonzero atomic measures whose characteristic functions vanish on prescribed hyperplanes."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .coxeter import Finite, generic_orbit
from .measures import AtomicMeasure, GridSpec, verify_vanishing
from .quadrics import (
    Hyperplane,
    QuadricSurface,
    frame_with_first,
    on_surface,
    orthonormal_complement,
    quadric_point,
    sample_surface_point,
    scale,
)
from .reflections import QReflection, in_Eu, q_reflect

SEARCH_RETRIES = 64


class CertificateError(ValueError):
    """A construction could not produce a valid annihilated measure."""


def certify(
    mu: AtomicMeasure,
    hyperplanes: Sequence[Hyperplane],
    S: Optional[QuadricSurface] = None,
    tol: float = 1e-10,
    points_per_axis: int = 64,
    half_extent: float = 20.0,
) -> list:
    """Check support, nonvanishing and grid vanishing on every hyperplane; raise on failure."""
    if len(mu) == 0 or mu.is_zero(1e-12):
        raise CertificateError("certificate is the zero measure")
    if S is not None and not np.all(on_surface(S, mu.atoms, 1e-9)):
        raise CertificateError("certificate atoms are not on the surface")
    reports = []
    for H in hyperplanes:
        rep = verify_vanishing(mu, H, GridSpec.on_hyperplane(H, points_per_axis, half_extent), tol)
        if not rep.passed:
            raise CertificateError(
                f"Fourier transform does not vanish on hyperplane u={H.u.tolist()}, s={H.s}: max {rep.max_abs:.3e}"
            )
        reports.append(rep)
    return reports


def find_moving_point(S: QuadricSurface, u, rng: np.random.Generator, retries: int = SEARCH_RETRIES):
    """A point ``x`` of ``S`` with ``B(x, u) + <v, u>`` clearly nonzero, or ``None``."""
    u = np.asarray(u, float)
    for _ in range(retries):
        try:
            x = sample_surface_point(S, rng)
        except ValueError:
            return None
        if abs(float(S.bilinear(x, u) + S.v @ u)) > 1e-6 * max(1.0, scale(S, x)):
            return x
    return None


def two_point(
    S: QuadricSurface, H: Hyperplane, x=None, rng: Optional[np.random.Generator] = None
) -> AtomicMeasure:
    """``e^{-is<x,u>} delta_x - e^{-is<y,u>} delta_y`` with ``y`` the Q-reflection of ``x``."""
    rng = np.random.default_rng(0) if rng is None else rng
    R = QReflection(S, H.u)
    if x is None:
        x = find_moving_point(S, H.u, rng)
        if x is None:
            raise CertificateError("every sampled point is fixed by the reflection")
    x = np.asarray(x, float)
    if not on_surface(S, x):
        raise CertificateError("base point is not on the surface")
    y = q_reflect(R, x)
    if np.linalg.norm(y - x) <= 1e-9:
        raise CertificateError("base point is fixed by the reflection")
    return _pair_on_fiber(x, y, H)


def _pair_on_fiber(x, y, H: Hyperplane) -> AtomicMeasure:
    wx = np.exp(-1j * H.s * float(x @ H.u))
    wy = -np.exp(-1j * H.s * float(y @ H.u))
    return AtomicMeasure(np.vstack([x, y]), [wx, wy])


def fiber_line_pair(S: QuadricSurface, H: Hyperplane, x) -> AtomicMeasure:
    """Two points of a line ``x + R u`` contained in ``S`` (isotropic ``u``), phased for ``H_{u,s}``."""
    x = np.asarray(x, float)
    y = x + H.u
    if not (on_surface(S, x) and on_surface(S, y)):
        raise CertificateError("line x + R u is not contained in the surface")
    return _pair_on_fiber(x, y, H)


def antipodal_pair(S: QuadricSurface, witness, normals: Sequence, tol: float = 1e-9) -> AtomicMeasure:
    """``delta_x - delta_{-x}`` for a nonzero ``x`` in ``S ∩ E_{u_1} ∩ ... ∩ E_{u_k}``.

    The transform is ``2i sin <x, xi>``, so it only vanishes on ``u^perp`` when ``x`` is
    parallel to ``u``; such witnesses exist on a cone with a single normal (``x = u``).
    Use ``isotropic_box`` for the general case.
    """
    x = np.asarray(witness, float)
    nx = np.linalg.norm(x)
    if nx <= 1e-12:
        raise CertificateError("witness must be nonzero")
    for pt in (x, -x):
        if not on_surface(S, pt, tol):
            raise CertificateError("witness is not on the surface")
        for u in normals:
            if not in_Eu(S, u, pt, tol):
                raise CertificateError("witness is not in every E_u")
    for u in normals:
        u = np.asarray(u, float) / np.linalg.norm(u)
        if np.linalg.norm(x - (x @ u) * u) > tol * nx:
            raise CertificateError("the pair only cancels along u when the witness is parallel to u")
    return AtomicMeasure(np.vstack([x, -x]), [1.0, -1.0])


BOX_LIMIT = 16


def isotropic_box(S: QuadricSurface, x, normals: Sequence, tol: float = 1e-9) -> AtomicMeasure:
    """``delta_x * prod_j (delta_0 - delta_{u_j})`` for pairwise Q-orthogonal isotropic ``u_j``.

    Its transform is ``e^{i<x,xi>} prod_j (1 - e^{i<u_j,xi>})``. All ``2^k`` atoms stay on
    ``S`` because ``x`` lies in every ``E_{u_j}`` and the span of the normals is totally isotropic.
    """
    U = np.atleast_2d(np.asarray(normals, float))
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    if len(U) > BOX_LIMIT:
        raise CertificateError(f"box certificate limited to {BOX_LIMIT} normals")
    G = U @ S.B @ U.T
    if np.abs(G).max() > tol * max(1.0, S.norm_B):
        raise CertificateError("normals are not pairwise Q-orthogonal and isotropic")
    x = np.asarray(x, float)
    if not on_surface(S, x, tol) or not all(in_Eu(S, u, x, tol) for u in U):
        raise CertificateError("base point is not in every E_u")
    mu = AtomicMeasure(x[None, :], [1.0])
    for u in U:
        mu = AtomicMeasure(np.vstack([mu.atoms, mu.atoms + u]), np.concatenate([mu.weights, -mu.weights]))
    if mu.is_zero(1e-12):
        raise CertificateError("box collapsed to the zero measure")
    return mu


def sphere_lattice(u, s: float, d: int, k: int = 1, direction=None) -> AtomicMeasure:
    """Measure on the unit sphere annihilated on ``H_{u,-s} ∪ H_{u,s}``.

    Atoms sit at height ``x_1 = pi k / (2 s)`` and its mirror image along ``u``, on the
    radius ``sqrt(1 - x_1^2)`` circle in direction ``direction`` (orthogonal to ``u``),
    with weights ``1`` and ``(-1)^(k-1)``.
    """
    if s <= 0:
        raise ValueError("half-separation must be positive")
    if k < 1:
        raise ValueError("k must be a positive integer")
    h = math.pi * k / (2.0 * s)
    if h > 1.0 + 1e-15:
        raise CertificateError(f"no admissible atom: pi k / (2 s) = {h:.6g} > 1")
    h = min(h, 1.0)
    F = frame_with_first(u)
    if direction is None:
        p = F[:, 1]
    else:
        p = np.asarray(direction, float)
        p = p - float(p @ F[:, 0]) * F[:, 0]
        p = p / np.linalg.norm(p)
    if F.shape[0] != d:
        raise ValueError("u has the wrong dimension")
    r = math.sqrt(max(0.0, 1.0 - h * h))
    top = h * F[:, 0] + r * p
    bottom = -h * F[:, 0] + r * p
    return AtomicMeasure(np.vstack([top, bottom]), [1.0, (-1.0) ** (k - 1)])


def orbit_antisymmetrization(G: Finite, x0=None, rng: Optional[np.random.Generator] = None) -> AtomicMeasure:
    """``sum_g det(g) delta_{g x0}`` over a free orbit on the unit sphere."""
    if G.order < 2:
        raise CertificateError("trivial group: a single atom is never annihilated")
    orbit = generic_orbit(G, x0, rng)
    return AtomicMeasure(orbit.points, orbit.signs.astype(complex))


def dihedral_orbit(n1, q: int, phase: float = 0.3) -> AtomicMeasure:
    """Antisymmetrized orbit on the unit circle of the dihedral group of order ``2q`` containing
    the reflection with normal ``n1``.

    Mirrors at angles ``pi p / q`` to the first (gcd(p, q) = 1) generate this group. Built from
    angles directly so that large ``q`` needs no matrix closure: ``q`` rotations by multiples of
    ``2 pi / q`` (sign +1) and ``q`` reflections (sign -1).
    """
    n1 = np.asarray(n1, float) / np.linalg.norm(n1)
    # mirror line of n1 has angle phi; reflecting angle alpha gives 2 phi - alpha
    phi = math.atan2(n1[1], n1[0]) + math.pi / 2
    alpha = phi + phase * math.pi / q
    k = np.arange(q)
    rot = alpha + 2 * math.pi * k / q
    ref = 2 * phi - alpha + 2 * math.pi * k / q
    ang = np.concatenate([rot, ref])
    atoms = np.column_stack([np.cos(ang), np.sin(ang)])
    weights = np.concatenate([np.ones(q), -np.ones(q)])
    return AtomicMeasure(atoms, weights)


def lift_fiber_certificate(
    S: QuadricSurface, x, u1, v2, planar: AtomicMeasure, tol: float = 1e-9
) -> AtomicMeasure:
    """Embed a measure on fiber coordinates (s, t) as atoms ``x + s u1 + t v2``."""
    if len(planar) == 0 or planar.is_zero(1e-12):
        raise CertificateError("planar certificate is the zero measure")
    x, u1, v2 = (np.asarray(a, float) for a in (x, u1, v2))
    atoms = x + planar.atoms[:, :1] * u1 + planar.atoms[:, 1:2] * v2
    if not np.all(on_surface(S, atoms, tol)):
        raise CertificateError("planar atom is off the fiber conic")
    return AtomicMeasure(atoms, planar.weights)


def restricted_point(S: QuadricSurface, normal, level: float, tol: float = 1e-9):
    """A point of ``S ∩ {<normal, x> = level}``, or ``None`` if that slice is empty."""
    n = np.asarray(normal, float)
    nn = float(n @ n)
    if nn == 0:
        return None
    x0 = level * n / nn
    N = orthonormal_complement(n / math.sqrt(nn))
    z = quadric_point(
        N.T @ S.B @ N,
        N.T @ (S.B @ x0 + S.v),
        S.rho - float(x0 @ S.B @ x0) - 2 * float(S.v @ x0),
        tol,
    )
    if z is None:
        return None
    x = x0 + N @ z
    return x if on_surface(S, x, tol) else None


def chord_pair(S: QuadricSurface, u, offsets: Sequence[float], length: float) -> Optional[AtomicMeasure]:
    """Two atoms on one chord of ``S`` along ``u`` of the given length, annihilated on every ``H_{u, s_j}``.

    Needs ``length * (s_i - s_j)`` in ``2 pi Z`` for all pairs of offsets. Returns ``None`` when
    no chord of that length exists.
    """
    u = np.asarray(u, float)
    u = u / np.linalg.norm(u)
    Qu = float(S.Q(u))
    if abs(Qu) <= 1e-12 * max(1.0, S.norm_B):
        raise ValueError("chords along an isotropic direction are whole lines")
    d = np.asarray(offsets, float) - offsets[0]
    if np.abs(np.exp(1j * length * d) - 1).max() > 1e-9:
        raise ValueError("chord length is incommensurate with the offsets")
    # y = x - (2 kappa / Q(u)) u with kappa = B(x,u) + <v,u>; ask for <x - y, u> = length
    x = restricted_point(S, S.B @ u, length * Qu / 2 - float(S.v @ u))
    if x is None:
        return None
    y = x - length * u
    s1 = float(offsets[0])
    return AtomicMeasure(np.vstack([x, y]), [np.exp(-1j * s1 * float(x @ u)), -np.exp(-1j * s1 * float(y @ u))])


def line_product(x, u, offsets: Sequence[float]) -> AtomicMeasure:
    """Atoms ``x + k u`` (k = 0..N) whose transform on ``H_{u,s}`` is ``prod_j (1 - e^{i(s - s_j)})``.

    This vanishes on each ``H_{u, s_j}`` whenever the whole line ``x + R u`` lies in the surface.
    """
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    u = u / np.linalg.norm(u)
    offsets = np.asarray(offsets, float)
    # coefficients of prod_j (1 - e^{-i s_j} z), lowest degree first
    coeffs = np.array([1.0 + 0j])
    for s in offsets:
        coeffs = np.convolve(coeffs, [1.0, -np.exp(-1j * s)])
    k = np.arange(len(coeffs))
    return AtomicMeasure(x + k[:, None] * u, coeffs)
