"""Finiteness of groups generated by Euclidean reflections; roots, sign character and free orbits."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial import cKDTree

from .rational import ANGLE_TOL, MAXDEN, IrrationalUpTo, rational_angle

DEDUP_TOL = 1e-8
GROUP_CAP = 20000
ROOT_CAP = 5000
ORBIT_RETRIES = 64
MIRROR_DISTANCE = 1e-6


def canonical_sign(u: np.ndarray) -> np.ndarray:
    """Flip ``u`` so that its first component above 1e-12 in magnitude is positive."""
    nz = np.nonzero(np.abs(u) > 1e-12)[0]
    return -u if nz.size and u[nz[0]] < 0 else u


def reflection_matrix(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    return np.eye(len(u)) - 2.0 * np.outer(u, u)


class ReflectionSet:
    """Unit normals of mirror hyperplanes through the origin, pairwise non-parallel."""

    def __init__(self, normals):
        U = np.atleast_2d(np.asarray(normals, dtype=float))
        if U.size == 0:
            raise ValueError("at least one normal is required")
        norms = np.linalg.norm(U, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero normal")
        U = np.array([canonical_sign(u / n) for u, n in zip(U, norms)])
        G = np.abs(U @ U.T) - np.eye(len(U))
        if len(U) > 1 and G.max() > 1 - 1e-10:
            raise ValueError("two normals are parallel")
        U.setflags(write=False)
        self.normals = U

    @property
    def d(self) -> int:
        return self.normals.shape[1]

    def __len__(self) -> int:
        return len(self.normals)

    def generators(self) -> list[np.ndarray]:
        return [reflection_matrix(u) for u in self.normals]


@dataclass(frozen=True)
class Finite:
    order: int
    elements: list

    def to_dict(self) -> dict:
        return {"type": "Finite", "order": self.order}


@dataclass(frozen=True)
class AngleWitness:
    root_a: np.ndarray
    root_b: np.ndarray
    theta: float


@dataclass(frozen=True)
class RootOverflow:
    cap: int


@dataclass(frozen=True)
class Infinite:
    witness: Union[AngleWitness, RootOverflow]

    def to_dict(self) -> dict:
        w = self.witness
        if isinstance(w, AngleWitness):
            info = {"kind": "angle", "roots": [w.root_a.tolist(), w.root_b.tolist()], "theta": w.theta}
        else:
            info = {"kind": "root_overflow", "cap": w.cap}
        return {"type": "Infinite", "witness": info}


@dataclass(frozen=True)
class Inconclusive:
    cap: int

    def to_dict(self) -> dict:
        return {"type": "Inconclusive", "cap": self.cap}


CoxeterVerdict = Union[Finite, Infinite, Inconclusive]


class _TolerantSet:
    """Arrays deduplicated at a Frobenius tolerance using two staggered rounding grids."""

    def __init__(self, tol: float = DEDUP_TOL, cell: float = 1e-4):
        self.tol = tol
        self.cell = cell
        self.items: list[np.ndarray] = []
        self._grids: tuple[dict, dict] = ({}, {})

    def _keys(self, a: np.ndarray):
        flat = a.ravel() / self.cell
        return tuple(np.floor(flat).astype(np.int64)), tuple(np.floor(flat + 0.5).astype(np.int64))

    def find(self, a: np.ndarray) -> Optional[int]:
        for grid, key in zip(self._grids, self._keys(a)):
            for idx in grid.get(key, ()):
                if np.linalg.norm(self.items[idx] - a) <= self.tol:
                    return idx
        return None

    def add(self, a: np.ndarray) -> tuple[int, bool]:
        idx = self.find(a)
        if idx is not None:
            return idx, False
        idx = len(self.items)
        self.items.append(a)
        for grid, key in zip(self._grids, self._keys(a)):
            grid.setdefault(key, []).append(idx)
        return idx, True

    def __len__(self) -> int:
        return len(self.items)


def _closure_bfs(rs: ReflectionSet, cap: int) -> Optional[list[np.ndarray]]:
    gens = rs.generators()
    seen = _TolerantSet()
    seen.add(np.eye(rs.d))
    queue = deque([np.eye(rs.d)])
    while queue:
        g = queue.popleft()
        for r in gens:
            _, new = seen.add(r @ g)
            if new:
                if len(seen) > cap:
                    return None
                queue.append(seen.items[-1])
    return seen.items


def root_closure(rs: ReflectionSet, cap: int = ROOT_CAP) -> Union[list[np.ndarray], RootOverflow]:
    """All normals ``g u_j`` (sign-canonical) of reflections in the group, or ``RootOverflow``."""
    if cap < len(rs):
        raise ValueError("cap must be at least the number of generators")
    roots = _TolerantSet()
    queue = deque()
    for u in rs.normals:
        if roots.add(u.copy())[1]:
            queue.append(u.copy())
    while queue:
        r = queue.popleft()
        for u in rs.normals:
            img = r - 2.0 * float(r @ u) * u
            img = canonical_sign(img / np.linalg.norm(img))
            if roots.add(img)[1]:
                if len(roots) > cap:
                    return RootOverflow(cap)
                queue.append(img)
    return roots.items


def line_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Angle in ``(0, pi/2]`` between the lines spanned by unit vectors ``a`` and ``b``."""
    c = abs(float(a @ b))
    return math.atan2(float(np.linalg.norm(a - float(a @ b) * b)), c)


def _angle_witness(roots: Sequence[np.ndarray], maxden: int, tol: float) -> Optional[AngleWitness]:
    R = np.asarray(roots)
    cache: dict[float, bool] = {}
    for i in range(len(R)):
        for j in range(i + 1, len(R)):
            theta = line_angle(R[i], R[j])
            if theta <= 1e-12:
                continue
            key = round(theta, 15)
            if key not in cache:
                cache[key] = isinstance(rational_angle(theta, maxden, tol), IrrationalUpTo)
            if cache[key]:
                return AngleWitness(R[i].copy(), R[j].copy(), theta)
    return None


def group_closure(
    rs: ReflectionSet, cap: int = GROUP_CAP, maxden: int = MAXDEN, tol: float = ANGLE_TOL
) -> CoxeterVerdict:
    """Breadth-first closure of the generators; on exceeding ``cap`` the roots are analysed."""
    if cap < 2:
        raise ValueError("cap must be at least 2")
    elements = _closure_bfs(rs, cap)
    if elements is not None:
        return Finite(len(elements), elements)
    roots = root_closure(rs, max(ROOT_CAP, len(rs)))
    if isinstance(roots, RootOverflow):
        w = _angle_witness(rs.normals, maxden, tol)
        return Infinite(w if w is not None else roots)
    w = _angle_witness(roots, maxden, tol)
    return Infinite(w) if w is not None else Inconclusive(cap)


def is_infinite(
    rs: ReflectionSet,
    cap: int = GROUP_CAP,
    maxden: int = MAXDEN,
    tol: float = ANGLE_TOL,
    root_cap: int = ROOT_CAP,
) -> CoxeterVerdict:
    """Finite, Infinite (with a witness) or Inconclusive.

    A closed finite root system means a finite group, so floating angle tests are only
    consulted when the roots overflow or the group closure hits its cap.
    """
    roots = root_closure(rs, max(root_cap, len(rs)))
    if isinstance(roots, RootOverflow):
        w = _angle_witness(rs.normals, maxden, tol)
        return Infinite(w if w is not None else roots)
    elements = _closure_bfs(rs, cap)
    if elements is not None:
        return Finite(len(elements), elements)
    w = _angle_witness(roots, maxden, tol)
    return Infinite(w) if w is not None else Inconclusive(cap)


def sign_character(g) -> int:
    g = np.asarray(g, dtype=float)
    if np.linalg.norm(g @ g.T - np.eye(len(g))) > DEDUP_TOL:
        raise ValueError("element is not orthogonal")
    return 1 if np.linalg.det(g) > 0 else -1


@dataclass(frozen=True)
class Orbit:
    points: np.ndarray
    signs: np.ndarray


def generic_orbit(
    G: Finite, x0=None, rng: Optional[np.random.Generator] = None, retries: int = ORBIT_RETRIES
) -> Orbit:
    """Orbit ``{g x0}`` with signs ``det g``, resampling ``x0`` on the unit sphere until the action is free."""
    rng = np.random.default_rng(0) if rng is None else rng
    d = G.elements[0].shape[0]
    mats = np.asarray(G.elements)
    signs = np.array([sign_character(g) for g in mats])
    for attempt in range(retries):
        if x0 is None or attempt > 0:
            x = rng.normal(size=d)
            x /= np.linalg.norm(x)
        else:
            x = np.asarray(x0, dtype=float)
        pts = mats @ x
        if len(pts) > 1 and cKDTree(pts).query_pairs(MIRROR_DISTANCE):
            continue
        return Orbit(pts, signs)
    raise ValueError("no free orbit found")
